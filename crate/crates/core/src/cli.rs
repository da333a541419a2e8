//! `auxmean` command-line front end.
//!
//! Every subcommand is a thin wrapper over a library call. JSON keys:
//!
//! - `weight`: `{"s", "risk"}`
//! - `risk`: the closed-form report `{"s_star", "risk_star", "mode", "spec"}`,
//!   or with moment inputs `{"s", "mse", "normalized_mse"}`
//! - `w2`: `{"w2_squared"}`
//! - `adversary`: `{"p", "q", "mean_shift_sq", "cov_budget_sq"}` with moments
//!   as `{"mean": [..], "cov": [[..]]}`
//! - `verify`: one oracle report per line
//!
//! Exit codes: 0 on success, 1 for infeasible specs or failed oracles, 2 for
//! usage errors.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::adversary::{default_direction, worst_case_kkt, worst_case_large_n, AdversaryPair};
use crate::estimator::{minmax_risk, optimal_weight, risk_from_moments, LinearEstimator, NormMode, ProblemSpec};
use crate::experiments::{run_experiment, sweep, write_csv, EstimatorKind, ExperimentConfig, ExperimentResult};
use crate::gaussian::{gelbrich_w2_squared, GaussianMoments};
use crate::verify::{run_suite, Suite};
use crate::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "auxmean", version, about = "Robust mean estimation with auxiliary samples")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Optimal weight and min-max risk.
    Weight(SpecArgs),
    /// Closed-form min-max risk, or the exact MSE under given moments.
    Risk(RiskArgs),
    /// Squared W2 distance between two Gaussian moment files.
    W2(PairInput),
    /// Worst-case moment pair.
    Adversary(AdversaryArgs),
    /// Monte Carlo run at a single epsilon.
    Simulate(SimulateArgs),
    /// Monte Carlo runs over a list of epsilons.
    Sweep(SweepArgs),
    /// Oracle suites, one JSON report per line.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Args, Default)]
pub struct SpecArgs {
    /// Number of target samples.
    #[arg(long = "n")]
    pub n_target: Option<usize>,
    /// Number of auxiliary samples.
    #[arg(long = "N")]
    pub n_aux: Option<usize>,
    /// Dimension.
    #[arg(long)]
    pub d: Option<usize>,
    /// W2 radius.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Lower bound delta^2 on the covariance norm.
    #[arg(long = "delta-sq")]
    pub delta_sq: Option<f64>,
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    /// JSON experiment config; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Frobenius,
    Trace,
    Operator,
}

impl From<ModeArg> for NormMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Frobenius => NormMode::Frobenius,
            ModeArg::Trace => NormMode::Trace,
            ModeArg::Operator => NormMode::Operator,
        }
    }
}

#[derive(Debug, Clone, Args, Default)]
pub struct PairInput {
    /// Target moments file `{"mean": [..], "cov": [[..]]}`.
    #[arg(long, requires = "q", conflicts_with = "pair")]
    pub p: Option<PathBuf>,
    /// Auxiliary moments file.
    #[arg(long, requires = "p", conflicts_with = "pair")]
    pub q: Option<PathBuf>,
    /// File holding `{"p": .., "q": ..}`, e.g. `adversary` output.
    #[arg(long)]
    pub pair: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct RiskArgs {
    #[command(flatten)]
    pub spec: SpecArgs,
    #[command(flatten)]
    pub moments: PairInput,
    /// Scalar weight; defaults to the optimal weight.
    #[arg(long)]
    pub s: Option<f64>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum AdversaryKind {
    LargeN,
    Kkt,
}

#[derive(Debug, Clone, Args)]
pub struct AdversaryArgs {
    #[command(flatten)]
    pub spec: SpecArgs,
    #[arg(long, value_enum, default_value = "large-n")]
    pub kind: AdversaryKind,
    /// Scalar weight; defaults to the optimal weight.
    #[arg(long)]
    pub s: Option<f64>,
    /// Unit mean-shift direction, comma separated; defaults to e1.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub direction: Option<Vec<f64>>,
    /// Target mean, comma separated; defaults to zero.
    #[arg(long = "base-mean", value_delimiter = ',', allow_hyphen_values = true)]
    pub base_mean: Option<Vec<f64>>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub spec: SpecArgs,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Subset of true_mean, pooled_mean, optimal.
    #[arg(long, value_delimiter = ',')]
    pub estimators: Option<Vec<String>>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Epsilon values, comma separated; overrides the config's sweep list.
    #[arg(long = "eps-list", value_delimiter = ',')]
    pub eps_list: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value = "all")]
    pub suite: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Serialize)]
struct WeightOutput {
    s: f64,
    risk: f64,
}

#[derive(Serialize)]
struct MomentRiskOutput {
    s: f64,
    mse: f64,
    normalized_mse: f64,
}

#[derive(Serialize)]
struct W2Output {
    w2_squared: f64,
}

#[derive(Deserialize)]
struct PairFile {
    p: GaussianMoments,
    q: GaussianMoments,
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run_cli<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let rendered = e.render().to_string();
            let sink: &mut dyn Write = if code == 0 { stdout } else { stderr };
            let _ = write!(sink, "{rendered}");
            return code;
        }
    };
    match execute(cli.command, stdout) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::BudgetExhausted { .. } => 1,
        _ => 2,
    }
}

fn execute(command: Command, stdout: &mut dyn Write) -> Result<i32> {
    match command {
        Command::Weight(args) => {
            let spec = resolve_spec(&args)?;
            let rep = minmax_risk(&spec);
            emit_json(stdout, None, &WeightOutput {
                s: rep.s_star,
                risk: rep.risk_star,
            })?;
        }
        Command::Risk(args) => {
            let spec = resolve_spec(&args.spec)?;
            match load_pair(&args.moments)? {
                None => emit_json(stdout, None, &minmax_risk(&spec))?,
                Some((p, q)) => {
                    let s = args.s.unwrap_or_else(|| optimal_weight(&spec));
                    let est = LinearEstimator::scalar(s)?;
                    let mse = risk_from_moments(&est, &p, &q, spec.n_target, spec.n_aux)?;
                    let norm = spec.mode.psd_norm(p.cov());
                    emit_json(stdout, None, &MomentRiskOutput {
                        s,
                        mse,
                        normalized_mse: mse / norm,
                    })?;
                }
            }
        }
        Command::W2(input) => {
            let (p, q) = load_pair(&input)?
                .ok_or_else(|| Error::InvalidConfig("w2 needs --p and --q, or --pair".into()))?;
            emit_json(stdout, None, &W2Output {
                w2_squared: gelbrich_w2_squared(&p, &q)?,
            })?;
        }
        Command::Adversary(args) => {
            let spec = resolve_spec(&args.spec)?;
            let pair = build_adversary(&spec, &args)?;
            emit_json(stdout, args.output.as_deref(), &pair)?;
        }
        Command::Simulate(args) => {
            let config = resolve_run_config(&args.run, None)?;
            let result = run_experiment(&config)?;
            emit_results(stdout, &args.run, &[result])?;
        }
        Command::Sweep(args) => {
            let config = resolve_run_config(&args.run, args.eps_list.clone())?;
            let results = sweep(&config)?;
            emit_results(stdout, &args.run, &results)?;
        }
        Command::Verify(args) => {
            let suite: Suite = args.suite.parse()?;
            let reports = run_suite(suite, args.seed)?;
            let mut text = String::new();
            for r in &reports {
                text.push_str(&serde_json::to_string(r)?);
                text.push('\n');
            }
            write_output(stdout, args.output.as_deref(), text.as_bytes())?;
            if reports.iter().any(|r| !r.passed) {
                return Ok(1);
            }
        }
    }
    Ok(0)
}

fn build_adversary(spec: &ProblemSpec, args: &AdversaryArgs) -> Result<AdversaryPair> {
    let direction = match &args.direction {
        Some(v) => DVector::from_vec(v.clone()),
        None => default_direction(spec.d),
    };
    let base = match &args.base_mean {
        Some(v) => DVector::from_vec(v.clone()),
        None => DVector::zeros(spec.d),
    };
    let s = args.s.unwrap_or_else(|| optimal_weight(spec));
    match args.kind {
        AdversaryKind::LargeN => worst_case_large_n(spec, s, &direction, &base),
        AdversaryKind::Kkt => worst_case_kkt(spec, s, &direction, &base),
    }
}

fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

fn base_config(args: &SpecArgs) -> Result<ExperimentConfig> {
    match &args.config {
        Some(path) => load_config(path),
        None => Ok(ExperimentConfig::reference_default()),
    }
}

fn apply_spec_flags(base: ProblemSpec, args: &SpecArgs) -> Result<ProblemSpec> {
    ProblemSpec::new(
        args.n_target.unwrap_or(base.n_target),
        args.n_aux.unwrap_or(base.n_aux),
        args.d.unwrap_or(base.d),
        args.eps.unwrap_or(base.eps),
        args.delta_sq.unwrap_or(base.delta_sq),
        args.mode.map(NormMode::from).unwrap_or(base.mode),
    )
}

/// Spec from the config file (or the default experiment) overridden by flags.
pub fn resolve_spec(args: &SpecArgs) -> Result<ProblemSpec> {
    apply_spec_flags(base_config(args)?.spec, args)
}

fn resolve_run_config(args: &RunArgs, eps_list: Option<Vec<f64>>) -> Result<ExperimentConfig> {
    let mut config = base_config(&args.spec)?;
    config.spec = apply_spec_flags(config.spec, &args.spec)?;
    if let Some(t) = args.trials {
        config.trials = t;
    }
    if let Some(seed) = args.seed {
        config.base_seed = seed;
    }
    if let Some(names) = &args.estimators {
        config.estimators = names
            .iter()
            .map(|n| n.parse::<EstimatorKind>())
            .collect::<Result<_>>()?;
    }
    if eps_list.is_some() {
        config.sweep = eps_list;
    }
    config.validate()?;
    Ok(config)
}

fn load_pair(input: &PairInput) -> Result<Option<(GaussianMoments, GaussianMoments)>> {
    if let Some(path) = &input.pair {
        let pair: PairFile = serde_json::from_str(&fs::read_to_string(path)?)?;
        return Ok(Some((pair.p, pair.q)));
    }
    match (&input.p, &input.q) {
        (Some(p), Some(q)) => {
            let p: GaussianMoments = serde_json::from_str(&fs::read_to_string(p)?)?;
            let q: GaussianMoments = serde_json::from_str(&fs::read_to_string(q)?)?;
            Ok(Some((p, q)))
        }
        _ => Ok(None),
    }
}

fn emit_json<T: Serialize>(stdout: &mut dyn Write, output: Option<&Path>, value: &T) -> Result<()> {
    let mut text = serde_json::to_string(value)?;
    text.push('\n');
    write_output(stdout, output, text.as_bytes())
}

fn emit_results(stdout: &mut dyn Write, args: &RunArgs, results: &[ExperimentResult]) -> Result<()> {
    let bytes = match args.format {
        Format::Csv => {
            let mut buf = Vec::new();
            write_csv(results, &mut buf)?;
            buf
        }
        Format::Json => {
            let mut text = serde_json::to_string_pretty(results)?;
            text.push('\n');
            text.into_bytes()
        }
    };
    write_output(stdout, args.output.as_deref(), &bytes)
}

fn write_output(stdout: &mut dyn Write, output: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match output {
        Some(path) => fs::write(path, bytes)?,
        None => stdout.write_all(bytes)?,
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let argv = std::iter::once("auxmean").chain(args.iter().copied());
        let code = run_cli(argv, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn weight_matches_library() {
        let (code, out, _) = run(&[
            "weight", "--n", "20", "--N", "1000", "--d", "200", "--eps", "1", "--delta-sq", "1", "--mode",
            "frobenius",
        ]);
        assert_eq!(code, 0);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        let spec = ProblemSpec::new(20, 1000, 200, 1.0, 1.0, NormMode::Frobenius).unwrap();
        let rep = minmax_risk(&spec);
        assert_eq!(v["s"].as_f64().unwrap(), rep.s_star);
        assert_eq!(v["risk"].as_f64().unwrap(), rep.risk_star);
        assert!(out.starts_with(r#"{"s":"#));
    }

    #[test]
    fn unknown_subcommand_is_usage_error() {
        let (code, _, err) = run(&["frobnicate"]);
        assert_eq!(code, 2);
        assert!(!err.is_empty());
    }

    #[test]
    fn invalid_spec_is_usage_error() {
        let (code, _, err) = run(&["weight", "--n", "0"]);
        assert_eq!(code, 2);
        assert!(err.contains("invalid problem spec"));
    }

    #[test]
    fn kkt_budget_exhaustion_exits_one() {
        let (code, _, err) = run(&[
            "adversary", "--kind", "kkt", "--n", "3", "--N", "2", "--d", "3", "--eps", "0.1", "--mode", "operator",
        ]);
        assert_eq!(code, 1);
        assert!(err.contains("budget exhausted"));
    }

    #[test]
    fn conflicting_inputs_rejected() {
        let (code, _, _) = run(&["w2", "--p", "a.json", "--q", "b.json", "--pair", "c.json"]);
        assert_eq!(code, 2);
    }

    #[test]
    fn missing_config_file_is_usage_error() {
        let (code, _, err) = run(&["weight", "--config", "/nonexistent/config.json"]);
        assert_eq!(code, 2);
        assert!(err.starts_with("error:"));
    }

    #[test]
    fn help_goes_to_stdout() {
        let (code, out, _) = run(&["--help"]);
        assert_eq!(code, 0);
        assert!(out.contains("verify"));
    }
}
