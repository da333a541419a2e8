//! Seeded Monte Carlo reproduction of the Gaussian location experiment.
//!
//! Each trial draws `n` target samples from the worst-case target `P` and
//! `N` auxiliary samples from the shifted `Q` (large-N adversary: equal
//! covariances, the whole W2 budget in the mean), then scores three scalar
//! estimators by their squared error against the true mean:
//!
//! - `true_mean`: the target sample mean (`s = 1`)
//! - `pooled_mean`: the mean of all `n + N` samples (`s = n / (n + N)`)
//! - `optimal`: the min-max weight
//!
//! # Randomness
//!
//! Every stream is a `ChaCha8Rng` seeded with `seed_from_u64` of a SplitMix64
//! mix of `(base_seed, trial, role)`, where role 0 draws target samples and
//! role 1 auxiliary samples. Standard normals come from
//! `rand_distr::StandardNormal` (ziggurat). A sample is
//! `mean + cov^{1/2} w`; diagonal covariances multiply entry-wise. Results
//! are bit-exact for a given build of this crate and independent of the
//! thread count; other implementations should only agree in distribution.

use std::io::Write;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::adversary::{default_direction, worst_case_large_n};
use crate::estimator::{optimal_weight, risk_from_moments, LinearEstimator, NormMode, ProblemSpec};
use crate::exec::{compensated_sum, derive_seed, Execution};
use crate::gaussian::{psd_sqrt, GaussianMoments};
use crate::{Error, Result};

pub const ROLE_TARGET: u64 = 0;
pub const ROLE_AUX: u64 = 1;

/// The estimators compared in the experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorKind {
    TrueMean,
    PooledMean,
    Optimal,
}

impl EstimatorKind {
    pub const ALL: [EstimatorKind; 3] = [
        EstimatorKind::TrueMean,
        EstimatorKind::PooledMean,
        EstimatorKind::Optimal,
    ];

    pub fn weight(self, spec: &ProblemSpec) -> f64 {
        match self {
            EstimatorKind::TrueMean => 1.0,
            EstimatorKind::PooledMean => {
                spec.n_target as f64 / (spec.n_target + spec.n_aux) as f64
            }
            EstimatorKind::Optimal => optimal_weight(spec),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            EstimatorKind::TrueMean => "true_mean",
            EstimatorKind::PooledMean => "pooled_mean",
            EstimatorKind::Optimal => "optimal",
        }
    }
}

impl FromStr for EstimatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "true_mean" => Ok(EstimatorKind::TrueMean),
            "pooled_mean" => Ok(EstimatorKind::PooledMean),
            "optimal" => Ok(EstimatorKind::Optimal),
            other => Err(Error::InvalidConfig(format!("unknown estimator {other:?}"))),
        }
    }
}

fn default_estimators() -> Vec<EstimatorKind> {
    EstimatorKind::ALL.to_vec()
}

fn default_trials() -> usize {
    2000
}

/// Monte Carlo run description; also the JSON config file schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub spec: ProblemSpec,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Vec<f64>>,
    #[serde(default = "default_estimators")]
    pub estimators: Vec<EstimatorKind>,
}

impl ExperimentConfig {
    /// d = 200, n = 20, N = 1000, eps = delta = 1, Frobenius, 2000 trials.
    pub fn reference_default() -> Self {
        Self {
            spec: ProblemSpec::new(20, 1000, 200, 1.0, 1.0, NormMode::Frobenius)
                .expect("valid default spec"),
            trials: default_trials(),
            base_seed: 0,
            sweep: None,
            estimators: default_estimators(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.spec.validate()?;
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trials must be at least 1".into()));
        }
        if self.estimators.is_empty() {
            return Err(Error::InvalidConfig("no estimators selected".into()));
        }
        if let Some(eps) = &self.sweep {
            if let Some(bad) = eps.iter().find(|e| !(**e > 0.0 && e.is_finite())) {
                return Err(Error::InvalidConfig(format!(
                    "sweep values must be positive, got {bad}"
                )));
            }
        }
        Ok(())
    }
}

/// Aggregated squared errors of one estimator at one epsilon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorStats {
    pub estimator: EstimatorKind,
    pub weight: f64,
    pub empirical_mse: f64,
    /// Sample standard deviation of the per-trial squared errors over
    /// sqrt(trials); zero for a single trial.
    pub std_error: f64,
    pub trials: usize,
    pub analytic_mse: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub epsilon: f64,
    pub seed: u64,
    pub rows: Vec<EstimatorStats>,
}

impl ExperimentResult {
    pub fn get(&self, kind: EstimatorKind) -> Option<&EstimatorStats> {
        self.rows.iter().find(|r| r.estimator == kind)
    }

    /// `sqrt(se_a^2 + se_b^2)` for two estimators present in the result.
    pub fn combined_std_error(&self, a: EstimatorKind, b: EstimatorKind) -> Option<f64> {
        let (a, b) = (self.get(a)?, self.get(b)?);
        Some(a.std_error.hypot(b.std_error))
    }
}

enum Factor {
    Diagonal(DVector<f64>),
    Dense(DMatrix<f64>),
}

/// Draws from `N(mean, cov)` using a precomputed square-root factor.
pub struct GaussianSampler {
    mean: DVector<f64>,
    factor: Factor,
}

impl GaussianSampler {
    pub fn new(moments: &GaussianMoments) -> Result<Self> {
        let cov = moments.cov();
        let d = moments.dim();
        let is_diagonal = (0..d).all(|i| (0..d).all(|j| i == j || cov[(i, j)] == 0.0));
        let factor = if is_diagonal {
            Factor::Diagonal(cov.diagonal().map(|v| v.max(0.0).sqrt()))
        } else {
            Factor::Dense(psd_sqrt(cov)?)
        };
        Ok(Self {
            mean: moments.mean().clone(),
            factor,
        })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn sample(&self, rng: &mut impl Rng) -> DVector<f64> {
        let w = DVector::from_fn(self.dim(), |_, _| rng.sample::<f64, _>(StandardNormal));
        match &self.factor {
            Factor::Diagonal(diag) => &self.mean + diag.component_mul(&w),
            Factor::Dense(root) => &self.mean + root * w,
        }
    }

    /// Mean of `count` consecutive draws. Bit-identical to averaging the
    /// vectors returned by [`sample_gaussian`] with the same seed.
    pub fn sample_mean(&self, count: usize, stream_seed: u64) -> DVector<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(stream_seed);
        let mut sum = DVector::zeros(self.dim());
        for _ in 0..count {
            sum += self.sample(&mut rng);
        }
        sum / count as f64
    }
}

/// `count` draws from `N(mean, cov)` on the stream seeded by `stream_seed`.
pub fn sample_gaussian(moments: &GaussianMoments, count: usize, stream_seed: u64) -> Result<Vec<DVector<f64>>> {
    let sampler = GaussianSampler::new(moments)?;
    let mut rng = ChaCha8Rng::seed_from_u64(stream_seed);
    Ok((0..count).map(|_| sampler.sample(&mut rng)).collect())
}

/// Runs the experiment at `config.spec.eps`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    run_experiment_with(config, Execution::default())
}

pub fn run_experiment_with(config: &ExperimentConfig, exec: Execution) -> Result<ExperimentResult> {
    config.validate()?;
    let spec = &config.spec;
    let d = spec.d;
    let pair = worst_case_large_n(spec, optimal_weight(spec), &default_direction(d), &DVector::zeros(d))?;
    let target = GaussianSampler::new(&pair.p)?;
    let aux = GaussianSampler::new(&pair.q)?;
    let weights: Vec<f64> = config.estimators.iter().map(|k| k.weight(spec)).collect();
    let true_mean = pair.p.mean();

    let per_trial: Vec<Vec<f64>> = exec.map_indexed(config.trials, |t| {
        let t = t as u64;
        let mean_x = target.sample_mean(spec.n_target, derive_seed(config.base_seed, t, ROLE_TARGET));
        let mean_z = aux.sample_mean(spec.n_aux, derive_seed(config.base_seed, t, ROLE_AUX));
        weights
            .iter()
            .map(|&s| {
                let est = &mean_x * s + &mean_z * (1.0 - s);
                (est - true_mean).norm_squared()
            })
            .collect()
    });

    let mut rows = Vec::with_capacity(weights.len());
    for (j, (&kind, &s)) in config.estimators.iter().zip(&weights).enumerate() {
        let errors: Vec<f64> = per_trial.iter().map(|v| v[j]).collect();
        let (mse, se) = mean_and_std_error(&errors);
        let analytic = risk_from_moments(&LinearEstimator::Scalar { s }, &pair.p, &pair.q, spec.n_target, spec.n_aux)?;
        rows.push(EstimatorStats {
            estimator: kind,
            weight: s,
            empirical_mse: mse,
            std_error: se,
            trials: config.trials,
            analytic_mse: Some(analytic),
        });
    }
    Ok(ExperimentResult {
        epsilon: spec.eps,
        seed: config.base_seed,
        rows,
    })
}

/// One result per epsilon in `config.sweep`, in increasing epsilon order.
/// Every point reuses `base_seed`, so the curves share their noise.
pub fn sweep(config: &ExperimentConfig) -> Result<Vec<ExperimentResult>> {
    sweep_with(config, Execution::default())
}

pub fn sweep_with(config: &ExperimentConfig, exec: Execution) -> Result<Vec<ExperimentResult>> {
    config.validate()?;
    let mut eps = config
        .sweep
        .clone()
        .filter(|v| !v.is_empty())
        .ok_or_else(|| Error::InvalidConfig("sweep list is empty".into()))?;
    eps.sort_by(f64::total_cmp);
    eps.into_iter()
        .map(|e| {
            let point = ExperimentConfig {
                spec: config.spec.with_eps(e)?,
                sweep: None,
                ..config.clone()
            };
            run_experiment_with(&point, exec)
        })
        .collect()
}

fn mean_and_std_error(values: &[f64]) -> (f64, f64) {
    let count = values.len() as f64;
    let mean = compensated_sum(values) / count;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let sq: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
    let var = compensated_sum(&sq) / (count - 1.0);
    (mean, (var / count).sqrt())
}

pub const CSV_HEADER: [&str; 7] = [
    "epsilon",
    "estimator",
    "empirical_mse",
    "std_error",
    "analytic_mse",
    "trials",
    "seed",
];

/// 17 significant digits.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes results as CSV (`epsilon,estimator,empirical_mse,std_error,analytic_mse,trials,seed`).
pub fn write_csv<W: Write>(results: &[ExperimentResult], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(CSV_HEADER)?;
    for res in results {
        for row in &res.rows {
            w.write_record([
                format_float(res.epsilon),
                row.estimator.as_str().to_string(),
                format_float(row.empirical_mse),
                format_float(row.std_error),
                row.analytic_mse.map(format_float).unwrap_or_default(),
                row.trials.to_string(),
                res.seed.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config(trials: usize) -> ExperimentConfig {
        ExperimentConfig {
            spec: ProblemSpec::new(5, 40, 6, 1.0, 1.0, NormMode::Frobenius).unwrap(),
            trials,
            base_seed: 17,
            sweep: None,
            estimators: EstimatorKind::ALL.to_vec(),
        }
    }

    #[test]
    fn zero_covariance_returns_mean() {
        let m = GaussianMoments::new(DVector::from_vec(vec![1.0, -2.0, 3.0]), DMatrix::zeros(3, 3)).unwrap();
        for x in sample_gaussian(&m, 10, 99).unwrap() {
            assert_eq!(x.as_slice(), &[1.0, -2.0, 3.0]);
        }
    }

    #[test]
    fn standard_normal_sample_mean_is_close() {
        let m = GaussianMoments::isotropic(DVector::from_vec(vec![0.5, -1.0]), 1.0).unwrap();
        let xs = sample_gaussian(&m, 100_000, 3).unwrap();
        let mean = xs.iter().fold(DVector::zeros(2), |acc, x| acc + x) / xs.len() as f64;
        let bound = 4.0 / (100_000f64).sqrt();
        assert!((mean[0] - 0.5).abs() < bound);
        assert!((mean[1] + 1.0).abs() < bound);
    }

    #[test]
    fn rank_one_samples_stay_on_line() {
        let u = DVector::from_vec(vec![1.0, 2.0, 2.0]) / 3.0;
        let mean = DVector::from_vec(vec![1.0, 0.0, -1.0]);
        let m = GaussianMoments::new(mean.clone(), &u * u.transpose()).unwrap();
        for x in sample_gaussian(&m, 200, 5).unwrap() {
            let r = &x - &mean;
            let off = &r - &u * u.dot(&r);
            assert!(off.amax() < 1e-10);
        }
    }

    #[test]
    fn dense_covariance_sampling_matches_moments() {
        let cov = DMatrix::from_row_slice(2, 2, &[2.0, 0.8, 0.8, 1.0]);
        let m = GaussianMoments::new(DVector::zeros(2), cov.clone()).unwrap();
        let xs = sample_gaussian(&m, 50_000, 8).unwrap();
        let emp = xs.iter().fold(DMatrix::zeros(2, 2), |acc, x| acc + x * x.transpose()) / xs.len() as f64;
        assert!((emp - cov).amax() < 0.06);
    }

    #[test]
    fn same_seed_same_samples() {
        let m = GaussianMoments::isotropic(DVector::zeros(3), 2.0).unwrap();
        assert_eq!(sample_gaussian(&m, 5, 1).unwrap(), sample_gaussian(&m, 5, 1).unwrap());
        assert_ne!(sample_gaussian(&m, 5, 1).unwrap(), sample_gaussian(&m, 5, 2).unwrap());
    }

    #[test]
    fn streaming_mean_matches_materialised_samples() {
        let m = GaussianMoments::isotropic(DVector::from_vec(vec![1.0, 2.0]), 0.3).unwrap();
        let xs = sample_gaussian(&m, 37, 4).unwrap();
        let mut sum = DVector::zeros(2);
        for x in &xs {
            sum += x;
        }
        let expected = sum / 37.0;
        assert_eq!(GaussianSampler::new(&m).unwrap().sample_mean(37, 4), expected);
    }

    #[test]
    fn experiment_is_reproducible_and_schedule_free() {
        let cfg = small_config(64);
        let a = run_experiment_with(&cfg, Execution::Sequential).unwrap();
        let b = run_experiment_with(&cfg, Execution::Parallel).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, run_experiment(&cfg).unwrap());
    }

    #[test]
    fn analytic_values_follow_hand_expansions() {
        let cfg = ExperimentConfig::reference_default();
        let cfg = ExperimentConfig { trials: 2, ..cfg };
        let res = run_experiment(&cfg).unwrap();
        let root_d = 200f64.sqrt();
        let true_mean = res.get(EstimatorKind::TrueMean).unwrap().analytic_mse.unwrap();
        assert!((true_mean - root_d / 20.0).abs() < 1e-12);
        let pooled = res.get(EstimatorKind::PooledMean).unwrap().analytic_mse.unwrap();
        let expected = (1000.0f64 / 1020.0).powi(2) + root_d / 1020.0;
        assert!((pooled - expected).abs() < 1e-12);
    }

    #[test]
    fn optimal_dominates_analytically_along_sweep() {
        let cfg = ExperimentConfig {
            sweep: Some(vec![3.0, 0.01, 0.3, 1.0, 10.0]),
            ..small_config(2)
        };
        let results = sweep(&cfg).unwrap();
        let eps: Vec<f64> = results.iter().map(|r| r.epsilon).collect();
        assert_eq!(eps, vec![0.01, 0.3, 1.0, 3.0, 10.0]);
        let mut prev = 0.0;
        for r in &results {
            let a = |k| r.get(k).unwrap().analytic_mse.unwrap();
            let opt = a(EstimatorKind::Optimal);
            assert!(opt <= a(EstimatorKind::TrueMean).min(a(EstimatorKind::PooledMean)) + 1e-15);
            assert!(opt >= prev);
            prev = opt;
        }
    }

    #[test]
    fn small_budget_makes_optimal_match_pooled() {
        let cfg = ExperimentConfig {
            sweep: Some(vec![1e-4]),
            ..small_config(200)
        };
        let r = &sweep(&cfg).unwrap()[0];
        let opt = r.get(EstimatorKind::Optimal).unwrap();
        let pooled = r.get(EstimatorKind::PooledMean).unwrap();
        let se = r.combined_std_error(EstimatorKind::Optimal, EstimatorKind::PooledMean).unwrap();
        assert!((opt.empirical_mse - pooled.empirical_mse).abs() <= 3.0 * se);
        assert!((opt.weight - pooled.weight).abs() < 1e-6);
    }

    #[test]
    fn config_validation() {
        let mut cfg = small_config(0);
        assert!(cfg.validate().is_err());
        cfg.trials = 1;
        cfg.sweep = Some(vec![1.0, -1.0]);
        assert!(cfg.validate().is_err());
        cfg.sweep = Some(vec![]);
        assert!(sweep(&cfg).is_err());
        cfg.sweep = None;
        cfg.estimators.clear();
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn config_json_defaults() {
        let json = r#"{"spec":{"n":20,"N":1000,"d":200,"eps":1,"delta_sq":1,"mode":"frobenius"}}"#;
        let cfg: ExperimentConfig = serde_json::from_str(json).unwrap();
        assert_eq!(cfg, ExperimentConfig::reference_default());
    }

    #[test]
    fn std_error_of_known_values() {
        let (m, se) = mean_and_std_error(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((se - (5.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-15);
        assert_eq!(mean_and_std_error(&[7.0]), (7.0, 0.0));
    }

    #[test]
    fn csv_layout() {
        let res = run_experiment(&small_config(3)).unwrap();
        let mut buf = Vec::new();
        write_csv(&[res], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "epsilon,estimator,empirical_mse,std_error,analytic_mse,trials,seed"
        );
        let first: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(first[0], "1.0000000000000000e0");
        assert_eq!(first[1], "true_mean");
        assert_eq!(first[5], "3");
        assert_eq!(first[6], "17");
        assert_eq!(text.lines().count(), 4);
    }
}
