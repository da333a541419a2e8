//! Brute-force oracles for the closed forms.
//!
//! None of these call the formula they check: the scalar optimum is found by
//! golden-section search on the objective, matrix optimality by random
//! perturbation, and adversary optimality by sampling feasible pairs on the
//! W2 sphere. Trials draw their randomness from `(seed, trial)` only, so
//! reports are independent of scheduling.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::adversary::{default_direction, worst_case_large_n};
use crate::estimator::{
    matrix_objective, minmax_risk, optimal_weight, risk_from_moments, scalar_objective,
    spectral_norm, LinearEstimator, ProblemSpec,
};
use crate::exec::{derive_seed, Execution};
use crate::gaussian::GaussianMoments;
use crate::{Error, Result};

/// Tolerance on the optimal weight.
pub const WEIGHT_TOL: f64 = 1e-7;
/// Relative tolerance on the min-max risk.
pub const RISK_REL_TOL: f64 = 1e-9;
/// Allowed improvement of a perturbed matrix over the scalar optimum.
pub const MATRIX_TOL: f64 = 1e-9;
/// Base tolerance for the adversary check, before the finite-N slack.
pub const ADVERSARY_TOL: f64 = 1e-6;
/// Interval tolerance used for golden-section searches.
pub const GOLDEN_TOL: f64 = 1e-10;

/// Outcome of one oracle comparison. `passed` iff `abs_gap <= tolerance`.
///
/// For one-sided checks (nothing beats the optimum) `abs_gap` is the amount
/// by which the oracle beat the closed form, clamped at zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub quantity: String,
    pub closed_form: f64,
    pub oracle_value: f64,
    pub abs_gap: f64,
    pub passed: bool,
    pub tolerance: f64,
}

impl OracleReport {
    pub fn new(quantity: impl Into<String>, closed_form: f64, oracle_value: f64, abs_gap: f64, tolerance: f64) -> Self {
        Self {
            quantity: quantity.into(),
            closed_form,
            oracle_value,
            abs_gap,
            passed: abs_gap <= tolerance,
            tolerance,
        }
    }

    /// Two-sided comparison.
    pub fn two_sided(quantity: impl Into<String>, closed_form: f64, oracle_value: f64, tolerance: f64) -> Self {
        Self::new(
            quantity,
            closed_form,
            oracle_value,
            (closed_form - oracle_value).abs(),
            tolerance,
        )
    }
}

/// Golden-section search for the minimiser of a unimodal `f` on `[lo, hi]`.
pub fn golden_section_min(f: impl Fn(f64) -> f64, lo: f64, hi: f64, tol: f64) -> Result<(f64, f64)> {
    if lo.is_nan() || hi.is_nan() || lo >= hi {
        return Err(Error::InvalidInterval { lo, hi });
    }
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a) > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    // Endpoints are candidates too; f may be monotone on the interval.
    let mid = 0.5 * (a + b);
    let best = [(mid, f(mid)), (lo, f(lo)), (hi, f(hi)), (c, fc), (d, fd)]
        .into_iter()
        .fold((mid, f64::INFINITY), |acc, cand| if cand.1 < acc.1 { cand } else { acc });
    Ok(best)
}

/// Weight and risk comparisons for one spec.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarOptimumCheck {
    pub weight: OracleReport,
    pub risk: OracleReport,
}

impl ScalarOptimumCheck {
    pub fn passed(&self) -> bool {
        self.weight.passed && self.risk.passed
    }
}

/// Compares the closed-form weight and risk against a golden-section search
/// of the scalar objective over `[0, 1]`.
pub fn check_scalar_optimum(spec: &ProblemSpec) -> ScalarOptimumCheck {
    let (s_oracle, g_oracle) =
        golden_section_min(|s| scalar_objective(spec, s), 0.0, 1.0, GOLDEN_TOL)
            .expect("unit interval is valid");
    let rep = minmax_risk(spec);
    let tag = spec.mode.as_str();
    ScalarOptimumCheck {
        weight: OracleReport::two_sided(format!("optimal_weight/{tag}"), rep.s_star, s_oracle, WEIGHT_TOL),
        risk: OracleReport::two_sided(
            format!("minmax_risk/{tag}"),
            rep.risk_star,
            g_oracle,
            RISK_REL_TOL * rep.risk_star.abs(),
        ),
    }
}

/// Random perturbation families used around `s* I`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Perturbation {
    Dense,
    Symmetric,
    Diagonal,
}

impl Perturbation {
    fn for_trial(trial: usize) -> Self {
        match trial % 3 {
            0 => Perturbation::Dense,
            1 => Perturbation::Symmetric,
            _ => Perturbation::Diagonal,
        }
    }

    fn draw(self, rng: &mut ChaCha8Rng, d: usize) -> DMatrix<f64> {
        let mut e = DMatrix::from_fn(d, d, |_, _| rng.sample::<f64, _>(StandardNormal));
        match self {
            Perturbation::Dense => e,
            Perturbation::Symmetric => (&e + e.transpose()) * 0.5,
            Perturbation::Diagonal => {
                e.fill_lower_triangle(0.0, 1);
                e.fill_upper_triangle(0.0, 1);
                e
            }
        }
    }
}

/// Checks that no perturbation `s* I + scale E` lowers the matrix objective
/// by more than [`MATRIX_TOL`].
pub fn check_matrix_optimum(spec: &ProblemSpec, trials: usize, perturb_scale: f64, seed: u64) -> Result<OracleReport> {
    check_matrix_optimum_with(spec, trials, perturb_scale, seed, Execution::default())
}

pub fn check_matrix_optimum_with(
    spec: &ProblemSpec,
    trials: usize,
    perturb_scale: f64,
    seed: u64,
    exec: Execution,
) -> Result<OracleReport> {
    let d = spec.d;
    let s_star = optimal_weight(spec);
    let center = DMatrix::<f64>::identity(d, d) * s_star;
    let center_value = matrix_objective(spec, &center)?;
    let values = exec.map_indexed(trials, |t| {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, t as u64, 0));
        let e = Perturbation::for_trial(t).draw(&mut rng, d);
        matrix_objective(spec, &(&center + e * perturb_scale))
    });
    let mut best = f64::INFINITY;
    for v in values {
        best = best.min(v?);
    }
    Ok(OracleReport::new(
        format!("matrix_optimum/{}", spec.mode),
        center_value,
        best,
        (center_value - best).max(0.0),
        MATRIX_TOL,
    ))
}

/// Shows that the risk diverges when `A + B != I`.
///
/// Both distributions get identity covariance and a common mean `t v`, with
/// `v` the principal right singular vector of `A + B - I` and `n = N = 1`.
/// Returns the risk for each `t` in `scale_sequence`.
pub fn check_unbounded_without_sum_constraint(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    scale_sequence: &[f64],
) -> Result<Vec<f64>> {
    let est = LinearEstimator::matrix(a.clone(), b.clone())?;
    let d = a.nrows();
    let defect = a + b - DMatrix::<f64>::identity(d, d);
    let deviation = spectral_norm(&defect);
    if deviation <= 1e-6 {
        return Err(Error::SumConstraintSatisfied { deviation });
    }
    let svd = defect.svd(false, true);
    let v_t = svd.v_t.expect("requested right singular vectors");
    let top = svd
        .singular_values
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, &x)| if x > acc.1 { (i, x) } else { acc })
        .0;
    let v: DVector<f64> = v_t.row(top).transpose();
    scale_sequence
        .iter()
        .map(|&t| {
            let m = GaussianMoments::isotropic(&v * t, 1.0)?;
            risk_from_moments(&est, &m, &m, 1, 1)
        })
        .collect()
}

/// Slack allowed above the large-N adversary's risk: the finite-N optimum can
/// exceed it by up to `(1 - s)^2 Tr(S_x) / (N (N - 1))`.
pub fn adversary_tolerance(trace_cov_x: f64, n_aux: usize) -> f64 {
    let m = n_aux as f64 - 1.0;
    ADVERSARY_TOL + 5.0 * trace_cov_x / (m * m)
}

/// Samples random feasible auxiliary distributions on the W2 sphere around
/// the large-N worst-case target and checks none beats the constructed pair.
///
/// Trials scale the auxiliary covariance by `k^2` (the isotropic family
/// relative to `S_x`) and spend the remaining budget on a mean shift in a
/// uniformly random direction. Trial 0 is the constructed pair itself.
pub fn check_adversary_optimality(spec: &ProblemSpec, s: f64, trials: usize, seed: u64) -> Result<OracleReport> {
    check_adversary_optimality_with(spec, s, trials, seed, Execution::default())
}

pub fn check_adversary_optimality_with(
    spec: &ProblemSpec,
    s: f64,
    trials: usize,
    seed: u64,
    exec: Execution,
) -> Result<OracleReport> {
    let d = spec.d;
    let est = LinearEstimator::scalar(s)?;
    let pair = worst_case_large_n(spec, s, &default_direction(d), &DVector::zeros(d))?;
    let (n, big_n) = (spec.n_target, spec.n_aux);
    let adversary_risk = risk_from_moments(&est, &pair.p, &pair.q, n, big_n)?;
    let trace_x = pair.p.cov().trace();
    let eps_sq = spec.eps * spec.eps;
    let k_radius = spec.eps / trace_x.sqrt();

    let risks = exec.map_indexed(trials, |t| -> Result<f64> {
        if t == 0 {
            return risk_from_moments(&est, &pair.p, &pair.q, n, big_n);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, t as u64, 1));
        let k = (1.0 + k_radius * rng.random_range(-1.0..=1.0)).max(0.0);
        let cov_cost = ((k - 1.0) * (k - 1.0) * trace_x).min(eps_sq);
        let dir = random_unit(&mut rng, d);
        let q = GaussianMoments::new(
            pair.p.mean() + dir * (eps_sq - cov_cost).sqrt(),
            pair.p.cov() * (k * k),
        )?;
        risk_from_moments(&est, &pair.p, &q, n, big_n)
    });
    let mut worst = f64::NEG_INFINITY;
    for r in risks {
        worst = worst.max(r?);
    }
    Ok(OracleReport::new(
        format!("adversary_optimality/{}", spec.mode),
        adversary_risk,
        worst,
        (worst - adversary_risk).max(0.0),
        adversary_tolerance(trace_x, big_n),
    ))
}

/// Uniformly random unit vector.
pub fn random_unit(rng: &mut ChaCha8Rng, d: usize) -> DVector<f64> {
    loop {
        let v = DVector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal));
        let norm = v.norm();
        if norm > 1e-12 {
            return v / norm;
        }
    }
}

/// Named groups of oracle checks exposed through the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    All,
    Scalar,
    Matrix,
    Adversary,
    Gelbrich,
}

impl std::str::FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all" => Ok(Suite::All),
            "scalar" => Ok(Suite::Scalar),
            "matrix" => Ok(Suite::Matrix),
            "adversary" => Ok(Suite::Adversary),
            "gelbrich" => Ok(Suite::Gelbrich),
            other => Err(Error::InvalidConfig(format!("unknown suite {other:?}"))),
        }
    }
}

/// Random specs per mode in the scalar suite.
pub const SCALAR_SUITE_SPECS: usize = 200;
/// Perturbations per (dimension, mode) in the matrix suite.
pub const MATRIX_SUITE_TRIALS: usize = 1000;
pub const MATRIX_SUITE_DIMS: [usize; 3] = [2, 3, 5];
pub const MATRIX_SUITE_SCALE: f64 = 0.1;
/// Feasible pairs per (dimension, mode) in the adversary suite.
pub const ADVERSARY_SUITE_TRIALS: usize = 500;
pub const ADVERSARY_SUITE_AUX: usize = 10_000;
/// Random pairs / triples in the Gelbrich suite.
pub const GELBRICH_SUITE_CASES: usize = 100;

/// Random spec with `n, N` log-uniform on `[1, 1e4]`, `d` uniform on
/// `[1, 500]` and `eps^2/delta^2` log-uniform on `[1e-4, 1e4]`.
pub fn random_spec(rng: &mut ChaCha8Rng, mode: crate::estimator::NormMode) -> ProblemSpec {
    let log_count = |rng: &mut ChaCha8Rng| 10f64.powf(rng.random_range(0.0..=4.0)).round() as usize;
    let n = log_count(rng).max(1);
    let big_n = log_count(rng).max(1);
    let d = rng.random_range(1..=500);
    let ratio = 10f64.powf(rng.random_range(-4.0..=4.0));
    let delta_sq = 10f64.powf(rng.random_range(-1.0..=1.0));
    let eps = (ratio * delta_sq).sqrt();
    ProblemSpec::new(n, big_n, d, eps, delta_sq, mode).expect("generated spec is valid")
}

/// Runs a suite and returns its reports in a fixed order.
pub fn run_suite(suite: Suite, seed: u64) -> Result<Vec<OracleReport>> {
    use crate::estimator::NormMode;
    let mut out = Vec::new();
    let wants = |s: Suite| suite == Suite::All || suite == s;

    if wants(Suite::Scalar) {
        for (m, mode) in NormMode::ALL.into_iter().enumerate() {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, m as u64, 10));
            for _ in 0..SCALAR_SUITE_SPECS {
                let check = check_scalar_optimum(&random_spec(&mut rng, mode));
                out.push(check.weight);
                out.push(check.risk);
            }
        }
    }
    if wants(Suite::Matrix) {
        for mode in NormMode::ALL {
            for d in MATRIX_SUITE_DIMS {
                let spec = ProblemSpec::new(20, 1000, d, 1.0, 1.0, mode)?;
                let mut rep = check_matrix_optimum(&spec, MATRIX_SUITE_TRIALS, MATRIX_SUITE_SCALE, seed)?;
                rep.quantity = format!("{}/d={d}", rep.quantity);
                out.push(rep);
            }
        }
    }
    if wants(Suite::Adversary) {
        for mode in NormMode::ALL {
            for d in 1..=5 {
                let spec = ProblemSpec::new(20, ADVERSARY_SUITE_AUX, d, 1.0, 1.0, mode)?;
                let mut rep =
                    check_adversary_optimality(&spec, optimal_weight(&spec), ADVERSARY_SUITE_TRIALS, seed)?;
                rep.quantity = format!("{}/d={d}", rep.quantity);
                out.push(rep);
            }
        }
    }
    if wants(Suite::Gelbrich) {
        out.extend(gelbrich_suite(seed, GELBRICH_SUITE_CASES)?);
    }
    Ok(out)
}

/// Random well-conditioned Gaussian of dimension `d`.
pub fn random_moments(rng: &mut ChaCha8Rng, d: usize) -> Result<GaussianMoments> {
    let r = DMatrix::from_fn(d, d, |_, _| rng.sample::<f64, _>(StandardNormal));
    let cov = &r * r.transpose() / d as f64 + DMatrix::identity(d, d) * 0.05;
    let mean = DVector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal));
    GaussianMoments::new(mean, cov)
}

/// Metric properties of the Gelbrich distance on random instances with
/// `d <= 10`. Each report carries the worst case seen.
pub fn gelbrich_suite(seed: u64, cases: usize) -> Result<Vec<OracleReport>> {
    use crate::gaussian::gelbrich_w2_squared;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 0, 20));
    let mut symmetry = OracleReport::two_sided("gelbrich/symmetry", 0.0, 0.0, 1e-9);
    let mut identity = OracleReport::two_sided("gelbrich/identity", 0.0, 0.0, 1e-9);
    let mut triangle = OracleReport::new("gelbrich/triangle", 0.0, 0.0, 0.0, 1e-7);
    let mut commuting = OracleReport::two_sided("gelbrich/commuting_diagonal", 0.0, 0.0, 1e-9);
    for _ in 0..cases {
        let d = rng.random_range(1..=10);
        let p = random_moments(&mut rng, d)?;
        let q = random_moments(&mut rng, d)?;
        let r = random_moments(&mut rng, d)?;

        let pq = gelbrich_w2_squared(&p, &q)?;
        let qp = gelbrich_w2_squared(&q, &p)?;
        let cand = OracleReport::two_sided("gelbrich/symmetry", pq, qp, 1e-9);
        if cand.abs_gap >= symmetry.abs_gap {
            symmetry = cand;
        }

        let pp = gelbrich_w2_squared(&p, &p)?;
        let cand = OracleReport::two_sided("gelbrich/identity", pp, 0.0, 1e-9);
        if cand.abs_gap >= identity.abs_gap {
            identity = cand;
        }

        let direct = gelbrich_w2_squared(&p, &r)?.sqrt();
        let via = pq.sqrt() + gelbrich_w2_squared(&q, &r)?.sqrt();
        let cand = OracleReport::new("gelbrich/triangle", direct, via, (direct - via).max(0.0), 1e-7);
        if cand.abs_gap >= triangle.abs_gap {
            triangle = cand;
        }

        let a: Vec<f64> = (0..d).map(|_| rng.random_range(0.0..4.0)).collect();
        let b: Vec<f64> = (0..d).map(|_| rng.random_range(0.0..4.0)).collect();
        let hand: f64 = a.iter().zip(&b).map(|(x, y)| (x.sqrt() - y.sqrt()).powi(2)).sum();
        let mean = p.mean().clone();
        let da = GaussianMoments::new(mean.clone(), DMatrix::from_diagonal(&DVector::from_vec(a)))?;
        let db = GaussianMoments::new(mean, DMatrix::from_diagonal(&DVector::from_vec(b)))?;
        let cand = OracleReport::two_sided("gelbrich/commuting_diagonal", gelbrich_w2_squared(&da, &db)?, hand, 1e-9);
        if cand.abs_gap >= commuting.abs_gap {
            commuting = cand;
        }
    }
    Ok(vec![symmetry, identity, triangle, commuting])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimator::NormMode;

    #[test]
    fn golden_section_on_quadratic() {
        let (x, fx) = golden_section_min(|x| (x - 0.3) * (x - 0.3), 0.0, 1.0, 1e-10).unwrap();
        assert!((x - 0.3).abs() < 1e-9);
        assert!(fx < 1e-17);
    }

    #[test]
    fn golden_section_on_kink() {
        let (x, _) = golden_section_min(|x| (x - 0.5).abs(), 0.0, 1.0, 1e-8).unwrap();
        assert!((x - 0.5).abs() < 1e-7);
    }

    #[test]
    fn golden_section_monotone_hits_endpoint() {
        let (x, _) = golden_section_min(|x| x, 0.0, 1.0, 1e-10).unwrap();
        assert_eq!(x, 0.0);
    }

    #[test]
    fn golden_section_rejects_bad_interval() {
        assert!(matches!(
            golden_section_min(|x| x, 1.0, 1.0, 1e-3),
            Err(Error::InvalidInterval { .. })
        ));
    }

    #[test]
    fn reference_config_scalar_oracle() {
        let spec = ProblemSpec::new(20, 1000, 200, 1.0, 1.0, NormMode::Frobenius).unwrap();
        let check = check_scalar_optimum(&spec);
        assert!(check.passed(), "{check:?}");
        assert!(check.weight.abs_gap <= 1e-7);
    }

    #[test]
    fn scalar_oracle_one_dimension_mode_free() {
        let base = ProblemSpec::new(3, 40, 1, 0.5, 1.0, NormMode::Frobenius).unwrap();
        let reports: Vec<_> = NormMode::ALL
            .iter()
            .map(|&m| check_scalar_optimum(&base.with_mode(m)))
            .collect();
        for r in &reports[1..] {
            assert_eq!(r.weight.oracle_value, reports[0].weight.oracle_value);
            assert_eq!(r.weight.closed_form, reports[0].weight.closed_form);
            assert_eq!(r.risk.closed_form, reports[0].risk.closed_form);
        }
    }

    #[test]
    fn scalar_oracle_small_budget_limit() {
        let spec = ProblemSpec::new(20, 1000, 10, 1e-9, 1.0, NormMode::Trace).unwrap();
        let check = check_scalar_optimum(&spec);
        assert!((check.weight.oracle_value - 20.0 / 1020.0).abs() < 1e-7);
        assert!(check.passed());
    }

    #[test]
    fn zero_perturbation_reproduces_risk() {
        for mode in NormMode::ALL {
            let spec = ProblemSpec::new(10, 200, 3, 0.7, 1.0, mode).unwrap();
            let rep = check_matrix_optimum(&spec, 5, 0.0, 1).unwrap();
            let risk = minmax_risk(&spec).risk_star;
            assert!((rep.closed_form - risk).abs() <= 1e-12 * risk);
            assert!((rep.oracle_value - risk).abs() <= 1e-12 * risk);
            assert!(rep.passed);
        }
    }

    #[test]
    fn matrix_oracle_passes_small_case() {
        let spec = ProblemSpec::new(20, 1000, 3, 1.0, 1.0, NormMode::Frobenius).unwrap();
        let rep = check_matrix_optimum(&spec, 300, 0.1, 42).unwrap();
        assert!(rep.passed, "{rep:?}");
        assert!(rep.oracle_value > rep.closed_form);
    }

    #[test]
    fn raising_top_singular_value_hurts() {
        for mode in NormMode::ALL {
            let spec = ProblemSpec::new(20, 1000, 4, 1.0, 1.0, mode).unwrap();
            let s = optimal_weight(&spec);
            let center = DMatrix::<f64>::identity(4, 4) * s;
            let mut raised = center.clone();
            raised[(0, 0)] = s + 0.5 * (1.0 - s);
            let v0 = matrix_objective(&spec, &center).unwrap();
            let v1 = matrix_objective(&spec, &raised).unwrap();
            assert!(v1 > v0, "{mode}: {v1} <= {v0}");
        }
    }

    #[test]
    fn matrix_oracle_is_deterministic() {
        let spec = ProblemSpec::new(5, 60, 3, 0.4, 1.0, NormMode::Operator).unwrap();
        let a = check_matrix_optimum_with(&spec, 60, 0.05, 9, Execution::Sequential).unwrap();
        let b = check_matrix_optimum_with(&spec, 60, 0.05, 9, Execution::Parallel).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn unbounded_identity_pair_grows_quadratically() {
        let i = DMatrix::<f64>::identity(2, 2);
        let r = check_unbounded_without_sum_constraint(&i, &i, &[1.0, 10.0, 100.0]).unwrap();
        // Variance 2 + 2, bias t^2.
        assert_eq!(r, vec![5.0, 104.0, 10_004.0]);
    }

    #[test]
    fn unbounded_rejects_valid_pair() {
        let h = DMatrix::<f64>::identity(3, 3) * 0.5;
        assert!(matches!(
            check_unbounded_without_sum_constraint(&h, &h, &[1.0, 10.0]),
            Err(Error::SumConstraintSatisfied { .. })
        ));
    }

    #[test]
    fn unbounded_random_pairs_increase() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let a = DMatrix::from_fn(3, 3, |_, _| rng.random_range(-1.0..1.0));
            let b = DMatrix::from_fn(3, 3, |_, _| rng.random_range(-1.0..1.0));
            let r = check_unbounded_without_sum_constraint(&a, &b, &[0.0, 1.0, 3.0, 10.0, 100.0]).unwrap();
            assert!(r.windows(2).all(|w| w[1] > w[0]), "{r:?}");
        }
    }

    #[test]
    fn adversary_oracle_large_n() {
        for mode in [NormMode::Frobenius, NormMode::Operator] {
            let spec = ProblemSpec::new(20, 10_000, 4, 1.0, 1.0, mode).unwrap();
            let rep = check_adversary_optimality(&spec, optimal_weight(&spec), 500, 3).unwrap();
            assert!(rep.passed, "{rep:?}");
            assert!(rep.abs_gap < 1e-4);
        }
    }

    #[test]
    fn adversary_oracle_single_trial_is_exact() {
        let spec = ProblemSpec::new(5, 50, 2, 1.0, 1.0, NormMode::Trace).unwrap();
        let rep = check_adversary_optimality(&spec, 0.6, 1, 0).unwrap();
        assert_eq!(rep.abs_gap, 0.0);
        assert_eq!(rep.closed_form, rep.oracle_value);
    }

    #[test]
    fn adversary_oracle_small_n_uses_slack() {
        let spec = ProblemSpec::new(5, 10, 3, 1.0, 1.0, NormMode::Frobenius).unwrap();
        let rep = check_adversary_optimality(&spec, optimal_weight(&spec), 500, 5).unwrap();
        assert!(rep.passed, "{rep:?}");
        assert!(rep.tolerance > 1e-2);
        // finite N strictly improves on the large-N pair
        assert!(rep.abs_gap > 0.0);
    }
}
