//! Worst-case (target, auxiliary) moment pairs for scalar estimators.
//!
//! The adversary always spends the whole W2 budget. In the large-N regime
//! the auxiliary covariance equals the target covariance and the whole
//! budget goes into a mean shift. At finite N the stationary point inflates
//! the auxiliary covariance by `(N / (N - 1))^2`, which costs
//! `Tr(S_x) / (N - 1)^2` of the squared budget and leaves the rest for the
//! mean.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::estimator::{NormMode, ProblemSpec};
use crate::gaussian::GaussianMoments;
use crate::{Error, Result};

const UNIT_TOL: f64 = 1e-10;

/// A worst-case moment pair and how its W2 budget is split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdversaryPair {
    pub p: GaussianMoments,
    pub q: GaussianMoments,
    pub mean_shift_sq: f64,
    pub cov_budget_sq: f64,
}

/// First standard basis vector, the default shift direction.
pub fn default_direction(d: usize) -> DVector<f64> {
    let mut e = DVector::zeros(d);
    if d > 0 {
        e[0] = 1.0;
    }
    e
}

/// Worst-case target covariance for the mode: the mode's norm equals
/// delta^2 exactly.
///
/// Frobenius spreads the mass isotropically, trace concentrates it on
/// `direction`, and operator puts delta^2 on every axis.
pub fn worst_target_cov(spec: &ProblemSpec, direction: &DVector<f64>) -> DMatrix<f64> {
    let d = spec.d;
    match spec.mode {
        NormMode::Frobenius => DMatrix::identity(d, d) * (spec.delta_sq / (d as f64).sqrt()),
        NormMode::Trace => direction * direction.transpose() * spec.delta_sq,
        NormMode::Operator => DMatrix::identity(d, d) * spec.delta_sq,
    }
}

/// Large-N adversary: `S_z = S_x` and `mu_z = base_mean + eps * direction`.
///
/// `s` is accepted for symmetry with [`worst_case_kkt`]; the large-N pair
/// does not depend on it.
pub fn worst_case_large_n(
    spec: &ProblemSpec,
    _s: f64,
    direction: &DVector<f64>,
    base_mean: &DVector<f64>,
) -> Result<AdversaryPair> {
    check_inputs(spec, direction, base_mean)?;
    let cov = worst_target_cov(spec, direction);
    let p = GaussianMoments::new(base_mean.clone(), cov.clone())?;
    let q = GaussianMoments::new(base_mean + direction * spec.eps, cov)?;
    Ok(AdversaryPair {
        p,
        q,
        mean_shift_sq: spec.eps * spec.eps,
        cov_budget_sq: 0.0,
    })
}

/// Finite-N stationary adversary for `A = s I`.
///
/// Fails with [`Error::BudgetExhausted`] when the covariance inflation alone
/// would exceed the budget; callers should fall back to
/// [`worst_case_large_n`] in that case.
pub fn worst_case_kkt(
    spec: &ProblemSpec,
    _s: f64,
    direction: &DVector<f64>,
    base_mean: &DVector<f64>,
) -> Result<AdversaryPair> {
    if spec.n_aux < 2 {
        return Err(Error::InvalidSpec(
            "the finite-N adversary needs N >= 2".into(),
        ));
    }
    check_inputs(spec, direction, base_mean)?;
    let cov_x = worst_target_cov(spec, direction);
    let big_n = spec.n_aux as f64;
    let cov_budget_sq = cov_x.trace() / ((big_n - 1.0) * (big_n - 1.0));
    let eps_sq = spec.eps * spec.eps;
    if eps_sq < cov_budget_sq {
        return Err(Error::BudgetExhausted {
            eps_sq,
            cov_budget_sq,
        });
    }
    let inflation = big_n / (big_n - 1.0);
    let mean_shift_sq = eps_sq - cov_budget_sq;
    let cov_z = &cov_x * (inflation * inflation);
    let p = GaussianMoments::new(base_mean.clone(), cov_x)?;
    let q = GaussianMoments::new(base_mean + direction * mean_shift_sq.sqrt(), cov_z)?;
    Ok(AdversaryPair {
        p,
        q,
        mean_shift_sq,
        cov_budget_sq,
    })
}

fn check_inputs(spec: &ProblemSpec, direction: &DVector<f64>, base_mean: &DVector<f64>) -> Result<()> {
    spec.validate()?;
    for len in [direction.len(), base_mean.len()] {
        if len != spec.d {
            return Err(Error::DimensionMismatch {
                expected: spec.d,
                actual: len,
            });
        }
    }
    let norm = direction.norm();
    if (norm - 1.0).abs() > UNIT_TOL {
        return Err(Error::NonUnitDirection { norm });
    }
    Ok(())
}
