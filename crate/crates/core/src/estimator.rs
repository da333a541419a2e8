//! Optimal weights, min-max risks and the objectives behind them.
//!
//! The estimator combines the two sample means as `A x_bar + B z_bar`. Any
//! `A + B != I` lets the adversary push the risk to infinity, so the useful
//! family is `B = I - A`, and the optimum is the scalar shrinkage `A = s I`.
//! The three normalisations of the covariance (Frobenius, trace, operator
//! norm) differ only through a dimension constant `c`:
//!
//! ```text
//! g(s)  = (s - 1)^2 eps^2 / delta^2 + c (s^2 / n + (1 - s)^2 / N)
//! s*    = (eps^2/delta^2 + c/N) / (eps^2/delta^2 + c/n + c/N)
//! R*    = c (c delta^2/eps^2 + N) / (c delta^2/eps^2 (n + N) + n N)
//! ```

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::gaussian::{spectral_decompose, symmetrize, GaussianMoments};
use crate::{Error, Result};

/// Which covariance norm normalises the MSE and is bounded below by delta^2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormMode {
    Frobenius,
    Trace,
    Operator,
}

impl NormMode {
    pub const ALL: [NormMode; 3] = [NormMode::Frobenius, NormMode::Trace, NormMode::Operator];

    /// Dimension constant: sqrt(d), 1 and d respectively.
    pub fn dimension_constant(self, d: usize) -> f64 {
        match self {
            NormMode::Frobenius => (d as f64).sqrt(),
            NormMode::Trace => 1.0,
            NormMode::Operator => d as f64,
        }
    }

    /// The mode's norm of a symmetric PSD matrix.
    pub fn psd_norm(self, m: &DMatrix<f64>) -> f64 {
        match self {
            NormMode::Frobenius => m.norm(),
            NormMode::Trace => m.trace(),
            NormMode::Operator => spectral_decompose(&symmetrize(m))
                .map(|dec| dec.max_eigenvalue())
                .unwrap_or(f64::NAN),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            NormMode::Frobenius => "frobenius",
            NormMode::Trace => "trace",
            NormMode::Operator => "operator",
        }
    }
}

impl fmt::Display for NormMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for NormMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "frobenius" | "fro" | "f" => Ok(NormMode::Frobenius),
            "trace" | "tr" => Ok(NormMode::Trace),
            "operator" | "op" => Ok(NormMode::Operator),
            other => Err(Error::InvalidSpec(format!("unknown norm mode {other:?}"))),
        }
    }
}

/// Problem parameters shared by every closed form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpec")]
pub struct ProblemSpec {
    /// Number of target samples.
    #[serde(rename = "n")]
    pub n_target: usize,
    /// Number of auxiliary samples.
    #[serde(rename = "N")]
    pub n_aux: usize,
    /// Dimension.
    pub d: usize,
    /// W2 radius.
    pub eps: f64,
    /// Lower bound on the chosen norm of the target covariance.
    pub delta_sq: f64,
    pub mode: NormMode,
}

#[derive(Deserialize)]
struct RawSpec {
    n: usize,
    #[serde(rename = "N")]
    n_aux: usize,
    d: usize,
    eps: f64,
    delta_sq: f64,
    mode: NormMode,
}

impl TryFrom<RawSpec> for ProblemSpec {
    type Error = Error;

    fn try_from(r: RawSpec) -> Result<Self> {
        ProblemSpec::new(r.n, r.n_aux, r.d, r.eps, r.delta_sq, r.mode)
    }
}

impl ProblemSpec {
    pub fn new(
        n_target: usize,
        n_aux: usize,
        d: usize,
        eps: f64,
        delta_sq: f64,
        mode: NormMode,
    ) -> Result<Self> {
        let spec = Self {
            n_target,
            n_aux,
            d,
            eps,
            delta_sq,
            mode,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_target == 0 {
            return Err(Error::InvalidSpec("n must be at least 1".into()));
        }
        if self.n_aux == 0 {
            return Err(Error::InvalidSpec("N must be at least 1".into()));
        }
        if self.d == 0 {
            return Err(Error::InvalidSpec("d must be at least 1".into()));
        }
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(Error::InvalidSpec(format!(
                "eps must be positive and finite, got {}",
                self.eps
            )));
        }
        if !(self.delta_sq > 0.0 && self.delta_sq.is_finite()) {
            return Err(Error::InvalidSpec(format!(
                "delta_sq must be positive and finite, got {}",
                self.delta_sq
            )));
        }
        Ok(())
    }

    pub fn with_eps(self, eps: f64) -> Result<Self> {
        Self { eps, ..self }.validate_owned()
    }

    pub fn with_mode(self, mode: NormMode) -> Self {
        Self { mode, ..self }
    }

    fn validate_owned(self) -> Result<Self> {
        self.validate()?;
        Ok(self)
    }

    /// eps^2 / delta^2.
    pub fn budget_ratio(&self) -> f64 {
        self.eps * self.eps / self.delta_sq
    }

    pub fn dimension_constant(&self) -> f64 {
        self.mode.dimension_constant(self.d)
    }
}

/// `A x_bar + B z_bar`.
#[derive(Debug, Clone, PartialEq)]
pub enum LinearEstimator {
    /// `A = s I`, `B = (1 - s) I`.
    Scalar { s: f64 },
    /// General pair, used by the verification oracles.
    Matrix { a: DMatrix<f64>, b: DMatrix<f64> },
}

impl LinearEstimator {
    pub fn scalar(s: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&s) {
            return Err(Error::InvalidEstimator(format!("weight {s} outside [0, 1]")));
        }
        Ok(LinearEstimator::Scalar { s })
    }

    pub fn matrix(a: DMatrix<f64>, b: DMatrix<f64>) -> Result<Self> {
        for m in [&a, &b] {
            if m.nrows() != m.ncols() {
                return Err(Error::NotSquare {
                    rows: m.nrows(),
                    cols: m.ncols(),
                });
            }
        }
        if a.nrows() != b.nrows() {
            return Err(Error::DimensionMismatch {
                expected: a.nrows(),
                actual: b.nrows(),
            });
        }
        Ok(LinearEstimator::Matrix { a, b })
    }

    /// The optimal scalar estimator for `spec`.
    pub fn optimal(spec: &ProblemSpec) -> Self {
        LinearEstimator::Scalar {
            s: optimal_weight(spec),
        }
    }

    /// `A + B (x_bar, z_bar)` given the two sample means.
    pub fn combine(&self, mean_target: &DVector<f64>, mean_aux: &DVector<f64>) -> Result<DVector<f64>> {
        check_dim(mean_target.len(), mean_aux.len())?;
        match self {
            LinearEstimator::Scalar { s } => Ok(mean_target * *s + mean_aux * (1.0 - s)),
            LinearEstimator::Matrix { a, b } => {
                check_dim(a.nrows(), mean_target.len())?;
                Ok(a * mean_target + b * mean_aux)
            }
        }
    }
}

/// Closed-form min-max solution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RiskReport {
    pub s_star: f64,
    pub risk_star: f64,
    pub mode: NormMode,
    pub spec: ProblemSpec,
}

/// Optimal shrinkage weight on the target sample mean.
pub fn optimal_weight(spec: &ProblemSpec) -> f64 {
    let r = spec.budget_ratio();
    let c = spec.dimension_constant();
    let aux = c / spec.n_aux as f64;
    let target = c / spec.n_target as f64;
    ((r + aux) / (r + target + aux)).clamp(0.0, 1.0)
}

/// Optimal weight together with the min-max normalised risk.
///
/// The risk comes from its own closed form rather than from evaluating the
/// objective at the optimal weight, so the two stay independently checkable.
pub fn minmax_risk(spec: &ProblemSpec) -> RiskReport {
    let c = spec.dimension_constant();
    let inv = spec.delta_sq / (spec.eps * spec.eps);
    let n = spec.n_target as f64;
    let big_n = spec.n_aux as f64;
    let risk = c * (inv * c + big_n) / (inv * c * (n + big_n) + n * big_n);
    RiskReport {
        s_star: optimal_weight(spec),
        risk_star: risk,
        mode: spec.mode,
        spec: *spec,
    }
}

/// Normalised worst-case risk of the scalar estimator with weight `s`.
pub fn scalar_objective(spec: &ProblemSpec, s: f64) -> f64 {
    let c = spec.dimension_constant();
    let bias = (s - 1.0) * (s - 1.0) * spec.budget_ratio();
    let variance = s * s / spec.n_target as f64 + (1.0 - s) * (1.0 - s) / spec.n_aux as f64;
    bias + c * variance
}

/// Exact (unnormalised) MSE of a linear estimator when the target samples come
/// from `p` and the auxiliary samples from `q`:
///
/// `Tr(A^T A S_p)/n + Tr(B^T B S_q)/N + |A mu_p + B mu_q - mu_p|^2`.
pub fn risk_from_moments(
    est: &LinearEstimator,
    p: &GaussianMoments,
    q: &GaussianMoments,
    n_target: usize,
    n_aux: usize,
) -> Result<f64> {
    check_dim(p.dim(), q.dim())?;
    if n_target == 0 || n_aux == 0 {
        return Err(Error::InvalidSpec("sample counts must be at least 1".into()));
    }
    let n = n_target as f64;
    let big_n = n_aux as f64;
    match est {
        LinearEstimator::Scalar { s } => {
            let shift = (q.mean() - p.mean()).norm_squared();
            let t = 1.0 - s;
            Ok(s * s * p.cov().trace() / n + t * t * q.cov().trace() / big_n + t * t * shift)
        }
        LinearEstimator::Matrix { a, b } => {
            check_dim(p.dim(), a.nrows())?;
            check_dim(p.dim(), b.nrows())?;
            let var_p = (a.transpose() * a * p.cov()).trace() / n;
            let var_q = (b.transpose() * b * q.cov()).trace() / big_n;
            let bias = (a * p.mean() + b * q.mean() - p.mean()).norm_squared();
            Ok(var_p + var_q + bias)
        }
    }
}

/// Worst-case normalised risk of `A x_bar + (I - A) z_bar` in the large-N
/// regime, as a function of the full matrix `A`.
///
/// With `M = A^T A / n + (I - A)^T (I - A) / N`:
/// - Frobenius: `sigma_max(A - I)^2 eps^2/delta^2 + |M|_F`
/// - Trace:     `|A - I|_op^2 eps^2/delta^2 + |M|_op`
/// - Operator:  `|A - I|_op^2 eps^2/delta^2 + Tr(M)`
pub fn matrix_objective(spec: &ProblemSpec, a: &DMatrix<f64>) -> Result<f64> {
    if a.nrows() != a.ncols() {
        return Err(Error::NotSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    check_dim(spec.d, a.nrows())?;
    let d = spec.d;
    let eye = DMatrix::<f64>::identity(d, d);
    let gap = a - &eye;
    let sigma_max = spectral_norm(&gap);
    let rest = &eye - a;
    let m = symmetrize(
        &(a.transpose() * a / spec.n_target as f64
            + rest.transpose() * &rest / spec.n_aux as f64),
    );
    let spread = match spec.mode {
        NormMode::Frobenius => m.norm(),
        NormMode::Trace => spectral_decompose(&m)?.max_eigenvalue(),
        NormMode::Operator => m.trace(),
    };
    Ok(sigma_max * sigma_max * spec.budget_ratio() + spread)
}

/// Largest singular value.
pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.singular_values().max()
}

/// Applies the estimator to raw samples.
pub fn apply_estimator(
    est: &LinearEstimator,
    target_samples: &[DVector<f64>],
    aux_samples: &[DVector<f64>],
) -> Result<DVector<f64>> {
    let mean_target = sample_mean(target_samples, "target samples")?;
    let mean_aux = sample_mean(aux_samples, "auxiliary samples")?;
    est.combine(&mean_target, &mean_aux)
}

fn sample_mean(samples: &[DVector<f64>], what: &'static str) -> Result<DVector<f64>> {
    let first = samples.first().ok_or(Error::EmptySamples(what))?;
    let mut sum = DVector::zeros(first.len());
    for x in samples {
        check_dim(first.len(), x.len())?;
        sum += x;
    }
    Ok(sum / samples.len() as f64)
}

fn check_dim(expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(Error::DimensionMismatch { expected, actual });
    }
    Ok(())
}
