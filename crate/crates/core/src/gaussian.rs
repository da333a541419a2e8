//! Gaussian moment pairs and the closed-form Wasserstein-2 distance.
//!
//! Every distribution in the crate is represented by its first two moments.
//! For Gaussians the W2 distance has the Gelbrich closed form
//!
//! ```text
//! W2(P, Q)^2 = |mu_P - mu_Q|^2 + Tr(S_P + S_Q - 2 (S_P^{1/2} S_Q S_P^{1/2})^{1/2})
//! ```
//!
//! and for arbitrary distributions with the same moments it is a lower bound
//! on the true W2 distance, which is why moments are all the estimator
//! analysis ever needs.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Relative tolerance for symmetry checks (scaled by the largest absolute entry).
pub const SYMMETRY_TOL: f64 = 1e-10;

/// Relative band below zero inside which eigenvalues are clamped to zero
/// (scaled by the largest eigenvalue).
pub const PSD_CLAMP_TOL: f64 = 1e-10;

/// Mean vector and PSD covariance of a distribution on R^d.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MomentsFile", into = "MomentsFile")]
pub struct GaussianMoments {
    mean: DVector<f64>,
    cov: DMatrix<f64>,
}

/// On-disk form: `{"mean": [..], "cov": [[..], ..]}` with `cov` row-major.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MomentsFile {
    pub mean: Vec<f64>,
    pub cov: Vec<Vec<f64>>,
}

impl TryFrom<MomentsFile> for GaussianMoments {
    type Error = Error;

    fn try_from(raw: MomentsFile) -> Result<Self> {
        let d = raw.cov.len();
        for row in &raw.cov {
            if row.len() != d {
                return Err(Error::NotSquare {
                    rows: d,
                    cols: row.len(),
                });
            }
        }
        let cov = DMatrix::from_fn(d, d, |i, j| raw.cov[i][j]);
        GaussianMoments::new(DVector::from_vec(raw.mean), cov)
    }
}

impl From<GaussianMoments> for MomentsFile {
    fn from(m: GaussianMoments) -> Self {
        let d = m.dim();
        MomentsFile {
            mean: m.mean.iter().copied().collect(),
            cov: (0..d)
                .map(|i| (0..d).map(|j| m.cov[(i, j)]).collect())
                .collect(),
        }
    }
}

impl GaussianMoments {
    /// Validates and stores a moment pair.
    ///
    /// The covariance is symmetrised, and eigenvalues that are negative only
    /// by rounding (within `PSD_CLAMP_TOL * lambda_max`) are clamped to zero.
    pub fn new(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        ensure_square(&cov)?;
        if mean.len() != cov.nrows() {
            return Err(Error::DimensionMismatch {
                expected: cov.nrows(),
                actual: mean.len(),
            });
        }
        let decomp = spectral_decompose(&cov)?;
        let cov = symmetrize(&cov);
        let min = decomp.min_eigenvalue();
        check_psd_band(&decomp)?;
        // Subtract only the negative part so the rest of the matrix keeps its bits.
        let cov = if min < 0.0 {
            symmetrize(&(cov - decomp.map_eigenvalues(|l| l.min(0.0))))
        } else {
            cov
        };
        Ok(Self { mean, cov })
    }

    /// `N(mean, variance * I)`.
    pub fn isotropic(mean: DVector<f64>, variance: f64) -> Result<Self> {
        let d = mean.len();
        Self::new(mean, DMatrix::identity(d, d) * variance)
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    /// Largest absolute entry-wise difference to `other`, or `None` if the
    /// dimensions differ.
    pub fn max_abs_diff(&self, other: &GaussianMoments) -> Option<f64> {
        if self.dim() != other.dim() {
            return None;
        }
        let dm = (&self.mean - &other.mean).amax();
        let dc = (&self.cov - &other.cov).amax();
        Some(dm.max(dc))
    }
}

/// Eigen-decomposition of a symmetric matrix with eigenvalues sorted in
/// nonincreasing order.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDecomposition {
    pub eigenvalues: DVector<f64>,
    /// Orthonormal; column `i` pairs with `eigenvalues[i]`.
    pub eigenvectors: DMatrix<f64>,
}

impl SpectralDecomposition {
    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues.get(0).copied().unwrap_or(0.0)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues.iter().copied().last().unwrap_or(0.0)
    }

    /// Eigenvalues at or below `d * f64::EPSILON * lambda_max` are rounding
    /// noise; their square roots would otherwise leak ~1e-8 into null
    /// directions of singular matrices.
    pub fn noise_floor(&self) -> f64 {
        self.eigenvalues.len() as f64 * f64::EPSILON * self.max_eigenvalue().max(0.0)
    }

    /// Square roots of the eigenvalues with the noise floor mapped to zero.
    pub fn sqrt_eigenvalues(&self) -> DVector<f64> {
        let floor = self.noise_floor();
        self.eigenvalues.map(|l| if l <= floor { 0.0 } else { l.sqrt() })
    }

    /// `V diag(f(lambda)) V^T`, symmetrised.
    pub fn map_eigenvalues(&self, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
        let mapped = self.eigenvalues.map(f);
        let scaled = &self.eigenvectors * DMatrix::from_diagonal(&mapped);
        symmetrize(&(scaled * self.eigenvectors.transpose()))
    }

    pub fn reconstruct(&self) -> DMatrix<f64> {
        self.map_eigenvalues(|l| l)
    }
}

/// Symmetric eigen-decomposition, eigenvalues nonincreasing.
///
/// Each eigenvector's largest-magnitude component is made positive so the
/// output is fully determined by the input bits.
pub fn spectral_decompose(m: &DMatrix<f64>) -> Result<SpectralDecomposition> {
    ensure_square(m)?;
    let scale = m.amax();
    let deviation = (m - m.transpose()).amax();
    let tolerance = SYMMETRY_TOL * scale;
    if deviation > tolerance {
        return Err(Error::AsymmetricMatrix {
            max_deviation: deviation,
            tolerance,
        });
    }
    let d = m.nrows();
    if d == 0 {
        return Ok(SpectralDecomposition {
            eigenvalues: DVector::zeros(0),
            eigenvectors: DMatrix::zeros(0, 0),
        });
    }
    let eig = SymmetricEigen::new(symmetrize(m));
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

    let eigenvalues = DVector::from_iterator(d, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut eigenvectors = DMatrix::zeros(d, d);
    for (dst, &src) in order.iter().enumerate() {
        let mut col = eig.eigenvectors.column(src).into_owned();
        let pivot = col.iamax();
        if col[pivot] < 0.0 {
            col.neg_mut();
        }
        eigenvectors.set_column(dst, &col);
    }
    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

/// Symmetric PSD square root via the spectral decomposition.
pub fn psd_sqrt(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let decomp = spectral_decompose(m)?;
    check_psd_band(&decomp)?;
    let roots = decomp.sqrt_eigenvalues();
    let scaled = &decomp.eigenvectors * DMatrix::from_diagonal(&roots);
    Ok(symmetrize(&(scaled * decomp.eigenvectors.transpose())))
}

/// Squared W2 distance between two Gaussians (Gelbrich formula), clamped at 0.
pub fn gelbrich_w2_squared(p: &GaussianMoments, q: &GaussianMoments) -> Result<f64> {
    if p.dim() != q.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            actual: q.dim(),
        });
    }
    let mean_term = (p.mean() - q.mean()).norm_squared();
    let root_p = psd_sqrt(p.cov())?;
    let cross = symmetrize(&(&root_p * q.cov() * &root_p));
    // Tr(M^{1/2}) = sum of sqrt eigenvalues.
    let cross_root_trace: f64 = spectral_decompose(&cross)?.sqrt_eigenvalues().sum();
    let bures = p.cov().trace() + q.cov().trace() - 2.0 * cross_root_trace;
    Ok((mean_term + bures).max(0.0))
}

fn check_psd_band(decomp: &SpectralDecomposition) -> Result<()> {
    let tolerance = PSD_CLAMP_TOL * decomp.max_eigenvalue().max(0.0);
    let min = decomp.min_eigenvalue();
    if min < -tolerance {
        return Err(Error::NotPsd {
            eigenvalue: min,
            tolerance,
        });
    }
    Ok(())
}

fn ensure_square(m: &DMatrix<f64>) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(())
}

pub(crate) fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}
