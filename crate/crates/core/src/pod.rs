//! Proper orthogonal decomposition of snapshot data.
//!
//! The reduction basis is formed from the leading left singular vectors of
//! the (lifted) snapshot matrix. Truncation keeps every singular value with
//! `σᵢ / σ₁ ≥ tol`; equivalently `r` is the smallest index whose successor
//! falls below the relative tolerance, which is how the tolerance is meant
//! throughout this crate.

use faer::Mat;

use crate::error::{Error, Result};

/// Orthonormal reduction basis with the retained singular-value spectrum
/// and the truncation settings that produced it.
#[derive(Debug, Clone)]
pub struct PodBasis {
    basis: Mat<f64>,
    singular_values: Vec<f64>,
    r: usize,
    tolerance: f64,
}

impl PodBasis {
    /// Rebuilds a basis from stored parts (deserialization), re-checking the
    /// orthonormality and ordering invariants.
    pub fn from_parts(
        basis: Mat<f64>,
        singular_values: Vec<f64>,
        tolerance: f64,
    ) -> Result<Self> {
        let r = basis.ncols();
        if r == 0 || basis.nrows() < r {
            return Err(Error::InvalidArgument(
                "basis must have 1 <= r <= d columns".into(),
            ));
        }
        if singular_values.is_empty() || singular_values.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::InvalidArgument(
                "singular values must be non-empty and non-increasing".into(),
            ));
        }
        let candidate = Self {
            basis,
            singular_values,
            r,
            tolerance,
        };
        let defect = candidate.orthonormality_defect();
        if defect > 1e-10 {
            return Err(Error::DegenerateData(format!(
                "stored basis is not orthonormal (defect {defect:.3e})"
            )));
        }
        Ok(candidate)
    }

    /// The `d × r` basis matrix with orthonormal columns.
    pub fn basis(&self) -> &Mat<f64> {
        &self.basis
    }

    /// Full spectrum of the factorized snapshot matrix, non-increasing.
    pub fn singular_values(&self) -> &[f64] {
        &self.singular_values
    }

    /// Spectrum divided by the leading singular value.
    pub fn normalized_singular_values(&self) -> Vec<f64> {
        let s0 = self.singular_values[0];
        self.singular_values.iter().map(|s| s / s0).collect()
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    /// Ambient (row) dimension `d`.
    pub fn dim(&self) -> usize {
        self.basis.nrows()
    }

    /// Identifier tying reduced models back to the basis that produced them.
    pub fn id(&self) -> String {
        format!("pod-d{}-r{}-tol{:.3e}", self.dim(), self.r, self.tolerance)
    }

    /// Largest deviation of `ΦᵀΦ` from the identity, for diagnostics.
    pub fn orthonormality_defect(&self) -> f64 {
        let gram = self.basis.transpose() * &self.basis;
        let mut defect: f64 = 0.0;
        for i in 0..self.r {
            for j in 0..self.r {
                let target = if i == j { 1.0 } else { 0.0 };
                defect = defect.max((gram[(i, j)] - target).abs());
            }
        }
        defect
    }
}

/// Computes the economy SVD of `x` and truncates it.
///
/// `r` is the smallest `k` with `σ_{k+1}/σ₁ < tol` (full rank when no such
/// `k` exists); an explicit `r_override` wins over the tolerance rule.
/// Column signs are normalized so the largest-magnitude entry of each basis
/// vector is positive, making repeated runs reproducible.
pub fn compute_pod(x: &Mat<f64>, tol: f64, r_override: Option<usize>) -> Result<PodBasis> {
    let (d, samples) = (x.nrows(), x.ncols());
    if d == 0 || samples == 0 {
        return Err(Error::DegenerateData("empty snapshot matrix".into()));
    }
    for j in 0..samples {
        for i in 0..d {
            if !x[(i, j)].is_finite() {
                return Err(Error::DegenerateData(format!(
                    "snapshot matrix has a non-finite entry at ({i}, {j})"
                )));
            }
        }
    }
    if r_override.is_none() && !(tol > 0.0 && tol < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "truncation tolerance must lie in (0, 1), got {tol}"
        )));
    }

    let svd = x
        .thin_svd()
        .map_err(|e| Error::DegenerateData(format!("SVD did not converge: {e:?}")))?;
    let m = d.min(samples);
    let singular_values: Vec<f64> = (0..m).map(|i| svd.S()[i]).collect();
    if singular_values[0] <= 0.0 {
        return Err(Error::DegenerateData(
            "snapshot matrix is identically zero".into(),
        ));
    }

    let r = match r_override {
        Some(r) => {
            if r == 0 || r > m {
                return Err(Error::InvalidArgument(format!(
                    "truncation override {r} outside 1..={m}"
                )));
            }
            r
        }
        None => {
            let mut r = m;
            for k in 1..m {
                if singular_values[k] / singular_values[0] < tol {
                    r = k;
                    break;
                }
            }
            r
        }
    };

    let u = svd.U();
    let mut basis = Mat::zeros(d, r);
    for col in 0..r {
        let mut pivot = 0;
        for row in 1..d {
            if u[(row, col)].abs() > u[(pivot, col)].abs() {
                pivot = row;
            }
        }
        let flip = if u[(pivot, col)] < 0.0 { -1.0 } else { 1.0 };
        for row in 0..d {
            basis[(row, col)] = flip * u[(row, col)];
        }
    }

    Ok(PodBasis {
        basis,
        singular_values,
        r,
        tolerance: tol,
    })
}

/// Projects columns onto the reduced space: returns `Φᵀ M` (`r × S`).
pub fn project(basis: &PodBasis, m: &Mat<f64>) -> Result<Mat<f64>> {
    if m.nrows() != basis.dim() {
        return Err(Error::DimensionMismatch {
            context: "project matrix rows",
            expected: basis.dim(),
            got: m.nrows(),
        });
    }
    Ok(basis.basis.transpose() * m)
}
