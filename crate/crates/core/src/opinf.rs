//! Least-squares operator inference for reduced quadratic models.
//!
//! Given reduced state snapshots, their time-derivative estimates and the
//! input trajectory, the reduced operators `(A_r, H̃_r, B_r)` minimize
//!
//! ```text
//! ‖𝒜 𝒳 − ℬ‖²  + μ ‖𝒳‖²,      𝒜 = [X_rᵀ  X̃_rᵀ  Uᵀ],   ℬ = Ẋ_rᵀ,
//! ```
//!
//! where `X̃_r` stacks the compact Kronecker squares of the reduced states.
//! The problem decouples into `r` independent ridge regressions, one per
//! reduced coordinate.
//!
//! Only the compact quadratic operator `H̃_r` (one column per unordered
//! index pair) is stored; the redundant `r × r²` form is derived on demand
//! by splitting cross-term columns in half. This keeps the representation
//! identifiable: snapshot data can never distinguish `H` from its
//! symmetrization.

use faer::linalg::solvers::SolveLstsq;
use faer::Mat;

use crate::error::{Error, Result};

/// Length of the compact Kronecker square, `r (r + 1) / 2`.
pub fn compact_len(r: usize) -> usize {
    r * (r + 1) / 2
}

/// Compact Kronecker square `x ⊗̃ x`: entries `xᵢ·xⱼ` for `i ≤ j`,
/// ordered with `i` major, so `(x₁², x₁x₂, ..., x₁x_r, x₂², ...)`.
pub fn compact_kron(x: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; compact_len(x.len())];
    compact_kron_into(x, &mut out);
    out
}

pub(crate) fn compact_kron_into(x: &[f64], out: &mut [f64]) {
    debug_assert_eq!(out.len(), compact_len(x.len()));
    let mut idx = 0;
    for i in 0..x.len() {
        let xi = x[i];
        for &xj in &x[i..] {
            out[idx] = xi * xj;
            idx += 1;
        }
    }
}

/// Full Kronecker square `x ⊗ x` with the pair `(i, j)` at column `i·r + j`.
/// Only used by tests and cross-checks; production paths stay compact.
pub fn full_kron(x: &[f64]) -> Vec<f64> {
    let r = x.len();
    let mut out = vec![0.0; r * r];
    for i in 0..r {
        for j in 0..r {
            out[i * r + j] = x[i] * x[j];
        }
    }
    out
}

/// Expands a compact quadratic operator (`r × r(r+1)/2`) to the redundant
/// `r × r²` form: diagonal-pair columns copy over, cross-pair columns split
/// evenly between the `(i,j)` and `(j,i)` Kronecker positions.
pub fn expand_quadratic(h_compact: &Mat<f64>) -> Result<Mat<f64>> {
    let r = h_compact.nrows();
    if h_compact.ncols() != compact_len(r) {
        return Err(Error::DimensionMismatch {
            context: "expand_quadratic columns",
            expected: compact_len(r),
            got: h_compact.ncols(),
        });
    }
    let mut full = Mat::zeros(r, r * r);
    let mut idx = 0;
    for i in 0..r {
        for j in i..r {
            for row in 0..r {
                let v = h_compact[(row, idx)];
                if i == j {
                    full[(row, i * r + i)] = v;
                } else {
                    full[(row, i * r + j)] = 0.5 * v;
                    full[(row, j * r + i)] = 0.5 * v;
                }
            }
            idx += 1;
        }
    }
    Ok(full)
}

/// Compacts a full `r × r²` quadratic operator by summing the two columns of
/// each cross pair; round-tripping through [`expand_quadratic`] yields the
/// symmetrized representative.
pub fn compact_quadratic(h_full: &Mat<f64>) -> Result<Mat<f64>> {
    let r = h_full.nrows();
    if h_full.ncols() != r * r {
        return Err(Error::DimensionMismatch {
            context: "compact_quadratic columns",
            expected: r * r,
            got: h_full.ncols(),
        });
    }
    let mut compact = Mat::zeros(r, compact_len(r));
    let mut idx = 0;
    for i in 0..r {
        for j in i..r {
            for row in 0..r {
                compact[(row, idx)] = if i == j {
                    h_full[(row, i * r + i)]
                } else {
                    h_full[(row, i * r + j)] + h_full[(row, j * r + i)]
                };
            }
            idx += 1;
        }
    }
    Ok(compact)
}

/// Where a reduced model came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelSource {
    /// Inferred from data by least squares.
    Learned,
    /// Projected from known full-order operators.
    Intrusive,
}

impl ModelSource {
    pub fn as_str(&self) -> &'static str {
        match self {
            ModelSource::Learned => "learned",
            ModelSource::Intrusive => "intrusive",
        }
    }
}

impl std::str::FromStr for ModelSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "learned" => Ok(ModelSource::Learned),
            "intrusive" => Ok(ModelSource::Intrusive),
            other => Err(Error::InvalidArgument(format!("unknown model source {other:?}"))),
        }
    }
}

/// Reduced quadratic model `ẋ_r = A_r x_r + H̃_r (x_r ⊗̃ x_r) + B_r u`,
/// `y_r = C_r x_r`. The compact quadratic operator is the source of truth.
#[derive(Debug, Clone)]
pub struct ReducedQuadraticModel {
    a: Mat<f64>,
    h_compact: Mat<f64>,
    b: Mat<f64>,
    c: Mat<f64>,
    basis_ref: String,
    source: ModelSource,
}

impl ReducedQuadraticModel {
    pub fn new(
        a: Mat<f64>,
        h_compact: Mat<f64>,
        b: Mat<f64>,
        c: Mat<f64>,
        basis_ref: impl Into<String>,
        source: ModelSource,
    ) -> Result<Self> {
        let r = a.nrows();
        if a.ncols() != r {
            return Err(Error::DimensionMismatch {
                context: "ReducedQuadraticModel A columns",
                expected: r,
                got: a.ncols(),
            });
        }
        if h_compact.nrows() != r || h_compact.ncols() != compact_len(r) {
            return Err(Error::DimensionMismatch {
                context: "ReducedQuadraticModel H̃ shape",
                expected: r * compact_len(r),
                got: h_compact.nrows() * h_compact.ncols(),
            });
        }
        if b.nrows() != r || b.ncols() == 0 {
            return Err(Error::DimensionMismatch {
                context: "ReducedQuadraticModel B rows",
                expected: r,
                got: b.nrows(),
            });
        }
        if c.ncols() != r || c.nrows() == 0 {
            return Err(Error::DimensionMismatch {
                context: "ReducedQuadraticModel C columns",
                expected: r,
                got: c.ncols(),
            });
        }
        Ok(Self {
            a,
            h_compact,
            b,
            c,
            basis_ref: basis_ref.into(),
            source,
        })
    }

    pub fn r(&self) -> usize {
        self.a.nrows()
    }

    pub fn q(&self) -> usize {
        self.b.ncols()
    }

    pub fn p(&self) -> usize {
        self.c.nrows()
    }

    pub fn a(&self) -> &Mat<f64> {
        &self.a
    }

    pub fn h_compact(&self) -> &Mat<f64> {
        &self.h_compact
    }

    /// Redundant `r × r²` quadratic operator, derived from the compact form.
    pub fn h_full(&self) -> Mat<f64> {
        expand_quadratic(&self.h_compact).expect("stored operator is consistent")
    }

    pub fn b(&self) -> &Mat<f64> {
        &self.b
    }

    pub fn c(&self) -> &Mat<f64> {
        &self.c
    }

    pub fn basis_ref(&self) -> &str {
        &self.basis_ref
    }

    pub fn source(&self) -> ModelSource {
        self.source
    }
}

/// The assembled regression problem.
#[derive(Debug, Clone)]
pub struct LeastSquaresProblem {
    coeff: Mat<f64>,
    rhs: Mat<f64>,
    mu: f64,
    r: usize,
    q: usize,
}

impl LeastSquaresProblem {
    /// Coefficient matrix `𝒜`, `S × (r + r(r+1)/2 + q)`.
    pub fn coeff(&self) -> &Mat<f64> {
        &self.coeff
    }

    /// Right-hand side `ℬ = Ẋ_rᵀ`, `S × r`.
    pub fn rhs(&self) -> &Mat<f64> {
        &self.rhs
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn columns(&self) -> usize {
        self.coeff.ncols()
    }

    pub fn samples(&self) -> usize {
        self.coeff.nrows()
    }
}

/// Builds `𝒜 = [X_rᵀ  X̃_rᵀ  Uᵀ]` and `ℬ = Ẋ_rᵀ` from reduced snapshots.
pub fn assemble_problem(
    x_r: &Mat<f64>,
    xdot_r: &Mat<f64>,
    u: &Mat<f64>,
    mu: f64,
) -> Result<LeastSquaresProblem> {
    let r = x_r.nrows();
    let samples = x_r.ncols();
    let q = u.nrows();
    if r == 0 || samples == 0 || q == 0 {
        return Err(Error::DegenerateData("empty operator-inference data".into()));
    }
    if xdot_r.nrows() != r || xdot_r.ncols() != samples {
        return Err(Error::DimensionMismatch {
            context: "assemble_problem derivative snapshots",
            expected: r * samples,
            got: xdot_r.nrows() * xdot_r.ncols(),
        });
    }
    if u.ncols() != samples {
        return Err(Error::DimensionMismatch {
            context: "assemble_problem input columns",
            expected: samples,
            got: u.ncols(),
        });
    }
    if !(mu.is_finite() && mu >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "regularization parameter must be non-negative, got {mu}"
        )));
    }

    let quad = compact_len(r);
    let cols = r + quad + q;
    let mut coeff = Mat::zeros(samples, cols);
    let mut state = vec![0.0; r];
    let mut kron = vec![0.0; quad];
    for k in 0..samples {
        for i in 0..r {
            state[i] = x_r[(i, k)];
        }
        compact_kron_into(&state, &mut kron);
        for i in 0..r {
            coeff[(k, i)] = state[i];
        }
        for (j, &v) in kron.iter().enumerate() {
            coeff[(k, r + j)] = v;
        }
        for j in 0..q {
            coeff[(k, r + quad + j)] = u[(j, k)];
        }
    }
    let rhs = xdot_r.transpose().to_owned();
    Ok(LeastSquaresProblem {
        coeff,
        rhs,
        mu,
        r,
        q,
    })
}

/// Solution of the regression problem, with the rank of `𝒜` attached so
/// rank-deficient data (the usual situation with a constant input) is
/// visible to callers.
#[derive(Debug, Clone)]
pub struct LeastSquaresSolution {
    /// Stacked unknowns `𝒳 = [A_rᵀ; H̃_rᵀ; B_rᵀ]`, `(r + r(r+1)/2 + q) × r`.
    pub coefficients: Mat<f64>,
    /// Numerical rank of the unregularized coefficient matrix `𝒜`.
    pub rank: usize,
    /// Number of columns of `𝒜`.
    pub columns: usize,
}

impl LeastSquaresSolution {
    pub fn is_rank_deficient(&self) -> bool {
        self.rank < self.columns
    }
}

/// Solves the (optionally Tikhonov-regularized) least-squares problem.
///
/// For `μ > 0` the stacked system `[𝒜; √μ·I] x = [ℬ; 0]` is solved by a
/// column-pivoted QR factorization; the stack has full column rank, so the
/// minimizer is unique. For `μ = 0` the minimum-norm solution is taken from
/// the SVD of `𝒜`, truncated at the numerical rank.
pub fn solve(problem: &LeastSquaresProblem) -> Result<LeastSquaresSolution> {
    let coeff = &problem.coeff;
    let samples = coeff.nrows();
    let cols = coeff.ncols();

    let svd = coeff
        .thin_svd()
        .map_err(|e| Error::DegenerateData(format!("SVD of the data matrix failed: {e:?}")))?;
    let m = samples.min(cols);
    let sigma: Vec<f64> = (0..m).map(|i| svd.S()[i]).collect();
    let cutoff = samples.max(cols) as f64 * f64::EPSILON * sigma[0];
    let rank = sigma.iter().take_while(|&&s| s > cutoff).count();

    let coefficients = if problem.mu > 0.0 {
        let sqrt_mu = problem.mu.sqrt();
        let mut stacked = Mat::zeros(samples + cols, cols);
        for j in 0..cols {
            for i in 0..samples {
                stacked[(i, j)] = coeff[(i, j)];
            }
            stacked[(samples + j, j)] = sqrt_mu;
        }
        let mut rhs = Mat::zeros(samples + cols, problem.rhs.ncols());
        for j in 0..problem.rhs.ncols() {
            for i in 0..samples {
                rhs[(i, j)] = problem.rhs[(i, j)];
            }
        }
        stacked.col_piv_qr().solve_lstsq(&rhs)
    } else {
        // x = V Σ⁺ Uᵀ b, zeroing directions past the numerical rank
        let mut projected = svd.U().transpose() * &problem.rhs;
        for i in 0..m {
            let scale = if i < rank { 1.0 / sigma[i] } else { 0.0 };
            for j in 0..projected.ncols() {
                projected[(i, j)] *= scale;
            }
        }
        svd.V() * &projected
    };

    Ok(LeastSquaresSolution {
        coefficients,
        rank,
        columns: cols,
    })
}

/// Outcome of [`infer`]: the learned model plus the rank diagnostics of the
/// regression it came from.
#[derive(Debug, Clone)]
pub struct Inference {
    pub model: ReducedQuadraticModel,
    pub rank: usize,
    pub columns: usize,
}

impl Inference {
    pub fn is_rank_deficient(&self) -> bool {
        self.rank < self.columns
    }
}

/// Full inference pipeline: assemble the regression, solve it, and unstack
/// `(A_r, H̃_r, B_r)`. The output map is not inferred: `c_r` must be the
/// projection `C Φ_r` of the known lifted output map, supplied by the caller.
pub fn infer(
    x_r: &Mat<f64>,
    xdot_r: &Mat<f64>,
    u: &Mat<f64>,
    mu: f64,
    c_r: Mat<f64>,
    basis_ref: impl Into<String>,
) -> Result<Inference> {
    let problem = assemble_problem(x_r, xdot_r, u, mu)?;
    let solution = solve(&problem)?;
    let (a, h_compact, b) = unstack(&solution.coefficients, problem.r, problem.q)?;
    let model = ReducedQuadraticModel::new(a, h_compact, b, c_r, basis_ref, ModelSource::Learned)?;
    Ok(Inference {
        model,
        rank: solution.rank,
        columns: solution.columns,
    })
}

/// Splits stacked regression unknowns into `(A_r, H̃_r, B_r)`.
pub fn unstack(coefficients: &Mat<f64>, r: usize, q: usize) -> Result<(Mat<f64>, Mat<f64>, Mat<f64>)> {
    let quad = compact_len(r);
    if coefficients.nrows() != r + quad + q || coefficients.ncols() != r {
        return Err(Error::DimensionMismatch {
            context: "unstack coefficient shape",
            expected: (r + quad + q) * r,
            got: coefficients.nrows() * coefficients.ncols(),
        });
    }
    let a = Mat::from_fn(r, r, |i, j| coefficients[(j, i)]);
    let h_compact = Mat::from_fn(r, quad, |i, j| coefficients[(r + j, i)]);
    let b = Mat::from_fn(r, q, |i, j| coefficients[(r + quad + j, i)]);
    Ok((a, h_compact, b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn mat_from_rows(rows: &[&[f64]]) -> Mat<f64> {
        Mat::from_fn(rows.len(), rows[0].len(), |i, j| rows[i][j])
    }

    fn frob(m: &Mat<f64>) -> f64 {
        let mut acc = 0.0;
        for j in 0..m.ncols() {
            for i in 0..m.nrows() {
                acc += m[(i, j)] * m[(i, j)];
            }
        }
        acc.sqrt()
    }

    fn max_abs_diff(a: &Mat<f64>, b: &Mat<f64>) -> f64 {
        assert_eq!((a.nrows(), a.ncols()), (b.nrows(), b.ncols()));
        let mut m: f64 = 0.0;
        for j in 0..a.ncols() {
            for i in 0..a.nrows() {
                m = m.max((a[(i, j)] - b[(i, j)]).abs());
            }
        }
        m
    }

    #[test]
    fn compact_square_of_a_pair() {
        assert_eq!(compact_kron(&[2.0, 3.0]), vec![4.0, 6.0, 9.0]);
    }

    #[test]
    fn compact_square_of_a_unit_vector() {
        assert_eq!(compact_kron(&[1.0, 0.0, 0.0]), vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn compact_square_matches_deduplicated_full_square() {
        let mut rng = StdRng::seed_from_u64(31);
        let x: Vec<f64> = (0..4).map(|_| rng.random_range(-2.0..2.0)).collect();
        let compact = compact_kron(&x);
        let full = full_kron(&x);
        let mut idx = 0;
        for i in 0..4 {
            for j in i..4 {
                assert_eq!(compact[idx], full[i * 4 + j]);
                idx += 1;
            }
        }
    }

    #[test]
    fn expansion_splits_cross_terms() {
        let h = mat_from_rows(&[&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]]);
        let full = expand_quadratic(&h).unwrap();
        let expected = mat_from_rows(&[&[1.0, 1.0, 1.0, 3.0], &[4.0, 2.5, 2.5, 6.0]]);
        assert_eq!(max_abs_diff(&full, &expected), 0.0);
    }

    #[test]
    fn expansion_of_zero_is_zero() {
        let full = expand_quadratic(&Mat::zeros(3, 6)).unwrap();
        assert_eq!(frob(&full), 0.0);
    }

    #[test]
    fn compact_and_expanded_actions_agree() {
        let mut rng = StdRng::seed_from_u64(37);
        for r in 2..=8usize {
            let h = Mat::from_fn(r, compact_len(r), |_, _| rng.random_range(-1.0..1.0));
            let full = expand_quadratic(&h).unwrap();
            for _ in 0..25 {
                let x: Vec<f64> = (0..r).map(|_| rng.random_range(-2.0..2.0)).collect();
                let compact = compact_kron(&x);
                let kron = full_kron(&x);
                for row in 0..r {
                    let via_compact: f64 =
                        (0..compact.len()).map(|c| h[(row, c)] * compact[c]).sum();
                    let via_full: f64 = (0..kron.len()).map(|c| full[(row, c)] * kron[c]).sum();
                    let scale = via_full.abs().max(1.0);
                    assert!((via_compact - via_full).abs() <= 1e-13 * scale);
                }
            }
        }
    }

    #[test]
    fn compacting_a_full_operator_symmetrizes_it() {
        let mut rng = StdRng::seed_from_u64(41);
        let r = 3;
        let full = Mat::from_fn(r, r * r, |_, _| rng.random_range(-1.0..1.0));
        let sym = expand_quadratic(&compact_quadratic(&full).unwrap()).unwrap();
        // both act identically on Kronecker squares
        for _ in 0..20 {
            let x: Vec<f64> = (0..r).map(|_| rng.random_range(-2.0..2.0)).collect();
            let kron = full_kron(&x);
            for row in 0..r {
                let lhs: f64 = (0..kron.len()).map(|c| full[(row, c)] * kron[c]).sum();
                let rhs: f64 = (0..kron.len()).map(|c| sym[(row, c)] * kron[c]).sum();
                assert!((lhs - rhs).abs() <= 1e-13 * lhs.abs().max(1.0));
            }
        }
        // and the symmetrized form has matching cross columns
        for i in 0..r {
            for j in 0..r {
                assert!((sym[(0, i * r + j)] - sym[(0, j * r + i)]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn hand_expanded_regression_matrix() {
        let x_r = mat_from_rows(&[&[1.0, 2.0]]);
        let xdot_r = mat_from_rows(&[&[0.5, -0.5]]);
        let u = mat_from_rows(&[&[1.0, 1.0]]);
        let problem = assemble_problem(&x_r, &xdot_r, &u, 0.0).unwrap();
        let expected = mat_from_rows(&[&[1.0, 1.0, 1.0], &[2.0, 4.0, 1.0]]);
        assert_eq!(max_abs_diff(problem.coeff(), &expected), 0.0);
        assert_eq!(problem.rhs()[(0, 0)], 0.5);
        assert_eq!(problem.rhs()[(1, 0)], -0.5);
    }

    #[test]
    fn zero_states_leave_only_the_input_block() {
        let x_r = Mat::zeros(2, 4);
        let xdot_r = Mat::zeros(2, 4);
        let u = Mat::from_fn(1, 4, |_, _| 3.0);
        let problem = assemble_problem(&x_r, &xdot_r, &u, 0.0).unwrap();
        for k in 0..4 {
            for c in 0..problem.columns() - 1 {
                assert_eq!(problem.coeff()[(k, c)], 0.0);
            }
            assert_eq!(problem.coeff()[(k, problem.columns() - 1)], 3.0);
        }
    }

    #[test]
    fn column_counts_follow_the_block_layout() {
        let mut rng = StdRng::seed_from_u64(43);
        for r in [2usize, 3, 5] {
            let s = 12;
            let x_r = Mat::from_fn(r, s, |_, _| rng.random_range(-1.0..1.0));
            let xdot_r = Mat::from_fn(r, s, |_, _| rng.random_range(-1.0..1.0));
            let u = Mat::from_fn(1, s, |_, _| 1.0);
            let problem = assemble_problem(&x_r, &xdot_r, &u, 1e-3).unwrap();
            assert_eq!(problem.columns(), r + r * (r + 1) / 2 + 1);
        }
    }

    #[test]
    fn zero_targets_with_ridge_give_zero_solution() {
        let mut rng = StdRng::seed_from_u64(47);
        let x_r = Mat::from_fn(2, 30, |_, _| rng.random_range(-1.0..1.0));
        let xdot_r = Mat::zeros(2, 30);
        let u = Mat::from_fn(1, 30, |_, _| 1.0);
        let problem = assemble_problem(&x_r, &xdot_r, &u, 1e-2).unwrap();
        let sol = solve(&problem).unwrap();
        assert!(frob(&sol.coefficients) < 1e-12);
    }

    #[test]
    fn ridge_path_shrinks_monotonically() {
        let mut rng = StdRng::seed_from_u64(53);
        let x_r = Mat::from_fn(3, 60, |_, _| rng.random_range(-1.0..1.0));
        let xdot_r = Mat::from_fn(3, 60, |_, _| rng.random_range(-1.0..1.0));
        let u = Mat::from_fn(1, 60, |_, _| 1.0);
        let mut previous = f64::INFINITY;
        for mu in [1e-6, 1e-3, 1.0, 1e3] {
            let problem = assemble_problem(&x_r, &xdot_r, &u, mu).unwrap();
            let norm = frob(&solve(&problem).unwrap().coefficients);
            assert!(norm <= previous + 1e-12, "‖𝒳‖ grew from {previous} to {norm} at μ={mu}");
            previous = norm;
        }
    }

    #[test]
    fn unregularized_rank_deficient_solve_returns_minimum_norm() {
        // duplicated column: solutions form a line, minimum norm splits evenly
        let coeff = mat_from_rows(&[&[1.0, 1.0], &[1.0, 1.0]]);
        let rhs = mat_from_rows(&[&[2.0], &[2.0]]);
        let problem = LeastSquaresProblem {
            coeff,
            rhs,
            mu: 0.0,
            r: 1,
            q: 1,
        };
        let sol = solve(&problem).unwrap();
        assert!(sol.is_rank_deficient());
        assert_eq!(sol.rank, 1);
        assert!((sol.coefficients[(0, 0)] - 1.0).abs() < 1e-12);
        assert!((sol.coefficients[(1, 0)] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn columnwise_and_joint_solves_agree() {
        let mut rng = StdRng::seed_from_u64(59);
        let x_r = Mat::from_fn(3, 40, |_, _| rng.random_range(-1.0..1.0));
        let xdot_r = Mat::from_fn(3, 40, |_, _| rng.random_range(-1.0..1.0));
        let u = Mat::from_fn(1, 40, |_, _| 1.0);
        let problem = assemble_problem(&x_r, &xdot_r, &u, 1e-3).unwrap();
        let joint = solve(&problem).unwrap().coefficients;
        for col in 0..3 {
            let single = LeastSquaresProblem {
                coeff: problem.coeff.clone(),
                rhs: Mat::from_fn(problem.samples(), 1, |i, _| problem.rhs[(i, col)]),
                mu: problem.mu,
                r: problem.r,
                q: problem.q,
            };
            let sol = solve(&single).unwrap().coefficients;
            for row in 0..problem.columns() {
                assert!((sol[(row, 0)] - joint[(row, col)]).abs() < 1e-12);
            }
        }
    }

    /// Simulates a reduced quadratic model and returns snapshots with exact
    /// derivative evaluations, concatenated over several runs for richness.
    fn generator_data(
        model: &crate::opinf::ReducedQuadraticModel,
        initial_conditions: &[Vec<f64>],
    ) -> (Mat<f64>, Mat<f64>, Mat<f64>) {
        let r = model.r();
        let mut states_cols: Vec<Vec<f64>> = Vec::new();
        let mut deriv_cols: Vec<Vec<f64>> = Vec::new();
        let mut input_cols: Vec<f64> = Vec::new();
        for (run, x0) in initial_conditions.iter().enumerate() {
            let freq = 1.5 + run as f64;
            let input = move |t: f64| 1.0 + 0.4 * (freq * t).sin();
            let sim = crate::rom::simulate_rom(model, x0, (0.0, 2.0), 1e-3, input).unwrap();
            for k in 0..sim.snapshots.len() {
                let x: Vec<f64> = (0..r).map(|i| sim.snapshots.states()[(i, k)]).collect();
                let u = sim.snapshots.inputs()[(0, k)];
                let dx = crate::rom::rom_rhs(model, &x, &[u]).unwrap();
                states_cols.push(x);
                deriv_cols.push(dx);
                input_cols.push(u);
            }
        }
        let s = states_cols.len();
        let x_r = Mat::from_fn(r, s, |i, k| states_cols[k][i]);
        let xdot_r = Mat::from_fn(r, s, |i, k| deriv_cols[k][i]);
        let u = Mat::from_fn(1, s, |_, k| input_cols[k]);
        (x_r, xdot_r, u)
    }

    fn random_stable_model(rng: &mut StdRng, r: usize) -> ReducedQuadraticModel {
        let a = Mat::from_fn(r, r, |i, j| {
            if i == j {
                -rng.random_range(0.5..1.5)
            } else {
                rng.random_range(-0.3..0.3)
            }
        });
        let h = Mat::from_fn(r, compact_len(r), |_, _| rng.random_range(-0.08..0.08));
        let b = Mat::from_fn(r, 1, |_, _| rng.random_range(-0.5..0.5));
        let c = Mat::from_fn(1, r, |_, _| rng.random_range(-1.0..1.0));
        ReducedQuadraticModel::new(a, h, b, c, "generator", ModelSource::Learned).unwrap()
    }

    #[test]
    fn exact_data_recovers_the_generator() {
        let mut rng = StdRng::seed_from_u64(61);
        let generator = random_stable_model(&mut rng, 3);
        let ics: Vec<Vec<f64>> = (0..3)
            .map(|_| (0..3).map(|_| rng.random_range(-0.6..0.6)).collect())
            .collect();
        let (x_r, xdot_r, u) = generator_data(&generator, &ics);
        let inference = infer(&x_r, &xdot_r, &u, 0.0, generator.c().clone(), "test").unwrap();
        assert!(!inference.is_rank_deficient(), "rank {}/{}", inference.rank, inference.columns);
        assert!(max_abs_diff(inference.model.a(), generator.a()) < 1e-8);
        assert!(max_abs_diff(inference.model.h_compact(), generator.h_compact()) < 1e-8);
        assert!(max_abs_diff(inference.model.b(), generator.b()) < 1e-8);
    }

    #[test]
    fn scalar_quadratic_system_is_identified_in_closed_form() {
        // ẋ = a x + h x² + b u with known coefficients
        let (a, h, b) = (-1.0, 0.3, 0.5);
        let model = ReducedQuadraticModel::new(
            Mat::from_fn(1, 1, |_, _| a),
            Mat::from_fn(1, 1, |_, _| h),
            Mat::from_fn(1, 1, |_, _| b),
            Mat::from_fn(1, 1, |_, _| 1.0),
            "scalar",
            ModelSource::Learned,
        )
        .unwrap();
        let (x_r, xdot_r, u) = generator_data(&model, &[vec![0.8], vec![-0.4]]);
        let inference = infer(&x_r, &xdot_r, &u, 0.0, model.c().clone(), "scalar").unwrap();
        assert!((inference.model.a()[(0, 0)] - a).abs() < 1e-10);
        assert!((inference.model.h_compact()[(0, 0)] - h).abs() < 1e-10);
        assert!((inference.model.b()[(0, 0)] - b).abs() < 1e-10);
    }

    #[test]
    fn only_the_symmetric_part_of_a_quadratic_operator_is_identifiable() {
        // data produced by an asymmetric full-form operator; the inferred
        // compact operator must equal the symmetrized representative
        let mut rng = StdRng::seed_from_u64(67);
        let r = 3;
        let a = Mat::from_fn(r, r, |i, j| {
            if i == j {
                -rng.random_range(0.8..1.4)
            } else {
                rng.random_range(-0.2..0.2)
            }
        });
        let h_asym = Mat::from_fn(r, r * r, |_, _| rng.random_range(-0.08..0.08));
        let b = Mat::from_fn(r, 1, |_, _| rng.random_range(-0.4..0.4));

        let rhs = |x: &[f64], u: f64, out: &mut [f64]| {
            let kron = full_kron(x);
            for i in 0..r {
                let mut acc = b[(i, 0)] * u;
                for j in 0..r {
                    acc += a[(i, j)] * x[j];
                }
                for (c, &k) in kron.iter().enumerate() {
                    acc += h_asym[(i, c)] * k;
                }
                out[i] = acc;
            }
        };

        let mut states: Vec<Vec<f64>> = Vec::new();
        let mut derivs: Vec<Vec<f64>> = Vec::new();
        let mut inputs: Vec<f64> = Vec::new();
        for run in 0..3 {
            let x0: Vec<f64> = (0..r).map(|_| rng.random_range(-0.5..0.5)).collect();
            let freq = 1.0 + run as f64;
            let snap = crate::simulate::integrate(rhs, &x0, (0.0, 2.0), 1e-3, move |t| {
                1.0 + 0.3 * (freq * t).sin()
            })
            .unwrap();
            let mut dx = vec![0.0; r];
            for k in 0..snap.len() {
                let x: Vec<f64> = (0..r).map(|i| snap.states()[(i, k)]).collect();
                let u = snap.inputs()[(0, k)];
                rhs(&x, u, &mut dx);
                states.push(x);
                derivs.push(dx.clone());
                inputs.push(u);
            }
        }
        let s = states.len();
        let x_r = Mat::from_fn(r, s, |i, k| states[k][i]);
        let xdot_r = Mat::from_fn(r, s, |i, k| derivs[k][i]);
        let u = Mat::from_fn(1, s, |_, k| inputs[k]);

        let inference = infer(&x_r, &xdot_r, &u, 0.0, Mat::from_fn(1, r, |_, _| 1.0), "asym").unwrap();
        let symmetrized = compact_quadratic(&h_asym).unwrap();
        assert!(max_abs_diff(inference.model.h_compact(), &symmetrized) < 1e-8);
        assert!(max_abs_diff(inference.model.a(), &a) < 1e-8);
    }

    #[test]
    fn flipping_basis_signs_leaves_the_predicted_output_unchanged() {
        let mut rng = StdRng::seed_from_u64(71);
        let generator = random_stable_model(&mut rng, 3);
        let ics: Vec<Vec<f64>> = (0..3)
            .map(|_| (0..3).map(|_| rng.random_range(-0.5..0.5)).collect())
            .collect();
        let (x_r, xdot_r, u) = generator_data(&generator, &ics);

        // flip reduced coordinate 1, as a sign change of POD column 1 would
        let flip = [1.0, -1.0, 1.0];
        let x_r_f = Mat::from_fn(3, x_r.ncols(), |i, k| flip[i] * x_r[(i, k)]);
        let xdot_r_f = Mat::from_fn(3, x_r.ncols(), |i, k| flip[i] * xdot_r[(i, k)]);
        let c = generator.c().clone();
        let c_f = Mat::from_fn(1, 3, |_, j| flip[j] * c[(0, j)]);

        let plain = infer(&x_r, &xdot_r, &u, 1e-4, c, "plain").unwrap().model;
        let flipped = infer(&x_r_f, &xdot_r_f, &u, 1e-4, c_f, "flipped").unwrap().model;

        let x0 = [0.3, -0.2, 0.4];
        let x0_f = [0.3, 0.2, 0.4];
        let sim = crate::rom::simulate_rom(&plain, &x0, (0.0, 2.0), 1e-3, |_| 1.0).unwrap();
        let sim_f = crate::rom::simulate_rom(&flipped, &x0_f, (0.0, 2.0), 1e-3, |_| 1.0).unwrap();
        for k in 0..sim.snapshots.len() {
            assert!(
                (sim.outputs[(0, k)] - sim_f.outputs[(0, k)]).abs() < 1e-10,
                "outputs diverge at sample {k}"
            );
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn compact_identity_on_random_vectors(seed in 0u64..1024) {
            let mut rng = StdRng::seed_from_u64(seed);
            let r = rng.random_range(2..=8usize);
            let h = Mat::from_fn(r, compact_len(r), |_, _| rng.random_range(-1.0..1.0));
            let full = expand_quadratic(&h).unwrap();
            let x: Vec<f64> = (0..r).map(|_| rng.random_range(-2.0..2.0)).collect();
            let compact = compact_kron(&x);
            let kron = full_kron(&x);
            for row in 0..r {
                let lhs: f64 = (0..compact.len()).map(|c| h[(row, c)] * compact[c]).sum();
                let rhs: f64 = (0..kron.len()).map(|c| full[(row, c)] * kron[c]).sum();
                prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1.0));
            }
        }
    }
}
