//! Trigonometric lifting of the swing equations to an exactly quadratic system.
//!
//! Augmenting the state with `sin δ` and `cos δ` turns every
//! `sin(δᵢ − δⱼ − γ_ij)` coupling term into products of state entries, so the
//! `2n`-dimensional nonlinear network becomes the `4n`-dimensional quadratic
//! system
//!
//! ```text
//! ẋ = A x + H (x ⊗ x) + B u,      y = C x,      x = (δ, δ̇, sin δ, cos δ).
//! ```
//!
//! Block layout of the assembled operators (state blocks 1..4 as above):
//!
//! * `A`: identity in block (1,2), `−M⁻¹D` in block (2,2), zero elsewhere.
//! * `B`: `M⁻¹ B_s` in block 2.
//! * `C`: the original output row in block 1.
//! * `H`: block-2 rows couple pairs drawn from blocks 3 and 4 with weights
//!   `±K_ij sin γ_ij` and `±K_ij cos γ_ij` scaled by `ω_R/(2Jᵢ)`; block-3 and
//!   block-4 rows hold the kinematic pairs `cos δᵢ · δ̇ᵢ` and `−sin δᵢ · δ̇ᵢ`.
//!
//! Per-oscillator row `i` of block 2 carries, for every neighbour `j` with
//! `K_ij ≠ 0`, the four pair weights
//!
//! ```text
//! (sin δᵢ, sin δⱼ) ↦ +α_ij,   (sin δᵢ, cos δⱼ) ↦ −β_ij,
//! (cos δᵢ, sin δⱼ) ↦ +β_ij,   (cos δᵢ, cos δⱼ) ↦ +α_ij,
//! ```
//!
//! with `α_ij = K_ij sin γ_ij`, `β_ij = K_ij cos γ_ij`, all times
//! `ω_R/(2Jᵢ)`; this expansion of the angle-difference sine is what makes
//! the quadratic form reproduce the nonlinear right-hand side exactly, which
//! [`lifted_rhs_via_chain_rule`] checks term-free.
//!
//! `H` is kept as sparse coefficient triples; the dense `4n × (4n)²` matrix
//! is never formed (it has ~10⁸ columns already at n = 118).

use faer::Mat;

use crate::error::{Error, Result};
use crate::swing::{swing_rhs, SwingNetwork, SwingState};

/// State of the lifted system, `x = (δ, δ̇, sin δ, cos δ) ∈ ℝ^{4n}`.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftedState {
    values: Vec<f64>,
}

impl LiftedState {
    /// Wraps a raw vector; the length must be divisible by 4.
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() || !values.len().is_multiple_of(4) {
            return Err(Error::DimensionMismatch {
                context: "LiftedState::from_values",
                expected: 4 * (values.len() / 4 + 1),
                got: values.len(),
            });
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Number of oscillators `n` (a quarter of the state length).
    pub fn oscillators(&self) -> usize {
        self.values.len() / 4
    }
}

/// One coefficient of the sparse quadratic operator: contributes
/// `coeff · x[left] · x[right]` to `out[row]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticTerm {
    pub row: usize,
    pub left: usize,
    pub right: usize,
    pub coeff: f64,
}

/// Sparse matrix `H ∈ ℝ^{d × d²}` acting on Kronecker squares, stored as
/// coefficient triples. The Kronecker column for the pair `(i, j)` is
/// `i·d + j` (zero-based), the convention used across the crate.
#[derive(Debug, Clone)]
pub struct QuadraticTerms {
    dim: usize,
    terms: Vec<QuadraticTerm>,
}

impl QuadraticTerms {
    pub fn new(dim: usize, terms: Vec<QuadraticTerm>) -> Result<Self> {
        for t in &terms {
            if t.row >= dim || t.left >= dim || t.right >= dim {
                return Err(Error::InvalidArgument(format!(
                    "quadratic term ({}, {}, {}) out of range for dim {dim}",
                    t.row, t.left, t.right
                )));
            }
        }
        Ok(Self { dim, terms })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[QuadraticTerm] {
        &self.terms
    }

    /// Evaluates `H (x ⊗ x)` in `O(nnz)` without forming `x ⊗ x`.
    pub fn apply(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.dim);
        debug_assert_eq!(out.len(), self.dim);
        for t in &self.terms {
            out[t.row] += t.coeff * x[t.left] * x[t.right];
        }
    }

    /// Galerkin contraction `Φᵀ H (Φ ⊗ Φ)` as a dense `r × r²` matrix.
    pub fn contract(&self, basis: &Mat<f64>) -> Result<Mat<f64>> {
        if basis.nrows() != self.dim {
            return Err(Error::DimensionMismatch {
                context: "QuadraticTerms::contract basis rows",
                expected: self.dim,
                got: basis.nrows(),
            });
        }
        let r = basis.ncols();
        let mut reduced = Mat::zeros(r, r * r);
        for t in &self.terms {
            for a in 0..r {
                let w = t.coeff * basis[(t.row, a)];
                if w == 0.0 {
                    continue;
                }
                for k in 0..r {
                    let wk = w * basis[(t.left, k)];
                    if wk == 0.0 {
                        continue;
                    }
                    for l in 0..r {
                        reduced[(a, k * r + l)] += wk * basis[(t.right, l)];
                    }
                }
            }
        }
        Ok(reduced)
    }
}

/// Exact operators `(A, H, B, C)` of the lifted quadratic system.
#[derive(Debug, Clone)]
pub struct LiftedOperators {
    a: Mat<f64>,
    h: QuadraticTerms,
    b: Vec<f64>,
    c: Mat<f64>,
}

impl LiftedOperators {
    /// Lifted state dimension `4n`.
    pub fn dim(&self) -> usize {
        self.b.len()
    }

    /// Number of oscillators `n`.
    pub fn oscillators(&self) -> usize {
        self.dim() / 4
    }

    pub fn a(&self) -> &Mat<f64> {
        &self.a
    }

    pub fn h(&self) -> &QuadraticTerms {
        &self.h
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn c(&self) -> &Mat<f64> {
        &self.c
    }

    /// Right-hand side `A x + H (x ⊗ x) + B u` written into `out`.
    pub fn rhs_into(&self, x: &[f64], u: f64, out: &mut [f64]) {
        let d = self.dim();
        debug_assert_eq!(x.len(), d);
        debug_assert_eq!(out.len(), d);
        // A is block-sparse: only rows in blocks 1 and 2 are nonzero.
        let n = d / 4;
        for i in 0..n {
            out[i] = x[n + i];
            out[n + i] = self.a[(n + i, n + i)] * x[n + i] + self.b[n + i] * u;
        }
        for v in out[2 * n..].iter_mut() {
            *v = 0.0;
        }
        self.h.apply(x, out);
    }
}

/// Lifting map `(δ, δ̇) ↦ (δ, δ̇, sin δ, cos δ)`.
pub fn lift_state(angles: &[f64], velocities: &[f64]) -> Result<LiftedState> {
    if angles.len() != velocities.len() {
        return Err(Error::DimensionMismatch {
            context: "lift_state velocities",
            expected: angles.len(),
            got: velocities.len(),
        });
    }
    if angles.is_empty() {
        return Err(Error::InvalidArgument("lift_state needs n >= 1".into()));
    }
    let n = angles.len();
    let mut values = vec![0.0; 4 * n];
    values[..n].copy_from_slice(angles);
    values[n..2 * n].copy_from_slice(velocities);
    for i in 0..n {
        let (s, c) = angles[i].sin_cos();
        values[2 * n + i] = s;
        values[3 * n + i] = c;
    }
    LiftedState::from_values(values)
}

/// Assembles the exact `(A, H, B, C)` of the lifted quadratic system.
pub fn assemble_lifted_operators(net: &SwingNetwork) -> LiftedOperators {
    let n = net.n();
    let d = 4 * n;
    let mut a = Mat::zeros(d, d);
    let mut b = vec![0.0; d];
    let mut terms = Vec::with_capacity(2 * n + 4 * n * n);

    for i in 0..n {
        let m_inv = net.omega_r() / (2.0 * net.inertia()[i]);

        a[(i, n + i)] = 1.0;
        a[(n + i, n + i)] = -net.damping()[i] / (2.0 * net.inertia()[i]);
        b[n + i] = m_inv * net.power()[i];

        for j in 0..n {
            if j == i {
                continue;
            }
            let k = net.coupling()[(i, j)];
            if k == 0.0 {
                continue;
            }
            let gamma = net.phase_shift()[(i, j)];
            let alpha = k * gamma.sin();
            let beta = k * gamma.cos();
            if alpha != 0.0 {
                terms.push(QuadraticTerm {
                    row: n + i,
                    left: 2 * n + i,
                    right: 2 * n + j,
                    coeff: m_inv * alpha,
                });
                terms.push(QuadraticTerm {
                    row: n + i,
                    left: 3 * n + i,
                    right: 3 * n + j,
                    coeff: m_inv * alpha,
                });
            }
            if beta != 0.0 {
                terms.push(QuadraticTerm {
                    row: n + i,
                    left: 2 * n + i,
                    right: 3 * n + j,
                    coeff: -m_inv * beta,
                });
                terms.push(QuadraticTerm {
                    row: n + i,
                    left: 3 * n + i,
                    right: 2 * n + j,
                    coeff: m_inv * beta,
                });
            }
        }

        // d/dt sin δᵢ = cos δᵢ · δ̇ᵢ and d/dt cos δᵢ = −sin δᵢ · δ̇ᵢ
        terms.push(QuadraticTerm {
            row: 2 * n + i,
            left: 3 * n + i,
            right: n + i,
            coeff: 1.0,
        });
        terms.push(QuadraticTerm {
            row: 3 * n + i,
            left: 2 * n + i,
            right: n + i,
            coeff: -1.0,
        });
    }

    let p = net.p();
    let mut c = Mat::zeros(p, d);
    for row in 0..p {
        for j in 0..n {
            c[(row, j)] = net.output_weights()[(row, j)];
        }
    }

    let h = QuadraticTerms::new(d, terms).expect("indices are in range by construction");
    LiftedOperators { a, h, b, c }
}

/// Evaluates `A x + H (x ⊗ x) + B u`.
pub fn lifted_rhs(ops: &LiftedOperators, x: &LiftedState, u: f64) -> Result<Vec<f64>> {
    if x.values().len() != ops.dim() {
        return Err(Error::DimensionMismatch {
            context: "lifted_rhs state",
            expected: ops.dim(),
            got: x.values().len(),
        });
    }
    let mut out = vec![0.0; ops.dim()];
    ops.rhs_into(x.values(), u, &mut out);
    Ok(out)
}

/// The lifted time derivative obtained by differentiating the lifting map
/// along the nonlinear flow:
/// `(δ̇, M⁻¹(B u − D δ̇ − f(δ)), cos δ ⊙ δ̇, −sin δ ⊙ δ̇)`.
///
/// This never touches the assembled quadratic operators, so it serves as the
/// independent reference for lifting exactness.
pub fn lifted_rhs_via_chain_rule(net: &SwingNetwork, state: &SwingState, u: f64) -> Result<Vec<f64>> {
    let n = net.n();
    let dz = swing_rhs(net, state, u)?;
    let mut out = vec![0.0; 4 * n];
    out[..2 * n].copy_from_slice(&dz);
    for i in 0..n {
        let (s, c) = state.angles[i].sin_cos();
        out[2 * n + i] = c * state.velocities[i];
        out[3 * n + i] = -s * state.velocities[i];
    }
    Ok(out)
}
