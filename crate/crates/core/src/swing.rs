//! Swing-equation dynamics of a network of coupled oscillators.
//!
//! The network is the second-order system
//!
//! ```text
//! M δ̈(t) + D δ̇(t) + f(δ) = B u(t),      y(t) = C δ(t),
//! ```
//!
//! with `M = diag(2 Jᵢ / ω_R)`, `D = diag(Dᵢ / ω_R)` and the coupling force
//! `fᵢ(δ) = Σ_{j≠i} K_ij · sin(δᵢ − δⱼ − γ_ij)`.
//!
//! How the constants `B`, `K`, `γ` were obtained (power flow, Kron
//! reduction, SM/EN/SP modelling) is outside this crate; networks are
//! consumed as parameter sets, typically read from a file by
//! [`crate::io::network`].

use faer::Mat;

use crate::error::{Error, Result};

/// Physical parameters of an `n`-oscillator swing-equation network.
///
/// Immutable after construction; all invariants (positive inertia,
/// non-negative coupling with zero diagonal, mutually consistent
/// dimensions) are enforced by [`SwingNetwork::new`].
#[derive(Debug, Clone)]
pub struct SwingNetwork {
    n: usize,
    omega_r: f64,
    inertia: Vec<f64>,
    damping: Vec<f64>,
    coupling: Mat<f64>,
    phase_shift: Mat<f64>,
    power: Vec<f64>,
    output_weights: Mat<f64>,
}

impl SwingNetwork {
    /// Builds a network after validating every model invariant.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        omega_r: f64,
        inertia: Vec<f64>,
        damping: Vec<f64>,
        coupling: Mat<f64>,
        phase_shift: Mat<f64>,
        power: Vec<f64>,
        output_weights: Mat<f64>,
    ) -> Result<Self> {
        let n = inertia.len();
        if n == 0 {
            return Err(Error::InvalidNetwork("network must have n >= 1".into()));
        }
        if !(omega_r.is_finite() && omega_r > 0.0) {
            return Err(Error::InvalidNetwork(format!(
                "reference frequency must be positive, got {omega_r}"
            )));
        }
        for (name, v) in [("inertia", &inertia), ("damping", &damping), ("power", &power)] {
            if v.len() != n {
                return Err(Error::DimensionMismatch {
                    context: match name {
                        "inertia" => "SwingNetwork inertia",
                        "damping" => "SwingNetwork damping",
                        _ => "SwingNetwork power",
                    },
                    expected: n,
                    got: v.len(),
                });
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidNetwork(format!("{name} contains non-finite entries")));
            }
        }
        if inertia.iter().any(|&j| j <= 0.0) {
            return Err(Error::InvalidNetwork("inertia must be strictly positive".into()));
        }
        if damping.iter().any(|&d| d < 0.0) {
            return Err(Error::InvalidNetwork("damping must be non-negative".into()));
        }
        for (name, m) in [("coupling", &coupling), ("phase_shift", &phase_shift)] {
            if m.nrows() != n || m.ncols() != n {
                return Err(Error::InvalidNetwork(format!(
                    "{name} must be {n}x{n}, got {}x{}",
                    m.nrows(),
                    m.ncols()
                )));
            }
        }
        for i in 0..n {
            if coupling[(i, i)] != 0.0 {
                return Err(Error::InvalidNetwork(format!(
                    "coupling diagonal must be zero, found K[{i}][{i}] = {}",
                    coupling[(i, i)]
                )));
            }
            for j in 0..n {
                if coupling[(i, j)] < 0.0 {
                    return Err(Error::InvalidNetwork(format!(
                        "coupling must be non-negative, found K[{i}][{j}] = {}",
                        coupling[(i, j)]
                    )));
                }
                if !coupling[(i, j)].is_finite() || !phase_shift[(i, j)].is_finite() {
                    return Err(Error::InvalidNetwork(
                        "coupling/phase_shift contain non-finite entries".into(),
                    ));
                }
            }
        }
        if output_weights.ncols() != n || output_weights.nrows() == 0 {
            return Err(Error::InvalidNetwork(format!(
                "output_weights must be p x {n} with p >= 1, got {}x{}",
                output_weights.nrows(),
                output_weights.ncols()
            )));
        }
        Ok(Self {
            n,
            omega_r,
            inertia,
            damping,
            coupling,
            phase_shift,
            power,
            output_weights,
        })
    }

    /// The arithmetic-mean output row `(1/n, ..., 1/n)`.
    pub fn mean_output_row(n: usize) -> Mat<f64> {
        Mat::from_fn(1, n, |_, _| 1.0 / n as f64)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of outputs `p`.
    pub fn p(&self) -> usize {
        self.output_weights.nrows()
    }

    pub fn omega_r(&self) -> f64 {
        self.omega_r
    }

    pub fn inertia(&self) -> &[f64] {
        &self.inertia
    }

    pub fn damping(&self) -> &[f64] {
        &self.damping
    }

    pub fn coupling(&self) -> &Mat<f64> {
        &self.coupling
    }

    pub fn phase_shift(&self) -> &Mat<f64> {
        &self.phase_shift
    }

    pub fn power(&self) -> &[f64] {
        &self.power
    }

    pub fn output_weights(&self) -> &Mat<f64> {
        &self.output_weights
    }

    /// Diagonal of the mass matrix, `M_ii = 2 Jᵢ / ω_R`.
    pub fn mass_diag(&self) -> Vec<f64> {
        self.inertia.iter().map(|j| 2.0 * j / self.omega_r).collect()
    }

    /// Diagonal of the damping matrix, `D_ii = Dᵢ / ω_R`.
    pub fn damping_diag(&self) -> Vec<f64> {
        self.damping.iter().map(|d| d / self.omega_r).collect()
    }
}

/// Angles and angular velocities `(δ, δ̇)` of a network.
#[derive(Debug, Clone, PartialEq)]
pub struct SwingState {
    pub angles: Vec<f64>,
    pub velocities: Vec<f64>,
}

impl SwingState {
    pub fn new(angles: Vec<f64>, velocities: Vec<f64>) -> Result<Self> {
        if angles.len() != velocities.len() {
            return Err(Error::DimensionMismatch {
                context: "SwingState velocities",
                expected: angles.len(),
                got: velocities.len(),
            });
        }
        Ok(Self { angles, velocities })
    }

    pub fn n(&self) -> usize {
        self.angles.len()
    }

    /// Reads a state from a stacked `(δ; δ̇)` vector of length `2n`.
    pub fn from_stacked(z: &[f64]) -> Result<Self> {
        if !z.len().is_multiple_of(2) {
            return Err(Error::DimensionMismatch {
                context: "SwingState::from_stacked",
                expected: z.len() + 1,
                got: z.len(),
            });
        }
        let n = z.len() / 2;
        Ok(Self {
            angles: z[..n].to_vec(),
            velocities: z[n..].to_vec(),
        })
    }

    /// Stacks the state as `(δ; δ̇)`.
    pub fn to_stacked(&self) -> Vec<f64> {
        let mut z = Vec::with_capacity(2 * self.n());
        z.extend_from_slice(&self.angles);
        z.extend_from_slice(&self.velocities);
        z
    }
}

/// Coupling force `f(δ)` with components `Σ_{j≠i} K_ij sin(δᵢ − δⱼ − γ_ij)`.
pub fn coupling_force(net: &SwingNetwork, angles: &[f64]) -> Result<Vec<f64>> {
    if angles.len() != net.n {
        return Err(Error::DimensionMismatch {
            context: "coupling_force angles",
            expected: net.n,
            got: angles.len(),
        });
    }
    let mut force = vec![0.0; net.n];
    for i in 0..net.n {
        let mut acc = 0.0;
        for j in 0..net.n {
            if j == i {
                continue;
            }
            let k = net.coupling[(i, j)];
            if k == 0.0 {
                continue;
            }
            acc += k * (angles[i] - angles[j] - net.phase_shift[(i, j)]).sin();
        }
        force[i] = acc;
    }
    Ok(force)
}

/// Time derivative of the stacked state: `(δ̇, M⁻¹(B·u − D·δ̇ − f(δ)))`.
pub fn swing_rhs(net: &SwingNetwork, state: &SwingState, u: f64) -> Result<Vec<f64>> {
    if state.n() != net.n {
        return Err(Error::DimensionMismatch {
            context: "swing_rhs state",
            expected: net.n,
            got: state.n(),
        });
    }
    let force = coupling_force(net, &state.angles)?;
    let mut out = vec![0.0; 2 * net.n];
    out[..net.n].copy_from_slice(&state.velocities);
    for i in 0..net.n {
        let m_inv = net.omega_r / (2.0 * net.inertia[i]);
        let d = net.damping[i] / net.omega_r;
        out[net.n + i] = m_inv * (net.power[i] * u - d * state.velocities[i] - force[i]);
    }
    Ok(out)
}

/// Output map `y = C δ`.
pub fn swing_output(net: &SwingNetwork, state: &SwingState) -> Result<Vec<f64>> {
    if state.n() != net.n {
        return Err(Error::DimensionMismatch {
            context: "swing_output state",
            expected: net.n,
            got: state.n(),
        });
    }
    let c = &net.output_weights;
    let mut y = vec![0.0; c.nrows()];
    for (row, out) in y.iter_mut().enumerate() {
        *out = (0..net.n).map(|j| c[(row, j)] * state.angles[j]).sum();
    }
    Ok(y)
}

/// Stacked-vector right-hand side without allocation, for use by integrators.
pub(crate) fn swing_rhs_into(net: &SwingNetwork, z: &[f64], u: f64, out: &mut [f64]) {
    let n = net.n;
    debug_assert_eq!(z.len(), 2 * n);
    debug_assert_eq!(out.len(), 2 * n);
    let (angles, velocities) = z.split_at(n);
    out[..n].copy_from_slice(velocities);
    for i in 0..n {
        let mut force = 0.0;
        for j in 0..n {
            if j == i {
                continue;
            }
            let k = net.coupling[(i, j)];
            if k == 0.0 {
                continue;
            }
            force += k * (angles[i] - angles[j] - net.phase_shift[(i, j)]).sin();
        }
        let m_inv = net.omega_r / (2.0 * net.inertia[i]);
        let d = net.damping[i] / net.omega_r;
        out[n + i] = m_inv * (net.power[i] * u - d * velocities[i] - force);
    }
}
