//! Simulation and evaluation of reduced quadratic models.

use faer::Mat;

use crate::error::{Error, Result};
use crate::opinf::{compact_kron_into, compact_len, ReducedQuadraticModel};
use crate::simulate::{integrate_guarded, SnapshotSet};

/// Learned quadratic models carry no stability guarantee; a trajectory whose
/// max-norm passes this bound is reported as diverged.
pub const DIVERGENCE_NORM: f64 = 1e12;

/// Right-hand side `A_r x_r + H̃_r (x_r ⊗̃ x_r) + B_r u` in compact form.
pub fn rom_rhs(model: &ReducedQuadraticModel, x_r: &[f64], u: &[f64]) -> Result<Vec<f64>> {
    let r = model.r();
    if x_r.len() != r {
        return Err(Error::DimensionMismatch {
            context: "rom_rhs state",
            expected: r,
            got: x_r.len(),
        });
    }
    if u.len() != model.q() {
        return Err(Error::DimensionMismatch {
            context: "rom_rhs input",
            expected: model.q(),
            got: u.len(),
        });
    }
    let mut kron = vec![0.0; compact_len(r)];
    let mut out = vec![0.0; r];
    rom_rhs_into(model, x_r, u, &mut kron, &mut out);
    Ok(out)
}

fn rom_rhs_into(
    model: &ReducedQuadraticModel,
    x_r: &[f64],
    u: &[f64],
    kron_scratch: &mut [f64],
    out: &mut [f64],
) {
    let r = model.r();
    compact_kron_into(x_r, kron_scratch);
    let a = model.a();
    let h = model.h_compact();
    let b = model.b();
    for i in 0..r {
        let mut acc = 0.0;
        for j in 0..r {
            acc += a[(i, j)] * x_r[j];
        }
        for (c, &k) in kron_scratch.iter().enumerate() {
            acc += h[(i, c)] * k;
        }
        for (j, &uj) in u.iter().enumerate() {
            acc += b[(i, j)] * uj;
        }
        out[i] = acc;
    }
}

/// A simulated reduced trajectory with its reconstructed outputs
/// `y_r(t_k) = C_r x_r(t_k)` (`p × S`).
#[derive(Debug, Clone)]
pub struct RomSimulation {
    pub snapshots: SnapshotSet,
    pub outputs: Mat<f64>,
}

/// Integrates the reduced model with fixed-step RK4 and attaches outputs.
/// Unstable learned models are caught by the divergence guard rather than
/// poisoning downstream statistics with infinities.
pub fn simulate_rom<G>(
    model: &ReducedQuadraticModel,
    x_r0: &[f64],
    t_span: (f64, f64),
    dt: f64,
    input: G,
) -> Result<RomSimulation>
where
    G: Fn(f64) -> f64,
{
    let r = model.r();
    if x_r0.len() != r {
        return Err(Error::DimensionMismatch {
            context: "simulate_rom initial state",
            expected: r,
            got: x_r0.len(),
        });
    }
    if model.q() != 1 {
        return Err(Error::DimensionMismatch {
            context: "simulate_rom input channels",
            expected: 1,
            got: model.q(),
        });
    }
    let mut kron = vec![0.0; compact_len(r)];
    let snapshots = integrate_guarded(
        |x, u, out| rom_rhs_into(model, x, &[u], &mut kron, out),
        x_r0,
        t_span,
        dt,
        input,
        Some(DIVERGENCE_NORM),
    )?;
    let outputs = model.c() * snapshots.states();
    Ok(RomSimulation { snapshots, outputs })
}

/// Accuracy of a reduced output trajectory relative to a reference signal.
#[derive(Debug, Clone)]
pub struct ErrorReport {
    /// `‖y‖_{L∞(T)}` of the reference signal.
    pub linf_ref: f64,
    /// `e(t_k) = |y(t_k) − y_r(t_k)| / ‖y‖_{L∞(T)}` per sample.
    pub rel_error_series: Vec<f64>,
    /// `‖e‖_{L∞(T)}`, the maximum of the series.
    pub max_rel_error: f64,
    /// Time horizon the comparison covers.
    pub horizon: (f64, f64),
}

/// Relative L∞ output error of `y_rom` against the reference `y_full`.
pub fn evaluate(y_full: &[f64], y_rom: &[f64], times: &[f64]) -> Result<ErrorReport> {
    if y_rom.len() != y_full.len() {
        return Err(Error::DimensionMismatch {
            context: "evaluate reduced output length",
            expected: y_full.len(),
            got: y_rom.len(),
        });
    }
    if times.len() != y_full.len() {
        return Err(Error::DimensionMismatch {
            context: "evaluate time axis length",
            expected: y_full.len(),
            got: times.len(),
        });
    }
    if y_full.is_empty() {
        return Err(Error::DegenerateData("empty output comparison".into()));
    }
    let linf_ref = y_full.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if linf_ref == 0.0 {
        return Err(Error::ZeroReferenceNorm);
    }
    let rel_error_series: Vec<f64> = y_full
        .iter()
        .zip(y_rom)
        .map(|(y, yr)| (y - yr).abs() / linf_ref)
        .collect();
    let max_rel_error = rel_error_series.iter().fold(0.0f64, |m, v| m.max(*v));
    Ok(ErrorReport {
        linf_ref,
        rel_error_series,
        max_rel_error,
        horizon: (times[0], times[times.len() - 1]),
    })
}
