//! Built-in correctness oracles, runnable against any configured network.
//!
//! Each check pits an implementation path against an independent route to
//! the same quantity and reports the measured deviation next to its
//! threshold, machine-readably.

use faer::Mat;
use gridrom_core::error::Error;
use gridrom_core::io::network::read_network;
use gridrom_core::lift::{assemble_lifted_operators, lift_state, lifted_rhs, lifted_rhs_via_chain_rule};
use gridrom_core::opinf::{assemble_problem, compact_kron, compact_len, expand_quadratic, full_kron, infer, solve};
use gridrom_core::pod::compute_pod;
use gridrom_core::rom::{rom_rhs, simulate_rom};
use gridrom_core::simulate::{collect_swing_snapshots, lift_snapshots};
use gridrom_core::swing::SwingState;
use gridrom_core::synthetic;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::ExperimentConfig;
use crate::pipeline::{reduced_initial_state, StageResult, StagedError};

pub struct OracleCheck {
    pub name: &'static str,
    pub measured: f64,
    pub threshold: f64,
    pub passed: bool,
}

impl OracleCheck {
    fn from_deviation(name: &'static str, measured: f64, threshold: f64) -> Self {
        Self {
            name,
            measured,
            threshold,
            passed: measured < threshold,
        }
    }

    pub fn line(&self) -> String {
        format!(
            "check={} status={} measured={:.6e} threshold={:.6e}",
            self.name,
            if self.passed { "pass" } else { "fail" },
            self.measured,
            self.threshold
        )
    }
}

fn stage(error: Error) -> StagedError {
    StagedError {
        stage: "oracle",
        error,
    }
}

/// Runs the oracle suite on the configured network. Returns every check;
/// the caller decides how to surface failures.
pub fn run_oracle_suite(config: &ExperimentConfig) -> StageResult<Vec<OracleCheck>> {
    config.validate().map_err(stage)?;
    let net = read_network(&config.network_path).map_err(stage)?;
    let n = net.n();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut checks = Vec::new();

    // lifting exactness: quadratic evaluation vs chain rule
    let ops = assemble_lifted_operators(&net);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let state = SwingState::new(
            (0..n).map(|_| rng.random_range(-3.0..3.0)).collect(),
            (0..n).map(|_| rng.random_range(-3.0..3.0)).collect(),
        )
        .map_err(stage)?;
        let u = rng.random_range(-2.0..2.0);
        let x = lift_state(&state.angles, &state.velocities).map_err(stage)?;
        let quad = lifted_rhs(&ops, &x, u).map_err(stage)?;
        let reference = lifted_rhs_via_chain_rule(&net, &state, u).map_err(stage)?;
        let scale = reference.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        let dev = quad
            .iter()
            .zip(&reference)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
            / scale;
        worst = worst.max(dev);
    }
    checks.push(OracleCheck::from_deviation("lifting-exactness", worst, 1e-11));

    // compact vs full Kronecker action
    let mut worst: f64 = 0.0;
    for _ in 0..300 {
        for r in 2..=8usize {
            let h = Mat::from_fn(r, compact_len(r), |_, _| rng.random_range(-1.0..1.0));
            let full = expand_quadratic(&h).map_err(stage)?;
            let x: Vec<f64> = (0..r).map(|_| rng.random_range(-2.0..2.0)).collect();
            let compact = compact_kron(&x);
            let kron = full_kron(&x);
            for row in 0..r {
                let lhs: f64 = (0..compact.len()).map(|c| h[(row, c)] * compact[c]).sum();
                let rhs: f64 = (0..kron.len()).map(|c| full[(row, c)] * kron[c]).sum();
                worst = worst.max((lhs - rhs).abs() / rhs.abs().max(1.0));
            }
        }
    }
    checks.push(OracleCheck::from_deviation("kronecker-consistency", worst, 1e-12));

    // learned model vs intrusive projection on exact reduced data
    let initial = synthetic::perturbed_initial_state(n, 0.15, &mut rng);
    let snap = collect_swing_snapshots(&net, &initial, (0.0, 1.5), config.dt, |_| 1.0)
        .map_err(stage)?;
    let lifted = lift_snapshots(&snap).map_err(stage)?;
    let r = 6.min(lifted.dim());
    let basis = compute_pod(lifted.states(), 1e-12, Some(r)).map_err(stage)?;
    let reference = gridrom_core::galerkin_reduce(&ops, &basis).map_err(stage)?;

    let mut ics = vec![reduced_initial_state(&basis, &initial).map_err(stage)?];
    for _ in 0..2 {
        let s = synthetic::perturbed_initial_state(n, 0.2, &mut rng);
        ics.push(reduced_initial_state(&basis, &s).map_err(stage)?);
    }
    let mut states: Vec<Vec<f64>> = Vec::new();
    let mut derivs: Vec<Vec<f64>> = Vec::new();
    let mut inputs: Vec<f64> = Vec::new();
    for (run, x0) in ics.iter().enumerate() {
        let freq = 1.3 + 0.9 * run as f64;
        let sim = simulate_rom(&reference, x0, (0.0, 1.5), config.dt, move |t| {
            1.0 + 0.4 * (freq * t).sin()
        })
        .map_err(stage)?;
        for k in 0..sim.snapshots.len() {
            let x: Vec<f64> = (0..r).map(|i| sim.snapshots.states()[(i, k)]).collect();
            let u = sim.snapshots.inputs()[(0, k)];
            derivs.push(rom_rhs(&reference, &x, &[u]).map_err(stage)?);
            states.push(x);
            inputs.push(u);
        }
    }
    let s = states.len();
    let x_r = Mat::from_fn(r, s, |i, k| states[k][i]);
    let xdot_r = Mat::from_fn(r, s, |i, k| derivs[k][i]);
    let u = Mat::from_fn(1, s, |_, k| inputs[k]);
    let inference = infer(&x_r, &xdot_r, &u, 0.0, reference.c().clone(), basis.id())
        .map_err(stage)?;
    let sim_ref = simulate_rom(&reference, &ics[0], config.t_span, config.dt, |_| 1.0)
        .map_err(stage)?;
    let sim_learned = simulate_rom(&inference.model, &ics[0], config.t_span, config.dt, |_| 1.0)
        .map_err(stage)?;
    let mut worst: f64 = 0.0;
    for k in 0..sim_ref.snapshots.len() {
        worst = worst.max((sim_ref.outputs[(0, k)] - sim_learned.outputs[(0, k)]).abs());
    }
    checks.push(OracleCheck::from_deviation("intrusive-vs-learned", worst, 1e-6));

    // ridge shrinkage: ‖𝒳‖_F must be non-increasing along the μ path
    let x_r = Mat::from_fn(4, 120, |_, _| rng.random_range(-1.0..1.0));
    let xdot_r = Mat::from_fn(4, 120, |_, _| rng.random_range(-1.0..1.0));
    let u = Mat::from_fn(1, 120, |_, _| 1.0);
    let mut previous = f64::INFINITY;
    let mut worst_growth: f64 = 0.0;
    for mu in [0.0, 1e-6, 1e-3, 1.0] {
        let problem = assemble_problem(&x_r, &xdot_r, &u, mu).map_err(stage)?;
        let solution = solve(&problem).map_err(stage)?;
        let mut norm = 0.0;
        for j in 0..solution.coefficients.ncols() {
            for i in 0..solution.coefficients.nrows() {
                norm += solution.coefficients[(i, j)].powi(2);
            }
        }
        let norm = norm.sqrt();
        if previous.is_finite() {
            worst_growth = worst_growth.max(norm - previous);
        }
        previous = norm;
    }
    checks.push(OracleCheck::from_deviation("ridge-monotonicity", worst_growth, 1e-12));

    Ok(checks)
}
