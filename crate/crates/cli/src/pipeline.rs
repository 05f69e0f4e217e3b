//! The experiment pipeline: full-model simulation, lifting, POD, operator
//! inference (or intrusive projection), ROM simulation and evaluation, with
//! every plot-worthy intermediate written to the output directory.

use std::path::Path;

use faer::Mat;
use gridrom_core::error::Error;
use gridrom_core::io::{basis as basis_io, inspect, model as model_io, network, snapshots};
use gridrom_core::lift::{assemble_lifted_operators, lift_state, LiftedOperators};
use gridrom_core::opinf::{infer, ReducedQuadraticModel};
use gridrom_core::pod::{compute_pod, project, PodBasis};
use gridrom_core::rom::{evaluate, simulate_rom, ErrorReport};
use gridrom_core::simulate::{
    attach_exact_derivatives, collect_swing_snapshots, derivative_snapshots, lift_snapshots,
    SnapshotSet,
};
use gridrom_core::swing::{swing_output, SwingNetwork, SwingState};
use gridrom_core::synthetic;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::{DerivativeMode, ExperimentConfig, InitialCondition};

/// An error annotated with the pipeline stage it occurred in.
#[derive(Debug)]
pub struct StagedError {
    pub stage: &'static str,
    pub error: Error,
}

impl std::fmt::Display for StagedError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "stage {}: {}", self.stage, self.error)
    }
}

pub type StageResult<T> = Result<T, StagedError>;

trait Stage<T> {
    fn stage(self, name: &'static str) -> StageResult<T>;
}

impl<T> Stage<T> for gridrom_core::Result<T> {
    fn stage(self, name: &'static str) -> StageResult<T> {
        self.map_err(|error| StagedError { stage: name, error })
    }
}

/// Full-order reference data shared by every pipeline variant.
pub struct FullRun {
    pub net: SwingNetwork,
    pub initial: SwingState,
    pub snapshots: SnapshotSet,
    pub outputs: Vec<f64>,
}

/// Loads the network, realizes the initial condition and simulates the
/// nonlinear model over the configured horizon with `u(t) = 1`.
pub fn run_full_model(config: &ExperimentConfig) -> StageResult<FullRun> {
    config.validate().stage("config")?;
    let net = network::read_network(&config.network_path).stage("load-network")?;
    let n = net.n();

    let initial = match &config.initial_condition {
        InitialCondition::Zero => SwingState::new(vec![0.0; n], vec![0.0; n]),
        InitialCondition::Random { magnitude } => {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            Ok(synthetic::perturbed_initial_state(n, *magnitude, &mut rng))
        }
        InitialCondition::Explicit { angles, velocities } => {
            SwingState::new(angles.clone(), velocities.clone())
        }
    }
    .stage("initial-condition")?;
    if initial.n() != n {
        return Err(StagedError {
            stage: "initial-condition",
            error: Error::DimensionMismatch {
                context: "explicit initial condition length",
                expected: n,
                got: initial.n(),
            },
        });
    }

    let snapshots =
        collect_swing_snapshots(&net, &initial, config.t_span, config.dt, |_| 1.0)
            .stage("simulate")?;
    let outputs = (0..snapshots.len())
        .map(|k| {
            let state = SwingState::new(
                (0..n).map(|i| snapshots.states()[(i, k)]).collect(),
                (0..n).map(|i| snapshots.states()[(n + i, k)]).collect(),
            )?;
            Ok(swing_output(&net, &state)?[0])
        })
        .collect::<gridrom_core::Result<Vec<f64>>>()
        .stage("output")?;

    Ok(FullRun {
        net,
        initial,
        snapshots,
        outputs,
    })
}

/// Lifted snapshots with derivative estimates per the configured mode.
fn lifted_with_derivatives(
    full: &FullRun,
    ops: &LiftedOperators,
    mode: DerivativeMode,
) -> StageResult<SnapshotSet> {
    let lifted = lift_snapshots(&full.snapshots).stage("lift")?;
    match mode.difference_scheme() {
        Some(scheme) => derivative_snapshots(&lifted, scheme).stage("differentiate"),
        None => attach_exact_derivatives(&lifted, |x, u, out| ops.rhs_into(x, u, out))
            .stage("differentiate"),
    }
}

/// Projects the lifted initial state onto the basis.
pub fn reduced_initial_state(basis: &PodBasis, initial: &SwingState) -> gridrom_core::Result<Vec<f64>> {
    let lifted = lift_state(&initial.angles, &initial.velocities)?;
    let phi = basis.basis();
    Ok((0..basis.r())
        .map(|c| {
            (0..basis.dim())
                .map(|row| phi[(row, c)] * lifted.values()[row])
                .sum()
        })
        .collect())
}

/// Everything the driver reports after a pipeline run.
pub struct PipelineOutcome {
    pub n: usize,
    pub samples: usize,
    pub r: usize,
    pub rank: Option<usize>,
    pub columns: Option<usize>,
    pub report: ErrorReport,
}

fn write_summary(
    path: &Path,
    kind: &str,
    config: &ExperimentConfig,
    outcome: &PipelineOutcome,
) -> gridrom_core::Result<()> {
    let mut out = String::from("{\n");
    out.push_str(&format!("  \"kind\": \"{kind}\",\n"));
    out.push_str(&format!("  \"network\": \"{}\",\n", config.network_path.display()));
    out.push_str(&format!("  \"n\": {},\n", outcome.n));
    out.push_str(&format!("  \"samples\": {},\n", outcome.samples));
    out.push_str(&format!("  \"r\": {},\n", outcome.r));
    if let (Some(rank), Some(columns)) = (outcome.rank, outcome.columns) {
        out.push_str(&format!("  \"rank\": {rank},\n"));
        out.push_str(&format!("  \"columns\": {columns},\n"));
    }
    out.push_str(&format!("  \"mu\": {:e},\n", config.mu));
    out.push_str(&format!("  \"tol\": {:e},\n", config.tol));
    out.push_str(&format!("  \"dt\": {:e},\n", config.dt));
    out.push_str(&format!(
        "  \"horizon\": [{}, {}],\n",
        outcome.report.horizon.0, outcome.report.horizon.1
    ));
    out.push_str(&format!("  \"linf_ref\": {:e},\n", outcome.report.linf_ref));
    out.push_str(&format!("  \"max_rel_error\": {:e}\n", outcome.report.max_rel_error));
    out.push_str("}\n");
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

fn ensure_output_dir(config: &ExperimentConfig) -> StageResult<()> {
    std::fs::create_dir_all(&config.output_dir)
        .map_err(|e| Error::io(&config.output_dir, e))
        .stage("write-artifacts")
}

/// `simulate` verb: full-model trajectory and output, written as CSV.
pub fn run_simulate(config: &ExperimentConfig) -> StageResult<(usize, usize)> {
    let full = run_full_model(config)?;
    ensure_output_dir(config)?;
    let dir = &config.output_dir;
    snapshots::write_csv(dir.join("snapshots.csv"), &full.snapshots).stage("write-artifacts")?;
    snapshots::write_binary(dir.join("snapshots.bin"), &full.snapshots).stage("write-artifacts")?;
    let mut out = String::from("t,y\n");
    for (t, y) in full.snapshots.times().iter().zip(&full.outputs) {
        out.push_str(&format!("{t:e},{y:e}\n"));
    }
    std::fs::write(dir.join("output.csv"), out)
        .map_err(|e| Error::io(dir.join("output.csv"), e))
        .stage("write-artifacts")?;
    Ok((full.net.n(), full.snapshots.len()))
}

/// Learning pipeline through inference, with the model artifacts written out
/// before the (possibly diverging) reduced simulation is attempted.
struct LearnedModel {
    full: FullRun,
    basis: PodBasis,
    inference: gridrom_core::opinf::Inference,
}

fn learn_model(config: &ExperimentConfig) -> StageResult<LearnedModel> {
    let full = run_full_model(config)?;
    let ops = assemble_lifted_operators(&full.net);
    let data = lifted_with_derivatives(&full, &ops, config.derivative_mode)?;

    let basis = compute_pod(data.states(), config.tol, config.r_override).stage("pod")?;
    let x_r = project(&basis, data.states()).stage("project")?;
    let xdot_r = project(
        &basis,
        data.derivatives().expect("derivatives attached by construction"),
    )
    .stage("project")?;

    let c_r = ops.c() * basis.basis();
    let inference = infer(&x_r, &xdot_r, data.inputs(), config.mu, c_r, basis.id())
        .stage("infer")?;

    ensure_output_dir(config)?;
    let dir = &config.output_dir;
    inspect::write_spectrum(dir.join("spectrum.csv"), &basis).stage("write-artifacts")?;
    basis_io::write_basis(dir.join("basis.txt"), &basis).stage("write-artifacts")?;
    model_io::write_model(dir.join("model.txt"), &inference.model, config.mu)
        .stage("write-artifacts")?;

    Ok(LearnedModel {
        full,
        basis,
        inference,
    })
}

fn finish_learn(config: &ExperimentConfig, learned: &LearnedModel) -> StageResult<PipelineOutcome> {
    let full = &learned.full;
    let x_r0 = reduced_initial_state(&learned.basis, &full.initial).stage("reduce-initial-state")?;
    let rom = simulate_rom(&learned.inference.model, &x_r0, config.t_span, config.dt, |_| 1.0)
        .stage("simulate-rom")?;
    let y_rom: Vec<f64> = (0..rom.snapshots.len()).map(|k| rom.outputs[(0, k)]).collect();
    let report = evaluate(&full.outputs, &y_rom, full.snapshots.times()).stage("evaluate")?;

    let dir = &config.output_dir;
    inspect::write_error_report(
        dir.join("error_report.csv"),
        full.snapshots.times(),
        &full.outputs,
        &y_rom,
        &report,
    )
    .stage("write-artifacts")?;

    let outcome = PipelineOutcome {
        n: full.net.n(),
        samples: full.snapshots.len(),
        r: learned.basis.r(),
        rank: Some(learned.inference.rank),
        columns: Some(learned.inference.columns),
        report,
    };
    write_summary(&dir.join("summary.txt"), "learned", config, &outcome)
        .stage("write-artifacts")?;
    Ok(outcome)
}

/// `learn` verb: the full data-driven pipeline.
pub fn run_learn(config: &ExperimentConfig) -> StageResult<PipelineOutcome> {
    let learned = learn_model(config)?;
    finish_learn(config, &learned)
}

/// `reduce-intrusive` verb: Galerkin projection of the exact lifted
/// operators onto the data basis, evaluated like a learned model.
pub fn run_reduce_intrusive(config: &ExperimentConfig) -> StageResult<PipelineOutcome> {
    let full = run_full_model(config)?;
    let lifted = lift_snapshots(&full.snapshots).stage("lift")?;
    let basis = compute_pod(lifted.states(), config.tol, config.r_override).stage("pod")?;

    let ops = assemble_lifted_operators(&full.net);
    let model = gridrom_core::galerkin_reduce(&ops, &basis).stage("reduce")?;

    let x_r0 = reduced_initial_state(&basis, &full.initial).stage("reduce-initial-state")?;
    let rom = simulate_rom(&model, &x_r0, config.t_span, config.dt, |_| 1.0)
        .stage("simulate-rom")?;
    let y_rom: Vec<f64> = (0..rom.snapshots.len()).map(|k| rom.outputs[(0, k)]).collect();
    let report = evaluate(&full.outputs, &y_rom, full.snapshots.times()).stage("evaluate")?;

    ensure_output_dir(config)?;
    let dir = &config.output_dir;
    inspect::write_spectrum(dir.join("spectrum.csv"), &basis).stage("write-artifacts")?;
    basis_io::write_basis(dir.join("basis.txt"), &basis).stage("write-artifacts")?;
    model_io::write_model(dir.join("model.txt"), &model, 0.0).stage("write-artifacts")?;
    inspect::write_lifted_operators(dir.join("lifted_operators.txt"), &ops)
        .stage("write-artifacts")?;
    inspect::write_error_report(
        dir.join("error_report.csv"),
        full.snapshots.times(),
        &full.outputs,
        &y_rom,
        &report,
    )
    .stage("write-artifacts")?;

    let outcome = PipelineOutcome {
        n: full.net.n(),
        samples: full.snapshots.len(),
        r: basis.r(),
        rank: None,
        columns: None,
        report,
    };
    write_summary(&dir.join("summary.txt"), "intrusive", config, &outcome)
        .stage("write-artifacts")?;
    Ok(outcome)
}

/// `evaluate` verb: re-simulate a stored model against the configured
/// full-model run (possibly from an alternate initial condition).
pub fn run_evaluate(
    config: &ExperimentConfig,
    model_path: &Path,
    basis_path: &Path,
) -> StageResult<PipelineOutcome> {
    let full = run_full_model(config)?;
    let stored = model_io::read_model(model_path).stage("load-model")?;
    let basis = basis_io::read_basis(basis_path).stage("load-basis")?;
    check_model_dimensions(&stored.model, &basis, full.net.n()).stage("load-model")?;
    if stored.model.basis_ref() != basis.id() {
        eprintln!(
            "warning: model was built with basis {:?}, loaded basis is {:?}",
            stored.model.basis_ref(),
            basis.id()
        );
    }

    let x_r0 = reduced_initial_state(&basis, &full.initial).stage("reduce-initial-state")?;
    let rom = simulate_rom(&stored.model, &x_r0, config.t_span, config.dt, |_| 1.0)
        .stage("simulate-rom")?;
    let y_rom: Vec<f64> = (0..rom.snapshots.len()).map(|k| rom.outputs[(0, k)]).collect();
    let report = evaluate(&full.outputs, &y_rom, full.snapshots.times()).stage("evaluate")?;

    ensure_output_dir(config)?;
    let dir = &config.output_dir;
    inspect::write_error_report(
        dir.join("error_report.csv"),
        full.snapshots.times(),
        &full.outputs,
        &y_rom,
        &report,
    )
    .stage("write-artifacts")?;

    let outcome = PipelineOutcome {
        n: full.net.n(),
        samples: full.snapshots.len(),
        r: stored.model.r(),
        rank: None,
        columns: None,
        report,
    };
    write_summary(
        &dir.join("summary.txt"),
        stored.model.source().as_str(),
        config,
        &outcome,
    )
    .stage("write-artifacts")?;
    Ok(outcome)
}

fn check_model_dimensions(
    model: &ReducedQuadraticModel,
    basis: &PodBasis,
    n: usize,
) -> gridrom_core::Result<()> {
    if basis.dim() != 4 * n {
        return Err(Error::DimensionMismatch {
            context: "stored basis rows vs lifted network dimension",
            expected: 4 * n,
            got: basis.dim(),
        });
    }
    if model.r() != basis.r() {
        return Err(Error::DimensionMismatch {
            context: "stored model order vs basis order",
            expected: basis.r(),
            got: model.r(),
        });
    }
    Ok(())
}

/// One row of a `sweep-mu` run. `max_rel_error` is `NaN` when the learned
/// model diverged before the horizon (typical for μ = 0 on deficient data).
pub struct SweepRow {
    pub mu: f64,
    pub r: usize,
    pub rank: usize,
    pub columns: usize,
    pub max_rel_error: f64,
    pub coefficient_norm: f64,
}

/// `sweep-mu` verb: re-runs the learning pipeline for each regularization
/// value with isolated output directories and a combined report. A run whose
/// reduced model diverges still contributes its rank and operator norm.
pub fn run_mu_sweep(config: &ExperimentConfig, mus: &[f64]) -> StageResult<Vec<SweepRow>> {
    let mut rows = Vec::with_capacity(mus.len());
    for (idx, &mu) in mus.iter().enumerate() {
        let mut run_config = config.clone();
        run_config.mu = mu;
        run_config.output_dir = config.output_dir.join(format!("mu-{idx}"));
        let learned = learn_model(&run_config)?;
        let norm = operator_norm(&learned.inference.model);
        let max_rel_error = match finish_learn(&run_config, &learned) {
            Ok(outcome) => outcome.report.max_rel_error,
            Err(StagedError {
                error: Error::IntegrationDiverged { .. },
                ..
            }) => f64::NAN,
            Err(other) => return Err(other),
        };
        rows.push(SweepRow {
            mu,
            r: learned.basis.r(),
            rank: learned.inference.rank,
            columns: learned.inference.columns,
            max_rel_error,
            coefficient_norm: norm,
        });
    }

    ensure_output_dir(config)?;
    let mut out = String::from("mu,r,rank,columns,max_rel_error,coefficient_norm\n");
    for row in &rows {
        out.push_str(&format!(
            "{:e},{},{},{},{:e},{:e}\n",
            row.mu, row.r, row.rank, row.columns, row.max_rel_error, row.coefficient_norm
        ));
    }
    let path = config.output_dir.join("mu_sweep.csv");
    std::fs::write(&path, out)
        .map_err(|e| Error::io(&path, e))
        .stage("write-artifacts")?;
    Ok(rows)
}

/// Frobenius norm of the stacked learned operators `[A_r | H̃_r | B_r]`,
/// i.e. of the regression unknowns.
pub fn operator_norm(model: &ReducedQuadraticModel) -> f64 {
    let mut acc = 0.0;
    let mut add = |m: &Mat<f64>| {
        for j in 0..m.ncols() {
            for i in 0..m.nrows() {
                acc += m[(i, j)] * m[(i, j)];
            }
        }
    };
    add(model.a());
    add(model.h_compact());
    add(model.b());
    acc.sqrt()
}
