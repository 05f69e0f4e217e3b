//! Fixed-step time integration and snapshot collection.
//!
//! Trajectories are produced by the classical 4th-order Runge–Kutta scheme
//! with a fixed step, so the integration error stays far below the
//! forward-difference error of the derivative snapshots and the sampled data
//! is bit-reproducible.

use faer::Mat;

use crate::error::{Error, Result};
use crate::lift::lift_state;
use crate::swing::{swing_rhs_into, SwingNetwork, SwingState};

/// Time-stamped trajectory data: states, optional derivative estimates and
/// the input trajectory, one column per sample.
#[derive(Debug, Clone)]
pub struct SnapshotSet {
    times: Vec<f64>,
    states: Mat<f64>,
    derivatives: Option<Mat<f64>>,
    inputs: Mat<f64>,
}

impl SnapshotSet {
    pub fn new(
        times: Vec<f64>,
        states: Mat<f64>,
        derivatives: Option<Mat<f64>>,
        inputs: Mat<f64>,
    ) -> Result<Self> {
        let samples = times.len();
        if samples == 0 {
            return Err(Error::DegenerateData("snapshot set has no samples".into()));
        }
        if states.ncols() != samples {
            return Err(Error::DimensionMismatch {
                context: "SnapshotSet states columns",
                expected: samples,
                got: states.ncols(),
            });
        }
        if inputs.ncols() != samples {
            return Err(Error::DimensionMismatch {
                context: "SnapshotSet inputs columns",
                expected: samples,
                got: inputs.ncols(),
            });
        }
        if let Some(d) = &derivatives {
            if d.nrows() != states.nrows() || d.ncols() != samples {
                return Err(Error::DimensionMismatch {
                    context: "SnapshotSet derivatives shape",
                    expected: states.nrows() * samples,
                    got: d.nrows() * d.ncols(),
                });
            }
        }
        if samples >= 2 {
            let dt = (times[samples - 1] - times[0]) / (samples - 1) as f64;
            if dt <= 0.0 {
                return Err(Error::InvalidArgument("times must be strictly increasing".into()));
            }
            // 1e-12 relative to the span magnitude: representing t = k·dt in
            // f64 already jitters the steps by a few ulps of t, not of dt
            let tol = 1e-12 * times[0].abs().max(times[samples - 1].abs()).max(dt);
            for k in 0..samples - 1 {
                let step = times[k + 1] - times[k];
                if step <= 0.0 || (step - dt).abs() > tol {
                    return Err(Error::InvalidArgument(format!(
                        "non-uniform time grid at sample {k}: step {step}, expected {dt}"
                    )));
                }
            }
        }
        Ok(Self {
            times,
            states,
            derivatives,
            inputs,
        })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &Mat<f64> {
        &self.states
    }

    pub fn derivatives(&self) -> Option<&Mat<f64>> {
        self.derivatives.as_ref()
    }

    pub fn inputs(&self) -> &Mat<f64> {
        &self.inputs
    }

    /// Number of samples `S`.
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// State dimension `d`.
    pub fn dim(&self) -> usize {
        self.states.nrows()
    }

    /// Input dimension `q`.
    pub fn input_dim(&self) -> usize {
        self.inputs.nrows()
    }

    /// Uniform step size; zero for single-sample sets.
    pub fn dt(&self) -> f64 {
        if self.times.len() < 2 {
            0.0
        } else {
            (self.times[self.times.len() - 1] - self.times[0]) / (self.times.len() - 1) as f64
        }
    }
}

/// Finite-difference scheme for [`derivative_snapshots`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DifferenceScheme {
    /// Forward differences, with a backward difference on the final column.
    #[default]
    Forward,
    /// Central differences in the interior, one-sided at both ends.
    Central,
}

pub(crate) fn integrate_guarded<F, G>(
    mut rhs: F,
    x0: &[f64],
    t_span: (f64, f64),
    dt: f64,
    input: G,
    max_norm: Option<f64>,
) -> Result<SnapshotSet>
where
    F: FnMut(&[f64], f64, &mut [f64]),
    G: Fn(f64) -> f64,
{
    let (t0, t1) = t_span;
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidArgument(format!("step size must be positive, got {dt}")));
    }
    if !(t0.is_finite() && t1.is_finite() && t1 >= t0) {
        return Err(Error::InvalidArgument(format!("bad time span [{t0}, {t1}]")));
    }
    let d = x0.len();
    if d == 0 {
        return Err(Error::InvalidArgument("empty initial state".into()));
    }
    let steps = ((t1 - t0) / dt).round() as usize;
    let samples = steps + 1;

    let mut times = Vec::with_capacity(samples);
    let mut states = Mat::zeros(d, samples);
    let mut inputs = Mat::zeros(1, samples);

    let mut x = x0.to_vec();
    let mut k1 = vec![0.0; d];
    let mut k2 = vec![0.0; d];
    let mut k3 = vec![0.0; d];
    let mut k4 = vec![0.0; d];
    let mut stage = vec![0.0; d];

    let check = |x: &[f64], t: f64| -> Result<()> {
        let mut ok = true;
        let mut norm: f64 = 0.0;
        for &v in x {
            if !v.is_finite() {
                ok = false;
                break;
            }
            norm = norm.max(v.abs());
        }
        if let Some(bound) = max_norm {
            ok = ok && norm <= bound;
        }
        if ok {
            Ok(())
        } else {
            Err(Error::IntegrationDiverged { time: t })
        }
    };

    check(&x, t0)?;
    for step in 0..samples {
        let t = t0 + step as f64 * dt;
        times.push(t);
        inputs[(0, step)] = input(t);
        for (row, &v) in x.iter().enumerate() {
            states[(row, step)] = v;
        }
        if step == steps {
            break;
        }

        rhs(&x, input(t), &mut k1);
        for i in 0..d {
            stage[i] = x[i] + 0.5 * dt * k1[i];
        }
        rhs(&stage, input(t + 0.5 * dt), &mut k2);
        for i in 0..d {
            stage[i] = x[i] + 0.5 * dt * k2[i];
        }
        rhs(&stage, input(t + 0.5 * dt), &mut k3);
        for i in 0..d {
            stage[i] = x[i] + dt * k3[i];
        }
        rhs(&stage, input(t + dt), &mut k4);
        for i in 0..d {
            x[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        check(&x, t + dt)?;
    }

    SnapshotSet::new(times, states, None, inputs)
}

/// Classical fixed-step RK4 trajectory sampled at every step, endpoints
/// included; `rhs(x, u, out)` writes the state derivative into `out`.
pub fn integrate<F, G>(rhs: F, x0: &[f64], t_span: (f64, f64), dt: f64, input: G) -> Result<SnapshotSet>
where
    F: FnMut(&[f64], f64, &mut [f64]),
    G: Fn(f64) -> f64,
{
    integrate_guarded(rhs, x0, t_span, dt, input, None)
}

/// Simulates the nonlinear swing network and collects stacked `(δ; δ̇)`
/// snapshots together with the input trajectory.
pub fn collect_swing_snapshots<G>(
    net: &SwingNetwork,
    x0: &SwingState,
    t_span: (f64, f64),
    dt: f64,
    input: G,
) -> Result<SnapshotSet>
where
    G: Fn(f64) -> f64,
{
    if x0.n() != net.n() {
        return Err(Error::DimensionMismatch {
            context: "collect_swing_snapshots initial state",
            expected: net.n(),
            got: x0.n(),
        });
    }
    let stacked = x0.to_stacked();
    integrate(
        |z, u, out| swing_rhs_into(net, z, u, out),
        &stacked,
        t_span,
        dt,
        input,
    )
}

/// Applies the lifting map to every column of a `(δ; δ̇)` snapshot set,
/// producing `4n`-row lifted snapshots. Times and inputs carry through;
/// derivative estimates of the unlifted state are dropped.
pub fn lift_snapshots(snap: &SnapshotSet) -> Result<SnapshotSet> {
    let rows = snap.dim();
    if !rows.is_multiple_of(2) {
        return Err(Error::DimensionMismatch {
            context: "lift_snapshots state rows",
            expected: rows + 1,
            got: rows,
        });
    }
    let n = rows / 2;
    let samples = snap.len();
    let mut lifted = Mat::zeros(4 * n, samples);
    let mut angles = vec![0.0; n];
    let mut velocities = vec![0.0; n];
    for k in 0..samples {
        for i in 0..n {
            angles[i] = snap.states()[(i, k)];
            velocities[i] = snap.states()[(n + i, k)];
        }
        let x = lift_state(&angles, &velocities)?;
        for (row, &v) in x.values().iter().enumerate() {
            lifted[(row, k)] = v;
        }
    }
    SnapshotSet::new(snap.times().to_vec(), lifted, None, snap.inputs().clone())
}

/// Attaches finite-difference derivative estimates to a snapshot set.
pub fn derivative_snapshots(snap: &SnapshotSet, scheme: DifferenceScheme) -> Result<SnapshotSet> {
    let samples = snap.len();
    if samples < 2 {
        return Err(Error::DegenerateData(
            "derivative snapshots need at least two samples".into(),
        ));
    }
    let d = snap.dim();
    let dt = snap.dt();
    let states = snap.states();
    let mut deriv = Mat::zeros(d, samples);
    match scheme {
        DifferenceScheme::Forward => {
            for k in 0..samples - 1 {
                for row in 0..d {
                    deriv[(row, k)] = (states[(row, k + 1)] - states[(row, k)]) / dt;
                }
            }
            for row in 0..d {
                deriv[(row, samples - 1)] =
                    (states[(row, samples - 1)] - states[(row, samples - 2)]) / dt;
            }
        }
        DifferenceScheme::Central => {
            for row in 0..d {
                deriv[(row, 0)] = (states[(row, 1)] - states[(row, 0)]) / dt;
                deriv[(row, samples - 1)] =
                    (states[(row, samples - 1)] - states[(row, samples - 2)]) / dt;
            }
            for k in 1..samples - 1 {
                for row in 0..d {
                    deriv[(row, k)] = (states[(row, k + 1)] - states[(row, k - 1)]) / (2.0 * dt);
                }
            }
        }
    }
    SnapshotSet::new(
        snap.times().to_vec(),
        states.clone(),
        Some(deriv),
        snap.inputs().clone(),
    )
}

/// Attaches exact derivatives by evaluating a known right-hand side at every
/// sample; used by operator-recovery oracles, never by the default pipeline.
/// Assumes a single input channel (`q = 1`).
pub fn attach_exact_derivatives<F>(snap: &SnapshotSet, mut rhs: F) -> Result<SnapshotSet>
where
    F: FnMut(&[f64], f64, &mut [f64]),
{
    if snap.input_dim() != 1 {
        return Err(Error::DimensionMismatch {
            context: "attach_exact_derivatives input rows",
            expected: 1,
            got: snap.input_dim(),
        });
    }
    let d = snap.dim();
    let samples = snap.len();
    let mut deriv = Mat::zeros(d, samples);
    let mut x = vec![0.0; d];
    let mut dx = vec![0.0; d];
    for k in 0..samples {
        for (row, slot) in x.iter_mut().enumerate() {
            *slot = snap.states()[(row, k)];
        }
        rhs(&x, snap.inputs()[(0, k)], &mut dx);
        for (row, &v) in dx.iter().enumerate() {
            deriv[(row, k)] = v;
        }
    }
    SnapshotSet::new(
        snap.times().to_vec(),
        snap.states().clone(),
        Some(deriv),
        snap.inputs().clone(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthetic;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    #[test]
    fn exponential_decay_matches_closed_form() {
        let snap = integrate(
            |x, _, out| out[0] = -x[0],
            &[1.0],
            (0.0, 1.0),
            1e-3,
            |_| 0.0,
        )
        .unwrap();
        assert_eq!(snap.len(), 1001);
        let end = snap.states()[(0, 1000)];
        assert!((end - (-1.0f64).exp()).abs() < 1e-10);
    }

    #[test]
    fn zero_field_keeps_the_state_constant() {
        let snap = integrate(
            |_, _, out| out.fill(0.0),
            &[2.5, -1.0],
            (0.0, 0.5),
            1e-2,
            |_| 0.0,
        )
        .unwrap();
        for k in 0..snap.len() {
            assert_eq!(snap.states()[(0, k)], 2.5);
            assert_eq!(snap.states()[(1, k)], -1.0);
        }
    }

    #[test]
    fn harmonic_oscillator_energy_drift_is_tiny() {
        let snap = integrate(
            |x, _, out| {
                out[0] = x[1];
                out[1] = -x[0];
            },
            &[1.0, 0.0],
            (0.0, 10.0),
            1e-2,
            |_| 0.0,
        )
        .unwrap();
        assert_eq!(snap.len(), 1001);
        let last = snap.len() - 1;
        let energy0 = 1.0;
        let energy = snap.states()[(0, last)].powi(2) + snap.states()[(1, last)].powi(2);
        assert!((energy - energy0).abs() < 1e-9, "drift {:e}", energy - energy0);
    }

    #[test]
    fn sample_counts_match_span_over_step() {
        let count = |t1: f64| {
            integrate(|_, _, out| out.fill(0.0), &[0.0], (0.0, t1), 1e-3, |_| 0.0)
                .unwrap()
                .len()
        };
        assert_eq!(count(3.0), 3001);
        assert_eq!(count(10.0), 10001);
    }

    #[test]
    fn divergence_is_reported_with_its_time() {
        let res = integrate(
            |x, _, out| out[0] = x[0] * x[0],
            &[1.0],
            (0.0, 5.0),
            1e-2,
            |_| 0.0,
        );
        match res {
            Err(Error::IntegrationDiverged { time }) => assert!(time > 0.0 && time < 5.0),
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn equilibrium_produces_identical_columns() {
        let mut rng = StdRng::seed_from_u64(3);
        let base = synthetic::random_network(3, &mut rng).unwrap();
        let angles: Vec<f64> = (0..3).map(|_| rng.random_range(-0.3..0.3)).collect();
        let power = crate::swing::coupling_force(&base, &angles).unwrap();
        let net = SwingNetwork::new(
            base.omega_r(),
            base.inertia().to_vec(),
            base.damping().to_vec(),
            base.coupling().clone(),
            base.phase_shift().clone(),
            power,
            base.output_weights().clone(),
        )
        .unwrap();
        let state = SwingState::new(angles, vec![0.0; 3]).unwrap();
        let snap = collect_swing_snapshots(&net, &state, (0.0, 0.1), 1e-3, |_| 1.0).unwrap();
        for k in 1..snap.len() {
            for row in 0..6 {
                assert_eq!(snap.states()[(row, k)], snap.states()[(row, 0)]);
            }
        }
    }

    #[test]
    fn swap_symmetry_of_a_two_oscillator_ring() {
        let coupling = Mat::from_fn(2, 2, |i, j| if i == j { 0.0 } else { 1.0 });
        let net = SwingNetwork::new(
            100.0,
            vec![5.0, 5.0],
            vec![2.0, 2.0],
            coupling,
            Mat::zeros(2, 2),
            vec![0.0, 0.0],
            SwingNetwork::mean_output_row(2),
        )
        .unwrap();
        let state = SwingState::new(vec![0.4, -0.4], vec![0.0, 0.0]).unwrap();
        let snap = collect_swing_snapshots(&net, &state, (0.0, 2.0), 1e-3, |_| 0.0).unwrap();
        for k in 0..snap.len() {
            assert!(
                (snap.states()[(0, k)] + snap.states()[(1, k)]).abs() < 1e-13,
                "antisymmetry broken at sample {k}"
            );
        }
    }

    #[test]
    fn constant_input_row_is_all_ones() {
        let net = synthetic::ring_network(4).unwrap();
        let state = SwingState::new(vec![0.1, 0.0, -0.1, 0.0], vec![0.0; 4]).unwrap();
        let snap = collect_swing_snapshots(&net, &state, (0.0, 0.05), 1e-3, |_| 1.0).unwrap();
        assert_eq!(snap.input_dim(), 1);
        for k in 0..snap.len() {
            assert_eq!(snap.inputs()[(0, k)], 1.0);
        }
    }

    #[test]
    fn integration_is_bit_deterministic() {
        let net = synthetic::ring_network(6).unwrap();
        let mut rng = StdRng::seed_from_u64(8);
        let state = synthetic::perturbed_initial_state(6, 0.2, &mut rng);
        let a = collect_swing_snapshots(&net, &state, (0.0, 1.0), 1e-3, |_| 1.0).unwrap();
        let b = collect_swing_snapshots(&net, &state, (0.0, 1.0), 1e-3, |_| 1.0).unwrap();
        for k in 0..a.len() {
            for row in 0..a.dim() {
                assert_eq!(
                    a.states()[(row, k)].to_bits(),
                    b.states()[(row, k)].to_bits()
                );
            }
        }
    }

    #[test]
    fn lifting_snapshots_matches_columnwise_lift() {
        let net = synthetic::ring_network(5).unwrap();
        let mut rng = StdRng::seed_from_u64(21);
        let state = synthetic::perturbed_initial_state(5, 0.3, &mut rng);
        let snap = collect_swing_snapshots(&net, &state, (0.0, 0.2), 1e-3, |_| 1.0).unwrap();
        let lifted = lift_snapshots(&snap).unwrap();
        assert_eq!(lifted.dim(), 20);
        for k in (0..snap.len()).step_by(37) {
            let angles: Vec<f64> = (0..5).map(|i| snap.states()[(i, k)]).collect();
            let velocities: Vec<f64> = (0..5).map(|i| snap.states()[(5 + i, k)]).collect();
            let x = lift_state(&angles, &velocities).unwrap();
            for row in 0..20 {
                assert_eq!(lifted.states()[(row, k)], x.values()[row]);
            }
        }
    }

    #[test]
    fn lifting_a_zero_trajectory_sets_cosine_rows_to_one() {
        let states = Mat::zeros(4, 7);
        let snap = SnapshotSet::new(
            (0..7).map(|k| k as f64 * 0.1).collect(),
            states,
            None,
            Mat::from_fn(1, 7, |_, _| 1.0),
        )
        .unwrap();
        let lifted = lift_snapshots(&snap).unwrap();
        for k in 0..7 {
            for i in 0..2 {
                assert_eq!(lifted.states()[(4 + i, k)], 0.0);
                assert_eq!(lifted.states()[(6 + i, k)], 1.0);
            }
        }
    }

    #[test]
    fn odd_row_count_is_rejected_by_lift() {
        let snap = SnapshotSet::new(
            vec![0.0, 0.1],
            Mat::zeros(3, 2),
            None,
            Mat::zeros(1, 2),
        )
        .unwrap();
        assert!(matches!(
            lift_snapshots(&snap),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn forward_differences_are_exact_on_affine_trajectories() {
        let dt = 1e-3;
        let states = Mat::from_fn(2, 11, |row, k| {
            let t = k as f64 * dt;
            if row == 0 {
                2.0 * t + 1.0
            } else {
                -0.5 * t
            }
        });
        let snap = SnapshotSet::new(
            (0..11).map(|k| k as f64 * dt).collect(),
            states,
            None,
            Mat::zeros(1, 11),
        )
        .unwrap();
        let with_deriv = derivative_snapshots(&snap, DifferenceScheme::Forward).unwrap();
        let d = with_deriv.derivatives().unwrap();
        for k in 0..11 {
            assert!((d[(0, k)] - 2.0).abs() < 1e-10);
            assert!((d[(1, k)] + 0.5).abs() < 1e-10);
        }
    }

    #[test]
    fn forward_difference_error_on_quadratic_is_bounded_by_dt() {
        let dt = 1e-3;
        let samples = 101;
        let states = Mat::from_fn(1, samples, |_, k| (k as f64 * dt).powi(2));
        let snap = SnapshotSet::new(
            (0..samples).map(|k| k as f64 * dt).collect(),
            states,
            None,
            Mat::zeros(1, samples),
        )
        .unwrap();
        let with_deriv = derivative_snapshots(&snap, DifferenceScheme::Forward).unwrap();
        let d = with_deriv.derivatives().unwrap();
        for k in 0..samples {
            let t = k as f64 * dt;
            let err = (d[(0, k)] - 2.0 * t).abs();
            assert!(err <= dt * (1.0 + 1e-9), "error {err} at column {k}");
        }
    }

    #[test]
    fn constant_states_have_zero_derivatives() {
        let snap = SnapshotSet::new(
            vec![0.0, 0.1, 0.2],
            Mat::from_fn(2, 3, |_, _| 4.2),
            None,
            Mat::zeros(1, 3),
        )
        .unwrap();
        let with_deriv = derivative_snapshots(&snap, DifferenceScheme::Forward).unwrap();
        let d = with_deriv.derivatives().unwrap();
        for k in 0..3 {
            assert_eq!(d[(0, k)], 0.0);
            assert_eq!(d[(1, k)], 0.0);
        }
    }

    #[test]
    fn forward_differences_converge_at_first_order() {
        let run = |dt: f64| {
            let snap = integrate(
                |x, _, out| {
                    out[0] = x[1];
                    out[1] = -x[0];
                },
                &[1.0, 0.0],
                (0.0, 1.0),
                dt,
                |_| 0.0,
            )
            .unwrap();
            let with_deriv = derivative_snapshots(&snap, DifferenceScheme::Forward).unwrap();
            let d = with_deriv.derivatives().unwrap();
            // exact derivative of the trajectory columns
            let mut max_err: f64 = 0.0;
            for k in 0..snap.len() - 1 {
                let x0 = snap.states()[(0, k)];
                let x1 = snap.states()[(1, k)];
                max_err = max_err.max((d[(0, k)] - x1).abs()).max((d[(1, k)] + x0).abs());
            }
            max_err
        };
        let coarse = run(1e-2);
        let fine = run(5e-3);
        let ratio = coarse / fine;
        assert!((1.7..2.3).contains(&ratio), "convergence ratio {ratio}");
    }

    #[test]
    fn central_differences_are_second_order_accurate() {
        let dt = 1e-2;
        let samples = 101;
        let states = Mat::from_fn(1, samples, |_, k| (k as f64 * dt).powi(2));
        let snap = SnapshotSet::new(
            (0..samples).map(|k| k as f64 * dt).collect(),
            states,
            None,
            Mat::zeros(1, samples),
        )
        .unwrap();
        let with_deriv = derivative_snapshots(&snap, DifferenceScheme::Central).unwrap();
        let d = with_deriv.derivatives().unwrap();
        // central difference of t² is exact in the interior
        for k in 1..samples - 1 {
            let t = k as f64 * dt;
            assert!((d[(0, k)] - 2.0 * t).abs() < 1e-12);
        }
    }

    #[test]
    fn exact_derivatives_evaluate_the_given_rhs() {
        let snap = integrate(
            |x, u, out| out[0] = -2.0 * x[0] + u,
            &[1.0],
            (0.0, 0.5),
            1e-2,
            |t| (3.0 * t).cos(),
        )
        .unwrap();
        let exact = attach_exact_derivatives(&snap, |x, u, out| out[0] = -2.0 * x[0] + u).unwrap();
        let d = exact.derivatives().unwrap();
        for k in 0..snap.len() {
            let expected = -2.0 * snap.states()[(0, k)] + snap.inputs()[(0, k)];
            assert_eq!(d[(0, k)], expected);
        }
    }

    #[test]
    fn too_few_samples_for_differencing() {
        let snap = SnapshotSet::new(vec![0.0], Mat::zeros(1, 1), None, Mat::zeros(1, 1)).unwrap();
        assert!(matches!(
            derivative_snapshots(&snap, DifferenceScheme::Forward),
            Err(Error::DegenerateData(_))
        ));
    }

    #[test]
    fn non_uniform_grids_are_rejected() {
        let res = SnapshotSet::new(
            vec![0.0, 0.1, 0.35],
            Mat::zeros(1, 3),
            None,
            Mat::zeros(1, 3),
        );
        assert!(matches!(res, Err(Error::InvalidArgument(_))));
    }
}
