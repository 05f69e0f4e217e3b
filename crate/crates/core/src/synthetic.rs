//! Synthetic benchmark networks with documented parameters.
//!
//! These stand in for reduced power-network parameter sets when no
//! externally supplied file is available. All of them keep the
//! electromechanical frequencies `√(K/M)` at a few rad/s so fixed-step
//! integration at Δt = 10⁻³ s resolves the dynamics comfortably.

use faer::Mat;
use rand::Rng;

use crate::error::Result;
use crate::swing::SwingNetwork;

/// Reference angular frequency for a 60 Hz system, `2π·60` rad/s.
pub const OMEGA_60HZ: f64 = 120.0 * std::f64::consts::PI;

/// Inertia constant giving the effective mass `m = 2J/ω_R`.
fn inertia_for_mass(mass: f64) -> f64 {
    mass * OMEGA_60HZ / 2.0
}

/// Ring of `n` oscillators with nearest-neighbour coupling, light chordal
/// links every fifth node, mildly heterogeneous inertia and damping, small
/// phase shifts and a zero-mean power pattern. Output is the arithmetic
/// mean of all angles.
pub fn ring_network(n: usize) -> Result<SwingNetwork> {
    assert!(n >= 2, "a ring needs at least two oscillators");
    let mass: Vec<f64> = (0..n)
        .map(|i| 0.10 + 0.04 * ((i % 4) as f64) / 3.0)
        .collect();
    let damping: Vec<f64> = (0..n)
        .map(|i| (0.055 + 0.015 * ((i % 3) as f64) / 2.0) * OMEGA_60HZ)
        .collect();

    let mut coupling = Mat::zeros(n, n);
    let mut phase = Mat::zeros(n, n);
    for i in 0..n {
        let j = (i + 1) % n;
        let k = 0.85 + 0.10 * ((i % 5) as f64) / 4.0;
        coupling[(i, j)] = k;
        coupling[(j, i)] = k;
        let g = 0.04 + 0.01 * ((i % 3) as f64);
        phase[(i, j)] = g;
        phase[(j, i)] = g;
    }
    if n >= 8 {
        for i in (0..n).step_by(5) {
            let j = (i + n / 2) % n;
            if i != j && coupling[(i, j)] == 0.0 {
                coupling[(i, j)] = 0.25;
                coupling[(j, i)] = 0.25;
                phase[(i, j)] = 0.02;
                phase[(j, i)] = 0.02;
            }
        }
    }

    let power: Vec<f64> = (0..n)
        .map(|i| 0.06 * (2.0 * std::f64::consts::PI * i as f64 / n as f64).sin())
        .collect();

    SwingNetwork::new(
        OMEGA_60HZ,
        mass.into_iter().map(inertia_for_mass).collect(),
        damping,
        coupling,
        phase,
        power,
        SwingNetwork::mean_output_row(n),
    )
}

/// Complete graph on `n` oscillators with uniform coupling `k₀/n`,
/// zero phase shifts and alternating power injections.
pub fn complete_network(n: usize) -> Result<SwingNetwork> {
    assert!(n >= 2);
    let k0 = 1.2;
    let coupling = Mat::from_fn(n, n, |i, j| if i == j { 0.0 } else { k0 / n as f64 });
    let power: Vec<f64> = (0..n)
        .map(|i| if i % 2 == 0 { 0.05 } else { -0.05 })
        .collect();
    SwingNetwork::new(
        OMEGA_60HZ,
        (0..n).map(|_| inertia_for_mass(0.12)).collect(),
        vec![0.06 * OMEGA_60HZ; n],
        coupling,
        Mat::zeros(n, n),
        power,
        SwingNetwork::mean_output_row(n),
    )
}

/// Randomly parameterised connected network for property tests: a ring
/// backbone plus random chords, asymmetric phase shifts and random power.
pub fn random_network<R: Rng>(n: usize, rng: &mut R) -> Result<SwingNetwork> {
    let mass: Vec<f64> = (0..n).map(|_| rng.random_range(0.06..0.20)).collect();
    let damping: Vec<f64> = (0..n)
        .map(|_| rng.random_range(0.03..0.12) * OMEGA_60HZ)
        .collect();

    let mut coupling = Mat::zeros(n, n);
    let mut phase = Mat::zeros(n, n);
    if n > 1 {
        for i in 0..n {
            let j = (i + 1) % n;
            if i == j {
                continue;
            }
            let k = rng.random_range(0.4..1.2);
            coupling[(i, j)] = k;
            coupling[(j, i)] = k;
        }
        for i in 0..n {
            for j in (i + 2)..n {
                if (i, j) != (0, n - 1) && rng.random_bool(0.15) {
                    let k = rng.random_range(0.1..0.5);
                    coupling[(i, j)] = k;
                    coupling[(j, i)] = k;
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                if i != j && coupling[(i, j)] != 0.0 {
                    phase[(i, j)] = rng.random_range(-0.10..0.10);
                }
            }
        }
    }

    let power: Vec<f64> = (0..n).map(|_| rng.random_range(-0.10..0.10)).collect();

    SwingNetwork::new(
        OMEGA_60HZ,
        mass.into_iter().map(inertia_for_mass).collect(),
        damping,
        coupling,
        phase,
        power,
        SwingNetwork::mean_output_row(n),
    )
}

/// Seeded random perturbation of the rest state: angles uniform in
/// `[-magnitude, magnitude]`, velocities zero.
pub fn perturbed_initial_state<R: Rng>(
    n: usize,
    magnitude: f64,
    rng: &mut R,
) -> crate::swing::SwingState {
    let angles = (0..n).map(|_| rng.random_range(-magnitude..magnitude)).collect();
    crate::swing::SwingState {
        angles,
        velocities: vec![0.0; n],
    }
}
