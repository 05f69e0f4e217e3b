//! Non-intrusive quadratic model reduction for power-network swing dynamics.
//!
//! The crate implements the full lift-and-learn workflow for networks of
//! coupled swing-equation oscillators:
//!
//! 1. [`swing`] — the nonlinear network model and its dynamics;
//! 2. [`lift`] — the trigonometric lifting that makes the dynamics exactly
//!    quadratic, plus assembly of the exact lifted operators;
//! 3. [`simulate`] — fixed-step RK4 trajectories and snapshot collection;
//! 4. [`pod`] — proper orthogonal decomposition of lifted snapshots;
//! 5. [`opinf`] — regularized least-squares operator inference of reduced
//!    quadratic models from projected data;
//! 6. [`rom`] — simulation and accuracy evaluation of reduced models;
//! 7. [`intrusive`] — Galerkin projection of the exact lifted operators, the
//!    reference that validates the learned models.
//!
//! [`synthetic`] ships benchmark networks and [`io`] the file formats used
//! by the command-line driver.

pub mod error;
pub mod intrusive;
pub mod io;
pub mod lift;
pub mod opinf;
pub mod pod;
pub mod rom;
pub mod simulate;
pub mod swing;
pub mod synthetic;

pub use error::{Error, Result};
pub use intrusive::galerkin_reduce;
pub use lift::{assemble_lifted_operators, lift_state, lifted_rhs, lifted_rhs_via_chain_rule,
    LiftedOperators, LiftedState};
pub use opinf::{assemble_problem, compact_kron, expand_quadratic, infer, solve,
    ModelSource, ReducedQuadraticModel};
pub use pod::{compute_pod, project, PodBasis};
pub use rom::{evaluate, rom_rhs, simulate_rom, ErrorReport, RomSimulation};
pub use simulate::{collect_swing_snapshots, derivative_snapshots, integrate, lift_snapshots,
    DifferenceScheme, SnapshotSet};
pub use swing::{coupling_force, swing_output, swing_rhs, SwingNetwork, SwingState};
