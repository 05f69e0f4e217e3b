//! Intrusive Galerkin reduction of the exact lifted operators.
//!
//! Projecting the known `(A, H, B, C)` onto a reduction basis gives the
//! reference reduced model that data-driven inference is judged against.
//! The projection uses a single basis (`W_r = V_r = Φ_r`); the oblique
//! two-basis variant is intentionally not offered since nothing in the
//! pipeline produces a second basis.

use crate::error::{Error, Result};
use crate::lift::LiftedOperators;
use crate::opinf::{compact_quadratic, ModelSource, ReducedQuadraticModel};
use crate::pod::PodBasis;

/// Galerkin projection: `A_r = ΦᵀAΦ`, `H_r = ΦᵀH(Φ⊗Φ)`, `B_r = ΦᵀB`,
/// `C_r = CΦ`. The quadratic operator is contracted directly from its
/// sparse terms and stored as the compacted symmetric representative.
pub fn galerkin_reduce(ops: &LiftedOperators, basis: &PodBasis) -> Result<ReducedQuadraticModel> {
    if basis.dim() != ops.dim() {
        return Err(Error::DimensionMismatch {
            context: "galerkin_reduce basis rows",
            expected: ops.dim(),
            got: basis.dim(),
        });
    }
    let phi = basis.basis();
    let a_r = phi.transpose() * ops.a() * phi;
    let h_full = ops.h().contract(phi)?;
    let h_compact = compact_quadratic(&h_full)?;
    let r = basis.r();
    let b_r = faer::Mat::from_fn(r, 1, |i, _| {
        (0..ops.dim()).map(|row| phi[(row, i)] * ops.b()[row]).sum()
    });
    let c_r = ops.c() * phi;
    ReducedQuadraticModel::new(a_r, h_compact, b_r, c_r, basis.id(), ModelSource::Intrusive)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lift::{assemble_lifted_operators, lifted_rhs, LiftedState};
    use crate::rom::rom_rhs;
    use crate::synthetic;
    use faer::Mat;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    /// A PodBasis cannot be built by hand (fields are private to keep the
    /// orthonormality invariant), so tests construct one from snapshots
    /// whose SVD is known.
    fn identity_basis(d: usize, r: usize) -> PodBasis {
        // orthonormal columns e₁..e_r with decreasing weights, so U = I
        let x = Mat::from_fn(d, d, |i, j| if i == j { (d - i) as f64 } else { 0.0 });
        let pod = crate::pod::compute_pod(&x, 1e-15, Some(r)).unwrap();
        assert!(pod.orthonormality_defect() < 1e-14);
        pod
    }

    #[test]
    fn identity_projection_reproduces_full_operators() {
        let mut rng = StdRng::seed_from_u64(3);
        let net = synthetic::random_network(3, &mut rng).unwrap();
        let ops = assemble_lifted_operators(&net);
        let d = ops.dim();
        let basis = identity_basis(d, d);
        let model = galerkin_reduce(&ops, &basis).unwrap();

        for i in 0..d {
            for j in 0..d {
                assert!((model.a()[(i, j)] - ops.a()[(i, j)]).abs() < 1e-14);
            }
            assert!((model.b()[(i, 0)] - ops.b()[i]).abs() < 1e-14);
            assert!((model.c()[(0, i)] - ops.c()[(0, i)]).abs() < 1e-14);
        }

        // H only matches through its action: the stored form is symmetrized
        for _ in 0..10 {
            let x: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
            let u = rng.random_range(-1.0..1.0);
            let full = lifted_rhs(&ops, &LiftedState::from_values(x.clone()).unwrap(), u).unwrap();
            let reduced = rom_rhs(&model, &x, &[u]).unwrap();
            for i in 0..d {
                assert!((full[i] - reduced[i]).abs() <= 1e-11 * full[i].abs().max(1.0));
            }
        }
    }

    #[test]
    fn single_vector_basis_selects_coordinates() {
        let mut rng = StdRng::seed_from_u64(5);
        let net = synthetic::random_network(2, &mut rng).unwrap();
        let ops = assemble_lifted_operators(&net);
        let basis = identity_basis(ops.dim(), 1);
        let model = galerkin_reduce(&ops, &basis).unwrap();
        assert_eq!(model.r(), 1);
        assert!((model.a()[(0, 0)] - ops.a()[(0, 0)]).abs() < 1e-14);
        assert!((model.b()[(0, 0)] - ops.b()[0]).abs() < 1e-14);
        assert!((model.c()[(0, 0)] - ops.c()[(0, 0)]).abs() < 1e-14);
    }

    #[test]
    fn projected_rhs_matches_reduced_rhs() {
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..5 {
            let net = synthetic::random_network(4, &mut rng).unwrap();
            let ops = assemble_lifted_operators(&net);

            // basis from actual trajectory data
            let state = synthetic::perturbed_initial_state(4, 0.3, &mut rng);
            let snap =
                crate::simulate::collect_swing_snapshots(&net, &state, (0.0, 1.0), 1e-3, |_| 1.0)
                    .unwrap();
            let lifted = crate::simulate::lift_snapshots(&snap).unwrap();
            let basis = crate::pod::compute_pod(lifted.states(), 1e-10, Some(6)).unwrap();
            let model = galerkin_reduce(&ops, &basis).unwrap();
            let phi = basis.basis();

            for _ in 0..100 {
                let x_r: Vec<f64> = (0..6).map(|_| rng.random_range(-1.0..1.0)).collect();
                let u = rng.random_range(-1.0..1.0);
                // Φᵀ f(Φ x_r, u)
                let x_full: Vec<f64> = (0..16)
                    .map(|row| (0..6).map(|c| phi[(row, c)] * x_r[c]).sum())
                    .collect();
                let f_full =
                    lifted_rhs(&ops, &LiftedState::from_values(x_full).unwrap(), u).unwrap();
                let projected: Vec<f64> = (0..6)
                    .map(|c| (0..16).map(|row| phi[(row, c)] * f_full[row]).sum())
                    .collect();
                let reduced = rom_rhs(&model, &x_r, &[u]).unwrap();
                let scale = projected.iter().fold(1.0f64, |m, v| m.max(v.abs()));
                for i in 0..6 {
                    assert!(
                        (projected[i] - reduced[i]).abs() <= 1e-11 * scale,
                        "component {i}: {} vs {}",
                        projected[i],
                        reduced[i]
                    );
                }
            }
        }
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let mut rng = StdRng::seed_from_u64(9);
        let net = synthetic::random_network(3, &mut rng).unwrap();
        let ops = assemble_lifted_operators(&net);
        let basis = identity_basis(8, 2);
        assert!(galerkin_reduce(&ops, &basis).is_err());
    }
}
