//! Bell-functional properties across modules: the product-state bound, the
//! commutative-factor theorem at scale, monotone ascent of every see-saw
//! trace, and invariance of the CHSH value under the GNS representation.

mod common;

use opalg_core::algebra::{make_algebra, random_self_adjoint_contraction};
use opalg_core::chsh::{chsh_value, seesaw_observables, ChshObservables};
use opalg_core::gns::{gns_construct, gns_expectation, GNS_NULL_TOL};
use opalg_core::linalg::child_seed;
use opalg_core::tensor::{
    is_product_state, random_product_state, random_pure_state, random_state, tensor_product,
};

fn random_observables(
    t: &opalg_core::tensor::TensorAlgebra,
    seed: u64,
) -> ChshObservables {
    ChshObservables::new(
        random_self_adjoint_contraction(t.left(), child_seed(seed, 0)),
        random_self_adjoint_contraction(t.left(), child_seed(seed, 1)),
        random_self_adjoint_contraction(t.right(), child_seed(seed, 2)),
        random_self_adjoint_contraction(t.right(), child_seed(seed, 3)),
    )
    .unwrap()
}

#[test]
fn product_states_satisfy_bell_inequality_at_scale() {
    // 1000 random product states with random valid observables on each of
    // [2]⊗[2] and [3]⊗[2]: the value never exceeds 2.
    for (dims_l, dims_r, base) in [(&[2][..], &[2][..], 10_000u64), (&[3][..], &[2][..], 20_000)] {
        let t = tensor_product(&make_algebra(dims_l).unwrap(), &make_algebra(dims_r).unwrap())
            .unwrap();
        for k in 0..1000u64 {
            let omega = random_product_state(&t, child_seed(base, k));
            let obs = random_observables(&t, child_seed(base + 1, k));
            let v = chsh_value(&omega, &t, &obs).unwrap();
            assert!(v <= 2.0 + 1e-9, "{dims_l:?}⊗{dims_r:?} sample {k} reached {v}");
            // Cross-check against the raw-trace oracle.
            let oracle = common::chsh_oracle(&omega, &t, &obs);
            assert!((v - oracle).abs() < 1e-10);
        }
    }
}

#[test]
fn commutative_factor_pure_states_are_product_at_scale() {
    // 500 random pure states on commutative ⊗ full factors all factorize.
    let shapes: [(&[usize], &[usize]); 2] = [(&[1, 1], &[2]), (&[1, 1, 1], &[3])];
    for (dims_l, dims_r) in shapes {
        let t = tensor_product(&make_algebra(dims_l).unwrap(), &make_algebra(dims_r).unwrap())
            .unwrap();
        for k in 0..250u64 {
            let omega = random_pure_state(t.product(), child_seed(31_000, k));
            assert!(
                is_product_state(&omega, &t, 1e-8).unwrap(),
                "pure state {k} on {dims_l:?}⊗{dims_r:?} is not a product state"
            );
        }
    }
}

#[test]
fn seesaw_history_is_monotone_on_random_states() {
    let t = tensor_product(&make_algebra(&[2]).unwrap(), &make_algebra(&[1, 2]).unwrap())
        .unwrap();
    for seed in 0..10u64 {
        let omega = random_state(t.product(), child_seed(555, seed));
        let report = seesaw_observables(&omega, &t, seed, 4, 200, 1e-10).unwrap();
        for w in report.history.windows(2) {
            assert!(w[1] >= w[0] - 1e-12, "ascent broke: {} -> {}", w[0], w[1]);
        }
        let direct = chsh_value(&omega, &t, &report.observables).unwrap();
        assert!((report.value - direct).abs() < 1e-10);
    }
}

#[test]
fn chsh_value_is_representation_invariant_under_gns() {
    // Pushing the state and observables through the GNS representation and
    // evaluating against the cyclic vector reproduces both CHSH terms.
    let t = tensor_product(&make_algebra(&[2]).unwrap(), &make_algebra(&[2]).unwrap()).unwrap();
    for seed in 0..8u64 {
        let omega = random_state(t.product(), child_seed(777, seed));
        let obs = random_observables(&t, child_seed(778, seed));
        let pi = gns_construct(&omega, t.product(), GNS_NULL_TOL).unwrap();

        let bm = &obs.b - &obs.b_prime;
        let bp = &obs.b + &obs.b_prime;
        let t1 = gns_expectation(&pi, &t.embed_pair(&obs.a, &bm)).unwrap();
        let t2 = gns_expectation(&pi, &t.embed_pair(&obs.a_prime, &bp)).unwrap();
        let through_rep = t1.re.abs() + t2.re.abs();
        let direct = chsh_value(&omega, &t, &obs).unwrap();
        assert!(
            (through_rep - direct).abs() < 1e-9,
            "representation changed the value: {through_rep} vs {direct}"
        );
    }
}

#[test]
fn reduction_consistency_on_larger_products() {
    // 100 random states on products with ambient up to 12.
    let shapes: [(&[usize], &[usize]); 4] =
        [(&[2], &[3]), (&[1, 2], &[2, 1]), (&[1, 1, 2], &[2]), (&[3], &[2, 2])];
    let mut checked = 0;
    for (dims_l, dims_r) in shapes {
        let t = tensor_product(&make_algebra(dims_l).unwrap(), &make_algebra(dims_r).unwrap())
            .unwrap();
        for k in 0..25u64 {
            let omega = random_state(t.product(), child_seed(61_000, k));
            let red_l =
                opalg_core::tensor::reduced_state(&omega, &t, opalg_core::tensor::Side::Left)
                    .unwrap();
            let red_r =
                opalg_core::tensor::reduced_state(&omega, &t, opalg_core::tensor::Side::Right)
                    .unwrap();
            for x in t.left().basis_elements() {
                let lhs = red_l.evaluate(&x).unwrap();
                let rhs = omega.evaluate(&t.embed_left(&x)).unwrap();
                assert!((lhs - rhs).norm() < 1e-9);
            }
            for y in t.right().basis_elements() {
                let lhs = red_r.evaluate(&y).unwrap();
                let rhs = omega.evaluate(&t.embed_right(&y)).unwrap();
                assert!((lhs - rhs).norm() < 1e-9);
            }
            checked += 1;
        }
    }
    assert_eq!(checked, 100);
}
