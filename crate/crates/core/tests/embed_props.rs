//! Constructive-embedding properties: matrix-unit relations for every
//! produced unit system and the exact Tsirelson value of the Bohm-Bell
//! witness on every noncommutative factor pair with small ambient
//! dimension.

mod common;

use opalg_core::algebra::{find_noncommuting_projections, make_algebra};
use opalg_core::chsh::chsh_value;
use opalg_core::embed::{
    bohm_bell_state, embed_m2, tsirelson_observables, two_projection_units,
};
use opalg_core::tensor::tensor_product;

const TSIRELSON: f64 = 2.0 * std::f64::consts::SQRT_2;

#[test]
fn bohm_bell_hits_tsirelson_for_all_small_noncommutative_pairs() {
    // Every noncommutative block profile with ambient dimension ≤ 8 on both
    // sides (a representative family).
    let shapes: [&[usize]; 6] = [&[2], &[3], &[1, 2], &[2, 2], &[1, 3], &[2, 3, 1]];
    for dims_l in shapes {
        for dims_r in shapes {
            let t =
                tensor_product(&make_algebra(dims_l).unwrap(), &make_algebra(dims_r).unwrap())
                    .unwrap();
            let l = embed_m2(t.left(), 1e-9).unwrap();
            let r = embed_m2(t.right(), 1e-9).unwrap();
            l.validate(1e-9).unwrap();
            r.validate(1e-9).unwrap();
            let state = bohm_bell_state(&t, &l, &r).unwrap();
            let obs = tsirelson_observables(&t, &l, &r).unwrap();
            let v = chsh_value(&state, &t, &obs).unwrap();
            assert!(
                (v - TSIRELSON).abs() <= 1e-9,
                "{dims_l:?}⊗{dims_r:?} reached {v}"
            );
            // Independent recomputation through the raw-trace oracle.
            let oracle = common::chsh_oracle(&state, &t, &obs);
            assert!((oracle - TSIRELSON).abs() <= 1e-9);
        }
    }
}

#[test]
fn projection_route_matches_corner_route_on_relations() {
    let shapes: [&[usize]; 3] = [&[2], &[1, 3], &[4]];
    for dims in shapes {
        let a = make_algebra(dims).unwrap();
        let corner = embed_m2(&a, 1e-9).unwrap();
        corner.validate(1e-9).unwrap();
        let (p, q) = find_noncommuting_projections(&a, 1e-9).unwrap().unwrap();
        let projective = two_projection_units(&p, &q, 1e-6).unwrap();
        projective.validate(1e-9).unwrap();

        // Both systems realize the same corner copy of M₂: all traces of
        // words of length ≤ 3 agree.
        let words = |u: &opalg_core::embed::MatrixUnits| {
            let es = [&u.e11, &u.e12, &u.e21, &u.e22];
            let mut traces = Vec::new();
            for x in es {
                traces.push(x.trace());
            }
            for x in es {
                for y in es {
                    traces.push((x * y).trace());
                }
            }
            for x in es {
                for y in es {
                    for z in es {
                        traces.push((&(x * y) * z).trace());
                    }
                }
            }
            traces
        };
        for (wa, wb) in words(&corner).iter().zip(words(&projective).iter()) {
            assert!((wa - wb).norm() < 1e-8, "{dims:?}: word trace {wa} vs {wb}");
        }
    }
}
