//! Invariants of the geometry kernels, checked on random inputs.

use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;

use npch_core::isometry::{iwasawa, spectral, Mobius};
use npch_core::npc::{Euclidean, HyperbolicDisk, MetricTree, TreePoint};
use npch_core::rng::task_rng;
use npch_core::spd::{group_action, spd_distance, spd_exp, GroupElement, SpdPoint, SpdSpace, TangentVector};
use npch_core::{Geometry, Isometry};

fn sym(n: usize, entries: &[f64]) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, n);
    let mut k = 0;
    for i in 0..n {
        for j in i..n {
            m[(i, j)] = entries[k];
            m[(j, i)] = entries[k];
            k += 1;
        }
    }
    m
}

fn spd_from(n: usize, entries: &[f64]) -> SpdPoint {
    spd_exp(
        &TangentVector::new(SpdPoint::identity(n), sym(n, entries)).unwrap(),
        1.0,
    )
}

fn sym_entries() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.5f64..1.5, 6)
}

fn invertible3() -> impl Strategy<Value = GroupElement> {
    prop::collection::vec(-2.0f64..2.0, 9)
        .prop_filter("invertible", |v| {
            DMatrix::from_row_slice(3, 3, v).determinant().abs() > 0.2
        })
        .prop_map(|v| GroupElement::new(DMatrix::from_row_slice(3, 3, &v)).unwrap())
}

fn disk_point() -> impl Strategy<Value = Complex64> {
    (0.0f64..0.95, 0.0f64..std::f64::consts::TAU).prop_map(|(r, a)| Complex64::from_polar(r, a))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn spd_distance_is_symmetric_and_congruence_invariant(
        a in sym_entries(), b in sym_entries(), g in invertible3()
    ) {
        let p = spd_from(3, &a);
        let q = spd_from(3, &b);
        let d = spd_distance(&p, &q).unwrap();
        prop_assert!((d - spd_distance(&q, &p).unwrap()).abs() < 1e-9 * (1.0 + d));
        let gp = group_action(&g, &p).unwrap();
        let gq = group_action(&g, &q).unwrap();
        prop_assert!((spd_distance(&gp, &gq).unwrap() - d).abs() < 1e-7 * (1.0 + d));
    }

    #[test]
    fn spd_geodesic_splits_distance(a in sym_entries(), b in sym_entries(), t in 0.0f64..=1.0) {
        let s = SpdSpace::new(3).unwrap();
        let p = spd_from(3, &a);
        let q = spd_from(3, &b);
        let m = s.geodesic(&p, &q, t);
        let d = s.distance(&p, &q);
        prop_assert!((s.distance(&p, &m) - t * d).abs() < 1e-8 * (1.0 + d));
        prop_assert!((s.distance(&m, &q) - (1.0 - t) * d).abs() < 1e-8 * (1.0 + d));
    }

    #[test]
    fn spd_metric_anchor(a in sym_entries()) {
        let v = sym(3, &a);
        let p = spd_from(3, &a);
        let norm = (&v * &v).trace().sqrt();
        prop_assert!((spd_distance(&SpdPoint::identity(3), &p).unwrap() - norm).abs() < 1e-10);
    }

    #[test]
    fn translation_length_bounds_displacement(g in invertible3(), a in sym_entries()) {
        let s = SpdSpace::new(3).unwrap();
        let p = spd_from(3, &a);
        let d = s.distance(&p, &g.apply(&s, &p));
        prop_assert!(spectral::rho(g.matrix()) <= d + 1e-8);
    }

    #[test]
    fn iwasawa_reconstructs(g in invertible3()) {
        let w = iwasawa(&g);
        prop_assert!(w.residual < 1e-10);
        prop_assert!(w.a.iter().all(|x| *x > 0.0));
        for i in 0..3 {
            prop_assert!((w.n[(i, i)] - 1.0).abs() < 1e-12);
            for j in 0..i {
                prop_assert!(w.n[(i, j)].abs() < 1e-12);
            }
        }
        let kt_k = w.k.transpose() * &w.k;
        prop_assert!((kt_k - DMatrix::identity(3, 3)).norm() < 1e-10);
    }

    #[test]
    fn mobius_maps_are_isometries(
        z in disk_point(), w in disk_point(),
        (a, b, c) in (-2.0f64..2.0, -2.0f64..2.0, -2.0f64..2.0)
    ) {
        prop_assume!(a.abs() > 0.3);
        // d chosen so that ad - bc = 1
        let m = Mobius::new(a, b, c, (1.0 + b * c) / a).unwrap();
        let h = HyperbolicDisk;
        let d = h.distance(&z, &w);
        let d2 = h.distance(&m.apply(&h, &z), &m.apply(&h, &w));
        prop_assert!((d - d2).abs() < 1e-7 * (1.0 + d));
    }

    #[test]
    fn hyperbolic_npc_inequality(p in disk_point(), q in disk_point(), r in disk_point(), t in 0.0f64..=1.0) {
        let h = HyperbolicDisk;
        let qt = h.geodesic(&q, &r, t);
        let lhs = h.distance(&p, &qt).powi(2);
        let rhs = (1.0 - t) * h.distance(&p, &q).powi(2) + t * h.distance(&p, &r).powi(2)
            - t * (1.0 - t) * h.distance(&q, &r).powi(2);
        prop_assert!(lhs <= rhs + 1e-8 * (1.0 + rhs));
    }

    #[test]
    fn euclidean_barycenter_is_weighted_mean(
        pts in prop::collection::vec(prop::collection::vec(-5.0f64..5.0, 2), 1..6),
        ws in prop::collection::vec(0.1f64..2.0, 6)
    ) {
        let e = Euclidean::new(2).unwrap();
        let w = &ws[..pts.len()];
        let b = e.barycenter(&pts, w);
        let total: f64 = w.iter().sum();
        for k in 0..2 {
            let mean: f64 = pts.iter().zip(w).map(|(p, wi)| p[k] * wi).sum::<f64>() / total;
            prop_assert!((b[k] - mean).abs() < 1e-9);
        }
    }

    #[test]
    fn tree_geodesic_splits_distance(
        (e1, o1, e2, o2) in (0usize..4, 0.0f64..=1.5, 0usize..4, 0.0f64..=1.5),
        t in 0.0f64..=1.0
    ) {
        let tree = MetricTree::star(4, 1.5).unwrap();
        let p = TreePoint { edge: e1, offset: o1 };
        let q = TreePoint { edge: e2, offset: o2 };
        let d = tree.distance(&p, &q);
        prop_assert!((d - tree.distance(&q, &p)).abs() < 1e-12);
        let m = tree.geodesic(&p, &q, t);
        prop_assert!((tree.distance(&p, &m) - t * d).abs() < 1e-12);
        prop_assert!((tree.distance(&m, &q) - (1.0 - t) * d).abs() < 1e-12);
        // two-point barycenter is the geodesic point
        let b = tree.barycenter(&[p, q], &[1.0 - t, t]);
        prop_assert!(tree.distance(&b, &m) < 1e-9);
    }

    #[test]
    fn task_streams_are_reproducible(seed in any::<u64>(), idx in 0u64..1000) {
        use rand::RngCore;
        let a = task_rng(seed, idx).next_u64();
        let b = task_rng(seed, idx).next_u64();
        prop_assert_eq!(a, b);
    }
}
