use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;
use seqclt::TrigPoly;

fn arb_poly(max_degree: u64) -> impl Strategy<Value = TrigPoly> {
    proptest::collection::btree_map(1..=max_degree, (-2.0f64..2.0, -2.0f64..2.0), 0..16).prop_map(|m| {
        TrigPoly::new(m.into_iter().map(|(n, (re, im))| (n, Complex64::new(re, im)))).unwrap()
    })
}

/// `(1/a) Σ_j g((x + j)/a)`, the preimage average defining the transfer
/// operator of `x ↦ ax mod 1`.
fn transfer_quadrature(g: &TrigPoly, a: u64, x: f64) -> f64 {
    (0..a).map(|j| g.evaluate((x + j as f64) / a as f64)).sum::<f64>() / a as f64
}

/// Exact for products of polynomials whose degrees sum below `points`.
fn inner_quadrature(g: &TrigPoly, h: &TrigPoly, points: usize) -> f64 {
    (0..points)
        .map(|i| {
            let x = i as f64 / points as f64;
            g.evaluate(x) * h.evaluate(x)
        })
        .sum::<f64>()
        / points as f64
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn adjointness(g in arb_poly(32), h in arb_poly(32), a in 2u64..=7) {
        let lhs = g.koopman(a).l2_inner(&h);
        let rhs = g.l2_inner(&h.transfer(a));
        prop_assert!((lhs - rhs).abs() <= 1e-12 * g.abs_sum() * h.abs_sum());
    }

    #[test]
    fn left_inverse(g in arb_poly(32), a in 2u64..=7) {
        prop_assert_eq!(g.koopman(a).transfer(a), g);
    }

    #[test]
    fn isometry(g in arb_poly(32), a in 2u64..=7) {
        let k = g.koopman(a);
        prop_assert_eq!(k.l2_inner(&k), g.l2_inner(&g));
        prop_assert_eq!(k.norm_sq(), g.norm_sq());
    }

    #[test]
    fn projection(g in arb_poly(32), a in 2u64..=7) {
        let p = g.project_measurable(a);
        prop_assert_eq!(p.project_measurable(a), p.clone());
        prop_assert!(p.l2_inner(&p) <= g.l2_inner(&g));
        prop_assert_eq!(&g.transfer(a).koopman(a), &p);
        // the residual is orthogonal to the measurable part
        let r = g.sub(&p);
        prop_assert!(r.l2_inner(&p).abs() <= 1e-12 * g.abs_sum() * g.abs_sum());
    }

    #[test]
    fn canonical_form_preserved(g in arb_poly(32), h in arb_poly(32), a in 2u64..=7, s in -3.0f64..3.0) {
        for p in [
            g.koopman(a),
            g.transfer(a),
            g.project_measurable(a),
            g.scale(s),
            g.add(&h),
            g.sub(&h),
            g.sub(&g),
            TrigPoly::linear_combine([(s, &g), (-s, &h)]),
        ] {
            prop_assert!(p.is_canonical());
            prop_assert!(p.terms().all(|(n, c)| n >= 1 && c.norm() > 0.0));
        }
        prop_assert!(g.sub(&g).is_zero());
    }

    #[test]
    fn transfer_matches_quadrature(g in arb_poly(32), a in 2u64..=7) {
        let t = g.transfer(a);
        let points = 4 * g.degree().max(1) + 1;
        for i in 0..points {
            let x = i as f64 / points as f64;
            prop_assert!((t.evaluate(x) - transfer_quadrature(&g, a, x)).abs() <= 1e-10);
        }
    }

    #[test]
    fn inner_product_matches_quadrature(g in arb_poly(32), h in arb_poly(32)) {
        let points = 2 * (g.degree() + h.degree()) as usize + 1;
        let q = inner_quadrature(&g, &h, points);
        prop_assert!((g.l2_inner(&h) - q).abs() <= 1e-10 * (1.0 + g.abs_sum() * h.abs_sum()));
    }

    #[test]
    fn degree_never_rises(g in arb_poly(32), a in 2u64..=7) {
        prop_assert!(g.transfer(a).degree() <= g.degree() / a);
        prop_assert_eq!(g.koopman(a).degree(), g.degree() * a);
    }

    #[test]
    fn c1_norm_brackets_dense_grid(g in arb_poly(12)) {
        let norm = g.c1_norm();
        prop_assert!(norm.estimate <= norm.bound);
        let points = 20_000;
        let (mut sup, mut dsup) = (0.0f64, 0.0f64);
        for i in 0..points {
            let x = i as f64 / points as f64;
            sup = sup.max(g.evaluate(x).abs());
            dsup = dsup.max(g.evaluate_derivative(x).abs());
        }
        prop_assert!(sup + dsup <= norm.bound * (1.0 + 1e-12));
    }
}

#[test]
fn inner_product_examples() {
    let c1 = TrigPoly::cos(1);
    let c2 = TrigPoly::cos(2);
    assert_eq!(c1.l2_inner(&c1), 0.5);
    assert_eq!(c1.l2_inner(&c2), 0.0);
    let f1 = c2.sub(&c1);
    assert_eq!(f1.l2_inner(&f1), 1.0);
}

#[test]
fn derivative_matches_finite_difference() {
    let g = TrigPoly::new([
        (1, Complex64::new(0.3, -0.2)),
        (5, Complex64::new(-0.1, 0.4)),
        (9, Complex64::new(0.05, 0.0)),
    ])
    .unwrap();
    let h = 1e-6;
    for i in 0..50 {
        let x = i as f64 / 50.0 + 0.003;
        let fd = (g.evaluate(x + h) - g.evaluate(x - h)) / (2.0 * h);
        assert!((fd - g.evaluate_derivative(x)).abs() < 1e-5 * 2.0 * PI * 9.0);
    }
}
