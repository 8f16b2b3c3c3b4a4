use foldsaddle_core::bifurcation::{
    alpha0, classify_case, m0, m1, m2, topological_class, Boundaries, Regime, CLASSIFY_TOL,
};
use foldsaddle_core::flow::{ratio_law_derivative, return_map_derivative, upper_return, ReturnMap};
use foldsaddle_core::sigma::{direction, direction_from_fields, open_region};
use foldsaddle_core::family::upper_integral;
use foldsaddle_core::{make_system, Point, TauKind};
use proptest::prelude::*;

fn tau() -> impl Strategy<Value = TauKind> {
    prop_oneof![Just(TauKind::Inv), Just(TauKind::Vis)]
}

proptest! {
    #[test]
    fn h_is_the_tangent_convex_combination(
        d1 in -5.0..5.0f64, d2 in 0.01..5.0f64, e1 in -5.0..5.0f64, e2 in 0.01..5.0f64, flip in any::<bool>()
    ) {
        let (d2, e2) = if flip { (-d2, e2) } else { (d2, -e2) };
        let t = e2 / (e2 - d2);
        prop_assert!((t * d2 + (1.0 - t) * e2).abs() < 1e-12);
        let combo = t * d1 + (1.0 - t) * e1;
        let h = direction_from_fields((d1, d2), (e1, e2)).unwrap();
        prop_assert!((h - combo).abs() <= 1e-12 * combo.abs().max(1.0));
    }

    #[test]
    fn h_on_system_nonsewing_points(
        tau in tau(), lambda in -0.9..0.9f64, alpha in -1.9..-0.1f64, beta in -0.8..0.8f64, x in -1.0..1.0f64
    ) {
        let sys = make_system(tau, lambda, alpha, beta).unwrap();
        prop_assume!(open_region(&sys, x).is_some());
        let p = Point::on_sigma(x);
        let (d1, d2) = sys.upper_field(p);
        let (e1, e2) = sys.lower_field(p);
        let t = e2 / (e2 - d2);
        let combo = t * d1 + (1.0 - t) * e1;
        let h = direction(&sys, x).unwrap();
        prop_assert!((h - combo).abs() <= 1e-12 * combo.abs().max(1e-300) + 1e-300);
    }

    #[test]
    fn upper_return_conserves_integral(lambda in -0.5..0.5f64, u0 in -0.499..-0.001f64) {
        let sys = make_system(TauKind::Inv, lambda, -1.0, 0.5).unwrap();
        let mut big = sys;
        big.window.xmin = -10.0;
        big.window.xmax = 10.0;
        big.window.ymax = 10.0;
        let r = upper_return(&big, lambda + u0).unwrap();
        let u1 = r.x1 - lambda;
        prop_assert!(u1 > 0.0 && u1 < 1.0);
        let f0 = upper_integral(TauKind::Inv, u0);
        let f1 = upper_integral(TauKind::Inv, u1);
        prop_assert!((f1 - f0).abs() < 1e-12);
    }

    #[test]
    fn thm2_chain_is_ordered(beta in 0.05..0.7f64, s in 0.02..0.98f64) {
        let a0 = alpha0(beta).unwrap();
        let alpha = a0 + s * (-0.05 - a0);
        let b = Boundaries::new(TauKind::Inv, alpha, beta, CLASSIFY_TOL).unwrap();
        prop_assert_eq!(b.regime, Regime::Thm2);
        let v: Vec<f64> = b.values.iter().map(|x| x.value).collect();
        prop_assert!(v.windows(2).all(|w| w[0] < w[1]));
        prop_assert!((b.get("M0").unwrap() - m0(alpha, beta)).abs() == 0.0);
        prop_assert!((b.get("M1").unwrap() - m1(beta)).abs() == 0.0);
        prop_assert!((b.get("M2").unwrap() - m2(alpha, beta)).abs() == 0.0);
    }

    #[test]
    fn labels_are_valid_and_classes_idempotent(
        tau in tau(), lambda in -0.9..0.9f64, alpha in -1.9..-0.1f64, beta in -0.8..0.8f64
    ) {
        let l = classify_case(tau, lambda, alpha, beta, CLASSIFY_TOL).unwrap();
        prop_assert!(l.is_valid());
        let c = topological_class(l);
        prop_assert_eq!(topological_class(c.representative), c);
    }

    #[test]
    fn ratio_law_matches_finite_differences(lambda in -0.3..0.0f64, s in 0.05..0.95f64) {
        let sys = make_system(TauKind::Inv, lambda, -1.0, 0.5).unwrap();
        let Some(rm) = ReturnMap::new(&sys) else { return Ok(()) };
        let x0 = rm.domain.0 + s * (rm.domain.1 - rm.domain.0);
        let exact = ratio_law_derivative(&sys, x0).unwrap();
        let fd = return_map_derivative(&sys, x0).unwrap();
        prop_assert!((exact - fd).abs() <= 1e-5 * exact.abs().max(1.0), "{} vs {}", exact, fd);
    }
}
