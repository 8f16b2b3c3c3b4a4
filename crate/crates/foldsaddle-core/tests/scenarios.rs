use foldsaddle_core::bifurcation::{alpha0, find_cycle_fold, find_cycle_fold_in, l1};
use foldsaddle_core::flow::{lower_return, numeric_arc, ratio_law_derivative, return_map, upper_return, ArcEnd};
use foldsaddle_core::sigma::{direction, pseudo_equilibria};
use foldsaddle_core::structures::{find_canard_cycles, CycleStability};
use foldsaddle_core::{make_system, Point, Side, TauKind};

#[test]
fn repeller_cycle_at_case_13_2() {
    let lambda = -0.5 + 11.0 * 6f64.sqrt() / 60.0;
    let sys = make_system(TauKind::Inv, lambda, -1.0, 0.5).unwrap();
    let cycles = find_canard_cycles(&sys, (-1.0, 1.0));
    assert_eq!(cycles.len(), 1);
    let c = cycles[0];
    let xs = -(29.0f64 / 2.0).sqrt() / 10.0;
    assert!((c.fixed_abscissa - xs).abs() < 1e-9);
    assert!((return_map(&sys, xs).unwrap() - xs).abs() < 1e-10);
    assert_eq!(c.stability, CycleStability::Repeller);
    // Transversal ratio with the two X.f values of the cycle.
    let x1 = upper_return(&sys, xs).unwrap().x1;
    let (xf0, xf1) = (sys.xf(xs), sys.xf(x1));
    assert!((xf0 - 0.438671).abs() < 1e-6 && (xf1 + 0.245337).abs() < 1e-6);
    assert!((ratio_law_derivative(&sys, xs).unwrap() - 1.78803).abs() < 1e-4);
}

#[test]
fn visible_fold_graph_has_constant_h() {
    for beta in [0.2, 0.5, 0.7] {
        let sys = make_system(TauKind::Vis, 0.0, -1.0, beta).unwrap();
        for z in [-0.9, -0.4, -0.1, 0.1, 0.3, 0.8] {
            assert!((direction(&sys, z).unwrap() - (1.0 - beta) / 2.0).abs() < 1e-12);
        }
    }
}

#[test]
fn vis_pseudo_equilibrium_at_alpha_minus_one() {
    for (lambda, beta) in [(0.3, 0.5), (-0.4, 0.6), (0.5, 0.3)] {
        let sys = make_system(TauKind::Vis, lambda, -1.0, beta).unwrap();
        let want = beta * lambda / (beta - 1.0);
        let pe = pseudo_equilibria(&sys, (-1.0, 1.0));
        assert!(pe.iter().any(|p| (p.abscissa - want).abs() < 1e-12), "{pe:?}");
    }
}

#[test]
fn numeric_arcs_agree_with_closed_forms() {
    let sys = make_system(TauKind::Inv, -0.2, -1.0, 0.5).unwrap();
    for x0 in [-0.6, -0.5, -0.4, -0.3] {
        let (arc, end) = numeric_arc(&sys, Side::Upper, Point::on_sigma(x0), 50.0).unwrap();
        assert_eq!(end, ArcEnd::Sigma);
        assert!((arc.end.x - upper_return(&sys, x0).unwrap().x1).abs() < 1e-6);
    }
    for x0 in [0.05, 0.1, 0.3, 0.45] {
        let (arc, end) = numeric_arc(&sys, Side::Lower, Point::on_sigma(x0), 50.0).unwrap();
        assert_eq!(end, ArcEnd::Sigma);
        assert!((arc.end.x - lower_return(&sys, x0).unwrap().x1).abs() < 1e-6);
        let g = |p: Point| p.x * p.x - (p.y + 0.5) * (p.y + 0.5);
        assert!((g(arc.end) - g(arc.start)).abs() < 1e-10);
    }
}

#[test]
fn fold_bracket_holds_no_cycle_pair() {
    let a0 = alpha0(0.5).unwrap();
    assert!(find_cycle_fold(TauKind::Inv, a0, 0.5).is_err());
    assert!(find_cycle_fold(TauKind::Inv, -1.0, 0.5).is_err());
}

#[test]
fn fold_found_below_l1() {
    let a0 = alpha0(0.5).unwrap();
    let f = find_cycle_fold_in(TauKind::Inv, a0, 0.5, (-0.12, l1(0.5))).unwrap();
    assert!((f.derivative - 1.0).abs() < 1e-6);
    assert!(f.lambda > -0.105 && f.lambda < -0.095, "{f:?}");
}
