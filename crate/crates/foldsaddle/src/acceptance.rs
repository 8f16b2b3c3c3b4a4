//! Acceptance criteria and module invariant suites.
//!
//! Each check returns one [`Check`] with a pass flag and a short detail
//! string. Tolerances are the constants written inline.

use std::time::Instant;

use foldsaddle_core::bifurcation::{
    alpha0, class_count, classify_case, enumerate_cases, find_cycle_fold, find_cycle_fold_in, i1, l0, l1, l2, l2_printed,
    lambda0, m0, m1, m2, mu0, solve_connection_lambda, topological_class, Boundaries, CaseLabel, Regime, CLASSIFY_TOL,
};
use foldsaddle_core::family::upper_integral;
use foldsaddle_core::flow::{
    lower_return, numeric_arc, ratio_law_derivative, return_map, return_map_derivative, upper_return, ArcEnd, ReturnMap,
};
use foldsaddle_core::sigma::{direction, open_region, pseudo_equilibria, Region};
use foldsaddle_core::structures::{connection_defect, find_canard_cycles, find_canard_cycles_with, Connection};
use foldsaddle_core::{make_system, FilippovSystem, Point, Side, TauKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::svg::{expected_points, render_portrait, PortraitOptions};
use crate::tables::{read_csv, write_csv};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub id: String,
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
    pub seconds: f64,
}

impl std::fmt::Display for Check {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let tag = if self.pass { "PASS" } else { "FAIL" };
        write!(f, "{tag} [{}] {} ({:.2}s): {}", self.id, self.name, self.seconds, self.detail)
    }
}

fn timed(id: &str, name: &'static str, body: impl FnOnce() -> (bool, String)) -> Check {
    let t = Instant::now();
    let (pass, detail) = body();
    Check { id: id.to_string(), name, pass, detail, seconds: t.elapsed().as_secs_f64() }
}

pub const DEFAULT_SEED: u64 = 20_240_601;

fn beta_grid() -> impl Iterator<Item = f64> {
    (1..=8).map(|k| k as f64 / 10.0)
}

fn case_13_2_lambda() -> f64 {
    -0.5 + 11.0 * 6f64.sqrt() / 60.0
}

pub fn fixed_point() -> Check {
    timed("1", "fixed-point reproduction", || {
        let t = Instant::now();
        let sys = make_system(TauKind::Inv, case_13_2_lambda(), -1.0, 0.5).unwrap();
        let cycles = find_canard_cycles(&sys, (-1.0, 1.0));
        let secs = t.elapsed().as_secs_f64();
        let want = -(29.0f64 / 2.0).sqrt() / 10.0;
        let Some(c) = cycles.first() else { return (false, "no cycle found".into()) };
        let res = (return_map(&sys, c.fixed_abscissa).unwrap_or(f64::NAN) - c.fixed_abscissa).abs();
        let err = (c.fixed_abscissa - want).abs();
        let pass = cycles.len() == 1 && err < 1e-9 && res < 1e-10 && secs < 1.0;
        (pass, format!("cycles={} |x-x*|={err:.1e} |eta-x|={res:.1e} search={secs:.3}s", cycles.len()))
    })
}

pub fn stability_sign() -> Check {
    timed("2", "stability sign", || {
        let xs = -(29.0f64 / 2.0).sqrt() / 10.0;
        let sys = make_system(TauKind::Inv, case_13_2_lambda(), -1.0, 0.5).unwrap();
        let d = ratio_law_derivative(&sys, xs).unwrap_or(f64::NAN);
        // Independent oracle: the transversal ratio with the two reference X.f values.
        let x1 = upper_return(&sys, xs).map(|r| r.x1).unwrap_or(f64::NAN);
        let lower = lower_return(&sys, x1);
        let oracle = lower
            .map(|lr| {
                let y1 = sys.yf(x1);
                let y2 = sys.yf(lr.x1);
                (0.438671 / -0.245337) * (y1 / y2) * (lr.time * (1.0 + sys.alpha())).exp()
            })
            .unwrap_or(f64::NAN);
        let fd = return_map_derivative(&sys, xs).unwrap_or(f64::NAN);
        let label = classify_case(TauKind::Inv, case_13_2_lambda(), -1.0, 0.5, CLASSIFY_TOL).ok();
        let pass = (d - 1.78803).abs() < 1e-4 && (oracle - 1.78803).abs() < 1e-4 && d > 1.0 && label == Some(CaseLabel::new(13, 2));
        (pass, format!("eta'={d:.6} oracle={oracle:.6} fd={fd:.6} case={}", label.map(|l| l.to_string()).unwrap_or_default()))
    })
}

pub fn boundary_formulas() -> Check {
    timed("3", "boundary-formula cross-validation", || {
        let mut worst: f64 = 0.0;
        let mut failures = Vec::new();
        let mut check = |what: &str, a: f64, b: f64, solved: foldsaddle_core::Result<f64>, formula: f64| match solved {
            Ok(s) => {
                let e = (s - formula).abs();
                worst = worst.max(e);
                if e.is_nan() || e >= 1e-8 {
                    failures.push(format!("{what}(a={a},b={b}) off by {e:.1e}"));
                }
            }
            Err(e) => failures.push(format!("{what}(a={a},b={b}): {e}")),
        };
        let t = Instant::now();
        for b in beta_grid() {
            for a in [-0.5, -1.0, -1.8] {
                check("M0", a, b, solve_connection_lambda(TauKind::Inv, a, b, Connection::HI), m0(a, b));
                check("M1", a, b, solve_connection_lambda(TauKind::Inv, a, b, Connection::HJ), m1(b));
                check("M2", a, b, solve_connection_lambda(TauKind::Inv, a, b, Connection::IJ), m2(a, b));
            }
            let a0 = alpha0(b).unwrap();
            check("L0", a0, b, solve_connection_lambda(TauKind::Inv, a0, b, Connection::HI), l0(b));
            check("L1", a0, b, solve_connection_lambda(TauKind::Inv, a0, b, Connection::HJ), l1(b));
        }
        let secs = t.elapsed().as_secs_f64();
        let spots = (m0(-1.0, 0.5) + 0.271286).abs() < 1e-6
            && (m2(-1.0, 0.5) - 0.228714).abs() < 1e-6
            && (l1(0.5) + 0.0917517).abs() < 1e-7;
        let pass = failures.is_empty() && spots && secs < 10.0;
        let mut detail = format!("max |solved-formula|={worst:.1e} spot values {} in {secs:.2}s", if spots { "ok" } else { "off" });
        if !failures.is_empty() {
            detail.push_str(&format!("; {} failures: {}", failures.len(), failures.join("; ")));
        }
        (pass, detail)
    })
}

pub fn resonance_identities() -> Check {
    timed("4", "resonance identities", || {
        let mut worst_mu: f64 = 0.0;
        let mut worst: f64 = 0.0;
        for b in beta_grid() {
            let a0 = alpha0(b).unwrap();
            worst_mu = worst_mu.max((mu0(b).unwrap() - (a0 + 1.0)).abs());
            worst = worst.max((m0(a0, b) - l0(b)).abs());
            worst = worst.max((i1(a0, b) - l1(b)).abs());
            worst = worst.max((l1(b) - lambda0(b)).abs());
        }
        (worst_mu < 1e-12 && worst < 1e-9, format!("|mu0-alpha0-1|<={worst_mu:.1e} identities<={worst:.1e}"))
    })
}

pub fn l2_discrepancy() -> Check {
    timed("5", "L2 discrepancy handling", || {
        let a0 = alpha0(0.5).unwrap();
        let solved = l2(0.5).unwrap_or(f64::NAN);
        let spot = (solved - 0.1740408).abs() < 1e-6;
        let same = (solved - m2(a0, 0.5)).abs() < 1e-12;
        let b = Boundaries::new(TauKind::Inv, a0, 0.5, CLASSIFY_TOL).ok();
        let report = b.as_ref().map(crate::report::boundaries_json);
        let flagged = report.as_ref().is_some_and(|r| r["L2_printed"]["flagged"] == true);
        let printed = l2_printed(0.5);
        let pass = spot && same && flagged && (printed - 0.2027).abs() < 1e-3;
        (
            pass,
            format!(
                "oracle={solved:.7} (expected 0.1740408, |diff|={:.1e}) M2(alpha0)={:.7} closed-form L2={printed:.7} flagged={flagged}",
                (solved - 0.1740408).abs(),
                m2(a0, 0.5)
            ),
        )
    })
}

pub fn case_counting() -> Check {
    timed("6", "case counting", || {
        let mut counts = Vec::new();
        let mut missing = Vec::new();
        let mut pass = true;
        for (tau, want) in [(TauKind::Inv, [19, 21, 21]), (TauKind::Vis, [13, 13, 13])] {
            for (r, w) in Regime::for_tau(tau).into_iter().zip(want) {
                let got = enumerate_cases(tau, r);
                pass &= got.len() == w;
                counts.push(format!("{}={}/{w}", r.name(), got.len()));
                for k in 1..=r.case_count() {
                    let l = CaseLabel::new(k, r.theorem());
                    if !got.contains(&l) {
                        missing.push(l.to_string());
                    }
                }
            }
        }
        let (ci, cv) = (class_count(TauKind::Inv), class_count(TauKind::Vis));
        pass &= ci == 25 && cv == 39;
        let mut detail = format!("{} classes inv={ci} vis={cv}", counts.join(" "));
        if !missing.is_empty() {
            detail.push_str(&format!("; no witness for {}", missing.join(",")));
        }
        (pass, detail)
    })
}

// λ with exactly two η fixed points whose derivatives straddle 1.
fn two_cycle_lambda(alpha: f64, beta: f64, range: (f64, f64), n: usize) -> Option<(f64, f64, f64)> {
    (1..n).find_map(|k| {
        let l = range.0 + (range.1 - range.0) * k as f64 / n as f64;
        let sys = make_system(TauKind::Inv, l, alpha, beta).ok()?;
        let c = find_canard_cycles_with(&sys, (-1.0, 1.0), 2000);
        (c.len() == 2 && (c[0].derivative - 1.0) * (c[1].derivative - 1.0) < 0.0).then(|| (l, c[0].derivative, c[1].derivative))
    })
}

pub fn cycle_fold() -> Check {
    timed("7", "two-cycle window and cycle fold", || {
        let a0 = alpha0(0.5).unwrap();
        let (lo, hi) = (l1(0.5), l2(0.5).unwrap_or(f64::NAN));
        let in_bracket = two_cycle_lambda(a0, 0.5, (lo, hi), 200);
        let anywhere = two_cycle_lambda(a0, 0.5, (l0(0.5), hi), 400);
        let l3 = find_cycle_fold(TauKind::Inv, a0, 0.5);
        let m3 = find_cycle_fold(TauKind::Inv, -1.0, 0.5);
        let global = find_cycle_fold_in(TauKind::Inv, a0, 0.5, (l0(0.5), hi));
        let l3_ok = l3.as_ref().is_ok_and(|f| (f.derivative - 1.0).abs() < 1e-6 && f.lambda > -0.0918 && f.lambda < 0.1741);
        let m3_ok = m3.as_ref().is_ok_and(|f| (f.derivative - 1.0).abs() < 1e-6 && f.lambda > 0.0 && f.lambda < 0.228714);
        let pass = in_bracket.is_some() && l3_ok && m3_ok;
        let show = |r: &foldsaddle_core::Result<foldsaddle_core::bifurcation::CycleFold>| match r {
            Ok(f) => format!("{:.6} (eta'-1={:.1e})", f.lambda, f.derivative - 1.0),
            Err(e) => format!("none ({e})"),
        };
        let window = |w: Option<(f64, f64, f64)>| match w {
            Some((l, d1, d2)) => format!("lambda={l:.5} eta'={d1:.4},{d2:.4}"),
            None => "none".into(),
        };
        (
            pass,
            format!(
                "two-cycle window in (L1,L2): {}; in (L0,L2): {}; L3: {}; M3(-1,0.5): {}; fold over (L0,L2): {}",
                window(in_bracket),
                window(anywhere),
                show(&l3),
                show(&m3),
                show(&global)
            ),
        )
    })
}

pub fn h_identities() -> Check {
    timed("8", "exact H identities", || {
        let mut worst: f64 = 0.0;
        for beta in [0.1, 0.3, 0.5, 0.7] {
            let sys = make_system(TauKind::Vis, 0.0, -1.0, beta).unwrap();
            for k in 0..200 {
                let z = -0.995 + 0.01 * k as f64;
                if z.abs() < 1e-9 {
                    continue;
                }
                worst = worst.max((direction(&sys, z).unwrap_or(f64::NAN) - (1.0 - beta) / 2.0).abs());
            }
        }
        let mut worst_pe: f64 = 0.0;
        let mut found = 0;
        for (lambda, beta) in [(0.3, 0.5), (-0.4, 0.6), (0.5, 0.3), (0.2, 0.5), (-0.2, 0.4)] {
            let sys = make_system(TauKind::Vis, lambda, -1.0, beta).unwrap();
            let want = beta * lambda / (beta - 1.0);
            if let Some(p) = pseudo_equilibria(&sys, (-1.0, 1.0)).iter().min_by(|a, b| (a.abscissa - want).abs().total_cmp(&(b.abscissa - want).abs())) {
                found += 1;
                worst_pe = worst_pe.max((p.abscissa - want).abs());
            }
        }
        let pass = worst < 1e-12 && worst_pe < 1e-12 && found == 5;
        (pass, format!("max |H-(1-beta)/2|={worst:.1e}; pseudo-equilibria {found}/5 max err {worst_pe:.1e}"))
    })
}

fn random_system(rng: &mut ChaCha8Rng) -> FilippovSystem {
    let tau = if rng.random_bool(0.5) { TauKind::Inv } else { TauKind::Vis };
    let lambda = rng.random_range(-0.9..0.9);
    let alpha = rng.random_range(-1.9..-0.1);
    let beta = rng.random_range(-0.8..0.8);
    make_system(tau, lambda, alpha, beta).unwrap()
}

pub fn filippov_identity(seed: u64) -> Check {
    timed("9", "Filippov identity", || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut n = 0;
        let mut worst: f64 = 0.0;
        while n < 1000 {
            let sys = random_system(&mut rng);
            let x: f64 = rng.random_range(-1.0..1.0);
            if open_region(&sys, x).is_none() {
                continue;
            }
            let p = Point::on_sigma(x);
            let (d1, d2) = sys.upper_field(p);
            let (e1, e2) = sys.lower_field(p);
            let t = e2 / (e2 - d2);
            let combo = t * d1 + (1.0 - t) * e1;
            let h = direction(&sys, x).unwrap_or(f64::NAN);
            worst = worst.max((h - combo).abs() / combo.abs());
            n += 1;
        }
        (worst < 1e-12, format!("{n} points, max relative error {worst:.1e}"))
    })
}

pub fn integrator(seed: u64) -> Check {
    timed("10", "integrator cross-check", || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let (mut n, mut worst, mut errors) = (0, 0.0f64, 0);
        while n < 100 {
            let sys = random_system(&mut rng);
            let x0: f64 = rng.random_range(-1.0..1.0);
            let (side, closed) = if sys.xf(x0) > 1e-3 {
                (Side::Upper, upper_return(&sys, x0).map(|r| r.x1))
            } else if sys.yf(x0) < -1e-3 {
                (Side::Lower, lower_return(&sys, x0).map(|r| r.x1))
            } else {
                continue;
            };
            let Some(want) = closed else { continue };
            n += 1;
            match numeric_arc(&sys, side, Point::on_sigma(x0), 100.0) {
                Ok((arc, ArcEnd::Sigma)) => worst = worst.max((arc.end.x - want).abs()),
                _ => errors += 1,
            }
        }
        let mut drift: f64 = 0.0;
        let mut arcs = 0;
        while arcs < 100 {
            let beta = rng.random_range(0.05..0.8);
            let lambda = rng.random_range(-0.9..0.9);
            let sys = make_system(TauKind::Inv, lambda, -1.0, beta).unwrap();
            let x0 = rng.random_range(0.0..beta);
            if lower_return(&sys, x0).is_none() {
                continue;
            }
            arcs += 1;
            let g = |p: Point| p.x * p.x - (p.y + beta) * (p.y + beta);
            if let Ok((arc, _)) = numeric_arc(&sys, Side::Lower, Point::on_sigma(x0), 100.0) {
                let g0 = g(arc.start);
                drift = drift.max(arc.samples.iter().map(|&p| (g(p) - g0).abs()).fold(0.0, f64::max));
            } else {
                errors += 1;
            }
        }
        let pass = worst < 1e-6 && drift < 1e-10 && errors == 0;
        (pass, format!("{n} arcs max endpoint err {worst:.1e}; first-integral drift {drift:.1e} over {arcs} arcs; {errors} failures"))
    })
}

pub fn derivative_law() -> Check {
    timed("11", "derivative law", || {
        let sets = [(-0.2, -1.0, 0.5), (case_13_2_lambda(), -1.0, 0.5), (-0.1, alpha0(0.5).unwrap(), 0.5)];
        let mut worst: f64 = 0.0;
        let mut points = 0;
        for (l, a, b) in sets {
            let sys = make_system(TauKind::Inv, l, a, b).unwrap();
            let Some(rm) = ReturnMap::new(&sys) else { return (false, format!("no return map at lambda={l}")) };
            for k in 1..50 {
                let x0 = rm.domain.0 + (rm.domain.1 - rm.domain.0) * k as f64 / 50.0;
                let (Ok(exact), Ok(fd)) = (rm.derivative(x0), return_map_derivative(&sys, x0)) else { continue };
                worst = worst.max((exact - fd).abs() / exact.abs());
                points += 1;
            }
        }
        (worst < 1e-5 && points > 100, format!("{points} points, max relative diff {worst:.1e}"))
    })
}

pub fn output_smoke(seed: u64) -> Check {
    timed("12", "output smoke tests", || {
        let mut notes = Vec::new();
        let mut pass = true;
        for (l, a, b) in [(case_13_2_lambda(), -1.0, 0.5), (0.0, -1.0, 0.0)] {
            let sys = make_system(TauKind::Inv, l, a, b).unwrap();
            let svg = render_portrait(&sys, &PortraitOptions { fan: 5, ..Default::default() });
            match roxmltree::Document::parse(&svg) {
                Ok(doc) => {
                    let sigma = doc.descendants().filter(|n| n.attribute("class") == Some("sigma")).count();
                    let missing: Vec<_> = expected_points(&sys)
                        .into_iter()
                        .filter(|p| !doc.descendants().any(|n| n.attribute("id") == Some(&*format!("pt-{p}"))))
                        .collect();
                    pass &= sigma == 1 && missing.is_empty();
                    notes.push(format!("svg sigma={sigma} missing={missing:?}"));
                }
                Err(e) => {
                    pass = false;
                    notes.push(format!("svg parse error: {e}"));
                }
            }
        }
        let d = crate::sweep::sweep_grid(TauKind::Inv, -1.0, (-0.95, 0.95), (-0.8, 0.8), (20, 20));
        let mut buf = Vec::new();
        write_csv(&d, &mut buf).unwrap();
        match read_csv(&buf[..]) {
            Ok(rows) => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xc5f);
                let mut bad = 0;
                for _ in 0..100 {
                    let r = rows[rng.random_range(0..rows.len())];
                    let again = classify_case(TauKind::Inv, r.lambda, -1.0, r.beta, CLASSIFY_TOL).ok();
                    if again != r.case || r.case.map(topological_class).map(|c| c.representative) != r.class {
                        bad += 1;
                    }
                }
                pass &= bad == 0 && rows.len() == 400;
                notes.push(format!("csv rows={} reclassified mismatches={bad}/100", rows.len()));
            }
            Err(e) => {
                pass = false;
                notes.push(format!("csv read error: {e}"));
            }
        }
        (pass, notes.join("; "))
    })
}

pub fn criteria(seed: u64) -> Vec<Check> {
    vec![
        fixed_point(),
        stability_sign(),
        boundary_formulas(),
        resonance_identities(),
        l2_discrepancy(),
        case_counting(),
        cycle_fold(),
        h_identities(),
        filippov_identity(seed),
        integrator(seed),
        derivative_law(),
        output_smoke(seed),
    ]
}

/// Randomized invariant checks, one per core module.
pub fn invariants(seed: u64) -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x1417);
    let draws: Vec<FilippovSystem> = (0..300).map(|_| random_system(&mut rng)).collect();
    let mut out = Vec::new();
    out.push(timed("family", "fold abscissas are zeros of the Lie derivatives", || {
        let worst = draws
            .iter()
            .map(|s| s.xf(s.lambda()).abs().max(s.yf(i1(s.alpha(), s.beta())).abs()))
            .fold(0.0, f64::max);
        (worst < 1e-14, format!("max residual {worst:.1e}"))
    }));
    out.push(timed("sigma", "regions follow the sign of X.f and Y.f", || {
        let mut bad = 0;
        for s in &draws {
            for k in 0..40 {
                let x = -0.975 + 0.05 * k as f64;
                let (a, b) = (s.xf(x), s.yf(x));
                let want = if a > 0.0 && b < 0.0 {
                    Some(Region::Escaping)
                } else if a < 0.0 && b > 0.0 {
                    Some(Region::Sliding)
                } else {
                    None
                };
                if a * b != 0.0 && open_region(s, x) != want {
                    bad += 1;
                }
            }
        }
        (bad == 0, format!("{bad} mismatches"))
    }));
    out.push(timed("flow", "upper returns conserve the quadrature", || {
        let mut worst: f64 = 0.0;
        for s in draws.iter().filter(|s| s.tau() == TauKind::Inv) {
            for k in 1..10 {
                let x0 = s.lambda() - 0.05 * k as f64;
                if let Some(r) = upper_return(s, x0) {
                    let f0 = upper_integral(TauKind::Inv, x0 - s.lambda());
                    worst = worst.max((upper_integral(TauKind::Inv, r.x1 - s.lambda()) - f0).abs());
                }
            }
        }
        (worst < 1e-12, format!("max |F(u1)-F(u0)|={worst:.1e}"))
    }));
    out.push(timed("structures", "connection defects vanish on the boundary curves", || {
        let mut worst: f64 = 0.0;
        for k in 1..=7 {
            let b = k as f64 / 10.0;
            for a in [-0.3, -1.0, -1.6] {
                for (pair, l) in [(Connection::HI, m0(a, b)), (Connection::HJ, m1(b)), (Connection::IJ, m2(a, b))] {
                    let sys = make_system(TauKind::Inv, l, a, b).unwrap();
                    worst = worst.max(connection_defect(&sys, pair).map(f64::abs).unwrap_or(f64::INFINITY));
                }
            }
        }
        (worst < 1e-12, format!("max defect {worst:.1e}"))
    }));
    out.push(timed("bifurcation", "boundary ordering and class idempotence", || {
        let mut bad = 0;
        for _ in 0..300 {
            let b = rng.random_range(0.05..0.7);
            let a0 = alpha0(b).unwrap();
            let alpha = rng.random_range(a0..-0.05);
            if Boundaries::new(TauKind::Inv, alpha, b, CLASSIFY_TOL).is_err() {
                bad += 1;
            }
        }
        let idem = [TauKind::Inv, TauKind::Vis].iter().all(|&t| {
            foldsaddle_core::bifurcation::all_labels(t).into_iter().all(|l| {
                let c = topological_class(l);
                topological_class(c.representative) == c
            })
        });
        (bad == 0 && idem, format!("{bad} ordering violations; idempotent={idem}"))
    }));
    out.push(timed("cli", "config files parse", || {
        let ok = crate::config::parse("tau = inv # c\n\nbeta=0.5\n").map(|e| e.len() == 2).unwrap_or(false);
        (ok, "key = value with comments".into())
    }));
    out
}
