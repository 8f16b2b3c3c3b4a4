//! Canard cycles and Σ-graphs.

use alloc::vec::Vec;

use crate::family::{upper_integral, FilippovSystem, Point, TauKind, Visibility};
use crate::flow::{ratio_law_derivative, return_eval, upper_arc_closed, Arc, ArcSide, Method, ReturnMap};
use crate::roots::{bisect, golden_min};
use crate::sigma::{classify_point, RegionKind};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum CycleKind {
    I,
    II,
    III,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum CycleStability {
    Attractor,
    Repeller,
    Nonhyperbolic,
}

/// Tolerance on `|η' - 1|` below which a cycle counts as non-hyperbolic.
pub const HYPERBOLICITY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CanardCycle {
    /// Start of the upper arc on Σ (fixed point of η).
    pub fixed_abscissa: f64,
    /// Where the upper arc lands (start of the lower arc).
    pub upper_landing: f64,
    pub kind: CycleKind,
    pub derivative: f64,
    pub stability: CycleStability,
}

/// Which pair of Σ points an upper arc should join.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Connection {
    HI,
    HJ,
    IJ,
}

impl Connection {
    pub fn name(self) -> &'static str {
        match self {
            Connection::HI => "h->i",
            Connection::HJ => "h->j",
            Connection::IJ => "i->j",
        }
    }

    pub fn feet(self, alpha: f64, beta: f64) -> (f64, f64) {
        let i1 = crate::family::lower_fold_abscissa(alpha, beta);
        match self {
            Connection::HI => (-beta, i1),
            Connection::HJ => (-beta, beta),
            Connection::IJ => (i1, beta),
        }
    }
}

/// `F(u_to) - F(u_from)` for the upper-arc quadrature; zero exactly when an
/// orbit of `X` joins the two points.
pub fn connection_defect(system: &FilippovSystem, pair: Connection) -> Result<f64> {
    let b = system.beta();
    if !(b > 0.0) {
        return Err(Error::MissingPoint {
            name: match pair {
                Connection::IJ => "i",
                _ => "h",
            },
        });
    }
    let (from, to) = pair.feet(system.alpha(), b);
    Ok(defect_at(system.tau(), system.lambda(), from, to))
}

pub(crate) fn defect_at(tau: TauKind, lambda: f64, from: f64, to: f64) -> f64 {
    upper_integral(tau, to - lambda) - upper_integral(tau, from - lambda)
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct SigmaGraph {
    pub kind: CycleKind,
    pub vertices: Vec<(&'static str, Point)>,
    pub edges: Vec<Arc>,
}

fn segment(side: ArcSide, a: Point, b: Point, transit: f64) -> Arc {
    let n = 32;
    let samples = (0..=n)
        .map(|k| {
            let t = k as f64 / n as f64;
            Point::new(a.x + (b.x - a.x) * t, a.y + (b.y - a.y) * t)
        })
        .collect();
    Arc { side, start: a, end: b, transit, method: Method::ClosedForm, samples }
}

/// Saddle separatrices between the feet and `S`: σ1 (unstable, S to h) and
/// σ2 (stable, j to S). Both are straight segments.
pub fn separatrices(system: &FilippovSystem) -> Option<(Arc, Arc)> {
    let kp = system.key_points();
    let (h, j) = (kp.h?, kp.j?);
    let sigma1 = segment(ArcSide::Lower, kp.s, h, f64::INFINITY);
    let sigma2 = segment(ArcSide::Lower, j, kp.s, f64::INFINITY);
    Some((sigma1, sigma2))
}

/// The saddle-loop graph through `h` and `j`, or the visible-fold graph when
/// the visible fold sits on the lower fold.
pub fn find_sigma_graph(system: &FilippovSystem, tol: f64) -> Option<SigmaGraph> {
    let kp = system.key_points();
    let (h, j, i) = (kp.h?, kp.j?, kp.i()?);
    let (sigma1, sigma2) = separatrices(system)?;
    match system.tau() {
        TauKind::Inv => {
            let defect = connection_defect(system, Connection::HJ).ok()?;
            if defect.abs() >= tol {
                return None;
            }
            let mut gamma = upper_arc_closed(system, h.x)?;
            gamma.end = j;
            if let Some(last) = gamma.samples.last_mut() {
                *last = j;
            }
            Some(SigmaGraph {
                kind: CycleKind::I,
                vertices: alloc::vec![("h", h), ("j", j), ("S", kp.s)],
                edges: alloc::vec![gamma, sigma2, sigma1],
            })
        }
        TauKind::Vis => {
            if (system.lambda() - i.x).abs() >= tol {
                return None;
            }
            let d = kp.d;
            Some(SigmaGraph {
                kind: CycleKind::III,
                vertices: alloc::vec![("d", d), ("j", j), ("S", kp.s), ("h", h)],
                edges: alloc::vec![
                    segment(ArcSide::Sliding, d, j, f64::NAN),
                    sigma2,
                    sigma1,
                    segment(ArcSide::Sliding, h, d, f64::NAN),
                ],
            })
        }
    }
}

fn cycle_kind(system: &FilippovSystem, xs: &[f64]) -> CycleKind {
    let all_sewing = xs.iter().all(|&x| classify_point(system, x) == RegionKind::Sewing);
    if all_sewing {
        CycleKind::I
    } else {
        CycleKind::III
    }
}

fn make_cycle(system: &FilippovSystem, x: f64) -> Option<CanardCycle> {
    let e = return_eval(system, x).ok()?;
    let derivative = ratio_law_derivative(system, x).ok()?;
    let stability = if (derivative - 1.0).abs() < HYPERBOLICITY_TOL {
        CycleStability::Nonhyperbolic
    } else if derivative > 1.0 {
        CycleStability::Repeller
    } else {
        CycleStability::Attractor
    };
    Some(CanardCycle {
        fixed_abscissa: x,
        upper_landing: e.x1,
        kind: cycle_kind(system, &[x, e.x1]),
        derivative,
        stability,
    })
}

/// Scan resolution for fixed points of η.
pub const CYCLE_SCAN_STEP: f64 = 1e-3;

/// Fixed points of η inside `interval`, intersected with the return-map domain.
pub fn find_canard_cycles(system: &FilippovSystem, interval: (f64, f64)) -> Vec<CanardCycle> {
    find_canard_cycles_with(system, interval, 2000)
}

/// As [`find_canard_cycles`] with at least `min_samples` scan points.
pub fn find_canard_cycles_with(system: &FilippovSystem, interval: (f64, f64), min_samples: usize) -> Vec<CanardCycle> {
    let Some(rm) = ReturnMap::new(system) else {
        return Vec::new();
    };
    let lo = interval.0.max(rm.domain.0);
    let hi = interval.1.min(rm.domain.1);
    if !(lo < hi) {
        return Vec::new();
    }
    let g = |x: f64| rm.eval(x).map(|y| y - x).unwrap_or(f64::NAN);
    let n = (libm::ceil((hi - lo) / CYCLE_SCAN_STEP) as usize).max(min_samples);
    // Stay strictly inside the open domain.
    let xs: Vec<f64> = (0..=n).map(|k| lo + (hi - lo) * (k as f64 + 0.5) / (n as f64 + 1.0)).collect();
    let gs: Vec<f64> = xs.iter().map(|&x| g(x)).collect();
    let mut roots = Vec::new();
    for k in 0..n {
        let (ga, gb) = (gs[k], gs[k + 1]);
        if !(ga.is_finite() && gb.is_finite()) {
            continue;
        }
        if ga == 0.0 {
            roots.push(xs[k]);
        } else if ga.signum() != gb.signum() && gb != 0.0 {
            if let Ok(r) = bisect(g, xs[k], xs[k + 1], 0.0) {
                roots.push(r);
            }
        }
    }
    // Close pairs: a same-sign dip of |g| may hide two roots between samples.
    for k in 1..n {
        let (ga, gm, gb) = (gs[k - 1], gs[k], gs[k + 1]);
        if !(ga.is_finite() && gm.is_finite() && gb.is_finite()) {
            continue;
        }
        if ga.signum() == gm.signum() && gm.signum() == gb.signum() && gm.abs() < ga.abs() && gm.abs() < gb.abs() {
            let s = gm.signum();
            let xm = golden_min(|x| s * g(x), xs[k - 1], xs[k + 1], 1e-13);
            let gx = g(xm);
            if gx.abs() < 1e-12 {
                roots.push(xm);
            } else if gx.signum() != s {
                if let Ok(r) = bisect(g, xs[k - 1], xm, 0.0) {
                    roots.push(r);
                }
                if let Ok(r) = bisect(g, xm, xs[k + 1], 0.0) {
                    roots.push(r);
                }
            }
        }
    }
    roots.sort_by(|a, b| a.total_cmp(b));
    roots.dedup_by(|a, b| (*a - *b).abs() < 1e-10);
    roots.into_iter().filter_map(|x| make_cycle(system, x)).collect()
}

/// One-sided behavior of η near a tangency endpoint of its domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum OneSided {
    Attracting,
    Repelling,
}

/// Sign of `η(x) - x` just left of the right end of the return-map domain.
/// `Attracting` means orbits there move toward the endpoint.
pub fn right_end_behavior(system: &FilippovSystem) -> Option<OneSided> {
    let rm = ReturnMap::new(system)?;
    let (a, b) = rm.domain;
    let mut votes = 0i32;
    for k in 1..=5 {
        let x = b - (b - a) * 1e-3 * k as f64;
        let v = rm.eval(x).ok()? - x;
        votes += if v > 0.0 { 1 } else { -1 };
    }
    Some(if votes > 0 { OneSided::Attracting } else { OneSided::Repelling })
}

/// Visibility of the upper fold, for reports.
pub fn upper_fold_visibility(tau: TauKind) -> Visibility {
    match tau {
        TauKind::Inv => Visibility::Invisible,
        TauKind::Vis => Visibility::Visible,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::make_system;
    use crate::flow::{integrate, return_map, Termination};
    use crate::math::sqrt;

    #[test]
    fn defect_examples() {
        let l1 = -0.5 + sqrt(6.0) / 6.0;
        let s = make_system(TauKind::Inv, l1, -1.0, 0.5).unwrap();
        assert!(connection_defect(&s, Connection::HJ).unwrap().abs() < 1e-10);
        let s = make_system(TauKind::Inv, -0.271_286, -1.0, 0.5).unwrap();
        assert!(connection_defect(&s, Connection::HI).unwrap().abs() < 1e-6);
        let s = make_system(TauKind::Inv, 0.0, -1.0, 0.5).unwrap();
        assert!((connection_defect(&s, Connection::HJ).unwrap() - 1.0 / 12.0).abs() < 1e-15);
        let s = make_system(TauKind::Inv, 0.0, -1.0, -0.2).unwrap();
        assert!(matches!(connection_defect(&s, Connection::HJ), Err(Error::MissingPoint { .. })));
    }

    #[test]
    fn graphs() {
        let l1 = -0.5 + sqrt(6.0) / 6.0;
        for a in [-0.5, -1.0, -1.8] {
            let s = make_system(TauKind::Inv, l1, a, 0.5).unwrap();
            let g = find_sigma_graph(&s, 1e-9).unwrap();
            assert_eq!(g.kind, CycleKind::I);
            assert!((g.edges[0].end.x - 0.5).abs() < 1e-12);
        }
        let s = make_system(TauKind::Vis, 0.0, -1.0, 0.5).unwrap();
        assert_eq!(find_sigma_graph(&s, 1e-9).unwrap().kind, CycleKind::III);
        let s = make_system(TauKind::Inv, 0.4, -1.0, 0.5).unwrap();
        assert!(find_sigma_graph(&s, 1e-9).is_none());
    }

    #[test]
    fn unique_cycle_thirteen_two() {
        let l = -0.5 + 11.0 * sqrt(6.0) / 60.0;
        let s = make_system(TauKind::Inv, l, -1.0, 0.5).unwrap();
        let c = find_canard_cycles(&s, (-1.0, 1.0));
        assert_eq!(c.len(), 1);
        let xs = -sqrt(29.0 / 2.0) / 10.0;
        assert!((c[0].fixed_abscissa - xs).abs() < 1e-9);
        assert_eq!(c[0].kind, CycleKind::I);
        assert_eq!(c[0].stability, CycleStability::Repeller);
        assert!((return_map(&s, c[0].fixed_abscissa).unwrap() - c[0].fixed_abscissa).abs() < 1e-10);
        let tr = integrate(&s, Point::on_sigma(c[0].fixed_abscissa), 100.0).unwrap();
        assert_eq!(tr.termination, Termination::Closed);
    }

    #[test]
    fn no_cycles_in_eleven_two() {
        let s = make_system(TauKind::Inv, -0.2, -1.0, 0.5).unwrap();
        assert!(find_canard_cycles(&s, (-1.0, 1.0)).is_empty());
    }

    #[test]
    fn attractor_in_thirteen_three() {
        let s = make_system(TauKind::Inv, -0.1, -1.8, 0.5).unwrap();
        let c = find_canard_cycles(&s, (-1.0, 1.0));
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].stability, CycleStability::Attractor);
    }
}
