//! Orbit arcs, Filippov trajectories and the first-return map on Σ.

use alloc::vec::Vec;

use crate::family::{upper_integral, FilippovSystem, Point, Side, TauKind, Visibility};
use crate::math::{exp, ln, sqrt};
use crate::roots::bisect;
use crate::sigma::{classify_point, direction, open_region, Region, RegionKind, ZERO_TOL};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum ArcSide {
    Upper,
    Lower,
    Sliding,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Method {
    ClosedForm,
    Numeric,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Arc {
    pub side: ArcSide,
    pub start: Point,
    pub end: Point,
    /// Elapsed time. Upper arcs have `ẋ = 1`, so this is also `Δx` there.
    /// Infinite for sliding arcs that approach a pseudo-equilibrium.
    pub transit: f64,
    pub method: Method,
    /// Polyline through the arc, endpoints included.
    pub samples: Vec<Point>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Termination {
    WindowExit,
    TimeLimit,
    PseudoEquilibrium,
    EscapingNonunique,
    Closed,
    Equilibrium,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Trajectory {
    pub arcs: Vec<Arc>,
    pub termination: Termination,
}

impl Trajectory {
    /// Abscissas where the trajectory meets Σ, in order.
    pub fn sigma_hits(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for a in &self.arcs {
            if a.start.y == 0.0 && out.last() != Some(&a.start.x) {
                out.push(a.start.x);
            }
            if a.end.y == 0.0 {
                out.push(a.end.x);
            }
        }
        out
    }
}

const ARC_SAMPLES: usize = 64;

/// Closed-form upper arc from `(x0, 0)` back to Σ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpperReturn {
    pub x1: f64,
    pub peak: f64,
}

/// Landing abscissa of the upper arc leaving `(x0, 0)`.
pub fn x_return(system: &FilippovSystem, x0: f64) -> Option<f64> {
    upper_return(system, x0).map(|r| r.x1)
}

pub fn upper_return(system: &FilippovSystem, x0: f64) -> Option<UpperReturn> {
    if system.tau() != TauKind::Inv {
        return None;
    }
    let lambda = system.lambda();
    let u0 = x0 - lambda;
    if u0 == 0.0 {
        return Some(UpperReturn { x1: x0, peak: 0.0 });
    }
    // X.f > 0 and a return needs F(u0) > F(1) = -1/6, i.e. -1/2 < u0 < 0.
    if !(u0 < 0.0 && u0 > -0.5) {
        return None;
    }
    let tau = system.tau();
    let f0 = upper_integral(tau, u0);
    let u1 = bisect(|u| upper_integral(tau, u) - f0, 0.0, 1.0, 0.0).ok()?;
    let x1 = lambda + u1;
    let peak = -f0;
    let w = system.window;
    if x0 < w.xmin || x1 > w.xmax || peak > w.ymax {
        return None;
    }
    Some(UpperReturn { x1, peak })
}

/// Closed-form lower arc from `(x0, 0)` back to Σ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LowerReturn {
    pub x1: f64,
    pub time: f64,
    pub trough: f64,
}

pub fn y_return(system: &FilippovSystem, x0: f64) -> Option<f64> {
    lower_return(system, x0).map(|r| r.x1)
}

/// Solves `(x0+β)e^{αt} - (x0-β)e^t = 2β` for the first `t > 0` using the
/// eigen-coordinates `p = x+y+β`, `q = x-y-β` (`ṗ = αp`, `q̇ = q`).
pub fn lower_return(system: &FilippovSystem, x0: f64) -> Option<LowerReturn> {
    let (al, b) = (system.alpha(), system.beta());
    if !(system.yf(x0) < 0.0) {
        return None;
    }
    let p0 = x0 + b;
    let q0 = x0 - b;
    if !(p0 > 0.0 && q0 < 0.0) {
        return None;
    }
    let g = |t: f64| p0 * exp(al * t) - q0 * exp(t) - 2.0 * b;
    // g(0) = 0 and g'(0) = 2 Y.f < 0; g has a single minimum at t_m.
    let t_m = ln(al * p0 / q0) / (1.0 - al);
    let g_m = g(t_m);
    if !(t_m > 0.0 && g_m < 0.0) {
        return None;
    }
    let mut step = 1.0;
    let mut hi = t_m + step;
    while g(hi) <= 0.0 {
        step *= 2.0;
        hi = t_m + step;
        if step > 1e6 {
            return None;
        }
    }
    let t = bisect(g, t_m, hi, 0.0).ok()?;
    let x1 = 0.5 * (p0 * exp(al * t) + q0 * exp(t));
    let trough = 0.5 * g_m;
    let w = system.window;
    if x1 < w.xmin || x0 > w.xmax || trough < w.ymin {
        return None;
    }
    Some(LowerReturn { x1, time: t, trough })
}

fn lower_point(system: &FilippovSystem, x0: f64, t: f64) -> Point {
    let (al, b) = (system.alpha(), system.beta());
    let p = (x0 + b) * exp(al * t);
    let q = (x0 - b) * exp(t);
    Point::new(0.5 * (p + q), 0.5 * (p - q) - b)
}

/// Closed-form upper arc between two points of Σ.
pub fn upper_arc_closed(system: &FilippovSystem, x0: f64) -> Option<Arc> {
    let r = upper_return(system, x0)?;
    let tau = system.tau();
    let u0 = x0 - system.lambda();
    let f0 = upper_integral(tau, u0);
    let mut samples = Vec::with_capacity(ARC_SAMPLES + 1);
    for k in 0..=ARC_SAMPLES {
        let x = x0 + (r.x1 - x0) * k as f64 / ARC_SAMPLES as f64;
        let y = if k == 0 || k == ARC_SAMPLES { 0.0 } else { upper_integral(tau, x - system.lambda()) - f0 };
        samples.push(Point::new(x, y));
    }
    Some(Arc {
        side: ArcSide::Upper,
        start: Point::on_sigma(x0),
        end: Point::on_sigma(r.x1),
        transit: r.x1 - x0,
        method: Method::ClosedForm,
        samples,
    })
}

/// Closed-form lower arc between two points of Σ.
pub fn lower_arc_closed(system: &FilippovSystem, x0: f64) -> Option<Arc> {
    let r = lower_return(system, x0)?;
    let mut samples = Vec::with_capacity(ARC_SAMPLES + 1);
    for k in 0..=ARC_SAMPLES {
        let t = r.time * k as f64 / ARC_SAMPLES as f64;
        let mut p = lower_point(system, x0, t);
        if k == 0 {
            p = Point::on_sigma(x0);
        } else if k == ARC_SAMPLES {
            p = Point::on_sigma(r.x1);
        }
        samples.push(p);
    }
    Some(Arc {
        side: ArcSide::Lower,
        start: Point::on_sigma(x0),
        end: Point::on_sigma(r.x1),
        transit: r.time,
        method: Method::ClosedForm,
        samples,
    })
}

/// How a sliding arc ends.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlideExit {
    /// Reached a tangency of `side` and leaves Σ along that field.
    Fold { side: Side, visibility: Visibility },
    /// Converges to a zero of `H` (never reached in finite time).
    PseudoEquilibrium,
    /// Hit the window edge.
    WindowEdge,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Slide {
    pub arc: Arc,
    pub exit: SlideExit,
}

/// Follows `ẋ = H(x)` from a sliding point until it leaves the sliding region.
pub fn slide_arc(system: &FilippovSystem, x0: f64) -> Slide {
    let h = |x: f64| direction(system, x).unwrap_or(f64::NAN);
    let h0 = h(x0);
    let stop = |end: f64, transit: f64, exit: SlideExit| {
        let n = 32;
        let samples = (0..=n).map(|k| Point::on_sigma(x0 + (end - x0) * k as f64 / n as f64)).collect();
        Slide {
            arc: Arc {
                side: ArcSide::Sliding,
                start: Point::on_sigma(x0),
                end: Point::on_sigma(end),
                transit,
                method: Method::Numeric,
                samples,
            },
            exit,
        }
    };
    if !h0.is_finite() || h0.abs() < ZERO_TOL {
        return stop(x0, 0.0, SlideExit::PseudoEquilibrium);
    }
    let s = h0.signum();
    let w = system.window;
    let edge = if s > 0.0 { w.xmax } else { w.xmin };
    let step = 1e-3;
    let mut xa = x0;
    loop {
        let mut xb = xa + s * step;
        let at_edge = (xb - edge) * s >= 0.0;
        if at_edge {
            xb = edge;
        }
        let in_region = open_region(system, xb) == Some(Region::Sliding);
        let hb = h(xb);
        if in_region && hb.is_finite() && hb.signum() == s {
            if at_edge {
                return stop(edge, slide_time(system, x0, edge), SlideExit::WindowEdge);
            }
            xa = xb;
            continue;
        }
        if in_region {
            // H changes sign inside the region: pseudo-equilibrium ahead.
            let r = bisect(h, xa, xb, ZERO_TOL).unwrap_or(xb);
            return stop(r, f64::INFINITY, SlideExit::PseudoEquilibrium);
        }
        // Region boundary: one of the Lie derivatives vanishes in (xa, xb].
        let xf_flips = system.xf(xa).signum() != system.xf(xb).signum();
        let side = if xf_flips { Side::Upper } else { Side::Lower };
        let fold = if xf_flips {
            bisect(|x| system.xf(x), xa, xb, 0.0).unwrap_or(xb)
        } else {
            bisect(|x| system.yf(x), xa, xb, 0.0).unwrap_or(xb)
        };
        let visibility = system.fold_kind(side, Point::on_sigma(fold)).unwrap_or(Visibility::Invisible);
        return stop(fold, slide_time(system, x0, fold), SlideExit::Fold { side, visibility });
    }
}

// ∫ dx / H by composite Simpson.
fn slide_time(system: &FilippovSystem, a: f64, b: f64) -> f64 {
    let n = 512;
    let hs = (b - a) / n as f64;
    let inv = |x: f64| 1.0 / direction(system, x).unwrap_or(f64::NAN);
    let mut acc = inv(a) + inv(b);
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * inv(a + hs * k as f64);
    }
    (acc * hs / 3.0).abs()
}

// Dormand-Prince 5(4) tableau.
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

fn dp_step<F: Fn(Point) -> (f64, f64)>(f: &F, z: Point, h: f64) -> (Point, f64) {
    let mut k = [(0.0, 0.0); 7];
    for i in 0..7 {
        let mut x = z.x;
        let mut y = z.y;
        for (j, kj) in k.iter().enumerate().take(i) {
            x += h * A[i][j] * kj.0;
            y += h * A[i][j] * kj.1;
        }
        k[i] = f(Point::new(x, y));
    }
    let mut x5 = z.x;
    let mut y5 = z.y;
    let mut ex = 0.0;
    let mut ey = 0.0;
    for i in 0..7 {
        x5 += h * B5[i] * k[i].0;
        y5 += h * B5[i] * k[i].1;
        ex += h * (B5[i] - B4[i]) * k[i].0;
        ey += h * (B5[i] - B4[i]) * k[i].1;
    }
    let znew = Point::new(x5, y5);
    let sx = 1e-13 + 1e-12 * z.x.abs().max(x5.abs());
    let sy = 1e-13 + 1e-12 * z.y.abs().max(y5.abs());
    (znew, (ex / sx).abs().max((ey / sy).abs()))
}

/// How a numeric arc ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArcEnd {
    Sigma,
    WindowExit,
    TimeLimit,
}

/// Integrates the field of `side` from `start` until the orbit reaches Σ
/// (from its own half-plane), leaves the window, or `max_time` elapses.
/// The Σ event is localized by bisection on the step length until `|y| < 1e-12`.
pub fn numeric_arc(system: &FilippovSystem, side: Side, start: Point, max_time: f64) -> Result<(Arc, ArcEnd)> {
    let f = |p: Point| system.field(side, p);
    let sgn = match side {
        Side::Upper => 1.0,
        Side::Lower => -1.0,
    };
    let w = system.window;
    let mut t = 0.0;
    let mut z = start;
    let mut h: f64 = 1e-3;
    let mut samples = alloc::vec![start];
    let mut left_sigma = start.y * sgn > 0.0;
    let finish = |samples: Vec<Point>, end: Point, t: f64, how: ArcEnd| {
        (
            Arc { side: match side {
                Side::Upper => ArcSide::Upper,
                Side::Lower => ArcSide::Lower,
            }, start, end, transit: t, method: Method::Numeric, samples },
            how,
        )
    };
    for _ in 0..2_000_000 {
        if t >= max_time {
            return Ok(finish(samples, z, t, ArcEnd::TimeLimit));
        }
        let hh = h.min(max_time - t).min(0.05);
        let (zn, err) = dp_step(&f, z, hh);
        if err > 1.0 {
            h = hh * (0.9 * libm::pow(err, -0.2)).max(0.1);
            if h < 1e-14 {
                return Err(Error::StepFailure { t });
            }
            continue;
        }
        let crossed = left_sigma && zn.y * sgn <= 0.0;
        if crossed {
            // Bisect on the step length for the Σ event.
            let (mut lo, mut hi) = (0.0, hh);
            let mut zc = zn;
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                let (zm, _) = dp_step(&f, z, mid);
                zc = zm;
                if zm.y.abs() < 1e-12 {
                    hi = mid;
                    break;
                }
                if zm.y * sgn > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
                if hi - lo < 1e-16 {
                    break;
                }
            }
            if zc.y.abs() > 1e-9 {
                return Err(Error::StepFailure { t });
            }
            let end = Point::on_sigma(zc.x);
            samples.push(end);
            return Ok(finish(samples, end, t + hi, ArcEnd::Sigma));
        }
        if !w.contains(zn) {
            let (mut lo, mut hi) = (0.0, hh);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if w.contains(dp_step(&f, z, mid).0) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let (ze, _) = dp_step(&f, z, lo);
            samples.push(ze);
            return Ok(finish(samples, ze, t + lo, ArcEnd::WindowExit));
        }
        t += hh;
        z = zn;
        samples.push(z);
        if z.y * sgn > 0.0 {
            left_sigma = true;
        }
        let fac = if err == 0.0 { 5.0 } else { (0.9 * libm::pow(err, -0.2)).clamp(0.2, 5.0) };
        h = hh * fac;
    }
    Err(Error::StepFailure { t })
}

const CLOSE_TOL: f64 = 1e-9;
const NUDGE: f64 = 1e-10;

/// Filippov trajectory from `start` for at most `max_time`.
pub fn integrate(system: &FilippovSystem, start: Point, max_time: f64) -> Result<Trajectory> {
    let s = system.key_points().s;
    if (start.x - s.x).abs() < 1e-12 && (start.y - s.y).abs() < 1e-12 {
        return Ok(Trajectory { arcs: Vec::new(), termination: Termination::Equilibrium });
    }
    let mut arcs: Vec<Arc> = Vec::new();
    let mut visited: Vec<(f64, ArcSide)> = Vec::new();
    if start.y == 0.0 {
        visited.push((start.x, ArcSide::Lower));
        visited.push((start.x, ArcSide::Upper));
    }
    let mut pos = start;
    let mut t = 0.0;
    let done = |arcs: Vec<Arc>, termination| Ok(Trajectory { arcs, termination });
    for _ in 0..10_000 {
        if t >= max_time {
            return done(arcs, Termination::TimeLimit);
        }
        if !system.window.contains(pos) {
            return done(arcs, Termination::WindowExit);
        }
        let arc = if pos.y != 0.0 {
            let side = if pos.y > 0.0 { Side::Upper } else { Side::Lower };
            let (arc, end) = numeric_arc(system, side, pos, max_time - t)?;
            t += arc.transit;
            pos = arc.end;
            arcs.push(arc);
            match end {
                ArcEnd::Sigma => continue,
                ArcEnd::WindowExit => return done(arcs, Termination::WindowExit),
                ArcEnd::TimeLimit => return done(arcs, Termination::TimeLimit),
            }
        } else {
            let x = pos.x;
            match classify_point(system, x) {
                RegionKind::BoundaryEquilibrium => return done(arcs, Termination::Equilibrium),
                RegionKind::Escaping => return done(arcs, Termination::EscapingNonunique),
                RegionKind::PseudoEquilibrium(_) => {
                    arcs.push(slide_arc(system, x).arc);
                    return done(arcs, Termination::PseudoEquilibrium);
                }
                RegionKind::Sliding => {
                    let slide = slide_arc(system, x);
                    let end = slide.arc.end;
                    t += slide.arc.transit;
                    arcs.push(slide.arc);
                    match slide.exit {
                        SlideExit::PseudoEquilibrium => return done(arcs, Termination::PseudoEquilibrium),
                        SlideExit::WindowEdge => return done(arcs, Termination::WindowExit),
                        SlideExit::Fold { side, visibility } => {
                            pos = end;
                            if visibility == Visibility::Visible {
                                let (arc, how) = numeric_arc(system, side, pos, max_time - t)?;
                                t += arc.transit;
                                pos = arc.end;
                                arcs.push(arc);
                                match how {
                                    ArcEnd::Sigma => {}
                                    ArcEnd::WindowExit => return done(arcs, Termination::WindowExit),
                                    ArcEnd::TimeLimit => return done(arcs, Termination::TimeLimit),
                                }
                            } else {
                                // Invisible fold: continue past it on Σ.
                                let dir = direction(system, end.x).map(|v| v.signum()).unwrap_or(1.0);
                                pos = Point::on_sigma(end.x + dir * NUDGE);
                            }
                        }
                    }
                    continue;
                }
                RegionKind::Tangency { side, visibility } => {
                    if visibility == Visibility::Visible {
                        let (arc, how) = numeric_arc(system, side, pos, max_time - t)?;
                        t += arc.transit;
                        pos = arc.end;
                        arcs.push(arc);
                        match how {
                            ArcEnd::Sigma => continue,
                            ArcEnd::WindowExit => return done(arcs, Termination::WindowExit),
                            ArcEnd::TimeLimit => return done(arcs, Termination::TimeLimit),
                        }
                    }
                    let vx = match side {
                        Side::Upper => system.upper_field(pos).0,
                        Side::Lower => system.lower_field(pos).0,
                    };
                    pos = Point::on_sigma(x + vx.signum() * NUDGE);
                    continue;
                }
                RegionKind::Sewing => {
                    if system.xf(x) > 0.0 {
                        match upper_arc_closed(system, x) {
                            Some(a) => a,
                            None => {
                                let (arc, how) = numeric_arc(system, Side::Upper, pos, max_time - t)?;
                                t += arc.transit;
                                pos = arc.end;
                                arcs.push(arc);
                                match how {
                                    ArcEnd::Sigma => continue,
                                    ArcEnd::WindowExit => return done(arcs, Termination::WindowExit),
                                    ArcEnd::TimeLimit => return done(arcs, Termination::TimeLimit),
                                }
                            }
                        }
                    } else {
                        match lower_arc_closed(system, x) {
                            Some(a) => a,
                            None => {
                                let (arc, how) = numeric_arc(system, Side::Lower, pos, max_time - t)?;
                                t += arc.transit;
                                pos = arc.end;
                                arcs.push(arc);
                                match how {
                                    ArcEnd::Sigma => continue,
                                    ArcEnd::WindowExit => return done(arcs, Termination::WindowExit),
                                    ArcEnd::TimeLimit => return done(arcs, Termination::TimeLimit),
                                }
                            }
                        }
                    }
                }
            }
        };
        // Closed-form Σ-to-Σ arc.
        let key = (arc.end.x, arc.side);
        t += arc.transit;
        pos = arc.end;
        arcs.push(arc);
        if visited.iter().any(|(x, s)| *s == key.1 && (x - key.0).abs() < CLOSE_TOL) {
            return done(arcs, Termination::Closed);
        }
        visited.push(key);
    }
    done(arcs, Termination::TimeLimit)
}

/// Forward first-return map `η = y_return ∘ x_return` on Σ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReturnMap {
    pub system: FilippovSystem,
    /// Open interval of starting abscissas where η is defined.
    pub domain: (f64, f64),
}

/// One evaluation of η with the intermediate data the ratio law needs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReturnEval {
    pub x0: f64,
    pub x1: f64,
    pub x2: f64,
    pub lower_time: f64,
}

pub fn return_eval(system: &FilippovSystem, x0: f64) -> Result<ReturnEval> {
    let x1 = x_return(system, x0).ok_or(Error::OutsideDomain { x: x0 })?;
    if !(system.xf(x1) < 0.0 && system.yf(x1) < 0.0) {
        return Err(Error::OutsideDomain { x: x0 });
    }
    let lr = lower_return(system, x1).ok_or(Error::OutsideDomain { x: x0 })?;
    Ok(ReturnEval { x0, x1, x2: lr.x1, lower_time: lr.time })
}

pub fn return_map(system: &FilippovSystem, x0: f64) -> Result<f64> {
    return_eval(system, x0).map(|e| e.x2)
}

/// Central finite difference of η with step `1e-6`.
pub fn return_map_derivative(system: &FilippovSystem, x0: f64) -> Result<f64> {
    let h = 1e-6;
    let a = return_map(system, x0 - h)?;
    let b = return_map(system, x0 + h)?;
    Ok((b - a) / (2.0 * h))
}

/// η' from the transversal ratio law
/// `[X.f(x0)/X.f(x1)]·[Y.f(x1)/Y.f(x2)]·e^{(1+α)t_Y}`.
pub fn ratio_law_derivative(system: &FilippovSystem, x0: f64) -> Result<f64> {
    let e = return_eval(system, x0)?;
    let up = system.xf(e.x0) / system.xf(e.x1);
    let down = system.yf(e.x1) / system.yf(e.x2) * exp((1.0 + system.alpha()) * e.lower_time);
    Ok(up * down)
}

// Smallest root of 2u² + (2v-3)u + (2v²-3v): the partner of v on the same
// level of the upper integral.
fn upper_partner(v: f64) -> f64 {
    ((3.0 - 2.0 * v) - sqrt(9.0 + 12.0 * v - 12.0 * v * v)) / 4.0
}

impl ReturnMap {
    /// Domain of η: starting points whose upper arc lands in the crossing
    /// region between the lower fold and `j`. `None` when empty.
    pub fn new(system: &FilippovSystem) -> Option<Self> {
        if system.tau() != TauKind::Inv || !(system.beta() > 0.0) {
            return None;
        }
        let lambda = system.lambda();
        let kp = system.key_points();
        let i1 = kp.e_or_i.map(|p| p.x).unwrap_or(0.0);
        let lo1 = lambda.max(i1);
        let hi1 = system.beta().min(lambda + 1.0).min(system.window.xmax);
        if !(lo1 < hi1) {
            return None;
        }
        let a = lambda + upper_partner(hi1 - lambda);
        let b = lambda + upper_partner(lo1 - lambda);
        let a = a.max(system.window.xmin);
        if !(a < b) {
            return None;
        }
        Some(ReturnMap { system: *system, domain: (a, b) })
    }

    pub fn eval(&self, x0: f64) -> Result<f64> {
        return_map(&self.system, x0)
    }

    pub fn derivative(&self, x0: f64) -> Result<f64> {
        ratio_law_derivative(&self.system, x0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::make_system;

    fn inv(l: f64, a: f64, b: f64) -> FilippovSystem {
        make_system(TauKind::Inv, l, a, b).unwrap()
    }

    #[test]
    fn x_return_examples() {
        let s = inv(0.0, -1.0, 0.5);
        assert!((x_return(&s, -0.1).unwrap() - 0.107_179_68).abs() < 1e-7);
        let s = inv(-0.050927, -1.0, 0.5);
        assert!((x_return(&s, -0.380789).unwrap() - 0.380789).abs() < 1e-5);
        let s = inv(0.3, -1.0, 0.5);
        assert_eq!(x_return(&s, 0.3), Some(0.3));
    }

    #[test]
    fn x_return_matches_deflated_quadratic() {
        let s = inv(0.1, -1.0, 0.5);
        for k in 1..50 {
            let u0 = -0.5 * k as f64 / 50.0;
            let u1 = x_return(&s, 0.1 + u0).unwrap() - 0.1;
            let disc = -12.0 * u0 * u0 + 12.0 * u0 + 9.0;
            let oracle = ((3.0 - 2.0 * u0) - sqrt(disc)) / 4.0;
            assert!((u1 - oracle).abs() < 1e-12, "{u0}");
        }
    }

    #[test]
    fn vis_upper_never_returns() {
        let s = make_system(TauKind::Vis, 0.0, -1.0, 0.5).unwrap();
        assert_eq!(x_return(&s, 0.2), None);
    }

    #[test]
    fn y_return_examples() {
        let s = inv(0.0, -1.0, 0.5);
        assert!((y_return(&s, 0.3).unwrap() + 0.3).abs() < 1e-12);
        let r = lower_return(&s, 0.4).unwrap();
        assert!((r.x1 + 0.4).abs() < 1e-12);
        assert!((exp(r.time) - 9.0).abs() < 1e-10);
        assert_eq!(y_return(&s, 0.5), None);
    }

    #[test]
    fn y_return_needs_downward_departure() {
        let s = inv(0.0, -0.5, 0.5);
        assert_eq!(y_return(&s, 0.1), None);
        assert!(y_return(&s, 0.3).is_some());
    }

    #[test]
    fn return_map_composition() {
        let s = inv(0.0, -1.0, 0.5);
        assert!((return_map(&s, -0.2).unwrap() + 0.231_53).abs() < 1e-5);
    }

    #[test]
    fn fixed_point_thirteen_two() {
        let l = -0.5 + 11.0 * sqrt(6.0) / 60.0;
        let s = inv(l, -1.0, 0.5);
        let xs = -sqrt(29.0 / 2.0) / 10.0;
        assert!((return_map(&s, xs).unwrap() - xs).abs() < 1e-12);
        assert!((return_map(&s, -0.3).unwrap() + 0.3).abs() > 1e-3);
        let d = ratio_law_derivative(&s, xs).unwrap();
        assert!((d - 1.78803).abs() < 1e-4);
        let fd = return_map_derivative(&s, xs).unwrap();
        assert!((fd - d).abs() / d < 1e-5);
    }

    #[test]
    fn derivative_laws_agree() {
        let s = inv(0.0, -1.0, 0.5);
        let a = return_map_derivative(&s, -0.2).unwrap();
        let b = ratio_law_derivative(&s, -0.2).unwrap();
        assert!((a - b).abs() / b.abs() < 1e-5);
    }

    #[test]
    fn derivative_blows_up_where_upper_arc_lands_on_second_root() {
        // x0 -> λ - 1/2 sends x1 -> λ + 1 where X.f vanishes.
        let s = inv(-0.3, -1.0, 0.8);
        let mut prev = 0.0;
        for eps in [1e-2, 1e-3, 1e-4, 1e-5] {
            let d = ratio_law_derivative(&s, -0.8 + eps).unwrap().abs();
            assert!(d > prev);
            prev = d;
        }
        assert!(prev > 50.0);
    }

    #[test]
    fn derivative_stays_bounded_at_the_fold() {
        let s = inv(0.2, -1.0, 0.5);
        let d = ratio_law_derivative(&s, 0.2 - 1e-6).unwrap();
        assert!(d.is_finite() && d.abs() < 2.0);
    }

    #[test]
    fn slide_to_visible_lower_fold() {
        let s = inv(-0.3, -1.0 / 3.0, -0.3);
        let sl = slide_arc(&s, -0.25);
        assert!((sl.arc.end.x + 0.15).abs() < 1e-12);
        assert_eq!(sl.exit, SlideExit::Fold { side: Side::Lower, visibility: Visibility::Visible });
        assert!(sl.arc.transit.is_finite() && sl.arc.transit > 0.0);
    }

    #[test]
    fn slide_to_attractor() {
        let s = inv(-0.4, -1.0, 0.5);
        let sl = slide_arc(&s, -0.399);
        assert_eq!(sl.exit, SlideExit::PseudoEquilibrium);
        assert!(direction(&s, sl.arc.end.x).unwrap().abs() < 1e-9);
    }

    #[test]
    fn numeric_matches_closed_form_lower() {
        let s = inv(0.0, -0.6, 0.5);
        let x0 = 0.35;
        let closed = lower_return(&s, x0).unwrap();
        let (arc, end) = numeric_arc(&s, Side::Lower, Point::on_sigma(x0), 100.0).unwrap();
        assert_eq!(end, ArcEnd::Sigma);
        assert!((arc.end.x - closed.x1).abs() < 1e-8);
        assert!((arc.transit - closed.time).abs() < 1e-7);
    }

    #[test]
    fn trajectory_alternates() {
        let s = inv(0.0, -1.0, 0.5);
        let tr = integrate(&s, Point::on_sigma(-0.2), 6.0).unwrap();
        assert!(tr.arcs.len() >= 2);
        assert_eq!(tr.arcs[0].side, ArcSide::Upper);
        assert_eq!(tr.arcs[1].side, ArcSide::Lower);
        assert!((tr.arcs[0].end.x - 0.231_53).abs() < 1e-5);
        assert!((tr.arcs[1].end.x + 0.231_53).abs() < 1e-5);
    }

    #[test]
    fn trajectory_slides_then_drops() {
        let s = inv(-0.3, -1.0 / 3.0, -0.3);
        let tr = integrate(&s, Point::on_sigma(-0.25), 5.0).unwrap();
        assert_eq!(tr.arcs[0].side, ArcSide::Sliding);
        assert_eq!(tr.arcs[1].side, ArcSide::Lower);
    }

    #[test]
    fn trajectory_at_saddle() {
        let s = inv(0.0, -1.0, 0.5);
        let tr = integrate(&s, Point::new(0.0, -0.5), 1.0).unwrap();
        assert!(tr.arcs.is_empty());
        assert_eq!(tr.termination, Termination::Equilibrium);
    }

    #[test]
    fn trajectory_closes_on_cycle() {
        let l = -0.5 + 11.0 * sqrt(6.0) / 60.0;
        let s = inv(l, -1.0, 0.5);
        let xs = -sqrt(29.0 / 2.0) / 10.0;
        let tr = integrate(&s, Point::on_sigma(xs), 50.0).unwrap();
        assert_eq!(tr.termination, Termination::Closed);
    }

    #[test]
    fn return_domain() {
        let s = inv(0.0, -1.0, 0.5);
        let rm = ReturnMap::new(&s).unwrap();
        let (a, b) = rm.domain;
        assert!(a < b && b <= 0.0);
        let mid = 0.5 * (a + b);
        assert!(rm.eval(mid).is_ok());
    }
}
