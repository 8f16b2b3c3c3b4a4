//! Classification of the switching line and the sliding/escaping dynamics on it.

use alloc::vec::Vec;

use crate::family::{FilippovSystem, Point, Side, TauKind, Visibility};
use crate::math::sqrt;
use crate::roots::bisect;
use crate::{Error, Result};

/// Vanishing threshold for Lie derivatives and for `H`.
pub const ZERO_TOL: f64 = 1e-12;

/// Default scan step for root searches on Σ.
pub const SCAN_STEP: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Stability {
    SigmaSaddle,
    SigmaAttractor,
    SigmaRepeller,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Region {
    Escaping,
    Sliding,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum RegionKind {
    Sewing,
    Escaping,
    Sliding,
    Tangency { side: Side, visibility: Visibility },
    PseudoEquilibrium(Stability),
    BoundaryEquilibrium,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PseudoEquilibrium {
    pub abscissa: f64,
    pub stability: Stability,
    pub region: Region,
}

/// Region of `x` ignoring tangencies and zeros of `H`.
pub fn open_region(system: &FilippovSystem, x: f64) -> Option<Region> {
    let xf = system.xf(x);
    let yf = system.yf(x);
    if xf > 0.0 && yf < 0.0 {
        Some(Region::Escaping)
    } else if xf < 0.0 && yf > 0.0 {
        Some(Region::Sliding)
    } else {
        None
    }
}

pub fn classify_point(system: &FilippovSystem, x: f64) -> RegionKind {
    let xf = system.xf(x);
    let yf = system.yf(x);
    let p = Point::on_sigma(x);
    if system.beta().abs() < ZERO_TOL && x.abs() < ZERO_TOL {
        return RegionKind::BoundaryEquilibrium;
    }
    if xf.abs() < ZERO_TOL {
        let visibility = system.fold_kind(Side::Upper, p).unwrap_or(Visibility::Invisible);
        return RegionKind::Tangency { side: Side::Upper, visibility };
    }
    if yf.abs() < ZERO_TOL {
        let visibility = system.fold_kind(Side::Lower, p).unwrap_or(Visibility::Invisible);
        return RegionKind::Tangency { side: Side::Lower, visibility };
    }
    if xf * yf > 0.0 {
        return RegionKind::Sewing;
    }
    let region = if xf > 0.0 { Region::Escaping } else { Region::Sliding };
    if let Ok(h) = direction(system, x) {
        if h.abs() < ZERO_TOL {
            if let Some(stability) = root_stability(system, x, region) {
                return RegionKind::PseudoEquilibrium(stability);
            }
        }
    }
    match region {
        Region::Escaping => RegionKind::Escaping,
        Region::Sliding => RegionKind::Sliding,
    }
}

/// Direction function `H = (E2·D1 - D2·E1) / (E2 - D2)` with `X = (D1, D2)`,
/// `Y = (E1, E2)` evaluated at `(x, 0)`.
pub fn direction(system: &FilippovSystem, x: f64) -> Result<f64> {
    let p = Point::on_sigma(x);
    let (d1, d2) = system.upper_field(p);
    let (e1, e2) = system.lower_field(p);
    direction_from_fields((d1, d2), (e1, e2))
}

pub fn direction_from_fields(x: (f64, f64), y: (f64, f64)) -> Result<f64> {
    let (d1, d2) = x;
    let (e1, e2) = y;
    let den = e2 - d2;
    if den.abs() < 1e-14 {
        return Err(Error::DegenerateDenominator { what: "direction function" });
    }
    Ok((e2 * d1 - d2 * e1) / den)
}

// Stability from the sign change of H across a root, probing inside the region.
fn root_stability(system: &FilippovSystem, x: f64, region: Region) -> Option<Stability> {
    let mut delta = 1e-6;
    for _ in 0..8 {
        let l = x - delta;
        let r = x + delta;
        if open_region(system, l) == Some(region) && open_region(system, r) == Some(region) {
            let hl = direction(system, l).ok()?;
            let hr = direction(system, r).ok()?;
            if hl != 0.0 && hr != 0.0 && hl.signum() != hr.signum() {
                let repelling = hl < 0.0;
                return Some(match (region, repelling) {
                    (Region::Escaping, true) => Stability::SigmaRepeller,
                    (Region::Escaping, false) => Stability::SigmaSaddle,
                    (Region::Sliding, false) => Stability::SigmaAttractor,
                    (Region::Sliding, true) => Stability::SigmaSaddle,
                });
            }
        }
        delta *= 0.1;
    }
    None
}

/// Zeros of `H` in the escaping and sliding parts of `interval`.
pub fn pseudo_equilibria(system: &FilippovSystem, interval: (f64, f64)) -> Vec<PseudoEquilibrium> {
    pseudo_equilibria_with_step(system, interval, SCAN_STEP)
}

pub fn pseudo_equilibria_with_step(system: &FilippovSystem, interval: (f64, f64), step: f64) -> Vec<PseudoEquilibrium> {
    let (lo, hi) = interval;
    let mut roots: Vec<f64> = Vec::new();
    let n = (libm::ceil((hi - lo) / step) as usize).max(1);
    let h = |x: f64| direction(system, x).unwrap_or(f64::NAN);
    let mut xa = lo;
    let mut ra = open_region(system, xa);
    let mut ha = h(xa);
    for k in 1..=n {
        let xb = if k == n { hi } else { lo + (hi - lo) * k as f64 / n as f64 };
        let rb = open_region(system, xb);
        let hb = h(xb);
        if ra.is_some() && ra == rb && ha.is_finite() && hb.is_finite() {
            if hb == 0.0 {
                roots.push(xb);
            } else if ha != 0.0 && ha.signum() != hb.signum() {
                if let Ok(r) = bisect(h, xa, xb, ZERO_TOL) {
                    roots.push(r);
                }
            }
        }
        xa = xb;
        ra = rb;
        ha = hb;
    }
    if system.tau() == TauKind::Vis {
        for q in vis_closed_roots(system).into_iter().flatten() {
            if q > lo && q < hi && open_region(system, q).is_some() && !roots.iter().any(|r| (r - q).abs() < 1e-9) {
                roots.push(refine_root(system, q));
            }
        }
    }
    roots.sort_by(|a, b| a.total_cmp(b));
    roots.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    roots
        .into_iter()
        .filter_map(|x| {
            let region = open_region(system, x)?;
            let stability = root_stability(system, x, region)?;
            Some(PseudoEquilibrium { abscissa: x, stability, region })
        })
        .collect()
}

fn refine_root(system: &FilippovSystem, q: f64) -> f64 {
    let h = |x: f64| direction(system, x).unwrap_or(f64::NAN);
    let mut w = 1e-9;
    for _ in 0..6 {
        if let Ok(r) = bisect(h, q - w, q + w, ZERO_TOL) {
            return r;
        }
        w *= 10.0;
    }
    q
}

/// Closed-form zeros of `H` for the visible family. Both roots of the
/// quadratic numerator are returned; `None` marks a missing real root.
/// For α = -1 the numerator is linear with the single root `βλ/(β-1)`.
pub fn vis_closed_roots(system: &FilippovSystem) -> [Option<f64>; 2] {
    let (l, a, b) = (system.lambda(), system.alpha(), system.beta());
    let p = 1.0 + a;
    if p.abs() < 1e-14 {
        return if (b - 1.0).abs() > 0.0 { [Some(b * l / (b - 1.0)), None] } else { [None, None] };
    }
    let bb = (a - 1.0) * (1.0 - b) + l * p;
    let disc = bb * bb + 4.0 * b * p * (p + l * (a - 1.0));
    if disc < 0.0 {
        return [None, None];
    }
    let s = sqrt(disc);
    [Some((bb + s) / (2.0 * p)), Some((bb - s) / (2.0 * p))]
}

/// An alternative closed form with the opposite sign on the `λ(1+α)` term; it agrees with the true root only at λ = 0.
pub fn q_printed(lambda: f64, alpha: f64, beta: f64) -> f64 {
    let p = 1.0 + alpha;
    let bb = (alpha - 1.0) * (1.0 - beta) - lambda * p;
    (bb + sqrt(bb * bb + 4.0 * beta * p * (p + lambda * (alpha - 1.0)))) / (2.0 * p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::make_system;

    #[test]
    fn sewing_point() {
        let s = make_system(TauKind::Inv, 0.0, -1.0, 0.5).unwrap();
        assert!((s.xf(-0.2) - 0.24).abs() < 1e-15);
        assert!((s.yf(-0.2) - 0.2).abs() < 1e-15);
        assert_eq!(classify_point(&s, -0.2), RegionKind::Sewing);
    }

    #[test]
    fn vis_pseudo_repeller() {
        let s = make_system(TauKind::Vis, -0.2, -1.0, 0.5).unwrap();
        assert_eq!(classify_point(&s, 0.2), RegionKind::PseudoEquilibrium(Stability::SigmaRepeller));
        let pe = pseudo_equilibria(&s, (-1.0, 1.0));
        assert_eq!(pe.len(), 1);
        assert!((pe[0].abscissa - 0.2).abs() < 1e-12);
        assert_eq!(pe[0].stability, Stability::SigmaRepeller);
        assert_eq!(pe[0].region, Region::Escaping);
    }

    #[test]
    fn tangency_at_d() {
        let s = make_system(TauKind::Inv, 0.15, -0.7, 0.4).unwrap();
        assert_eq!(
            classify_point(&s, 0.15),
            RegionKind::Tangency { side: Side::Upper, visibility: Visibility::Invisible }
        );
    }

    #[test]
    fn boundary_equilibrium() {
        let s = make_system(TauKind::Inv, 0.1, -1.0, 0.0).unwrap();
        assert_eq!(classify_point(&s, 0.0), RegionKind::BoundaryEquilibrium);
    }

    #[test]
    fn direction_examples() {
        assert_eq!(direction_from_fields((1.0, 0.0), (0.0, 1.0)).unwrap(), 1.0);
        let s = make_system(TauKind::Vis, 0.0, -1.0, 0.5).unwrap();
        for z in [-0.9, -0.3, 0.01, 0.4, 0.8] {
            assert!((direction(&s, z).unwrap() - 0.25).abs() < 1e-12);
        }
        let s = make_system(TauKind::Vis, -0.2, -1.0, 0.5).unwrap();
        assert!((direction(&s, 0.3).unwrap() - 0.0625).abs() < 1e-15);
    }

    #[test]
    fn degenerate_direction() {
        let s = make_system(TauKind::Vis, 0.0, -1.0, 0.5).unwrap();
        assert!(matches!(direction(&s, 0.0), Err(Error::DegenerateDenominator { .. })));
    }

    #[test]
    fn sliding_attractor_between_d_and_i() {
        let s = make_system(TauKind::Inv, -0.4, -1.0, 0.5).unwrap();
        let pe = pseudo_equilibria(&s, (-1.0, 1.0));
        let inside: Vec<_> = pe.iter().filter(|p| p.abscissa > -0.4 && p.abscissa < 0.0).collect();
        assert_eq!(inside.len(), 1);
        assert_eq!(inside[0].stability, Stability::SigmaAttractor);
    }

    #[test]
    fn no_pseudo_equilibrium_when_h_positive() {
        let s = make_system(TauKind::Inv, -0.3, -1.0 / 3.0, -0.3).unwrap();
        assert!(pseudo_equilibria(&s, (-0.3, -0.15)).is_empty());
        for k in 1..100 {
            let x = -0.3 + 0.15 * k as f64 / 100.0;
            assert!(direction(&s, x).unwrap() > 0.0);
        }
    }

    #[test]
    fn closed_root_matches_h() {
        let s = make_system(TauKind::Vis, 0.2, -0.5, 0.5).unwrap();
        let q = vis_closed_roots(&s)[0].unwrap();
        assert!((q - 0.138_986_7).abs() < 1e-6);
        assert!(direction(&s, q).unwrap().abs() < 1e-12);
        assert!((q_printed(0.2, -0.5, 0.5) - q).abs() > 0.01);
        assert!((q_printed(0.0, -0.5, 0.5) - vis_closed_roots(&make_system(TauKind::Vis, 0.0, -0.5, 0.5).unwrap())[0].unwrap()).abs() < 1e-14);
    }
}
