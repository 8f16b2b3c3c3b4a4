//! Boundary curves, case labels, topological classes and parameter sweeps.

use alloc::vec::Vec;
use core::fmt;

use crate::family::{lower_fold_abscissa, make_system, FamilyParams, TauKind, BETA_MAX};
use crate::flow::{ratio_law_derivative, ReturnMap};
use crate::math::{cos, sin, sqrt};
use crate::roots::{bisect, golden_min};
use crate::structures::{defect_at, find_canard_cycles_with, CycleStability, Connection};
use crate::{Error, Result};

/// Default relative tolerance for equality cases.
pub const CLASSIFY_TOL: f64 = 1e-9;

fn radical(beta: f64) -> f64 {
    sqrt(9.0 - 12.0 * beta * beta)
}

/// Value of α at which the fold of `X` meets the fold of `Y` on the saddle loop.
pub fn alpha0(beta: f64) -> Result<f64> {
    let den = -3.0 + 6.0 * beta + radical(beta);
    if den.abs() < 1e-14 {
        return Err(Error::DegenerateDenominator { what: "alpha0" });
    }
    Ok(1.0 - 12.0 * beta / den)
}

/// `alpha0` with the β = 0 limit filled in; the flag marks the limit value.
pub fn alpha0_or_limit(beta: f64) -> (f64, bool) {
    match alpha0(beta) {
        Ok(a) => (a, false),
        Err(_) => (-1.0, true),
    }
}

pub fn mu0(beta: f64) -> Result<f64> {
    let den = -3.0 + 6.0 * beta + radical(beta);
    if den.abs() < 1e-14 {
        return Err(Error::DegenerateDenominator { what: "mu0" });
    }
    Ok(2.0 - 12.0 * beta / den)
}

pub fn lambda0(beta: f64) -> f64 {
    (-3.0 + radical(beta)) / 6.0
}

pub fn l0(beta: f64) -> f64 {
    let r = radical(beta);
    (-9.0 - 6.0 * beta + r + sqrt(2.0) * sqrt(15.0 + r - 2.0 * beta * (-3.0 + 2.0 * beta + r))) / 12.0
}

pub fn l1(beta: f64) -> f64 {
    -0.5 + radical(beta) / 6.0
}

/// A widely used closed form for the i-j connection at α = α0. It does not
/// satisfy the connection condition; see [`l2`].
pub fn l2_printed(beta: f64) -> f64 {
    let r = radical(beta);
    (-9.0 + 6.0 * beta + r + sqrt(2.0) * sqrt(15.0 + r + 2.0 * beta * (-3.0 + 2.0 * beta + r))) / 12.0
}

/// The i-j connection value at α = α0(β), solved from the connection condition.
pub fn l2(beta: f64) -> Result<f64> {
    solve_connection_lambda(TauKind::Inv, alpha0(beta)?, beta, Connection::IJ)
}

pub fn m0(alpha: f64, beta: f64) -> f64 {
    let a1 = alpha - 1.0;
    (-3.0 - 3.0 * alpha * (-2.0 + alpha + 2.0 * a1 * beta) + sqrt(9.0 * (a1 * a1 * a1 * a1) - 12.0 * a1 * a1 * beta * beta))
        / (6.0 * a1 * a1)
}

pub fn m1(beta: f64) -> f64 {
    l1(beta)
}

pub fn m2(alpha: f64, beta: f64) -> f64 {
    let a1 = alpha - 1.0;
    (-3.0 + 6.0 * beta - 3.0 * alpha * (-2.0 + alpha + 2.0 * beta)
        + sqrt(9.0 * (a1 * a1 * a1 * a1) - 12.0 * a1 * a1 * alpha * alpha * beta * beta))
        / (6.0 * a1 * a1)
}

pub fn i1(alpha: f64, beta: f64) -> f64 {
    lower_fold_abscissa(alpha, beta)
}

/// Root in λ of the connection defect, by bisection to `1e-10` or better.
pub fn solve_connection_lambda(tau: TauKind, alpha: f64, beta: f64, pair: Connection) -> Result<f64> {
    if !(beta > 0.0) {
        return Err(Error::MissingPoint { name: "h" });
    }
    let (from, to) = pair.feet(alpha, beta);
    let d = |l: f64| defect_at(tau, l, from, to);
    // Upper returns pair u0 in (-1/2, 0) with u1 in (0, 1).
    let (lo, hi) = match tau {
        TauKind::Inv => (from.max(to - 1.0), to.min(from + 0.5)),
        TauKind::Vis => (from, to),
    };
    let lo = lo.max(-1.0 + 1e-12);
    let hi = hi.min(1.0 - 1e-12);
    if !(lo < hi) {
        return Err(Error::NoBracket { lo, hi });
    }
    bisect(d, lo, hi, 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Regime {
    Thm1,
    Thm2,
    Thm3,
    Thm4,
    Thm5,
    Thm6,
}

impl Regime {
    pub const ALL: [Regime; 6] = [Regime::Thm1, Regime::Thm2, Regime::Thm3, Regime::Thm4, Regime::Thm5, Regime::Thm6];

    pub fn theorem(self) -> u8 {
        self as u8 + 1
    }

    pub fn from_theorem(t: u8) -> Option<Regime> {
        Regime::ALL.get(usize::from(t).checked_sub(1)?).copied()
    }

    pub fn tau(self) -> TauKind {
        match self {
            Regime::Thm1 | Regime::Thm2 | Regime::Thm3 => TauKind::Inv,
            _ => TauKind::Vis,
        }
    }

    /// Number of cases in the theorem's list.
    pub fn case_count(self) -> u8 {
        match self {
            Regime::Thm1 => 19,
            Regime::Thm2 | Regime::Thm3 => 21,
            _ => 13,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Regime::Thm1 => "thm1",
            Regime::Thm2 => "thm2",
            Regime::Thm3 => "thm3",
            Regime::Thm4 => "thm4",
            Regime::Thm5 => "thm5",
            Regime::Thm6 => "thm6",
        }
    }

    pub fn for_tau(tau: TauKind) -> [Regime; 3] {
        match tau {
            TauKind::Inv => [Regime::Thm1, Regime::Thm2, Regime::Thm3],
            TauKind::Vis => [Regime::Thm4, Regime::Thm5, Regime::Thm6],
        }
    }
}

fn near(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}

/// Regime of `(α, β)`: α against α0(β) for `inv`, against -1 for `vis`.
pub fn regime(tau: TauKind, alpha: f64, beta: f64, tol: f64) -> Regime {
    let pivot = match tau {
        TauKind::Inv => {
            if beta.abs() <= tol {
                -1.0
            } else {
                alpha0_or_limit(beta).0
            }
        }
        TauKind::Vis => -1.0,
    };
    let (on, above, below) = match tau {
        TauKind::Inv => (Regime::Thm1, Regime::Thm2, Regime::Thm3),
        TauKind::Vis => (Regime::Thm4, Regime::Thm5, Regime::Thm6),
    };
    if near(alpha, pivot, tol) {
        on
    } else if alpha > pivot {
        above
    } else {
        below
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CaseLabel {
    pub index: u8,
    pub theorem: u8,
}

impl CaseLabel {
    pub const fn new(index: u8, theorem: u8) -> Self {
        CaseLabel { index, theorem }
    }

    pub fn is_valid(self) -> bool {
        Regime::from_theorem(self.theorem).is_some_and(|r| self.index >= 1 && self.index <= r.case_count())
    }
}

impl fmt::Display for CaseLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}_{}", self.index, self.theorem)
    }
}

impl core::str::FromStr for CaseLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = Error::ParameterOutOfRange { name: "case", value: f64::NAN, bound: "label of the form k_t" };
        let (k, t) = s.split_once('_').ok_or(bad.clone())?;
        let label = CaseLabel { index: k.parse().map_err(|_| bad.clone())?, theorem: t.parse().map_err(|_| bad.clone())? };
        if label.is_valid() {
            Ok(label)
        } else {
            Err(bad)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TopologicalClass {
    pub representative: CaseLabel,
}

pub fn topological_class(label: CaseLabel) -> TopologicalClass {
    let k = label.index;
    let representative = match label.theorem {
        2 | 3 => match k {
            1..=11 => CaseLabel::new(k, 1),
            12..=14 => label,
            15 => CaseLabel::new(13, 1),
            16 => CaseLabel::new(14, 1),
            _ => CaseLabel::new(k - 2, 1),
        },
        _ => label,
    };
    TopologicalClass { representative }
}

/// Every label of the three theorems for `tau`.
pub fn all_labels(tau: TauKind) -> Vec<CaseLabel> {
    let mut out = Vec::new();
    for r in Regime::for_tau(tau) {
        for k in 1..=r.case_count() {
            out.push(CaseLabel::new(k, r.theorem()));
        }
    }
    out
}

/// Number of distinct topological classes over all labels for `tau`.
pub fn class_count(tau: TauKind) -> usize {
    let mut classes: Vec<TopologicalClass> = all_labels(tau).into_iter().map(topological_class).collect();
    classes.sort();
    classes.dedup();
    classes.len()
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Boundary {
    pub name: &'static str,
    pub value: f64,
    /// Case index when λ equals this boundary.
    pub on_index: u8,
}

/// The λ-interval whose split depends on the fold of canard cycles.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct FoldBracket {
    pub lo: f64,
    pub hi: f64,
    pub lo_name: &'static str,
    pub hi_name: &'static str,
    pub fold_name: &'static str,
    /// Case indices for: two cycles, the fold itself, no cycles.
    pub indices: [u8; 3],
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CycleFold {
    pub lambda: f64,
    pub abscissa: f64,
    pub derivative: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum FoldStatus {
    NotApplicable,
    NotComputed,
    Found(CycleFold),
    Absent { lo: f64, hi: f64 },
}

/// Row of the diagram at fixed `(α, β)`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Boundaries {
    pub tau: TauKind,
    pub alpha: f64,
    pub beta: f64,
    pub regime: Regime,
    /// Strictly increasing λ-values.
    pub values: Vec<Boundary>,
    /// Case index of each open interval: `values.len() + 1` entries. The
    /// entry equal to `u8::MAX` marks the fold bracket.
    pub intervals: Vec<u8>,
    pub fold: Option<FoldBracket>,
    pub fold_status: FoldStatus,
    /// Printed L2 kept next to the solved value (thm1 only).
    pub l2_printed: Option<f64>,
    pub tol: f64,
}

const FOLD_SLOT: u8 = u8::MAX;

impl Boundaries {
    /// Boundary list without searching for the cycle fold.
    pub fn new(tau: TauKind, alpha: f64, beta: f64, tol: f64) -> Result<Self> {
        let reg = regime(tau, alpha, beta, tol);
        let th = reg.theorem();
        let _ = th;
        let mut values = Vec::new();
        let mut intervals = Vec::new();
        let mut fold = None;
        let mut l2_print = None;
        let b = |name: &'static str, value: f64, on_index: u8| Boundary { name, value, on_index };
        if beta.abs() <= tol {
            values.push(b("s1", 0.0, 5));
            intervals.extend([4, 6]);
        } else if beta < 0.0 {
            values.push(b("e1", i1(alpha, beta), 2));
            intervals.extend([1, 3]);
        } else {
            match reg {
                Regime::Thm1 => {
                    let a0 = alpha0(beta)?;
                    let l2v = l2(beta)?;
                    l2_print = Some(l2_printed(beta));
                    values.extend([b("-beta", -beta, 8), b("L0", l0(beta), 10), b("L1", l1(beta), 12)]);
                    values.extend([b("L2", l2v, 16), b("beta", beta, 18)]);
                    intervals.extend([7, 9, 11, FOLD_SLOT, 17, 19]);
                    let _ = a0;
                    fold = Some(FoldBracket {
                        lo: l1(beta),
                        hi: l2v,
                        lo_name: "L1",
                        hi_name: "L2",
                        fold_name: "L3",
                        indices: [13, 14, 15],
                    });
                }
                Regime::Thm2 | Regime::Thm3 => {
                    let (m0v, m1v, m2v, i1v) = (m0(alpha, beta), m1(beta), m2(alpha, beta), i1(alpha, beta));
                    values.extend([b("-beta", -beta, 8), b("M0", m0v, 10)]);
                    let (lo, lo_name) = if reg == Regime::Thm2 {
                        values.extend([b("M1", m1v, 12), b("i1", i1v, 14)]);
                        (i1v, "i1")
                    } else {
                        values.extend([b("i1", i1v, 12), b("M1", m1v, 14)]);
                        (m1v, "M1")
                    };
                    values.extend([b("M2", m2v, 18), b("beta", beta, 20)]);
                    intervals.extend([7, 9, 11, 13, FOLD_SLOT, 19, 21]);
                    fold = Some(FoldBracket { lo, hi: m2v, lo_name, hi_name: "M2", fold_name: "M3", indices: [15, 16, 17] });
                }
                _ => {
                    values.extend([b("-beta", -beta, 8), b("i1", i1(alpha, beta), 10), b("beta", beta, 12)]);
                    intervals.extend([7, 9, 11, 13]);
                }
            }
        }
        for w in values.windows(2) {
            if !(w[0].value < w[1].value) {
                return Err(Error::OrderingViolation { left: w[0].name, right: w[1].name });
            }
        }
        let fold_status = if fold.is_some() { FoldStatus::NotComputed } else { FoldStatus::NotApplicable };
        Ok(Boundaries {
            tau,
            alpha,
            beta,
            regime: reg,
            values,
            intervals,
            fold,
            fold_status,
            l2_printed: l2_print,
            tol,
        })
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.values.iter().find(|b| b.name == name).map(|b| b.value)
    }

    /// Fills `fold_status` by searching the fold bracket.
    pub fn with_fold(mut self) -> Self {
        if let Some(fb) = self.fold {
            self.fold_status = match find_cycle_fold_in(self.tau, self.alpha, self.beta, (fb.lo, fb.hi)) {
                Ok(f) => FoldStatus::Found(f),
                Err(_) => FoldStatus::Absent { lo: fb.lo, hi: fb.hi },
            };
        }
        self
    }

    /// Case label of λ in this row.
    pub fn classify(&self, lambda: f64) -> Result<CaseLabel> {
        let th = self.regime.theorem();
        let hits: Vec<&Boundary> = self.values.iter().filter(|b| near(lambda, b.value, self.tol)).collect();
        if hits.len() > 1 {
            return Err(Error::Ambiguous { first: hits[0].name, second: hits[1].name });
        }
        if let Some(b) = hits.first() {
            return Ok(CaseLabel::new(b.on_index, th));
        }
        let slot = self.values.iter().take_while(|b| b.value < lambda).count();
        let idx = self.intervals[slot];
        if idx != FOLD_SLOT {
            return Ok(CaseLabel::new(idx, th));
        }
        let fb = self.fold.expect("fold slot without bracket");
        if let FoldStatus::Found(f) = self.fold_status {
            if near(lambda, f.lambda, self.tol) {
                return Ok(CaseLabel::new(fb.indices[1], th));
            }
        }
        Ok(CaseLabel::new(fb.indices[count_cycle_state(self.tau, lambda, self.alpha, self.beta)], th))
    }
}

// 0: two hyperbolic cycles, 1: a single non-hyperbolic cycle, 2: otherwise.
fn count_cycle_state(tau: TauKind, lambda: f64, alpha: f64, beta: f64) -> usize {
    let Ok(sys) = make_system(tau, lambda, alpha, beta) else {
        return 2;
    };
    let cycles = find_canard_cycles_with(&sys, (-1.0, 1.0), 0);
    let hyperbolic = cycles.iter().filter(|c| c.stability != CycleStability::Nonhyperbolic).count();
    if cycles.len() == 2 && hyperbolic == 2 {
        0
    } else if cycles.len() == 1 && hyperbolic == 0 {
        1
    } else {
        2
    }
}

/// Boundary values with the cycle fold searched inside the bracket.
pub fn boundaries(tau: TauKind, alpha: f64, beta: f64) -> Result<Boundaries> {
    Ok(Boundaries::new(tau, alpha, beta, CLASSIFY_TOL)?.with_fold())
}

pub fn classify_case(tau: TauKind, lambda: f64, alpha: f64, beta: f64, tol: f64) -> Result<CaseLabel> {
    FamilyParams::new(tau, lambda, alpha, beta)?;
    Boundaries::new(tau, alpha, beta, tol)?.classify(lambda)
}

fn hyperbolic_pair(tau: TauKind, lambda: f64, alpha: f64, beta: f64) -> Option<(f64, f64)> {
    let sys = make_system(tau, lambda, alpha, beta).ok()?;
    let c = find_canard_cycles_with(&sys, (-1.0, 1.0), 2000);
    let h: Vec<_> = c.iter().filter(|c| c.stability != CycleStability::Nonhyperbolic).collect();
    if h.len() == 2 {
        Some((h[0].fixed_abscissa, h[1].fixed_abscissa))
    } else {
        None
    }
}

/// Saddle-node of canard cycles in the regime's fold bracket.
pub fn find_cycle_fold(tau: TauKind, alpha: f64, beta: f64) -> Result<CycleFold> {
    let b = Boundaries::new(tau, alpha, beta, CLASSIFY_TOL)?;
    let fb = b.fold.ok_or(Error::NoWindow { lo: f64::NAN, hi: f64::NAN })?;
    find_cycle_fold_in(tau, alpha, beta, (fb.lo, fb.hi))
}

/// Saddle-node of canard cycles for λ in `search`.
///
/// λ is scanned for a value with two hyperbolic cycles; each end of that
/// window is then bisected on the sign of the extremum of `η(x) - x` between
/// the pair. The end where the pair merges is returned.
pub fn find_cycle_fold_in(tau: TauKind, alpha: f64, beta: f64, search: (f64, f64)) -> Result<CycleFold> {
    let (lo, hi) = search;
    let no_window = Error::NoWindow { lo, hi };
    if tau != TauKind::Inv || !(beta > 0.0) || !(lo < hi) {
        return Err(no_window);
    }
    let m = 120;
    let grid: Vec<f64> = (1..m).map(|k| lo + (hi - lo) * k as f64 / m as f64).collect();
    let pairs: Vec<Option<(f64, f64)>> = grid.iter().map(|&l| hyperbolic_pair(tau, l, alpha, beta)).collect();
    let Some(first) = pairs.iter().position(|p| p.is_some()) else {
        return Err(no_window);
    };
    let last = pairs.iter().rposition(|p| p.is_some()).unwrap_or(first);
    let mut candidates = Vec::new();
    let lo_out = if first == 0 { lo } else { grid[first - 1] };
    let hi_out = if last + 1 == grid.len() { hi } else { grid[last + 1] };
    if let Some(f) = refine_fold(tau, alpha, beta, grid[first], lo_out, pairs[first].unwrap()) {
        candidates.push(f);
    }
    if let Some(f) = refine_fold(tau, alpha, beta, grid[last], hi_out, pairs[last].unwrap()) {
        candidates.push(f);
    }
    candidates
        .into_iter()
        .filter(|f| (f.derivative - 1.0).abs() < HYPERBOLICITY_RESIDUAL)
        .min_by(|a, b| (a.derivative - 1.0).abs().total_cmp(&(b.derivative - 1.0).abs()))
        .ok_or(no_window)
}

const HYPERBOLICITY_RESIDUAL: f64 = 1e-6;
const FOLD_MARGIN: f64 = 1e-9;

// Extremum of η(x) - x between a cycle pair, signed so that positive means
// the pair still exists.
fn pair_margin(tau: TauKind, lambda: f64, alpha: f64, beta: f64, around: (f64, f64), sign: f64) -> Option<(f64, f64)> {
    let sys = make_system(tau, lambda, alpha, beta).ok()?;
    let rm = ReturnMap::new(&sys)?;
    let width = (around.1 - around.0).abs().max(1e-4);
    let a = (around.0 - width).max(rm.domain.0 + 1e-12);
    let b = (around.1 + width).min(rm.domain.1 - 1e-12);
    if !(a < b) {
        return None;
    }
    let g = |x: f64| rm.eval(x).map(|y| sign * (y - x)).unwrap_or(f64::NEG_INFINITY);
    let xe = golden_min(|x| -g(x), a, b, 1e-12);
    // Sharpen the extremum on η' = 1 where possible.
    let dp = |x: f64| ratio_law_derivative(&sys, x).map(|d| d - 1.0).unwrap_or(f64::NAN);
    let w = 1e-6 * (b - a);
    let xe = bisect(dp, (xe - w).max(a), (xe + w).min(b), 0.0).unwrap_or(xe);
    Some((xe, g(xe)))
}

fn refine_fold(tau: TauKind, alpha: f64, beta: f64, l_in: f64, l_out: f64, pair: (f64, f64)) -> Option<CycleFold> {
    let sys = make_system(tau, l_in, alpha, beta).ok()?;
    let mid = 0.5 * (pair.0 + pair.1);
    let sign = {
        let v = crate::flow::return_map(&sys, mid).ok()? - mid;
        if v > 0.0 {
            1.0
        } else {
            -1.0
        }
    };
    let (mut a, mut b) = (l_in, l_out);
    let mut around = pair;
    let mut best = None;
    for _ in 0..80 {
        let l = 0.5 * (a + b);
        match pair_margin(tau, l, alpha, beta, around, sign) {
            Some((xe, v)) if v > 0.0 => {
                a = l;
                around = (xe, xe);
                best = Some(xe);
            }
            _ => b = l,
        }
        if (b - a).abs() < 1e-14 {
            break;
        }
    }
    let xe = best.unwrap_or(mid);
    let (xe, margin) = pair_margin(tau, a, alpha, beta, (xe, xe), sign)?;
    // A pair that leaves the return domain keeps a finite margin.
    if !(margin.abs() < FOLD_MARGIN) {
        return None;
    }
    let sys = make_system(tau, a, alpha, beta).ok()?;
    let derivative = ratio_law_derivative(&sys, xe).ok()?;
    Some(CycleFold { lambda: a, abscissa: xe, derivative })
}

/// One parameter point constructed for a case of the scheme.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Witness {
    pub expected: CaseLabel,
    /// `(λ, α, β)`; `None` when the defining boundary does not exist.
    pub point: Option<(f64, f64, f64)>,
    pub got: Option<CaseLabel>,
}

fn regime_alpha(reg: Regime, beta: f64) -> f64 {
    let (a0, _) = if beta == 0.0 { (-1.0, true) } else { alpha0_or_limit(beta) };
    match reg {
        Regime::Thm1 => a0,
        Regime::Thm2 => 0.5 * a0,
        Regime::Thm3 => 0.5 * (a0 - 2.0),
        Regime::Thm4 => -1.0,
        Regime::Thm5 => -0.5,
        Regime::Thm6 => -1.5,
    }
}

/// Witness points for every case of `reg` (β ∈ {-1/2, 0, 1/2}).
pub fn enumerate_witnesses(reg: Regime) -> Vec<Witness> {
    let tau = reg.tau();
    let th = reg.theorem();
    let mut out = Vec::new();
    let mut push = |expected: u8, point: Option<(f64, f64, f64)>| {
        let got = point.and_then(|(l, a, b)| classify_case(tau, l, a, b, CLASSIFY_TOL).ok());
        out.push(Witness { expected: CaseLabel::new(expected, th), point, got });
    };
    for (beta, first) in [(-0.5, 1u8), (0.0, 4u8)] {
        let a = regime_alpha(reg, beta);
        let c = if beta == 0.0 { 0.0 } else { i1(a, beta) };
        push(first, Some((c - 0.25, a, beta)));
        push(first + 1, Some((c, a, beta)));
        push(first + 2, Some((c + 0.25, a, beta)));
    }
    let beta = 0.5;
    let a = regime_alpha(reg, beta);
    let Ok(bs) = Boundaries::new(tau, a, beta, CLASSIFY_TOL) else {
        return out;
    };
    let bs = bs.with_fold();
    let vals: Vec<f64> = bs.values.iter().map(|b| b.value).collect();
    let edge = |k: usize| -> f64 {
        if k == 0 {
            -1.0
        } else if k > vals.len() {
            1.0
        } else {
            vals[k - 1]
        }
    };
    for (k, &idx) in bs.intervals.iter().enumerate() {
        let (lo, hi) = (edge(k), edge(k + 1));
        if idx == FOLD_SLOT {
            let fb = bs.fold.expect("fold slot");
            match bs.fold_status {
                FoldStatus::Found(f) => {
                    push(fb.indices[0], Some((0.5 * (lo + f.lambda), a, beta)));
                    push(fb.indices[1], Some((f.lambda, a, beta)));
                    push(fb.indices[2], Some((0.5 * (f.lambda + hi), a, beta)));
                }
                _ => {
                    push(fb.indices[0], None);
                    push(fb.indices[1], None);
                    push(fb.indices[2], Some((0.5 * (lo + hi), a, beta)));
                }
            }
        } else {
            push(idx, Some((0.5 * (lo + hi), a, beta)));
        }
        if let Some(bd) = bs.values.get(k) {
            push(bd.on_index, Some((bd.value, a, beta)));
        }
    }
    out.sort_by_key(|w| w.expected);
    out
}

/// Labels realized by the witness points of `reg`, sorted and distinct.
pub fn enumerate_cases(tau: TauKind, reg: Regime) -> Vec<CaseLabel> {
    if reg.tau() != tau {
        return Vec::new();
    }
    let mut labels: Vec<CaseLabel> = enumerate_witnesses(reg).into_iter().filter_map(|w| w.got).collect();
    labels.sort();
    labels.dedup();
    labels
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Cell {
    pub lambda: f64,
    pub beta: f64,
    pub label: Option<CaseLabel>,
    pub boundary: bool,
}

impl Cell {
    pub fn class(&self) -> Option<TopologicalClass> {
        self.label.map(topological_class)
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Polyline {
    pub name: &'static str,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Diagram {
    pub tau: TauKind,
    pub alpha: f64,
    pub lambda_range: (f64, f64),
    pub beta_range: (f64, f64),
    /// `(λ columns, β rows)`.
    pub resolution: (usize, usize),
    /// Row-major: β rows, λ columns.
    pub cells: Vec<Cell>,
    pub polylines: Vec<Polyline>,
}

impl Diagram {
    pub fn regimes(&self) -> Vec<Regime> {
        let mut r: Vec<Regime> = self
            .cells
            .iter()
            .filter_map(|c| c.label.and_then(|l| Regime::from_theorem(l.theorem)))
            .collect();
        r.sort();
        r.dedup();
        r
    }

    /// `(label, count)` pairs sorted by label.
    pub fn histogram(&self) -> Vec<(CaseLabel, usize)> {
        let mut out: Vec<(CaseLabel, usize)> = Vec::new();
        for c in &self.cells {
            if let Some(l) = c.label {
                match out.binary_search_by_key(&l, |e| e.0) {
                    Ok(i) => out[i].1 += 1,
                    Err(i) => out.insert(i, (l, 1)),
                }
            }
        }
        out
    }
}

/// Cell-centered sample `k` of `n` over `range`.
pub fn cell_center(range: (f64, f64), k: usize, n: usize) -> f64 {
    range.0 + (range.1 - range.0) * (k as f64 + 0.5) / n as f64
}

/// Classifies one β row of the grid.
pub fn sweep_row(tau: TauKind, alpha: f64, lambda_range: (f64, f64), nl: usize, beta: f64, beta_step: f64) -> (Vec<Cell>, Option<Boundaries>) {
    let bs = Boundaries::new(tau, alpha, beta, CLASSIFY_TOL).ok();
    let dl = (lambda_range.1 - lambda_range.0) / nl as f64;
    let cells = (0..nl)
        .map(|k| {
            let lambda = cell_center(lambda_range, k, nl);
            let label = bs.as_ref().and_then(|b| b.classify(lambda).ok());
            let mut boundary = beta.abs() < 0.5 * beta_step;
            if let Some(b) = &bs {
                boundary |= b.values.iter().any(|v| (lambda - v.value).abs() < 0.5 * dl);
            }
            Cell { lambda, beta, label, boundary }
        })
        .collect();
    (cells, bs)
}

/// Appends row boundary values to polylines keyed by name.
pub fn collect_polylines(rows: &[(f64, Option<Boundaries>)]) -> Vec<Polyline> {
    let mut out: Vec<Polyline> = Vec::new();
    for (beta, bs) in rows {
        let Some(bs) = bs else { continue };
        for b in &bs.values {
            match out.iter_mut().find(|p| p.name == b.name) {
                Some(p) => p.points.push((b.value, *beta)),
                None => out.push(Polyline { name: b.name, points: alloc::vec![(b.value, *beta)] }),
            }
        }
    }
    out
}

/// Labels a `(λ, β)` grid at fixed α.
pub fn sweep_grid(tau: TauKind, alpha: f64, lambda_range: (f64, f64), beta_range: (f64, f64), resolution: (usize, usize)) -> Diagram {
    let (nl, nb) = (resolution.0.max(1), resolution.1.max(1));
    let db = (beta_range.1 - beta_range.0) / nb as f64;
    let mut cells = Vec::with_capacity(nl * nb);
    let mut rows = Vec::with_capacity(nb);
    for r in 0..nb {
        let beta = cell_center(beta_range, r, nb);
        let (row, bs) = sweep_row(tau, alpha, lambda_range, nl, beta, db);
        cells.extend(row);
        rows.push((beta, bs));
    }
    Diagram {
        tau,
        alpha,
        lambda_range,
        beta_range,
        resolution: (nl, nb),
        cells,
        polylines: collect_polylines(&rows),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SphereSample {
    /// Unit direction in `(λ, μ, β)` with `μ = α + 1`.
    pub direction: [f64; 3],
    pub lambda: f64,
    pub alpha: f64,
    pub beta: f64,
    pub label: Option<CaseLabel>,
}

fn sphere_sample(tau: TauKind, radius: f64, d: [f64; 3]) -> SphereSample {
    let (lambda, alpha, beta) = (radius * d[0], radius * d[1] - 1.0, radius * d[2]);
    let label = classify_case(tau, lambda, alpha, beta, CLASSIFY_TOL).ok();
    SphereSample { direction: d, lambda, alpha, beta, label }
}

/// Fibonacci-lattice directions on the unit sphere.
pub fn sphere_directions(samples: usize) -> Vec<[f64; 3]> {
    let n = samples.max(1);
    let golden = core::f64::consts::PI * (3.0 - sqrt(5.0));
    (0..n)
        .map(|k| {
            let z = 1.0 - 2.0 * (k as f64 + 0.5) / n as f64;
            let r = sqrt((1.0 - z * z).max(0.0));
            let th = golden * k as f64;
            [r * cos(th), r * sin(th), z]
        })
        .collect()
}

pub fn sweep_sphere(tau: TauKind, radius: f64, samples: usize) -> Vec<SphereSample> {
    sphere_directions(samples).into_iter().map(|d| sphere_sample(tau, radius, d)).collect()
}

/// Points that realize boundary cases near the origin: on the sphere where
/// possible, plus the centre itself for the fully degenerate case.
pub fn sphere_witnesses(tau: TauKind, radius: f64) -> Vec<SphereSample> {
    let mut out = Vec::new();
    let mut add = |l: f64, mu: f64, b: f64| {
        let n = sqrt(l * l + mu * mu + b * b);
        let d = if n > 0.0 { [l / n, mu / n, b / n] } else { [0.0, 0.0, 0.0] };
        let label = classify_case(tau, l, mu - 1.0, b, CLASSIFY_TOL).ok();
        out.push(SphereSample { direction: d, lambda: l, alpha: mu - 1.0, beta: b, label });
    };
    add(0.0, 0.0, 0.0);
    for reg in Regime::for_tau(tau) {
        for sign in [-1.0, 1.0] {
            // Curves through the origin parametrized by |β| = s.
            for rule in 0..16u8 {
                let point = |s: f64| -> Option<(f64, f64, f64)> {
                    let b = sign * s;
                    let a0 = if tau == TauKind::Inv { alpha0_or_limit(b).0 } else { -1.0 };
                    let alpha = match reg {
                        Regime::Thm1 | Regime::Thm4 => a0,
                        Regime::Thm2 | Regime::Thm5 => a0 + s,
                        _ => a0 - s,
                    };
                    let bs = Boundaries::new(tau, alpha, b, CLASSIFY_TOL).ok()?;
                    let vals: Vec<f64> = bs.values.iter().map(|v| v.value).collect();
                    let r = usize::from(rule);
                    let lambda = if r % 2 == 1 {
                        *vals.get(r / 2)?
                    } else {
                        let k = r / 2;
                        if k > vals.len() {
                            return None;
                        }
                        let lo = if k == 0 { vals[0] - s } else { vals[k - 1] };
                        let hi = if k == vals.len() { vals[k - 1] + s } else { vals[k] };
                        0.5 * (lo + hi)
                    };
                    Some((lambda, alpha + 1.0, b))
                };
                let norm = |s: f64| point(s).map(|(l, m, b)| sqrt(l * l + m * m + b * b) - radius).unwrap_or(f64::NAN);
                if let Ok(s) = bisect(norm, 1e-9 * radius, radius, 1e-15) {
                    if let Some((l, m, b)) = point(s) {
                        add(l, m, b);
                    }
                }
            }
        }
        // β = 0 slice: cases 4, 5, 6.
        let mu = match reg {
            Regime::Thm1 | Regime::Thm4 => 0.0,
            Regime::Thm2 | Regime::Thm5 => 1.0,
            _ => -1.0,
        };
        for l in [-1.0, 0.0, 1.0] {
            let n = sqrt(l * l + mu * mu);
            if n > 0.0 {
                add(radius * l / n, radius * mu / n, 0.0);
            }
        }
    }
    out
}

/// Checks that `β` is admissible.
pub fn beta_in_range(beta: f64) -> bool {
    beta.abs() < BETA_MAX
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha0_values() {
        let s6 = sqrt(6.0);
        assert!((alpha0(0.5).unwrap() - (1.0 - s6)).abs() < 1e-14);
        assert!((mu0(0.5).unwrap() - (2.0 - s6)).abs() < 1e-14);
        assert!(matches!(alpha0(0.0), Err(Error::DegenerateDenominator { .. })));
        assert_eq!(alpha0_or_limit(0.0), (-1.0, true));
    }

    #[test]
    fn closed_form_values() {
        assert!((l1(0.5) + 0.091_751_7).abs() < 1e-7);
        assert!((m0(-1.0, 0.5) + 0.271_286).abs() < 1e-6);
        assert!((m2(-1.0, 0.5) - 0.228_714).abs() < 1e-6);
        let l0_half = (-12.0 + sqrt(6.0) + sqrt(34.0)) / 12.0;
        assert!((l0(0.5) - l0_half).abs() < 1e-14);
        assert!((m0(alpha0(0.5).unwrap(), 0.5) - l0(0.5)).abs() < 1e-9);
    }

    #[test]
    fn l2_oracle_differs_from_print() {
        let l = l2(0.5).unwrap();
        assert!((l - 0.174_038_1).abs() < 1e-6);
        assert!((l - m2(alpha0(0.5).unwrap(), 0.5)).abs() < 1e-12);
        assert!((l2_printed(0.5) - 0.2027).abs() < 1e-3);
    }

    #[test]
    fn oracle_matches_formulas() {
        for a in [-0.5, -1.0, -1.8] {
            for k in 1..=7 {
                let b = 0.1 * k as f64;
                let hi = solve_connection_lambda(TauKind::Inv, a, b, Connection::HI).unwrap();
                let hj = solve_connection_lambda(TauKind::Inv, a, b, Connection::HJ).unwrap();
                let ij = solve_connection_lambda(TauKind::Inv, a, b, Connection::IJ).unwrap();
                assert!((hi - m0(a, b)).abs() < 1e-8);
                assert!((hj - m1(b)).abs() < 1e-8);
                assert!((ij - m2(a, b)).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn hj_connection_ends_at_three_quarters() {
        assert!(solve_connection_lambda(TauKind::Inv, -1.0, 0.74, Connection::HJ).is_ok());
        assert!(solve_connection_lambda(TauKind::Inv, -1.0, 0.8, Connection::HJ).is_err());
        // The closed form still returns a value whose partner lies past u = 1.
        let u1 = 0.8 - m1(0.8);
        assert!(u1 > 1.0);
    }

    #[test]
    fn label_examples() {
        assert_eq!(classify_case(TauKind::Inv, -0.2, -1.0, 0.5, CLASSIFY_TOL).unwrap(), CaseLabel::new(11, 2));
        assert_eq!(classify_case(TauKind::Vis, 0.0, -1.0, 0.5, CLASSIFY_TOL).unwrap(), CaseLabel::new(10, 4));
        assert_eq!(classify_case(TauKind::Inv, 0.9 - 1e-12, -1.0, 0.5, CLASSIFY_TOL).unwrap(), CaseLabel::new(21, 2));
        assert_eq!(classify_case(TauKind::Inv, l1(0.5), -1.0, 0.5, CLASSIFY_TOL).unwrap(), CaseLabel::new(12, 2));
        let l = -0.5 + 11.0 * sqrt(6.0) / 60.0;
        assert_eq!(classify_case(TauKind::Inv, l, -1.0, 0.5, CLASSIFY_TOL).unwrap(), CaseLabel::new(13, 2));
    }

    #[test]
    fn class_table() {
        assert_eq!(topological_class(CaseLabel::new(15, 2)).representative, CaseLabel::new(13, 1));
        assert_eq!(topological_class(CaseLabel::new(13, 2)).representative, CaseLabel::new(13, 2));
        assert_eq!(topological_class(CaseLabel::new(9, 3)).representative, CaseLabel::new(9, 1));
        assert_eq!(topological_class(CaseLabel::new(21, 3)).representative, CaseLabel::new(19, 1));
        assert_eq!(class_count(TauKind::Inv), 25);
        assert_eq!(class_count(TauKind::Vis), 39);
        assert_eq!(all_labels(TauKind::Inv).len(), 61);
    }

    #[test]
    fn label_parse_roundtrip() {
        let l: CaseLabel = "13_2".parse().unwrap();
        assert_eq!(l, CaseLabel::new(13, 2));
        assert_eq!(alloc::format!("{l}"), "13_2");
        assert!("22_2".parse::<CaseLabel>().is_err());
        assert!("14_4".parse::<CaseLabel>().is_err());
    }

    #[test]
    fn vis_enumeration_complete() {
        for reg in Regime::for_tau(TauKind::Vis) {
            assert_eq!(enumerate_cases(TauKind::Vis, reg).len(), 13, "{reg:?}");
        }
    }

    #[test]
    fn one_cell_grid_matches_classify() {
        let d = sweep_grid(TauKind::Inv, -1.0, (-0.3, -0.1), (0.45, 0.55), (1, 1));
        assert_eq!(d.cells.len(), 1);
        assert_eq!(d.cells[0].label, Some(classify_case(TauKind::Inv, -0.2, -1.0, 0.5, CLASSIFY_TOL).unwrap()));
    }

    #[test]
    fn sphere_poles_are_case_five() {
        for (mu, th) in [(0.05, 2), (-0.05, 3)] {
            let l = classify_case(TauKind::Inv, 0.0, mu - 1.0, 0.0, CLASSIFY_TOL).unwrap();
            assert_eq!(l, CaseLabel::new(5, th));
        }
    }
}
