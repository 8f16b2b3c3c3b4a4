//! The fold-saddle family: fields, Lie derivatives and named points.

use crate::{Error, Result};

/// Which kind of fold the upper field has at `d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum TauKind {
    Inv,
    Vis,
}

impl TauKind {
    /// Linear coefficient of `X.f` in `u = x - λ`.
    pub fn alpha1(self) -> f64 {
        match self {
            TauKind::Inv => -1.0,
            TauKind::Vis => 1.0,
        }
    }

    /// Quadratic coefficient of `X.f` in `u = x - λ`.
    pub fn alpha2(self) -> f64 {
        match self {
            TauKind::Inv => 1.0,
            TauKind::Vis => 0.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            TauKind::Inv => "inv",
            TauKind::Vis => "vis",
        }
    }
}

impl core::str::FromStr for TauKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "inv" => Ok(TauKind::Inv),
            "vis" => Ok(TauKind::Vis),
            _ => Err(Error::ParameterOutOfRange { name: "tau", value: f64::NAN, bound: "tau in {inv, vis}" }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Side {
    Upper,
    Lower,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Visibility {
    Visible,
    Invisible,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub const fn on_sigma(x: f64) -> Self {
        Point { x, y: 0.0 }
    }
}

/// Parameters of the family. Build with [`FamilyParams::new`] to get the
/// range checks.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FamilyParams {
    pub tau: TauKind,
    pub lambda: f64,
    pub alpha: f64,
    pub beta: f64,
    pub epsilon0: f64,
}

pub const DEFAULT_EPSILON0: f64 = -1.0;

/// Upper bound on |β|, keeps 9 - 12β² positive.
pub const BETA_MAX: f64 = 0.866_025_403_784_438_6;

impl FamilyParams {
    pub fn new(tau: TauKind, lambda: f64, alpha: f64, beta: f64) -> Result<Self> {
        Self::with_epsilon0(tau, lambda, alpha, beta, DEFAULT_EPSILON0)
    }

    pub fn with_epsilon0(tau: TauKind, lambda: f64, alpha: f64, beta: f64, epsilon0: f64) -> Result<Self> {
        if !(epsilon0 < 0.0) {
            return Err(Error::ParameterOutOfRange { name: "epsilon0", value: epsilon0, bound: "epsilon0 < 0" });
        }
        if !(lambda > -1.0 && lambda < 1.0) {
            return Err(Error::ParameterOutOfRange { name: "lambda", value: lambda, bound: "-1 < lambda < 1" });
        }
        if !(beta.abs() < BETA_MAX) {
            return Err(Error::ParameterOutOfRange {
                name: "beta",
                value: beta,
                bound: "-sqrt(3)/2 < beta < sqrt(3)/2",
            });
        }
        if !(alpha > -1.0 + epsilon0 && alpha < 0.0) {
            return Err(Error::ParameterOutOfRange {
                name: "alpha",
                value: alpha,
                bound: "-1 + epsilon0 < alpha < 0",
            });
        }
        Ok(FamilyParams { tau, lambda, alpha, beta, epsilon0 })
    }
}

/// Axis-aligned analysis rectangle.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Window {
    pub xmin: f64,
    pub xmax: f64,
    pub ymin: f64,
    pub ymax: f64,
}

impl Default for Window {
    fn default() -> Self {
        Window { xmin: -1.0, xmax: 1.0, ymin: -1.0, ymax: 1.0 }
    }
}

impl Window {
    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.xmin && p.x <= self.xmax && p.y >= self.ymin && p.y <= self.ymax
    }
}

/// Named points of the configuration. Everything except `S` and `d` lives on Σ.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct KeyPoints {
    pub d: Point,
    pub s: Point,
    pub h: Option<Point>,
    pub j: Option<Point>,
    /// Lower fold: `e` when β < 0, `i` when β > 0.
    pub e_or_i: Option<Point>,
}

impl KeyPoints {
    pub fn e(&self) -> Option<Point> {
        if self.s.y > 0.0 {
            self.e_or_i
        } else {
            None
        }
    }

    pub fn i(&self) -> Option<Point> {
        if self.s.y < 0.0 {
            self.e_or_i
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FilippovSystem {
    pub params: FamilyParams,
    pub window: Window,
}

/// Builds the system with the default window `[-1, 1]²`.
pub fn make_system(tau: TauKind, lambda: f64, alpha: f64, beta: f64) -> Result<FilippovSystem> {
    Ok(FilippovSystem { params: FamilyParams::new(tau, lambda, alpha, beta)?, window: Window::default() })
}

/// Abscissa where `Y.f` vanishes on Σ.
pub fn lower_fold_abscissa(alpha: f64, beta: f64) -> f64 {
    (1.0 + alpha) * beta / (1.0 - alpha)
}

/// Upper-arc quadrature `F(u) = α1 u²/2 + α2 u³/3`; orbits of `X` satisfy
/// `y - F(x - λ) = const`.
pub fn upper_integral(tau: TauKind, u: f64) -> f64 {
    tau.alpha1() * u * u / 2.0 + tau.alpha2() * u * u * u / 3.0
}

impl FilippovSystem {
    pub fn new(params: FamilyParams, window: Window) -> Self {
        FilippovSystem { params, window }
    }

    pub fn tau(&self) -> TauKind {
        self.params.tau
    }

    pub fn lambda(&self) -> f64 {
        self.params.lambda
    }

    pub fn alpha(&self) -> f64 {
        self.params.alpha
    }

    pub fn beta(&self) -> f64 {
        self.params.beta
    }

    // Y = J (x, y + β) with J = [[c, a], [a, c]].
    fn lower_coeffs(&self) -> (f64, f64) {
        let al = self.params.alpha;
        ((1.0 + al) / 2.0, (al - 1.0) / 2.0)
    }

    /// `X.f` at abscissa `x` (independent of `y`).
    pub fn xf(&self, x: f64) -> f64 {
        let u = x - self.params.lambda;
        let t = self.params.tau;
        t.alpha1() * u + t.alpha2() * u * u
    }

    /// `Y.f` at a point on Σ.
    pub fn yf(&self, x: f64) -> f64 {
        self.lower_field(Point::on_sigma(x)).1
    }

    pub fn upper_field(&self, p: Point) -> (f64, f64) {
        (1.0, self.xf(p.x))
    }

    pub fn lower_field(&self, p: Point) -> (f64, f64) {
        let (c, a) = self.lower_coeffs();
        let w = p.y + self.params.beta;
        (c * p.x + a * w, a * p.x + c * w)
    }

    pub fn field(&self, side: Side, p: Point) -> (f64, f64) {
        match side {
            Side::Upper => self.upper_field(p),
            Side::Lower => self.lower_field(p),
        }
    }

    /// `Z.f`, `Z².f` or `Z³.f` for `Z` the field of `side`. Orders above 3 are
    /// computed the same way.
    pub fn lie_derivative(&self, side: Side, p: Point, order: u32) -> f64 {
        match side {
            Side::Upper => {
                let u = p.x - self.params.lambda;
                let t = self.params.tau;
                // X = (1, g(u)) so X^k.f = g^(k-1)(u).
                match order {
                    0 => p.y,
                    1 => t.alpha1() * u + t.alpha2() * u * u,
                    2 => t.alpha1() + 2.0 * t.alpha2() * u,
                    3 => 2.0 * t.alpha2(),
                    _ => 0.0,
                }
            }
            Side::Lower => {
                // Y^k.f = e2ᵀ J^k v with v = (x, y + β).
                let (c, a) = self.lower_coeffs();
                let mut v = (p.x, p.y + self.params.beta);
                for _ in 0..order {
                    v = (c * v.0 + a * v.1, a * v.0 + c * v.1);
                }
                v.1
            }
        }
    }

    pub fn key_points(&self) -> KeyPoints {
        let b = self.params.beta;
        let feet = b > 0.0;
        KeyPoints {
            d: Point::on_sigma(self.params.lambda),
            s: Point::new(0.0, -b),
            h: feet.then(|| Point::on_sigma(-b)),
            j: feet.then(|| Point::on_sigma(b)),
            e_or_i: (b != 0.0).then(|| Point::on_sigma(lower_fold_abscissa(self.params.alpha, b))),
        }
    }

    /// Visibility of a tangency of the field of `side` at `p`.
    pub fn fold_kind(&self, side: Side, p: Point) -> Result<Visibility> {
        const TOL: f64 = 1e-12;
        let first = self.lie_derivative(side, p, 1);
        let second = self.lie_derivative(side, p, 2);
        if first.abs() > TOL || second.abs() < TOL {
            return Err(Error::NotAFold { x: p.x, y: p.y });
        }
        let visible = match side {
            Side::Upper => second > 0.0,
            Side::Lower => second < 0.0,
        };
        Ok(if visible { Visibility::Visible } else { Visibility::Invisible })
    }

    /// Slope of the line `Y.f = 0`: `y = k x - β` with `k = (1-α)/(1+α)`.
    /// `None` when α = -1 (the locus is the vertical line `x = 0`).
    pub fn lower_fold_line_slope(&self) -> Option<f64> {
        let al = self.params.alpha;
        if (1.0 + al).abs() < 1e-14 {
            None
        } else {
            Some((1.0 - al) / (1.0 + al))
        }
    }

    /// Second root of `X.f` on Σ (only for `inv`).
    pub fn second_upper_root(&self) -> Option<f64> {
        match self.params.tau {
            TauKind::Inv => Some(self.params.lambda + 1.0),
            TauKind::Vis => None,
        }
    }

    /// Eigenvalue-pair helper: trace and determinant of the lower linear part.
    pub fn lower_trace_det(&self) -> (f64, f64) {
        let (c, a) = self.lower_coeffs();
        (2.0 * c, c * c - a * a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sys(tau: TauKind, l: f64, a: f64, b: f64) -> FilippovSystem {
        make_system(tau, l, a, b).unwrap()
    }

    #[test]
    fn inv_fold_saddle_fields() {
        let s = sys(TauKind::Inv, 0.0, -1.0, 0.0);
        let p = Point::new(0.3, -0.2);
        assert_eq!(s.upper_field(p), (1.0, -0.3 + 0.09));
        assert_eq!(s.lower_field(p), (0.2, -0.3));
    }

    #[test]
    fn vis_fold_saddle_fields() {
        let s = sys(TauKind::Vis, 0.0, -1.0, 0.0);
        let p = Point::new(0.3, -0.2);
        assert_eq!(s.upper_field(p), (1.0, 0.3));
        assert_eq!(s.lower_field(p), (0.2, -0.3));
    }

    #[test]
    fn lower_field_substitution() {
        let s = sys(TauKind::Inv, 0.2, -0.5, 0.1);
        assert!((s.lower_field(Point::new(1.0, 0.0)).0 - 0.175).abs() < 1e-15);
    }

    #[test]
    fn fold_derivatives() {
        let s = sys(TauKind::Inv, 0.3, -1.0, 0.5);
        let d = Point::on_sigma(0.3);
        assert_eq!(s.lie_derivative(Side::Upper, d, 1), 0.0);
        assert_eq!(s.lie_derivative(Side::Upper, d, 2), -1.0);
        assert_eq!(s.fold_kind(Side::Upper, d).unwrap(), Visibility::Invisible);
        let v = sys(TauKind::Vis, 0.3, -1.0, 0.5);
        assert_eq!(v.lie_derivative(Side::Upper, d, 2), 1.0);
        assert_eq!(v.fold_kind(Side::Upper, d).unwrap(), Visibility::Visible);
    }

    #[test]
    fn lower_second_derivative_at_i() {
        let s = sys(TauKind::Inv, 0.0, -1.0, 0.5);
        let y2 = s.lie_derivative(Side::Lower, Point::on_sigma(0.0), 2);
        assert!((y2 - 0.5).abs() < 1e-15);
        assert_eq!(s.fold_kind(Side::Lower, Point::on_sigma(0.0)).unwrap(), Visibility::Invisible);
    }

    #[test]
    fn key_points_with_feet() {
        let kp = sys(TauKind::Inv, 0.1, -0.5, 0.5).key_points();
        assert!((kp.i().unwrap().x - 1.0 / 6.0).abs() < 1e-15);
        assert_eq!(kp.h.unwrap().x, -0.5);
        assert_eq!(kp.j.unwrap().x, 0.5);
        assert_eq!(kp.s, Point::new(0.0, -0.5));
        assert!(kp.e().is_none());
    }

    #[test]
    fn key_points_visible_lower_fold() {
        let s = sys(TauKind::Inv, -0.3, -1.0 / 3.0, -0.3);
        let kp = s.key_points();
        let e = kp.e().unwrap();
        assert!((e.x + 0.15).abs() < 1e-15);
        assert!(kp.h.is_none() && kp.j.is_none());
        assert_eq!(s.fold_kind(Side::Lower, e).unwrap(), Visibility::Visible);
        assert!((s.lie_derivative(Side::Lower, e, 2) + 0.1).abs() < 1e-15);
    }

    #[test]
    fn vis_resonant_i_at_origin() {
        let kp = sys(TauKind::Vis, -0.4, -1.0, 0.5).key_points();
        assert_eq!(kp.i().unwrap().x, 0.0);
    }

    #[test]
    fn range_errors_name_the_bound() {
        let e = make_system(TauKind::Inv, 1.0, -1.0, 0.0).unwrap_err();
        assert!(matches!(e, Error::ParameterOutOfRange { name: "lambda", .. }));
        let e = make_system(TauKind::Inv, 0.0, 0.0, 0.0).unwrap_err();
        assert!(matches!(e, Error::ParameterOutOfRange { name: "alpha", .. }));
        let e = make_system(TauKind::Inv, 0.0, -1.0, 0.9).unwrap_err();
        assert!(matches!(e, Error::ParameterOutOfRange { name: "beta", .. }));
        assert!(make_system(TauKind::Inv, 0.0, -2.0, 0.0).is_err());
    }

    #[test]
    fn not_a_fold() {
        let s = sys(TauKind::Inv, 0.0, -1.0, 0.5);
        assert!(s.fold_kind(Side::Upper, Point::on_sigma(0.2)).is_err());
    }
}
