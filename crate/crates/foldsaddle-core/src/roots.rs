//! Bracketing root finders.

use crate::{Error, Result};

/// Bisection on a sign-changing bracket.
///
/// Stops when the bracket is narrower than `tol` or the residual is exactly
/// zero. Endpoint zeros are returned directly.
pub fn bisect<F: FnMut(f64) -> f64>(mut f: F, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if !(flo.is_finite() && fhi.is_finite()) || flo.signum() == fhi.signum() {
        return Err(Error::NoBracket { lo, hi });
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (hi - lo).abs() <= tol || mid == lo || mid == hi {
            return Ok(mid);
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Samples `f` on `n + 1` evenly spaced points of `[lo, hi]` and bisects every
/// sign change. Non-finite samples break brackets.
pub fn scan_roots<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, n: usize, tol: f64) -> alloc::vec::Vec<f64> {
    let mut out = alloc::vec::Vec::new();
    let n = n.max(1);
    let step = (hi - lo) / n as f64;
    let mut xa = lo;
    let mut fa = f(xa);
    if fa == 0.0 {
        out.push(xa);
    }
    for k in 1..=n {
        let xb = if k == n { hi } else { lo + step * k as f64 };
        let fb = f(xb);
        if fb == 0.0 {
            out.push(xb);
        } else if fa.is_finite() && fb.is_finite() && fa != 0.0 && fa.signum() != fb.signum() {
            if let Ok(r) = bisect(&mut f, xa, xb, tol) {
                out.push(r);
            }
        }
        xa = xb;
        fa = fb;
    }
    out
}

/// Golden-section search for a local minimum of `f` on `[lo, hi]`.
pub fn golden_min<F: FnMut(f64) -> f64>(mut f: F, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    const R: f64 = 0.618_033_988_749_894_8;
    let mut c = hi - R * (hi - lo);
    let mut d = lo + R * (hi - lo);
    let mut fc = f(c);
    let mut fd = f(d);
    while (hi - lo).abs() > tol {
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - R * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + R * (hi - lo);
            fd = f(d);
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisect_finds_sqrt2() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-14).unwrap();
        assert!((r - core::f64::consts::SQRT_2).abs() < 1e-13);
    }

    #[test]
    fn bisect_rejects_same_sign() {
        assert!(matches!(bisect(|x| x * x + 1.0, -1.0, 1.0, 1e-12), Err(Error::NoBracket { .. })));
    }

    #[test]
    fn scan_finds_all_roots_of_cubic() {
        let r = scan_roots(|x| (x - 0.1) * (x + 0.4) * (x - 0.7), -1.0, 1.0, 1000, 1e-13);
        assert_eq!(r.len(), 3);
        assert!((r[0] + 0.4).abs() < 1e-12);
        assert!((r[1] - 0.1).abs() < 1e-12);
        assert!((r[2] - 0.7).abs() < 1e-12);
    }

    #[test]
    fn golden_finds_parabola_vertex() {
        let m = golden_min(|x| (x - 0.3) * (x - 0.3), -1.0, 1.0, 1e-10);
        assert!((m - 0.3).abs() < 1e-8);
    }
}
