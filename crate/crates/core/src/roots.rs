//! Scalar root finding on brackets.
//!
//! Everything here assumes a continuous function with a sign change on
//! the supplied interval. The safeguarded Newton iteration falls back to
//! bisection whenever a Newton step leaves the current bracket or fails
//! to shrink it fast enough.

use crate::error::{Error, Result};

const MAX_ITER: usize = 200;

/// Plain bisection. Returns the midpoint of the final bracket.
pub fn bisect<F>(mut f: F, mut a: f64, mut b: f64, xtol: f64) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    let mut fa = f(a);
    let fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::NonConvergence(format!(
            "no sign change on [{a}, {b}] (f = {fa}, {fb})"
        )));
    }
    for _ in 0..MAX_ITER {
        let m = 0.5 * (a + b);
        if (b - a).abs() <= xtol || m == a || m == b {
            return Ok(m);
        }
        let fm = f(m);
        if fm == 0.0 {
            return Ok(m);
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

/// Safeguarded Newton iteration on a bracket. `fdf` returns `(f, f')`.
pub fn newton_bisect<F>(fdf: F, a: f64, b: f64, xtol: f64) -> Result<f64>
where
    F: FnMut(f64) -> (f64, f64),
{
    newton_bisect_from(fdf, a, b, 0.5 * (a + b), xtol)
}

/// As [`newton_bisect`], starting from `x0` (clamped into the bracket).
pub fn newton_bisect_from<F>(mut fdf: F, a: f64, b: f64, x0: f64, xtol: f64) -> Result<f64>
where
    F: FnMut(f64) -> (f64, f64),
{
    let (fa, _) = fdf(a);
    let (fb, _) = fdf(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::NonConvergence(format!(
            "no sign change on [{a}, {b}] (f = {fa}, {fb})"
        )));
    }
    // orient so that f(lo) < 0 < f(hi)
    let (mut lo, mut hi) = if fa < 0.0 { (a, b) } else { (b, a) };
    let mut x = if x0 > a.min(b) && x0 < a.max(b) {
        x0
    } else {
        0.5 * (a + b)
    };
    let mut dx_old = (b - a).abs();
    let mut dx = dx_old;
    let (mut fx, mut dfx) = fdf(x);
    for _ in 0..MAX_ITER {
        let newton_out = ((x - hi) * dfx - fx) * ((x - lo) * dfx - fx) > 0.0;
        let too_slow = (2.0 * fx).abs() > (dx_old * dfx).abs();
        if newton_out || too_slow || dfx == 0.0 {
            dx_old = dx;
            dx = 0.5 * (hi - lo);
            x = lo + dx;
            if x == lo {
                return Ok(x);
            }
        } else {
            dx_old = dx;
            dx = fx / dfx;
            let prev = x;
            x -= dx;
            if x == prev {
                return Ok(x);
            }
        }
        if dx.abs() <= xtol {
            return Ok(x);
        }
        let r = fdf(x);
        fx = r.0;
        dfx = r.1;
        if fx == 0.0 {
            return Ok(x);
        }
        if fx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        if (hi - lo).abs() <= xtol {
            return Ok(x);
        }
    }
    Err(Error::NonConvergence(format!(
        "newton/bisection stalled near {x} (f = {fx})"
    )))
}

/// Brent's method (inverse quadratic interpolation with bisection fallback).
pub fn brent<F>(mut f: F, a: f64, b: f64, xtol: f64) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    let (mut a, mut b) = (a, b);
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::NonConvergence(format!(
            "no sign change on [{a}, {b}] (f = {fa}, {fb})"
        )));
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..MAX_ITER {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b);
    }
    Err(Error::NonConvergence(format!("brent stalled near {b}")))
}

/// Real roots of the depressed cubic `z^3 + p z + q = 0`, ascending and
/// Newton-polished. Repeated roots are reported once.
pub fn depressed_cubic_roots(p: f64, q: f64) -> Vec<f64> {
    let disc = -(4.0 * p * p * p + 27.0 * q * q);
    let mut roots = if p < 0.0 && disc > 0.0 {
        let r = (-p / 3.0).sqrt();
        let arg = ((3.0 * q) / (2.0 * p) * (-3.0 / p).sqrt()).clamp(-1.0, 1.0);
        let phi = arg.acos() / 3.0;
        (0..3)
            .map(|k| 2.0 * r * (phi - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos())
            .collect::<Vec<_>>()
    } else if disc == 0.0 && p != 0.0 {
        let z = 3.0 * q / p;
        vec![z, -0.5 * z]
    } else {
        let h = (q * q / 4.0 + p * p * p / 27.0).max(0.0).sqrt();
        let u = (-0.5 * q + h).cbrt();
        let v = (-0.5 * q - h).cbrt();
        vec![u + v]
    };
    for z in roots.iter_mut() {
        for _ in 0..3 {
            let f = *z * *z * *z + p * *z + q;
            let df = 3.0 * *z * *z + p;
            if df == 0.0 {
                break;
            }
            let step = f / df;
            if !step.is_finite() {
                break;
            }
            *z -= step;
        }
    }
    roots.sort_by(|a, b| a.total_cmp(b));
    roots.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * (1.0 + a.abs()));
    roots
}

/// Walk from `x0` in steps of `step` (doubling each time) until `pred` holds,
/// staying inside `limit`. Returns the first point satisfying `pred` together
/// with the previous point.
pub fn expand_until<P>(x0: f64, step: f64, limit: f64, mut pred: P) -> Option<(f64, f64)>
where
    P: FnMut(f64) -> bool,
{
    let mut prev = x0;
    let mut h = step;
    for _ in 0..200 {
        let mut x = x0 + h;
        let past = if step > 0.0 { x >= limit } else { x <= limit };
        if past {
            x = limit;
        }
        if pred(x) {
            return Some((prev, x));
        }
        if past {
            return None;
        }
        prev = x;
        h *= 2.0;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bracketed_solvers_agree() {
        let f = |x: f64| x * x - 2.0;
        let r1 = bisect(f, 0.0, 2.0, 1e-14).unwrap();
        let r2 = brent(f, 0.0, 2.0, 1e-14).unwrap();
        let r3 = newton_bisect(|x| (x * x - 2.0, 2.0 * x), 0.0, 2.0, 1e-15).unwrap();
        for r in [r1, r2, r3] {
            assert!((r - 2f64.sqrt()).abs() < 1e-13, "{r}");
        }
    }

    #[test]
    fn no_sign_change_is_an_error() {
        assert!(bisect(|x| x * x + 1.0, -1.0, 1.0, 1e-12).is_err());
        assert!(brent(|x| x * x + 1.0, -1.0, 1.0, 1e-12).is_err());
    }

    #[test]
    fn cubic_three_and_one_real_roots() {
        // (z-1)(z-2)(z+3) = z^3 - 7z + 6
        let r = depressed_cubic_roots(-7.0, 6.0);
        assert_eq!(r.len(), 3);
        for (a, b) in r.iter().zip([-3.0, 1.0, 2.0]) {
            assert!((a - b).abs() < 1e-13);
        }
        let r = depressed_cubic_roots(0.0, -8.0);
        assert_eq!(r.len(), 1);
        assert!((r[0] - 2.0).abs() < 1e-14);
        let r = depressed_cubic_roots(3.0, 1.0);
        assert_eq!(r.len(), 1);
        assert!((r[0].powi(3) + 3.0 * r[0] + 1.0).abs() < 1e-13);
    }

    #[test]
    fn cubic_double_root() {
        // (z-1)^2 (z+2) = z^3 - 3z + 2
        let r = depressed_cubic_roots(-3.0, 2.0);
        assert_eq!(r.len(), 2);
        assert!((r[0] + 2.0).abs() < 1e-12);
        assert!((r[1] - 1.0).abs() < 1e-6);
    }
}
