//! One-dimensional quadrature: adaptive Simpson, adaptive Gauss-Kronrod
//! (7/15 point pair, vector-valued integrands) and fixed Gauss-Legendre.

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
// Gauss weights for nodes XGK[1], XGK[3], XGK[5] and the centre.
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

const GL8_X: [f64; 4] = [
    0.183434642495649804939476142360184,
    0.525532409916328985817739049189246,
    0.796666477413626739591553936475830,
    0.960289856497536231683560868569473,
];
const GL8_W: [f64; 4] = [
    0.362683783378361982965150449277195,
    0.313706645877887287337962201986601,
    0.222381034453374470544355994426241,
    0.101228536290376259152531354309962,
];

/// Adaptive Simpson with Richardson correction. `tol` is absolute; pieces
/// already resolved to rounding level are accepted regardless.
pub fn adaptive_simpson<F>(f: F, a: f64, b: f64, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if a == b {
        return Ok(0.0);
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let mut err_budget_used = 0.0;
    let v = simpson_rec(&f, a, b, fa, fm, fb, whole, tol, 60, &mut err_budget_used);
    if err_budget_used > tol {
        return Err(Error::Quadrature {
            err: err_budget_used,
            tol,
        });
    }
    Ok(v)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec<F>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    unresolved: &mut f64,
) -> f64
where
    F: Fn(f64) -> f64,
{
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || lm == a || rm == b {
        *unresolved += delta.abs() / 15.0;
        return left + right + delta / 15.0;
    }
    // a tolerance below the local rounding level cannot be met by refining
    let floor = 16.0 * f64::EPSILON * (left.abs() + right.abs());
    if delta.abs() <= (15.0 * tol).max(floor) {
        return left + right + delta / 15.0;
    }
    simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, unresolved)
        + simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, unresolved)
}

/// Result of a Gauss-Kronrod integration of a vector-valued integrand.
#[derive(Debug, Clone, Copy)]
pub struct QuadOutput<const N: usize> {
    pub value: [f64; N],
    pub abs_err: [f64; N],
    /// Integral of the absolute value, per component.
    pub abs_value: [f64; N],
}

struct Segment<const N: usize> {
    a: f64,
    b: f64,
    value: [f64; N],
    err: [f64; N],
    abs_value: [f64; N],
}

fn gk15<F, const N: usize>(f: &F, a: f64, b: f64) -> Segment<N>
where
    F: Fn(f64) -> [f64; N],
{
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = [0.0; N];
    let mut gauss = [0.0; N];
    let mut absv = [0.0; N];
    for k in 0..N {
        kron[k] = WGK[7] * fc[k];
        gauss[k] = WG[3] * fc[k];
        absv[k] = WGK[7] * fc[k].abs();
    }
    for j in 0..7 {
        let dx = h * XGK[j];
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        for k in 0..N {
            kron[k] += WGK[j] * (f1[k] + f2[k]);
            absv[k] += WGK[j] * (f1[k].abs() + f2[k].abs());
            if j % 2 == 1 {
                gauss[k] += WG[j / 2] * (f1[k] + f2[k]);
            }
        }
    }
    let mut err = [0.0; N];
    for k in 0..N {
        kron[k] *= h;
        gauss[k] *= h;
        absv[k] *= h.abs();
        let e = (kron[k] - gauss[k]).abs();
        // QUADPACK-style rescaling of the raw Gauss/Kronrod difference
        let scaled = if absv[k] > 0.0 && e > 0.0 {
            absv[k] * (200.0 * e / absv[k]).powf(1.5).min(1.0)
        } else {
            e
        };
        err[k] = scaled.max(50.0 * f64::EPSILON * absv[k]);
    }
    Segment {
        a,
        b,
        value: kron,
        err,
        abs_value: absv,
    }
}

/// Adaptive Gauss-Kronrod over a list of breakpoints. Each component `k`
/// is accepted once its error is below `abs_tol + rel_tol * ∫|f_k|`.
pub fn gauss_kronrod<F, const N: usize>(
    f: F,
    breakpoints: &[f64],
    rel_tol: f64,
    abs_tol: f64,
    max_segments: usize,
) -> Result<QuadOutput<N>>
where
    F: Fn(f64) -> [f64; N],
{
    let mut segs: Vec<Segment<N>> = breakpoints
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| gk15(&f, w[0], w[1]))
        .collect();
    loop {
        let mut value = [0.0; N];
        let mut err = [0.0; N];
        let mut absv = [0.0; N];
        for s in &segs {
            for k in 0..N {
                value[k] += s.value[k];
                err[k] += s.err[k];
                absv[k] += s.abs_value[k];
            }
        }
        let ok = (0..N).all(|k| err[k] <= abs_tol + rel_tol * absv[k]);
        if ok {
            return Ok(QuadOutput {
                value,
                abs_err: err,
                abs_value: absv,
            });
        }
        if segs.len() >= max_segments {
            let worst = (0..N)
                .map(|k| err[k] / (abs_tol + rel_tol * absv[k]))
                .fold(0.0, f64::max);
            return Err(Error::Quadrature {
                err: worst * rel_tol,
                tol: rel_tol,
            });
        }
        // split the segment with the largest normalised error
        let (idx, _) = segs
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let w = (0..N)
                    .map(|k| s.err[k] / (abs_tol + rel_tol * absv[k]).max(f64::MIN_POSITIVE))
                    .fold(0.0, f64::max);
                (i, w)
            })
            .fold((0, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
        let s = segs.swap_remove(idx);
        let m = 0.5 * (s.a + s.b);
        if m <= s.a || m >= s.b {
            return Err(Error::Quadrature {
                err: s.err.iter().cloned().fold(0.0, f64::max),
                tol: rel_tol,
            });
        }
        segs.push(gk15(&f, s.a, m));
        segs.push(gk15(&f, m, s.b));
    }
}

/// Scalar convenience wrapper around [`gauss_kronrod`].
pub fn integrate<F>(f: F, a: f64, b: f64, rel_tol: f64, abs_tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let (lo, hi, sign) = if a <= b { (a, b, 1.0) } else { (b, a, -1.0) };
    let out = gauss_kronrod(|x| [f(x)], &[lo, hi], rel_tol, abs_tol, 2000)?;
    Ok(sign * out.value[0])
}

/// Fixed 8-point Gauss-Legendre rule on `[a, b]`.
pub fn gauss_legendre8<F>(f: F, a: f64, b: f64) -> f64
where
    F: Fn(f64) -> f64,
{
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut s = 0.0;
    for i in 0..4 {
        s += GL8_W[i] * (f(c - h * GL8_X[i]) + f(c + h * GL8_X[i]));
    }
    s * h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_polynomial_and_exp() {
        let v = adaptive_simpson(|x| x.powi(3) - x, 0.0, 2.0, 1e-12).unwrap();
        assert!((v - 2.0).abs() < 1e-12);
        let v = adaptive_simpson(f64::exp, 0.0, 1.0, 1e-13).unwrap();
        assert!((v - (1f64.exp() - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn kronrod_gaussian_moments() {
        let out = gauss_kronrod(
            |x| {
                let w = (-x * x).exp();
                [w, x * w, x * x * w]
            },
            &[-12.0, 0.0, 12.0],
            1e-13,
            1e-300,
            500,
        )
        .unwrap();
        let sp = std::f64::consts::PI.sqrt();
        assert!((out.value[0] - sp).abs() < 1e-13);
        assert!(out.value[1].abs() < 1e-14);
        assert!((out.value[2] - 0.5 * sp).abs() < 1e-13);
    }

    #[test]
    fn kronrod_reversed_interval() {
        let v = integrate(|x| x.cos(), 1.0, 0.0, 1e-13, 0.0).unwrap();
        assert!((v + 1f64.sin()).abs() < 1e-13);
    }

    #[test]
    fn gauss_legendre_exact_for_degree_15() {
        let v = gauss_legendre8(|x| x.powi(15) + x.powi(14), -1.0, 1.0);
        assert!((v - 2.0 / 15.0).abs() < 1e-14);
    }
}
