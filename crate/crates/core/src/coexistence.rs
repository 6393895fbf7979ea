//! Two-phase region: Maxwell equal areas, Gibbs balance, vapour-pressure
//! curve and the Clapeyron (Rankine-Hugoniot) slope.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::eos::{CriticalPoint, EosSpec, VdwParams};
use crate::error::{Error, Result};
use crate::quadrature::adaptive_simpson;
use crate::roots;
use crate::scalar_fn::ScalarFn;

/// Temperatures above `T_c (1 - NEAR_CRITICAL)` are refused.
pub const NEAR_CRITICAL: f64 = 1e-6;

/// Volume part of a separable entropy, `S = S0(V) + F(T)`. The state
/// surface requires `alpha = 1/S0'`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VolumeEntropySpec {
    pub s0: ScalarFn,
}

impl VolumeEntropySpec {
    /// `S0 = nR ln(V - nb)`.
    pub fn vdw(p: &VdwParams) -> Self {
        Self {
            s0: ScalarFn::LogShift {
                coef: p.n * p.r,
                shift: p.n * p.b,
            },
        }
    }

    pub fn s0(&self, v: f64) -> f64 {
        self.s0.value(v)
    }

    pub fn s0_prime(&self, v: f64) -> f64 {
        self.s0.derivative(v)
    }

    /// Check `S0' > 0` and `alpha S0' = 1` at the given volumes.
    pub fn check_consistency(&self, eos: &EosSpec, volumes: &[f64], rel_tol: f64) -> Result<()> {
        for &v in volumes {
            let d = self.s0_prime(v);
            if !(d > 0.0) {
                return Err(Error::invalid("S0", format!("S0' = {d} is not positive at V = {v}")));
            }
            let prod = d * eos.alpha(v)[0];
            if (prod - 1.0).abs() > rel_tol {
                return Err(Error::invalid(
                    "S0",
                    format!("alpha S0' = {prod} at V = {v}, expected 1"),
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SaturationPoint {
    pub t: f64,
    pub p_sat: f64,
    pub v_l: f64,
    pub v_g: f64,
    pub delta_s: f64,
    pub delta_v: f64,
    pub latent_heat: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoexistenceCurve {
    pub points: Vec<SaturationPoint>,
}

impl CoexistenceCurve {
    pub fn t_range(&self) -> Option<(f64, f64)> {
        Some((self.points.first()?.t, self.points.last()?.t))
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "T,P_sat,V_l,V_g,delta_S,latent_heat")?;
        for p in &self.points {
            writeln!(
                w,
                "{:e},{:e},{:e},{:e},{:e},{:e}",
                p.t, p.p_sat, p.v_l, p.v_g, p.delta_s, p.latent_heat
            )?;
        }
        Ok(())
    }
}

/// Volumes of the local minimum and maximum of the isotherm `P(V)` at
/// `T < T_c` (the spinodal points).
pub fn spinodals(eos: &EosSpec, cp: &CriticalPoint, t: f64) -> Result<(f64, f64)> {
    let slope = |v: f64| eos.isotherm_derivatives_unchecked(v, t).1;
    if !(slope(cp.v_c) > 0.0) {
        return Err(Error::NoTransition { t, t_c: cp.t_c });
    }
    let (lo, hi) = eos.search_range();
    // liquid side: approach the lower domain end geometrically
    let mut prev = cp.v_c;
    let mut left = None;
    for k in 1..200 {
        let v = lo + (cp.v_c - lo) * 0.5f64.powi(k);
        if slope(v) < 0.0 {
            left = Some((v, prev));
            break;
        }
        prev = v;
    }
    let (a0, a1) = left.ok_or_else(|| Error::NonConvergence(format!("no liquid spinodal at T = {t}")))?;
    let v_a = roots::brent(slope, a0, a1, 1e-15 * a1)?;
    let limit = if hi.is_finite() { hi } else { f64::MAX };
    let (b0, b1) = roots::expand_until(cp.v_c, 0.05 * cp.v_c, limit, |v| slope(v) < 0.0)
        .ok_or_else(|| Error::NonConvergence(format!("no vapour spinodal at T = {t}")))?;
    let v_b = roots::brent(slope, b0, b1, 1e-15 * b1)?;
    Ok((v_a, v_b))
}

/// Outer roots `(V_1, V_3)` of `P(V) = p` on the isotherm `T`, given the
/// spinodal volumes `v_a < v_b`.
fn outer_roots(eos: &EosSpec, p: f64, t: f64, v_a: f64, v_b: f64) -> Result<(f64, f64)> {
    let g = |v: f64| {
        let (pv, dpv, _) = eos.isotherm_derivatives_unchecked(v, t);
        (pv - p, dpv)
    };
    let (lo, hi) = eos.domain();
    let mut left = None;
    for k in 1..200 {
        let v = lo + (v_a - lo) * 0.5f64.powi(k);
        if g(v).0 > 0.0 {
            left = Some(v);
            break;
        }
    }
    let l = left.ok_or(Error::BranchCount { p, t, found: 0 })?;
    let v1 = roots::newton_bisect(g, l, v_a, 1e-15 * v_a)?;
    let limit = if hi.is_finite() { hi * (1.0 - 1e-12) } else { f64::MAX };
    let (_, r) =
        roots::expand_until(v_b, 0.05 * v_b, limit, |v| g(v).0 < 0.0).ok_or(Error::BranchCount { p, t, found: 1 })?;
    let v3 = roots::newton_bisect(g, v_b, r, 1e-15 * r)?;
    Ok((v1, v3))
}

fn area_tol(cp: &CriticalPoint) -> f64 {
    1e-14 * cp.p_c.abs() * cp.v_c
}

fn check_temperature(cp: &CriticalPoint, t: f64) -> Result<()> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::invalid("T", format!("temperature must be positive, got {t}")));
    }
    if t >= cp.t_c {
        return Err(Error::NoTransition { t, t_c: cp.t_c });
    }
    if t > cp.t_c * (1.0 - NEAR_CRITICAL) {
        return Err(Error::NearCritical { t, t_c: cp.t_c });
    }
    Ok(())
}

/// Equal-areas residual `A(P) = ∫_{V1}^{V3} (P(V) - P) dV` between the outer
/// roots. Decreasing in `P` with `dA/dP = -(V3 - V1)`.
pub fn equal_area_residual(eos: &EosSpec, p: f64, t: f64) -> Result<f64> {
    let cp = eos.critical_point()?;
    check_temperature(&cp, t)?;
    let (v_a, v_b) = spinodals(eos, &cp, t)?;
    area_between(eos, &cp, p, t, v_a, v_b).map(|(a, _, _)| a)
}

fn area_between(eos: &EosSpec, cp: &CriticalPoint, p: f64, t: f64, v_a: f64, v_b: f64) -> Result<(f64, f64, f64)> {
    let (v1, v3) = outer_roots(eos, p, t, v_a, v_b)?;
    let integrand = |v: f64| eos.isotherm_derivatives_unchecked(v, t).0 - p;
    let tol = area_tol(cp);
    // the gas branch is long at low T; in log V it is nearly polynomial
    let a = adaptive_simpson(integrand, v1, v_a, tol)?
        + adaptive_simpson(integrand, v_a, v_b, tol)?
        + log_volume_integral(integrand, v_b, v3, tol)?;
    Ok((a, v1, v3))
}

/// Gibbs-potential difference `Φ_gas - Φ_liquid` at `(P, T)`: the integral
/// of `V dP` along the isotherm from the liquid root to the gas root,
/// parameterised by `V`. Negative below the saturation pressure.
pub fn gibbs_difference(eos: &EosSpec, p: f64, t: f64) -> Result<f64> {
    let cp = eos.critical_point()?;
    check_temperature(&cp, t)?;
    let roots = eos.solve_volumes(p, t)?;
    if roots.len() != 3 {
        return Err(Error::BranchCount {
            p,
            t,
            found: roots.len(),
        });
    }
    let (v1, v2, v3) = (roots[0], roots[1], roots[2]);
    let integrand = |v: f64| v * eos.isotherm_derivatives_unchecked(v, t).1;
    let tol = area_tol(&cp);
    Ok(adaptive_simpson(integrand, v1, v2, tol)? + log_volume_integral(integrand, v2, v3, tol)?)
}

/// `∫ g dV` over `[a, b]` with `V = e^s`, for positive volumes.
fn log_volume_integral<F: Fn(f64) -> f64>(g: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    if !(a > 0.0) {
        return adaptive_simpson(g, a, b, tol);
    }
    adaptive_simpson(
        |s: f64| {
            let v = s.exp();
            g(v) * v
        },
        a.ln(),
        b.ln(),
        tol,
    )
}

/// Entropy jump `S0(V3) - S0(V1) = ∫ dV / alpha` between two volumes.
pub fn entropy_jump(eos: &EosSpec, v1: f64, v3: f64) -> Result<f64> {
    let tol = 1e-14 * (v3 - v1).abs() / eos.alpha(0.5 * (v1 + v3))[0];
    log_volume_integral(|v| 1.0 / eos.alpha(v)[0], v1, v3, tol)
}

/// Saturation point at temperature `T` by the equal-areas rule.
pub fn maxwell_pressure(eos: &EosSpec, t: f64) -> Result<SaturationPoint> {
    maxwell_pressure_seeded(eos, t, None)
}

/// As [`maxwell_pressure`], with an optional starting guess for `P_sat`.
pub fn maxwell_pressure_seeded(eos: &EosSpec, t: f64, seed: Option<f64>) -> Result<SaturationPoint> {
    let cp = eos.critical_point()?;
    maxwell_with_cp(eos, &cp, t, seed)
}

pub(crate) fn maxwell_with_cp(eos: &EosSpec, cp: &CriticalPoint, t: f64, seed: Option<f64>) -> Result<SaturationPoint> {
    check_temperature(cp, t)?;
    let (v_a, v_b) = spinodals(eos, cp, t)?;
    let p_min = eos.isotherm_derivatives_unchecked(v_a, t).0;
    let p_max = eos.isotherm_derivatives_unchecked(v_b, t).0;
    let area = |p: f64| area_between(eos, cp, p, t, v_a, v_b);

    let mut p_lo = if p_min > 0.0 { p_min } else { 0.5 * p_max };
    let mut guard = 0;
    while area(p_lo)?.0 <= 0.0 {
        p_lo *= 0.5;
        guard += 1;
        if guard > 200 {
            return Err(Error::NonConvergence(format!("no lower pressure bracket at T = {t}")));
        }
    }
    // symmetric-root estimate from the local cubic
    let alpha0 = eos.alpha(cp.v_c)[0];
    let x0 = seed.unwrap_or(cp.p_c + (t - cp.t_c) / alpha0);
    let mut last: Option<(f64, f64, f64)> = None;
    let mut failure = None;
    let p_sat = roots::newton_bisect_from(
        |p| match area(p) {
            Ok((a, v1, v3)) => {
                last = Some((p, v1, v3));
                (a, -(v3 - v1))
            }
            Err(e) => {
                // stop the iteration; the error is reported below
                failure.get_or_insert(e);
                (0.0, 1.0)
            }
        },
        p_lo,
        p_max,
        x0,
        1e-15 * cp.p_c.abs(),
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    let (v1, v3) = match last {
        Some((p, v1, v3)) if p == p_sat => (v1, v3),
        _ => outer_roots(eos, p_sat, t, v_a, v_b)?,
    };
    let residual = area(p_sat)?.0;
    if !residual.is_finite() {
        return Err(Error::NonConvergence(format!(
            "equal-areas residual is not finite at T = {t}"
        )));
    }
    let delta_s = entropy_jump(eos, v1, v3)?;
    Ok(SaturationPoint {
        t,
        p_sat,
        v_l: v1,
        v_g: v3,
        delta_s,
        delta_v: v3 - v1,
        latent_heat: t * delta_s,
    })
}

/// Saturation points on `steps` evenly spaced temperatures in
/// `[T_lo, T_hi]`, each solve seeded from its neighbour.
pub fn coexistence_curve(eos: &EosSpec, t_lo: f64, t_hi: f64, steps: usize) -> Result<CoexistenceCurve> {
    let cp = eos.critical_point()?;
    if !(t_lo > 0.0 && t_lo < t_hi && t_hi < cp.t_c) {
        return Err(Error::invalid(
            "T range",
            format!("need 0 < T_lo < T_hi < T_c = {}, got [{t_lo}, {t_hi}]", cp.t_c),
        ));
    }
    if steps < 2 {
        return Err(Error::invalid("steps", "at least two temperatures are required"));
    }
    let mut points = Vec::with_capacity(steps);
    let mut seed = None;
    // start next to T_c where the cubic seed is best and walk down
    for i in (0..steps).rev() {
        let t = t_lo + (t_hi - t_lo) * i as f64 / (steps - 1) as f64;
        let sp = maxwell_with_cp(eos, &cp, t, seed)
            .map_err(|e| Error::NonConvergence(format!("coexistence point at T = {t} failed: {e}")))?;
        seed = Some(sp.p_sat);
        points.push(sp);
    }
    points.reverse();
    Ok(CoexistenceCurve { points })
}

/// Rankine-Hugoniot speed of the phase boundary, `U = ΔS/ΔV`. Equals the
/// slope `dP_sat/dT` of the vapour-pressure curve.
pub fn clapeyron_speed(sp: &SaturationPoint, s: &VolumeEntropySpec) -> Result<f64> {
    let dv = sp.v_g - sp.v_l;
    if !(dv.abs() > 1e-12 * sp.v_g.abs()) {
        return Err(Error::DegenerateJump { v: sp.v_l });
    }
    Ok((s.s0(sp.v_g) - s.s0(sp.v_l)) / dv)
}
