//! Critical exponents from the universal profile, and convexity checks of
//! the entropy and of isentropes on computed solutions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interp::CubicSpline;
use crate::pearcey::{pearcey, ScalingMap};
use crate::viscous::{FieldSolution, ViscousEntropySpec};

/// Least-squares power law `q ~ nu^slope`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentEstimate {
    pub name: String,
    /// The exponent, i.e. the slope times the sign convention of `name`.
    pub value: f64,
    pub stderr: f64,
    pub slope: f64,
    pub intercept: f64,
    pub nu_range: (f64, f64),
    /// `(nu, quantity)` pairs used in the fit.
    pub points: Vec<(f64, f64)>,
}

impl ExponentEstimate {
    /// CSV with columns `nu,<name-quantity>`.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W, quantity: &str) -> Result<()> {
        writeln!(w, "nu,{quantity}")?;
        for (nu, q) in &self.points {
            writeln!(w, "{nu:e},{q:e}")?;
        }
        Ok(())
    }
}

/// Minimum number of points and decades for an exponent fit.
pub const MIN_FIT_POINTS: usize = 6;
pub const MIN_FIT_DECADES: f64 = 3.0;

/// Fit `log q = intercept + slope log nu`; `value = sign * slope`.
pub fn fit_power_law(name: &str, nus: &[f64], values: &[f64], sign: f64) -> Result<ExponentEstimate> {
    if nus.len() != values.len() {
        return Err(Error::invalid("nu_list", "length mismatch with values"));
    }
    if nus.len() < MIN_FIT_POINTS {
        return Err(Error::invalid(
            "nu_list",
            format!("need at least {MIN_FIT_POINTS} points, got {}", nus.len()),
        ));
    }
    if nus.iter().chain(values).any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(Error::invalid("nu_list", "values and nu must be positive and finite"));
    }
    let lo = nus.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = nus.iter().copied().fold(0.0, f64::max);
    if (hi / lo).log10() < MIN_FIT_DECADES - 1e-9 {
        return Err(Error::invalid(
            "nu_list",
            format!(
                "must span at least {MIN_FIT_DECADES} decades, spans {:.3}",
                (hi / lo).log10()
            ),
        ));
    }
    let x: Vec<f64> = nus.iter().map(|v| v.ln()).collect();
    let y: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = x.iter().zip(&y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let stderr = (ssr / (n - 2.0) / sxx).sqrt();
    Ok(ExponentEstimate {
        name: name.to_string(),
        value: sign * slope,
        stderr,
        slope,
        intercept,
        nu_range: (lo, hi),
        points: nus.iter().copied().zip(values.iter().copied()).collect(),
    })
}

fn check_nu(nu: f64) -> Result<()> {
    if !(nu > 0.0 && nu < 1.0) {
        return Err(Error::Window(format!("nu = {nu} is outside (0, 1)")));
    }
    Ok(())
}

/// `dV/dP` at fixed `T` from the universal profile.
pub fn universal_dv_dp(map: &ScalingMap, p: f64, t: f64) -> Result<f64> {
    check_nu(map.nu)?;
    let c = map.coords(p, t);
    let v = pearcey(c.x, c.y)?;
    let l = map.lambda();
    let dx_dp = map.alpha1 * map.alpha0 / (map.gamma0 * l * l * l);
    let dy_dp = -map.alpha1 * map.alpha1 / (map.gamma0 * l * l);
    Ok(map.sigma * l * (v.du_dx * dx_dp + v.du_dy * dy_dp))
}

/// Isothermal compressibility `-(1/V) dV/dP` at the critical point.
pub fn compressibility_at_critical(map: &ScalingMap) -> Result<f64> {
    let cp = map.cp;
    Ok(-universal_dv_dp(map, cp.p_c, cp.t_c)? / cp.v_c)
}

/// Closed form `2 α0 α1 σ / (γ0 V_c) (log Λ)_XX(0, 0) ν^{-1/2}`.
pub fn compressibility_prefactor(map: &ScalingMap) -> Result<f64> {
    let log_xx = -0.5 * pearcey(0.0, 0.0)?.du_dx;
    Ok(2.0 * map.alpha0 * map.alpha1 * map.sigma / (map.gamma0 * map.cp.v_c) * log_xx)
}

/// Fit `K_T ~ nu^{-gamma}`.
pub fn compressibility_scaling(map: &ScalingMap, nu_list: &[f64]) -> Result<ExponentEstimate> {
    let values = nu_list
        .iter()
        .map(|&nu| {
            check_nu(nu)?;
            compressibility_at_critical(&map.with_nu(nu))
        })
        .collect::<Result<Vec<_>>>()?;
    fit_power_law("gamma", nu_list, &values, -1.0)
}

/// Volume jump `nu Δp_d |dV/dP|` at the critical point.
pub fn volume_jump(map: &ScalingMap, delta_p_d: f64) -> Result<f64> {
    if !(delta_p_d > 0.0 && delta_p_d.is_finite()) {
        return Err(Error::invalid("delta_p_d", "must be positive"));
    }
    let cp = map.cp;
    Ok(map.nu * delta_p_d * universal_dv_dp(map, cp.p_c, cp.t_c)?.abs())
}

/// Fit `|V_L - V_G| ~ nu^{beta}`.
pub fn volume_jump_scaling(map: &ScalingMap, nu_list: &[f64], delta_p_d: f64) -> Result<ExponentEstimate> {
    let values = nu_list
        .iter()
        .map(|&nu| {
            check_nu(nu)?;
            volume_jump(&map.with_nu(nu), delta_p_d)
        })
        .collect::<Result<Vec<_>>>()?;
    fit_power_law("beta", nu_list, &values, 1.0)
}

/// Rectangle in the `(P, T)` plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub p_lo: f64,
    pub p_hi: f64,
    pub t_lo: f64,
    pub t_hi: f64,
}

impl Region {
    pub fn everywhere() -> Self {
        Self {
            p_lo: f64::NEG_INFINITY,
            p_hi: f64::INFINITY,
            t_lo: f64::NEG_INFINITY,
            t_hi: f64::INFINITY,
        }
    }

    pub fn contains(&self, p: f64, t: f64) -> bool {
        p >= self.p_lo && p <= self.p_hi && t >= self.t_lo && t <= self.t_hi
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridValue {
    pub p: f64,
    pub t: f64,
    pub value: f64,
}

/// Sign report for `S_PP >= 0` and `S_PP S_TT - S_PT^2 >= 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexityReport {
    pub checked: usize,
    pub min_s_pp: f64,
    pub min_hessian: f64,
    pub s_pp_violations: Vec<GridValue>,
    pub hessian_violations: Vec<GridValue>,
    /// `(S_PP, S_TT, S_PT)` at every checked node, in row-major order.
    pub second_derivatives: Vec<[f64; 3]>,
}

/// Entropy `S(P, T)` on the solution grid, using finite-difference
/// gradients of `V`. Returns `S` row-major with the column count and the
/// two grid spacings.
fn entropy_field(spec: &ViscousEntropySpec, sol: &FieldSolution) -> (Vec<f64>, usize, f64, f64) {
    let rows = sol.p.len();
    let n = sol.t.len();
    let dp = sol.p[1] - sol.p[0];
    let h = sol.t[1] - sol.t[0];
    let c = sol.frame_speed;
    let at = |k: usize, i: usize| sol.v[k * n + i];
    let mut s = vec![f64::NAN; rows * n];
    for k in 0..rows {
        let ts = sol.temperatures_at(k);
        for i in 0..n {
            let vt = match i {
                0 => (at(k, 1) - at(k, 0)) / h,
                _ if i == n - 1 => (at(k, i) - at(k, i - 1)) / h,
                _ => (at(k, i + 1) - at(k, i - 1)) / (2.0 * h),
            };
            let vk = match k {
                0 => (at(1, i) - at(0, i)) / dp,
                _ if k == rows - 1 => (at(k, i) - at(k - 1, i)) / dp,
                _ => (at(k + 1, i) - at(k - 1, i)) / (2.0 * dp),
            };
            let vp = vk - c * vt;
            s[k * n + i] = spec.entropy(at(k, i), ts[i], vp, vt);
        }
    }
    (s, n, dp, h)
}

/// Check the necessary convexity condition `S_PP >= 0` and the Hessian
/// sign on the interior nodes of `solution` inside `region`.
pub fn entropy_convexity_check(
    spec: &ViscousEntropySpec,
    solution: &FieldSolution,
    region: &Region,
) -> Result<ConvexityReport> {
    let rows = solution.p.len();
    if rows < 5 || solution.t.len() < 5 {
        return Err(Error::invalid("solution", "need at least 5 rows and 5 columns"));
    }
    let (s, n, dp, h) = entropy_field(spec, solution);
    let c = solution.frame_speed;
    let at = |k: usize, i: usize| s[k * n + i];
    let mut report = ConvexityReport {
        checked: 0,
        min_s_pp: f64::INFINITY,
        min_hessian: f64::INFINITY,
        s_pp_violations: Vec::new(),
        hessian_violations: Vec::new(),
        second_derivatives: Vec::new(),
    };
    // one layer for the gradients inside S, one for the second differences
    for k in 2..rows - 2 {
        let ts = solution.temperatures_at(k);
        for i in 2..n - 2 {
            let (p, t) = (solution.p[k], ts[i]);
            if !region.contains(p, t) {
                continue;
            }
            let s_kk = at(k + 1, i) - 2.0 * at(k, i) + at(k - 1, i);
            let s_ii = at(k, i + 1) - 2.0 * at(k, i) + at(k, i - 1);
            let s_ki = 0.25 * (at(k + 1, i + 1) - at(k + 1, i - 1) - at(k - 1, i + 1) + at(k - 1, i - 1));
            let s_tt = s_ii / (h * h);
            let s_pt = s_ki / (dp * h) - c * s_tt;
            let s_pp = s_kk / (dp * dp) - 2.0 * c * s_ki / (dp * h) + c * c * s_tt;
            let hess = s_pp * s_tt - s_pt * s_pt;
            report.checked += 1;
            report.min_s_pp = report.min_s_pp.min(s_pp);
            report.min_hessian = report.min_hessian.min(hess);
            report.second_derivatives.push([s_pp, s_tt, s_pt]);
            if s_pp < 0.0 {
                report.s_pp_violations.push(GridValue { p, t, value: s_pp });
            }
            if hess < 0.0 {
                report.hessian_violations.push(GridValue { p, t, value: hess });
            }
        }
    }
    Ok(report)
}

/// `P(V, T)` recovered from a solution by inverting each isotherm column
/// with a cubic spline in `V` and interpolating across columns with
/// four-point Lagrange weights.
pub struct InvertedPressure {
    t: Vec<f64>,
    columns: Vec<CubicSpline>,
}

impl InvertedPressure {
    pub fn new(sol: &FieldSolution) -> Result<Self> {
        if sol.frame_speed != 0.0 {
            return Err(Error::invalid("solution", "inversion needs a fixed temperature grid"));
        }
        let n = sol.t.len();
        if sol.p.len() < 4 || n < 4 {
            return Err(Error::invalid("solution", "need at least 4 rows and 4 columns"));
        }
        let mut columns = Vec::with_capacity(n);
        for (i, &t) in sol.t.iter().enumerate() {
            let mut pairs: Vec<(f64, f64)> = (0..sol.p.len()).map(|k| (sol.v[k * n + i], sol.p[k])).collect();
            pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
            if pairs.windows(2).any(|w| !(w[1].0 > w[0].0) || !(w[1].1 < w[0].1)) {
                return Err(Error::invalid(
                    "solution",
                    format!("V is not strictly decreasing in P on the isotherm T = {t}; cannot invert"),
                ));
            }
            let (v, p): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
            columns.push(CubicSpline::new(v, p)?);
        }
        Ok(Self {
            t: sol.t.clone(),
            columns,
        })
    }

    pub fn pressure(&self, v: f64, t: f64) -> Result<f64> {
        let n = self.t.len();
        let (t0, t1) = (self.t[0], self.t[n - 1]);
        if !(t >= t0 && t <= t1) {
            return Err(Error::Extrapolation {
                value: t,
                lo: t0,
                hi: t1,
            });
        }
        let h = self.t[1] - self.t[0];
        let j = (((t - t0) / h).floor() as usize).clamp(1, n - 3) - 1;
        let mut total = 0.0;
        for a in 0..4 {
            let col = &self.columns[j + a];
            let (lo, hi) = (col.nodes()[0], col.nodes()[col.nodes().len() - 1]);
            if !(v >= lo && v <= hi) {
                return Err(Error::Extrapolation { value: v, lo, hi });
            }
            let mut w = 1.0;
            for b in 0..4 {
                if a != b {
                    w *= (t - self.t[j + b]) / (self.t[j + a] - self.t[j + b]);
                }
            }
            total += w * col.eval(v)[0];
        }
        Ok(total)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsentropeReport {
    pub checked: usize,
    pub min_value: f64,
    pub violations: Vec<GridValue>,
    /// Points skipped because the finite-difference stencil left the data.
    pub skipped: usize,
}

/// Evaluate `[d/dV - (S_V/S_T) d/dT]^2 P(V, T)` by nested central
/// differences at the interior nodes of `solution` inside `region`.
pub fn isentrope_convexity_check(
    spec: &ViscousEntropySpec,
    solution: &FieldSolution,
    region: &Region,
) -> Result<IsentropeReport> {
    let inv = InvertedPressure::new(solution)?;
    let n = solution.t.len();
    let rows = solution.p.len();
    let dt = solution.t[1] - solution.t[0];
    let (vmin, vmax) = solution
        .v
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let dv = (vmax - vmin) / (4 * rows) as f64;
    let nu = spec.nu;
    let p_of = |v: f64, t: f64| inv.pressure(v, t);
    let entropy = |v: f64, t: f64| -> Result<f64> {
        let mut s = spec.s0.value(v) + spec.f_t.value(t);
        if nu != 0.0 {
            let pv = (p_of(v + dv, t)? - p_of(v - dv, t)?) / (2.0 * dv);
            let pt = (p_of(v, t + dt)? - p_of(v, t - dt)?) / (2.0 * dt);
            let (vp, vt) = (1.0 / pv, -pt / pv);
            s += nu * (spec.s1.value(v) * vp + spec.s2.value(v) * vt);
        }
        Ok(s)
    };
    let slope = |v: f64, t: f64| -> Result<f64> {
        let sv = (entropy(v + dv, t)? - entropy(v - dv, t)?) / (2.0 * dv);
        let st = (entropy(v, t + dt)? - entropy(v, t - dt)?) / (2.0 * dt);
        if st == 0.0 {
            return Err(Error::invalid("F", "S_T vanishes"));
        }
        Ok(sv / st)
    };
    let d_p = |v: f64, t: f64| -> Result<f64> {
        let k = slope(v, t)?;
        Ok((p_of(v + dv, t)? - p_of(v - dv, t)?) / (2.0 * dv) - k * (p_of(v, t + dt)? - p_of(v, t - dt)?) / (2.0 * dt))
    };
    let d2_p = |v: f64, t: f64| -> Result<f64> {
        let k = slope(v, t)?;
        Ok((d_p(v + dv, t)? - d_p(v - dv, t)?) / (2.0 * dv) - k * (d_p(v, t + dt)? - d_p(v, t - dt)?) / (2.0 * dt))
    };
    let mut report = IsentropeReport {
        checked: 0,
        min_value: f64::INFINITY,
        violations: Vec::new(),
        skipped: 0,
    };
    for k in 1..rows - 1 {
        for i in 3..n - 3 {
            let (p, t) = (solution.p[k], solution.t[i]);
            if !region.contains(p, t) {
                continue;
            }
            let v = solution.v[k * n + i];
            match d2_p(v, t) {
                Ok(val) => {
                    report.checked += 1;
                    report.min_value = report.min_value.min(val);
                    if !(val > 0.0) {
                        report.violations.push(GridValue { p, t, value: val });
                    }
                }
                Err(Error::Extrapolation { .. }) => report.skipped += 1,
                Err(e) => return Err(e),
            }
        }
    }
    Ok(report)
}
