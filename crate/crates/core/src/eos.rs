//! Equations of state of the family `T - alpha(V) P - f(V) = 0`.
//!
//! Every such surface is the characteristic solution of the first-order
//! balance law `V_P + alpha(V) V_T = 0`: the volume is constant along the
//! straight lines `T = alpha(V0) P + f(V0)` in the `(P, T)` plane. Three
//! flavours of `(alpha, f)` are supported:
//!
//! * `vdw`: the van der Waals pair `alpha = (V - nb)/(nR)`,
//!   `f = na/(RV) - n^2 ab/(RV^2)`,
//! * `tabulated`: node values of `alpha` and `f` with natural cubic splines,
//! * `analytic`: arbitrary closed forms built from [`ScalarFn`].
//!
//! The van der Waals `f` above is obtained by rewriting
//! `(P + n^2 a/V^2)(V - nb) = nRT` in the implicit form. Its third
//! derivative is `f'''(V) = 6na (4nb - V) / (R V^5)`, which is positive at
//! the critical volume `V_c = 3nb`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interp::CubicSpline;
use crate::roots;
use crate::scalar_fn::ScalarFn;

/// Relative tolerance for deduplicating volume roots.
pub const ROOT_DEDUP_REL: f64 = 1e-9;
/// Default number of log-spaced points in the root-bracketing scan.
pub const DEFAULT_GRID_POINTS: usize = 4096;

/// Van der Waals parameters in SI units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VdwParams {
    /// Mean-field attraction (Pa m^6 mol^-2).
    pub a: f64,
    /// Covolume (m^3 mol^-1).
    pub b: f64,
    /// Mole number.
    pub n: f64,
    /// Gas constant (J K^-1 mol^-1).
    #[serde(rename = "R")]
    pub r: f64,
}

impl VdwParams {
    pub fn new(a: f64, b: f64, n: f64, r: f64) -> Result<Self> {
        let p = Self { a, b, n, r };
        p.validate()?;
        Ok(p)
    }

    /// Hydrogen with `n = 1000` mol.
    pub fn hydrogen() -> Self {
        Self {
            a: 24.76e-3,
            b: 0.02661e-3,
            n: 1000.0,
            r: 8.3144,
        }
    }

    /// The van der Waals fluid in reduced units, `V_c = P_c = T_c = 1`.
    pub fn reduced() -> Self {
        Self {
            a: 3.0,
            b: 1.0 / 3.0,
            n: 1.0,
            r: 8.0 / 3.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("a", self.a), ("b", self.b), ("n", self.n), ("R", self.r)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(name, format!("must be positive and finite, got {v}")));
            }
        }
        Ok(())
    }

    /// Excluded volume `n b`: the lower end of the admissible domain.
    pub fn excluded_volume(&self) -> f64 {
        self.n * self.b
    }

    /// Closed-form critical point `(3nb, a/(27 b^2), 8a/(27 R b))`.
    pub fn critical_closed_form(&self) -> CriticalPoint {
        CriticalPoint {
            v_c: 3.0 * self.n * self.b,
            p_c: self.a / (27.0 * self.b * self.b),
            t_c: 8.0 * self.a / (27.0 * self.r * self.b),
        }
    }

    fn alpha(&self, v: f64) -> [f64; 4] {
        let nr = self.n * self.r;
        [(v - self.n * self.b) / nr, 1.0 / nr, 0.0, 0.0]
    }

    fn f(&self, v: f64) -> [f64; 4] {
        let c1 = self.n * self.a / self.r;
        let c2 = self.n * self.n * self.a * self.b / self.r;
        let v2 = v * v;
        let v3 = v2 * v;
        let v4 = v3 * v;
        let v5 = v4 * v;
        [
            c1 / v - c2 / v2,
            -c1 / v2 + 2.0 * c2 / v3,
            2.0 * c1 / v3 - 6.0 * c2 / v4,
            -6.0 * c1 / v4 + 24.0 * c2 / v5,
        ]
    }
}

/// `(alpha, f)` known at nodes, interpolated with natural cubic splines.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TabulatedRaw", into = "TabulatedRaw")]
pub struct TabulatedEos {
    alpha: CubicSpline,
    f: CubicSpline,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TabulatedRaw {
    #[serde(rename = "V")]
    v: Vec<f64>,
    alpha: Vec<f64>,
    f: Vec<f64>,
}

impl TryFrom<TabulatedRaw> for TabulatedEos {
    type Error = Error;
    fn try_from(raw: TabulatedRaw) -> Result<Self> {
        TabulatedEos::new(raw.v, raw.alpha, raw.f)
    }
}

impl From<TabulatedEos> for TabulatedRaw {
    fn from(t: TabulatedEos) -> Self {
        TabulatedRaw {
            v: t.alpha.nodes().to_vec(),
            alpha: t.alpha.values().to_vec(),
            f: t.f.values().to_vec(),
        }
    }
}

impl TabulatedEos {
    pub fn new(v: Vec<f64>, alpha: Vec<f64>, f: Vec<f64>) -> Result<Self> {
        if alpha.iter().any(|&a| !(a > 0.0)) {
            return Err(Error::invalid("alpha", "tabulated alpha must be positive"));
        }
        Ok(Self {
            alpha: CubicSpline::new(v.clone(), alpha)?,
            f: CubicSpline::new(v, f)?,
        })
    }

    pub fn volumes(&self) -> &[f64] {
        self.alpha.nodes()
    }

    pub fn alpha_values(&self) -> &[f64] {
        self.alpha.values()
    }

    pub fn f_values(&self) -> &[f64] {
        self.f.values()
    }
}

/// `(alpha, f)` given in closed form on `(v_min, v_max)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalyticEos {
    pub alpha: ScalarFn,
    pub f: ScalarFn,
    pub v_min: f64,
    pub v_max: f64,
}

/// The state surface `T - alpha(V) P - f(V) = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum EosSpec {
    Vdw(VdwParams),
    Tabulated(TabulatedEos),
    Analytic(AnalyticEos),
}

/// A point `(P, T, V)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermoPoint {
    pub p: f64,
    pub t: f64,
    pub v: f64,
}

impl ThermoPoint {
    /// True when the point satisfies the state equation to `rel_tol`
    /// relative to the magnitude of its terms.
    pub fn on_surface(&self, eos: &EosSpec, rel_tol: f64) -> bool {
        if !eos.contains(self.v) {
            return false;
        }
        let a = eos.alpha(self.v)[0];
        let f = eos.f(self.v)[0];
        let scale = self.t.abs() + (a * self.p).abs() + f.abs();
        (self.t - a * self.p - f).abs() <= rel_tol * scale
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub v_c: f64,
    pub p_c: f64,
    pub t_c: f64,
}

/// Options for the root-bracketing scan.
#[derive(Debug, Clone, Copy)]
pub struct RootScan {
    pub points: usize,
}

impl Default for RootScan {
    fn default() -> Self {
        Self {
            points: DEFAULT_GRID_POINTS,
        }
    }
}

impl EosSpec {
    pub fn vdw(params: VdwParams) -> Result<Self> {
        params.validate()?;
        Ok(EosSpec::Vdw(params))
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            EosSpec::Vdw(p) => p.validate(),
            EosSpec::Tabulated(_) => Ok(()),
            EosSpec::Analytic(a) => {
                if !(a.v_min.is_finite() && a.v_max.is_finite() && a.v_min < a.v_max) {
                    return Err(Error::invalid("v_min/v_max", "need finite v_min < v_max"));
                }
                Ok(())
            }
        }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let eos: EosSpec = serde_json::from_str(s)?;
        eos.validate()?;
        Ok(eos)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Open interval of admissible volumes.
    pub fn domain(&self) -> (f64, f64) {
        match self {
            EosSpec::Vdw(p) => (p.excluded_volume(), f64::INFINITY),
            EosSpec::Tabulated(t) => {
                let v = t.volumes();
                (v[0], v[v.len() - 1])
            }
            EosSpec::Analytic(a) => (a.v_min, a.v_max),
        }
    }

    /// Finite interval scanned when bracketing volume roots.
    pub fn search_range(&self) -> (f64, f64) {
        match self {
            EosSpec::Vdw(p) => {
                let nb = p.excluded_volume();
                (nb * (1.0 + 1e-9), 1e3 * 3.0 * nb)
            }
            EosSpec::Tabulated(t) => {
                let v = t.volumes();
                (v[0], v[v.len() - 1])
            }
            EosSpec::Analytic(a) => {
                let w = a.v_max - a.v_min;
                (a.v_min + 1e-9 * w, a.v_max - 1e-9 * w)
            }
        }
    }

    pub fn contains(&self, v: f64) -> bool {
        let (lo, hi) = self.domain();
        match self {
            EosSpec::Tabulated(_) => v >= lo && v <= hi,
            _ => v > lo && v < hi,
        }
    }

    fn check_domain(&self, v: f64) -> Result<()> {
        if self.contains(v) {
            Ok(())
        } else {
            let (lo, hi) = self.domain();
            Err(Error::Domain { v, lo, hi })
        }
    }

    /// `[alpha, alpha', alpha'', alpha''']` at `v` (no domain check).
    pub fn alpha(&self, v: f64) -> [f64; 4] {
        match self {
            EosSpec::Vdw(p) => p.alpha(v),
            EosSpec::Tabulated(t) => t.alpha.eval(v),
            EosSpec::Analytic(a) => a.alpha.eval(v),
        }
    }

    /// `[f, f', f'', f''']` at `v` (no domain check).
    pub fn f(&self, v: f64) -> [f64; 4] {
        match self {
            EosSpec::Vdw(p) => p.f(v),
            EosSpec::Tabulated(t) => t.f.eval(v),
            EosSpec::Analytic(a) => a.f.eval(v),
        }
    }

    /// `T - alpha(V) P - f(V)`.
    pub fn characteristic_residual(&self, v: f64, p: f64, t: f64) -> f64 {
        t - self.alpha(v)[0] * p - self.f(v)[0]
    }

    /// Pressure on the isotherm `T` at volume `V`.
    pub fn isotherm_pressure(&self, v: f64, t: f64) -> Result<f64> {
        self.check_domain(v)?;
        Ok((t - self.f(v)[0]) / self.alpha(v)[0])
    }

    /// `(P, dP/dV, d^2P/dV^2)` along the isotherm `T`.
    pub fn isotherm_derivatives(&self, v: f64, t: f64) -> Result<(f64, f64, f64)> {
        self.check_domain(v)?;
        Ok(self.isotherm_derivatives_unchecked(v, t))
    }

    pub(crate) fn isotherm_derivatives_unchecked(&self, v: f64, t: f64) -> (f64, f64, f64) {
        let a = self.alpha(v);
        let f = self.f(v);
        let p = (t - f[0]) / a[0];
        let pv = -(a[1] * p + f[1]) / a[0];
        let pvv = -(a[2] * p + 2.0 * a[1] * pv + f[2]) / a[0];
        (p, pv, pvv)
    }

    /// All volumes on the surface at `(P, T)`, ascending.
    pub fn solve_volumes(&self, p: f64, t: f64) -> Result<Vec<f64>> {
        self.solve_volumes_with(p, t, RootScan::default())
    }

    pub fn solve_volumes_with(&self, p: f64, t: f64, scan: RootScan) -> Result<Vec<f64>> {
        if !(p.is_finite() && t.is_finite()) {
            return Err(Error::invalid("P/T", "pressure and temperature must be finite"));
        }
        let (lo, hi) = self.search_range();
        let grid = volume_grid(lo, hi, scan.points.max(16));
        let r = |v: f64| self.characteristic_residual(v, p, t);
        let dr = |v: f64| -(self.alpha(v)[1] * p + self.f(v)[1]);
        let ddr = |v: f64| -(self.alpha(v)[2] * p + self.f(v)[2]);
        let scale = |v: f64| t.abs() + (self.alpha(v)[0] * p).abs() + self.f(v)[0].abs();

        let mut roots_found = Vec::new();
        for w in grid.windows(2) {
            let (a, b) = (w[0], w[1]);
            // split the cell at an inflection of r, then at extrema of r, so that
            // r is monotone on every piece
            let mut cuts = vec![a, b];
            if ddr(a).signum() * ddr(b).signum() < 0.0 {
                if let Ok(c) = roots::brent(ddr, a, b, 1e-15 * b) {
                    if c > a && c < b {
                        cuts.insert(1, c);
                    }
                }
            }
            let mut pieces = Vec::with_capacity(4);
            for c in cuts.windows(2) {
                pieces.push(c[0]);
                if dr(c[0]).signum() * dr(c[1]).signum() < 0.0 {
                    if let Ok(e) = roots::brent(dr, c[0], c[1], 1e-15 * c[1]) {
                        if e > c[0] && e < c[1] {
                            pieces.push(e);
                            // tangential (double) root at the extremum; when r(e) has the
                            // opposite sign to both ends the two simple roots are bracketed below
                            let (r0, re, r1) = (r(c[0]), r(e), r(c[1]));
                            let straddled = re.signum() * r0.signum() < 0.0 || re.signum() * r1.signum() < 0.0;
                            if !straddled && re.abs() <= 1e-14 * scale(e) {
                                roots_found.push(e);
                            }
                        }
                    }
                }
            }
            pieces.push(b);
            for s in pieces.windows(2) {
                let (ra, rb) = (r(s[0]), r(s[1]));
                if ra == 0.0 {
                    roots_found.push(s[0]);
                } else if ra.signum() * rb.signum() < 0.0 {
                    let root = roots::newton_bisect(|v| (r(v), dr(v)), s[0], s[1], 1e-15 * s[1])?;
                    roots_found.push(root);
                }
            }
            if r(b) == 0.0 {
                roots_found.push(b);
            }
        }
        roots_found.sort_by(|x, y| x.total_cmp(y));
        roots_found.dedup_by(|x, y| (*x - *y).abs() <= ROOT_DEDUP_REL * x.abs().max(y.abs()));
        if roots_found.is_empty() {
            return Err(Error::NoRoot { p, t, lo, hi });
        }
        Ok(roots_found)
    }

    /// The critical point: the inflection of the critical isotherm, where
    /// `alpha P + f`, `alpha' P + f'` and `alpha'' P + f''` all balance.
    ///
    /// Eliminating `P` from the last two conditions leaves
    /// `h(V) = f'' alpha' - f' alpha'' = 0`, scanned for sign changes. When
    /// several candidates exist, the one with the highest `T_c` is returned.
    pub fn critical_point(&self) -> Result<CriticalPoint> {
        let (lo, hi) = self.search_range();
        let grid = volume_grid(lo, hi, DEFAULT_GRID_POINTS);
        let h = |v: f64| {
            let a = self.alpha(v);
            let f = self.f(v);
            f[2] * a[1] - f[1] * a[2]
        };
        let mut best: Option<CriticalPoint> = None;
        let mut prev = h(grid[0]);
        for w in grid.windows(2) {
            let next = h(w[1]);
            if prev.signum() * next.signum() < 0.0 || next == 0.0 {
                let v_c = roots::brent(h, w[0], w[1], 1e-15 * w[1])?;
                let a = self.alpha(v_c);
                let f = self.f(v_c);
                let p_c = if a[1].abs() >= a[2].abs() * v_c {
                    -f[1] / a[1]
                } else {
                    -f[2] / a[2]
                };
                let t_c = a[0] * p_c + f[0];
                if p_c.is_finite() && t_c.is_finite() {
                    let cand = CriticalPoint { v_c, p_c, t_c };
                    if best.is_none_or(|b| cand.t_c > b.t_c) {
                        best = Some(cand);
                    }
                }
            }
            prev = next;
        }
        let cp = best.ok_or_else(|| Error::NonConvergence(format!("no critical point found on [{lo}, {hi}]")))?;
        self.local_cubic_coeffs(&cp)?;
        Ok(cp)
    }

    /// Coefficients of the local cubic `T' - c1 V' P' - c3 V'^3 = 0` around
    /// the critical point: `c1 = alpha'(V_c)`,
    /// `c3 = (f'''(V_c) + alpha'''(V_c) P_c) / 6`.
    pub fn local_cubic_coeffs(&self, cp: &CriticalPoint) -> Result<(f64, f64)> {
        let a = self.alpha(cp.v_c);
        let f = self.f(cp.v_c);
        let c1 = a[1];
        let c3 = (f[3] + a[3] * cp.p_c) / 6.0;
        if !(c3.abs() * cp.v_c.powi(3) > 1e-12 * cp.t_c.abs()) {
            return Err(Error::DegenerateCriticalPoint { c3 });
        }
        Ok((c1, c3))
    }

    /// The same surface in units where `V_c = P_c = T_c = 1`.
    pub fn to_reduced(&self) -> Result<(EosSpec, CriticalPoint)> {
        let cp = self.critical_point()?;
        let reduced = match self {
            EosSpec::Vdw(_) => EosSpec::Vdw(VdwParams::reduced()),
            EosSpec::Tabulated(t) => {
                let v = t.volumes().iter().map(|x| x / cp.v_c).collect();
                let a = t.alpha_values().iter().map(|x| x * cp.p_c / cp.t_c).collect();
                let f = t.f_values().iter().map(|x| x / cp.t_c).collect();
                EosSpec::Tabulated(TabulatedEos::new(v, a, f)?)
            }
            EosSpec::Analytic(a) => EosSpec::Analytic(AnalyticEos {
                alpha: ScalarFn::Scaled {
                    inner: Box::new(a.alpha.clone()),
                    x_scale: cp.v_c,
                    y_scale: cp.p_c / cp.t_c,
                },
                f: ScalarFn::Scaled {
                    inner: Box::new(a.f.clone()),
                    x_scale: cp.v_c,
                    y_scale: 1.0 / cp.t_c,
                },
                v_min: a.v_min / cp.v_c,
                v_max: a.v_max / cp.v_c,
            }),
        };
        Ok((reduced, cp))
    }
}

/// The van der Waals surface for `params` (convenience constructor).
pub fn vdw_spec(params: VdwParams) -> Result<EosSpec> {
    EosSpec::vdw(params)
}

/// Log-spaced grid on `[lo, hi]` (linear if `lo <= 0`).
pub(crate) fn volume_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if lo > 0.0 {
        let (l0, l1) = (lo.ln(), hi.ln());
        (0..n)
            .map(|i| {
                if i == 0 {
                    lo
                } else if i == n - 1 {
                    hi
                } else {
                    (l0 + (l1 - l0) * i as f64 / (n - 1) as f64).exp()
                }
            })
            .collect()
    } else {
        (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
    }
}
