//! The viscous balance law
//!
//! `V_P + alpha(V) V_T + nu beta(V) V_T^2 + nu gamma(V) V_TT = 0`
//!
//! obtained from the gradient-corrected entropy
//! `S = S0(V) + nu S1(V) V_P + nu S2(V) V_T + F(T)` and the Maxwell relation
//! `V_T + S_P = 0`. With `a = 1/S0'`:
//!
//! * `alpha = a`,
//! * `gamma = S1 a^3 - S2 a^2`,
//! * `beta = S1' a^3 - 2 S1 S0'' a^4 - S2' a^2 + S2 S0'' a^3`.
//!
//! The solver marches in `P` on a uniform `T` grid using the flux form
//! `V_P + d/dT [G(V) + nu gamma V_T] + nu (beta - gamma') V_T^2 = 0`,
//! `G' = alpha`, with central differences and Heun's method. Also here: an
//! exact Cole-Hopf evaluator for the normalised Burgers equation
//! `u_Y + u u_X = u_XX`.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::eos::EosSpec;
use crate::error::{Error, Result};
use crate::interp::CubicSpline;
use crate::quadrature::gauss_legendre8;
use crate::roots;
use crate::scalar_fn::ScalarFn;

/// Entropy expansion coefficients and the small parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ViscousEntropySpec {
    pub s0: ScalarFn,
    pub s1: ScalarFn,
    pub s2: ScalarFn,
    /// Temperature part `F(T)`.
    #[serde(default = "ScalarFn::zero")]
    pub f_t: ScalarFn,
    pub nu: f64,
}

impl ViscousEntropySpec {
    /// Van der Waals volume entropy `nR ln(V - nb)` with constant `S1 = c`,
    /// `S2 = 0` and `F = 0`.
    pub fn vdw_constant_s1(p: &crate::eos::VdwParams, c: f64, nu: f64) -> Self {
        Self {
            s0: ScalarFn::LogShift {
                coef: p.n * p.r,
                shift: p.n * p.b,
            },
            s1: ScalarFn::constant(c),
            s2: ScalarFn::zero(),
            f_t: ScalarFn::zero(),
            nu,
        }
    }

    pub fn with_nu(&self, nu: f64) -> Self {
        Self { nu, ..self.clone() }
    }

    /// `S` at a state given the gradients `V_P`, `V_T`.
    pub fn entropy(&self, v: f64, t: f64, v_p: f64, v_t: f64) -> f64 {
        self.s0.value(v) + self.nu * (self.s1.value(v) * v_p + self.s2.value(v) * v_t) + self.f_t.value(t)
    }
}

/// Coefficient values at one volume.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoeffValues {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub gamma_prime: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ViscousCoeffs {
    spec: ViscousEntropySpec,
}

/// Build the coefficient functions of the balance law.
pub fn coeffs_from_entropy(spec: &ViscousEntropySpec) -> Result<ViscousCoeffs> {
    if !(spec.nu >= 0.0 && spec.nu < 1.0) {
        return Err(Error::invalid("nu", format!("must lie in [0, 1), got {}", spec.nu)));
    }
    Ok(ViscousCoeffs { spec: spec.clone() })
}

impl ViscousCoeffs {
    pub fn spec(&self) -> &ViscousEntropySpec {
        &self.spec
    }

    /// Coefficients at `v`; fails where `S0'` is not positive.
    pub fn at(&self, v: f64) -> Result<CoeffValues> {
        let d = self.spec.s0.eval(v)[1];
        if !(d > f64::MIN_POSITIVE && d.is_finite()) {
            return Err(Error::invalid("S0", format!("S0'({v}) = {d} must be positive")));
        }
        Ok(self.eval(v))
    }

    pub(crate) fn eval(&self, v: f64) -> CoeffValues {
        let s0 = self.spec.s0.eval(v);
        let s1 = self.spec.s1.eval(v);
        let s2 = self.spec.s2.eval(v);
        let a = 1.0 / s0[1];
        let a2 = a * a;
        let a3 = a2 * a;
        let a4 = a3 * a;
        let gamma = s1[0] * a3 - s2[0] * a2;
        let beta = s1[1] * a3 - 2.0 * s1[0] * s0[2] * a4 - s2[1] * a2 + s2[0] * s0[2] * a3;
        // a' = -S0'' a^2
        let gamma_prime = s1[1] * a3 - 3.0 * s1[0] * s0[2] * a4 - s2[1] * a2 + 2.0 * s2[0] * s0[2] * a3;
        CoeffValues {
            alpha: a,
            beta,
            gamma,
            gamma_prime,
        }
    }

    pub fn alpha(&self, v: f64) -> f64 {
        1.0 / self.spec.s0.eval(v)[1]
    }

    pub fn beta(&self, v: f64) -> f64 {
        self.eval(v).beta
    }

    pub fn gamma(&self, v: f64) -> f64 {
        self.eval(v).gamma
    }

    /// `G(v) = ∫_{v_ref}^{v} alpha`.
    fn flux(&self, v_ref: f64, v: f64) -> f64 {
        gauss_legendre8(|s| self.alpha(s), v_ref, v)
    }
}

/// Grid and stepping parameters for [`evolve_viscous`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridParams {
    pub t_lo: f64,
    pub t_hi: f64,
    pub n_t: usize,
    /// Fraction of the stability limit used for the step.
    pub safety: f64,
    /// Number of stored rows, including the first and last.
    pub output_rows: usize,
    pub max_steps: usize,
    /// The grid moves as `T_i + frame_speed (P - P0)`; zero for a fixed grid.
    #[serde(default)]
    pub frame_speed: f64,
}

impl GridParams {
    pub fn new(t_lo: f64, t_hi: f64, n_t: usize) -> Self {
        Self {
            t_lo,
            t_hi,
            n_t,
            safety: 0.5,
            output_rows: 11,
            max_steps: 5_000_000,
            frame_speed: 0.0,
        }
    }

    pub fn spacing(&self) -> f64 {
        (self.t_hi - self.t_lo) / (self.n_t - 1) as f64
    }

    pub fn temperatures(&self) -> Vec<f64> {
        let h = self.spacing();
        (0..self.n_t).map(|i| self.t_lo + i as f64 * h).collect()
    }

    fn validate(&self) -> Result<()> {
        if !self.frame_speed.is_finite() {
            return Err(Error::invalid("frame_speed", "must be finite"));
        }
        if !(self.t_lo.is_finite() && self.t_hi > self.t_lo) {
            return Err(Error::invalid("t_lo/t_hi", "need t_lo < t_hi"));
        }
        if self.n_t < 5 {
            return Err(Error::invalid("n_t", "at least 5 grid points"));
        }
        if !(self.safety > 0.0 && self.safety <= 1.0) {
            return Err(Error::invalid("safety", "must lie in (0, 1]"));
        }
        if self.output_rows < 2 {
            return Err(Error::invalid("output_rows", "at least 2"));
        }
        Ok(())
    }
}

/// `V` on a `(P, T)` grid, stored by rows of constant `P`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldSolution {
    pub p: Vec<f64>,
    pub t: Vec<f64>,
    /// Row-major, `p.len() * t.len()` values.
    pub v: Vec<f64>,
    pub steps: usize,
    pub dp: f64,
    /// Largest per-step mismatch between the change of `∫V dT` and the
    /// boundary fluxes plus source.
    pub max_budget_residual: f64,
    #[serde(default)]
    pub frame_speed: f64,
}

#[derive(Serialize)]
struct DumpHeader<'a> {
    format: &'static str,
    rows: usize,
    cols: usize,
    p: &'a [f64],
    t_lo: f64,
    t_hi: f64,
    steps: usize,
    dp: f64,
}

impl FieldSolution {
    pub fn row(&self, k: usize) -> &[f64] {
        let n = self.t.len();
        &self.v[k * n..(k + 1) * n]
    }

    pub fn last_row(&self) -> &[f64] {
        self.row(self.p.len() - 1)
    }

    /// Characteristic solution sampled on `ps` x `ts`, each row tracked
    /// continuously in `T` and seeded from the previous row.
    pub fn from_characteristic(eos: &EosSpec, ps: &[f64], ts: &[f64]) -> Result<Self> {
        if ps.is_empty() || ts.len() < 2 {
            return Err(Error::invalid("grid", "need at least one P and two T values"));
        }
        let mut v = Vec::with_capacity(ps.len() * ts.len());
        let mut seed: Option<f64> = None;
        for &p in ps {
            let mut prev = match seed {
                Some(s) => track_root(eos, p, ts[0], s)?,
                None => characteristic_profile(eos, p, &ts[..1])?[0],
            };
            seed = Some(prev);
            for &t in ts {
                prev = track_root(eos, p, t, prev)?;
                v.push(prev);
            }
        }
        Ok(Self {
            p: ps.to_vec(),
            t: ts.to_vec(),
            v,
            steps: 0,
            dp: if ps.len() > 1 { ps[1] - ps[0] } else { 0.0 },
            max_budget_residual: 0.0,
            frame_speed: 0.0,
        })
    }

    /// Grid temperatures of row `k`.
    pub fn temperatures_at(&self, k: usize) -> Vec<f64> {
        let shift = self.frame_speed * (self.p[k] - self.p[0]);
        self.t.iter().map(|t| t + shift).collect()
    }

    /// Long-form CSV with columns `P,T,V`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "P,T,V")?;
        for (k, &p) in self.p.iter().enumerate() {
            for (t, v) in self.temperatures_at(k).iter().zip(self.row(k)) {
                writeln!(w, "{p:e},{t:e},{v:e}")?;
            }
        }
        Ok(())
    }

    /// One JSON header line, then the values as little-endian `f64`,
    /// row-major.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        let header = DumpHeader {
            format: "f64-le-row-major",
            rows: self.p.len(),
            cols: self.t.len(),
            p: &self.p,
            t_lo: self.t[0],
            t_hi: self.t[self.t.len() - 1],
            steps: self.steps,
            dp: self.dp,
        };
        serde_json::to_writer(&mut w, &header)?;
        w.write_all(b"\n")?;
        for x in &self.v {
            w.write_all(&x.to_le_bytes())?;
        }
        Ok(())
    }
}

/// Root of `T - alpha(V) P - f(V)` near `guess`, falling back to a full
/// scan (closest root) when Newton does not settle.
pub fn track_root(eos: &EosSpec, p: f64, t: f64, guess: f64) -> Result<f64> {
    let mut v = guess;
    for _ in 0..50 {
        if !eos.contains(v) {
            break;
        }
        let a = eos.alpha(v);
        let f = eos.f(v);
        let r = t - a[0] * p - f[0];
        let dr = -(a[1] * p + f[1]);
        if dr == 0.0 {
            break;
        }
        let step = r / dr;
        v -= step;
        if step.abs() <= 1e-15 * v.abs() {
            if eos.contains(v) {
                return Ok(v);
            }
            break;
        }
    }
    let all = eos.solve_volumes(p, t)?;
    Ok(all
        .into_iter()
        .min_by(|a, b| (a - guess).abs().total_cmp(&(b - guess).abs()))
        .expect("solve_volumes returns at least one root"))
}

/// Characteristic (inviscid) profile `V(T)` at pressure `P`, following one
/// branch continuously from `ts[0]`.
pub fn characteristic_profile(eos: &EosSpec, p: f64, ts: &[f64]) -> Result<Vec<f64>> {
    let first = eos.solve_volumes(p, ts[0])?;
    let mut prev = first[first.len() / 2];
    let mut out = Vec::with_capacity(ts.len());
    for &t in ts {
        prev = track_root(eos, p, t, prev)?;
        out.push(prev);
    }
    Ok(out)
}

/// Maximum-norm sizes of the advective, diffusive and quadratic terms of
/// the balance law on a profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TermMagnitudes {
    pub advective: f64,
    pub diffusive: f64,
    pub quadratic: f64,
}

pub fn term_magnitudes(coeffs: &ViscousCoeffs, v: &[f64], h: f64) -> TermMagnitudes {
    let nu = coeffs.spec.nu;
    let mut m = TermMagnitudes {
        advective: 0.0,
        diffusive: 0.0,
        quadratic: 0.0,
    };
    for i in 1..v.len() - 1 {
        let c = coeffs.eval(v[i]);
        let vt = (v[i + 1] - v[i - 1]) / (2.0 * h);
        let vtt = (v[i + 1] - 2.0 * v[i] + v[i - 1]) / (h * h);
        m.advective = m.advective.max((c.alpha * vt).abs());
        m.diffusive = m.diffusive.max((nu * c.gamma * vtt).abs());
        m.quadratic = m.quadratic.max((nu * c.beta * vt * vt).abs());
    }
    m
}

struct Scheme<'a> {
    coeffs: &'a ViscousCoeffs,
    h: f64,
    frame: f64,
    v_ref: f64,
    g: Vec<f64>,
    face: Vec<f64>,
}

impl Scheme<'_> {
    /// `dV/dP` at interior nodes into `out`; returns the boundary-flux and
    /// source totals used by the budget check.
    fn rhs(&mut self, v: &[f64], out: &mut [f64]) -> (f64, f64) {
        let n = v.len();
        let nu = self.coeffs.spec.nu;
        let h = self.h;
        for i in 0..n {
            self.g[i] = self.coeffs.flux(self.v_ref, v[i]) - self.frame * v[i];
        }
        for i in 0..n - 1 {
            let mut fl = 0.5 * (self.g[i] + self.g[i + 1]);
            if nu != 0.0 {
                let gm = self.coeffs.eval(0.5 * (v[i] + v[i + 1])).gamma;
                fl += nu * gm * (v[i + 1] - v[i]) / h;
            }
            self.face[i] = fl;
        }
        let mut src_total = 0.0;
        out[0] = 0.0;
        out[n - 1] = 0.0;
        for i in 1..n - 1 {
            let mut src = 0.0;
            if nu != 0.0 {
                let c = self.coeffs.eval(v[i]);
                let vt = (v[i + 1] - v[i - 1]) / (2.0 * h);
                src = nu * (c.beta - c.gamma_prime) * vt * vt;
            }
            src_total += h * src;
            out[i] = -(self.face[i] - self.face[i - 1]) / h - src;
        }
        (self.face[n - 2] - self.face[0], src_total)
    }
}

/// Semi-discrete right-hand side `dV/dP` of the scheme (zero at the two
/// boundary nodes).
pub fn semi_discrete_rhs(coeffs: &ViscousCoeffs, v: &[f64], h: f64) -> Vec<f64> {
    let n = v.len();
    let mut s = Scheme {
        coeffs,
        h,
        frame: 0.0,
        v_ref: v[0],
        g: vec![0.0; n],
        face: vec![0.0; n],
    };
    let mut out = vec![0.0; n];
    s.rhs(v, &mut out);
    out
}

/// March the balance law from `P0` to `P1` starting from `initial` on the
/// grid of `grid`, with Dirichlet data from the characteristic solution of
/// `eos` at both ends of the `T` interval.
pub fn evolve_viscous(
    spec: &ViscousEntropySpec,
    eos: &EosSpec,
    initial: &[f64],
    p0: f64,
    p1: f64,
    grid: &GridParams,
) -> Result<FieldSolution> {
    grid.validate()?;
    let coeffs = coeffs_from_entropy(spec)?;
    let n = grid.n_t;
    if initial.len() != n {
        return Err(Error::invalid(
            "initial",
            format!("expected {n} values, got {}", initial.len()),
        ));
    }
    if !(p0.is_finite() && p1.is_finite()) || p0 == p1 {
        return Err(Error::invalid("P0/P1", "need finite, distinct pressures"));
    }
    let h = grid.spacing();
    let ts = grid.temperatures();
    let dir = (p1 - p0).signum();

    // coefficient bounds over the range of the data
    let (mut vmin, mut vmax) = (f64::INFINITY, f64::NEG_INFINITY);
    for &v in initial {
        if !v.is_finite() {
            return Err(Error::invalid("initial", "non-finite value"));
        }
        vmin = vmin.min(v);
        vmax = vmax.max(v);
    }
    // boundary data can leave the initial range
    let (mut bl, mut br) = (initial[0], initial[n - 1]);
    for k in 1..=32 {
        let p = p0 + (p1 - p0) * k as f64 / 32.0;
        let shift = grid.frame_speed * (p - p0);
        bl = track_root(eos, p, ts[0] + shift, bl)?;
        br = track_root(eos, p, ts[n - 1] + shift, br)?;
        vmin = vmin.min(bl).min(br);
        vmax = vmax.max(bl).max(br);
    }
    let pad = 0.05 * (vmax - vmin);
    if eos.contains(vmin - pad) {
        vmin -= pad;
    }
    vmax += pad;
    let mut a_max: f64 = 0.0;
    let mut d_min = f64::INFINITY;
    let mut d_max: f64 = 0.0;
    for k in 0..=64 {
        let v = vmin + (vmax - vmin) * k as f64 / 64.0;
        let c = coeffs.at(v)?;
        a_max = a_max.max((c.alpha - grid.frame_speed).abs());
        // diffusion coefficient in the marching variable dir * P
        let d = -dir * spec.nu * c.gamma;
        if spec.nu > 0.0 && d <= 0.0 {
            return Err(Error::IllPosedDirection { p0, p1 });
        }
        d_min = d_min.min(d);
        d_max = d_max.max(d);
    }
    let mut dt_max = h / a_max.max(f64::MIN_POSITIVE);
    if spec.nu > 0.0 {
        dt_max = dt_max
            .min(h * h / (2.0 * d_max))
            .min((8.0 * d_min * h * h / a_max.powi(4)).cbrt());
    }
    dt_max *= grid.safety;
    let rows = grid.output_rows;
    let span = (p1 - p0).abs();
    let per_row = ((span / dt_max) / (rows - 1) as f64).ceil().max(1.0) as usize;
    let steps = per_row * (rows - 1);
    if steps > grid.max_steps {
        return Err(Error::invalid(
            "max_steps",
            format!("{steps} steps needed, limit is {}", grid.max_steps),
        ));
    }
    let dp = (p1 - p0) / steps as f64;

    let mut scheme = Scheme {
        coeffs: &coeffs,
        h,
        frame: grid.frame_speed,
        v_ref: initial[0],
        g: vec![0.0; n],
        face: vec![0.0; n],
    };
    let mut v = initial.to_vec();
    let mut stage = vec![0.0; n];
    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut out_p = vec![p0];
    let mut out_v = initial.to_vec();
    let mut left = initial[0];
    let mut right = initial[n - 1];
    let range = (vmax - vmin).max(1e-300);
    let mut max_budget: f64 = 0.0;

    for s in 0..steps {
        let p = p0 + s as f64 * dp;
        let p_next = p0 + (s + 1) as f64 * dp;
        let (bf1, src1) = scheme.rhs(&v, &mut k1);
        for i in 0..n {
            stage[i] = v[i] + dp * k1[i];
        }
        let shift = grid.frame_speed * (p_next - p0);
        left = track_root(eos, p_next, ts[0] + shift, left)?;
        right = track_root(eos, p_next, ts[n - 1] + shift, right)?;
        stage[0] = left;
        stage[n - 1] = right;
        let (bf2, src2) = scheme.rhs(&stage, &mut k2);
        let mut mass_change = 0.0;
        for i in 1..n - 1 {
            let dv = 0.5 * dp * (k1[i] + k2[i]);
            v[i] += dv;
            mass_change += h * dv;
        }
        v[0] = left;
        v[n - 1] = right;
        let expected = 0.5 * dp * (-(bf1 + src1) - (bf2 + src2));
        let scale = h * v.iter().map(|x| x.abs()).sum::<f64>();
        max_budget = max_budget.max((mass_change - expected).abs() / scale.max(f64::MIN_POSITIVE));

        let bad = v
            .iter()
            .any(|&x| !x.is_finite() || x < vmin - 10.0 * range || x > vmax + 10.0 * range);
        if bad {
            let norm = v.iter().map(|x| x.abs()).fold(0.0, f64::max);
            return Err(Error::Unstable { p, norm });
        }
        if (s + 1) % per_row == 0 {
            out_p.push(p_next);
            out_v.extend_from_slice(&v);
        }
    }
    Ok(FieldSolution {
        p: out_p,
        t: ts,
        v: out_v,
        steps,
        dp,
        max_budget_residual: max_budget,
        frame_speed: grid.frame_speed,
    })
}

/// Solution of `u_Y + u u_X = u_XX` on output rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BurgersField {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// `u[k][i]` at `(x[i], y[k])`.
    pub u: Vec<Vec<f64>>,
}

/// Kernel weight at the grid edges must stay below this fraction of the peak.
pub const KERNEL_EDGE_TOL: f64 = 1e-16;

/// Exact Cole-Hopf evaluation. `x` must be uniform; `u0` is the data at
/// `Y = 0`. Rows are returned for each `Y` in `ys` (all `> 0`, or `0` for
/// the data itself), evaluated at every node of `x` inside `[x_lo, x_hi]`.
pub fn burgers_evolve(x: &[f64], u0: &[f64], ys: &[f64], x_lo: f64, x_hi: f64) -> Result<BurgersField> {
    if x.len() != u0.len() {
        return Err(Error::invalid("u0", "length must match the X grid"));
    }
    if u0.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("u0", "non-finite value"));
    }
    let spline = CubicSpline::new(x.to_vec(), u0.to_vec())?;
    let h = x[1] - x[0];
    if x.windows(2).any(|w| ((w[1] - w[0]) - h).abs() > 1e-9 * h) {
        return Err(Error::invalid("x", "grid must be uniform"));
    }
    // log of the heat-equation initial data, -U0/2
    let log_phi0: Vec<f64> = spline.cumulative_integral().iter().map(|c| -0.5 * c).collect();
    let out_idx: Vec<usize> = (0..x.len()).filter(|&i| x[i] >= x_lo && x[i] <= x_hi).collect();
    let xs: Vec<f64> = out_idx.iter().map(|&i| x[i]).collect();
    let mut rows = Vec::with_capacity(ys.len());
    let mut logw = vec![0.0; x.len()];
    for &y in ys {
        if y == 0.0 {
            rows.push(out_idx.iter().map(|&i| u0[i]).collect());
            continue;
        }
        if !(y > 0.0 && y.is_finite()) {
            return Err(Error::invalid("Y", format!("must be positive, got {y}")));
        }
        let mut row = Vec::with_capacity(out_idx.len());
        for &i in &out_idx {
            let xi = x[i];
            let mut peak = f64::NEG_INFINITY;
            for (j, w) in logw.iter_mut().enumerate() {
                let d = xi - x[j];
                *w = log_phi0[j] - d * d / (4.0 * y);
                peak = peak.max(*w);
            }
            let edge = logw[0].max(logw[x.len() - 1]);
            if edge - peak > KERNEL_EDGE_TOL.ln() {
                return Err(Error::Quadrature {
                    err: (edge - peak).exp(),
                    tol: KERNEL_EDGE_TOL,
                });
            }
            // trapezoid with log-sum-exp; the kernel weight at the edges is negligible
            let (mut num, mut den) = (0.0, 0.0);
            for (j, &w) in logw.iter().enumerate() {
                let e = (w - peak).exp();
                num += e * (xi - x[j]);
                den += e;
            }
            row.push(num / (den * y));
        }
        rows.push(row);
    }
    Ok(BurgersField {
        x: xs,
        y: ys.to_vec(),
        u: rows,
    })
}

/// A steep front found in a sampled profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Front {
    /// Location of the steepest descent.
    pub x_steepest: f64,
    pub slope: f64,
    /// Where the profile crosses the mean of its flanking values.
    pub x_mid: f64,
    pub u_left: f64,
    pub u_right: f64,
}

/// Decreasing fronts: contiguous clusters where `u_X` is below
/// `-threshold * max|u_X|`. Flanking values are read `margin` grid cells
/// outside each cluster.
pub fn find_fronts(x: &[f64], u: &[f64], threshold: f64, margin: usize) -> Vec<Front> {
    let n = x.len();
    if n < 3 {
        return Vec::new();
    }
    let slope: Vec<f64> = (0..n)
        .map(|i| {
            let (a, b) = (i.saturating_sub(1), (i + 1).min(n - 1));
            (u[b] - u[a]) / (x[b] - x[a])
        })
        .collect();
    let smax = slope.iter().fold(0.0f64, |m, s| m.max(s.abs()));
    if smax == 0.0 {
        return Vec::new();
    }
    let cut = -threshold * smax;
    let mut fronts = Vec::new();
    let mut i = 0;
    while i < n {
        if slope[i] < cut {
            let start = i;
            while i < n && slope[i] < cut {
                i += 1;
            }
            let end = i - 1;
            let k = (start..=end).min_by(|&a, &b| slope[a].total_cmp(&slope[b])).unwrap();
            let ul = u[start.saturating_sub(margin)];
            let ur = u[(end + margin).min(n - 1)];
            let mid = 0.5 * (ul + ur);
            let mut x_mid = x[k];
            for j in start.saturating_sub(margin)..(end + margin).min(n - 1) {
                if (u[j] - mid) * (u[j + 1] - mid) <= 0.0 && u[j] != u[j + 1] {
                    x_mid = x[j] + (mid - u[j]) / (u[j + 1] - u[j]) * (x[j + 1] - x[j]);
                    break;
                }
            }
            fronts.push(Front {
                x_steepest: x[k],
                slope: slope[k],
                x_mid,
                u_left: ul,
                u_right: ur,
            });
        } else {
            i += 1;
        }
    }
    fronts
}

/// Convenience: `n` equally spaced points on `[a, b]`.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

/// First `Y` in `ys` at which `field` shows at most one front.
pub fn merge_height(field: &BurgersField, threshold: f64, margin: usize) -> Option<f64> {
    field
        .u
        .iter()
        .zip(&field.y)
        .find(|(row, _)| find_fronts(&field.x, row, threshold, margin).len() <= 1)
        .map(|(_, &y)| y)
}

/// Bisection helper used by tests and the shock module: the `T` where a
/// profile crosses `level`.
pub fn crossing(x: &[f64], u: &[f64], level: f64) -> Option<f64> {
    let j = (0..x.len() - 1).find(|&j| (u[j] - level) * (u[j + 1] - level) <= 0.0 && u[j] != u[j + 1])?;
    let lin = |s: f64| u[j] + (s - x[j]) / (x[j + 1] - x[j]) * (u[j + 1] - u[j]) - level;
    roots::bisect(lin, x[j], x[j + 1], 1e-15 * (1.0 + x[j].abs())).ok()
}
