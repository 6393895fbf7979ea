//! Subcommands. Each argument struct is both the clap flag set and the
//! schema of its config section; every field is optional so flags can be
//! laid over the file.

use std::fmt::Write as _;
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use clap::Args;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use shockphase::analysis::{compressibility_scaling, volume_jump_scaling};
use shockphase::coexistence::{
    clapeyron_speed, coexistence_curve, maxwell_pressure, CoexistenceCurve, VolumeEntropySpec, NEAR_CRITICAL,
};
use shockphase::fit::{fit_alpha_f_with, predict_isotherm, FitOptions, IsothermDataset};
use shockphase::pearcey::{pearcey_grid, universal_volume, universal_volume_inviscid, ScalingMap, DEFAULT_TOL};
use shockphase::shocks::{
    confluence_event, propagate_shock, Branch, FluidBranch, PhaseDiagram, PhaseModel, PhaseModelSpec, TableState,
};
use shockphase::viscous::{characteristic_profile, evolve_viscous, linspace, GridParams, ViscousEntropySpec};
use shockphase::{CriticalPoint, EosSpec, Error, Result, ScalarFn, VERSION};

/// Config section names, one per subcommand.
pub const SECTIONS: [&str; 12] = [
    "isotherm",
    "critical_point",
    "maxwell",
    "coexistence",
    "clapeyron",
    "pearcey",
    "universal",
    "exponents",
    "pde",
    "shocks",
    "fit",
    "phase_diagram",
];

/// Everything a command needs besides its own arguments.
pub struct Ctx {
    pub command: &'static str,
    pub hash: String,
    pub eos: Option<EosSpec>,
    pub cp: Option<CriticalPoint>,
    pub entropy: Option<VolumeEntropySpec>,
}

impl Ctx {
    fn eos(&self) -> &EosSpec {
        self.eos
            .as_ref()
            .expect("command declared it needs an equation of state")
    }

    fn cp(&self) -> &CriticalPoint {
        self.cp
            .as_ref()
            .expect("critical point resolved with the equation of state")
    }

    fn entropy(&self) -> &VolumeEntropySpec {
        self.entropy.as_ref().expect("command declared it needs an entropy")
    }

    fn csv_header(&self) -> String {
        format!(
            "# shockphase {VERSION} {}\n# config-sha256 {}\n",
            self.command, self.hash
        )
    }

    fn csv(&self, body: &[u8]) -> String {
        self.csv_header() + std::str::from_utf8(body).expect("csv writers emit ascii")
    }

    fn json(&self, key: &str, body: serde_json::Value) -> Result<String> {
        let mut doc = serde_json::Map::new();
        doc.insert(
            "generator".into(),
            serde_json::json!({ "name": "shockphase", "version": VERSION, "command": self.command, "config_sha256": self.hash }),
        );
        doc.insert(key.into(), body);
        Ok(serde_json::to_string_pretty(&doc)? + "\n")
    }
}

pub trait Command: Serialize + DeserializeOwned {
    const NAME: &'static str;
    const SECTION: &'static str;
    const NEEDS_EOS: bool = true;
    const NEEDS_ENTROPY: bool = false;

    /// Input files whose contents enter the config hash.
    fn inputs(&self) -> Vec<PathBuf> {
        Vec::new()
    }

    fn run(&self, ctx: &Ctx) -> Result<String>;
}

fn positive(name: &'static str, x: f64) -> Result<f64> {
    if x.is_finite() && x > 0.0 {
        Ok(x)
    } else {
        Err(Error::invalid(name, format!("must be positive, got {x}")))
    }
}

fn finite(name: &'static str, x: f64) -> Result<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Error::invalid(name, format!("must be finite, got {x}")))
    }
}

fn at_least(name: &'static str, n: usize, min: usize) -> Result<usize> {
    if n >= min {
        Ok(n)
    } else {
        Err(Error::invalid(name, format!("must be at least {min}, got {n}")))
    }
}

fn ordered(lo_name: &'static str, lo: f64, hi: f64) -> Result<()> {
    if lo < hi {
        Ok(())
    } else {
        Err(Error::invalid(lo_name, format!("{lo} must be below {hi}")))
    }
}

fn temperatures(ts: Option<&Vec<f64>>) -> Result<Vec<f64>> {
    let ts = ts.ok_or_else(|| Error::invalid("T", "at least one temperature is required"))?;
    if ts.is_empty() {
        return Err(Error::invalid("T", "at least one temperature is required"));
    }
    for &t in ts {
        positive("T", t)?;
    }
    Ok(ts.clone())
}

/// Sorted temperatures from `lo` to `hi`.
fn t_range(lo: f64, hi: f64, steps: usize) -> Result<Vec<f64>> {
    positive("t_lo", lo)?;
    positive("t_hi", hi)?;
    ordered("t_lo", lo, hi)?;
    at_least("steps", steps, 2)?;
    Ok(linspace(lo, hi, steps))
}

fn axis(name: &'static str, lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    finite(name, lo)?;
    finite(name, hi)?;
    ordered(name, lo, hi)?;
    at_least(name, n, 2)?;
    Ok(linspace(lo, hi, n))
}

fn read_dataset(name: &'static str, path: Option<&PathBuf>) -> Result<IsothermDataset> {
    let path = path.ok_or_else(|| Error::invalid(name, "path to an isotherm CSV is required"))?;
    let f = File::open(path).map_err(|e| Error::Parse(format!("{name} {}: {e}", path.display())))?;
    IsothermDataset::read_csv(BufReader::new(f)).map_err(|e| Error::Parse(format!("{name} {}: {e}", path.display())))
}

/// Pressure on the isotherm with the unstable loop replaced by the plateau.
#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IsothermArgs {
    /// Temperatures, comma separated
    #[arg(long = "T", value_delimiter = ',', allow_negative_numbers = true)]
    #[serde(rename = "T")]
    pub t: Option<Vec<f64>>,
    /// Smallest volume [default: 0.5 V_c, inside the domain]
    #[arg(long, allow_negative_numbers = true)]
    pub v_min: Option<f64>,
    /// Largest volume [default: 5 V_c]
    #[arg(long, allow_negative_numbers = true)]
    pub v_max: Option<f64>,
    /// Samples per isotherm [default: 200]
    #[arg(long)]
    pub points: Option<usize>,
}

impl Command for IsothermArgs {
    const NAME: &'static str = "isotherm";
    const SECTION: &'static str = "isotherm";

    fn run(&self, ctx: &Ctx) -> Result<String> {
        let ts = temperatures(self.t.as_ref())?;
        let (eos, cp) = (ctx.eos(), ctx.cp());
        let (lo, hi) = eos.domain();
        let v_min = self.v_min.unwrap_or((0.5 * cp.v_c).max(lo + 0.05 * (cp.v_c - lo)));
        let v_max = self.v_max.unwrap_or(if hi.is_finite() {
            (5.0 * cp.v_c).min(hi)
        } else {
            5.0 * cp.v_c
        });
        ordered("v_min", v_min, v_max)?;
        for (name, v) in [("v_min", v_min), ("v_max", v_max)] {
            if !eos.contains(v) {
                return Err(Error::invalid(name, format!("{v} is outside the domain ({lo}, {hi})")));
            }
        }
        let vs = linspace(v_min, v_max, at_least("points", self.points.unwrap_or(200), 2)?);

        let mut out = ctx.csv_header();
        out.push_str("T,V,P,P_maxwell\n");
        for &t in &ts {
            // the plateau is unresolved within the near-critical cutoff
            let plateau = if t < cp.t_c * (1.0 - NEAR_CRITICAL) {
                let sp = maxwell_pressure(eos, t)?;
                Some((sp.v_l, sp.v_g, sp.p_sat))
            } else {
                None
            };
            for &v in &vs {
                let p = eos.isotherm_pressure(v, t)?;
                let pm = match plateau {
                    Some((vl, vg, ps)) if v >= vl && v <= vg => ps,
                    _ => p,
                };
                writeln!(out, "{t:e},{v:e},{p:e},{pm:e}").unwrap();
            }
        }
        Ok(out)
    }
}

/// Critical volume, pressure and temperature.
#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CriticalPointArgs {}

impl Command for CriticalPointArgs {
    const NAME: &'static str = "critical-point";
    const SECTION: &'static str = "critical_point";

    fn run(&self, ctx: &Ctx) -> Result<String> {
        let cp = ctx.cp();
        Ok(format!(
            "{}V_c,P_c,T_c\n{:e},{:e},{:e}\n",
            ctx.csv_header(),
            cp.v_c,
            cp.p_c,
            cp.t_c
        ))
    }
}

/// Saturation states at given temperatures.
#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaxwellArgs {
    /// Temperatures below T_c, comma separated
    #[arg(long = "T", value_delimiter = ',', allow_negative_numbers = true)]
    #[serde(rename = "T")]
    pub t: Option<Vec<f64>>,
}

impl Command for MaxwellArgs {
    const NAME: &'static str = "maxwell";
    const SECTION: &'static str = "maxwell";

    fn run(&self, ctx: &Ctx) -> Result<String> {
        let ts = temperatures(self.t.as_ref())?;
        let points = ts
            .iter()
            .map(|&t| maxwell_pressure(ctx.eos(), t))
            .collect::<Result<Vec<_>>>()?;
        let mut buf = Vec::new();
        CoexistenceCurve { points }.write_csv(&mut buf)?;
        Ok(ctx.csv(&buf))
    }
}

/// Coexistence curve on a uniform temperature grid.
#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoexistenceArgs {
    /// Lowest temperature [default: 0.5 T_c]
    #[arg(long, allow_negative_numbers = true)]
    pub t_lo: Option<f64>,
    /// Highest temperature [default: 0.98 T_c]
    #[arg(long, allow_negative_numbers = true)]
    pub t_hi: Option<f64>,
    /// Number of temperatures [default: 25]
    #[arg(long)]
    pub steps: Option<usize>,
}

impl Command for CoexistenceArgs {
    const NAME: &'static str = "coexistence";
    const SECTION: &'static str = "coexistence";

    fn run(&self, ctx: &Ctx) -> Result<String> {
        let tc = ctx.cp().t_c;
        let (lo, hi) = (self.t_lo.unwrap_or(0.5 * tc), self.t_hi.unwrap_or(0.98 * tc));
        let steps = self.steps.unwrap_or(25);
        t_range(lo, hi, steps)?;
        let curve = coexistence_curve(ctx.eos(), lo, hi, steps)?;
        let mut buf = Vec::new();
        curve.write_csv(&mut buf)?;
        Ok(ctx.csv(&buf))
    }
}

/// Jump ratio of entropy to volume against the slope of the saturation curve.
#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClapeyronArgs {
    /// Lowest temperature [default: 0.5 T_c]
    #[arg(long, allow_negative_numbers = true)]
    pub t_lo: Option<f64>,
    /// Highest temperature [default: 0.98 T_c]
    #[arg(long, allow_negative_numbers = true)]
    pub t_hi: Option<f64>,
    /// Number of temperatures [default: 25]
    #[arg(long)]
    pub steps: Option<usize>,
    /// Half step of the central difference [default: 1e-4 T_c]
    #[arg(long)]
    pub dt: Option<f64>,
}

impl Command for ClapeyronArgs {
    const NAME: &'static str = "clapeyron";
    const SECTION: &'static str = "clapeyron";
    const NEEDS_ENTROPY: bool = true;

    fn run(&self, ctx: &Ctx) -> Result<String> {
        let tc = ctx.cp().t_c;
        let ts = t_range(
            self.t_lo.unwrap_or(0.5 * tc),
            self.t_hi.unwrap_or(0.98 * tc),
            self.steps.unwrap_or(25),
        )?;
        let h = positive("dt", self.dt.unwrap_or(1e-4 * tc))?;
        let eos = ctx.eos();
        let mut out = ctx.csv_header();
        out.push_str("T,P_sat,dS_dV,dP_sat_dT,rel_diff\n");
        for t in ts {
            let sp = maxwell_pressure(eos, t)?;
            let u = clapeyron_speed(&sp, ctx.entropy())?;
            let slope = (maxwell_pressure(eos, t + h)?.p_sat - maxwell_pressure(eos, t - h)?.p_sat) / (2.0 * h);
            writeln!(
                out,
                "{t:e},{:e},{u:e},{slope:e},{:e}",
                sp.p_sat,
                ((u - slope) / slope).abs()
            )
            .unwrap();
        }
        Ok(out)
    }
}

/// `(X, Y)` axes, 21 points each over [-10, 10] unless given.
fn window_axes(
    x: (Option<f64>, Option<f64>, Option<usize>),
    y: (Option<f64>, Option<f64>, Option<usize>),
) -> Result<(Vec<f64>, Vec<f64>)> {
    Ok((
        axis("x_lo", x.0.unwrap_or(-10.0), x.1.unwrap_or(10.0), x.2.unwrap_or(21))?,
        axis("y_lo", y.0.unwrap_or(-10.0), y.1.unwrap_or(10.0), y.2.unwrap_or(21))?,
    ))
}

/// The quartic-exponent integral and the profile it generates.
#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PearceyArgs {
    /// [default: -10]
    #[arg(long, allow_negative_numbers = true)]
    pub x_lo: Option<f64>,
    /// [default: 10]
    #[arg(long, allow_negative_numbers = true)]
    pub x_hi: Option<f64>,
    /// [default: 21]
    #[arg(long)]
    pub nx: Option<usize>,
    /// [default: -10]
    #[arg(long, allow_negative_numbers = true)]
    pub y_lo: Option<f64>,
    /// [default: 10]
    #[arg(long, allow_negative_numbers = true)]
    pub y_hi: Option<f64>,
    /// [default: 21]
    #[arg(long)]
    pub ny: Option<usize>,
    /// Relative quadrature tolerance [default: 1e-13]
    #[arg(long)]
    pub tol: Option<f64>,
}

impl Command for PearceyArgs {
    const NAME: &'static str = "pearcey";
    const SECTION: &'static str = "pearcey";
    const NEEDS_EOS: bool = false;

    fn run(&self, ctx: &Ctx) -> Result<String> {
        let (xs, ys) = window_axes((self.x_lo, self.x_hi, self.nx), (self.y_lo, self.y_hi, self.ny))?;
        let tol = positive("tol", self.tol.unwrap_or(DEFAULT_TOL))?;
        let mut out = ctx.csv_header();
        out.push_str("X,Y,log_Lambda,u,du_dX,du_dY\n");
        for q in pearcey_grid(&xs, &ys, tol)? {
            writeln!(
                out,
                "{:e},{:e},{:e},{:e},{:e},{:e}",
                q.x, q.y, q.log_lambda, q.u, q.du_dx, q.du_dy
            )
            .unwrap();
        }
        Ok(out)
    }
}

/// Near-critical volume from the universal profile, beside the inviscid root.
#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UniversalArgs {
    /// [default: -10]
    #[arg(long, allow_negative_numbers = true)]
    pub x_lo: Option<f64>,
    /// [default: 10]
    #[arg(long, allow_negative_numbers = true)]
    pub x_hi: Option<f64>,
    /// [default: 21]
    #[arg(long)]
    pub nx: Option<usize>,
    /// [default: -10]
    #[arg(long, allow_negative_numbers = true)]
    pub y_lo: Option<f64>,
    /// [default: 10]
    #[arg(long, allow_negative_numbers = true)]
    pub y_hi: Option<f64>,
    /// [default: 21]
    #[arg(long)]
    pub ny: Option<usize>,
    /// Diffusion strength at the critical volume [default: 1]
    #[arg(long, allow_negative_numbers = true)]
    pub gamma0: Option<f64>,
    /// Small parameter [default: 1e-4]
    #[arg(long)]
    pub nu: Option<f64>,
}

impl Command for UniversalArgs {
    const NAME: &'static str = "universal";
    const SECTION: &'static str = "universal";

    fn run(&self, ctx: &Ctx) -> Result<String> {
        let (xs, ys) = window_axes((self.x_lo, self.x_hi, self.nx), (self.y_lo, self.y_hi, self.ny))?;
        let nu = positive("nu", self.nu.unwrap_or(1e-4))?;
        let gamma0 = finite("gamma0", self.gamma0.unwrap_or(1.0))?;
        let map = ScalingMap::with_critical_point(ctx.eos(), *ctx.cp(), gamma0, nu)?;
        let mut out = ctx.csv_header();
        out.push_str("X,Y,P,T,V_universal,V_inviscid\n");
        for &y in &ys {
            for &x in &xs {
                let (p, t) = map.physical(x, y);
                let v = universal_volume(p, t, &map)?;
                // the inviscid volume is two-valued on the shock line
                let vi = match universal_volume_inviscid(p, t, &map) {
                    Ok(v) => format!("{v:e}"),
                    Err(Error::SaddleTie { .. }) => String::new(),
                    Err(e) => return Err(e),
                };
                writeln!(out, "{x:e},{y:e},{p:e},{t:e},{v:e},{vi}").unwrap();
            }
        }
        Ok(out)
    }
}

/// Power-law fits of the critical compressibility and volume jump in nu.
#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExponentsArgs {
    /// [default: 1]
    #[arg(long, allow_negative_numbers = true)]
    pub gamma0: Option<f64>,
    /// [default: 1e-6]
    #[arg(long)]
    pub nu_lo: Option<f64>,
    /// [default: 1e-3]
    #[arg(long)]
    pub nu_hi: Option<f64>,
    /// Number of log-spaced nu values [default: 7]
    #[arg(long)]
    pub count: Option<usize>,
    /// Pressure offset, in window units, at which the jump is measured [default: 1]
    #[arg(long)]
    pub delta_p: Option<f64>,
}

impl Command for ExponentsArgs {
    const NAME: &'static str = "exponents";
    const SECTION: &'static str = "exponents";

    fn run(&self, ctx: &Ctx) -> Result<String> {
        let lo = positive("nu_lo", self.nu_lo.unwrap_or(1e-6))?;
        let hi = positive("nu_hi", self.nu_hi.unwrap_or(1e-3))?;
        ordered("nu_lo", lo, hi)?;
        let n = at_least("count", self.count.unwrap_or(7), 2)?;
        let mut nus: Vec<f64> = linspace(lo.ln(), hi.ln(), n).into_iter().map(f64::exp).collect();
        (nus[0], nus[n - 1]) = (lo, hi);
        let gamma0 = finite("gamma0", self.gamma0.unwrap_or(1.0))?;
        let map = ScalingMap::with_critical_point(ctx.eos(), *ctx.cp(), gamma0, lo)?;
        let g = compressibility_scaling(&map, &nus)?;
        let b = volume_jump_scaling(&map, &nus, positive("delta_p", self.delta_p.unwrap_or(1.0))?)?;
        ctx.json("exponents", serde_json::to_value([g, b])?)
    }
}

/// March the viscous balance law in pressure from characteristic data.
#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PdeArgs {
    /// Constant first-order entropy coefficient [default: 1]
    #[arg(long, allow_negative_numbers = true)]
    pub c: Option<f64>,
    /// Small parameter [default: 1e-3]
    #[arg(long)]
    pub nu: Option<f64>,
    /// [default: 1.2 T_c]
    #[arg(long)]
    pub t_lo: Option<f64>,
    /// [default: 1.8 T_c]
    #[arg(long)]
    pub t_hi: Option<f64>,
    /// Grid points in T [default: 201]
    #[arg(long)]
    pub n_t: Option<usize>,
    /// Starting pressure [default: 2 P_c]
    #[arg(long)]
    pub p0: Option<f64>,
    /// Final pressure [default: 1.6 P_c]
    #[arg(long)]
    pub p1: Option<f64>,
    /// Stored rows including both ends [default: 11]
    #[arg(long)]
    pub output_rows: Option<usize>,
    /// Fraction of the stability limit [default: 0.5]
    #[arg(long)]
    pub safety: Option<f64>,
    /// Grid drift dT/dP [default: 0]
    #[arg(long, allow_negative_numbers = true)]
    pub frame_speed: Option<f64>,
}

impl Command for PdeArgs {
    const NAME: &'static str = "pde";
    const SECTION: &'static str = "pde";
    const NEEDS_ENTROPY: bool = true;

    fn run(&self, ctx: &Ctx) -> Result<String> {
        let cp = ctx.cp();
        let spec = ViscousEntropySpec {
            s0: ctx.entropy().s0.clone(),
            s1: ScalarFn::constant(finite("c", self.c.unwrap_or(1.0))?),
            s2: ScalarFn::zero(),
            f_t: ScalarFn::zero(),
            nu: positive("nu", self.nu.unwrap_or(1e-3))?,
        };
        let mut grid = GridParams::new(
            positive("t_lo", self.t_lo.unwrap_or(1.2 * cp.t_c))?,
            positive("t_hi", self.t_hi.unwrap_or(1.8 * cp.t_c))?,
            self.n_t.unwrap_or(201),
        );
        grid.output_rows = self.output_rows.unwrap_or(grid.output_rows);
        grid.safety = self.safety.unwrap_or(grid.safety);
        grid.frame_speed = self.frame_speed.unwrap_or(0.0);
        let p0 = finite("p0", self.p0.unwrap_or(2.0 * cp.p_c))?;
        let p1 = finite("p1", self.p1.unwrap_or(1.6 * cp.p_c))?;
        at_least("n_t", grid.n_t, 5)?;
        let init = characteristic_profile(ctx.eos(), p0, &grid.temperatures())?;
        let sol = evolve_viscous(&spec, ctx.eos(), &init, p0, p1, &grid)?;
        let mut buf = Vec::new();
        sol.write_csv(&mut buf)?;
        Ok(ctx.csv(&buf))
    }
}

/// Trace the liquid-gas boundary by integrating the jump-speed ODE.
#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShocksArgs {
    /// Starting temperature [default: 0.98 T_c]
    #[arg(long)]
    pub t0: Option<f64>,
    /// Starting pressure [default: saturation pressure at t0]
    #[arg(long)]
    pub p0: Option<f64>,
    /// Final temperature [default: 0.6 T_c]
    #[arg(long)]
    pub t_end: Option<f64>,
    /// Largest RK4 step [default: 0.0025 T_c]
    #[arg(long)]
    pub step: Option<f64>,
}

fn fluid_branches(ctx: &Ctx) -> (FluidBranch, FluidBranch) {
    let branch = |b| FluidBranch {
        eos: ctx.eos().clone(),
        entropy: ctx.entropy().clone(),
        branch: b,
    };
    (branch(Branch::Liquid), branch(Branch::Gas))
}

impl Command for ShocksArgs {
    const NAME: &'static str = "shocks";
    const SECTION: &'static str = "shocks";
    const NEEDS_ENTROPY: bool = true;

    fn run(&self, ctx: &Ctx) -> Result<String> {
        let tc = ctx.cp().t_c;
        let t0 = positive("t0", self.t0.unwrap_or(0.98 * tc))?;
        let t_end = positive("t_end", self.t_end.unwrap_or(0.6 * tc))?;
        let step = positive("step", self.step.unwrap_or(0.0025 * tc))?;
        let p0 = match self.p0 {
            Some(p) => positive("p0", p)?,
            None => maxwell_pressure(ctx.eos(), t0)?.p_sat,
        };
        let (liquid, gas) = fluid_branches(ctx);
        let tr = propagate_shock(t0, p0, &liquid, &gas, ("liquid", "gas"), t_end, step)?;
        let mut buf = Vec::new();
        tr.write_csv(&mut buf)?;
        Ok(ctx.csv(&buf))
    }
}

/// Recover alpha(V) and f(V) from two isotherms.
#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitArgs {
    /// First isotherm CSV (`# T=<value>` line, then V,P rows)
    #[arg(long)]
    pub iso1: Option<PathBuf>,
    /// Second isotherm CSV, at a different temperature
    #[arg(long)]
    pub iso2: Option<PathBuf>,
    /// Smooth the recovered alpha and f for noisy data
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub smooth: Option<bool>,
    /// Temperatures at which to predict isotherms, comma separated
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub predict: Option<Vec<f64>>,
}

#[derive(Serialize)]
struct Prediction {
    #[serde(rename = "T")]
    t: f64,
    points: Vec<(f64, f64)>,
}

impl Command for FitArgs {
    const NAME: &'static str = "fit";
    const SECTION: &'static str = "fit";
    const NEEDS_EOS: bool = false;

    fn inputs(&self) -> Vec<PathBuf> {
        self.iso1.iter().chain(&self.iso2).cloned().collect()
    }

    fn run(&self, ctx: &Ctx) -> Result<String> {
        let d1 = read_dataset("iso1", self.iso1.as_ref())?;
        let d2 = read_dataset("iso2", self.iso2.as_ref())?;
        let predict = match &self.predict {
            Some(ts) => temperatures(Some(ts))?,
            None => Vec::new(),
        };
        let eos = fit_alpha_f_with(
            &d1,
            &d2,
            FitOptions {
                smooth: self.smooth.unwrap_or(false),
            },
        )?;
        // a surface without a critical point in the sampled window is still a fit
        let cp = eos.critical_point().ok();
        let predictions = predict
            .iter()
            .map(|&t| {
                Ok(Prediction {
                    t,
                    points: predict_isotherm(&eos, t)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        ctx.json(
            "fit",
            serde_json::json!({ "eos": eos, "critical_point": cp, "predictions": predictions }),
        )
    }
}

/// Vapor boundary from the surface, fusion boundary from a table, and
/// their confluence into one boundary at the triple point.
#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseDiagramArgs {
    /// Upper end of the vapor boundary [default: 0.98 T_c]
    #[arg(long)]
    pub t_hi: Option<f64>,
    /// Lower end of the vapor boundary [default: 0.6 T_c]
    #[arg(long)]
    pub t_lo: Option<f64>,
    /// Largest RK4 step [default: 0.0025 T_c]
    #[arg(long)]
    pub step: Option<f64>,
    /// CSV with columns T,V_solid,S_solid,V_melt,S_melt
    #[arg(long)]
    pub fusion_table: Option<PathBuf>,
    /// Starting temperature of the fusion boundary
    #[arg(long)]
    pub fusion_t0: Option<f64>,
    /// Starting pressure of the fusion boundary
    #[arg(long, allow_negative_numbers = true)]
    pub fusion_p0: Option<f64>,
    /// Final temperature of the fusion boundary
    #[arg(long)]
    pub fusion_t_end: Option<f64>,
    /// Final temperature of the boundary leaving the triple point [default: t_lo]
    #[arg(long)]
    pub merged_t_end: Option<f64>,
    /// Solid phase model, config file only (instead of a table)
    #[arg(skip)]
    pub solid: Option<PhaseModelSpec>,
    /// Melt phase model, config file only (instead of a table)
    #[arg(skip)]
    pub melt: Option<PhaseModelSpec>,
}

const FUSION_HEADER: [&str; 5] = ["T", "V_solid", "S_solid", "V_melt", "S_melt"];

/// Solid and melt states tabulated in temperature.
fn read_fusion_table(path: &Path) -> Result<(TableState, TableState)> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("fusion_table {}: {e}", path.display())))?;
    let bad = |line: usize, why: String| Error::Parse(format!("fusion_table {} line {line}: {why}", path.display()));
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'));
    let (n, header) = lines.next().ok_or_else(|| bad(1, "empty file".into()))?;
    let names: Vec<&str> = header.split(',').map(str::trim).collect();
    if names != FUSION_HEADER {
        return Err(bad(n + 1, format!("expected header {}", FUSION_HEADER.join(","))));
    }
    let mut cols: [Vec<f64>; 5] = Default::default();
    for (n, line) in lines {
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 5 {
            return Err(bad(n + 1, format!("expected 5 fields, found {}", fields.len())));
        }
        for (col, f) in cols.iter_mut().zip(&fields) {
            let x: f64 = f.parse().map_err(|_| bad(n + 1, format!("`{f}` is not a number")))?;
            if !x.is_finite() {
                return Err(bad(n + 1, format!("`{f}` is not finite")));
            }
            col.push(x);
        }
    }
    let [t, vs, ss, vm, sm] = cols;
    if t.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Parse(format!(
            "fusion_table {}: T must be strictly increasing",
            path.display()
        )));
    }
    Ok((TableState::new(t.clone(), vs, ss)?, TableState::new(t, vm, sm)?))
}

impl Command for PhaseDiagramArgs {
    const NAME: &'static str = "phase-diagram";
    const SECTION: &'static str = "phase_diagram";
    const NEEDS_ENTROPY: bool = true;

    fn inputs(&self) -> Vec<PathBuf> {
        self.fusion_table.iter().cloned().collect()
    }

    fn run(&self, ctx: &Ctx) -> Result<String> {
        let tc = ctx.cp().t_c;
        let t_hi = positive("t_hi", self.t_hi.unwrap_or(0.98 * tc))?;
        let t_lo = positive("t_lo", self.t_lo.unwrap_or(0.6 * tc))?;
        ordered("t_lo", t_lo, t_hi)?;
        let step = positive("step", self.step.unwrap_or(0.0025 * tc))?;
        let f_t0 = positive(
            "fusion_t0",
            self.fusion_t0.ok_or_else(|| Error::invalid("fusion_t0", "required"))?,
        )?;
        let f_p0 = finite(
            "fusion_p0",
            self.fusion_p0.ok_or_else(|| Error::invalid("fusion_p0", "required"))?,
        )?;
        let f_end = positive(
            "fusion_t_end",
            self.fusion_t_end
                .ok_or_else(|| Error::invalid("fusion_t_end", "required"))?,
        )?;
        let merged_end = positive("merged_t_end", self.merged_t_end.unwrap_or(t_lo))?;
        let (solid, melt): (Box<dyn PhaseModel>, Box<dyn PhaseModel>) =
            match (&self.fusion_table, &self.solid, &self.melt) {
                (Some(path), _, _) => {
                    let (s, m) = read_fusion_table(path)?;
                    (Box::new(s), Box::new(m))
                }
                (None, Some(s), Some(m)) => (s.build()?, m.build()?),
                _ => {
                    return Err(Error::invalid(
                        "fusion_table",
                        "give a fusion table, or both `solid` and `melt` models in the config",
                    ))
                }
            };

        let eos = ctx.eos();
        let (liquid, gas) = fluid_branches(ctx);
        let vapor = propagate_shock(
            t_hi,
            maxwell_pressure(eos, t_hi)?.p_sat,
            &liquid,
            &gas,
            ("liquid", "gas"),
            t_lo,
            step,
        )?;
        let fusion = propagate_shock(
            f_t0,
            f_p0,
            solid.as_ref(),
            melt.as_ref(),
            ("solid", "liquid"),
            f_end,
            step,
        )?;
        let mut diagram = PhaseDiagram {
            curves: vec![vapor.clone(), fusion.clone()],
            triple_points: Vec::new(),
        };
        match confluence_event(
            &fusion,
            &vapor,
            solid.as_ref(),
            &gas,
            ("solid", "gas"),
            merged_end,
            step,
        ) {
            Ok(ev) => {
                diagram.curves.push(ev.outgoing.clone());
                diagram.triple_points.push(ev);
            }
            Err(Error::NoIntersection { .. }) => {}
            Err(e) => return Err(e),
        }
        ctx.json("diagram", serde_json::to_value(&diagram)?)
    }
}
