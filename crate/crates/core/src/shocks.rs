//! Phase boundaries as shock trajectories in the `(T, P)` plane.
//!
//! A boundary between two phases moves with the Rankine-Hugoniot speed
//! `dP/dT = (S_right - S_left) / (V_right - V_left)`. Two boundaries that
//! meet merge into a single one joining the outer states; the meeting
//! point is a triple point.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::coexistence::VolumeEntropySpec;
use crate::eos::EosSpec;
use crate::error::{Error, Result};
use crate::interp::MonotoneCubic;
use crate::roots;

/// Volume and entropy of one phase.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseState {
    pub v: f64,
    pub s: f64,
}

/// Rankine-Hugoniot speed `(S_r - S_l) / (V_r - V_l)`.
pub fn rh_speed(left: PhaseState, right: PhaseState) -> Result<f64> {
    let dv = right.v - left.v;
    if !(dv.abs() > 1e-14 * left.v.abs().max(right.v.abs())) {
        return Err(Error::DegenerateJump { v: left.v });
    }
    Ok((right.s - left.s) / dv)
}

/// A phase whose state is known near the boundaries of interest.
pub trait PhaseModel: Send + Sync {
    fn state(&self, p: f64, t: f64) -> Result<PhaseState>;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantState(pub PhaseState);

impl PhaseModel for ConstantState {
    fn state(&self, _p: f64, _t: f64) -> Result<PhaseState> {
        Ok(self.0)
    }
}

/// First-order expansion about `(p0, t0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearState {
    pub p0: f64,
    pub t0: f64,
    pub v0: f64,
    pub s0: f64,
    pub dv_dp: f64,
    pub dv_dt: f64,
    pub ds_dp: f64,
    pub ds_dt: f64,
}

impl PhaseModel for LinearState {
    fn state(&self, p: f64, t: f64) -> Result<PhaseState> {
        let (dp, dt) = (p - self.p0, t - self.t0);
        Ok(PhaseState {
            v: self.v0 + self.dv_dp * dp + self.dv_dt * dt,
            s: self.s0 + self.ds_dp * dp + self.ds_dt * dt,
        })
    }
}

/// States tabulated against temperature along a boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct TableState {
    v: MonotoneCubic,
    s: MonotoneCubic,
}

impl TableState {
    pub fn new(t: Vec<f64>, v: Vec<f64>, s: Vec<f64>) -> Result<Self> {
        if t.len() < 4 {
            return Err(Error::invalid("table", "at least 4 rows"));
        }
        Ok(Self {
            v: MonotoneCubic::new(t.clone(), v)?,
            s: MonotoneCubic::new(t, s)?,
        })
    }
}

impl PhaseModel for TableState {
    fn state(&self, p: f64, t: f64) -> Result<PhaseState> {
        let (lo, hi) = self.v.domain();
        if !(t >= lo && t <= hi) {
            return Err(Error::StateEvaluation {
                p,
                t,
                reason: format!("T outside table range [{lo}, {hi}]"),
            });
        }
        Ok(PhaseState {
            v: self.v.eval(t).0,
            s: self.s.eval(t).0,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Liquid,
    Gas,
}

/// Outer branch of a fluid equation of state: the smallest (liquid) or
/// largest (gas) root of the isotherm, entropy `S0(V)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FluidBranch {
    pub eos: EosSpec,
    pub entropy: VolumeEntropySpec,
    pub branch: Branch,
}

impl PhaseModel for FluidBranch {
    fn state(&self, p: f64, t: f64) -> Result<PhaseState> {
        let roots = self.eos.solve_volumes(p, t).map_err(|e| Error::StateEvaluation {
            p,
            t,
            reason: e.to_string(),
        })?;
        if roots.len() < 3 {
            return Err(Error::StateEvaluation {
                p,
                t,
                reason: format!("{} volume root(s); the outer branches are not separated", roots.len()),
            });
        }
        let v = match self.branch {
            Branch::Liquid => roots[0],
            Branch::Gas => roots[roots.len() - 1],
        };
        Ok(PhaseState {
            v,
            s: self.entropy.s0(v),
        })
    }
}

/// Serializable description of a phase model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PhaseModelSpec {
    Constant { v: f64, s: f64 },
    Linear(LinearState),
    Table { t: Vec<f64>, v: Vec<f64>, s: Vec<f64> },
}

impl PhaseModelSpec {
    pub fn build(&self) -> Result<Box<dyn PhaseModel>> {
        Ok(match self {
            PhaseModelSpec::Constant { v, s } => Box::new(ConstantState(PhaseState { v: *v, s: *s })),
            PhaseModelSpec::Linear(l) => Box::new(*l),
            PhaseModelSpec::Table { t, v, s } => Box::new(TableState::new(t.clone(), v.clone(), s.clone())?),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub t: f64,
    pub p: f64,
    /// `dP/dT` at the point.
    pub speed: f64,
}

/// A boundary as a polyline in `T`, with the labels of its flanking phases.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShockTrajectory {
    pub left: String,
    pub right: String,
    pub points: Vec<TrajectoryPoint>,
}

impl ShockTrajectory {
    pub fn t_range(&self) -> (f64, f64) {
        let a = self.points[0].t;
        let b = self.points[self.points.len() - 1].t;
        (a.min(b), a.max(b))
    }

    /// `+1` if the trajectory was traced towards higher `T`.
    fn direction(&self) -> f64 {
        (self.points[self.points.len() - 1].t - self.points[0].t).signum()
    }

    /// Cubic Hermite interpolation of `P` and `dP/dT` at `t`.
    pub fn p_at(&self, t: f64) -> Option<(f64, f64)> {
        let (lo, hi) = self.t_range();
        if !(t >= lo && t <= hi) {
            return None;
        }
        let pts = &self.points;
        let k = (0..pts.len() - 1)
            .find(|&k| (pts[k].t - t) * (pts[k + 1].t - t) <= 0.0)
            .unwrap_or(pts.len() - 2);
        let (a, b) = (pts[k], pts[k + 1]);
        let h = b.t - a.t;
        let s = (t - a.t) / h;
        let h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
        let h10 = s * (1.0 - s) * (1.0 - s);
        let h01 = s * s * (3.0 - 2.0 * s);
        let h11 = s * s * (s - 1.0);
        let p = h00 * a.p + h10 * h * a.speed + h01 * b.p + h11 * h * b.speed;
        let dh00 = 6.0 * s * (s - 1.0);
        let dh10 = (1.0 - s) * (1.0 - 3.0 * s);
        let dh11 = s * (3.0 * s - 2.0);
        let dp = (dh00 * a.p - dh00 * b.p) / h + dh10 * a.speed + dh11 * b.speed;
        Some((p, dp))
    }

    /// CSV with columns `T,P,speed`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "T,P,speed")?;
        for q in &self.points {
            writeln!(w, "{:e},{:e},{:e}", q.t, q.p, q.speed)?;
        }
        Ok(())
    }
}

fn speed_at(left: &dyn PhaseModel, right: &dyn PhaseModel, p: f64, t: f64) -> Result<f64> {
    let l = left.state(p, t)?;
    let r = right.state(p, t)?;
    rh_speed(l, r)
}

/// Integrate `dP/dT = ΔS/ΔV` with classical RK4 from `(t0, p0)` to `t_end`
/// using uniform steps no longer than `step`.
#[allow(clippy::too_many_arguments)]
pub fn propagate_shock(
    t0: f64,
    p0: f64,
    left: &dyn PhaseModel,
    right: &dyn PhaseModel,
    labels: (&str, &str),
    t_end: f64,
    step: f64,
) -> Result<ShockTrajectory> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::invalid("step", "must be positive"));
    }
    if !(t0.is_finite() && p0.is_finite() && t_end.is_finite()) {
        return Err(Error::invalid("t0/p0/t_end", "must be finite"));
    }
    let n = ((t_end - t0).abs() / step).ceil().max(1.0) as usize;
    let h = (t_end - t0) / n as f64;
    let f = |t: f64, p: f64| speed_at(left, right, p, t);
    let mut points = Vec::with_capacity(n + 1);
    let (mut t, mut p) = (t0, p0);
    let mut k1 = f(t, p)?;
    points.push(TrajectoryPoint { t, p, speed: k1 });
    for i in 0..n {
        let k2 = f(t + 0.5 * h, p + 0.5 * h * k1)?;
        let k3 = f(t + 0.5 * h, p + 0.5 * h * k2)?;
        let k4 = f(t + h, p + h * k3)?;
        p += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        t = t0 + (i + 1) as f64 * h;
        k1 = f(t, p)?;
        points.push(TrajectoryPoint { t, p, speed: k1 });
    }
    Ok(ShockTrajectory {
        left: labels.0.to_string(),
        right: labels.1.to_string(),
        points,
    })
}

/// Where two trajectories cross.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Intersection {
    pub t: f64,
    pub p: f64,
    /// Slopes of the two trajectories at the crossing, in argument order.
    pub speeds: [f64; 2],
}

/// First crossing of two trajectories on their common `T` range. "First"
/// follows the common tracing direction, or increasing `T` when the two
/// were traced in opposite directions, so the result does not depend on
/// argument order.
pub fn detect_confluence(a: &ShockTrajectory, b: &ShockTrajectory) -> Result<Intersection> {
    let (alo, ahi) = a.t_range();
    let (blo, bhi) = b.t_range();
    let (lo, hi) = (alo.max(blo), ahi.min(bhi));
    if !(lo < hi) {
        return Err(Error::NoIntersection { t_lo: lo, t_hi: hi });
    }
    let mut nodes: Vec<f64> = a
        .points
        .iter()
        .chain(&b.points)
        .map(|q| q.t)
        .filter(|&t| t > lo && t < hi)
        .chain([lo, hi])
        .collect();
    nodes.sort_by(f64::total_cmp);
    nodes.dedup();
    if a.direction() == b.direction() && a.direction() < 0.0 {
        nodes.reverse();
    }
    let diff = |t: f64| -> f64 {
        let pa = a.p_at(t).map(|x| x.0).unwrap_or(f64::NAN);
        let pb = b.p_at(t).map(|x| x.0).unwrap_or(f64::NAN);
        pa - pb
    };
    let scale = a
        .points
        .iter()
        .chain(&b.points)
        .fold(0.0f64, |m, q| m.max(q.p.abs()))
        .max(f64::MIN_POSITIVE);
    let touch = 1e-12 * scale;
    let vals: Vec<f64> = nodes.iter().map(|&t| diff(t)).collect();
    let crossing = |i: usize, j: usize| -> Result<Intersection> {
        let (t0, t1) = (nodes[i], nodes[j]);
        let root = if vals[i] == 0.0 {
            t0
        } else if vals[j] == 0.0 {
            t1
        } else {
            roots::brent(diff, t0.min(t1), t0.max(t1), 1e-15 * (1.0 + t1.abs()))?
        };
        let (pa, sa) = a.p_at(root).expect("root inside common range");
        let (_, sb) = b.p_at(root).expect("root inside common range");
        if (sa - sb).abs() <= 1e-12 * sa.abs().max(sb.abs()) {
            return Err(Error::DegenerateConfluence { t: root });
        }
        Ok(Intersection {
            t: root,
            p: pa,
            speeds: [sa, sb],
        })
    };
    if vals[0] == 0.0 {
        return crossing(0, 0);
    }
    for k in 1..nodes.len() {
        let (prev, d) = (vals[k - 1], vals[k]);
        if d == 0.0 || prev * d < 0.0 {
            return crossing(k - 1, k);
        }
        if d.abs() <= touch {
            // a near-zero node: a crossing if the sign flips across it
            match vals.get(k + 1) {
                Some(&next) if prev * next < 0.0 => return crossing(k - 1, k + 1),
                _ => return Err(Error::DegenerateConfluence { t: nodes[k] }),
            }
        }
    }
    Err(Error::NoIntersection { t_lo: lo, t_hi: hi })
}

/// A triple point and the single boundary leaving it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfluenceEvent {
    pub t_triple: f64,
    pub p_triple: f64,
    /// Slopes of the incoming boundaries at the event.
    pub incoming_speeds: [f64; 2],
    /// RH speed of the outer states at the event.
    pub outgoing_speed: f64,
    pub outgoing: ShockTrajectory,
}

/// Detect the crossing of `a` and `b` and trace the merged boundary
/// between the outer states up to `t_end`.
#[allow(clippy::too_many_arguments)]
pub fn confluence_event(
    a: &ShockTrajectory,
    b: &ShockTrajectory,
    outer_left: &dyn PhaseModel,
    outer_right: &dyn PhaseModel,
    labels: (&str, &str),
    t_end: f64,
    step: f64,
) -> Result<ConfluenceEvent> {
    let hit = detect_confluence(a, b)?;
    let outgoing_speed = speed_at(outer_left, outer_right, hit.p, hit.t)?;
    let outgoing = propagate_shock(hit.t, hit.p, outer_left, outer_right, labels, t_end, step)?;
    Ok(ConfluenceEvent {
        t_triple: hit.t,
        p_triple: hit.p,
        incoming_speeds: hit.speeds,
        outgoing_speed,
        outgoing,
    })
}

/// Curves and triple points for export.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseDiagram {
    pub curves: Vec<ShockTrajectory>,
    pub triple_points: Vec<ConfluenceEvent>,
}

impl PhaseDiagram {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coexistence::{clapeyron_speed, maxwell_pressure};
    use crate::eos::VdwParams;
    use proptest::prelude::*;

    fn st(v: f64, s: f64) -> PhaseState {
        PhaseState { v, s }
    }

    fn line(u: f64, t0: f64, p0: f64, t_end: f64, labels: (&str, &str)) -> ShockTrajectory {
        // states with S jump u for unit volume jump
        let l = ConstantState(st(1.0, 0.0));
        let r = ConstantState(st(2.0, u));
        propagate_shock(t0, p0, &l, &r, labels, t_end, 0.1).unwrap()
    }

    #[test]
    fn equal_volumes_are_degenerate() {
        assert!(matches!(
            rh_speed(st(1.0, 1.0), st(1.0, 2.0)),
            Err(Error::DegenerateJump { .. })
        ));
    }

    #[test]
    fn constant_states_give_straight_lines() {
        let tr = line(2.5, 1.0, 3.0, 4.0, ("a", "b"));
        for q in &tr.points {
            assert!((q.p - (3.0 + 2.5 * (q.t - 1.0))).abs() < 1e-12);
        }
    }

    #[test]
    fn matches_clapeyron_on_saturation_states() {
        let eos = EosSpec::Vdw(VdwParams::reduced());
        let s = VolumeEntropySpec::vdw(&VdwParams::reduced());
        let sp = maxwell_pressure(&eos, 0.9).unwrap();
        let u = rh_speed(st(sp.v_l, s.s0(sp.v_l)), st(sp.v_g, s.s0(sp.v_g))).unwrap();
        assert!((u - clapeyron_speed(&sp, &s).unwrap()).abs() < 1e-12 * u.abs());
    }

    #[test]
    fn linear_geometry_intersection() {
        // slope 2 from (0, 0) catches slope 1 from (0, 1) at T = 1
        let a = line(2.0, 0.0, 0.0, 3.0, ("s", "l"));
        let b = line(1.0, 0.0, 1.0, 3.0, ("l", "g"));
        let hit = detect_confluence(&a, &b).unwrap();
        assert!((hit.t - 1.0).abs() < 1e-12 && (hit.p - 2.0).abs() < 1e-12);
        assert_eq!(hit.speeds, [2.0, 1.0]);
        let apart = line(1.0, 0.0, 1.0, 3.0, ("l", "g"));
        let below = line(0.5, 0.0, 0.0, 3.0, ("s", "l"));
        assert!(matches!(
            detect_confluence(&apart, &below),
            Err(Error::NoIntersection { .. })
        ));
    }

    #[test]
    fn tangent_contact_is_degenerate() {
        let a = line(1.0, 0.0, 0.0, 2.0, ("a", "b"));
        let b = line(1.0, 0.0, 0.0, 2.0, ("b", "c"));
        assert!(detect_confluence(&a, &b).is_err());
    }

    #[test]
    fn merged_jump_telescopes() {
        let (s, l, g) = (st(0.4, 0.1), st(0.6, 0.9), st(3.0, 2.5));
        let u3 = rh_speed(s, g).unwrap();
        let u1 = rh_speed(s, l).unwrap();
        let u2 = rh_speed(l, g).unwrap();
        let (dv1, dv2) = (l.v - s.v, g.v - l.v);
        assert!(((g.v - s.v) - (dv1 + dv2)).abs() < 1e-15);
        // the outgoing speed is the volume-weighted mean of the incoming ones
        assert!((u3 - (u1 * dv1 + u2 * dv2) / (dv1 + dv2)).abs() < 1e-12);
    }

    #[test]
    fn table_state_interpolates() {
        let t: Vec<f64> = (0..6).map(|i| i as f64).collect();
        let v: Vec<f64> = t.iter().map(|x| 1.0 + 0.1 * x).collect();
        let s: Vec<f64> = t.iter().map(|x| 2.0 - 0.2 * x).collect();
        let tab = TableState::new(t, v, s).unwrap();
        let q = tab.state(0.0, 2.5).unwrap();
        assert!((q.v - 1.25).abs() < 1e-12 && (q.s - 1.5).abs() < 1e-12);
        assert!(matches!(tab.state(0.0, 7.0), Err(Error::StateEvaluation { .. })));
    }

    #[test]
    fn phase_model_spec_round_trip() {
        let spec = PhaseModelSpec::Constant { v: 0.4, s: -1.0 };
        let js = serde_json::to_string(&spec).unwrap();
        assert_eq!(js, r#"{"kind":"constant","v":0.4,"s":-1.0}"#);
        let back: PhaseModelSpec = serde_json::from_str(&js).unwrap();
        assert_eq!(back.build().unwrap().state(1.0, 1.0).unwrap(), st(0.4, -1.0));
    }

    proptest! {
        #[test]
        fn rh_speed_is_swap_invariant(v1 in 0.1f64..5.0, v2 in 0.1f64..5.0, s1 in -3.0f64..3.0, s2 in -3.0f64..3.0) {
            prop_assume!((v1 - v2).abs() > 1e-6);
            let a = rh_speed(st(v1, s1), st(v2, s2)).unwrap();
            let b = rh_speed(st(v2, s2), st(v1, s1)).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
        }

        #[test]
        fn confluence_is_order_independent(u1 in 1.5f64..4.0, u2 in -1.0f64..1.0, off in 0.2f64..2.0) {
            let a = line(u1, 0.0, 0.0, 4.0, ("s", "l"));
            let b = line(u2, 0.0, off, 4.0, ("l", "g"));
            let x = detect_confluence(&a, &b).unwrap();
            let y = detect_confluence(&b, &a).unwrap();
            prop_assert_eq!(x.t, y.t);
            prop_assert!((x.t - off / (u1 - u2)).abs() < 1e-12);
        }
    }
}
