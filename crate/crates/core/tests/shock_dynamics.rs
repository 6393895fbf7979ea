use shockphase::coexistence::{maxwell_pressure, VolumeEntropySpec};
use shockphase::eos::{EosSpec, VdwParams};
use shockphase::shocks::{
    confluence_event, detect_confluence, propagate_shock, rh_speed, Branch, ConstantState, FluidBranch, PhaseModel,
    PhaseState,
};
use shockphase::viscous::{burgers_evolve, crossing, find_fronts, linspace, merge_height};

fn vapor_branch() -> (FluidBranch, FluidBranch) {
    let p = VdwParams::reduced();
    let eos = EosSpec::Vdw(p);
    let s = VolumeEntropySpec::vdw(&p);
    let liquid = FluidBranch {
        eos: eos.clone(),
        entropy: s.clone(),
        branch: Branch::Liquid,
    };
    let gas = FluidBranch {
        eos,
        entropy: s,
        branch: Branch::Gas,
    };
    (liquid, gas)
}

fn max_vapor_error(step: f64, t0: f64, t1: f64) -> f64 {
    let eos = EosSpec::Vdw(VdwParams::reduced());
    let (liq, gas) = vapor_branch();
    let p0 = maxwell_pressure(&eos, t0).unwrap().p_sat;
    let tr = propagate_shock(t0, p0, &liq, &gas, ("liquid", "gas"), t1, step).unwrap();
    tr.points
        .iter()
        .map(|q| (q.p - maxwell_pressure(&eos, q.t).unwrap().p_sat).abs())
        .fold(0.0, f64::max)
}

#[test]
fn vapor_trajectory_overlays_maxwell_curve() {
    let err = max_vapor_error(0.0025, 0.98, 0.6);
    assert!(err <= 1e-5, "max deviation {err}");
}

#[test]
fn halving_the_step_cuts_the_error_sixteenfold() {
    // start away from T_c where the slope varies slowly
    let coarse = max_vapor_error(0.05, 0.9, 0.5);
    let fine = max_vapor_error(0.025, 0.9, 0.5);
    let ratio = coarse / fine;
    assert!((12.0..=20.0).contains(&ratio), "ratio {ratio} ({coarse:e} / {fine:e})");
}

#[test]
fn two_jumps_merge_into_one_moving_at_the_outer_mean() {
    // jumps 3 -> 1 at 0 (speed 2) and 1 -> -1 at 20 (speed 0) meet near Y = 10
    let x = linspace(-220.0, 220.0, 11001);
    let u0: Vec<f64> = x
        .iter()
        .map(|&v| {
            if v < 0.0 {
                3.0
            } else if v < 20.0 {
                1.0
            } else {
                -1.0
            }
        })
        .collect();
    let ys: Vec<f64> = (1..=40).map(|k| k as f64).collect();
    let f = burgers_evolve(&x, &u0, &ys, 0.0, 70.0).unwrap();
    assert_eq!(find_fronts(&f.x, &f.u[0], 0.2, 25).len(), 2);
    let y_merge = merge_height(&f, 0.2, 25).unwrap();
    assert!(y_merge > 5.0 && y_merge < 15.0, "merge at {y_merge}");
    let last = f.u.len() - 1;
    let fronts = find_fronts(&f.x, &f.u[last], 0.2, 400);
    assert_eq!(fronts.len(), 1);
    assert!((fronts[0].u_left - 3.0).abs() < 1e-6 && (fronts[0].u_right + 1.0).abs() < 1e-6);
    let a = crossing(&f.x, &f.u[last - 10], 1.0).unwrap();
    let b = crossing(&f.x, &f.u[last], 1.0).unwrap();
    let speed = (b - a) / (f.y[last] - f.y[last - 10]);
    let rh = rh_speed(PhaseState { v: 3.0, s: 4.5 }, PhaseState { v: -1.0, s: 0.5 }).unwrap();
    assert!((speed - rh).abs() <= 1e-3, "speed {speed} vs {rh}");
}

#[test]
fn vapor_and_fusion_meet_at_a_triple_point() {
    let eos = EosSpec::Vdw(VdwParams::reduced());
    let (liq, gas) = vapor_branch();
    let vapor = propagate_shock(
        0.98,
        maxwell_pressure(&eos, 0.98).unwrap().p_sat,
        &liq,
        &gas,
        ("liquid", "gas"),
        0.6,
        0.0025,
    )
    .unwrap();
    // synthetic fusion line, slope 20, through the vapor curve at T = 0.8
    let sat = maxwell_pressure(&eos, 0.8).unwrap();
    let s_l = VolumeEntropySpec::vdw(&VdwParams::reduced()).s0(sat.v_l);
    let solid = ConstantState(PhaseState { v: 0.5, s: s_l - 2.0 });
    let melt = ConstantState(PhaseState { v: 0.6, s: s_l });
    let fusion = propagate_shock(
        0.9,
        sat.p_sat + 20.0 * 0.1,
        &solid,
        &melt,
        ("solid", "liquid"),
        0.7,
        0.005,
    )
    .unwrap();

    let ev = confluence_event(&fusion, &vapor, &solid, &gas, ("solid", "gas"), 0.65, 0.0025).unwrap();
    assert!((ev.t_triple - 0.8).abs() < 1e-3, "T* = {}", ev.t_triple);
    let g = gas.state(ev.p_triple, ev.t_triple).unwrap();
    let s = solid.state(ev.p_triple, ev.t_triple).unwrap();
    let direct = (g.s - s.s) / (g.v - s.v);
    assert!((ev.outgoing_speed - direct).abs() <= 1e-6 * direct.abs());
    assert!((ev.outgoing.points[0].speed - direct).abs() <= 1e-6 * direct.abs());
    assert!((ev.outgoing.points[0].p - ev.p_triple).abs() < 1e-15);
    let (u1, u2) = (ev.incoming_speeds[0], ev.incoming_speeds[1]);
    assert!(u2 < u1);

    let swapped = detect_confluence(&vapor, &fusion).unwrap();
    assert!((swapped.t - ev.t_triple).abs() < 1e-12 && (swapped.p - ev.p_triple).abs() < 1e-12);
}

#[test]
fn outer_jump_telescopes_at_merge() {
    let st = |v, s| PhaseState { v, s };
    let (a, b, c) = (st(0.5, 0.1), st(0.9, 1.3), st(4.0, 3.0));
    let (u1, u2, u3) = (
        rh_speed(a, b).unwrap(),
        rh_speed(b, c).unwrap(),
        rh_speed(a, c).unwrap(),
    );
    let (dv1, dv2) = (b.v - a.v, c.v - b.v);
    assert!(((dv1 * u1 + dv2 * u2) / (dv1 + dv2) - u3).abs() < 1e-14);
    assert!(u3 > u2.min(u1) && u3 < u2.max(u1));
}
