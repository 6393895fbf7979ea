use proptest::prelude::*;
use shockphase::analysis::fit_power_law;
use shockphase::coexistence::{
    clapeyron_speed, coexistence_curve, equal_area_residual, gibbs_difference, maxwell_pressure, VolumeEntropySpec,
};
use shockphase::eos::{EosSpec, VdwParams};

fn reduced() -> EosSpec {
    EosSpec::Vdw(VdwParams::reduced())
}

#[test]
fn volume_jump_closes_with_square_root() {
    let eos = reduced();
    let eps: Vec<f64> = (0..8).map(|k| 10f64.powf(-5.0 + 3.0 * k as f64 / 7.0)).collect();
    let dv: Vec<f64> = eps
        .iter()
        .map(|e| maxwell_pressure(&eos, 1.0 - e).unwrap().delta_v)
        .collect();
    let fit = fit_power_law("beta", &eps, &dv, 1.0).unwrap();
    assert!((fit.value - 0.5).abs() < 0.01, "{fit:?}");
    // leading coefficient of the reduced vdW cubic: dV = 4 sqrt(eps)
    assert!((dv[0] / eps[0].sqrt() - 4.0).abs() < 1e-2);
}

#[test]
fn clapeyron_slope_has_a_finite_limit_at_the_critical_point() {
    let eos = reduced();
    let s = VolumeEntropySpec::vdw(&VdwParams::reduced());
    let u: Vec<f64> = [1e-2, 1e-3, 1e-4, 1e-5]
        .iter()
        .map(|e| clapeyron_speed(&maxwell_pressure(&eos, 1.0 - e).unwrap(), &s).unwrap())
        .collect();
    for w in u.windows(3) {
        assert!((w[2] - w[1]).abs() < (w[1] - w[0]).abs());
    }
    // the critical isochore slope of the reduced vdW law
    assert!((u[3] - 4.0).abs() < 1e-3, "{u:?}");
}

#[test]
fn latent_heat_is_positive_along_the_curve() {
    let c = coexistence_curve(&reduced(), 0.5, 0.98, 25).unwrap();
    assert!(c.points.iter().all(|p| p.latent_heat > 0.0 && p.v_l < p.v_g));
}

#[test]
fn saturation_pressure_does_not_depend_on_units() {
    let si = EosSpec::Vdw(VdwParams::hydrogen());
    let cp = si.critical_point().unwrap();
    for tr in [0.6, 0.8, 0.95] {
        let a = maxwell_pressure(&si, tr * cp.t_c).unwrap();
        let b = maxwell_pressure(&reduced(), tr).unwrap();
        assert!((a.p_sat / cp.p_c - b.p_sat).abs() < 1e-8 * b.p_sat, "T_r = {tr}");
        assert!((a.v_g / cp.v_c - b.v_g).abs() < 1e-8 * b.v_g);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn equal_areas_and_equal_gibbs_agree(t in 0.5f64..0.98) {
        let eos = reduced();
        let sp = maxwell_pressure(&eos, t).unwrap();
        prop_assert!(equal_area_residual(&eos, sp.p_sat, t).unwrap().abs() <= 1e-10);
        prop_assert!(gibbs_difference(&eos, sp.p_sat, t).unwrap().abs() <= 1e-9);
        let roots = eos.solve_volumes(sp.p_sat, t).unwrap();
        prop_assert_eq!(roots.len(), 3);
    }

    #[test]
    fn clapeyron_equals_rankine_hugoniot(t in 0.5f64..0.98) {
        let eos = reduced();
        let s = VolumeEntropySpec::vdw(&VdwParams::reduced());
        let u = clapeyron_speed(&maxwell_pressure(&eos, t).unwrap(), &s).unwrap();
        let h = 1e-4;
        let dp = (maxwell_pressure(&eos, t + h).unwrap().p_sat - maxwell_pressure(&eos, t - h).unwrap().p_sat) / (2.0 * h);
        prop_assert!(((u - dp) / dp).abs() <= 1e-4);
    }
}
