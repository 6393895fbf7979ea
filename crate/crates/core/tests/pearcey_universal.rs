use proptest::prelude::*;
use shockphase::eos::{EosSpec, VdwParams};
use shockphase::pearcey::{cubic_limit, pearcey, universal_volume, ScalingMap};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn profile_is_odd_in_x(x in -10.0f64..10.0, y in -10.0f64..10.0) {
        let a = pearcey(x, y).unwrap();
        let b = pearcey(-x, y).unwrap();
        prop_assert!((a.u + b.u).abs() <= 1e-12 * (1.0 + a.u.abs()));
        prop_assert!((a.lambda - b.lambda).abs() <= 1e-12 * a.lambda);
        prop_assert!(a.lambda > 0.0);
    }

    #[test]
    fn centre_line_is_zero(y in -20.0f64..20.0) {
        prop_assert!(pearcey(0.0, y).unwrap().u.abs() <= 1e-12);
    }

    #[test]
    fn profile_decreases_before_the_caustic(x in -10.0f64..10.0, y in -10.0f64..0.0) {
        let v = pearcey(x, y).unwrap();
        prop_assert!(v.du_dx < 0.0);
        prop_assert!(pearcey(x + 0.05, y).unwrap().u < v.u);
    }

    #[test]
    fn cubic_limit_solves_the_saddle_equation(x in 0.1f64..20.0, y in -20.0f64..20.0) {
        let z = cubic_limit(x, y).unwrap();
        prop_assert!((z * z * z - y * z + x).abs() <= 1e-10 * (1.0 + x.abs() + (y * z).abs()));
    }

    #[test]
    fn universal_volume_is_antisymmetric_in_temperature(d in 0.1f64..5.0) {
        let eos = EosSpec::Vdw(VdwParams::hydrogen());
        let map = ScalingMap::new(&eos, 1.0, 1e-6).unwrap();
        let cp = map.cp;
        let dt = d * map.lambda().powi(3) * map.gamma0 / map.alpha1.abs();
        let up = universal_volume(cp.p_c, cp.t_c + dt, &map).unwrap() - cp.v_c;
        let dn = universal_volume(cp.p_c, cp.t_c - dt, &map).unwrap() - cp.v_c;
        prop_assert!((up + dn).abs() <= 1e-12 * cp.v_c);
        prop_assert!(up != 0.0);
    }
}

#[test]
fn critical_point_maps_to_itself() {
    let eos = EosSpec::Vdw(VdwParams::hydrogen());
    let map = ScalingMap::new(&eos, 1.0, 1e-6).unwrap();
    assert_eq!(universal_volume(map.cp.p_c, map.cp.t_c, &map).unwrap(), map.cp.v_c);
}
