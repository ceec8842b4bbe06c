use fracsus::cohomology::{alpha_solve, horizontality_index_map, magic_identity_residual, tce_residual};
use fracsus::maps::{critical_orbit, make_tent_fixed_slope, make_tent_varying_slope};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn alpha_is_the_conjugacy_field(x in -1.0f64..1.0) {
        let fam = make_tent_fixed_slope(1.8, 0.05, 0.01).unwrap();
        let a = alpha_solve(&fam, x, 80);
        prop_assume!(a.is_ok());
        prop_assert!((a.unwrap().value - x / (1.8 - 1.0 + 0.05)).abs() < 1e-8);
    }

    #[test]
    fn twisted_equation_holds(x in -1.0f64..1.0) {
        let fam = make_tent_varying_slope(1.8, 0.1).unwrap();
        let v = fam.v0_fn();
        let r = tce_residual(fam.base(), &|y| v(y), x, 80);
        prop_assume!(r.is_ok());
        prop_assert!(r.unwrap().abs() < 1e-8);
    }

    #[test]
    fn index_is_linear_in_the_field(a in -3.0f64..3.0) {
        let fam = make_tent_varying_slope(1.8, 0.1).unwrap();
        let o = critical_orbit(fam.base(), 61).unwrap();
        let v = fam.v0_fn();
        let h1 = horizontality_index_map(fam.base(), &|y| v(y), &o, 60).value;
        let h2 = horizontality_index_map(fam.base(), &|y| a * v(y), &o, 60).value;
        prop_assert!((h2 - a * h1).abs() < 1e-13 * (1.0 + h1.abs()));
    }
}

#[test]
fn magic_identity_up_to_depth_ten() {
    let fam = make_tent_fixed_slope(1.8, 0.05, 0.01).unwrap();
    let o = critical_orbit(fam.base(), 80).unwrap();
    for j in 1..=10 {
        assert!(magic_identity_residual(fam.base(), &o, &|_| 1.0, 1.0, j, 60).unwrap().abs() < 1e-8);
    }
    // without horizontality the residual does not vanish
    let v = make_tent_varying_slope(1.8, 0.1).unwrap();
    let ov = critical_orbit(v.base(), 80).unwrap();
    let x0 = v.x0().unwrap();
    let worst = (1..=10)
        .map(|j| magic_identity_residual(v.base(), &ov, &|y| x0(y), 1.0, j, 60).unwrap().abs())
        .fold(0.0, f64::max);
    println!("varying-slope magic identity residual (j <= 10): {worst:.3e}");
    assert!(worst > 1e-3);
}
