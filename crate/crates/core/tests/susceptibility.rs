use fracsus::maps::make_tent_fixed_slope;
use fracsus::marchaud::{MarchaudKernel, MarchaudSide};
use fracsus::observable::Observable;
use fracsus::response::conjugacy_derivative;
use fracsus::susceptibility::{
    classical_lrf, classical_susceptibility, frozen_via_resolvent, retce_value, series_evaluate,
    susceptibility_series, EngineConfig, Propagation, SeriesNodes, Variant,
};
use num_complex::Complex64;
use proptest::prelude::*;

fn small() -> EngineConfig {
    EngineConfig {
        panels: 24,
        k_max: 6,
        ..Default::default()
    }
}

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(4))]

    #[test]
    fn every_variant_is_linear_in_phi(a in -2.0f64..2.0, b in -2.0f64..2.0, frozen in prop::bool::ANY) {
        let fam = make_tent_fixed_slope(1.8, 0.05, 0.01).unwrap();
        let k = MarchaudKernel::truncated_real(0.5, fam.eps1()).unwrap();
        let v = if frozen { Variant::Frozen } else { Variant::Full };
        let s = |phi: &Observable| susceptibility_series(&fam, phi, &k, v, &small()).unwrap();
        let (sx, sq) = (s(&Observable::identity()), s(&Observable::square()));
        let mix = s(&Observable::Polynomial(vec![0.0, a, b]));
        for i in 0..=6 {
            let want = sx.coeffs[i] * a + sq.coeffs[i] * b;
            prop_assert!((mix.coeffs[i] - want).norm() <= 1e-10 * (1.0 + want.norm()) + mix.errors[i]);
        }
    }
}

#[test]
fn full_and_frozen_share_the_first_coefficient() {
    let fam = make_tent_fixed_slope(1.8, 0.05, 0.01).unwrap();
    let k = MarchaudKernel::truncated_real(0.3, fam.eps1()).unwrap();
    let phi = Observable::sin_pi();
    let full = susceptibility_series(&fam, &phi, &k, Variant::Full, &small()).unwrap();
    let frozen = susceptibility_series(&fam, &phi, &k, Variant::Frozen, &small()).unwrap();
    assert_eq!(full.coeffs[0], frozen.coeffs[0]);
}

#[test]
fn partial_sums_agree_with_the_resummed_value_inside_the_disc() {
    let fam = make_tent_fixed_slope(1.8, 0.05, 0.01).unwrap();
    let k = MarchaudKernel::truncated_real(0.5, fam.eps1()).unwrap();
    let z = c(0.5);
    let nodes = SeriesNodes::build(&fam, &Observable::identity(), Propagation::Full, &EngineConfig::default(), &[z])
        .unwrap();
    let s = nodes.series(&k, MarchaudSide::TwoSided).unwrap();
    let (v, e) = nodes.resummed(&k, MarchaudSide::TwoSided).unwrap()[0];
    let p = series_evaluate(&s, z);
    assert!((p.value - v).norm() <= p.tail_bound + e + 1e-12, "{:?} vs {v}", p);
}

#[test]
fn frozen_resolvent_inside_the_disc() {
    let fam = make_tent_fixed_slope(1.8, 0.05, 0.01).unwrap();
    let k = MarchaudKernel::truncated_real(0.5, fam.eps1()).unwrap();
    let fr = frozen_via_resolvent(&fam, &Observable::identity(), &k, c(0.5), 400, &EngineConfig::default()).unwrap();
    assert!((fr.value - fr.series_sum).norm() < 1e-10);
}

#[test]
fn classical_forms_and_the_conjugacy_derivative_agree() {
    let fam = make_tent_fixed_slope(1.8, 0.05, 0.01).unwrap();
    for phi in [Observable::identity(), Observable::square()] {
        let fdt = classical_susceptibility(&fam, &phi, c(1.0), 60).unwrap().value.re;
        let conj = conjugacy_derivative(&fam, &phi).unwrap();
        assert!((fdt - conj).abs() < 1e-12, "{fdt} vs {conj}");
        if let Observable::Polynomial(ref p) = phi {
            if p.len() == 2 {
                let re = retce_value(&fam, &phi, 60, 200).unwrap().value;
                assert!((re - conj).abs() < 1e-12);
            }
        }
        // integration by parts inside the disc |z| < 1/slope
        let z = c(0.5);
        let a = classical_susceptibility(&fam, &phi, z, 60).unwrap().value;
        let b = classical_lrf(&fam, &phi, z, 60, 1e-15, 500).unwrap().value;
        assert!((a - b).norm() < 1e-12, "{a} vs {b}");
    }
}
