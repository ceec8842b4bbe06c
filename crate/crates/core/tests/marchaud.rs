use fracsus::marchaud::{
    gamma_factor_real, heaviside_truncated_kernel_closed, kernel_power_log, marchaud_fn, MarchaudKernel,
    MarchaudOptions, MarchaudSide, TailModel,
};
use proptest::prelude::*;
use statrs::function::gamma::gamma;

fn bounded(b: f64) -> MarchaudOptions {
    MarchaudOptions {
        upper: 2000.0,
        tail: TailModel::Bounded(b),
        ..Default::default()
    }
}

#[test]
fn tanh_approaches_its_derivative() {
    let dev: Vec<f64> = [0.9, 0.95, 0.99]
        .iter()
        .map(|&eta| {
            let k = MarchaudKernel::full_real(eta).unwrap();
            (marchaud_fn(f64::tanh, 0.0, &k, MarchaudSide::TwoSided, &bounded(1.0)).unwrap().re() - 1.0).abs()
        })
        .collect();
    assert!(dev[0] > dev[1] && dev[1] > dev[2], "{dev:?}");
    assert!(dev[2] < 0.05);
}

#[test]
fn clamped_linear_against_elementary_integral() {
    let (a, e) = (0.7, 0.01);
    for eta in [0.2, 0.5, 0.8] {
        let k = MarchaudKernel::full_real(eta).unwrap();
        let opts = MarchaudOptions {
            hints: vec![e],
            ..Default::default()
        };
        let v = marchaud_fn(|t| a * t.clamp(-e, e), 0.0, &k, MarchaudSide::TwoSided, &opts).unwrap().re();
        let oracle = a * e.powf(1.0 - eta) / gamma(2.0 - eta);
        assert!(((v - oracle) / oracle).abs() < 1e-8, "{eta}: {v} vs {oracle}");
    }
}

#[test]
fn normalization_constant() {
    for eta in [0.1, 0.5, 0.9] {
        let g = gamma_factor_real(eta).unwrap();
        assert!((g - eta / gamma(1.0 - eta)).abs() < 1e-13);
    }
    assert!(gamma_factor_real(1.0).is_err());
    assert!(gamma_factor_real(0.0).is_err());
}

#[test]
fn truncated_kernel_on_heaviside() {
    let (eta, e, u) = (0.5, 0.01, 0.2);
    let k = MarchaudKernel::truncated_real(eta, e).unwrap();
    for y in [0.203f64, 0.197, 0.2095] {
        let opts = MarchaudOptions {
            hints: vec![(y - u).abs()],
            ..Default::default()
        };
        let v = marchaud_fn(|t| if y > u + t { 1.0 } else { 0.0 }, 0.0, &k, MarchaudSide::TwoSided, &opts)
            .unwrap()
            .re();
        let d: f64 = (y - u).abs();
        let oracle = -(d.powf(-eta) - e.powf(-eta)) / (2.0 * gamma(1.0 - eta));
        assert!(((v - oracle) / oracle).abs() < 1e-8);
        assert!((heaviside_truncated_kernel_closed(y, u, eta, e).unwrap() - oracle).abs() < 1e-12 * oracle.abs());
    }
}

#[test]
fn power_log_kernel_is_finite_in_the_keller_regime() {
    let k = kernel_power_log(1.0, 1.5).unwrap();
    let v = marchaud_fn(|t| t.clamp(-0.01, 0.01), 0.0, &k, MarchaudSide::TwoSided, &MarchaudOptions::default())
        .unwrap();
    assert!(v.re().is_finite() && v.re() > 0.0);
}

// the step is zero near t = 0 so the head fit sees no round-off from an offset
fn curve(s: f64, u: f64) -> impl Fn(f64) -> f64 {
    move |t| {
        let step = if u > 0.0 { if t < u { 0.0 } else { -0.75 } } else if t < u { 0.5 } else { 0.0 };
        (s * t.clamp(-1.0, 1.0)).sin() + step
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn linear_in_the_curve(a in -2.0f64..2.0, b in -2.0f64..2.0, s in 0.5f64..3.0, u in 0.05f64..0.5, eta in 0.2f64..0.8) {
        let k = MarchaudKernel::full_real(eta).unwrap();
        let opts = MarchaudOptions { hints: vec![u, 1.0], upper: 1.5, ..Default::default() };
        let (g, h) = (curve(s, u), curve(1.0 / s, -u));
        let mg = marchaud_fn(&g, 0.0, &k, MarchaudSide::TwoSided, &opts).unwrap().re();
        let mh = marchaud_fn(&h, 0.0, &k, MarchaudSide::TwoSided, &opts).unwrap().re();
        let m = marchaud_fn(|t| a * g(t) + b * h(t), 0.0, &k, MarchaudSide::TwoSided, &opts).unwrap().re();
        let scale = 1.0 + (a * mg).abs() + (b * mh).abs();
        let d = (m - a * mg - b * mh).abs();
        prop_assert!(d < 1e-10 * scale, "defect {:e}", d);
    }

    #[test]
    fn two_sided_is_half_the_one_sided_difference(s in 0.5f64..3.0, u in 0.05f64..0.5, eta in 0.2f64..0.8) {
        let k = MarchaudKernel::full_real(eta).unwrap();
        let opts = MarchaudOptions { hints: vec![u, 1.0], upper: 1.5, ..Default::default() };
        let g = curve(s, u);
        let two = marchaud_fn(&g, 0.0, &k, MarchaudSide::TwoSided, &opts).unwrap().re();
        let p = marchaud_fn(&g, 0.0, &k, MarchaudSide::Plus, &opts).unwrap().re();
        let m = marchaud_fn(&g, 0.0, &k, MarchaudSide::Minus, &opts).unwrap().re();
        prop_assert!((two - 0.5 * (p - m)).abs() < 1e-10 * (1.0 + two.abs()));
    }
}
