use fracsus::density::saltus_density_map;
use fracsus::maps::{critical_orbit, make_tent_fixed_slope, make_tent_varying_slope, MapFamily, Side};
use fracsus::stepfn::ulam::{leading_density, resolvent_solve, ulam_matrix, ResolventMethod};
use fracsus::stepfn::{transfer, StepFunction};
use num_complex::Complex64;
use proptest::prelude::*;

fn families() -> Vec<MapFamily> {
    vec![
        make_tent_fixed_slope(1.8, 0.05, 0.01).unwrap(),
        make_tent_varying_slope(1.8, 0.15).unwrap(),
        make_tent_varying_slope(1.6, 0.1).unwrap(),
    ]
}

fn grid() -> impl Iterator<Item = f64> {
    (0..=400).map(|i| -1.0 + i as f64 / 200.0)
}

fn step_strategy() -> impl Strategy<Value = StepFunction> {
    (prop::collection::vec(-0.999f64..0.999, 1..12), prop::collection::vec(-2.0f64..2.0, 13)).prop_map(
        |(mut bp, vals)| {
            bp.extend([-1.0, 1.0]);
            bp.sort_by(f64::total_cmp);
            bp.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
            let n = bp.len() - 1;
            StepFunction::new(bp, vals[..n].to_vec()).unwrap()
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn maps_are_continuous_and_expanding(s in -1.0f64..1.0, which in 0usize..3) {
        let fam = &families()[which];
        let f = fam.at(s * fam.eps1()).unwrap();
        let c = f.c();
        let gap = (f.branch(Side::Plus).value(c) - f.branch(Side::Minus).value(c)).abs();
        prop_assert!(gap < 1e-12);
        let min_slope = grid().filter(|x| (x - c).abs() > 1e-9).map(|x| f.deriv(x).abs()).fold(f64::INFINITY, f64::min);
        prop_assert!(min_slope > 1.0);
    }

    #[test]
    fn clamping_is_exact(s in 1.0f64..5.0, sign in prop::bool::ANY, which in 0usize..3) {
        let fam = &families()[which];
        let e = if sign { fam.eps1() } else { -fam.eps1() };
        let (a, b) = (fam.at(e * s).unwrap(), fam.at(e).unwrap());
        for x in grid() {
            prop_assert_eq!(a.eval(x), b.eval(x));
        }
    }

    #[test]
    fn fixed_slope_sup_distance_is_t(s in -1.0f64..1.0) {
        let fam = make_tent_fixed_slope(1.8, 0.05, 0.01).unwrap();
        let t = s * fam.eps1();
        let (ft, f0) = (fam.at(t).unwrap(), fam.at(0.0).unwrap());
        let d = grid().map(|x| (ft.eval(x) - f0.eval(x)).abs()).fold(0.0, f64::max);
        prop_assert!((d - t.abs()).abs() < 1e-14);
    }

    #[test]
    fn transfer_preserves_mass(g in step_strategy(), s in -1.0f64..1.0) {
        let fam = make_tent_fixed_slope(1.8, 0.05, 0.01).unwrap();
        let (ft, f0) = (fam.at(s * fam.eps1()).unwrap(), fam.at(0.0).unwrap());
        let d = transfer(&ft, &g).unwrap().integral() - transfer(&f0, &g).unwrap().integral();
        prop_assert!(d.abs() < 1e-12);
        let pt = ulam_matrix(&ft, 200).unwrap();
        let p0 = ulam_matrix(&f0, 200).unwrap();
        let du: f64 = pt.push(&pt.masses_of(&g)).iter().sum::<f64>() - p0.push(&p0.masses_of(&g)).iter().sum::<f64>();
        prop_assert!(du.abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn ulam_error_is_first_order(g in step_strategy()) {
        // ‖E L E g − L g‖₁ ≤ ‖E g − g‖₁ + ‖E Lg − Lg‖₁ and a jump J projects with error ≤ |J| h / 2
        let f = make_tent_fixed_slope(1.8, 0.05, 0.01).unwrap().at(0.0).unwrap();
        let exact = transfer(&f, &g).unwrap();
        let tv = |s: &StepFunction| -> f64 {
            s.jumps().iter().filter(|(x, _)| x.abs() < 1.0).map(|(_, j)| j.abs()).sum()
        };
        let budget = tv(&g) + tv(&exact);
        for n in [200, 400, 800] {
            let p = ulam_matrix(&f, n).unwrap();
            let h = p.widths().into_iter().fold(0.0, f64::max);
            let err = p.density_of(&p.push(&p.masses_of(&g))).l1_distance(&exact);
            prop_assert!(err <= budget * h / 2.0 + 1e-13, "n={} err {:e} bound {:e}", n, err, budget * h / 2.0);
        }
    }
}

#[test]
fn orbit_matches_direct_iteration() {
    for fam in families() {
        let f = fam.base();
        let o = critical_orbit(f, 40).unwrap();
        for k in 1..=30 {
            let direct = f.iterate(f.c(), k);
            assert!((o.points[k - 1] - direct).abs() < 1e-10, "k = {k}");
        }
    }
}

#[test]
fn jumps_are_normalized_orbit_weights() {
    for fam in families() {
        let d = saltus_density_map(fam.base(), 60).unwrap();
        let jumps = d.sal.jumps();
        for &(c, s) in d.jumps.iter().take(20) {
            let j: f64 = jumps.iter().filter(|(b, _)| (b - c).abs() < 1e-14).map(|(_, j)| j).sum();
            assert!((j - s).abs() < 1e-12, "{c}: {j} vs {s}");
        }
    }
}

#[test]
fn orbit_weights_follow_the_chain_rule() {
    for fam in families() {
        let f = fam.base();
        let o = critical_orbit(f, 60).unwrap();
        for k in 0..o.len() - 1 {
            let lhs = o.sbar[k + 1] * f.deriv(o.points[k]);
            assert!((lhs - o.sbar[k]).abs() < 1e-12 * o.sbar[k].abs().max(1e-300));
        }
    }
}

#[test]
fn neumann_rate_is_bounded_by_the_spectral_gap() {
    let f = make_tent_fixed_slope(1.8, 0.05, 0.01).unwrap().at(0.0).unwrap();
    let p = ulam_matrix(&f, 400).unwrap();
    let kappa = leading_density(&p).unwrap().kappa_hat;
    let n = p.n();
    let w: Vec<Complex64> = (0..n)
        .map(|i| Complex64::new(if i < n / 2 { 1.0 } else { -1.0 } / n as f64, 0.0))
        .collect();
    let s = resolvent_solve(&p, Complex64::new(1.0, 0.0), &w, ResolventMethod::Neumann).unwrap();
    assert!(s.rate <= kappa + 0.05, "rate {} kappa {}", s.rate, kappa);
    let d = resolvent_solve(&p, Complex64::new(1.0, 0.0), &w, ResolventMethod::Direct).unwrap();
    let diff: f64 = s.u.iter().zip(&d.u).map(|(a, b)| (a - b).norm()).sum();
    assert!(diff < 1e-9);
}
