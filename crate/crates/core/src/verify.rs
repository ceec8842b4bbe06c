//! Verification battery over the acceptance properties of the crate.
//!
//! Every check reports `{check, value, expected, tol, pass}` with
//! `pass = |value - expected| <= tol`. The fast level skips Birkhoff sampling
//! and the finest grids.

use crate::cohomology::{horizontality_index, magic_identity_residual};
use crate::density::{invariant_density_ulam, invariant_density_ulam_spectral, key_identity_check, saltus_density_map};
use crate::error::Result;
use crate::maps::{critical_orbit, expansion_stats, make_tent_fixed_slope, make_tent_varying_slope, MapFamily};
use crate::marchaud::{
    geometric_grid, heaviside_closed, kernel_power_log, linear_truncated_closed, marchaud_fn, MarchaudKernel,
    MarchaudOptions, MarchaudSide, TailModel,
};
use crate::observable::Observable;
use crate::response::{
    density_distance_curve, marchaud_of_response, modulus_fit_points, response_at, response_curve, DensityMethod,
    ModulusModel,
};
use crate::stepfn::{integrate_against, transfer, transfer_tent, StepFunction};
use crate::susceptibility::{
    frozen_via_resolvent, horizontal_limit_check, response_susceptibility_tent, susceptibility_at,
    susceptibility_series, zeta_expansion_check, EngineConfig, Propagation, SeriesNodes, SpatialConfig, Variant,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::time::Instant;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Level {
    Fast,
    Full,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub check: String,
    pub value: f64,
    pub expected: f64,
    pub tol: f64,
    pub pass: bool,
}

impl Check {
    pub fn within(name: impl Into<String>, value: f64, expected: f64, tol: f64) -> Self {
        Check {
            check: name.into(),
            value,
            expected,
            tol,
            pass: (value - expected).abs() <= tol,
        }
    }

    /// value ∈ [0, bound).
    pub fn below(name: impl Into<String>, value: f64, bound: f64) -> Self {
        let mut c = Self::within(name, value, 0.0, bound);
        c.pass = value >= 0.0 && value < bound;
        c
    }

    pub fn flag(name: impl Into<String>, ok: bool) -> Self {
        Self::within(name, if ok { 1.0 } else { 0.0 }, 1.0, 0.0)
    }

    fn failed(name: impl Into<String>, err: &crate::Error) -> Self {
        Check {
            check: format!("{} [error: {err}]", name.into()),
            value: f64::NAN,
            expected: f64::NAN,
            tol: f64::NAN,
            pass: false,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report {
    pub level: Level,
    pub checks: Vec<Check>,
    /// (criterion, seconds)
    pub timings: Vec<(u32, f64)>,
    pub all_pass: bool,
}

impl Report {
    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn fixed() -> MapFamily {
    make_tent_fixed_slope(1.8, 0.05, 0.01).expect("default family")
}

/// Heaviside closed form; `gamma_scale` multiplies the numerical Γ_η.
pub fn heaviside_checks(gamma_scale: f64) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for eta in [0.25, 0.5, 0.75] {
        let k = MarchaudKernel::full_real(eta)?;
        for d in [0.05, 0.2, 1.0] {
            for x in [d, -d] {
                let opts = MarchaudOptions {
                    hints: vec![d],
                    ..Default::default()
                };
                let g = |t: f64| if x > t { 1.0 } else { 0.0 };
                let v = marchaud_fn(g, 0.0, &k, MarchaudSide::TwoSided, &opts)?.re() * gamma_scale;
                let c = heaviside_closed(x, 0.0, eta)?;
                out.push(Check::below(format!("c01.heaviside eta={eta} x-u={x}"), rel(v, c), 1e-6));
            }
        }
    }
    Ok(out)
}

fn sine_limit() -> Result<Vec<Check>> {
    let opts = MarchaudOptions {
        upper: 2000.0,
        tail: TailModel::Bounded(1.0),
        ..Default::default()
    };
    let mut dev = Vec::new();
    for eta in [0.9, 0.95, 0.99] {
        let k = MarchaudKernel::full_real(eta)?;
        let v = marchaud_fn(f64::sin, 0.0, &k, MarchaudSide::TwoSided, &opts)?.re();
        dev.push((v - 1.0).abs());
    }
    Ok(vec![
        Check::below("c02.sine |M sin(0) - 1| at eta=0.99", dev[2], 0.05),
        Check::flag("c02.sine deviation decreasing in eta", dev[0] > dev[1] && dev[1] > dev[2]),
    ])
}

fn density_fixed_point(level: Level) -> Result<Vec<Check>> {
    let fam = fixed();
    let (peak, slope) = fam.tent_at(0.0).unwrap();
    let d = saltus_density_map(fam.base(), 60)?;
    let lr = transfer_tent(peak, slope, &d.sal);
    let mut out = vec![Check::below(
        "c03.density |L rho - rho|_1",
        lr.l1_distance(&d.sal),
        1e-10 + d.tail_bound,
    )];
    let mut ns = vec![800];
    if level == Level::Full {
        ns.push(1600);
    }
    for n in ns {
        let u = invariant_density_ulam(&fam, 0.0, n)?;
        out.push(Check::below(format!("c03.density ulam({n}) L1 distance"), u.sal.l1_distance(&d.sal), 0.01));
    }
    if level == Level::Full {
        let phi = Observable::identity();
        let exact = integrate_against(&phi, &d.sal)?;
        let (v, e) = response_at(&fam, &phi, 0.0, DensityMethod::birkhoff(4_000_000, 7), 0)?;
        out.push(Check::below("c03.density birkhoff R(0) in 5 sigma", (v - exact).abs(), 5.0 * e + 1e-12));
    }
    Ok(out)
}

fn mass_conservation(seed: u64) -> Result<Vec<Check>> {
    let fam = fixed();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let f0 = fam.at(0.0)?;
    let mut worst = 0.0f64;
    for sign in [1.0, -1.0] {
        let ft = fam.at(sign * fam.eps1() / 2.0)?;
        for _ in 0..50 {
            let m = rng.gen_range(2..20);
            let mut bp: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
            bp.push(-1.0);
            bp.push(1.0);
            bp.sort_by(f64::total_cmp);
            bp.dedup();
            let vals = (0..bp.len() - 1).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let g = StepFunction::new(bp, vals)?;
            let diff = transfer(&ft, &g)?.integral() - transfer(&f0, &g)?.integral();
            worst = worst.max(diff.abs());
        }
    }
    Ok(vec![Check::below("c04.mass max |int (L_t - L_0) phi|", worst, 1e-12)])
}

fn key_identity() -> Result<Vec<Check>> {
    let fam = fixed();
    [400, 800]
        .into_iter()
        .map(|n| {
            let k = key_identity_check(&fam, 0.005, n, 60)?;
            Ok(Check::below(format!("c05.key identity n={n}"), k.residual, 2.0 * k.refinement))
        })
        .collect()
}

fn linear_response_b() -> Result<Vec<Check>> {
    let fam = fixed();
    let phi = Observable::identity();
    let eta = 0.5;
    let eps1 = fam.eps1();
    let k = MarchaudKernel::truncated_real(eta, eps1)?;
    let cfg = EngineConfig::default();
    let (psi, _) = susceptibility_at(&fam, &phi, &k, Variant::Full, Complex64::new(1.0, 0.0), &cfg)?;
    let grid = geometric_grid(eps1, 0.8, 60, &[2.0 * eps1, 3.0 * eps1]);
    let curve = response_curve(&fam, &phi, &grid, DensityMethod::Saltus { k: 60 })?;
    let mr = marchaud_of_response(&curve, &k)?.re();
    let a0 = fam.lambda0() - 1.0 + fam.t0();
    let closed = linear_truncated_closed(curve.value_at_zero() / a0, eps1, eta)?;
    Ok(vec![
        Check::below("c06.psi(0.5,1) vs M R", rel(psi.re, mr), 0.01),
        Check::below("c06.closed form vs M R", rel(closed, mr), 0.01),
    ])
}

fn frozen_shared(level: Level) -> Result<Vec<Check>> {
    let fam = fixed();
    let k = MarchaudKernel::truncated_real(0.5, fam.eps1())?;
    let mut ns = vec![400];
    if level == Level::Full {
        ns.push(800);
    }
    ns.into_iter()
        .map(|n| {
            let fr = frozen_via_resolvent(
                &fam,
                &Observable::identity(),
                &k,
                Complex64::new(1.0, 0.0),
                n,
                &EngineConfig::default(),
            )?;
            Ok(Check::below(
                format!("c07.frozen series vs resolvent n={n}"),
                (fr.series_sum - fr.value).norm(),
                1e-6,
            ))
        })
        .collect()
}

fn decay_rates() -> Result<Vec<Check>> {
    let fam = fixed();
    let (_, spec) = invariant_density_ulam_spectral(&fam, 0.0, 400)?;
    let lambda = expansion_stats(&fam, 10, 21)?.lambda_family;
    let mut out = Vec::new();
    for eta in [0.25, 0.5, 0.75] {
        let k = MarchaudKernel::truncated_real(eta, fam.eps1())?;
        let s = susceptibility_series(&fam, &Observable::identity(), &k, Variant::Full, &EngineConfig::default())?;
        let bound = spec.kappa_hat.max(lambda.powf(-(1.0 - eta))) + 0.05;
        match s.decay {
            Some(d) => out.push(Check::below(format!("c08.decay rate eta={eta}"), d.r, bound)),
            None => out.push(Check::flag(format!("c08.decay rate eta={eta} (no fit)"), false)),
        }
    }
    Ok(out)
}

fn horizontality() -> Result<Vec<Check>> {
    let fam = fixed();
    let h = horizontality_index(&fam, 60)?;
    let v = horizontality_index(&make_tent_varying_slope(1.8, 0.1)?, 60)?;
    let mut out = vec![
        Check::below("c09.fixed-slope index", h.value.abs(), h.tail_bound + 1e-15),
        Check::flag("c09.varying-slope index > 10 tail bounds", v.value.abs() > 10.0 * v.tail_bound),
    ];
    let orbit = critical_orbit(fam.base(), 80)?;
    for j in 1..=5 {
        let r = magic_identity_residual(fam.base(), &orbit, &|_| 1.0, 1.0, j, 60)?;
        out.push(Check::below(format!("c09.magic identity j={j}"), r.abs(), 1e-8));
    }
    Ok(out)
}

fn horizontal_limit() -> Result<Vec<Check>> {
    let r = horizontal_limit_check(
        &fixed(),
        &Observable::identity(),
        &[0.9, 0.95, 0.975],
        &[0.7, 0.8, 0.9, 0.95],
        &EngineConfig::default(),
    )?;
    let rise = r.gap.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
    Ok(vec![
        Check::below("c10.limit, reTCE, conjugacy pairwise", r.max_pairwise_rel, 0.05),
        Check {
            check: "c10.|psi - psi_fr| decreasing (largest step)".into(),
            value: rise,
            expected: 0.0,
            tol: 0.0,
            pass: rise < 0.0,
        },
    ])
}

fn coincidence(level: Level) -> Result<Vec<Check>> {
    let fam = fixed();
    let phi = Observable::identity();
    let k = MarchaudKernel::truncated_real(0.5, fam.eps1())?;
    let zs: Vec<Complex64> = [0.0, 0.5, 1.0].iter().map(|&z| Complex64::new(z, 0.0)).collect();
    let cfg = EngineConfig::default();
    let frozen = SeriesNodes::build(&fam, &phi, Propagation::Frozen, &cfg, &zs)?.resummed(&k, MarchaudSide::TwoSided)?;
    let spatial = SpatialConfig {
        cells: if level == Level::Full { 128_000 } else { 64_000 },
        ..Default::default()
    };
    let (_, rsp) = response_susceptibility_tent(&fam, &phi, &k, &zs, &cfg, &spatial)?;
    Ok(zs
        .iter()
        .zip(frozen.iter().zip(&rsp))
        .map(|(z, ((f, _), r))| Check::below(format!("c11.frozen vs response z={}", z.re), (f - r).norm(), 1e-4))
        .collect())
}

fn generalized() -> Result<Vec<Check>> {
    let fam = fixed();
    let phi = Observable::identity();
    let nodes = SeriesNodes::build(
        &fam,
        &phi,
        Propagation::Full,
        &EngineConfig::default(),
        &[Complex64::new(1.0, 0.0)],
    )?;
    let eps1 = fam.eps1();
    let grid = geometric_grid(eps1, 0.8, 60, &[2.0 * eps1, 3.0 * eps1]);
    let curve = response_curve(&fam, &phi, &grid, DensityMethod::Saltus { k: 60 })?;
    let mut out = Vec::new();
    for (eta, beta) in [(0.5, 2.0), (1.0, 1.5)] {
        let k = kernel_power_log(eta, beta)?;
        let psi = nodes.resummed(&k, MarchaudSide::TwoSided)?[0].0.re;
        let mr = marchaud_of_response(&curve, &k)?.re();
        let name = format!("c12.generalized (eta,beta)=({eta},{beta})");
        if psi.is_finite() && mr.is_finite() {
            out.push(Check::below(name, rel(psi, mr), 0.01));
        } else {
            out.push(Check::flag(name + " finite", false));
        }
    }
    Ok(out)
}

fn zeta_expansion() -> Result<Vec<Check>> {
    let r = zeta_expansion_check(
        &fixed(),
        &Observable::identity(),
        0.3,
        Complex64::new(0.05, 0.0),
        8,
        &EngineConfig::default(),
    )?;
    Ok(vec![
        Check::below("c13.zeta expansion discrepancy", r.discrepancy, 1e-3),
        Check::flag("c13.coefficient growth B finite", r.growth_b.is_finite() && r.growth_b > 0.0),
    ])
}

fn keller_modulus() -> Result<Vec<Check>> {
    let fam = make_tent_varying_slope(1.8, 0.15)?;
    let ts: Vec<f64> = (0..=30).map(|i| 10f64.powf(-4.0 + 0.1 * i as f64)).collect();
    let d = density_distance_curve(&fam, &ts, 60)?;
    let fit = modulus_fit_points(&ts, &d, ModulusModel::Power)?;
    Ok(vec![Check::within("c14.modulus power exponent", fit.exponent, 0.95, 0.15)])
}

/// Run the battery. `seed` drives the random test functions.
pub fn verify_suite(level: Level, seed: u64) -> Report {
    type Item<'a> = (u32, &'a str, Box<dyn Fn() -> Result<Vec<Check>> + 'a>);
    let items: Vec<Item> = vec![
        (1, "c01.heaviside", Box::new(|| heaviside_checks(1.0))),
        (2, "c02.sine", Box::new(sine_limit)),
        (3, "c03.density", Box::new(move || density_fixed_point(level))),
        (4, "c04.mass", Box::new(move || mass_conservation(seed))),
        (5, "c05.key identity", Box::new(key_identity)),
        (6, "c06.linear response", Box::new(linear_response_b)),
        (7, "c07.frozen", Box::new(move || frozen_shared(level))),
        (8, "c08.decay", Box::new(decay_rates)),
        (9, "c09.horizontality", Box::new(horizontality)),
        (10, "c10.horizontal limit", Box::new(horizontal_limit)),
        (11, "c11.coincidence", Box::new(move || coincidence(level))),
        (12, "c12.generalized", Box::new(generalized)),
        (13, "c13.zeta", Box::new(zeta_expansion)),
        (14, "c14.modulus", Box::new(keller_modulus)),
    ];
    let mut checks = Vec::new();
    let mut timings = Vec::new();
    for (id, name, run) in items {
        let start = Instant::now();
        match run() {
            Ok(c) => checks.extend(c),
            Err(e) => checks.push(Check::failed(name, &e)),
        }
        timings.push((id, start.elapsed().as_secs_f64()));
    }
    let all_pass = checks.iter().all(|c| c.pass);
    Report {
        level,
        checks,
        timings,
        all_pass,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn check_semantics() {
        assert!(Check::within("a", 1.0, 1.1, 0.2).pass);
        assert!(!Check::below("b", 0.2, 0.1).pass);
        assert!(!Check::below("c", -0.1, 0.1).pass);
        assert!(!Check::flag("d", false).pass);
    }
}
