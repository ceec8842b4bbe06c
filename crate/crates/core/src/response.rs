//! Response curves t ↦ R_φ(t) = ∫ φ ρ_t, their Marchaud derivatives, the
//! conjugacy derivative of the fixed-slope family and modulus fits.

use crate::density::{saltus_density_map, DEFAULT_K};
use crate::error::{Error, Result};
use crate::maps::{FamilyKind, FamilySpec, MapFamily, UnimodalMap};
use crate::marchaud::{MarchaudKernel, MarchaudSide, MarchaudValue, SampledCurve};
use crate::observable::Observable;
use crate::stepfn::integrate_against;
use crate::stepfn::ulam::{stationary_mass, ulam_matrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "method")]
pub enum DensityMethod {
    Ulam { n: usize },
    Saltus { k: usize },
    Birkhoff { samples: usize, burn_in: usize, batches: usize, seed: u64 },
}

impl DensityMethod {
    pub fn birkhoff(samples: usize, seed: u64) -> Self {
        DensityMethod::Birkhoff {
            samples,
            burn_in: 1000,
            batches: 100,
            seed,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ResponseCurve {
    pub family: FamilySpec,
    pub observable: String,
    pub t: Vec<f64>,
    pub values: Vec<f64>,
    pub errors: Vec<f64>,
    pub method: DensityMethod,
}

impl ResponseCurve {
    pub fn value_at_zero(&self) -> f64 {
        let i = self.t.iter().position(|&t| t == 0.0).expect("grid contains 0");
        self.values[i]
    }

    pub fn sampled(&self) -> Result<SampledCurve> {
        SampledCurve::new(self.t.clone(), self.values.clone(), 1.0)
    }

    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let rows: Vec<Vec<f64>> = (0..self.t.len())
            .map(|i| vec![self.t[i], self.values[i], self.errors[i]])
            .collect();
        crate::io::write_rows(w, &["t", "R", "err"], &rows)
    }
}

fn sup_abs(phi: &Observable) -> f64 {
    (0..=2000)
        .map(|i| phi.eval(-1.0 + i as f64 / 1000.0).abs())
        .fold(0.0, f64::max)
}

fn ulam_response(map: &UnimodalMap, phi: &Observable, n: usize) -> Result<f64> {
    let p = ulam_matrix(map, n)?;
    let (m, _, _) = stationary_mass(&p, 1e-13, 50_000)?;
    integrate_against(phi, &p.density_of(&m))
}

/// Birkhoff average with batch-mean error bar; `stream` separates generators.
pub fn birkhoff_average(
    map: &UnimodalMap,
    phi: &Observable,
    samples: usize,
    burn_in: usize,
    batches: usize,
    seed: u64,
    stream: u64,
) -> Result<(f64, f64)> {
    if batches < 2 || samples < batches {
        return Err(Error::domain("Birkhoff estimator needs at least two non-empty batches"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let per = samples / batches;
    let mut x: f64 = rng.gen_range(-1.0..1.0);
    for _ in 0..burn_in {
        x = map.eval(x);
    }
    let mut means = Vec::with_capacity(batches);
    for _ in 0..batches {
        let mut s = 0.0;
        for i in 0..per {
            x = map.eval(x);
            // a round-off cycle is broken by a fresh start
            if i % 4096 == 4095 && (map.eval(x) - x).abs() < 1e-15 {
                x = rng.gen_range(-1.0..1.0);
            }
            s += phi.eval(x);
        }
        means.push(s / per as f64);
    }
    let mean = means.iter().sum::<f64>() / batches as f64;
    let var = means.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (batches - 1) as f64;
    Ok((mean, (var / batches as f64).sqrt()))
}

/// R(t) and an error estimate by the chosen method.
pub fn response_at(
    family: &MapFamily,
    phi: &Observable,
    t: f64,
    method: DensityMethod,
    stream: u64,
) -> Result<(f64, f64)> {
    let map = family.at(t)?;
    match method {
        DensityMethod::Saltus { k } => {
            let d = saltus_density_map(&map, k)?;
            Ok((integrate_against(phi, &d.sal)?, d.tail_bound * sup_abs(phi)))
        }
        DensityMethod::Ulam { n } => {
            let fine = ulam_response(&map, phi, n)?;
            let coarse = ulam_response(&map, phi, n / 2)?;
            Ok((fine, (fine - coarse).abs()))
        }
        DensityMethod::Birkhoff {
            samples,
            burn_in,
            batches,
            seed,
        } => birkhoff_average(&map, phi, samples, burn_in, batches, seed, stream),
    }
}

/// R_φ on a grid (clamped beyond ±ε₁ by the family itself).
pub fn response_curve(
    family: &MapFamily,
    phi: &Observable,
    grid: &[f64],
    method: DensityMethod,
) -> Result<ResponseCurve> {
    if !grid.contains(&0.0) {
        return Err(Error::domain("response grid must contain t = 0"));
    }
    let limit = 3.0 * family.eps1() * (1.0 + 1e-12);
    if grid.iter().any(|t| t.abs() > limit) {
        return Err(Error::domain("response grid must lie within [-3 eps1, 3 eps1]"));
    }
    let out: Vec<(f64, f64)> = grid
        .par_iter()
        .enumerate()
        .map(|(i, &t)| response_at(family, phi, t, method, i as u64))
        .collect::<Result<_>>()?;
    Ok(ResponseCurve {
        family: family.spec(),
        observable: format!("{phi:?}"),
        t: grid.to_vec(),
        values: out.iter().map(|v| v.0).collect(),
        errors: out.iter().map(|v| v.1).collect(),
        method,
    })
}

/// M^η (or M^{(ℓ)}) of the interpolated curve at t = 0, two-sided.
pub fn marchaud_of_response(curve: &ResponseCurve, kernel: &MarchaudKernel) -> Result<MarchaudValue> {
    let s = curve.sampled()?;
    let min_t = s.min_abs_t();
    if min_t > 1e-3 * curve.family.eps1 {
        return Err(Error::domain(format!(
            "curve grid too coarse near 0 (innermost |t| = {min_t:e})"
        )));
    }
    s.marchaud(kernel, MarchaudSide::TwoSided)
}

/// ∂_t R|₀ for the fixed-slope family: (1/a₀) ∫ φ'(x) x ρ₀(x) dx, a₀ = λ₀ - 1 + t₀.
pub fn conjugacy_derivative(family: &MapFamily, phi: &Observable) -> Result<f64> {
    if family.kind() != FamilyKind::TentFixedSlope {
        return Err(Error::domain("conjugacy derivative needs the fixed-slope tent family"));
    }
    let a0 = family.lambda0() - 1.0 + family.t0();
    let rho = saltus_density_map(family.base(), DEFAULT_K)?;
    let psi = match phi {
        Observable::Polynomial(c) => {
            let mut d: Vec<f64> = vec![0.0];
            d.extend(c.iter().enumerate().skip(1).map(|(i, a)| a * i as f64));
            Observable::Polynomial(d)
        }
        other => {
            if !other.is_continuous() {
                return Err(Error::domain("observable must be continuous"));
            }
            other.deriv(0.0)?;
            let f = other.clone();
            Observable::callable("x phi'(x)", move |x| x * f.deriv(x).unwrap_or(f64::NAN))
        }
    };
    Ok(integrate_against(&psi, &rho.sal)? / a0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModulusModel {
    Power,
    PowerLog,
}

#[derive(Debug, Clone, Serialize)]
pub struct ModulusFit {
    pub model: ModulusModel,
    /// (log C, exponent): α for power, β for power_log.
    pub log_c: f64,
    pub exponent: f64,
    pub exponent_stderr: f64,
    pub residual: f64,
    pub points: usize,
}

fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let ss: f64 = x.iter().zip(y).map(|(a, b)| (b - icpt - slope * a).powi(2)).sum();
    let rms = (ss / n).sqrt();
    let se = if n > 2.0 { (ss / (n - 2.0) / sxx).sqrt() } else { f64::NAN };
    (icpt, slope, se, rms)
}

/// Least-squares fit of log|Δ| against log|t| (power) or of log|Δ| - log|t|
/// against log|log|t|| (power_log).
pub fn modulus_fit_points(t: &[f64], delta: &[f64], model: ModulusModel) -> Result<ModulusFit> {
    let pts: Vec<(f64, f64)> = t
        .iter()
        .zip(delta)
        .filter(|(t, d)| t.abs() > 0.0 && t.abs() < 1.0 && d.abs() > 0.0)
        .map(|(t, d)| (t.abs(), d.abs()))
        .collect();
    if pts.len() < 10 {
        return Err(Error::domain(format!(
            "modulus fit needs >= 10 points above the noise floor, got {}",
            pts.len()
        )));
    }
    let (x, y): (Vec<f64>, Vec<f64>) = match model {
        ModulusModel::Power => pts.iter().map(|(t, d)| (t.ln(), d.ln())).unzip(),
        ModulusModel::PowerLog => pts
            .iter()
            .map(|(t, d)| (t.ln().abs().ln(), d.ln() - t.ln()))
            .unzip(),
    };
    if x.iter().all(|v| (v - x[0]).abs() < 1e-14) {
        return Err(Error::domain("degenerate abscissae"));
    }
    let (log_c, exponent, se, rms) = linear_fit(&x, &y);
    Ok(ModulusFit {
        model,
        log_c,
        exponent,
        exponent_stderr: se,
        residual: rms,
        points: pts.len(),
    })
}

/// Modulus fit of |R(t) - R(0)| keeping points above three error bars.
pub fn modulus_fit(curve: &ResponseCurve, model: ModulusModel) -> Result<ModulusFit> {
    let r0 = curve.value_at_zero();
    let i0 = curve.t.iter().position(|&t| t == 0.0).unwrap();
    let mut ts = Vec::new();
    let mut ds = Vec::new();
    for (i, (&t, &r)) in curve.t.iter().zip(&curve.values).enumerate() {
        let noise = 3.0 * (curve.errors[i] + curve.errors[i0]);
        if t != 0.0 && t.abs() <= curve.family.eps1 && (r - r0).abs() > noise {
            ts.push(t);
            ds.push(r - r0);
        }
    }
    if ds.iter().all(|d| d.abs() < 1e-300) {
        return Err(Error::domain("flat response curve"));
    }
    modulus_fit_points(&ts, &ds, model)
}

/// ‖ρ_t - ρ₀‖₁ from exact saltus densities.
pub fn density_distance_curve(family: &MapFamily, ts: &[f64], k: usize) -> Result<Vec<f64>> {
    let rho0 = saltus_density_map(family.base(), k)?;
    ts.par_iter()
        .map(|&t| Ok(saltus_density_map(&family.at(t)?, k)?.sal.l1_distance(&rho0.sal)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::make_tent_fixed_slope;
    use crate::marchaud::geometric_grid;

    #[test]
    fn synthetic_fits() {
        let t: Vec<f64> = (0..30).map(|j| 0.1 * 0.7f64.powi(j)).collect();
        let d: Vec<f64> = t.iter().map(|t| t.sqrt()).collect();
        let f = modulus_fit_points(&t, &d, ModulusModel::Power).unwrap();
        assert!((f.exponent - 0.5).abs() < 1e-10);
        let d2: Vec<f64> = t.iter().map(|t| t * t.ln().abs()).collect();
        let g = modulus_fit_points(&t, &d2, ModulusModel::PowerLog).unwrap();
        assert!((g.exponent - 1.0).abs() < 1e-10);
        assert!(modulus_fit_points(&t[..5], &d[..5], ModulusModel::Power).is_err());
    }

    #[test]
    fn conjugacy_linear_response() {
        let fam = make_tent_fixed_slope(1.8, 0.05, 0.01).unwrap();
        let phi = Observable::identity();
        let grid = geometric_grid(0.01, 0.5, 8, &[0.02]);
        let c = response_curve(&fam, &phi, &grid, DensityMethod::Saltus { k: 60 }).unwrap();
        let r0 = c.value_at_zero();
        let a0 = 0.85;
        for (t, r) in c.t.iter().zip(&c.values) {
            let tc = t.clamp(-0.01, 0.01);
            assert!((r / r0 - (1.0 + tc / a0)).abs() < 1e-10, "{t}");
        }
        let d = conjugacy_derivative(&fam, &phi).unwrap();
        assert!((d - r0 / a0).abs() < 1e-12);
        assert_eq!(conjugacy_derivative(&fam, &Observable::constant(2.0)).unwrap(), 0.0);
    }

    #[test]
    fn constant_observable_is_flat() {
        let fam = make_tent_fixed_slope(1.8, 0.05, 0.01).unwrap();
        let c = response_curve(
            &fam,
            &Observable::constant(1.0),
            &[-0.01, 0.0, 0.01],
            DensityMethod::Ulam { n: 200 },
        )
        .unwrap();
        for v in c.values {
            assert!((v - 1.0).abs() < 1e-10);
        }
    }
}
