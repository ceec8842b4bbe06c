use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Full,
    Frozen,
    Response,
    Classical,
    Generalized,
}

/// |a_k| ≈ C r^k fitted on a window of k.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DecayFit {
    pub c: f64,
    pub r: f64,
    pub residual: f64,
    pub k_from: usize,
    pub k_to: usize,
    pub points: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct SusceptibilitySeries {
    pub variant: Variant,
    pub kernel: String,
    pub coeffs: Vec<Complex64>,
    pub errors: Vec<f64>,
    pub decay: Option<DecayFit>,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SeriesValue {
    pub value: Complex64,
    pub tail_bound: f64,
    /// Set when |z| r ≥ 1: the partial sum carries no tail bound.
    pub outside_radius: bool,
}

/// Default fit window of the decay model.
pub const FIT_FROM: usize = 5;

impl SusceptibilitySeries {
    pub fn new(variant: Variant, kernel: String, coeffs: Vec<Complex64>, errors: Vec<f64>) -> Self {
        let decay = fit_decay(&coeffs, &errors, FIT_FROM).ok();
        SusceptibilitySeries {
            variant,
            kernel,
            coeffs,
            errors,
            decay,
        }
    }

    pub fn k_max(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let rows: Vec<Vec<f64>> = self
            .coeffs
            .iter()
            .zip(&self.errors)
            .enumerate()
            .map(|(k, (a, e))| vec![k as f64, a.re, a.im, *e])
            .collect();
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["k", "re", "im", "err"])?;
        for r in rows {
            wr.write_record([
                (r[0] as usize).to_string(),
                crate::io::fmt17(r[1]),
                crate::io::fmt17(r[2]),
                crate::io::fmt17(r[3]),
            ])?;
        }
        wr.flush()?;
        Ok(())
    }
}

/// Log-linear least squares of log|a_k| on k ≥ `from`, keeping coefficients
/// above three error bars.
pub fn fit_decay(coeffs: &[Complex64], errors: &[f64], from: usize) -> Result<DecayFit> {
    let pts: Vec<(f64, f64)> = coeffs
        .iter()
        .zip(errors)
        .enumerate()
        .skip(from)
        .filter(|(_, (a, e))| a.norm() > 3.0 * **e && a.norm() > 1e-300)
        .map(|(k, (a, _))| (k as f64, a.norm().ln()))
        .collect();
    if pts.len() < 10 {
        return Err(Error::domain(format!(
            "decay fit needs >= 10 coefficients above noise, got {}",
            pts.len()
        )));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let rms = (pts.iter().map(|p| (p.1 - icpt - slope * p.0).powi(2)).sum::<f64>() / n).sqrt();
    Ok(DecayFit {
        c: icpt.exp() * rms.exp(),
        r: slope.exp(),
        residual: rms,
        k_from: pts[0].0 as usize,
        k_to: pts[pts.len() - 1].0 as usize,
        points: pts.len(),
    })
}

/// Σ a_k z^k with a geometric tail bound from the decay fit.
pub fn series_evaluate(series: &SusceptibilitySeries, z: Complex64) -> SeriesValue {
    let mut value = Complex64::new(0.0, 0.0);
    let mut zk = Complex64::new(1.0, 0.0);
    for a in &series.coeffs {
        value += a * zk;
        zk *= z;
    }
    let k1 = series.coeffs.len() as i32;
    match series.decay {
        Some(d) if d.r * z.norm() < 1.0 => {
            let q = d.r * z.norm();
            SeriesValue {
                value,
                tail_bound: d.c * q.powi(k1) / (1.0 - q),
                outside_radius: false,
            }
        }
        Some(_) => SeriesValue {
            value,
            tail_bound: f64::INFINITY,
            outside_radius: true,
        },
        None => {
            let all_zero = series.coeffs.iter().zip(&series.errors).all(|(a, e)| a.norm() <= 3.0 * e);
            SeriesValue {
                value,
                tail_bound: if all_zero { 0.0 } else { f64::INFINITY },
                outside_radius: false,
            }
        }
    }
}

/// 1/r from the decay fit.
pub fn radius_estimate(series: &SusceptibilitySeries) -> Result<f64> {
    let d = fit_decay(&series.coeffs, &series.errors, FIT_FROM)?;
    Ok(1.0 / d.r)
}
