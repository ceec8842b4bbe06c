//! The η ↑ 1 limit for horizontal families and the expansion of the one-sided
//! susceptibility in the order η₀ + ζ.

use super::classical::{classical_susceptibility, retce_value};
use super::engine::{EngineConfig, Propagation, SeriesNodes};
use crate::cohomology::horizontality_index;
use crate::error::{Error, Result};
use crate::maps::{FamilyKind, MapFamily};
use crate::marchaud::{gamma_factor, zeta_log_kernels, MarchaudKernel, MarchaudSide};
use crate::observable::Observable;
use crate::response::conjugacy_derivative;
use num_complex::Complex64;
use serde::Serialize;

/// Smallest |t| node of the frozen grid in the horizontal-limit check.
pub const FROZEN_FLOOR: f64 = 1e-40;

#[derive(Debug, Clone, Serialize)]
pub struct HorizontalLimitReport {
    pub etas: Vec<f64>,
    pub psi: Vec<f64>,
    pub psi_err: Vec<f64>,
    /// Quadratic extrapolation of Ψ(η, 1) in 1 - η to η = 1.
    pub extrapolated: f64,
    pub retce: f64,
    pub classical: f64,
    /// Conjugacy derivative (fixed slope) or None.
    pub conjugacy: Option<f64>,
    pub gap_etas: Vec<f64>,
    /// |Ψ − Ψ^fr|(η, 1) on `gap_etas`.
    pub gap: Vec<f64>,
    pub gap_err: Vec<f64>,
    pub frozen_panels: usize,
    pub gap_decreasing: bool,
    pub max_pairwise_rel: f64,
}

/// Value at h = 0 of the parabola through (h_i, y_i).
pub fn extrapolate_to_zero(h: &[f64], y: &[f64]) -> f64 {
    let n = h.len();
    (0..n)
        .map(|i| {
            let l: f64 = (0..n)
                .filter(|&j| j != i)
                .map(|j| h[j] / (h[j] - h[i]))
                .product();
            l * y[i]
        })
        .sum()
}

pub fn horizontal_limit_check(
    family: &MapFamily,
    phi: &Observable,
    etas: &[f64],
    gap_etas: &[f64],
    cfg: &EngineConfig,
) -> Result<HorizontalLimitReport> {
    let hz = horizontality_index(family, cfg.density_k)?;
    if hz.value.abs() > 10.0 * hz.tail_bound + 1e-12 {
        return Err(Error::model(format!(
            "family is not horizontal (index {:e}, tail bound {:e})",
            hz.value, hz.tail_bound
        )));
    }
    if etas.len() < 2 {
        return Err(Error::domain("extrapolation needs at least two orders"));
    }
    let eps1 = family.eps1();
    let one = [Complex64::new(1.0, 0.0)];
    let full = SeriesNodes::build(family, phi, Propagation::Full, cfg, &one)?;
    // the frozen t-integrand oscillates on every scale; resolve it far below δ
    let frozen_panels = if family.kind() == FamilyKind::TentFixedSlope {
        let need = ((FROZEN_FLOOR / eps1).ln() / cfg.q.ln()).ceil() as usize;
        cfg.panels.max(need)
    } else {
        cfg.panels
    };
    let frozen_cfg = EngineConfig {
        panels: frozen_panels,
        ..cfg.clone()
    };
    let frozen = SeriesNodes::build(family, phi, Propagation::Frozen, &frozen_cfg, &one)?;
    let at_one = |nodes: &SeriesNodes, eta: f64| -> Result<(f64, f64)> {
        let k = MarchaudKernel::truncated_real(eta, eps1)?;
        let (v, e) = nodes.resummed(&k, MarchaudSide::TwoSided)?[0];
        Ok((v.re, e))
    };
    let mut psi = Vec::with_capacity(etas.len());
    let mut psi_err = Vec::with_capacity(etas.len());
    for &eta in etas {
        let (v, e) = at_one(&full, eta)?;
        psi.push(v);
        psi_err.push(e);
    }
    let h: Vec<f64> = etas.iter().map(|e| 1.0 - e).collect();
    let extrapolated = extrapolate_to_zero(&h, &psi);
    let mut gap = Vec::with_capacity(gap_etas.len());
    let mut gap_err = Vec::with_capacity(gap_etas.len());
    for &eta in gap_etas {
        let (a, ea) = at_one(&full, eta)?;
        let (b, eb) = at_one(&frozen, eta)?;
        gap.push((a - b).abs());
        gap_err.push(ea + eb);
    }
    let gap_decreasing = gap.windows(2).all(|w| w[1] < w[0]);
    let retce = retce_value(family, phi, cfg.density_k, 200)?.value;
    let classical = classical_susceptibility(family, phi, one[0], cfg.density_k)?.value.re;
    let conjugacy = conjugacy_derivative(family, phi).ok();
    let mut vals = vec![extrapolated, retce];
    vals.extend(conjugacy);
    let mut max_pairwise_rel = 0.0f64;
    for i in 0..vals.len() {
        for j in i + 1..vals.len() {
            let scale = vals[i].abs().max(vals[j].abs());
            if scale > 0.0 {
                max_pairwise_rel = max_pairwise_rel.max((vals[i] - vals[j]).abs() / scale);
            }
        }
    }
    Ok(HorizontalLimitReport {
        etas: etas.to_vec(),
        psi,
        psi_err,
        extrapolated,
        retce,
        classical,
        conjugacy,
        gap_etas: gap_etas.to_vec(),
        gap,
        gap_err,
        frozen_panels,
        gap_decreasing,
        max_pairwise_rel,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ZetaReport {
    pub eta0: f64,
    pub zeta: Complex64,
    pub direct: Complex64,
    pub expansion: Complex64,
    pub discrepancy: f64,
    /// Ψ^−((ℓ_n), 1), n = 0..=N.
    pub log_coeffs: Vec<Complex64>,
    /// Fit |Ψ^−((ℓ_n), 1)| / n! ≈ C Bⁿ.
    pub growth_c: f64,
    pub growth_b: f64,
    pub growth_residual: f64,
    /// Size of the last retained term.
    pub last_term: f64,
}

/// Minus-side susceptibility at order η₀ + ζ, directly and through the
/// log-kernel expansion Γ_{η₀+ζ} Σ_{n≤N} (−ζ)ⁿ/n! Ψ^−((ℓ_n), 1).
pub fn zeta_expansion_check(
    family: &MapFamily,
    phi: &Observable,
    eta0: f64,
    zeta: Complex64,
    n_terms: u32,
    cfg: &EngineConfig,
) -> Result<ZetaReport> {
    let eta = Complex64::new(eta0, 0.0) + zeta;
    let nodes = SeriesNodes::build(family, phi, Propagation::Full, cfg, &[Complex64::new(1.0, 0.0)])?;
    let direct = nodes.resummed(&MarchaudKernel::full(eta)?, MarchaudSide::Minus)?[0].0;
    let mut log_coeffs = Vec::with_capacity(n_terms as usize + 1);
    for n in 0..=n_terms {
        let k = zeta_log_kernels(Complex64::new(eta0, 0.0), n)?;
        log_coeffs.push(nodes.resummed(&k, MarchaudSide::Minus)?[0].0);
    }
    let g = gamma_factor(eta)?;
    let mut sum = Complex64::new(0.0, 0.0);
    let mut w = Complex64::new(1.0, 0.0);
    let mut last_term = 0.0;
    for (n, c) in log_coeffs.iter().enumerate() {
        if n > 0 {
            w *= -zeta / n as f64;
        }
        let term = g * w * c;
        sum += term;
        last_term = term.norm();
    }
    let pts: Vec<(f64, f64)> = log_coeffs
        .iter()
        .enumerate()
        .filter(|(_, c)| c.norm() > 0.0)
        .map(|(n, c)| {
            let lf: f64 = (1..=n).map(|i| (i as f64).ln()).sum();
            (n as f64, c.norm().ln() - lf)
        })
        .collect();
    let (growth_c, growth_b, growth_residual) = if pts.len() >= 2 {
        let m = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let slope = sxy / sxx;
        let icpt = my - slope * mx;
        let rms = (pts.iter().map(|p| (p.1 - icpt - slope * p.0).powi(2)).sum::<f64>() / m).sqrt();
        (icpt.exp(), slope.exp(), rms)
    } else {
        (f64::NAN, f64::NAN, f64::NAN)
    };
    Ok(ZetaReport {
        eta0,
        zeta,
        direct,
        expansion: sum,
        discrepancy: (direct - sum).norm(),
        log_coeffs,
        growth_c,
        growth_b,
        growth_residual,
        last_term,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parabola_extrapolation_is_exact_on_quadratics() {
        let h = [0.1, 0.05, 0.025];
        let y: Vec<f64> = h.iter().map(|x| 2.0 - 3.0 * x + 5.0 * x * x).collect();
        assert!((extrapolate_to_zero(&h, &y) - 2.0).abs() < 1e-12);
    }
}
