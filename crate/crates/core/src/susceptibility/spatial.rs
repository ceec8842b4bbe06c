//! Response susceptibility from the spatial Marchaud derivative of X₀ρ₀.
//!
//! X₀ρ₀ = Σ_b [J⁰_b θ(x-b) + J¹_b (x-b)θ(x-b)] for affine X₀. With cutoff E
//! (ε₁ for the truncated kernel, 4 for the full kernel, which is exact for
//! x ∈ [-1, 1]) each term has a closed-form derivative; cell averages on a
//! graded partition are pushed by the exact tent transfer operator.

use super::engine::{propagate, EngineConfig, ABS_FLOOR};
use super::series::{SusceptibilitySeries, Variant};
use crate::density::saltus_density_map;
use crate::error::{Error, Result};
use crate::maps::MapFamily;
use crate::marchaud::{KernelVariant, MarchaudKernel};
use crate::observable::Observable;
use crate::quad::KronrodPanel;
use crate::stepfn::{integrate_against, transfer_tent, StepFunction};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct SpatialConfig {
    /// Uniform cells before grading.
    pub cells: usize,
    pub grade_levels: usize,
    pub grade_q: f64,
}

impl Default for SpatialConfig {
    fn default() -> Self {
        SpatialConfig {
            cells: 64000,
            grade_levels: 30,
            grade_q: 0.5,
        }
    }
}

struct Terms {
    eta: f64,
    cutoff: f64,
    pf: f64,
    /// (b, J⁰_b, J¹_b)
    jumps: Vec<(f64, f64, f64)>,
}

impl Terms {
    // ∫_{lo}^{hi} |y|^{-η} 1_{|y|<E} dy
    fn power_integral(&self, lo: f64, hi: f64) -> f64 {
        let e = self.cutoff;
        let g = |y: f64| y.signum() * y.abs().min(e).powf(1.0 - self.eta) / (1.0 - self.eta);
        g(hi) - g(lo)
    }

    fn inside_len(&self, lo: f64, hi: f64) -> f64 {
        (hi.min(self.cutoff) - lo.max(-self.cutoff)).max(0.0)
    }

    // derivative of (x-b)_+ at offset y, without the prefactor
    fn ramp(&self, y: f64) -> f64 {
        let (e, eta) = (self.cutoff, self.eta);
        let p = |v: f64| v.powf(1.0 - eta) / (1.0 - eta);
        if y >= e {
            2.0 * p(e)
        } else if y >= 0.0 {
            let a = if y > 0.0 { y * (y.powf(-eta) - e.powf(-eta)) / eta } else { 0.0 };
            2.0 * p(y) + a + p(e) - p(y)
        } else if y > -e {
            let ay = -y;
            y * (ay.powf(-eta) - e.powf(-eta)) / eta + p(e) - p(ay)
        } else {
            0.0
        }
    }

    /// ∫_a^b M_x(X₀ρ₀) dx.
    fn cell_integral(&self, a: f64, b: f64) -> f64 {
        let mut s = 0.0;
        for &(u, j0, j1) in &self.jumps {
            let (lo, hi) = (a - u, b - u);
            if j0 != 0.0 {
                let e_term = self.cutoff.powf(-self.eta) * self.inside_len(lo, hi);
                s += j0 * (self.power_integral(lo, hi) - e_term) / self.eta;
            }
            if j1 != 0.0 && hi > -self.cutoff {
                let p = KronrodPanel::new(lo, hi);
                s += j1 * (0..15).map(|i| p.kronrod[i] * self.ramp(p.nodes[i])).sum::<f64>();
            }
        }
        self.pf * s
    }
}

fn affine_x0(family: &MapFamily) -> Result<(f64, f64)> {
    let x0 = family
        .x0()
        .ok_or_else(|| Error::domain("family has no X₀ field"))?;
    let (a, m, b) = (x0(-1.0), x0(0.0), x0(1.0));
    if (0.5 * (a + b) - m).abs() > 1e-12 * (1.0 + m.abs()) {
        return Err(Error::domain("response susceptibility needs an affine X₀"));
    }
    Ok((m, 0.5 * (b - a)))
}

/// Cell averages of M_x(X₀ρ₀) on a graded partition, as a step function.
pub fn spatial_source(
    family: &MapFamily,
    kernel: &MarchaudKernel,
    density_k: usize,
    cfg: &SpatialConfig,
) -> Result<(StepFunction, f64)> {
    if !family.is_tent() {
        return Err(Error::domain("response susceptibility is implemented for tent families"));
    }
    if kernel.eta.im != 0.0 {
        return Err(Error::domain("response susceptibility needs real eta"));
    }
    let cutoff = match kernel.variant {
        KernelVariant::Full => 4.0,
        KernelVariant::Truncated { eps1 } => eps1,
        _ => return Err(Error::domain("response susceptibility needs a full or truncated kernel")),
    };
    let rho = saltus_density_map(family.base(), density_k)?.sal;
    let (x0c, x0s) = affine_x0(family)?;
    let jumps: Vec<(f64, f64, f64)> = rho
        .jumps()
        .into_iter()
        .map(|(b, j)| (b, j * (x0c + x0s * b), j * x0s))
        .collect();
    let terms = Terms {
        eta: kernel.eta.re,
        cutoff,
        pf: kernel.prefactor().re,
        jumps,
    };

    let h = 2.0 / cfg.cells as f64;
    let mut edges: Vec<f64> = (0..=cfg.cells).map(|i| -1.0 + i as f64 * h).collect();
    for &(u, _, _) in &terms.jumps {
        edges.push(u);
        edges.push(u - cutoff);
        edges.push(u + cutoff);
        let mut d = h;
        for _ in 0..cfg.grade_levels {
            edges.push(u - d);
            edges.push(u + d);
            d *= cfg.grade_q;
        }
    }
    edges.retain(|x| (-1.0..=1.0).contains(x));
    edges.sort_by(f64::total_cmp);
    edges.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    let vals: Vec<f64> = edges
        .windows(2)
        .map(|w| terms.cell_integral(w[0], w[1]) / (w[1] - w[0]))
        .collect();
    let src = StepFunction::from_cells(&edges, &vals)?;
    let mass = src.integral();
    // the truncated derivative of a function supported inside [-1+E, 1-E] has zero mean
    let (lo, hi) = rho.support().unwrap_or((0.0, 0.0));
    if matches!(kernel.variant, KernelVariant::Truncated { .. }) && lo - cutoff > -1.0 && hi + cutoff < 1.0 {
        let fixed = src.combine(1.0, &rho, -mass / rho.integral());
        return Ok((fixed, mass));
    }
    Ok((src, mass))
}

/// Ψ^rsp coefficients b_k = -∫ φ L₀^k M_x(X₀ρ₀) and resummed values at zs.
pub fn response_susceptibility_tent(
    family: &MapFamily,
    phi: &Observable,
    kernel: &MarchaudKernel,
    zs: &[Complex64],
    cfg: &EngineConfig,
    spatial: &SpatialConfig,
) -> Result<(SusceptibilitySeries, Vec<Complex64>)> {
    let (src, mass) = spatial_source(family, kernel, cfg.density_k, spatial)?;
    let scale = src.l1_norm();
    if zs.iter().any(|z| z.norm() >= 1.0) && mass.abs() > 1e-8 * scale.max(1e-300) {
        return Err(Error::Singular(format!(
            "spatial derivative has mass {mass:e} on I; the series diverges at |z| >= 1"
        )));
    }
    let (p0, s0) = family.tent_at(0.0).unwrap();
    let rho = saltus_density_map(family.base(), cfg.density_k)?.sal;
    let rho_mass = rho.integral();
    let project_mean = matches!(kernel.variant, KernelVariant::Truncated { .. });
    let step = |g: &StepFunction| {
        let h = transfer_tent(p0, s0, g);
        let mu = h.integral();
        if project_mean && mu != 0.0 {
            h.combine(1.0, &rho, -mu / rho_mass)
        } else {
            h
        }
    };
    let ch = propagate(
        src,
        step,
        |g| integrate_against(phi, g).map(|v| -v),
        |g| g.l1_norm(),
        cfg.k_max,
        zs,
        cfg.neumann_tol.max(ABS_FLOOR),
        cfg.max_terms,
    )?;
    let k = cfg.k_max;
    let series = SusceptibilitySeries::new(
        Variant::Response,
        super::engine::kernel_label(kernel),
        ch[..=k].to_vec(),
        vec![0.0; k + 1],
    );
    Ok((series, ch[k + 1..].to_vec()))
}
