//! Invariant densities: the exact saltus series for tent maps and the Ulam
//! approximation for general maps.

use crate::error::{Error, Result};
use crate::maps::{critical_orbit, CriticalOrbit, MapFamily, UnimodalMap};
use crate::stepfn::ulam::{
    augmented_edges, leading_density, resolvent_solve, ulam_matrix, ResolventMethod, SpectralData,
    UlamOperator,
};
use num_complex::Complex64;
use crate::stepfn::{StepFunction, MERGE_TOL};
use serde::Serialize;

pub const DEFAULT_K: usize = 60;

#[derive(Debug, Clone, Serialize)]
pub struct InvariantDensity {
    pub sal: StepFunction,
    pub reg: StepFunction,
    pub s1: f64,
    pub k: usize,
    pub tail_bound: f64,
    /// Normalized jumps (c_k, s̄_k), k = 1..K, in orbit order.
    pub jumps: Vec<(f64, f64)>,
    /// False for Ulam densities, where sal/reg are not separated.
    pub decomposed: bool,
}

/// JSON sidecar of a density export.
#[derive(Debug, Clone, Serialize)]
pub struct DensitySidecar {
    pub s1: f64,
    #[serde(rename = "K")]
    pub k: usize,
    pub tail_bound: f64,
}

impl InvariantDensity {
    pub fn density(&self) -> StepFunction {
        if self.reg.is_zero() {
            self.sal.clone()
        } else {
            self.sal.add(&self.reg)
        }
    }

    pub fn integral(&self) -> f64 {
        self.sal.integral() + self.reg.integral()
    }

    pub fn sidecar(&self) -> DensitySidecar {
        DensitySidecar {
            s1: self.s1,
            k: self.k,
            tail_bound: self.tail_bound,
        }
    }
}

/// Σ w_k H_{u_k} built directly from its jumps; coinciding locations are summed.
pub fn heaviside_sum(jumps: &[(f64, f64)]) -> StepFunction {
    let mut js: Vec<(f64, f64)> = jumps.iter().copied().filter(|j| j.1 != 0.0).collect();
    if js.is_empty() {
        return StepFunction::zero();
    }
    js.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut merged: Vec<(f64, f64)> = Vec::with_capacity(js.len());
    for (u, w) in js {
        match merged.last_mut() {
            Some(last) if u - last.0 < MERGE_TOL => last.1 += w,
            _ => merged.push((u, w)),
        }
    }
    let total: f64 = merged.iter().map(|j| j.1).sum();
    let mut bp = Vec::with_capacity(merged.len() + 1);
    let mut vals = Vec::with_capacity(merged.len());
    let mut level = -total;
    if merged[0].0 > -1.0 {
        bp.push(-1.0);
        vals.push(level);
    }
    for (i, &(u, w)) in merged.iter().enumerate() {
        bp.push(u);
        level += w;
        if i + 1 < merged.len() {
            vals.push(level);
        }
    }
    StepFunction::new(bp, vals)
        .map(|s| s.simplified(0.0))
        .unwrap_or_default()
}

/// ρ = Σ_{k=1}^K s̄_k H_{c_k} with s_1 fixed by ∫ρ = 1.
pub fn saltus_density_tent(orbit: &CriticalOrbit, k: usize) -> Result<InvariantDensity> {
    if let Some(p) = orbit.periodic {
        if p.critical {
            return Err(Error::model(format!(
                "turning point is periodic (period {}); the saltus series is not implemented for this case",
                p.period
            )));
        }
    }
    let k = k.min(orbit.len());
    if k == 0 {
        return Err(Error::domain("empty orbit"));
    }
    let norm: f64 = (0..k)
        .map(|i| -orbit.sbar[i] * (orbit.points[i] + 1.0))
        .sum();
    if !(norm.abs() > 1e-14) {
        return Err(Error::numerical("degenerate saltus normalization", norm));
    }
    let s1 = 1.0 / norm;
    let jumps: Vec<(f64, f64)> = (0..k).map(|i| (orbit.points[i], s1 * orbit.sbar[i])).collect();
    let sal = heaviside_sum(&jumps);
    let lmin = orbit.lambda_min;
    let tail_bound = 2.0 * s1.abs() * lmin.powi(-(k as i32)) / (lmin - 1.0);
    Ok(InvariantDensity {
        sal,
        reg: StepFunction::zero(),
        s1,
        k,
        tail_bound,
        jumps,
        decomposed: true,
    })
}

/// Saltus density of a tent map given directly.
pub fn saltus_density_map(map: &UnimodalMap, k: usize) -> Result<InvariantDensity> {
    if map.tent_params().is_none() {
        return Err(Error::domain("saltus density requires a constant-slope tent"));
    }
    saltus_density_tent(&critical_orbit(map, k)?, k)
}

/// Saltus density of f_t for a tent family.
pub fn saltus_density_family(family: &MapFamily, t: f64, k: usize) -> Result<InvariantDensity> {
    saltus_density_map(&family.at(t)?, k)
}

/// Leading Ulam density of f_t on n cells (plus critical-orbit edges).
pub fn invariant_density_ulam(family: &MapFamily, t: f64, n: usize) -> Result<InvariantDensity> {
    Ok(invariant_density_ulam_spectral(family, t, n)?.0)
}

pub fn invariant_density_ulam_spectral(
    family: &MapFamily,
    t: f64,
    n: usize,
) -> Result<(InvariantDensity, SpectralData)> {
    let p = ulam_matrix(&family.at(t)?, n)?;
    let spec = leading_density(&p)?;
    let rho = StepFunction::from_cells(p.edges(), &spec.rho_vec)?;
    Ok((
        InvariantDensity {
            sal: rho,
            reg: StepFunction::zero(),
            s1: f64::NAN,
            k: 0,
            tail_bound: f64::NAN,
            jumps: Vec::new(),
            decomposed: false,
        },
        spec,
    ))
}

/// Residual of ρ_t − ρ₀ = (I − P_t)^{-1}(P_t − P₀)ρ₀ on n uniform cells.
#[derive(Debug, Clone, Serialize)]
pub struct KeyIdentity {
    pub n: usize,
    pub t: f64,
    /// ‖exact(ρ_t − ρ₀) − u_n‖₁ with u_n the Ulam resolvent solution.
    pub residual: f64,
    /// ‖u_n − u_{2n}‖₁ with u_{2n} aggregated to n cells.
    pub refinement: f64,
}

fn key_solution(family: &MapFamily, t: f64, rho0: &StepFunction, n: usize) -> Result<Vec<f64>> {
    let edges = augmented_edges(n, &[family.base().c()]);
    let p0 = UlamOperator::with_edges(family.base(), edges.clone());
    let pt = UlamOperator::with_edges(&family.at(t)?, edges);
    let m0 = p0.masses_of(rho0);
    let a = pt.push(&m0);
    let b = p0.push(&m0);
    let mut w: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
    let mu = w.iter().sum::<f64>() / n as f64;
    w.iter_mut().for_each(|x| *x -= mu);
    let wc: Vec<Complex64> = w.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    let sol = resolvent_solve(&pt, Complex64::new(1.0, 0.0), &wc, ResolventMethod::Direct)?;
    Ok(sol.u.iter().map(|x| x.re).collect())
}

/// Key identity on n cells against the exact saltus difference, with the
/// refinement estimate from 2n cells (tent families, even n).
pub fn key_identity_check(family: &MapFamily, t: f64, n: usize, k: usize) -> Result<KeyIdentity> {
    if !family.is_tent() || !n.is_multiple_of(2) {
        return Err(Error::domain("key identity check needs a tent family and an even cell count"));
    }
    let rho0 = saltus_density_map(family.base(), k)?.sal;
    let rhot = saltus_density_family(family, t, k)?.sal;
    let un = key_solution(family, t, &rho0, n)?;
    let u2 = key_solution(family, t, &rho0, 2 * n)?;
    let edges = augmented_edges(n, &[family.base().c()]);
    if edges.len() != n + 1 {
        return Err(Error::domain("turning point must lie on the uniform grid"));
    }
    let exact = rhot.sub(&rho0).cell_masses(&edges);
    let residual = exact.iter().zip(&un).map(|(a, b)| (a - b).abs()).sum();
    let refinement = un
        .iter()
        .enumerate()
        .map(|(i, a)| (a - u2[2 * i] - u2[2 * i + 1]).abs())
        .sum();
    Ok(KeyIdentity {
        n,
        t,
        residual,
        refinement,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stepfn::transfer_tent;

    #[test]
    fn normalized_and_supported_on_core() {
        let f = UnimodalMap::tent(0.8, 1.8).unwrap();
        let d = saltus_density_map(&f, 60).unwrap();
        assert!((d.integral() - 1.0).abs() < 1e-12);
        let (_, b) = d.sal.support().unwrap();
        assert!((b - 0.8).abs() < 1e-12);
        assert!(d.sal.eval(-0.9).abs() < 1e-12);
        assert!(d.sal.eval(-0.64 + 1e-9) > 0.1);
        assert!(d.s1 < 0.0);
        assert!(d.sal.eval(0.8 - 1e-9) > 0.0);
        assert!((d.sal.eval(0.8 - 1e-9) + d.jumps[0].1).abs() < 1e-12);
    }

    #[test]
    fn fixed_point_residual() {
        let f = UnimodalMap::tent(0.85, 1.8).unwrap();
        let d = saltus_density_map(&f, 60).unwrap();
        let r = transfer_tent(0.85, 1.8, &d.sal).l1_distance(&d.sal);
        assert!(r < d.tail_bound + 1e-10, "{r}");
    }

    #[test]
    fn heaviside_sum_single() {
        let h = heaviside_sum(&[(0.3, 2.0)]);
        assert_eq!(h.breakpoints(), &[-1.0, 0.3]);
        assert_eq!(h.values(), &[-2.0]);
    }
}
