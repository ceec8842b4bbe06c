//! Full and frozen susceptibility series: per t-node propagation of
//! (L_t - L₀)ρ₀, then kernel integration of the node values.

use super::nodes::{NodeSet, TGrid};
use super::series::{SusceptibilitySeries, Variant};
use crate::density::saltus_density_map;
use crate::error::{Error, Result};
use crate::maps::{FamilyKind, MapFamily};
use crate::marchaud::{MarchaudKernel, MarchaudSide};
use crate::observable::Observable;
use crate::stepfn::ulam::{
    map_edges, resolvent_solve, stationary_mass, ResolventMethod, UlamOperator,
};
use crate::stepfn::{integrate_against, transfer_tent, StepFunction};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct EngineConfig {
    /// Geometric panels per side of the t-grid.
    pub panels: usize,
    pub q: f64,
    pub k_max: usize,
    /// Saltus truncation for ρ₀.
    pub density_k: usize,
    /// Relative stopping threshold of the resummation at fixed t.
    pub neumann_tol: f64,
    pub max_terms: usize,
    /// Ulam cells; `None` propagates exact step functions (tents only).
    pub ulam_n: Option<usize>,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            panels: 60,
            q: 0.8,
            k_max: 30,
            density_k: 60,
            neumann_tol: 1e-13,
            max_terms: 5000,
            ulam_n: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Propagation {
    /// L_t^k (L_t - L₀) ρ₀
    Full,
    /// L₀^k (L_t - L₀) ρ₀
    Frozen,
}

impl Propagation {
    pub fn of(variant: Variant) -> Result<Self> {
        match variant {
            Variant::Full | Variant::Generalized => Ok(Propagation::Full),
            Variant::Frozen => Ok(Propagation::Frozen),
            other => Err(Error::domain(format!("{other:?} is not a propagated variant"))),
        }
    }
}

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Absolute L¹ level below which propagated differences are round-off.
pub(crate) const ABS_FLOOR: f64 = 1e-14;

/// Channels [∫φ h_0, …, ∫φ h_K, Σ_k z_1^k ∫φ h_k, …] with h_{k+1} = step(h_k).
#[allow(clippy::too_many_arguments)]
pub(crate) fn propagate<V, S, P, N>(
    h0: V,
    step: S,
    pair: P,
    norm: N,
    k_max: usize,
    zs: &[Complex64],
    tol: f64,
    max_terms: usize,
) -> Result<Vec<Complex64>>
where
    S: Fn(&V) -> V,
    P: Fn(&V) -> Result<f64>,
    N: Fn(&V) -> f64,
{
    let mut out = vec![c(0.0); k_max + 1 + zs.len()];
    let n0 = norm(&h0);
    if n0 == 0.0 {
        return Ok(out);
    }
    let mut h = h0;
    let mut zk: Vec<Complex64> = vec![c(1.0); zs.len()];
    for k in 0..max_terms {
        let v = pair(&h)?;
        if k <= k_max {
            out[k] = c(v);
        }
        for (j, z) in zs.iter().enumerate() {
            out[k_max + 1 + j] += zk[j] * v;
            zk[j] *= z;
        }
        let nh = norm(&h);
        let done = zs
            .iter()
            .all(|z| z.norm().powi(k as i32) * nh <= tol * n0 + ABS_FLOOR);
        if k >= k_max && done {
            return Ok(out);
        }
        h = step(&h);
    }
    if zs.is_empty() {
        return Ok(out);
    }
    Err(Error::numerical(
        "resummation at fixed t did not converge",
        zs.iter().map(|z| z.norm()).fold(0.0, f64::max),
    ))
}

/// Below this |t| the frozen fixed-slope source is tracked as tiny intervals.
const DEEP_BELOW: f64 = 1e-8;
/// Length at which a tracked interval joins the step-function part.
const DEEP_MERGE: f64 = 1e-7;

/// w · 1 on the interval between `a` and `a + len`.
#[derive(Debug, Clone, Copy)]
struct Piece {
    a: f64,
    len: f64,
    w: f64,
}

/// Step function plus intervals too short to resolve next to O(1) breakpoints.
struct Mixed {
    step: StepFunction,
    pieces: Vec<Piece>,
}

impl Mixed {
    fn piece_mass(&self) -> f64 {
        self.pieces.iter().map(|p| p.w * p.len.abs()).sum()
    }
}

fn push_piece(peak: f64, slope: f64, p: Piece, out: &mut Vec<Piece>) {
    let b = p.a + p.len;
    if p.a * b < 0.0 {
        push_piece(peak, slope, Piece { a: p.a, len: -p.a, w: p.w }, out);
        push_piece(peak, slope, Piece { a: 0.0, len: b, w: p.w }, out);
        return;
    }
    let side = (p.a + 0.5 * p.len).signum();
    out.push(Piece {
        a: peak - slope * p.a.abs(),
        len: -slope * side * p.len,
        w: p.w / slope,
    });
}

/// Frozen channels at a tiny translation s, where (L_s - L₀)ρ₀ = L₀ρ₀(· - s) - L₀ρ₀.
#[allow(clippy::too_many_arguments)]
fn deep_frozen(
    peak: f64,
    slope: f64,
    l0rho: &StepFunction,
    rho0: &StepFunction,
    s: f64,
    phi: &Observable,
    k_max: usize,
    zs: &[Complex64],
    cfg: &EngineConfig,
) -> Result<Vec<Complex64>> {
    let rho_mass = rho0.integral();
    let pieces = l0rho
        .jumps()
        .into_iter()
        .map(|(u, j)| Piece {
            a: u,
            len: s,
            // scaled by 1/|s| so the absolute floor of the resummation stays meaningful
            w: -j * s.signum() / s.abs(),
        })
        .collect();
    let h0 = Mixed {
        step: StepFunction::zero(),
        pieces,
    };
    let step = |m: &Mixed| {
        let mut moved = Vec::with_capacity(m.pieces.len() + 2);
        for &p in &m.pieces {
            push_piece(peak, slope, p, &mut moved);
        }
        let mut st = transfer_tent(peak, slope, &m.step);
        let mut keep = Vec::with_capacity(moved.len());
        for p in moved {
            if p.len.abs() >= DEEP_MERGE {
                let (lo, hi) = if p.len > 0.0 { (p.a, p.a + p.len) } else { (p.a + p.len, p.a) };
                st = st.add(&StepFunction::indicator(lo, hi, p.w));
            } else {
                keep.push(p);
            }
        }
        let out = Mixed { step: st, pieces: keep };
        let mu = out.step.integral() + out.piece_mass();
        if mu == 0.0 {
            out
        } else {
            Mixed {
                step: out.step.combine(1.0, rho0, -mu / rho_mass),
                pieces: out.pieces,
            }
        }
    };
    let pair = |m: &Mixed| -> Result<f64> {
        let mut v = integrate_against(phi, &m.step)?;
        for p in &m.pieces {
            v += p.w * p.len.abs() * phi.eval(p.a + 0.5 * p.len);
        }
        Ok(v)
    };
    let norm = |m: &Mixed| m.step.l1_norm() + m.pieces.iter().map(|p| (p.w * p.len).abs()).sum::<f64>();
    let ch = propagate(h0, step, pair, norm, k_max, zs, cfg.neumann_tol, cfg.max_terms)?;
    Ok(ch.into_iter().map(|v| v * s.abs()).collect())
}

/// Shared inputs for node evaluation.
enum Repr {
    Exact {
        rho0: StepFunction,
    },
    Ulam {
        edges: Vec<f64>,
        m0: Vec<f64>,
        phibar: Vec<f64>,
        p0: UlamOperator,
    },
}

pub(crate) fn cell_averages(phi: &Observable, edges: &[f64]) -> Result<Vec<f64>> {
    edges
        .windows(2)
        .map(|w| Ok(phi.integral(w[0], w[1])? / (w[1] - w[0])))
        .collect()
}

fn build_repr(family: &MapFamily, phi: &Observable, cfg: &EngineConfig) -> Result<Repr> {
    match cfg.ulam_n {
        None if family.is_tent() => Ok(Repr::Exact {
            rho0: saltus_density_map(family.base(), cfg.density_k)?.sal,
        }),
        None => Err(Error::domain("exact propagation needs a tent family; set ulam_n")),
        Some(n) => {
            let edges = map_edges(family.base(), n);
            let p0 = UlamOperator::with_edges(family.base(), edges.clone());
            let (m0, _, _) = stationary_mass(&p0, 1e-14, 100_000)?;
            Ok(Repr::Ulam {
                phibar: cell_averages(phi, &edges)?,
                edges,
                m0,
                p0,
            })
        }
    }
}

/// Node values of the full or frozen series for a family and observable.
#[derive(Debug, Clone)]
pub struct SeriesNodes {
    pub nodes: NodeSet,
    pub k_max: usize,
    pub zs: Vec<Complex64>,
    pub propagation: Propagation,
}

impl SeriesNodes {
    pub fn build(
        family: &MapFamily,
        phi: &Observable,
        propagation: Propagation,
        cfg: &EngineConfig,
        zs: &[Complex64],
    ) -> Result<Self> {
        let grid = TGrid::new(family.eps1(), cfg.q, cfg.panels)?;
        let repr = build_repr(family, phi, cfg)?;
        let k_max = cfg.k_max;
        let nodes = match &repr {
            Repr::Exact { rho0 } => {
                let (p0, s0) = family.tent_at(0.0).unwrap();
                let l0rho = transfer_tent(p0, s0, rho0);
                let rho_mass = rho0.integral();
                // breakpoint round-off leaves a non-decaying mean; remove it along ρ₀
                let project = |h: StepFunction| {
                    let mu = h.integral();
                    if mu == 0.0 {
                        h
                    } else {
                        h.combine(1.0, rho0, -mu / rho_mass)
                    }
                };
                let translation = family.kind() == FamilyKind::TentFixedSlope;
                NodeSet::evaluate(grid, |s| {
                    if translation && propagation == Propagation::Frozen && s.abs() < DEEP_BELOW {
                        return deep_frozen(p0, s0, &l0rho, rho0, s, phi, k_max, zs, cfg);
                    }
                    let (ps, ss) = family.tent_at(s).unwrap();
                    let h = project(transfer_tent(ps, ss, rho0).sub(&l0rho));
                    let (pk, sk) = match propagation {
                        Propagation::Full => (ps, ss),
                        Propagation::Frozen => (p0, s0),
                    };
                    propagate(
                        h,
                        |g| project(transfer_tent(pk, sk, g)),
                        |g| integrate_against(phi, g),
                        |g| g.l1_norm(),
                        k_max,
                        zs,
                        cfg.neumann_tol,
                        cfg.max_terms,
                    )
                })?
            }
            Repr::Ulam { edges, m0, phibar, p0 } => NodeSet::evaluate(grid, |s| {
                let ps = UlamOperator::with_edges(&family.at(s)?, edges.clone());
                let a = ps.push(m0);
                let b = p0.push(m0);
                let project = |mut h: Vec<f64>| {
                    let mu: f64 = h.iter().sum();
                    h.iter_mut().zip(m0).for_each(|(x, m)| *x -= mu * m);
                    h
                };
                let h = project(a.iter().zip(&b).map(|(x, y)| x - y).collect());
                let op = match propagation {
                    Propagation::Full => &ps,
                    Propagation::Frozen => p0,
                };
                propagate(
                    h,
                    |g| project(op.push(g)),
                    |g| Ok(g.iter().zip(phibar).map(|(m, f)| m * f).sum()),
                    |g| g.iter().map(|x| x.abs()).sum(),
                    k_max,
                    zs,
                    cfg.neumann_tol,
                    cfg.max_terms,
                )
            })?,
        };
        Ok(SeriesNodes {
            nodes,
            k_max,
            zs: zs.to_vec(),
            propagation,
        })
    }

    /// Coefficients a_0..a_K for a kernel.
    pub fn series(&self, kernel: &MarchaudKernel, side: MarchaudSide) -> Result<SusceptibilitySeries> {
        let (v, e) = self.nodes.integrate(kernel, side)?;
        let variant = match self.propagation {
            Propagation::Frozen => Variant::Frozen,
            Propagation::Full if kernel.is_weighted() => Variant::Generalized,
            Propagation::Full => Variant::Full,
        };
        Ok(SusceptibilitySeries::new(
            variant,
            kernel_label(kernel),
            v[..=self.k_max].to_vec(),
            e[..=self.k_max].to_vec(),
        ))
    }

    /// Ψ(z) for every z given at build time, resummed at fixed t.
    pub fn resummed(&self, kernel: &MarchaudKernel, side: MarchaudSide) -> Result<Vec<(Complex64, f64)>> {
        let (v, e) = self.nodes.integrate(kernel, side)?;
        Ok((0..self.zs.len())
            .map(|j| (v[self.k_max + 1 + j], e[self.k_max + 1 + j]))
            .collect())
    }
}

pub fn kernel_label(k: &MarchaudKernel) -> String {
    format!("{:?}(eta={})", k.variant, k.eta)
}

/// Coefficient series of the full, frozen or generalized variant.
pub fn susceptibility_series(
    family: &MapFamily,
    phi: &Observable,
    kernel: &MarchaudKernel,
    variant: Variant,
    cfg: &EngineConfig,
) -> Result<SusceptibilitySeries> {
    SeriesNodes::build(family, phi, Propagation::of(variant)?, cfg, &[])?.series(kernel, MarchaudSide::TwoSided)
}

/// Single coefficient a_k with its quadrature error.
pub fn susceptibility_coefficient(
    family: &MapFamily,
    phi: &Observable,
    k: usize,
    kernel: &MarchaudKernel,
    variant: Variant,
    cfg: &EngineConfig,
) -> Result<(Complex64, f64)> {
    let cfg = EngineConfig {
        k_max: k,
        ..cfg.clone()
    };
    let s = susceptibility_series(family, phi, kernel, variant, &cfg)?;
    Ok((s.coeffs[k], s.errors[k]))
}

/// Ψ(η, z) summed to convergence at every t-node before the kernel integral.
pub fn susceptibility_at(
    family: &MapFamily,
    phi: &Observable,
    kernel: &MarchaudKernel,
    variant: Variant,
    z: Complex64,
    cfg: &EngineConfig,
) -> Result<(Complex64, f64)> {
    let cfg = EngineConfig {
        k_max: 0,
        ..cfg.clone()
    };
    let n = SeriesNodes::build(family, phi, Propagation::of(variant)?, &cfg, &[z])?;
    Ok(n.resummed(kernel, MarchaudSide::TwoSided)?[0])
}

#[derive(Debug, Clone, Serialize)]
pub struct FrozenResolvent {
    pub value: Complex64,
    /// Σ_{k≤K} z^k ∫φ P₀^k w, summed until the terms fall below 1e-16.
    pub series_sum: Complex64,
    pub series_terms: usize,
    /// Partial sum with the configured K.
    pub partial_sum_kmax: Complex64,
    pub w_mass: f64,
    pub w_l1: f64,
    pub w_error: f64,
    pub cells: usize,
}

/// Cell masses of w = M^η(L_t ρ₀)|_{t=0} on an Ulam grid, with quadrature error.
pub fn frozen_source_cells(
    family: &MapFamily,
    kernel: &MarchaudKernel,
    p0: &UlamOperator,
    cfg: &EngineConfig,
) -> Result<(Vec<Complex64>, f64)> {
    let grid = TGrid::new(family.eps1(), cfg.q, cfg.panels)?;
    let edges = p0.edges().to_vec();
    let nodes = if family.is_tent() && cfg.ulam_n.is_none() {
        let rho0 = saltus_density_map(family.base(), cfg.density_k)?.sal;
        let (p, s) = family.tent_at(0.0).unwrap();
        let l0rho = transfer_tent(p, s, &rho0);
        NodeSet::evaluate(grid, |t| {
            let (pt, st) = family.tent_at(t).unwrap();
            let h = transfer_tent(pt, st, &rho0).sub(&l0rho);
            Ok(h.cell_masses(&edges).into_iter().map(c).collect())
        })?
    } else {
        let (m0, _, _) = stationary_mass(p0, 1e-14, 100_000)?;
        let b = p0.push(&m0);
        NodeSet::evaluate(grid, |t| {
            let pt = UlamOperator::with_edges(&family.at(t)?, edges.clone());
            Ok(pt.push(&m0).iter().zip(&b).map(|(x, y)| c(x - y)).collect())
        })?
    };
    let (w, e) = nodes.integrate(kernel, MarchaudSide::TwoSided)?;
    Ok((w, e.iter().sum()))
}

/// ∫ φ (I - z L₀)^{-1} w dx on the Ulam grid of f₀ with n cells.
pub fn frozen_via_resolvent(
    family: &MapFamily,
    phi: &Observable,
    kernel: &MarchaudKernel,
    z: Complex64,
    n: usize,
    cfg: &EngineConfig,
) -> Result<FrozenResolvent> {
    if z.norm() > 1.0 + 1e-12 {
        return Err(Error::domain("frozen resolvent needs |z| <= 1"));
    }
    let p0 = crate::stepfn::ulam::ulam_matrix(family.base(), n)?;
    let (w, w_error) = frozen_source_cells(family, kernel, &p0, cfg)?;
    let mass: Complex64 = w.iter().sum();
    let l1: f64 = w.iter().map(|x| x.norm()).sum();
    if mass.norm() > 1e-8 * l1.max(1e-300) {
        return Err(Error::numerical(
            "source w has nonzero mean: t-quadrature failure",
            mass.norm(),
        ));
    }
    let phibar = cell_averages(phi, p0.edges())?;
    let pair = |u: &[Complex64]| -> Complex64 { u.iter().zip(&phibar).map(|(m, f)| m * f).sum() };
    let method = if n <= 1200 {
        ResolventMethod::Direct
    } else {
        ResolventMethod::Neumann
    };
    let sol = resolvent_solve(&p0, z, &w, method)?;
    let value = pair(&sol.u);

    let mut term = w.clone();
    let mut zk = c(1.0);
    let mut sum = c(0.0);
    let mut partial = c(0.0);
    let mut terms = 0;
    for k in 0..100_000 {
        let v = zk * pair(&term);
        sum += v;
        if k <= cfg.k_max {
            partial = sum;
        }
        terms = k + 1;
        let tn: f64 = term.iter().map(|x| x.norm()).sum::<f64>() * zk.norm();
        if k >= cfg.k_max && tn <= 1e-14 * l1 {
            break;
        }
        term = p0.push_complex(&term);
        zk *= z;
    }
    Ok(FrozenResolvent {
        value,
        series_sum: sum,
        series_terms: terms,
        partial_sum_kmax: partial,
        w_mass: mass.norm(),
        w_l1: l1,
        w_error,
        cells: p0.n(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::make_tent_fixed_slope;

    fn quick() -> EngineConfig {
        EngineConfig {
            panels: 30,
            k_max: 12,
            ..Default::default()
        }
    }

    #[test]
    fn constant_observable_gives_zero() {
        let fam = make_tent_fixed_slope(1.8, 0.05, 0.01).unwrap();
        let k = MarchaudKernel::truncated_real(0.5, 0.01).unwrap();
        for v in [Variant::Full, Variant::Frozen] {
            let s = susceptibility_series(&fam, &Observable::constant(1.0), &k, v, &quick()).unwrap();
            assert!(s.coeffs.iter().all(|a| a.norm() < 1e-10));
        }
    }

    #[test]
    fn full_and_frozen_agree_at_k0() {
        let fam = make_tent_fixed_slope(1.8, 0.05, 0.01).unwrap();
        let k = MarchaudKernel::truncated_real(0.5, 0.01).unwrap();
        let phi = Observable::identity();
        let a = susceptibility_series(&fam, &phi, &k, Variant::Full, &quick()).unwrap();
        let b = susceptibility_series(&fam, &phi, &k, Variant::Frozen, &quick()).unwrap();
        assert_eq!(a.coeffs[0], b.coeffs[0]);
    }
}
