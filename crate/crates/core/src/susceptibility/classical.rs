//! Classical susceptibility of tent families in its two forms:
//! the decorrelation sum −Σ z^k ∫(φ∘f₀^k) d[(X₀ρ₀)'] and the sum
//! Σ z^k ∫(φ∘f₀^k)' X₀ρ₀ obtained by integrating by parts.
//!
//! (X₀ρ₀)' has atoms w_j = s̄_j X₀(c_j) at the postcritical points and the
//! absolutely continuous part X₀'ρ₀. Regrouping the atoms along the orbit gives
//! Σ_m φ(c_m) S_m(z) with S_m(z) = Σ_{j≤m} w_j z^{m-j}. At z = 1 the observable
//! is centered so both parts converge separately.

use crate::cohomology::alpha_series;
use crate::density::saltus_density_map;
use crate::error::{Error, Result};
use crate::maps::{MapFamily, UnimodalMap};
use crate::observable::Observable;
use crate::stepfn::{integrate_against, twisted_transfer_tent, StepFunction};
use num_complex::Complex64;
use serde::Serialize;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ClassicalValue {
    pub value: Complex64,
    /// Contribution of the orbit atoms.
    pub atomic: Complex64,
    /// Contribution of X₀'ρ₀.
    pub ac: Complex64,
    pub tail_bound: f64,
    pub orbit_terms: usize,
}

/// Atoms (c_j, s̄_j X₀(c_j)) and the constant X₀' of an affine field.
struct Atoms {
    points: Vec<f64>,
    weights: Vec<f64>,
    sbar: Vec<f64>,
    x0_slope: f64,
    rho: StepFunction,
    lambda_min: f64,
}

fn atoms(family: &MapFamily, k: usize) -> Result<Atoms> {
    if !family.is_tent() {
        return Err(Error::domain("classical susceptibility is implemented for tent families"));
    }
    let x0 = family
        .x0()
        .ok_or_else(|| Error::domain("family has no X₀ field"))?;
    let (a, m, b) = (x0(-1.0), x0(0.0), x0(1.0));
    if (0.5 * (a + b) - m).abs() > 1e-12 * (1.0 + m.abs()) {
        return Err(Error::domain("classical susceptibility needs an affine X₀"));
    }
    let dens = saltus_density_map(family.base(), k)?;
    let (points, sbar): (Vec<f64>, Vec<f64>) = dens.jumps.iter().copied().unzip();
    let weights = points.iter().zip(&sbar).map(|(&c, &s)| s * x0(c)).collect();
    Ok(Atoms {
        points,
        weights,
        sbar,
        x0_slope: 0.5 * (b - a),
        rho: dens.sal,
        lambda_min: family.base().slope_range().0,
    })
}

/// Decorrelation form of the classical susceptibility at z (|z| ≤ 1).
pub fn classical_susceptibility(
    family: &MapFamily,
    phi: &Observable,
    z: Complex64,
    k: usize,
) -> Result<ClassicalValue> {
    if z.norm() > 1.0 + 1e-12 {
        return Err(Error::domain("classical susceptibility is evaluated for |z| <= 1"));
    }
    let at = atoms(family, k)?;
    let r0 = integrate_against(phi, &at.rho)?;
    let at_one = (z - 1.0).norm() < 1e-14;
    let shift = if at_one { r0 } else { 0.0 };
    let mut s = Complex64::new(0.0, 0.0);
    let mut atomic = Complex64::new(0.0, 0.0);
    for (&c, &w) in at.points.iter().zip(&at.weights) {
        s = s * z + w;
        atomic += s * (phi.eval(c) - shift);
    }
    let total_w: f64 = at.weights.iter().sum();
    if at_one && total_w.abs() > 1e-8 {
        return Err(Error::Singular(format!(
            "perturbation is transversal (orbit atom mass {total_w:e}); no classical response at z = 1"
        )));
    }
    // X₀'ρ₀ is a multiple of the invariant density
    let ac = if at_one {
        Complex64::new(0.0, 0.0)
    } else {
        at.x0_slope * r0 / (Complex64::new(1.0, 0.0) - z)
    };
    let sup = at.weights.iter().fold(0.0f64, |m, w| m.max(w.abs()));
    let phi_sup = (0..=200).map(|i| phi.eval(-1.0 + i as f64 / 100.0).abs()).fold(0.0, f64::max);
    let tail_bound = (phi_sup + shift.abs()) * sup * at.lambda_min.powi(-(at.points.len() as i32))
        / (1.0 - z.norm() / at.lambda_min).max(1e-3)
        * at.lambda_min
        / (at.lambda_min - 1.0);
    Ok(ClassicalValue {
        value: -(atomic + ac),
        atomic: -atomic,
        ac: -ac,
        tail_bound,
        orbit_terms: at.points.len(),
    })
}

/// Integration-by-parts form Σ z^k ∫ φ' L̃^k(X₀ρ₀) for the fixed-slope tent
/// (X₀ ≡ 1), with L̃ the sign-twisted transfer. Converges for |z| < 1/slope.
pub fn classical_lrf(
    family: &MapFamily,
    phi: &Observable,
    z: Complex64,
    k: usize,
    tol: f64,
    max_terms: usize,
) -> Result<ClassicalValue> {
    let at = atoms(family, k)?;
    if at.x0_slope != 0.0 {
        return Err(Error::domain("the twisted-transfer form needs a constant X₀"));
    }
    let (peak, slope) = family.tent_at(0.0).unwrap();
    if z.norm() * slope >= 1.0 {
        return Err(Error::domain(format!(
            "|z| = {} is outside the disc of radius 1/slope = {}",
            z.norm(),
            1.0 / slope
        )));
    }
    let x0 = family.x0().unwrap()(0.0);
    let dphi = phi.derivative()?;
    let mut g = at.rho.scale(x0);
    let mut zk = Complex64::new(1.0, 0.0);
    let mut value = Complex64::new(0.0, 0.0);
    let mut terms = 0;
    loop {
        let term = zk * integrate_against(&dphi, &g)?;
        value += term;
        terms += 1;
        let bound = zk.norm() * g.l1_norm();
        if bound <= tol || terms >= max_terms {
            break;
        }
        g = twisted_transfer_tent(peak, slope, &g);
        zk *= z;
    }
    Ok(ClassicalValue {
        value,
        atomic: value,
        ac: Complex64::new(0.0, 0.0),
        tail_bound: zk.norm() * g.l1_norm() * slope / (1.0 - z.norm() * slope),
        orbit_terms: terms,
    })
}

/// Right side of the horizontal linear response formula with the atomic sum
/// written as −Σ_j φ̃(c_j) s̄_j α(c_j), α from the twisted cohomological equation.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ReTce {
    pub value: f64,
    pub atomic: f64,
    pub ac: f64,
    pub alpha_tail: f64,
}

pub fn retce_value(family: &MapFamily, phi: &Observable, k: usize, j_max: usize) -> Result<ReTce> {
    let at = atoms(family, k)?;
    let r0 = integrate_against(phi, &at.rho)?;
    let map: &UnimodalMap = family.base();
    let v = family.v0_fn();
    let mut atomic = 0.0;
    let mut alpha_tail = 0.0f64;
    for (&c, &s) in at.points.iter().zip(&at.sbar) {
        let a = alpha_series(map, &|y| v(y), c, j_max)?;
        atomic -= (phi.eval(c) - r0) * s * a.value;
        alpha_tail = alpha_tail.max(a.tail_bound);
    }
    // X₀'ρ₀ is a multiple of ρ₀ and the centered observable annihilates it
    Ok(ReTce {
        value: atomic,
        atomic,
        ac: 0.0,
        alpha_tail,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::make_tent_fixed_slope;

    #[test]
    fn constant_observable_vanishes() {
        let fam = make_tent_fixed_slope(1.8, 0.05, 0.01).unwrap();
        let one = Observable::constant(1.0);
        for z in [0.0, 0.5, 1.0] {
            let v = classical_susceptibility(&fam, &one, Complex64::new(z, 0.0), 60).unwrap();
            assert!(v.value.norm() < 1e-12, "{z}: {:?}", v.value);
        }
    }
}
