use super::kernel::gamma_factor;
use crate::error::{Error, Result};
use crate::special::gamma;

fn check_eta(eta: f64) -> Result<()> {
    gamma_factor(num_complex::Complex64::new(eta, 0.0)).map(|_| ())
}

/// M^η_t H_t(x)|_{t=u} = -|x - u|^{-η} / (2 Γ(1-η)).
pub fn heaviside_closed(x: f64, u: f64, eta: f64) -> Result<f64> {
    check_eta(eta)?;
    let d = (x - u).abs();
    if d == 0.0 {
        return Err(Error::domain("Heaviside closed form is singular at x = u"));
    }
    Ok(-d.powf(-eta) / (2.0 * gamma(1.0 - eta)))
}

/// Full-kernel derivative of the clamped family H^{(ε₁)}_t at t = u:
/// the closed form above when 0 < |y-u| < ε₁, zero when |y-u| ≥ ε₁.
pub fn heaviside_truncated_closed(y: f64, u: f64, eta: f64, eps1: f64) -> Result<f64> {
    check_eta(eta)?;
    if !(eps1 > 0.0) {
        return Err(Error::domain("eps1 must be positive"));
    }
    let d = (y - u).abs();
    if d == 0.0 {
        return Err(Error::domain("closed form is singular at y = u"));
    }
    if d >= eps1 {
        return Ok(0.0);
    }
    heaviside_closed(y, u, eta)
}

/// Truncated-kernel derivative M^{η,(ε₁)} of the unclamped family H_t at t = u:
/// -(|y-u|^{-η} - ε₁^{-η}) / (2 Γ(1-η)) inside ε₁, zero outside.
pub fn heaviside_truncated_kernel_closed(y: f64, u: f64, eta: f64, eps1: f64) -> Result<f64> {
    let inner = heaviside_truncated_closed(y, u, eta, eps1)?;
    if inner == 0.0 {
        return Ok(0.0);
    }
    Ok(inner + eps1.powf(-eta) / (2.0 * gamma(1.0 - eta)))
}

/// Full-kernel derivative at 0 of g(t) = a · clamp(t, ±ε₁): a ε₁^{1-η} / Γ(2-η).
pub fn clamped_linear_closed(a: f64, eps1: f64, eta: f64) -> Result<f64> {
    check_eta(eta)?;
    Ok(a * eps1.powf(1.0 - eta) / gamma(2.0 - eta))
}

/// Truncated-kernel derivative at 0 of g(t) = a t on |t| ≤ ε₁: η a ε₁^{1-η} / Γ(2-η).
pub fn linear_truncated_closed(a: f64, eps1: f64, eta: f64) -> Result<f64> {
    Ok(eta * clamped_linear_closed(a, eps1, eta)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn closed_form_examples() {
        let c = 1.0 / (2.0 * PI.sqrt());
        assert!((heaviside_closed(1.3, 0.3, 0.5).unwrap() + c).abs() < 1e-15);
        assert!((heaviside_closed(0.55, 0.3, 0.5).unwrap() + 2.0 * c).abs() < 1e-14);
        assert!(heaviside_closed(0.3, 0.3, 0.5).is_err());
        let v = heaviside_truncated_closed(0.005, 0.0, 0.5, 0.01).unwrap();
        assert!((v + c * 0.005f64.powf(-0.5)).abs() < 1e-12);
        assert_eq!(heaviside_truncated_closed(0.02, 0.0, 0.5, 0.01).unwrap(), 0.0);
        assert_eq!(heaviside_truncated_closed(0.01, 0.0, 0.5, 0.01).unwrap(), 0.0);
    }
}
