use crate::error::{Error, Result};
use crate::quad::Adaptive;
use crate::special::gamma_c;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::Arc;

type WeightFn = Arc<dyn Fn(f64) -> Complex64 + Send + Sync>;

#[derive(Clone)]
pub enum KernelVariant {
    /// t^{-1-η} on (0, ∞).
    Full,
    /// t^{-1-η} on (0, ε₁].
    Truncated { eps1: f64 },
    /// 1/ℓ with ℓ(t) = t^{1+η} |min(-1, log t)|^β.
    PowerLog { beta: f64 },
    /// 1/ℓ_n with ℓ_n(t) = t^{1+η} (log t)^{-n}, stored signed.
    ZetaLog { n: u32 },
    /// Arbitrary weight 1/ℓ.
    Custom { name: String, weight: WeightFn },
}

impl fmt::Debug for KernelVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelVariant::Full => write!(f, "Full"),
            KernelVariant::Truncated { eps1 } => write!(f, "Truncated({eps1})"),
            KernelVariant::PowerLog { beta } => write!(f, "PowerLog({beta})"),
            KernelVariant::ZetaLog { n } => write!(f, "ZetaLog({n})"),
            KernelVariant::Custom { name, .. } => write!(f, "Custom({name})"),
        }
    }
}

/// Marchaud kernel of order η. Power kernels carry the normalization Γ_η;
/// ℓ-kernels do not.
#[derive(Debug, Clone)]
pub struct MarchaudKernel {
    pub eta: Complex64,
    pub variant: KernelVariant,
    /// Exponent γ certifying condition (hh) for ℓ-kernels.
    pub gamma_cert: Option<f64>,
}

/// JSON descriptor `{variant, eta_re, eta_im, eps1, beta}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub variant: String,
    pub eta_re: f64,
    #[serde(default)]
    pub eta_im: f64,
    #[serde(default)]
    pub eps1: Option<f64>,
    #[serde(default)]
    pub beta: Option<f64>,
}

impl KernelSpec {
    pub fn build(&self, default_eps1: f64) -> Result<MarchaudKernel> {
        let eta = Complex64::new(self.eta_re, self.eta_im);
        match self.variant.as_str() {
            "full" => MarchaudKernel::full(eta),
            "truncated" => MarchaudKernel::truncated(eta, self.eps1.unwrap_or(default_eps1)),
            "power_log" => kernel_power_log(
                self.eta_re,
                self.beta
                    .ok_or_else(|| Error::Parse("power_log kernel needs beta".into()))?,
            ),
            other => Err(Error::Parse(format!("unknown kernel variant {other:?}"))),
        }
    }
}

/// Γ_η = η / Γ(1 - η) on the strip 0 < Re η < 1.
pub fn gamma_factor(eta: Complex64) -> Result<Complex64> {
    if !(eta.re > 0.0 && eta.re < 1.0) {
        return Err(Error::domain(format!("Re eta = {} outside (0, 1)", eta.re)));
    }
    Ok(eta / gamma_c(Complex64::new(1.0, 0.0) - eta))
}

pub fn gamma_factor_real(eta: f64) -> Result<f64> {
    Ok(gamma_factor(Complex64::new(eta, 0.0))?.re)
}

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// ∫_a^∞ u^n e^{-s u} du for real a and Re s > 0.
pub fn exp_poly_tail(n: u32, s: Complex64, a: f64) -> Complex64 {
    let mut sum = Complex64::new(0.0, 0.0);
    // n!/j! a^j / s^{n-j+1}
    let mut fact_ratio = 1.0; // n!/j! for j = n
    for j in (0..=n).rev() {
        sum += real(fact_ratio * a.powi(j as i32)) / s.powu(n - j + 1);
        fact_ratio *= j as f64;
    }
    (-s * a).exp() * sum
}

impl MarchaudKernel {
    pub fn full(eta: Complex64) -> Result<Self> {
        gamma_factor(eta)?;
        Ok(MarchaudKernel {
            eta,
            variant: KernelVariant::Full,
            gamma_cert: None,
        })
    }

    pub fn full_real(eta: f64) -> Result<Self> {
        Self::full(real(eta))
    }

    pub fn truncated(eta: Complex64, eps1: f64) -> Result<Self> {
        gamma_factor(eta)?;
        if !(eps1 > 0.0) {
            return Err(Error::domain("truncation radius must be positive"));
        }
        Ok(MarchaudKernel {
            eta,
            variant: KernelVariant::Truncated { eps1 },
            gamma_cert: None,
        })
    }

    pub fn truncated_real(eta: f64, eps1: f64) -> Result<Self> {
        Self::truncated(real(eta), eps1)
    }

    /// General ℓ-kernel with a declared (hh) exponent γ, certified numerically.
    pub fn custom(
        name: &str,
        eta: f64,
        gamma: f64,
        inv_ell: impl Fn(f64) -> Complex64 + Send + Sync + 'static,
    ) -> Result<Self> {
        let k = MarchaudKernel {
            eta: real(eta),
            variant: KernelVariant::Custom {
                name: name.into(),
                weight: Arc::new(inv_ell),
            },
            gamma_cert: Some(gamma),
        };
        k.certify(gamma)?;
        Ok(k)
    }

    pub fn is_weighted(&self) -> bool {
        matches!(
            self.variant,
            KernelVariant::PowerLog { .. } | KernelVariant::ZetaLog { .. } | KernelVariant::Custom { .. }
        )
    }

    /// Upper end of the t-integration: ε₁ for truncated kernels.
    pub fn cutoff(&self) -> f64 {
        match self.variant {
            KernelVariant::Truncated { eps1 } => eps1,
            _ => f64::INFINITY,
        }
    }

    /// Two-sided prefactor: Γ_η/2 for power kernels, 1/2 for ℓ-kernels.
    pub fn prefactor(&self) -> Complex64 {
        if self.is_weighted() {
            real(0.5)
        } else {
            gamma_factor(self.eta).expect("validated at construction") * 0.5
        }
    }

    /// 1/ℓ(t) for t > 0 (power kernels: t^{-1-η}); zero past the cutoff.
    pub fn weight(&self, t: f64) -> Complex64 {
        if t > self.cutoff() {
            return real(0.0);
        }
        let p = real(t).powc(-(self.eta + 1.0));
        match &self.variant {
            KernelVariant::Full | KernelVariant::Truncated { .. } => p,
            KernelVariant::PowerLog { beta } => {
                let l = t.ln().min(-1.0).abs();
                p * l.powf(-beta)
            }
            KernelVariant::ZetaLog { n } => p * t.ln().powi(*n as i32),
            KernelVariant::Custom { weight, .. } => weight(t),
        }
    }

    /// ln|1/ℓ(e^{-u})|, usable where e^{-u} underflows.
    fn log_abs_weight_at_log(&self, u: f64) -> f64 {
        let pw = (1.0 + self.eta.re) * u;
        match &self.variant {
            KernelVariant::Full | KernelVariant::Truncated { .. } => pw,
            KernelVariant::PowerLog { beta } => pw - beta * u.max(1.0).ln(),
            KernelVariant::ZetaLog { n } => pw + *n as f64 * u.abs().ln(),
            KernelVariant::Custom { weight, .. } => weight((-u).exp()).norm().ln(),
        }
    }

    /// ∫_0^δ t^m / ℓ(t) dt, m ≥ 1 (δ < 1/e for PowerLog).
    pub fn head_moment(&self, m: u32, delta: f64) -> Complex64 {
        let s = real(m as f64) - self.eta;
        match &self.variant {
            KernelVariant::Full | KernelVariant::Truncated { .. } => real(delta).powc(s) / s,
            KernelVariant::ZetaLog { n } => {
                // t = e^{-u}: (-1)^n ∫_L^∞ u^n e^{-s u} du
                let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                exp_poly_tail(*n, s, -delta.ln()) * sign
            }
            KernelVariant::PowerLog { beta } if s.norm() < 1e-12 && delta < (-1f64).exp() => {
                let l0 = -delta.ln();
                real(l0.powf(1.0 - beta) / (beta - 1.0))
            }
            KernelVariant::PowerLog { .. } | KernelVariant::Custom { .. } => {
                let q = Adaptive::new(1e-300, 1e-12);
                let l0 = -delta.ln();
                let scale = 60.0 / s.re.max(1e-3);
                let mut total = Complex64::new(0.0, 0.0);
                let mut a = l0;
                // integrate over geometric blocks in u until negligible
                for _ in 0..60 {
                    let b = a + scale.max(1.0);
                    let r = q.integrate(
                        |u| {
                            let t = (-u).exp();
                            real(t.powi(m as i32 + 1)) * self.weight(t)
                        },
                        a,
                        b,
                    );
                    total += r.value;
                    if r.value.norm() <= 1e-16 * total.norm() {
                        break;
                    }
                    a = b;
                }
                total
            }
        }
    }

    /// ∫_T^cutoff 1/ℓ(t) dt.
    pub fn tail_integral(&self, t: f64) -> Complex64 {
        let cut = self.cutoff();
        if t >= cut {
            return real(0.0);
        }
        match &self.variant {
            KernelVariant::Full => real(t).powc(-self.eta) / self.eta,
            KernelVariant::Truncated { eps1 } => {
                (real(t).powc(-self.eta) - real(*eps1).powc(-self.eta)) / self.eta
            }
            KernelVariant::PowerLog { .. } if t >= (-1f64).exp() => {
                real(t).powc(-self.eta) / self.eta
            }
            KernelVariant::ZetaLog { n } => exp_poly_tail(*n, self.eta, t.ln()),
            _ => {
                let q = Adaptive::new(1e-300, 1e-12);
                let mut total = Complex64::new(0.0, 0.0);
                let mut a = t.ln();
                for _ in 0..200 {
                    let b = a + 4.0;
                    let r = q.integrate(
                        |v| {
                            let x = v.exp();
                            self.weight(x) * x
                        },
                        a,
                        b,
                    );
                    total += r.value;
                    if r.value.norm() <= 1e-16 * total.norm() {
                        break;
                    }
                    a = b;
                }
                total
            }
        }
    }

    /// Numerical check of condition (hh): ∫_0^1 t^γ/|ℓ| < ∞ and ∫_1^∞ 1/|ℓ| < ∞.
    /// Each integral is accumulated over dyadic blocks in |log t|; convergence is
    /// accepted when the last block increments shrink by a factor ≤ 0.9.
    pub fn certify(&self, gamma: f64) -> Result<HhCertificate> {
        let q = Adaptive::new(1e-300, 1e-10);
        let blocks = 14;
        let mut inner = Vec::with_capacity(blocks);
        let mut outer = Vec::with_capacity(blocks);
        let mut lo = 0.0;
        for j in 0..blocks {
            let hi = 2f64.powi(j as i32);
            // t = e^{-u}: t^γ |w(t)| dt = exp(-(1+γ)u + ln|w|) du
            let (a, _) = q.integrate_real(
                |u| (-(1.0 + gamma) * u + self.log_abs_weight_at_log(u)).exp(),
                lo,
                hi,
            );
            let (b, _) = if self.cutoff().is_finite() {
                (0.0, 0.0)
            } else {
                q.integrate_real(
                    |v| (v + self.log_abs_weight_at_log(-v)).exp(),
                    lo,
                    hi,
                )
            };
            inner.push(a);
            outer.push(b);
            lo = hi;
        }
        let converging = |inc: &[f64]| {
            inc.iter().all(|v| v.is_finite())
                && inc[inc.len() - 4..]
                    .windows(2)
                    .all(|w| w[1] <= 0.9 * w[0] || w[1] <= 1e-300)
        };
        let cert = HhCertificate {
            gamma,
            inner: inner.iter().sum(),
            outer: outer.iter().sum(),
            inner_ok: converging(&inner),
            outer_ok: converging(&outer),
        };
        if cert.inner_ok && cert.outer_ok {
            Ok(cert)
        } else {
            Err(Error::numerical(
                format!(
                    "condition (hh) fails for {:?} at gamma = {gamma} (inner ok: {}, outer ok: {})",
                    self.variant, cert.inner_ok, cert.outer_ok
                ),
                inner.last().copied().unwrap_or(f64::NAN),
            ))
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct HhCertificate {
    pub gamma: f64,
    pub inner: f64,
    pub outer: f64,
    pub inner_ok: bool,
    pub outer_ok: bool,
}

/// ℓ_{η,β}(t) = t^{1+η} |min(-1, log t)|^β, certified against (hh).
/// For η < 1 the certificate uses γ = (1+η)/2; for η = 1 it needs γ = 1.
pub fn kernel_power_log(eta: f64, beta: f64) -> Result<MarchaudKernel> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::domain(format!("eta = {eta} outside (0, 1]")));
    }
    let gamma = if eta < 1.0 { 0.5 * (1.0 + eta) } else { 1.0 };
    let k = MarchaudKernel {
        eta: real(eta),
        variant: KernelVariant::PowerLog { beta },
        gamma_cert: Some(gamma),
    };
    k.certify(gamma)?;
    Ok(k)
}

/// ℓ_n(t) = t^{1+η₀} (log t)^{-n}, stored signed, certified with γ = Re η₀ + 0.05.
pub fn zeta_log_kernels(eta0: Complex64, n: u32) -> Result<MarchaudKernel> {
    if !(eta0.re > 0.0 && eta0.re < 1.0) {
        return Err(Error::domain(format!("Re eta0 = {} outside (0, 1)", eta0.re)));
    }
    let gamma = (eta0.re + 0.05).min(0.5 * (1.0 + eta0.re));
    let k = MarchaudKernel {
        eta: eta0,
        variant: KernelVariant::ZetaLog { n },
        gamma_cert: Some(gamma),
    };
    k.certify(gamma)?;
    Ok(k)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_factor_values() {
        assert!((gamma_factor_real(0.5).unwrap() - 0.5 / std::f64::consts::PI.sqrt()).abs() < 1e-15);
        assert!(gamma_factor_real(1.0).is_err());
        assert!(gamma_factor_real(0.0).is_err());
    }

    #[test]
    fn power_log_values() {
        let k = kernel_power_log(0.5, 2.0).unwrap();
        let ell = |t: f64| 1.0 / k.weight(t).re;
        assert!((ell((-1f64).exp()) - (-1.5f64).exp()).abs() < 1e-14);
        assert!((ell((-2f64).exp()) - 4.0 * (-3f64).exp()).abs() < 1e-14);
    }

    #[test]
    fn keller_regime_certification() {
        assert!(kernel_power_log(1.0, 1.5).is_ok());
        assert!(kernel_power_log(1.0, 1.0).is_err());
    }

    #[test]
    fn exp_poly_tail_matches_quadrature() {
        let s = Complex64::new(0.7, 0.2);
        for (n, a) in [(0u32, 0.5), (3, -1.0), (5, 2.0)] {
            let q = Adaptive::new(1e-14, 1e-13);
            let r = q.integrate(|u| real(u.powi(n as i32)) * (-s * u).exp(), a, a + 200.0);
            assert!((r.value - exp_poly_tail(n, s, a)).norm() < 1e-10);
        }
    }

    #[test]
    fn zeta_kernel_sign_and_head() {
        let k = zeta_log_kernels(Complex64::new(0.3, 0.0), 1).unwrap();
        let w = k.weight((-1f64).exp());
        assert!((1.0 / w.re + (-1.3f64).exp()).abs() < 1e-14);
        let k0 = zeta_log_kernels(Complex64::new(0.3, 0.0), 0).unwrap();
        let full = MarchaudKernel::full_real(0.3).unwrap();
        assert!((k0.head_moment(1, 0.01) - full.head_moment(1, 0.01)).norm() < 1e-14);
        assert!((k0.tail_integral(0.01) - full.tail_integral(0.01)).norm() < 1e-12);
    }
}
