//! Gamma function for real and complex arguments (Lanczos, g = 7).

use num_complex::Complex64;
use std::f64::consts::PI;

const G: f64 = 7.0;
const COEF: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

pub fn gamma_c(z: Complex64) -> Complex64 {
    if z.re < 0.5 {
        let s = (z * PI).sin();
        return Complex64::new(PI, 0.0) / (s * gamma_c(Complex64::new(1.0, 0.0) - z));
    }
    let z = z - 1.0;
    let mut x = Complex64::new(COEF[0], 0.0);
    for (i, c) in COEF.iter().enumerate().skip(1) {
        x += *c / (z + i as f64);
    }
    let t = z + G + 0.5;
    (2.0 * PI).sqrt() * t.powc(z + 0.5) * (-t).exp() * x
}

pub fn gamma(x: f64) -> f64 {
    if x == x.floor() && x <= 0.0 {
        return f64::NAN;
    }
    if x < 0.5 {
        return PI / ((PI * x).sin() * gamma(1.0 - x));
    }
    let z = x - 1.0;
    let mut s = COEF[0];
    for (i, c) in COEF.iter().enumerate().skip(1) {
        s += c / (z + i as f64);
    }
    let t = z + G + 0.5;
    (2.0 * PI).sqrt() * t.powf(z + 0.5) * (-t).exp() * s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integers_and_half() {
        assert!((gamma(5.0) - 24.0).abs() < 1e-12);
        assert!((gamma(0.5) - PI.sqrt()).abs() < 1e-14);
        assert!((gamma(-0.5) + 2.0 * PI.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn complex_matches_real_on_axis() {
        for &x in &[0.1, 0.3, 0.9, 1.7, 3.2] {
            let c = gamma_c(Complex64::new(x, 0.0));
            assert!((c.re - gamma(x)).abs() < 1e-13 * gamma(x).abs());
            assert!(c.im.abs() < 1e-14);
        }
    }

    #[test]
    fn complex_recurrence() {
        let z = Complex64::new(0.4, 1.3);
        let lhs = gamma_c(z + 1.0);
        let rhs = z * gamma_c(z);
        assert!((lhs - rhs).norm() < 1e-13 * lhs.norm());
    }
}
