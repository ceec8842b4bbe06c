//! Quadrature rules: Gauss–Legendre, adaptive Gauss–Kronrod (7,15) for
//! complex-valued integrands, and a power-substitution helper for integrable
//! endpoint singularities of the form |x - s|^(-eta).

use num_complex::Complex64;
use std::collections::BinaryHeap;

/// Kronrod abscissae on [0, 1] for the 15-point rule (symmetric).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];

/// Gauss weights for the embedded 7-point rule (odd Kronrod indices).
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Nodes and weights of the 15-point Kronrod rule on [a, b], together with the
/// weights of the embedded 7-point Gauss rule (zero on Kronrod-only nodes).
#[derive(Debug, Clone)]
pub struct KronrodPanel {
    pub nodes: [f64; 15],
    pub kronrod: [f64; 15],
    pub gauss: [f64; 15],
}

impl KronrodPanel {
    pub fn new(a: f64, b: f64) -> Self {
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let mut p = KronrodPanel {
            nodes: [0.0; 15],
            kronrod: [0.0; 15],
            gauss: [0.0; 15],
        };
        // Gauss nodes sit at odd Kronrod positions (the centre is position 7)
        let gw = |j: usize| if j % 2 == 1 { half * WG[j / 2] } else { 0.0 };
        for j in 0..8 {
            p.nodes[j] = mid - half * XGK[j];
            p.kronrod[j] = half * WGK[j];
            p.gauss[j] = gw(j);
        }
        for j in 0..7 {
            p.nodes[14 - j] = mid + half * XGK[j];
            p.kronrod[14 - j] = half * WGK[j];
            p.gauss[14 - j] = gw(j);
        }
        p
    }
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: Complex64,
    pub error: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk15<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> Segment {
    let p = KronrodPanel::new(a, b);
    let mut k = Complex64::new(0.0, 0.0);
    let mut g = Complex64::new(0.0, 0.0);
    for i in 0..15 {
        let v = f(p.nodes[i]);
        k += v * p.kronrod[i];
        g += v * p.gauss[i];
    }
    Segment {
        a,
        b,
        value: k,
        error: (k - g).norm(),
    }
}

/// Adaptive Gauss–Kronrod integration with global error control.
#[derive(Debug, Clone, Copy)]
pub struct Adaptive {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_segments: usize,
}

impl Default for Adaptive {
    fn default() -> Self {
        Adaptive {
            abs_tol: 1e-13,
            rel_tol: 1e-11,
            max_segments: 4000,
        }
    }
}

impl Adaptive {
    pub fn new(abs_tol: f64, rel_tol: f64) -> Self {
        Adaptive {
            abs_tol,
            rel_tol,
            ..Default::default()
        }
    }

    /// Integrate `f` over the union of the intervals delimited by `points`
    /// (ascending, at least two entries). Interior points are never sampled
    /// as Kronrod nodes, so jumps placed there are resolved exactly.
    pub fn integrate_points<F: Fn(f64) -> Complex64>(&self, f: F, points: &[f64]) -> QuadResult {
        let mut heap = BinaryHeap::new();
        let mut evals = 0;
        for w in points.windows(2) {
            if w[1] > w[0] {
                heap.push(gk15(&f, w[0], w[1]));
                evals += 15;
            }
        }
        loop {
            let (value, error) = heap.iter().fold((Complex64::new(0.0, 0.0), 0.0), |acc, s| {
                (acc.0 + s.value, acc.1 + s.error)
            });
            let tol = self.abs_tol.max(self.rel_tol * value.norm());
            if error <= tol || heap.len() >= self.max_segments {
                return QuadResult {
                    value,
                    error,
                    evaluations: evals,
                };
            }
            let worst = match heap.pop() {
                Some(s) => s,
                None => {
                    return QuadResult {
                        value,
                        error,
                        evaluations: evals,
                    }
                }
            };
            let mid = 0.5 * (worst.a + worst.b);
            if !(mid > worst.a && mid < worst.b) {
                // interval can no longer be split; keep it as is
                heap.push(Segment {
                    error: 0.0,
                    ..worst
                });
                continue;
            }
            heap.push(gk15(&f, worst.a, mid));
            heap.push(gk15(&f, mid, worst.b));
            evals += 30;
        }
    }

    pub fn integrate<F: Fn(f64) -> Complex64>(&self, f: F, a: f64, b: f64) -> QuadResult {
        self.integrate_points(f, &[a, b])
    }

    pub fn integrate_real<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> (f64, f64) {
        let r = self.integrate(|x| Complex64::new(f(x), 0.0), a, b);
        (r.value.re, r.error)
    }

    /// Integrate `f` on [a, b] where `f` may behave like |x - s|^(-eta) at a
    /// singular endpoint `s` (either `a` or `b`). Uses x = s ± u^p with
    /// p = 1 / (1 - eta), which makes the transformed integrand bounded.
    pub fn integrate_endpoint_singular<F: Fn(f64) -> Complex64>(
        &self,
        f: F,
        a: f64,
        b: f64,
        singular_at_a: bool,
        eta: f64,
    ) -> QuadResult {
        if b <= a {
            return QuadResult {
                value: Complex64::new(0.0, 0.0),
                error: 0.0,
                evaluations: 0,
            };
        }
        let p = 1.0 / (1.0 - eta.clamp(0.0, 0.95));
        let len = b - a;
        let umax = len.powf(1.0 / p);
        let g = |u: f64| {
            let d = u.powf(p);
            let x = if singular_at_a { a + d } else { b - d };
            f(x) * (p * u.powf(p - 1.0))
        };
        self.integrate(g, 0.0, umax)
    }
}

/// Gauss–Legendre nodes and weights on [-1, 1] by Newton iteration on P_n.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let mut p1 = 1.0;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                p1 = ((2 * j + 1) as f64 * z * p2 - j as f64 * p3) / (j + 1) as f64;
            }
            dp = n as f64 * (z * p1 - p2) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kronrod_panel_integrates_polynomials() {
        let p = KronrodPanel::new(-1.0, 2.0);
        let k: f64 = (0..15).map(|i| p.kronrod[i] * p.nodes[i].powi(6)).sum();
        let g: f64 = (0..15).map(|i| p.gauss[i] * p.nodes[i].powi(6)).sum();
        let exact = (2f64.powi(7) + 1.0) / 7.0;
        assert!((k - exact).abs() < 1e-12);
        assert!((g - exact).abs() < 1e-12);
        let wsum: f64 = p.gauss.iter().sum();
        assert!((wsum - 3.0).abs() < 1e-13);
    }

    #[test]
    fn adaptive_resolves_jump_at_breakpoint() {
        let q = Adaptive::default();
        let r = q.integrate_points(
            |x| Complex64::new(if x < 0.3 { 0.0 } else { 1.0 }, 0.0),
            &[0.0, 0.3, 1.0],
        );
        assert!((r.value.re - 0.7).abs() < 1e-14);
    }

    #[test]
    fn adaptive_finds_unmarked_jump() {
        let q = Adaptive::new(1e-12, 1e-12);
        let r = q.integrate(|x| Complex64::new(if x < 0.3 { 0.0 } else { 1.0 }, 0.0), 0.0, 1.0);
        assert!((r.value.re - 0.7).abs() < 1e-10, "{}", r.value.re);
    }

    #[test]
    fn endpoint_singularity() {
        let q = Adaptive::default();
        let eta = 0.75;
        let r = q.integrate_endpoint_singular(
            |x| Complex64::new(x.powf(-eta), 0.0),
            0.0,
            1.0,
            true,
            eta,
        );
        assert!((r.value.re - 4.0).abs() < 1e-10);
    }

    #[test]
    fn legendre_rule() {
        let (x, w) = gauss_legendre(5);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(8)).sum();
        assert!((s - 2.0 / 9.0).abs() < 1e-14);
    }
}
