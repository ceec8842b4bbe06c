use super::kernel::MarchaudKernel;
use crate::error::{Error, Result};
use crate::quad::Adaptive;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MarchaudSide {
    Plus,
    Minus,
    TwoSided,
}

/// Behaviour of g beyond the integration horizon `upper`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TailModel {
    /// g is constant on |t - t0| ≥ upper on each side; the tail is exact.
    Constant,
    /// |g| ≤ bound; the tail is dropped and bounded.
    Bounded(f64),
}

#[derive(Debug, Clone)]
pub struct MarchaudOptions {
    /// Below this the difference is modelled as αt + βt² and integrated exactly.
    pub head_delta: f64,
    /// Horizon for kernels without a cutoff.
    pub upper: f64,
    pub tail: TailModel,
    /// Offsets t > 0 where the difference D(t) may jump.
    pub hints: Vec<f64>,
    pub abs_tol: f64,
    pub rel_tol: f64,
}

impl Default for MarchaudOptions {
    fn default() -> Self {
        MarchaudOptions {
            head_delta: 1e-9,
            upper: 1e3,
            tail: TailModel::Constant,
            hints: Vec::new(),
            abs_tol: 1e-13,
            rel_tol: 1e-11,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct MarchaudValue {
    pub value: Complex64,
    pub error: f64,
}

impl MarchaudValue {
    pub fn re(&self) -> f64 {
        self.value.re
    }
}

/// Marchaud derivative of a callable g at t0.
///
/// Two-sided: pf ∫_0^∞ (g(t0+t) - g(t0-t)) / ℓ(t) dt with pf = Γ_η/2 (power
/// kernels) or 1/2 (ℓ-kernels). One-sided: 2 pf ∫_0^∞ (g(t0) - g(t0 ∓ t)) / ℓ(t) dt.
pub fn marchaud_fn<G: Fn(f64) -> f64>(
    g: G,
    t0: f64,
    kernel: &MarchaudKernel,
    side: MarchaudSide,
    opts: &MarchaudOptions,
) -> Result<MarchaudValue> {
    let g0 = g(t0);
    let d = |t: f64| -> f64 {
        match side {
            MarchaudSide::TwoSided => g(t0 + t) - g(t0 - t),
            MarchaudSide::Plus => g0 - g(t0 - t),
            MarchaudSide::Minus => g0 - g(t0 + t),
        }
    };
    let factor = match side {
        MarchaudSide::TwoSided => kernel.prefactor(),
        _ => kernel.prefactor() * 2.0,
    };
    let (value, error) = weighted_integral(&d, kernel, opts)?;
    Ok(MarchaudValue {
        value: value * factor,
        error: error * factor.norm(),
    })
}

/// ∫_0^cutoff D(t)/ℓ(t) dt with head model, log-variable middle and tail.
pub fn weighted_integral<D: Fn(f64) -> f64>(
    d: &D,
    kernel: &MarchaudKernel,
    opts: &MarchaudOptions,
) -> Result<(Complex64, f64)> {
    let delta = opts.head_delta;
    let cut = kernel.cutoff();
    let upper = cut.min(opts.upper);
    if !(delta > 0.0 && delta < upper) {
        return Err(Error::domain("head cutoff must lie below the integration horizon"));
    }
    let (d1, d2, d4) = (d(delta), d(0.5 * delta), d(0.25 * delta));
    let beta = 2.0 * (d1 - 2.0 * d2) / (delta * delta);
    let alpha = (4.0 * d2 - d1) / delta;
    let model4 = alpha * 0.25 * delta + beta * 0.0625 * delta * delta;
    let m1 = kernel.head_moment(1, delta);
    let m2 = kernel.head_moment(2, delta);
    let head = m1 * alpha + m2 * beta;
    // the model residual at δ/4 relative to D(δ/4) scales the head error
    let head_err = if d4 != 0.0 {
        head.norm() * ((d4 - model4) / d4).abs()
    } else {
        (model4.abs() / (0.25 * delta)) * m1.norm()
    };

    let mut pts = vec![delta.ln()];
    let mut hints: Vec<f64> = opts
        .hints
        .iter()
        .copied()
        .filter(|&h| h > delta && h < upper)
        .collect();
    hints.sort_by(f64::total_cmp);
    pts.extend(hints.iter().map(|h| h.ln()));
    pts.push(upper.ln());
    let q = Adaptive {
        abs_tol: opts.abs_tol,
        rel_tol: opts.rel_tol,
        max_segments: 20_000,
    };
    let mid = q.integrate_points(
        |s| {
            let t = s.exp();
            kernel.weight(t) * (d(t) * t)
        },
        &pts,
    );

    let (tail, tail_err) = if upper >= cut {
        (Complex64::new(0.0, 0.0), 0.0)
    } else {
        let ti = kernel.tail_integral(upper);
        match opts.tail {
            TailModel::Constant => (ti * d(upper), 0.0),
            TailModel::Bounded(b) => (Complex64::new(0.0, 0.0), 2.0 * b * ti.norm()),
        }
    };
    let value = head + mid.value + tail;
    if !value.re.is_finite() || !value.im.is_finite() {
        return Err(Error::numerical("non-finite Marchaud integral", f64::NAN));
    }
    Ok((value, head_err + mid.error + tail_err))
}

/// Curve sampled on a symmetric grid containing 0, interpolated monotonically
/// in log|t| on each side and held constant beyond the outermost points.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SampledCurve {
    pub t: Vec<f64>,
    pub g: Vec<f64>,
    pub holder_exponent: f64,
    #[serde(skip)]
    slopes_pos: Vec<f64>,
    #[serde(skip)]
    slopes_neg: Vec<f64>,
}

/// {±ε₁ q^j, j < m} ∪ {0} ∪ {±outer}, ascending.
pub fn geometric_grid(eps1: f64, q: f64, m: usize, outer: &[f64]) -> Vec<f64> {
    let mut pos: Vec<f64> = (0..m).map(|j| eps1 * q.powi(j as i32)).collect();
    pos.extend(outer.iter().copied().filter(|&o| o > eps1));
    pos.sort_by(f64::total_cmp);
    pos.dedup();
    let mut all: Vec<f64> = pos.iter().rev().map(|t| -t).collect();
    all.push(0.0);
    all.extend(pos);
    all
}

// Fritsch–Carlson slopes for monotone cubic Hermite interpolation.
fn monotone_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    if n < 2 {
        return vec![0.0; n];
    }
    let delta: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / (x[i + 1] - x[i])).collect();
    let mut m = vec![0.0; n];
    m[0] = delta[0];
    m[n - 1] = delta[n - 2];
    for i in 1..n - 1 {
        m[i] = if delta[i - 1] * delta[i] <= 0.0 {
            0.0
        } else {
            0.5 * (delta[i - 1] + delta[i])
        };
    }
    for i in 0..n - 1 {
        if delta[i] == 0.0 {
            m[i] = 0.0;
            m[i + 1] = 0.0;
        } else {
            let a = m[i] / delta[i];
            let b = m[i + 1] / delta[i];
            let s = a * a + b * b;
            if s > 9.0 {
                let tau = 3.0 / s.sqrt();
                m[i] = tau * a * delta[i];
                m[i + 1] = tau * b * delta[i];
            }
        }
    }
    m
}

fn hermite(x0: f64, x1: f64, y0: f64, y1: f64, m0: f64, m1: f64, x: f64) -> f64 {
    let h = x1 - x0;
    let s = (x - x0) / h;
    let (s2, s3) = (s * s, s * s * s);
    (2.0 * s3 - 3.0 * s2 + 1.0) * y0
        + (s3 - 2.0 * s2 + s) * h * m0
        + (-2.0 * s3 + 3.0 * s2) * y1
        + (s3 - s2) * h * m1
}

impl SampledCurve {
    pub fn new(t: Vec<f64>, g: Vec<f64>, holder_exponent: f64) -> Result<Self> {
        if t.len() != g.len() || t.len() < 3 {
            return Err(Error::domain("curve needs matching t and g arrays of length >= 3"));
        }
        if t.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::domain("curve grid must be strictly increasing"));
        }
        let zero = t
            .iter()
            .position(|&x| x == 0.0)
            .ok_or_else(|| Error::domain("curve grid must contain t = 0"))?;
        if zero == 0 || zero == t.len() - 1 {
            return Err(Error::domain("curve grid must extend to both sides of 0"));
        }
        let mut c = SampledCurve {
            t,
            g,
            holder_exponent,
            slopes_pos: Vec::new(),
            slopes_neg: Vec::new(),
        };
        let (xp, yp) = c.side_nodes(true);
        let (xn, yn) = c.side_nodes(false);
        c.slopes_pos = monotone_slopes(&xp, &yp);
        c.slopes_neg = monotone_slopes(&xn, &yn);
        Ok(c)
    }

    fn zero_index(&self) -> usize {
        self.t.iter().position(|&x| x == 0.0).unwrap()
    }

    // (log|t|, g) ascending in log|t| for one side
    fn side_nodes(&self, positive: bool) -> (Vec<f64>, Vec<f64>) {
        let z = self.zero_index();
        let idx: Vec<usize> = if positive {
            (z + 1..self.t.len()).collect()
        } else {
            (0..z).rev().collect()
        };
        (
            idx.iter().map(|&i| self.t[i].abs().ln()).collect(),
            idx.iter().map(|&i| self.g[i]).collect(),
        )
    }

    pub fn value_at_zero(&self) -> f64 {
        self.g[self.zero_index()]
    }

    pub fn eval(&self, t: f64) -> f64 {
        if t == 0.0 {
            return self.value_at_zero();
        }
        let (x, y) = self.side_nodes(t > 0.0);
        let m = if t > 0.0 { &self.slopes_pos } else { &self.slopes_neg };
        let lt = t.abs().ln();
        let n = x.len();
        if lt >= x[n - 1] {
            return y[n - 1];
        }
        if lt <= x[0] {
            // linear in t between 0 and the innermost sample
            let t1 = x[0].exp();
            let g0 = self.value_at_zero();
            return g0 + (y[0] - g0) * t.abs() / t1;
        }
        let i = x.partition_point(|&v| v <= lt) - 1;
        hermite(x[i], x[i + 1], y[i], y[i + 1], m[i], m[i + 1], lt)
    }

    pub fn min_abs_t(&self) -> f64 {
        let z = self.zero_index();
        self.t[z + 1].min(-self.t[z - 1])
    }

    pub fn max_abs_t(&self) -> f64 {
        self.t[self.t.len() - 1].max(-self.t[0])
    }

    /// Marchaud derivative of the interpolated curve at t0 = 0.
    pub fn marchaud(&self, kernel: &MarchaudKernel, side: MarchaudSide) -> Result<MarchaudValue> {
        let opts = MarchaudOptions {
            head_delta: 0.25 * self.min_abs_t(),
            upper: self.max_abs_t(),
            tail: TailModel::Constant,
            hints: self.t.iter().filter(|&&x| x > 0.0).copied().collect(),
            ..Default::default()
        };
        marchaud_fn(|t| self.eval(t), 0.0, kernel, side, &opts)
    }

    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["t", "value"])?;
        for (t, g) in self.t.iter().zip(&self.g) {
            wr.write_record([crate::io::fmt17(*t), crate::io::fmt17(*g)])?;
        }
        wr.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::marchaud::closed::heaviside_closed;

    #[test]
    fn constant_has_zero_derivative() {
        let k = MarchaudKernel::full_real(0.5).unwrap();
        for side in [MarchaudSide::Plus, MarchaudSide::Minus, MarchaudSide::TwoSided] {
            let v = marchaud_fn(|_| 3.7, 0.0, &k, side, &MarchaudOptions::default()).unwrap();
            assert_eq!(v.value.norm(), 0.0);
        }
    }

    #[test]
    fn heaviside_family() {
        let k = MarchaudKernel::full_real(0.5).unwrap();
        let x = 0.3;
        let opts = MarchaudOptions {
            hints: vec![x],
            ..Default::default()
        };
        let v = marchaud_fn(|t| if x < t { -1.0 } else { 0.0 }, 0.0, &k, MarchaudSide::TwoSided, &opts)
            .unwrap();
        let c = heaviside_closed(x, 0.0, 0.5).unwrap();
        assert!(((v.re() - c) / c).abs() < 1e-9, "{} {}", v.re(), c);
    }

    #[test]
    fn sampled_curve_interpolates_nodes() {
        let t = geometric_grid(0.01, 0.8, 20, &[0.03]);
        let g: Vec<f64> = t.iter().map(|x| x * x * x + 2.0).collect();
        let c = SampledCurve::new(t.clone(), g.clone(), 1.0).unwrap();
        for (a, b) in t.iter().zip(&g) {
            assert!((c.eval(*a) - b).abs() < 1e-15);
        }
        assert_eq!(c.eval(1.0), g[g.len() - 1]);
    }

    #[test]
    fn sine_matches_exact_value() {
        for eta in [0.3, 0.9, 0.99] {
            let k = MarchaudKernel::full_real(eta).unwrap();
            let opts = MarchaudOptions {
                upper: 2000.0,
                tail: TailModel::Bounded(1.0),
                ..Default::default()
            };
            let v = marchaud_fn(f64::sin, 0.0, &k, MarchaudSide::TwoSided, &opts).unwrap();
            let exact = (std::f64::consts::FRAC_PI_2 * eta).sin();
            let diff = (v.re() - exact).abs();
            assert!(diff < 1e-4 && diff <= v.error, "{eta}: {} vs {exact}, err {}", v.re(), v.error);
        }
    }
}
