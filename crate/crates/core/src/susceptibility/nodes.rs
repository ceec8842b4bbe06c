//! Kernel integration over a geometric t-grid shared by many kernels.
//!
//! Nodes are the 15-point Kronrod nodes of the panels [T q^{j+1}, T q^j],
//! j < m, plus δ, δ/2, δ/4 (δ = T q^m) for the head model and T itself for
//! the clamped tail. Every node carries a vector of channels evaluated at +t
//! and at -t.

use crate::error::{Error, Result};
use crate::marchaud::{MarchaudKernel, MarchaudSide};
use crate::quad::KronrodPanel;
use num_complex::Complex64;
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TGrid {
    pub top: f64,
    pub q: f64,
    pub panels: usize,
}

impl TGrid {
    pub fn new(top: f64, q: f64, panels: usize) -> Result<Self> {
        if !(top > 0.0 && q > 0.0 && q < 1.0 && panels >= 1) {
            return Err(Error::domain("t-grid needs top > 0, q in (0, 1), panels >= 1"));
        }
        Ok(TGrid { top, q, panels })
    }

    pub fn delta(&self) -> f64 {
        self.top * self.q.powi(self.panels as i32)
    }

    fn panel(&self, j: usize) -> KronrodPanel {
        let b = self.top * self.q.powi(j as i32);
        KronrodPanel::new(b * self.q, b)
    }

    pub fn nodes(&self) -> Vec<f64> {
        let mut t = Vec::with_capacity(15 * self.panels + 4);
        for j in 0..self.panels {
            t.extend_from_slice(&self.panel(j).nodes);
        }
        let d = self.delta();
        t.extend_from_slice(&[d, 0.5 * d, 0.25 * d, self.top]);
        t
    }
}

/// Channel values at ±t for every node of a grid.
#[derive(Debug, Clone)]
pub struct NodeSet {
    pub grid: TGrid,
    pub t: Vec<f64>,
    pub plus: Vec<Vec<Complex64>>,
    pub minus: Vec<Vec<Complex64>>,
}

impl NodeSet {
    /// `f(s)` returns the channel vector at parameter s (both signs are queried).
    pub fn evaluate<F>(grid: TGrid, f: F) -> Result<Self>
    where
        F: Fn(f64) -> Result<Vec<Complex64>> + Sync,
    {
        let t = grid.nodes();
        let pairs: Vec<(Vec<Complex64>, Vec<Complex64>)> = t
            .par_iter()
            .map(|&s| Ok((f(s)?, f(-s)?)))
            .collect::<Result<_>>()?;
        let width = pairs[0].0.len();
        if pairs.iter().any(|p| p.0.len() != width || p.1.len() != width) {
            return Err(Error::numerical("channel count varies between nodes", f64::NAN));
        }
        let (plus, minus) = pairs.into_iter().unzip();
        Ok(NodeSet { grid, t, plus, minus })
    }

    pub fn channels(&self) -> usize {
        self.plus[0].len()
    }

    fn difference(&self, i: usize, side: MarchaudSide) -> Vec<Complex64> {
        match side {
            MarchaudSide::TwoSided => self.plus[i].iter().zip(&self.minus[i]).map(|(a, b)| a - b).collect(),
            MarchaudSide::Plus => self.minus[i].iter().map(|b| -b).collect(),
            MarchaudSide::Minus => self.plus[i].iter().map(|a| -a).collect(),
        }
    }

    /// Marchaud-type integral of every channel (channels vanish at t = 0):
    /// factor · ∫_0^cutoff D(t)/ℓ(t) dt with D the side difference, using the
    /// panels, a linear-quadratic head below δ and a constant tail beyond T.
    pub fn integrate(&self, kernel: &MarchaudKernel, side: MarchaudSide) -> Result<(Vec<Complex64>, Vec<f64>)> {
        let g = &self.grid;
        let cut = kernel.cutoff();
        if cut < g.top * (1.0 - 1e-12) {
            return Err(Error::domain(format!(
                "kernel cutoff {cut} lies below the grid top {}",
                g.top
            )));
        }
        let nc = self.channels();
        let zero = Complex64::new(0.0, 0.0);
        let mut value = vec![zero; nc];
        let mut error = vec![0.0; nc];
        for j in 0..g.panels {
            let p = g.panel(j);
            let mut kr = vec![zero; nc];
            let mut ga = vec![zero; nc];
            for i in 0..15 {
                let idx = 15 * j + i;
                let w = kernel.weight(self.t[idx]);
                let d = self.difference(idx, side);
                for c in 0..nc {
                    kr[c] += d[c] * w * p.kronrod[i];
                    ga[c] += d[c] * w * p.gauss[i];
                }
            }
            for c in 0..nc {
                value[c] += kr[c];
                error[c] += (kr[c] - ga[c]).norm();
            }
        }
        let base = 15 * g.panels;
        let delta = g.delta();
        let (d1, d2, d4) = (
            self.difference(base, side),
            self.difference(base + 1, side),
            self.difference(base + 2, side),
        );
        let m1 = kernel.head_moment(1, delta);
        let m2 = kernel.head_moment(2, delta);
        for c in 0..nc {
            let beta = (d1[c] - d2[c] * 2.0) * (2.0 / (delta * delta));
            let alpha = (d2[c] * 4.0 - d1[c]) / delta;
            let head = alpha * m1 + beta * m2;
            let model4 = alpha * (0.25 * delta) + beta * (0.0625 * delta * delta);
            value[c] += head;
            error[c] += if d4[c].norm() > 0.0 {
                head.norm() * ((d4[c] - model4) / d4[c]).norm()
            } else {
                model4.norm() / (0.25 * delta) * m1.norm()
            };
        }
        if cut > g.top {
            let ti = kernel.tail_integral(g.top);
            let dt = self.difference(base + 3, side);
            for c in 0..nc {
                value[c] += dt[c] * ti;
            }
        }
        let factor = match side {
            MarchaudSide::TwoSided => kernel.prefactor(),
            _ => kernel.prefactor() * 2.0,
        };
        for c in 0..nc {
            value[c] *= factor;
            error[c] *= factor.norm();
            if !(value[c].re.is_finite() && value[c].im.is_finite()) {
                return Err(Error::numerical("non-finite kernel integral", f64::NAN));
            }
        }
        Ok((value, error))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::marchaud::closed::{clamped_linear_closed, linear_truncated_closed};

    #[test]
    fn clamped_linear_channels() {
        let eps = 0.01;
        let grid = TGrid::new(eps, 0.8, 60).unwrap();
        let ns = NodeSet::evaluate(grid, |s| {
            let c = s.clamp(-eps, eps);
            Ok(vec![Complex64::new(c, 0.0), Complex64::new(3.0 * c, 0.0)])
        })
        .unwrap();
        let full = MarchaudKernel::full_real(0.5).unwrap();
        let (v, _) = ns.integrate(&full, MarchaudSide::TwoSided).unwrap();
        let want = clamped_linear_closed(1.0, eps, 0.5).unwrap();
        assert!((v[0].re - want).abs() < 1e-10 * want);
        assert!((v[1].re - 3.0 * want).abs() < 1e-10 * want);
        let tr = MarchaudKernel::truncated_real(0.5, eps).unwrap();
        let (w, _) = ns.integrate(&tr, MarchaudSide::TwoSided).unwrap();
        let want = linear_truncated_closed(1.0, eps, 0.5).unwrap();
        assert!((w[0].re - want).abs() < 1e-10 * want);
    }
}
