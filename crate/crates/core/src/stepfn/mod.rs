//! Step functions on [-1, 1], jump measures, exact tent transfer operators
//! and (in [`ulam`]) the Ulam discretization.

pub mod ulam;

use crate::error::{Error, Result};
use crate::maps::CriticalOrbit;
use crate::observable::Observable;
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};

/// Breakpoints closer than this are merged after a transfer.
pub const MERGE_TOL: f64 = 1e-13;

/// Piecewise-constant function. `vals[i]` is the value on
/// `(bp[i-1], bp[i])`; `vals[0]` and `vals[n]` are the zero outer values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepFunction {
    bp: Vec<f64>,
    vals: Vec<f64>,
}

impl Default for StepFunction {
    fn default() -> Self {
        Self::zero()
    }
}

impl StepFunction {
    pub fn zero() -> Self {
        StepFunction {
            bp: Vec::new(),
            vals: vec![0.0],
        }
    }

    /// `values` are the interior values; the outer values are zero.
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if breakpoints.is_empty() && values.is_empty() {
            return Ok(Self::zero());
        }
        if values.len() + 1 != breakpoints.len() {
            return Err(Error::domain(format!(
                "{} breakpoints need {} interior values, got {}",
                breakpoints.len(),
                breakpoints.len().saturating_sub(1),
                values.len()
            )));
        }
        if breakpoints.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::domain("breakpoints must be strictly increasing"));
        }
        if breakpoints[0] < -1.0 || breakpoints[breakpoints.len() - 1] > 1.0 {
            return Err(Error::domain("breakpoints must lie in [-1, 1]"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("non-finite step value"));
        }
        let mut vals = Vec::with_capacity(values.len() + 2);
        vals.push(0.0);
        vals.extend(values);
        vals.push(0.0);
        Ok(StepFunction {
            bp: breakpoints,
            vals,
        })
    }

    fn raw(bp: Vec<f64>, vals: Vec<f64>) -> Self {
        debug_assert_eq!(vals.len(), bp.len() + 1);
        StepFunction { bp, vals }
    }

    /// v on [a, b).
    pub fn indicator(a: f64, b: f64, v: f64) -> Self {
        if !(b > a) || v == 0.0 {
            return Self::zero();
        }
        Self::raw(vec![a, b], vec![0.0, v, 0.0])
    }

    /// H_u: -1 on [-1, u), 0 on (u, 1].
    pub fn heaviside(u: f64) -> Self {
        Self::indicator(-1.0, u, -1.0)
    }

    /// Cellwise function from cell edges and cell values.
    pub fn from_cells(edges: &[f64], values: &[f64]) -> Result<Self> {
        Self::new(edges.to_vec(), values.to_vec())
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.bp
    }

    /// Interior values (between consecutive breakpoints).
    pub fn values(&self) -> &[f64] {
        if self.bp.is_empty() {
            &self.vals[0..0]
        } else {
            &self.vals[1..self.vals.len() - 1]
        }
    }

    pub fn is_zero(&self) -> bool {
        self.vals.iter().all(|&v| v == 0.0)
    }

    /// Point value; at a breakpoint the midpoint of the one-sided limits.
    pub fn eval(&self, x: f64) -> f64 {
        let i = self.bp.partition_point(|&b| b < x);
        if i < self.bp.len() && self.bp[i] == x {
            0.5 * (self.vals[i] + self.vals[i + 1])
        } else {
            self.vals[i]
        }
    }

    /// Value on the open piece containing x (right limit at breakpoints).
    #[inline]
    pub fn eval_right(&self, x: f64) -> f64 {
        self.vals[self.bp.partition_point(|&b| b <= x)]
    }

    /// Jumps (location, right limit - left limit).
    pub fn jumps(&self) -> Vec<(f64, f64)> {
        self.bp
            .iter()
            .enumerate()
            .map(|(i, &b)| (b, self.vals[i + 1] - self.vals[i]))
            .collect()
    }

    pub fn integral(&self) -> f64 {
        self.bp
            .windows(2)
            .enumerate()
            .map(|(i, w)| self.vals[i + 1] * (w[1] - w[0]))
            .sum()
    }

    /// Integral from jumps: sum of -jump * position.
    pub fn integral_cumulative(&self) -> f64 {
        -self.jumps().iter().map(|(x, j)| x * j).sum::<f64>()
    }

    pub fn l1_norm(&self) -> f64 {
        self.bp
            .windows(2)
            .enumerate()
            .map(|(i, w)| self.vals[i + 1].abs() * (w[1] - w[0]))
            .sum()
    }

    pub fn sup_norm(&self) -> f64 {
        self.vals.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Support [first, last breakpoint] of the nonzero part.
    pub fn support(&self) -> Option<(f64, f64)> {
        let first = self.vals.iter().position(|&v| v != 0.0)?;
        let last = self.vals.iter().rposition(|&v| v != 0.0)?;
        Some((self.bp[first - 1], self.bp[last]))
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::raw(self.bp.clone(), self.vals.iter().map(|v| v * s).collect())
    }

    /// a * self + b * other on the merged partition.
    pub fn combine(&self, a: f64, other: &Self, b: f64) -> Self {
        let mut bp = Vec::with_capacity(self.bp.len() + other.bp.len());
        let mut vals = Vec::with_capacity(self.bp.len() + other.bp.len() + 1);
        let (mut i, mut j) = (0, 0);
        vals.push(a * self.vals[0] + b * other.vals[0]);
        while i < self.bp.len() || j < other.bp.len() {
            let x = match (self.bp.get(i), other.bp.get(j)) {
                (Some(&p), Some(&q)) => p.min(q),
                (Some(&p), None) => p,
                (None, Some(&q)) => q,
                (None, None) => unreachable!(),
            };
            while i < self.bp.len() && self.bp[i] == x {
                i += 1;
            }
            while j < other.bp.len() && other.bp[j] == x {
                j += 1;
            }
            bp.push(x);
            vals.push(a * self.vals[i] + b * other.vals[j]);
        }
        Self::raw(bp, vals).simplified(0.0)
    }

    pub fn add(&self, other: &Self) -> Self {
        self.combine(1.0, other, 1.0)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.combine(1.0, other, -1.0)
    }

    pub fn l1_distance(&self, other: &Self) -> f64 {
        self.sub(other).l1_norm()
    }

    /// Drop breakpoints without a jump and merge those closer than `tol`.
    pub fn simplified(self, tol: f64) -> Self {
        let mut bp = Vec::with_capacity(self.bp.len());
        let mut vals = Vec::with_capacity(self.vals.len());
        vals.push(self.vals[0]);
        for (i, &b) in self.bp.iter().enumerate() {
            let right = self.vals[i + 1];
            if let Some(&last) = bp.last() {
                if b - last < tol {
                    // the sliver (last, b) is dropped; its right value takes over
                    *vals.last_mut().unwrap() = right;
                    if vals.len() >= 2 && vals[vals.len() - 1] == vals[vals.len() - 2] {
                        bp.pop();
                        vals.pop();
                    }
                    continue;
                }
            }
            if right == *vals.last().unwrap() {
                continue;
            }
            bp.push(b);
            vals.push(right);
        }
        StepFunction { bp, vals }
    }

    /// x -> g(x - t), clipped to [-1, 1].
    pub fn translate(&self, t: f64) -> Self {
        let bp: Vec<f64> = self.bp.iter().map(|b| (b + t).clamp(-1.0, 1.0)).collect();
        Self::raw(bp, self.vals.clone()).dedup_zero_width().simplified(0.0)
    }

    fn dedup_zero_width(self) -> Self {
        let mut bp = Vec::with_capacity(self.bp.len());
        let mut vals = vec![self.vals[0]];
        for (i, &b) in self.bp.iter().enumerate() {
            if bp.last() == Some(&b) {
                *vals.last_mut().unwrap() = self.vals[i + 1];
            } else {
                bp.push(b);
                vals.push(self.vals[i + 1]);
            }
        }
        StepFunction { bp, vals }
    }

    /// Exact integral of phi * self.
    pub fn integrate(&self, phi: &Observable) -> Result<f64> {
        integrate_against(phi, self)
    }

    /// Integrals over the cells of a partition.
    pub fn cell_masses(&self, edges: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; edges.len().saturating_sub(1)];
        // cumulative integral F(x) at any x, evaluated by merged walk
        let cum = |xs: &[f64]| -> Vec<f64> {
            let mut res = Vec::with_capacity(xs.len());
            let mut acc = 0.0;
            let mut last = f64::NEG_INFINITY;
            let mut i = 0;
            for &x in xs {
                while i < self.bp.len() && self.bp[i] <= x {
                    if last.is_finite() {
                        acc += self.vals[i] * (self.bp[i] - last);
                    }
                    last = self.bp[i];
                    i += 1;
                }
                let v = if last.is_finite() {
                    acc + self.vals[i] * (x - last)
                } else {
                    0.0
                };
                res.push(v);
            }
            res
        };
        let f = cum(edges);
        for k in 0..out.len() {
            out[k] = f[k + 1] - f[k];
        }
        out
    }

    /// CSV with rows `breakpoint,left_value` and a final `,value` row.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["breakpoint", "left_value"])?;
        for (i, b) in self.bp.iter().enumerate() {
            wr.write_record([crate::io::fmt17(*b), crate::io::fmt17(self.vals[i])])?;
        }
        wr.write_record([String::new(), crate::io::fmt17(*self.vals.last().unwrap())])?;
        wr.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(r);
        let mut bp = Vec::new();
        let mut vals = Vec::new();
        for rec in rd.records() {
            let rec = rec?;
            let parse = |s: &str| -> Result<f64> {
                s.trim().parse().map_err(|_| Error::Parse(format!("bad number {s:?}")))
            };
            let v = parse(&rec[1])?;
            if rec[0].trim().is_empty() {
                vals.push(v);
            } else {
                bp.push(parse(&rec[0])?);
                vals.push(v);
            }
        }
        if vals.len() != bp.len() + 1 {
            return Err(Error::Parse("step function csv needs a trailing value row".into()));
        }
        Ok(StepFunction { bp, vals })
    }
}

/// Integral of phi * g over [-1, 1]: exact through an antiderivative when one
/// is available, adaptive per piece otherwise.
pub fn integrate_against(phi: &Observable, g: &StepFunction) -> Result<f64> {
    if phi.has_antiderivative() {
        // sum over breakpoints of Phi(b) * (left - right)
        let mut s = 0.0;
        for (i, &b) in g.bp.iter().enumerate() {
            let jump = g.vals[i] - g.vals[i + 1];
            if jump != 0.0 {
                s += phi.antiderivative(b).unwrap() * jump;
            }
        }
        if !s.is_finite() {
            return Err(Error::domain("non-finite observable samples"));
        }
        return Ok(s);
    }
    let mut s = 0.0;
    for (i, w) in g.bp.windows(2).enumerate() {
        let v = g.vals[i + 1];
        if v != 0.0 {
            s += v * phi.integral(w[0], w[1])?;
        }
    }
    Ok(s)
}

/// Exact transfer operator of the tent x -> peak - slope |x|:
/// (Lg)(x) = (g(-u) + g(u)) / slope with u = (peak - x) / slope.
pub fn transfer_tent(peak: f64, slope: f64, g: &StepFunction) -> StepFunction {
    if g.is_zero() {
        return StepFunction::zero();
    }
    let mut us: Vec<f64> = Vec::with_capacity(g.bp.len() + 2);
    us.push(0.0);
    us.push(1.0);
    us.extend(g.bp.iter().map(|b| b.abs().min(1.0)));
    us.sort_by(f64::total_cmp);
    us.dedup();
    let n = us.len();
    let mut bp = Vec::with_capacity(n);
    let mut vals = Vec::with_capacity(n + 1);
    vals.push(0.0);
    for k in (0..n).rev() {
        bp.push(peak - slope * us[k]);
        if k > 0 {
            let m = 0.5 * (us[k - 1] + us[k]);
            vals.push((g.eval_right(m) + g.eval_right(-m)) / slope);
        }
    }
    vals.push(0.0);
    StepFunction { bp, vals }.simplified(MERGE_TOL)
}

/// Sign-twisted transfer of the tent: (L̃g)(x) = g(-u) - g(u), so that
/// ∫ (ψ∘f)' g = ∫ ψ' L̃g for Lipschitz ψ.
pub fn twisted_transfer_tent(peak: f64, slope: f64, g: &StepFunction) -> StepFunction {
    if g.is_zero() {
        return StepFunction::zero();
    }
    let mut us: Vec<f64> = Vec::with_capacity(g.bp.len() + 2);
    us.push(0.0);
    us.push(1.0);
    us.extend(g.bp.iter().map(|b| b.abs().min(1.0)));
    us.sort_by(f64::total_cmp);
    us.dedup();
    let n = us.len();
    let mut bp = Vec::with_capacity(n);
    let mut vals = Vec::with_capacity(n + 1);
    vals.push(0.0);
    for k in (0..n).rev() {
        bp.push(peak - slope * us[k]);
        if k > 0 {
            let m = 0.5 * (us[k - 1] + us[k]);
            vals.push(g.eval_right(-m) - g.eval_right(m));
        }
    }
    vals.push(0.0);
    StepFunction { bp, vals }.simplified(MERGE_TOL)
}

/// Transfer a step function with a tent map given as a `UnimodalMap`.
pub fn transfer(map: &crate::maps::UnimodalMap, g: &StepFunction) -> Result<StepFunction> {
    let (peak, slope) = map
        .tent_params()
        .ok_or_else(|| Error::domain("exact transfer needs constant slopes; use the Ulam path"))?;
    Ok(transfer_tent(peak, slope, g))
}

/// Finite atomic measure plus an absolutely continuous step density.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct JumpMeasure {
    pub atoms: Vec<(f64, f64)>,
    pub ac_part: StepFunction,
}

impl JumpMeasure {
    pub fn atom(u: f64, w: f64) -> Self {
        JumpMeasure {
            atoms: vec![(u, w)],
            ac_part: StepFunction::zero(),
        }
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.1).sum::<f64>() + self.ac_part.integral()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty() && self.ac_part.is_zero()
    }

    /// Integral of phi against the measure.
    pub fn integrate(&self, phi: &Observable) -> Result<f64> {
        let a: f64 = self.atoms.iter().map(|(u, w)| w * phi.eval(*u)).sum();
        Ok(a + integrate_against(phi, &self.ac_part)?)
    }
}

/// Push a measure k steps with the tent map whose critical orbit is `orbit`:
/// atoms at c_j move to c_{j+k}, the density is transferred exactly.
pub fn push_jump_measure(
    orbit: &CriticalOrbit,
    peak: f64,
    slope: f64,
    mu: &JumpMeasure,
    k: usize,
) -> Result<JumpMeasure> {
    let mut atoms = Vec::with_capacity(mu.atoms.len());
    for &(u, w) in &mu.atoms {
        let j = orbit
            .index_of(u)
            .ok_or_else(|| Error::model(format!("atom at {u} is not on the stored orbit")))?;
        let target = orbit.points.get(j + k).ok_or_else(|| {
            Error::model(format!("orbit too short to push c_{} by {k}", j + 1))
        })?;
        atoms.push((*target, w));
    }
    let mut ac = mu.ac_part.clone();
    for _ in 0..k {
        ac = transfer_tent(peak, slope, &ac);
    }
    Ok(JumpMeasure { atoms, ac_part: ac })
}
