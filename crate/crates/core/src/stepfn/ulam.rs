//! Ulam discretization of the transfer operator.
//!
//! Convention: `P[i][j] = |cell_i ∩ f^{-1}(cell_j)| / |cell_i|` is row
//! stochastic and acts on cell-mass row vectors, `m -> m P`. As an operator on
//! column vectors of masses the transfer operator is therefore `P^T`.

use super::StepFunction;
use crate::error::{Error, Result};
use crate::maps::{critical_orbit, Side, UnimodalMap};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use std::io::Write;

/// Maximum number of postcritical points inserted as cell edges.
pub const ORBIT_EDGES: usize = 30;

#[derive(Debug, Clone)]
pub struct UlamOperator {
    edges: Vec<f64>,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    weights: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct SpectralData {
    /// Cell masses of the leading fixed density (sum 1).
    pub mass: Vec<f64>,
    /// Leading density values per cell.
    pub rho_vec: Vec<f64>,
    pub kappa_hat: f64,
    pub residual: f64,
    pub iterations: usize,
}

/// Uniform grid of n cells with the extra points inserted as edges.
pub fn augmented_edges(n: usize, extra: &[f64]) -> Vec<f64> {
    let mut e: Vec<f64> = (0..=n).map(|i| -1.0 + 2.0 * i as f64 / n as f64).collect();
    for &x in extra {
        if x > -1.0 && x < 1.0 {
            e.push(x);
        }
    }
    e.sort_by(f64::total_cmp);
    let mut out: Vec<f64> = Vec::with_capacity(e.len());
    for x in e {
        match out.last() {
            Some(&l) if x - l < 1e-12 => {
                // keep the exact grid ends and the inserted point over a near twin
                if x == 1.0 {
                    *out.last_mut().unwrap() = 1.0;
                }
            }
            _ => out.push(x),
        }
    }
    out
}

/// Edges for a map: uniform grid plus c and c_1..c_J.
pub fn map_edges(map: &UnimodalMap, n: usize) -> Vec<f64> {
    let mut extra = vec![map.c()];
    if let Ok(o) = critical_orbit(map, ORBIT_EDGES + 1) {
        extra.extend(o.points.iter().take(ORBIT_EDGES));
    }
    augmented_edges(n, &extra)
}

/// Ulam matrix of `map` on n uniform cells augmented with the critical orbit.
pub fn ulam_matrix(map: &UnimodalMap, n: usize) -> Result<UlamOperator> {
    if n < 16 {
        return Err(Error::domain("Ulam discretization needs n >= 16 cells"));
    }
    Ok(UlamOperator::with_edges(map, map_edges(map, n)))
}

impl UlamOperator {
    pub fn with_edges(map: &UnimodalMap, edges: Vec<f64>) -> Self {
        let n = edges.len() - 1;
        let c = map.c();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut weights = Vec::new();
        row_ptr.push(0);
        let mut row: Vec<(usize, f64)> = Vec::new();
        for i in 0..n {
            let (a, b) = (edges[i], edges[i + 1]);
            let width = b - a;
            row.clear();
            for side in [Side::Plus, Side::Minus] {
                let (lo, hi) = match side {
                    Side::Plus => (a, b.min(c)),
                    Side::Minus => (a.max(c), b),
                };
                if hi <= lo {
                    continue;
                }
                let br = map.branch(side);
                let (ya, yb) = (br.value(lo), br.value(hi));
                let (ylo, yhi) = if ya <= yb { (ya, yb) } else { (yb, ya) };
                let ylo = ylo.max(-1.0);
                let yhi = yhi.min(1.0);
                let first = edges.partition_point(|&e| e <= ylo).saturating_sub(1);
                let mut j = first;
                while j < n && edges[j] < yhi {
                    let (u, v) = (ylo.max(edges[j]), yhi.min(edges[j + 1]));
                    if v > u {
                        let len = match br {
                            crate::maps::Branch::Affine { slope, .. } => (v - u) / slope.abs(),
                            _ => {
                                let xu = br.inverse(u, lo, hi).unwrap_or(lo);
                                let xv = br.inverse(v, lo, hi).unwrap_or(hi);
                                (xv - xu).abs()
                            }
                        };
                        row.push((j, len / width));
                    }
                    j += 1;
                }
            }
            row.sort_by_key(|e| e.0);
            let mut last: Option<usize> = None;
            for &(j, w) in &row {
                if last == Some(j) {
                    *weights.last_mut().unwrap() += w;
                } else {
                    cols.push(j);
                    weights.push(w);
                    last = Some(j);
                }
            }
            // remove rounding drift so every row sums to one
            let start = *row_ptr.last().unwrap();
            let s: f64 = weights[start..].iter().sum();
            if s > 0.0 {
                for w in &mut weights[start..] {
                    *w /= s;
                }
            }
            row_ptr.push(cols.len());
        }
        UlamOperator {
            edges,
            row_ptr,
            cols,
            weights,
        }
    }

    pub fn n(&self) -> usize {
        self.edges.len() - 1
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn widths(&self) -> Vec<f64> {
        self.edges.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.n())
            .map(|i| self.weights[self.row_ptr[i]..self.row_ptr[i + 1]].iter().sum())
            .collect()
    }

    pub fn min_entry(&self) -> f64 {
        self.weights.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// m -> m P on cell masses.
    pub fn push(&self, m: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n()];
        self.push_into(m, &mut out);
        out
    }

    pub fn push_into(&self, m: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        for (i, &mi) in m.iter().enumerate() {
            if mi == 0.0 {
                continue;
            }
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                out[self.cols[k]] += mi * self.weights[k];
            }
        }
    }

    pub fn push_complex(&self, m: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.n()];
        for (i, &mi) in m.iter().enumerate() {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                out[self.cols[k]] += mi * self.weights[k];
            }
        }
        out
    }

    /// Cell masses of a step function on this grid.
    pub fn masses_of(&self, g: &StepFunction) -> Vec<f64> {
        g.cell_masses(&self.edges)
    }

    /// Step function with the given cell masses.
    pub fn density_of(&self, m: &[f64]) -> StepFunction {
        let v: Vec<f64> = m
            .iter()
            .zip(self.edges.windows(2))
            .map(|(m, w)| m / (w[1] - w[0]))
            .collect();
        StepFunction::from_cells(&self.edges, &v).expect("valid cell grid")
    }

    /// Coordinate-format export: `row,col,weight`.
    pub fn write_triplets<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["row", "col", "weight"])?;
        for i in 0..self.n() {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                wr.write_record([
                    i.to_string(),
                    self.cols[k].to_string(),
                    crate::io::fmt17(self.weights[k]),
                ])?;
            }
        }
        wr.flush()?;
        Ok(())
    }

    fn dense(&self) -> DMatrix<f64> {
        let n = self.n();
        let mut d = DMatrix::zeros(n, n);
        for i in 0..n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                d[(i, self.cols[k])] = self.weights[k];
            }
        }
        d
    }
}

/// Leading invariant density by power iteration; kappa_hat from a dense
/// eigensolve for n <= 1200, otherwise from iteration on mean-zero vectors.
pub fn leading_density(p: &UlamOperator) -> Result<SpectralData> {
    leading_density_with(p, 1e-12, 20_000)
}

/// Stationary cell masses by power iteration: (mass, residual, iterations).
pub fn stationary_mass(p: &UlamOperator, tol: f64, max_iter: usize) -> Result<(Vec<f64>, f64, usize)> {
    let n = p.n();
    let widths = p.widths();
    let mut m: Vec<f64> = widths.iter().map(|w| w / 2.0).collect();
    let mut next = vec![0.0; n];
    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    for it in 0..max_iter {
        p.push_into(&m, &mut next);
        let s: f64 = next.iter().sum();
        next.iter_mut().for_each(|v| *v /= s);
        residual = m.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut m, &mut next);
        iterations = it + 1;
        if residual < tol {
            break;
        }
    }
    if !(residual < 1e-10) {
        return Err(Error::numerical("power iteration did not converge", residual));
    }
    Ok((m, residual, iterations))
}

pub fn leading_density_with(p: &UlamOperator, tol: f64, max_iter: usize) -> Result<SpectralData> {
    let n = p.n();
    let widths = p.widths();
    let (m, residual, iterations) = stationary_mass(p, tol, max_iter)?;
    let kappa_hat = if n <= 1200 {
        second_eigenvalue_dense(p)
    } else {
        second_eigenvalue_iterative(p)
    };
    let rho_vec = m.iter().zip(&widths).map(|(m, w)| m / w).collect();
    Ok(SpectralData {
        mass: m,
        rho_vec,
        kappa_hat,
        residual,
        iterations,
    })
}

fn second_eigenvalue_dense(p: &UlamOperator) -> f64 {
    let ev = p.dense().complex_eigenvalues();
    let one = (0..ev.len())
        .min_by(|&a, &b| (ev[a] - 1.0).norm().total_cmp(&(ev[b] - 1.0).norm()))
        .unwrap_or(0);
    (0..ev.len())
        .filter(|&i| i != one)
        .map(|i| ev[i].norm())
        .fold(0.0, f64::max)
}

fn second_eigenvalue_iterative(p: &UlamOperator) -> f64 {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    let n = p.n();
    let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mean = v.iter().sum::<f64>() / n as f64;
    v.iter_mut().for_each(|x| *x -= mean);
    let norm = |v: &[f64]| v.iter().map(|x| x.abs()).sum::<f64>();
    let mut log_growth = Vec::new();
    for it in 0..600 {
        let w = p.push(&v);
        let s = norm(&w) / norm(&v);
        let nw = norm(&w);
        v = w.iter().map(|x| x / nw).collect();
        if it >= 200 {
            log_growth.push(s.ln());
        }
    }
    (log_growth.iter().sum::<f64>() / log_growth.len() as f64).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResolventMethod {
    Neumann,
    Direct,
}

#[derive(Debug, Clone)]
pub struct ResolventSolution {
    pub u: Vec<Complex64>,
    pub terms: usize,
    pub tail_bound: f64,
    /// Observed geometric rate of the Neumann terms (0 for direct solves).
    pub rate: f64,
}

/// Solve (I - z L) u = w for cell masses, L the Ulam transfer operator.
/// At |z| >= 1 the right-hand side must have zero total mass.
pub fn resolvent_solve(
    p: &UlamOperator,
    z: Complex64,
    w: &[Complex64],
    method: ResolventMethod,
) -> Result<ResolventSolution> {
    let total: Complex64 = w.iter().sum();
    let scale: f64 = w.iter().map(|x| x.norm()).sum::<f64>().max(1e-300);
    if z.norm() >= 1.0 && total.norm() > 1e-9 * scale.max(1.0) {
        return Err(Error::Singular(format!(
            "I - zL is singular on constants at |z| = {}; right-hand side has mass {}",
            z.norm(),
            total
        )));
    }
    match method {
        ResolventMethod::Neumann => neumann(p, z, w),
        ResolventMethod::Direct => direct(p, z, w),
    }
}

fn neumann(p: &UlamOperator, z: Complex64, w: &[Complex64]) -> Result<ResolventSolution> {
    let norm = |v: &[Complex64]| v.iter().map(|x| x.norm()).sum::<f64>();
    let mut u = w.to_vec();
    let mut term = w.to_vec();
    let w0 = norm(w);
    if w0 == 0.0 {
        return Ok(ResolventSolution {
            u,
            terms: 0,
            tail_bound: 0.0,
            rate: 0.0,
        });
    }
    let mut norms = vec![w0];
    for k in 1..100_000 {
        term = p.push_complex(&term).into_iter().map(|x| x * z).collect();
        let tn = norm(&term);
        norms.push(tn);
        u.iter_mut().zip(&term).for_each(|(a, b)| *a += b);
        if tn == 0.0 {
            return Ok(ResolventSolution {
                u,
                terms: k,
                tail_bound: 0.0,
                rate: 0.0,
            });
        }
        if k >= 40 {
            let r = (norms[k] / norms[k - 20]).powf(1.0 / 20.0);
            if r >= 1.0 && tn > 1e3 * w0 {
                return Err(Error::Radius {
                    modulus: z.norm(),
                    radius: 1.0 / r,
                });
            }
            if r < 1.0 {
                let tail = tn * r / (1.0 - r);
                if tail < 1e-15 * w0 {
                    return Ok(ResolventSolution {
                        u,
                        terms: k + 1,
                        tail_bound: tail,
                        rate: r,
                    });
                }
            }
        }
    }
    Err(Error::numerical("Neumann series did not converge", *norms.last().unwrap()))
}

fn direct(p: &UlamOperator, z: Complex64, w: &[Complex64]) -> Result<ResolventSolution> {
    let n = p.n();
    let (mass, _, _) = stationary_mass(p, 1e-13, 50_000)?;
    let d = p.dense();
    // A = I - z P^T + z rho 1^T is invertible and agrees with I - z P^T on
    // mean-zero vectors
    let mut a = DMatrix::<Complex64>::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let mut v = -z * d[(j, i)] + z * mass[i];
            if i == j {
                v += 1.0;
            }
            a[(i, j)] = v;
        }
    }
    let b = DVector::from_column_slice(w);
    let lu = a.lu();
    let u = lu
        .solve(&b)
        .ok_or_else(|| Error::Singular("dense resolvent matrix is singular".into()))?;
    // the projected system is only valid for mean-zero data when |z| >= 1
    let total: Complex64 = w.iter().sum();
    let mut u: Vec<Complex64> = u.iter().copied().collect();
    if z.norm() < 1.0 && total.norm() > 0.0 {
        // add back the part along rho: (I - zL)^{-1} rho = rho / (1 - z)
        let correction = total * (1.0 / (Complex64::new(1.0, 0.0) - z) - 1.0);
        for (ui, mi) in u.iter_mut().zip(&mass) {
            *ui += correction * mi;
        }
    }
    Ok(ResolventSolution {
        u,
        terms: 0,
        tail_bound: 0.0,
        rate: 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tent() -> UnimodalMap {
        UnimodalMap::tent(0.85, 1.8).unwrap()
    }

    #[test]
    fn rows_are_stochastic() {
        let p = ulam_matrix(&tent(), 200).unwrap();
        for s in p.row_sums() {
            assert!((s - 1.0).abs() < 1e-12);
        }
        assert!(p.min_entry() >= 0.0);
    }

    #[test]
    fn leading_density_converges() {
        let p = ulam_matrix(&tent(), 200).unwrap();
        let s = leading_density(&p).unwrap();
        assert!(s.residual < 1e-10);
        assert!(s.kappa_hat < 1.0);
        assert!((s.mass.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn resolvent_at_zero_is_identity() {
        let p = ulam_matrix(&tent(), 64).unwrap();
        let w: Vec<Complex64> = (0..p.n()).map(|i| Complex64::new(i as f64, -1.0)).collect();
        let r = resolvent_solve(&p, Complex64::new(0.0, 0.0), &w, ResolventMethod::Neumann).unwrap();
        assert_eq!(r.u, w);
    }

    #[test]
    fn neumann_and_direct_agree() {
        let p = ulam_matrix(&tent(), 64).unwrap();
        let n = p.n();
        let mut w: Vec<Complex64> = (0..n).map(|i| Complex64::new((i as f64 * 0.37).sin(), 0.0)).collect();
        let mean = w.iter().sum::<Complex64>() / n as f64;
        w.iter_mut().for_each(|x| *x -= mean);
        for z in [Complex64::new(1.0, 0.0), Complex64::new(0.3, 0.5)] {
            let a = resolvent_solve(&p, z, &w, ResolventMethod::Neumann).unwrap();
            let b = resolvent_solve(&p, z, &w, ResolventMethod::Direct).unwrap();
            let d: f64 = a.u.iter().zip(&b.u).map(|(x, y)| (x - y).norm()).sum();
            assert!(d < 1e-10, "{d}");
        }
        let mut bad = w.clone();
        bad[0] += 0.1;
        assert!(matches!(
            resolvent_solve(&p, Complex64::new(1.0, 0.0), &bad, ResolventMethod::Neumann),
            Err(Error::Singular(_))
        ));
    }
}
