//! Twisted cohomological equation, horizontality index and the summation
//! identity Σ_{k≤j} s̄_k X₀(c_k) = s̄_j α(c_j).

use crate::error::{Error, Result};
use crate::maps::{CriticalOrbit, MapFamily, UnimodalMap, TOL_PER};

#[derive(Debug, Clone, Copy)]
pub struct AlphaValue {
    pub value: f64,
    pub terms: usize,
    pub tail_bound: f64,
}

fn sup_on_grid(v: &dyn Fn(f64) -> f64) -> f64 {
    (0..=400)
        .map(|i| v(-1.0 + i as f64 / 200.0).abs())
        .fold(0.0, f64::max)
}

/// α(x) = -Σ_{j<J} v(f^j x) / (f^{j+1})'(x).
pub fn alpha_series(
    map: &UnimodalMap,
    v: &dyn Fn(f64) -> f64,
    x: f64,
    j_max: usize,
) -> Result<AlphaValue> {
    let c = map.c();
    let mut y = x;
    let mut d = 1.0;
    let mut s = 0.0;
    for j in 0..j_max {
        if (y - c).abs() < TOL_PER && j + 1 < j_max {
            return Err(Error::model(format!(
                "orbit of {x} hits the turning point at step {j}"
            )));
        }
        d *= map.deriv(y);
        s -= v(y) / d;
        y = map.eval(y);
    }
    let (lmin, _) = map.slope_range();
    Ok(AlphaValue {
        value: s,
        terms: j_max,
        tail_bound: sup_on_grid(v) * lmin.powi(-(j_max as i32)) / (lmin - 1.0),
    })
}

/// α(x) for the family's base map and perturbation field v₀.
pub fn alpha_solve(family: &MapFamily, x: f64, j_max: usize) -> Result<AlphaValue> {
    let v = family.v0_fn();
    alpha_series(family.base(), &|y| v(y), x, j_max)
}

/// α(f(x)) - f'(x) α(x) - v(x).
pub fn tce_residual(map: &UnimodalMap, v: &dyn Fn(f64) -> f64, x: f64, j_max: usize) -> Result<f64> {
    let a = alpha_series(map, v, x, j_max)?;
    let b = alpha_series(map, v, map.eval(x), j_max)?;
    Ok(b.value - map.deriv(x) * a.value - v(x))
}

#[derive(Debug, Clone, Copy)]
pub struct HorizontalityIndex {
    pub value: f64,
    pub tail_bound: f64,
    pub terms: usize,
    /// v had different one-sided limits at c; the average was used.
    pub averaged_at_c: bool,
}

/// Σ_{k=0}^{K-1} v(c_k) / (f^k)'(c_1) with c_0 = c and (f^0)'(c_1) = 1.
/// For periodic c the sum runs over exactly one period.
pub fn horizontality_index_map(
    map: &UnimodalMap,
    v: &dyn Fn(f64) -> f64,
    orbit: &CriticalOrbit,
    k: usize,
) -> HorizontalityIndex {
    let c = map.c();
    let (vl, vr) = (v(c - 1e-12), v(c + 1e-12));
    let averaged = (vl - vr).abs() > 1e-9;
    let vc = if averaged { 0.5 * (vl + vr) } else { v(c) };
    let k = match orbit.periodic {
        Some(p) if p.critical => p.period.min(k),
        _ => k,
    };
    // (f^k)'(c_1) = cumderivs[k-1] * f'(c_k)
    let mut s = vc;
    let mut terms = 1;
    for i in 1..k.min(orbit.len() + 1) {
        let d = orbit.cumderivs[i - 1] * map.deriv(orbit.points[i - 1]);
        s += v(orbit.points[i - 1]) / d;
        terms += 1;
    }
    let lmin = orbit.lambda_min;
    let tail_bound = if matches!(orbit.periodic, Some(p) if p.critical) {
        0.0
    } else {
        sup_on_grid(v) * lmin.powi(-(terms as i32)) / (lmin - 1.0)
    };
    HorizontalityIndex {
        value: s,
        tail_bound,
        terms,
        averaged_at_c: averaged,
    }
}

pub fn horizontality_index(family: &MapFamily, k: usize) -> Result<HorizontalityIndex> {
    let orbit = crate::maps::critical_orbit(family.base(), k + 1)?;
    let v = family.v0_fn();
    Ok(horizontality_index_map(family.base(), &|y| v(y), &orbit, k))
}

/// Σ_{k=1}^j s̄_k X₀(c_k) - s̄_j α(c_j) with v = X₀∘f and s̄ normalized by `s1`.
pub fn magic_identity_residual(
    map: &UnimodalMap,
    orbit: &CriticalOrbit,
    x0: &dyn Fn(f64) -> f64,
    s1: f64,
    j: usize,
    alpha_terms: usize,
) -> Result<f64> {
    if j == 0 || j > orbit.len() {
        return Err(Error::domain(format!("depth j = {j} outside 1..={}", orbit.len())));
    }
    let v = |x: f64| x0(map.eval(x));
    let lhs: f64 = (0..j).map(|k| s1 * orbit.sbar[k] * x0(orbit.points[k])).sum();
    let a = alpha_series(map, &v, orbit.points[j - 1], alpha_terms)?;
    Ok(lhs - s1 * orbit.sbar[j - 1] * a.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::{critical_orbit, make_tent_fixed_slope, make_tent_varying_slope};

    #[test]
    fn alpha_conjugacy_value() {
        let f = UnimodalMap::tent(0.8, 1.8).unwrap();
        let a = alpha_series(&f, &|_| 1.0, 0.5, 60).unwrap();
        assert!((a.value - 0.625).abs() < 1e-8);
        assert_eq!(alpha_series(&f, &|_| 0.0, 0.5, 60).unwrap().value, 0.0);
        assert!(tce_residual(&f, &|_| 1.0, 0.3, 60).unwrap().abs() < 1e-8);
    }

    #[test]
    fn horizontality_of_examples() {
        let fixed = make_tent_fixed_slope(1.8, 0.05, 0.01).unwrap();
        let h = horizontality_index(&fixed, 60).unwrap();
        assert!(h.value.abs() <= h.tail_bound + 1e-15, "{:?}", h);
        let varying = make_tent_varying_slope(1.8, 0.1).unwrap();
        let h2 = horizontality_index(&varying, 60).unwrap();
        assert!(h2.value.abs() > 10.0 * h2.tail_bound);
    }

    #[test]
    fn magic_identity_horizontal() {
        let fam = make_tent_fixed_slope(1.8, 0.05, 0.01).unwrap();
        let o = critical_orbit(fam.base(), 80).unwrap();
        for j in 1..=10 {
            let r = magic_identity_residual(fam.base(), &o, &|_| 1.0, 1.0, j, 60).unwrap();
            assert!(r.abs() < 1e-8, "{j}: {r}");
        }
    }
}
