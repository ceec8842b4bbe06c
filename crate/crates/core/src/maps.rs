//! Piecewise expanding unimodal maps on I = [-1, 1], one-parameter clamped
//! families, postcritical orbits and expansion diagnostics.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::Arc;

pub type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

const CONTINUITY_TOL: f64 = 1e-12;
const RANGE_TOL: f64 = 1e-12;
const EXPANSION_SAMPLES: usize = 257;

/// Tolerance for recognising a return of the critical orbit.
pub const TOL_PER: f64 = 1e-9;

/// One monotone branch. Affine branches get exact inverses.
#[derive(Clone)]
pub enum Branch {
    Affine { slope: f64, intercept: f64 },
    Smooth { value: RealFn, deriv: RealFn },
}

impl fmt::Debug for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Branch::Affine { slope, intercept } => write!(f, "Affine({slope} x + {intercept})"),
            Branch::Smooth { .. } => write!(f, "Smooth(..)"),
        }
    }
}

impl Branch {
    pub fn affine(slope: f64, intercept: f64) -> Self {
        Branch::Affine { slope, intercept }
    }

    pub fn smooth(
        value: impl Fn(f64) -> f64 + Send + Sync + 'static,
        deriv: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Branch::Smooth {
            value: Arc::new(value),
            deriv: Arc::new(deriv),
        }
    }

    /// Cubic Hermite interpolant of a sampled table (x ascending).
    pub fn from_table(xs: Vec<f64>, vals: Vec<f64>, ders: Vec<f64>) -> Result<Self> {
        if xs.len() < 2 || xs.len() != vals.len() || xs.len() != ders.len() {
            return Err(Error::domain("branch table needs >= 2 rows of equal length"));
        }
        if xs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::domain("branch table abscissae must increase"));
        }
        let xs = Arc::new(xs);
        let vals = Arc::new(vals);
        let ders = Arc::new(ders);
        let locate = {
            let xs = xs.clone();
            move |x: f64| -> (usize, f64, f64) {
                let n = xs.len();
                let i = match xs.partition_point(|&v| v <= x) {
                    0 => 0,
                    p if p >= n => n - 2,
                    p => p - 1,
                };
                let h = xs[i + 1] - xs[i];
                (i, (x - xs[i]) / h, h)
            }
        };
        let (l1, v1, d1) = (locate.clone(), vals.clone(), ders.clone());
        let value = move |x: f64| {
            let (i, s, h) = l1(x);
            let (s2, s3) = (s * s, s * s * s);
            (2.0 * s3 - 3.0 * s2 + 1.0) * v1[i]
                + (s3 - 2.0 * s2 + s) * h * d1[i]
                + (-2.0 * s3 + 3.0 * s2) * v1[i + 1]
                + (s3 - s2) * h * d1[i + 1]
        };
        let deriv = move |x: f64| {
            let (i, s, h) = locate(x);
            let s2 = s * s;
            ((6.0 * s2 - 6.0 * s) * vals[i]
                + (3.0 * s2 - 4.0 * s + 1.0) * h * ders[i]
                + (-6.0 * s2 + 6.0 * s) * vals[i + 1]
                + (3.0 * s2 - 2.0 * s) * h * ders[i + 1])
                / h
        };
        Ok(Branch::smooth(value, deriv))
    }

    #[inline]
    pub fn value(&self, x: f64) -> f64 {
        match self {
            Branch::Affine { slope, intercept } => slope * x + intercept,
            Branch::Smooth { value, .. } => value(x),
        }
    }

    #[inline]
    pub fn deriv(&self, x: f64) -> f64 {
        match self {
            Branch::Affine { slope, .. } => *slope,
            Branch::Smooth { deriv, .. } => deriv(x),
        }
    }

    /// Solve value(x) = y for x in [lo, hi]; None when y is outside the image.
    pub fn inverse(&self, y: f64, lo: f64, hi: f64) -> Option<f64> {
        let (ya, yb) = (self.value(lo), self.value(hi));
        let (ymin, ymax) = if ya <= yb { (ya, yb) } else { (yb, ya) };
        if y < ymin || y > ymax {
            return None;
        }
        match self {
            Branch::Affine { slope, intercept } => Some(((y - intercept) / slope).clamp(lo, hi)),
            Branch::Smooth { .. } => {
                let increasing = yb >= ya;
                let (mut a, mut b) = (lo, hi);
                for _ in 0..200 {
                    let m = 0.5 * (a + b);
                    if m <= a || m >= b {
                        break;
                    }
                    let below = self.value(m) < y;
                    if below == increasing {
                        a = m;
                    } else {
                        b = m;
                    }
                }
                Some(0.5 * (a + b))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Plus,
    Minus,
}

/// Continuous unimodal map on [-1, 1]: increasing on [-1, c], decreasing on [c, 1].
#[derive(Debug, Clone)]
pub struct UnimodalMap {
    c: f64,
    plus: Branch,
    minus: Branch,
}

impl UnimodalMap {
    pub fn new(c: f64, plus: Branch, minus: Branch) -> Result<Self> {
        if !(c > -1.0 && c < 1.0) {
            return Err(Error::domain(format!("turning point {c} not in (-1, 1)")));
        }
        let gap = (plus.value(c) - minus.value(c)).abs();
        if !(gap <= CONTINUITY_TOL) {
            return Err(Error::Continuity { gap });
        }
        let map = UnimodalMap { c, plus, minus };
        for k in 0..EXPANSION_SAMPLES {
            let s = k as f64 / (EXPANSION_SAMPLES - 1) as f64;
            let xp = -1.0 + s * (c + 1.0);
            let xm = c + s * (1.0 - c);
            let dp = map.plus.deriv(xp);
            let dm = map.minus.deriv(xm);
            if !(dp > 1.0) {
                return Err(Error::domain(format!(
                    "increasing branch not expanding: f'({xp}) = {dp}"
                )));
            }
            if !(dm < -1.0) {
                return Err(Error::domain(format!(
                    "decreasing branch not expanding: f'({xm}) = {dm}"
                )));
            }
        }
        for x in [-1.0, c, 1.0] {
            let y = map.eval(x);
            if !(-1.0 - RANGE_TOL..=1.0 + RANGE_TOL).contains(&y) {
                return Err(Error::domain(format!("f({x}) = {y} leaves [-1, 1]")));
            }
        }
        Ok(map)
    }

    /// Symmetric tent x -> peak - slope |x| with turning point 0.
    pub fn tent(peak: f64, slope: f64) -> Result<Self> {
        UnimodalMap::new(0.0, Branch::affine(slope, peak), Branch::affine(-slope, peak))
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn branch(&self, side: Side) -> &Branch {
        match side {
            Side::Plus => &self.plus,
            Side::Minus => &self.minus,
        }
    }

    #[inline]
    pub fn side(&self, x: f64) -> Side {
        if x <= self.c {
            Side::Plus
        } else {
            Side::Minus
        }
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        if x <= self.c {
            self.plus.value(x)
        } else {
            self.minus.value(x)
        }
    }

    /// Derivative; at c the increasing branch is used.
    #[inline]
    pub fn deriv(&self, x: f64) -> f64 {
        if x <= self.c {
            self.plus.deriv(x)
        } else {
            self.minus.deriv(x)
        }
    }

    pub fn critical_value(&self) -> f64 {
        self.eval(self.c)
    }

    /// (peak, slope) when both branches are affine with slopes +-slope and c = 0.
    pub fn tent_params(&self) -> Option<(f64, f64)> {
        match (&self.plus, &self.minus) {
            (
                Branch::Affine {
                    slope: a,
                    intercept: p,
                },
                Branch::Affine {
                    slope: b,
                    intercept: q,
                },
            ) if self.c == 0.0 && (a + b).abs() <= 1e-15 * a.abs() && (p - q).abs() <= 1e-15 => {
                Some((*p, *a))
            }
            _ => None,
        }
    }

    /// Preimages of y under the increasing and decreasing branch.
    pub fn preimages(&self, y: f64) -> (Option<f64>, Option<f64>) {
        (
            self.plus.inverse(y, -1.0, self.c),
            self.minus.inverse(y, self.c, 1.0),
        )
    }

    /// (min, max) of |f'| over a sampling grid of both branches.
    pub fn slope_range(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = 0.0f64;
        for k in 0..EXPANSION_SAMPLES {
            let s = k as f64 / (EXPANSION_SAMPLES - 1) as f64;
            for d in [
                self.plus.deriv(-1.0 + s * (self.c + 1.0)),
                self.minus.deriv(self.c + s * (1.0 - self.c)),
            ] {
                lo = lo.min(d.abs());
                hi = hi.max(d.abs());
            }
        }
        (lo, hi)
    }

    pub fn iterate(&self, x: f64, n: usize) -> f64 {
        (0..n).fold(x, |y, _| self.eval(y))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    TentFixedSlope,
    TentVaryingSlope,
    General,
}

/// Serializable description of a tent family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FamilySpec {
    pub kind: FamilyKind,
    pub lambda0: f64,
    #[serde(default)]
    pub t0: f64,
    pub eps1: f64,
}

impl FamilySpec {
    pub fn build(&self) -> Result<MapFamily> {
        match self.kind {
            FamilyKind::TentFixedSlope => make_tent_fixed_slope(self.lambda0, self.t0, self.eps1),
            FamilyKind::TentVaryingSlope => make_tent_varying_slope(self.lambda0, self.eps1),
            FamilyKind::General => Err(Error::domain(
                "general families cannot be built from a FamilySpec; use make_general",
            )),
        }
    }
}

type Rule = Arc<dyn Fn(f64) -> Result<UnimodalMap> + Send + Sync>;

/// Clamped one-parameter family t -> f_t with f_t = f_{sign(t) eps1} for |t| >= eps1.
#[derive(Clone)]
pub struct MapFamily {
    kind: FamilyKind,
    eps1: f64,
    lambda0: f64,
    t0: f64,
    base: UnimodalMap,
    rule: Rule,
    v0: RealFn,
    x0: Option<RealFn>,
}

impl fmt::Debug for MapFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MapFamily")
            .field("kind", &self.kind)
            .field("lambda0", &self.lambda0)
            .field("t0", &self.t0)
            .field("eps1", &self.eps1)
            .finish()
    }
}

impl MapFamily {
    pub fn kind(&self) -> FamilyKind {
        self.kind
    }
    pub fn eps1(&self) -> f64 {
        self.eps1
    }
    pub fn lambda0(&self) -> f64 {
        self.lambda0
    }
    pub fn t0(&self) -> f64 {
        self.t0
    }
    pub fn base(&self) -> &UnimodalMap {
        &self.base
    }

    pub fn clamp(&self, t: f64) -> f64 {
        t.clamp(-self.eps1, self.eps1)
    }

    pub fn at(&self, t: f64) -> Result<UnimodalMap> {
        if t == 0.0 {
            return Ok(self.base.clone());
        }
        (self.rule)(self.clamp(t))
    }

    /// (peak, slope) of f_t for tent kinds, clamped.
    pub fn tent_at(&self, t: f64) -> Option<(f64, f64)> {
        let s = self.clamp(t);
        match self.kind {
            FamilyKind::TentFixedSlope => Some((self.lambda0 - 1.0 + self.t0 + s, self.lambda0)),
            FamilyKind::TentVaryingSlope => {
                let l = self.lambda0 + s;
                Some((l - 1.0, l))
            }
            FamilyKind::General => None,
        }
    }

    pub fn is_tent(&self) -> bool {
        self.kind != FamilyKind::General
    }

    pub fn v0(&self, x: f64) -> f64 {
        (self.v0)(x)
    }

    pub fn v0_fn(&self) -> RealFn {
        self.v0.clone()
    }

    pub fn x0(&self) -> Option<RealFn> {
        self.x0.clone()
    }

    pub fn spec(&self) -> FamilySpec {
        FamilySpec {
            kind: self.kind,
            lambda0: self.lambda0,
            t0: self.t0,
            eps1: self.eps1,
        }
    }

    /// Replace the perturbation field (and X0) keeping the maps.
    pub fn with_field(&self, v0: RealFn, x0: Option<RealFn>) -> MapFamily {
        MapFamily {
            v0,
            x0,
            ..self.clone()
        }
    }
}

fn check_slope(lambda0: f64) -> Result<()> {
    if !(lambda0 > 1.0 && lambda0 < 2.0) {
        return Err(Error::domain(format!("lambda0 = {lambda0} not in (1, 2)")));
    }
    Ok(())
}

/// f_t(x) = lambda0 x + lambda0 - 1 + t0 + t on [-1, 0], mirrored on [0, 1].
pub fn make_tent_fixed_slope(lambda0: f64, t0: f64, eps1: f64) -> Result<MapFamily> {
    check_slope(lambda0)?;
    let bound = t0.abs().min(2.0 - lambda0 - t0);
    if !(eps1 > 0.0 && eps1 < bound) {
        return Err(Error::domain(format!(
            "eps1 = {eps1} must lie in (0, min(|t0|, 2 - lambda0 - t0)) = (0, {bound})"
        )));
    }
    let rule: Rule = Arc::new(move |t| UnimodalMap::tent(lambda0 - 1.0 + t0 + t, lambda0));
    Ok(MapFamily {
        kind: FamilyKind::TentFixedSlope,
        eps1,
        lambda0,
        t0,
        base: rule(0.0)?,
        rule,
        v0: Arc::new(|_| 1.0),
        x0: Some(Arc::new(|_| 1.0)),
    })
}

/// f_t(x) = lambda_t - 1 - lambda_t |x| with lambda_t = lambda0 + t.
pub fn make_tent_varying_slope(lambda0: f64, eps1: f64) -> Result<MapFamily> {
    check_slope(lambda0)?;
    let bound = (2.0 - lambda0).min(lambda0 - 1.0);
    if !(eps1 > 0.0 && eps1 < bound) {
        return Err(Error::domain(format!(
            "eps1 = {eps1} must lie in (0, min(2 - lambda0, lambda0 - 1)) = (0, {bound})"
        )));
    }
    let rule: Rule = Arc::new(move |t| UnimodalMap::tent(lambda0 + t - 1.0, lambda0 + t));
    Ok(MapFamily {
        kind: FamilyKind::TentVaryingSlope,
        eps1,
        lambda0,
        t0: 0.0,
        base: rule(0.0)?,
        rule,
        v0: Arc::new(|x: f64| 1.0 - x.abs()),
        x0: Some(Arc::new(move |y: f64| (y + 1.0) / lambda0)),
    })
}

/// Generic family from a base map, a parameter rule and user-supplied fields.
pub fn make_general(
    base: UnimodalMap,
    rule: impl Fn(f64) -> Result<UnimodalMap> + Send + Sync + 'static,
    eps1: f64,
    v0: RealFn,
    x0: Option<RealFn>,
) -> Result<MapFamily> {
    if !(eps1 > 0.0) {
        return Err(Error::domain("eps1 must be positive"));
    }
    let rule: Rule = Arc::new(rule);
    for t in [-eps1, eps1] {
        rule(t)?;
    }
    let (lo, _) = base.slope_range();
    Ok(MapFamily {
        kind: FamilyKind::General,
        eps1,
        lambda0: lo,
        t0: 0.0,
        base,
        rule,
        v0,
        x0,
    })
}

/// Eventual periodicity of the critical orbit: c_{start+period} = c_start.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Periodicity {
    pub start: usize,
    pub period: usize,
    /// true when c itself is periodic (c_period = c).
    pub critical: bool,
}

/// Postcritical orbit c_1..c_K (index 0 holds c_1).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CriticalOrbit {
    pub c: f64,
    pub points: Vec<f64>,
    /// `cumderivs[k] = (f^k)'(c_1)`
    pub cumderivs: Vec<f64>,
    pub signs: Vec<i8>,
    /// `sbar[k] = 1 / (f^k)'(c_1)`, so `s_1 = 1` before normalization.
    pub sbar: Vec<f64>,
    pub sides: Vec<Side>,
    pub periodic: Option<Periodicity>,
    pub lambda_min: f64,
}

impl CriticalOrbit {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Index (0-based, i.e. c_{j+1}) of the stored point equal to u.
    pub fn index_of(&self, u: f64) -> Option<usize> {
        self.points.iter().position(|&p| (p - u).abs() <= 1e-14)
    }
}

/// Iterate the critical orbit. A return to c stops the orbit and flags c as
/// periodic; a return to an earlier point flags a preperiodic tail.
pub fn critical_orbit(map: &UnimodalMap, k: usize) -> Result<CriticalOrbit> {
    if k < 2 {
        return Err(Error::domain("critical orbit depth must be >= 2"));
    }
    let c = map.c();
    let (lambda_min, _) = map.slope_range();
    let mut points = Vec::with_capacity(k);
    let mut cumderivs = Vec::with_capacity(k);
    let mut sides = Vec::with_capacity(k);
    let mut periodic = None;
    let mut x = map.critical_value();
    let mut d = 1.0;
    for i in 0..k {
        if !(-1.0 - RANGE_TOL..=1.0 + RANGE_TOL).contains(&x) {
            return Err(Error::model(format!("critical orbit left I at step {}: {x}", i + 1)));
        }
        if (x - c).abs() < TOL_PER {
            periodic = Some(Periodicity {
                start: 0,
                period: i + 1,
                critical: true,
            });
            break;
        }
        points.push(x);
        cumderivs.push(d);
        let side = map.side(x);
        sides.push(side);
        if periodic.is_none() {
            periodic = detect_return(&points, &sides);
        }
        d *= map.deriv(x);
        x = map.eval(x);
    }
    let signs = cumderivs.iter().map(|d: &f64| d.signum() as i8).collect();
    let sbar = cumderivs.iter().map(|d| 1.0 / d).collect();
    Ok(CriticalOrbit {
        c,
        points,
        cumderivs,
        signs,
        sbar,
        sides,
        periodic,
        lambda_min,
    })
}

// The newest point closes a cycle when it matches an earlier point on the
// same branch.
fn detect_return(points: &[f64], sides: &[Side]) -> Option<Periodicity> {
    let n = points.len() - 1;
    (0..n)
        .rev()
        .find(|&j| (points[j] - points[n]).abs() < TOL_PER && sides[j] == sides[n])
        .map(|j| Periodicity {
            start: j,
            period: n - j,
            critical: false,
        })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExpansionStats {
    pub lambda_n: Vec<f64>,
    pub lambda_hat: f64,
    pub good: bool,
    pub lambda_family: f64,
}

/// lambda_n(f) = inf |(f^n)'| over admissible compositions, sampled on a grid
/// of starting points (every admissible composition contains an interval).
pub fn lambda_n(map: &UnimodalMap, n_max: usize, samples: usize) -> Vec<f64> {
    if let Some((_, s)) = map.tent_params() {
        return (1..=n_max).map(|n| s.abs().powi(n as i32)).collect();
    }
    let mut mins = vec![f64::INFINITY; n_max];
    for i in 0..samples {
        let mut x = -1.0 + 2.0 * (i as f64 + 0.5) / samples as f64;
        let mut d = 1.0f64;
        for m in mins.iter_mut() {
            d *= map.deriv(x).abs();
            *m = m.min(d);
            x = map.eval(x);
        }
    }
    mins
}

fn lambda_hat_of(l: &[f64]) -> f64 {
    let n = l.len();
    l[n - 1].powf(1.0 / n as f64)
}

/// Expansion statistics; `t_grid` points sample the family for Lambda.
pub fn expansion_stats(family: &MapFamily, n: usize, t_grid: usize) -> Result<ExpansionStats> {
    if n == 0 {
        return Err(Error::domain("expansion depth must be >= 1"));
    }
    let base = family.base();
    let ln = lambda_n(base, n, 4096);
    let lambda_hat = lambda_hat_of(&ln);
    let orbit = critical_orbit(base, 200)?;
    let good = match orbit.periodic {
        Some(p) if p.critical => orbit.cumderivs.last().map_or(0.0, |d| d.abs()) > 2.0,
        _ => true,
    };
    let mut lambda_family = f64::INFINITY;
    let m = t_grid.max(1);
    for i in 0..m {
        let t = if m == 1 {
            0.0
        } else {
            -family.eps1() + 2.0 * family.eps1() * i as f64 / (m - 1) as f64
        };
        let f = family.at(t)?;
        lambda_family = lambda_family.min(lambda_hat_of(&lambda_n(&f, n, 1024)));
    }
    Ok(ExpansionStats {
        lambda_n: ln,
        lambda_hat,
        good,
        lambda_family,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_slope_family_basics() {
        let fam = make_tent_fixed_slope(1.8, 0.05, 0.01).unwrap();
        assert!((fam.base().eval(0.0) - 0.85).abs() < 1e-15);
        let a = fam.at(0.01).unwrap();
        let b = fam.at(0.02).unwrap();
        for x in [-1.0, -0.3, 0.0, 0.7, 1.0] {
            assert_eq!(a.eval(x), b.eval(x));
        }
        assert!(make_tent_fixed_slope(1.8, 0.05, 0.2).is_err());
        assert!(make_tent_fixed_slope(2.1, 0.05, 0.01).is_err());
    }

    #[test]
    fn varying_slope_family_basics() {
        let fam = make_tent_varying_slope(1.8, 0.1).unwrap();
        assert!((fam.base().eval(0.0) - 0.8).abs() < 1e-15);
        assert!((fam.at(0.01).unwrap().eval(0.0) - 0.81).abs() < 1e-15);
        let x0 = fam.x0().unwrap();
        assert_eq!(x0(-1.0), 0.0);
        assert!((x0(1.0) - 2.0 / 1.8).abs() < 1e-15);
        assert_eq!(fam.v0(-1e-300), 1.0);
        assert_eq!(fam.v0(1e-300), 1.0);
    }

    #[test]
    fn general_matches_tent() {
        let lam = 1.8;
        let p = lam - 1.0 + 0.05;
        let g = UnimodalMap::new(
            0.0,
            Branch::smooth(move |x| lam * x + p, move |_| lam),
            Branch::smooth(move |x| -lam * x + p, move |_| -lam),
        )
        .unwrap();
        let fam = make_tent_fixed_slope(lam, 0.05, 0.01).unwrap();
        for i in 0..=100 {
            let x = -1.0 + 0.02 * i as f64;
            assert!((g.eval(x) - fam.base().eval(x)).abs() < 1e-14);
        }
        let flat = UnimodalMap::new(
            0.0,
            Branch::smooth(|x| 0.9 * x + 0.5, |_| 0.9),
            Branch::affine(-1.5, 0.5),
        );
        assert!(matches!(flat, Err(Error::Domain(_))));
        let gap = UnimodalMap::new(0.0, Branch::affine(1.5, 0.5), Branch::affine(-1.5, 0.501));
        assert!(matches!(gap, Err(Error::Continuity { .. })));
    }

    #[test]
    fn orbit_values() {
        let f = UnimodalMap::tent(0.8, 1.8).unwrap();
        let o = critical_orbit(&f, 10).unwrap();
        let expect = [0.8, -0.64, -0.352, 0.1664, 0.50048];
        for (a, b) in o.points.iter().zip(expect) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!((o.cumderivs[1] + 1.8).abs() < 1e-14);
        assert!((o.cumderivs[2] + 3.24).abs() < 1e-14);
        assert!(o.periodic.is_none());
    }

    #[test]
    fn preperiodic_orbit_flagged() {
        let l = 2f64.sqrt();
        let f = UnimodalMap::tent(l - 1.0, l).unwrap();
        let o = critical_orbit(&f, 12).unwrap();
        assert!((o.points[2] - (3.0 - 2.0 * l)).abs() < 1e-12);
        let p = o.periodic.unwrap();
        assert_eq!((p.start, p.period, p.critical), (2, 1, false));
    }

    #[test]
    fn tent_expansion() {
        let fam = make_tent_fixed_slope(1.8, 0.05, 0.01).unwrap();
        let s = expansion_stats(&fam, 8, 5).unwrap();
        for (n, l) in s.lambda_n.iter().enumerate() {
            assert!((l - 1.8f64.powi(n as i32 + 1)).abs() < 1e-12);
        }
        assert!((s.lambda_hat - 1.8).abs() < 1e-12);
        assert!(s.good);
    }
}
