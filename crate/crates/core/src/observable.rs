//! Observables phi on [-1, 1]: polynomials, piecewise polynomials and
//! callables with optional derivative and antiderivative.

use crate::error::{Error, Result};
use crate::maps::RealFn;
use crate::quad::Adaptive;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

#[derive(Clone)]
pub enum Observable {
    /// Coefficients in ascending powers.
    Polynomial(Vec<f64>),
    /// `pieces[i]` applies between `breaks[i-1]` and `breaks[i]` (with
    /// implicit outer limits -1 and 1), so `pieces.len() == breaks.len() + 1`.
    Piecewise { breaks: Vec<f64>, pieces: Vec<Vec<f64>> },
    Callable {
        name: String,
        f: RealFn,
        df: Option<RealFn>,
        antideriv: Option<RealFn>,
    },
}

impl fmt::Debug for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Observable::Polynomial(c) => write!(f, "Polynomial({c:?})"),
            Observable::Piecewise { breaks, .. } => write!(f, "Piecewise({} pieces)", breaks.len() + 1),
            Observable::Callable { name, .. } => write!(f, "Callable({name})"),
        }
    }
}

/// Serializable observable description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "type")]
pub enum ObservableSpec {
    Preset { name: String },
    Polynomial { coeffs: Vec<f64> },
    Piecewise { breaks: Vec<f64>, pieces: Vec<Vec<f64>> },
}

impl ObservableSpec {
    pub fn build(&self) -> Result<Observable> {
        match self {
            ObservableSpec::Preset { name } => Observable::preset(name),
            ObservableSpec::Polynomial { coeffs } => Ok(Observable::Polynomial(coeffs.clone())),
            ObservableSpec::Piecewise { breaks, pieces } => {
                if pieces.len() != breaks.len() + 1 || breaks.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(Error::Parse("malformed piecewise observable".into()));
                }
                Ok(Observable::Piecewise {
                    breaks: breaks.clone(),
                    pieces: pieces.clone(),
                })
            }
        }
    }
}

fn horner(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &a| acc * x + a)
}

fn poly_antideriv(c: &[f64], x: f64) -> f64 {
    c.iter()
        .enumerate()
        .rev()
        .fold(0.0, |acc, (i, &a)| acc * x + a / (i + 1) as f64)
        * x
}

fn poly_deriv(c: &[f64], x: f64) -> f64 {
    c.iter()
        .enumerate()
        .skip(1)
        .rev()
        .fold(0.0, |acc, (i, &a)| acc * x + a * i as f64)
}

impl Observable {
    pub fn identity() -> Self {
        Observable::Polynomial(vec![0.0, 1.0])
    }

    pub fn constant(v: f64) -> Self {
        Observable::Polynomial(vec![v])
    }

    pub fn square() -> Self {
        Observable::Polynomial(vec![0.0, 0.0, 1.0])
    }

    pub fn sin_pi() -> Self {
        Observable::Callable {
            name: "sin(pi x)".into(),
            f: Arc::new(|x| (PI * x).sin()),
            df: Some(Arc::new(|x| PI * (PI * x).cos())),
            antideriv: Some(Arc::new(|x| -(PI * x).cos() / PI)),
        }
    }

    pub fn callable(name: &str, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Observable::Callable {
            name: name.into(),
            f: Arc::new(f),
            df: None,
            antideriv: None,
        }
    }

    /// Named presets: `x`, `x2`, `sin_pi_x`.
    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "x" => Ok(Self::identity()),
            "x2" | "x^2" => Ok(Self::square()),
            "sin_pi_x" | "sin(pi x)" => Ok(Self::sin_pi()),
            "one" | "1" => Ok(Self::constant(1.0)),
            other => Err(Error::Parse(format!("unknown observable preset {other:?}"))),
        }
    }

    fn piece(breaks: &[f64], pieces: &[Vec<f64>], x: f64) -> usize {
        breaks.partition_point(|&b| b <= x).min(pieces.len() - 1)
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Observable::Polynomial(c) => horner(c, x),
            Observable::Piecewise { breaks, pieces } => {
                horner(&pieces[Self::piece(breaks, pieces, x)], x)
            }
            Observable::Callable { f, .. } => f(x),
        }
    }

    /// phi'(x), or an error when no derivative is available.
    pub fn deriv(&self, x: f64) -> Result<f64> {
        match self {
            Observable::Polynomial(c) => Ok(poly_deriv(c, x)),
            Observable::Piecewise { breaks, pieces } => {
                Ok(poly_deriv(&pieces[Self::piece(breaks, pieces, x)], x))
            }
            Observable::Callable { df: Some(df), .. } => Ok(df(x)),
            Observable::Callable { name, .. } => Err(Error::domain(format!(
                "observable {name} has no derivative"
            ))),
        }
    }

    /// phi' as an observable whose antiderivative is phi itself.
    pub fn derivative(&self) -> Result<Observable> {
        let d = |c: &[f64]| -> Vec<f64> {
            let v: Vec<f64> = c.iter().enumerate().skip(1).map(|(i, a)| a * i as f64).collect();
            if v.is_empty() {
                vec![0.0]
            } else {
                v
            }
        };
        match self {
            Observable::Polynomial(c) => Ok(Observable::Polynomial(d(c))),
            Observable::Piecewise { breaks, pieces } => {
                if !self.is_continuous() {
                    return Err(Error::domain("derivative of a discontinuous observable"));
                }
                Ok(Observable::Piecewise {
                    breaks: breaks.clone(),
                    pieces: pieces.iter().map(|p| d(p)).collect(),
                })
            }
            Observable::Callable { name, f, df: Some(df), .. } => Ok(Observable::Callable {
                name: format!("d/dx {name}"),
                f: df.clone(),
                df: None,
                antideriv: Some(f.clone()),
            }),
            Observable::Callable { name, .. } => Err(Error::domain(format!(
                "observable {name} has no derivative"
            ))),
        }
    }

    /// Whether phi is continuous (piecewise polynomials are checked at breaks).
    pub fn is_continuous(&self) -> bool {
        match self {
            Observable::Piecewise { breaks, pieces } => breaks
                .iter()
                .enumerate()
                .all(|(i, &b)| (horner(&pieces[i], b) - horner(&pieces[i + 1], b)).abs() < 1e-12),
            _ => true,
        }
    }

    /// True when integrals are exact (closed-form antiderivative).
    pub fn has_antiderivative(&self) -> bool {
        !matches!(self, Observable::Callable { antideriv: None, .. })
    }

    /// An antiderivative Phi with Phi' = phi. For piecewise polynomials Phi is
    /// continuous across breaks.
    pub fn antiderivative(&self, x: f64) -> Option<f64> {
        match self {
            Observable::Polynomial(c) => Some(poly_antideriv(c, x)),
            Observable::Piecewise { breaks, pieces } => {
                let idx = Self::piece(breaks, pieces, x);
                let mut acc = 0.0;
                let mut left = -1.0;
                for (i, &b) in breaks.iter().enumerate().take(idx) {
                    acc += poly_antideriv(&pieces[i], b) - poly_antideriv(&pieces[i], left);
                    left = b;
                }
                Some(acc + poly_antideriv(&pieces[idx], x) - poly_antideriv(&pieces[idx], left))
            }
            Observable::Callable { antideriv, .. } => antideriv.as_ref().map(|a| a(x)),
        }
    }

    /// Exact or adaptive integral of phi over [a, b].
    pub fn integral(&self, a: f64, b: f64) -> Result<f64> {
        if let (Some(fa), Some(fb)) = (self.antiderivative(a), self.antiderivative(b)) {
            return Ok(fb - fa);
        }
        let q = Adaptive::new(1e-14, 1e-12);
        let (v, _) = q.integrate_real(|x| self.eval(x), a, b);
        if !v.is_finite() {
            return Err(Error::domain("observable produced non-finite samples"));
        }
        Ok(v)
    }

    /// phi - shift.
    pub fn shifted(&self, shift: f64) -> Observable {
        match self {
            Observable::Polynomial(c) => {
                let mut c = c.clone();
                if c.is_empty() {
                    c.push(0.0);
                }
                c[0] -= shift;
                Observable::Polynomial(c)
            }
            Observable::Piecewise { breaks, pieces } => Observable::Piecewise {
                breaks: breaks.clone(),
                pieces: pieces
                    .iter()
                    .map(|p| {
                        let mut p = if p.is_empty() { vec![0.0] } else { p.clone() };
                        p[0] -= shift;
                        p
                    })
                    .collect(),
            },
            Observable::Callable {
                name,
                f,
                df,
                antideriv,
            } => {
                let f = f.clone();
                Observable::Callable {
                    name: format!("{name} - {shift}"),
                    f: Arc::new(move |x| f(x) - shift),
                    df: df.clone(),
                    antideriv: antideriv.clone().map(|a| -> RealFn {
                        Arc::new(move |x| a(x) - shift * x)
                    }),
                }
            }
        }
    }

    pub fn scaled(&self, s: f64) -> Observable {
        match self {
            Observable::Polynomial(c) => Observable::Polynomial(c.iter().map(|a| a * s).collect()),
            Observable::Piecewise { breaks, pieces } => Observable::Piecewise {
                breaks: breaks.clone(),
                pieces: pieces
                    .iter()
                    .map(|p| p.iter().map(|a| a * s).collect())
                    .collect(),
            },
            Observable::Callable {
                name,
                f,
                df,
                antideriv,
            } => {
                let f = f.clone();
                let scale = move |g: &RealFn| -> RealFn {
                    let g = g.clone();
                    Arc::new(move |x| s * g(x))
                };
                Observable::Callable {
                    name: format!("{s} * {name}"),
                    f: Arc::new(move |x| s * f(x)),
                    df: df.as_ref().map(scale),
                    antideriv: antideriv.as_ref().map(scale),
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_integrals() {
        let p = Observable::Polynomial(vec![1.0, -2.0, 3.0]);
        let v = p.integral(-1.0, 0.5).unwrap();
        let exact = 1.5 - (0.25 - 1.0) + (0.125 + 1.0);
        assert!((v - exact).abs() < 1e-14);
        assert!((p.deriv(0.5).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn piecewise_antiderivative_is_continuous() {
        let p = Observable::Piecewise {
            breaks: vec![0.0],
            pieces: vec![vec![0.0, -1.0], vec![0.0, 1.0]],
        };
        let v = p.integral(-1.0, 1.0).unwrap();
        assert!((v - 1.0).abs() < 1e-15);
        assert!(p.is_continuous());
    }

    #[test]
    fn sin_preset() {
        let s = Observable::sin_pi();
        assert!(s.integral(-1.0, 1.0).unwrap().abs() < 1e-15);
        assert!((s.integral(0.0, 1.0).unwrap() - 2.0 / PI).abs() < 1e-15);
        let c = s.shifted(0.5);
        assert!((c.integral(0.0, 1.0).unwrap() - (2.0 / PI - 0.5)).abs() < 1e-15);
    }
}
