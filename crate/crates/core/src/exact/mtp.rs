use serde::{Deserialize, Serialize};

use crate::config::Configuration;
use crate::error::{Error, Result};
use crate::marks::OptMark;
use crate::models::{ScoreModel, Scorer};

/// Interval of mark values; `open_lo` excludes the left end.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarkInterval {
    pub lo: f64,
    pub hi: f64,
    pub open_lo: bool,
}

impl MarkInterval {
    /// `(0, 1]`.
    pub const UNIT_OPEN_LEFT: MarkInterval = MarkInterval {
        lo: 0.0,
        hi: 1.0,
        open_lo: true,
    };

    pub fn closed(lo: f64, hi: f64) -> Self {
        MarkInterval { lo, hi, open_lo: false }
    }

    fn validate(&self, tol: f64) -> Result<()> {
        if !(tol > 0.0) {
            return Err(Error::validation(format!("tolerance must be positive, got {tol}")));
        }
        if !(self.lo.is_finite() && self.hi.is_finite() && self.lo < self.hi) {
            return Err(Error::validation(format!("bad interval [{}, {}]", self.lo, self.hi)));
        }
        Ok(())
    }

    fn effective_lo(&self, tol: f64) -> f64 {
        if self.open_lo {
            self.lo + tol.min((self.hi - self.lo) / 2.0)
        } else {
            self.lo
        }
    }
}

/// Shape assumed by [`mtp_argmax`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Shape {
    /// Unimodal: bisection on the sign of a central-difference slope.
    Concave,
    /// Dense grid at resolution `tol` followed by local refinement.
    General,
}

/// Grid points allowed in general mode.
pub const ARGMAX_GRID_CAP: usize = 10_000_000;

/// Smallest maximizer of `f` over `domain` up to `tol`.
pub fn mtp_argmax(f: impl Fn(f64) -> f64, domain: MarkInterval, tol: f64, shape: Shape) -> Result<f64> {
    domain.validate(tol)?;
    let lo = domain.effective_lo(tol);
    let hi = domain.hi;
    match shape {
        Shape::Concave => {
            let h = tol.max(1e-8 * (hi - lo));
            let rising = |x: f64| f((x + h).min(hi)) > f((x - h).max(lo));
            let (fl, fh) = (f(lo), f(hi));
            if !fl.is_finite() && !fh.is_finite() && !f(0.5 * (lo + hi)).is_finite() {
                return Err(Error::validation("objective is not finite on the domain"));
            }
            if rising(hi) {
                return Ok(hi);
            }
            let (mut a, mut b) = (lo, hi);
            while b - a > tol {
                let mid = 0.5 * (a + b);
                if rising(mid) {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            let x = 0.5 * (a + b);
            Ok(if f(a) >= f(x) { a } else { x })
        }
        Shape::General => {
            let steps = ((hi - lo) / tol).ceil();
            if steps + 1.0 > ARGMAX_GRID_CAP as f64 {
                return Err(Error::WorkCap {
                    required: steps as u128 + 1,
                    cap: ARGMAX_GRID_CAP as u128,
                });
            }
            let steps = steps as usize;
            let grid: Vec<f64> = (0..=steps).map(|k| (lo + k as f64 * tol).min(hi)).collect();
            let values: Vec<f64> = grid.iter().map(|&x| f(x)).collect();
            let fmax = values
                .iter()
                .copied()
                .filter(|v| v.is_finite())
                .fold(f64::NEG_INFINITY, f64::max);
            if fmax == f64::NEG_INFINITY {
                return Err(Error::validation("objective is not finite on the domain"));
            }
            // values equal up to rounding count as ties
            let slack = 1e-12 * fmax.abs().max(1.0);
            let k = values.iter().position(|&v| v >= fmax - slack).unwrap();
            // golden-section refinement between the grid neighbours
            let (mut a, mut b) = (grid[k.saturating_sub(1)], grid[(k + 1).min(steps)]);
            let g = 0.5 * (5f64.sqrt() - 1.0);
            for _ in 0..100 {
                let x1 = b - g * (b - a);
                let x2 = a + g * (b - a);
                if f(x1) >= f(x2) {
                    b = x2;
                } else {
                    a = x1;
                }
            }
            let x = 0.5 * (a + b);
            Ok(if f(x) > values[k] { x } else { grid[k] })
        }
    }
}

/// Root of a decreasing slope on `domain`, or `hi` when the slope is still
/// nonnegative there: the maximizer of a concave function given its derivative.
pub fn concave_argmax_with_slope(df: impl Fn(f64) -> f64, domain: MarkInterval, tol: f64) -> Result<f64> {
    domain.validate(tol)?;
    let hi = domain.hi;
    if df(hi) >= 0.0 {
        return Ok(hi);
    }
    let (mut a, mut b) = (domain.lo, hi);
    if !domain.open_lo && df(a) <= 0.0 {
        return Ok(a);
    }
    for _ in 0..200 {
        if b - a <= tol {
            break;
        }
        let mid = 0.5 * (a + b);
        if df(mid) > 0.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}

/// Interference coefficients `1/(1 + D_{i→j}^β)` of point `i` on every other
/// receiver, `D_{i→j}` the distance from `X_i` to `X_j + Y_j`.
pub fn aloha_coefficients(s: &Scorer, i: usize, beta: f64) -> Vec<f64> {
    (0..s.len())
        .filter(|&j| j != i)
        .map(|j| 1.0 / (1.0 + s.receiver_dist(i, j).powf(beta)))
        .collect()
}

/// `g(p) = ln p + Σ ln(1 − a p)` and its derivative.
pub fn aloha_objective(a: &[f64], p: f64) -> (f64, f64) {
    let value = p.ln() + a.iter().map(|&x| (-x * p).ln_1p()).sum::<f64>();
    let slope = 1.0 / p - a.iter().map(|&x| x / (1.0 - p * x)).sum::<f64>();
    (value, slope)
}

/// Aloha access probabilities maximizing each point's total contribution to
/// all scores, one concave problem per point.
pub fn aloha_optimal_marking(c: &Configuration, beta: f64, tol: f64) -> Result<Configuration> {
    let model = ScoreModel::AlohaMac { beta };
    model.validate_for(&c.window)?;
    let unset = c.with_marks(&vec![OptMark::Unset; c.len()]);
    let s = Scorer::prepared(&model, &unset)?;
    let marks = (0..c.len())
        .map(|i| {
            let a = aloha_coefficients(&s, i, beta);
            concave_argmax_with_slope(|p| aloha_objective(&a, p).1, MarkInterval::UNIT_OPEN_LEFT, tol)
                .map(OptMark::AccessProb)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(c.with_marks(&marks))
}
