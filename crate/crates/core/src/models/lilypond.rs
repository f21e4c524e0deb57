use super::{radius_mark, Scorer};
use crate::error::Result;
use crate::marks::OptMark;
use crate::score::ExtendedScore;
use crate::window::GEOM_TOL;

/// `min_j max(D/2, D − r_j)` over the other points, `+∞` for a lone point.
pub(crate) fn growth_limit(s: &Scorer, marks: &[OptMark], i: usize) -> Result<f64> {
    let mut best = f64::INFINITY;
    let mut err = None;
    s.for_each_dep(i, |j| {
        if err.is_some() {
            return;
        }
        match radius_mark(marks, j) {
            Ok(r_j) => {
                let d = s.dist(i, j);
                best = best.min((d / 2.0).max(d - r_j));
            }
            Err(e) => err = Some(e),
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(best),
    }
}

pub(super) fn score(s: &Scorer, marks: &[OptMark], i: usize) -> Result<ExtendedScore> {
    let r_i = radius_mark(marks, i)?;
    if s.len() == 1 {
        return Ok(ExtendedScore::ZERO);
    }
    let u = growth_limit(s, marks, i)?;
    if r_i > u + GEOM_TOL {
        Ok(ExtendedScore::NegInfinity)
    } else {
        Ok(ExtendedScore::Finite((r_i - u).min(0.0)))
    }
}
