use std::f64::consts::PI;

use super::{retain_mark, Scorer};
use crate::error::Result;
use crate::marks::OptMark;
use crate::score::ExtendedScore;
use crate::window::GEOM_TOL;

/// Volume of a ball of radius `r` in dimension 1 or 2.
pub(crate) fn ball_volume(d: usize, r: f64) -> f64 {
    match d {
        1 => 2.0 * r,
        _ => PI * r * r,
    }
}

pub(super) fn score(s: &Scorer, marks: &[OptMark], i: usize) -> Result<ExtendedScore> {
    if !retain_mark(marks, i)? {
        return Ok(ExtendedScore::ZERO);
    }
    let r_i = s.grain(i);
    let mut overlap = false;
    let mut err = None;
    s.for_each_dep(i, |j| {
        if overlap || err.is_some() {
            return;
        }
        match retain_mark(marks, j) {
            Ok(true) => overlap = s.dist(i, j) < r_i + s.grain(j) - GEOM_TOL,
            Ok(false) => {}
            Err(e) => err = Some(e),
        }
    });
    if let Some(e) = err {
        return Err(e);
    }
    if overlap {
        Ok(ExtendedScore::NegInfinity)
    } else {
        Ok(ExtendedScore::Finite(ball_volume(s.config().window.dimension(), r_i)))
    }
}
