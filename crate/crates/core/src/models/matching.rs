use super::{partner_mark, Scorer};
use crate::error::Result;
use crate::marks::OptMark;
use crate::score::ExtendedScore;

pub(super) fn score(s: &Scorer, marks: &[OptMark], i: usize) -> Result<ExtendedScore> {
    let j = partner_mark(marks, i)?;
    if j >= s.len() || j == i || s.color(i) == s.color(j) {
        return Ok(ExtendedScore::NegInfinity);
    }
    match marks[j] {
        OptMark::Partner(back) if back == i => Ok(ExtendedScore::Finite(-s.dist(i, j))),
        OptMark::Partner(_) => Ok(ExtendedScore::NegInfinity),
        _ => Err(super::mark_error(marks, j, "partner")),
    }
}
