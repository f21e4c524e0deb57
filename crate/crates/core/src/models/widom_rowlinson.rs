use super::{sign_mark, Scorer};
use crate::error::Result;
use crate::marks::{OptMark, Sign3};
use crate::score::ExtendedScore;

pub(super) fn score(s: &Scorer, marks: &[OptMark], v: usize) -> Result<ExtendedScore> {
    let own = sign_mark(marks, v)?;
    if own == Sign3::Zero {
        return Ok(ExtendedScore::ZERO);
    }
    let mut conflict = false;
    let mut err = None;
    s.for_each_dep(v, |u| match sign_mark(marks, u) {
        Ok(t) => conflict |= t.conflicts(own),
        Err(e) => err = err.take().or(Some(e)),
    });
    if let Some(e) = err {
        return Err(e);
    }
    if conflict {
        Ok(ExtendedScore::NegInfinity)
    } else {
        Ok(ExtendedScore::Finite(s.weight(v, own)))
    }
}
