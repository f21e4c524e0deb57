use super::{prob_mark, Scorer};
use crate::error::Result;
use crate::marks::OptMark;
use crate::score::ExtendedScore;

pub(super) fn score(s: &Scorer, marks: &[OptMark], i: usize, beta: f64) -> Result<ExtendedScore> {
    let p_i = prob_mark(marks, i)?;
    let mut total = p_i.ln();
    for j in 0..s.len() {
        if j == i {
            continue;
        }
        let p_j = prob_mark(marks, j)?;
        let a = p_j / (1.0 + s.receiver_dist(j, i).powf(beta));
        if a >= 1.0 {
            return Ok(ExtendedScore::NegInfinity);
        }
        total += (-a).ln_1p();
    }
    Ok(ExtendedScore::Finite(total))
}
