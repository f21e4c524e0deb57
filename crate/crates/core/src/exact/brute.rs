use serde::{Deserialize, Serialize};

use crate::config::Configuration;
use crate::error::{Error, Result};
use crate::marks::OptMark;
use crate::models::{ScoreModel, Scorer};
use crate::score::ExtendedScore;

/// Default limit on the number of markings brute force may enumerate.
pub const BRUTE_FORCE_CAP: u128 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BruteForceResult {
    pub marks: Vec<OptMark>,
    /// Total window score of `marks`.
    pub value: ExtendedScore,
    /// Number of markings attaining the optimum.
    pub multiplicity: u64,
}

/// Exact maximizer of the total window score over all markings of a discrete
/// mark space; the first maximizer in lexicographic enumeration order wins.
pub fn brute_force_optimum(c: &Configuration, m: &ScoreModel, cap: u128) -> Result<BruteForceResult> {
    let all: Vec<usize> = (0..c.len()).collect();
    brute_force_optimum_over(c, m, &all, cap)
}

struct Enumeration<'s, 'a> {
    scorer: &'s Scorer<'a>,
    marks: Vec<OptMark>,
    free: Vec<usize>,
    values: Vec<Vec<OptMark>>,
    groups: Vec<Vec<usize>>,
    choice: Vec<usize>,
    best: Option<(ExtendedScore, Vec<usize>)>,
    multiplicity: u64,
}

impl Enumeration<'_, '_> {
    /// Number of completions below depth `t`.
    fn completions(&self, t: usize) -> u64 {
        self.values[t..]
            .iter()
            .fold(1u64, |acc, v| acc.saturating_mul(v.len() as u64))
    }

    fn record(&mut self, value: ExtendedScore, count: u64) {
        match &self.best {
            None => {
                self.best = Some((value, self.choice.clone()));
                self.multiplicity = count;
            }
            Some((b, _)) if value > *b => {
                self.best = Some((value, self.choice.clone()));
                self.multiplicity = count;
            }
            Some((b, _)) if value == *b => self.multiplicity = self.multiplicity.saturating_add(count),
            _ => {}
        }
    }

    fn dfs(&mut self, t: usize, partial: ExtendedScore) -> Result<()> {
        let i = self.free[t];
        for a in 0..self.values[t].len() {
            self.marks[i] = self.values[t][a].clone();
            self.choice[t] = a;
            for u in (t + 1)..self.free.len() {
                self.choice[u] = 0;
            }
            let mut s = partial;
            for &p in &self.groups[t] {
                s = s + self.scorer.score(&self.marks, p)?;
                if s == ExtendedScore::NegInfinity {
                    break;
                }
            }
            if t + 1 == self.free.len() {
                self.record(s, 1);
            } else if s == ExtendedScore::NegInfinity {
                // every completion is inadmissible
                let count = self.completions(t + 1);
                self.record(s, count);
            } else {
                self.dfs(t + 1, s)?;
            }
        }
        Ok(())
    }
}

/// Brute force over the marks of the points in `free`; the other points keep
/// their (set) marks.
pub fn brute_force_optimum_over(
    c: &Configuration,
    m: &ScoreModel,
    free: &[usize],
    cap: u128,
) -> Result<BruteForceResult> {
    let scorer = Scorer::prepared(m, c)?;
    let space = m.mark_space();
    if !space.is_discrete() {
        return Err(Error::validation(format!(
            "brute force needs a discrete mark space, {} has {}",
            m.id(),
            space.kind_name()
        )));
    }
    let mut free = free.to_vec();
    free.sort_unstable();
    free.dedup();
    if let Some(&bad) = free.iter().find(|&&i| i >= c.len()) {
        return Err(Error::validation(format!("free index {bad} out of range")));
    }
    let values: Vec<Vec<OptMark>> = free
        .iter()
        .map(|&i| space.discrete_values(c.len(), i).unwrap())
        .collect();
    let work = values
        .iter()
        .fold(1u128, |acc, v| acc.saturating_mul(v.len() as u128));
    if work > cap {
        return Err(Error::WorkCap { required: work, cap });
    }
    let mut marks = c.marks();
    let mut is_free = vec![false; c.len()];
    for (t, &i) in free.iter().enumerate() {
        is_free[i] = true;
        if values[t].is_empty() {
            return Err(Error::validation(format!("point {i} has no admissible mark")));
        }
        marks[i] = values[t][0].clone();
    }
    scorer.check_marks(&marks)?;
    if free.is_empty() {
        let value = scorer.total(&marks)?;
        return Ok(BruteForceResult {
            marks,
            value,
            multiplicity: 1,
        });
    }
    // score of p becomes final once the last free point it depends on is set
    let mut last: Vec<Option<usize>> = vec![None; c.len()];
    for (t, &i) in free.iter().enumerate() {
        last[i] = Some(t);
        for p in scorer.influenced_by(i) {
            last[p] = Some(t);
        }
    }
    let mut groups = vec![Vec::new(); free.len()];
    for (p, l) in last.iter().enumerate() {
        if let Some(t) = l {
            groups[*t].push(p);
        }
    }
    let k = free.len();
    let mut e = Enumeration {
        scorer: &scorer,
        marks,
        free,
        values,
        groups,
        choice: vec![0; k],
        best: None,
        multiplicity: 0,
    };
    e.dfs(0, ExtendedScore::ZERO)?;
    let (_, choice) = e.best.clone().expect("at least one marking");
    let mut marks = e.marks;
    for (t, &i) in e.free.iter().enumerate() {
        marks[i] = e.values[t][choice[t]].clone();
    }
    let value = scorer.total(&marks)?;
    Ok(BruteForceResult {
        marks,
        value,
        multiplicity: e.multiplicity,
    })
}
