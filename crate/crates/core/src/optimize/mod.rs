//! Valid swaps: score differences, swap search, local search and the
//! selection of compatible swaps for parallel application.

mod domain;
mod search;

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::config::Configuration;
use crate::error::{Error, Result};
use crate::marks::{OptMark, Position};
use crate::models::{ScoreModel, Scorer};
use crate::score::{ExtendedScore, ScoreDelta};

pub use domain::{influence_domain, iterated_domain, matern_compatible_subset, matern_select, InfluenceDomain, Region};
pub use search::{find_valid_swap, local_search, local_search_within, Certificate, SearchTrace, TraceRecord};
pub(crate) use search::SearchState;

/// Upper bound on the number of swaps an exhaustive scan may enumerate.
pub const EXHAUSTIVE_WORK_CAP: u128 = 10_000_000;

/// A finite set of mark changes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwapProposal {
    pub changes: Vec<(usize, OptMark)>,
    /// Changed point with the lexicographically smallest position.
    pub center: usize,
}

impl SwapProposal {
    pub fn new(c: &Configuration, changes: Vec<(usize, OptMark)>) -> Result<Self> {
        if changes.is_empty() {
            return Err(Error::validation("a swap changes at least one point"));
        }
        let mut seen = vec![false; c.len()];
        for (i, m) in &changes {
            if *i >= c.len() {
                return Err(Error::validation(format!("swap index {i} out of range")));
            }
            if std::mem::replace(&mut seen[*i], true) {
                return Err(Error::validation(format!("swap changes point {i} twice")));
            }
            if c.points[*i].opt == *m {
                return Err(Error::validation(format!(
                    "swap leaves the mark of point {i} unchanged"
                )));
            }
            if m.is_unset() {
                return Err(Error::UnsetMark(*i));
            }
        }
        Ok(Self::unchecked(c, changes))
    }

    pub(crate) fn unchecked(c: &Configuration, changes: Vec<(usize, OptMark)>) -> Self {
        let center = changes
            .iter()
            .map(|(i, _)| *i)
            .min_by(|&a, &b| position_cmp(&c.points[a].position, &c.points[b].position))
            .expect("nonempty swap");
        SwapProposal { changes, center }
    }

    pub fn indices(&self) -> Vec<usize> {
        self.changes.iter().map(|(i, _)| *i).collect()
    }

    /// The swap that undoes this one on `c`.
    pub fn inverse(&self, c: &Configuration) -> SwapProposal {
        let changes = self
            .changes
            .iter()
            .map(|(i, _)| (*i, c.points[*i].opt.clone()))
            .collect();
        SwapProposal {
            changes,
            center: self.center,
        }
    }
}

fn position_cmp(a: &Position, b: &Position) -> Ordering {
    match (a, b) {
        (Position::Point(x), Position::Point(y)) => x
            .iter()
            .zip(y)
            .map(|(u, v)| u.total_cmp(v))
            .find(|o| o.is_ne())
            .unwrap_or(Ordering::Equal),
        (Position::Site(x), Position::Site(y)) => x.cmp(y),
        (Position::Point(_), Position::Site(_)) => Ordering::Less,
        (Position::Site(_), Position::Point(_)) => Ordering::Greater,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchMode {
    Exhaustive,
    Randomized,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchParams {
    pub mode: SearchMode,
    /// Largest number of points changed by one swap.
    pub k_max: usize,
    /// Random proposals per round.
    pub trial_budget: usize,
    /// A swap is accepted when its gain exceeds this threshold.
    pub delta_min: f64,
    /// Stabilization tolerance for influence domains.
    pub epsilon: f64,
    pub max_rounds: usize,
    /// Standard deviation of Gaussian proposals for continuous marks.
    pub sigma: f64,
    /// Offsets tried for continuous marks in exhaustive mode.
    pub perturbation_grid: Vec<f64>,
    pub seed: u64,
}

impl Default for SearchParams {
    fn default() -> Self {
        SearchParams {
            mode: SearchMode::Exhaustive,
            k_max: 1,
            trial_budget: 1000,
            delta_min: 0.0,
            epsilon: 1e-3,
            max_rounds: 100_000,
            sigma: 0.05,
            perturbation_grid: vec![-1e-2, -1e-3, 1e-3, 1e-2],
            seed: 0,
        }
    }
}

impl SearchParams {
    pub fn exhaustive(k_max: usize) -> Self {
        SearchParams {
            k_max,
            ..Default::default()
        }
    }

    pub fn randomized(k_max: usize, trial_budget: usize, max_rounds: usize, seed: u64) -> Self {
        SearchParams {
            mode: SearchMode::Randomized,
            k_max,
            trial_budget,
            max_rounds,
            seed,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k_max == 0 {
            return Err(Error::validation("k_max must be at least 1"));
        }
        if self.mode == SearchMode::Exhaustive && self.trial_budget == 0 {
            return Err(Error::validation("trial_budget must be at least 1"));
        }
        if !(self.delta_min.is_finite() && self.delta_min >= 0.0) {
            return Err(Error::validation("delta_min must be a nonnegative number"));
        }
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(Error::validation("epsilon must be positive"));
        }
        if !(self.sigma.is_finite() && self.sigma > 0.0) {
            return Err(Error::validation("sigma must be positive"));
        }
        if self.perturbation_grid.iter().any(|d| !d.is_finite() || *d == 0.0) {
            return Err(Error::validation("perturbation offsets must be finite and nonzero"));
        }
        Ok(())
    }
}

/// Sum of all scores of the configuration's own marks.
pub fn total_window_score(c: &Configuration, m: &ScoreModel) -> Result<ExtendedScore> {
    let s = Scorer::new(m, c)?;
    let marks = c.marks();
    s.check_marks(&marks)?;
    s.total(&marks)
}

/// Aggregated score difference `Σ_i [ξ_i(after) − ξ_i(before)]` over all points.
pub fn score_difference(c: &Configuration, swap: &SwapProposal, m: &ScoreModel) -> Result<ScoreDelta> {
    let s = Scorer::new(m, c)?;
    let before = c.marks();
    s.check_marks(&before)?;
    let mut after = before.clone();
    for (i, mark) in &swap.changes {
        after[*i] = mark.clone();
    }
    s.check_marks(&after)?;
    let mut delta = ScoreDelta::ZERO;
    for i in 0..c.len() {
        let d = ExtendedScore::difference(s.score(&after, i)?, s.score(&before, i)?);
        delta = delta.accumulate(d);
    }
    Ok(delta)
}

/// Applies swaps with pairwise disjoint index sets.
pub fn apply_swaps(c: &Configuration, swaps: &[SwapProposal]) -> Result<Configuration> {
    let mut touched = vec![false; c.len()];
    let mut out = c.clone();
    for swap in swaps {
        for (i, m) in &swap.changes {
            if *i >= c.len() {
                return Err(Error::validation(format!("swap index {i} out of range")));
            }
            if std::mem::replace(&mut touched[*i], true) {
                return Err(Error::validation(format!("point {i} is changed by two swaps")));
            }
            out.points[*i].opt = m.clone();
        }
    }
    Ok(out)
}
