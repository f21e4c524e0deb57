use rand::seq::index::sample as sample_indices;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{SearchMode, SearchParams, SwapProposal, EXHAUSTIVE_WORK_CAP};
use crate::config::Configuration;
use crate::error::{Error, Result};
use crate::marks::OptMark;
use crate::models::{MarkSpace, ScoreModel, Scorer};
use crate::rng::RngSeed;
use crate::score::{ExtendedScore, ScoreDelta};

/// What a finished search certifies about its output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Certificate {
    /// Exhaustive scan found no swap of at most `k_max` points with positive gain.
    LocallyOptimal { k_max: usize },
    /// The last round's `trial_budget` random proposals brought no gain.
    NoImprovementInBudget { trial_budget: usize },
    RoundLimitReached { rounds: usize },
}

impl Certificate {
    pub fn label(&self) -> String {
        match self {
            Certificate::LocallyOptimal { k_max } => format!("locally_optimal_k{k_max}"),
            _ => "uncertified".to_string(),
        }
    }

    pub fn is_certified(&self) -> bool {
        matches!(self, Certificate::LocallyOptimal { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub round: usize,
    pub swap: SwapProposal,
    pub delta: ScoreDelta,
    pub total: ExtendedScore,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchTrace {
    pub initial_total: ExtendedScore,
    pub records: Vec<TraceRecord>,
    pub certificate: Certificate,
}

impl SearchTrace {
    pub fn final_total(&self) -> ExtendedScore {
        self.records.last().map_or(self.initial_total, |r| r.total)
    }
}

/// Marks and cached per-point scores of one configuration during a search.
pub(crate) struct SearchState<'a> {
    pub scorer: Scorer<'a>,
    pub marks: Vec<OptMark>,
    pub scores: Vec<ExtendedScore>,
    infl: Vec<Vec<usize>>,
    space: MarkSpace,
    values: Option<Vec<OptMark>>,
    stamp: Vec<u32>,
    generation: u32,
}

impl<'a> SearchState<'a> {
    pub fn new(model: &'a ScoreModel, c: &'a Configuration, marks: Vec<OptMark>) -> Result<Self> {
        let scorer = Scorer::prepared(model, c)?;
        scorer.check_marks(&marks)?;
        let scores = scorer.scores(&marks)?;
        let infl = (0..c.len()).map(|i| scorer.influenced_by(i)).collect();
        let space = model.mark_space();
        let values = match space {
            MarkSpace::Partner => None,
            _ => space.discrete_values(c.len(), 0),
        };
        Ok(SearchState {
            scorer,
            marks,
            scores,
            infl,
            space,
            values,
            stamp: vec![0; c.len()],
            generation: 0,
        })
    }

    pub fn total(&self) -> ExtendedScore {
        self.scores.iter().fold(ExtendedScore::ZERO, |acc, &s| acc + s)
    }

    fn next_generation(&mut self) -> u32 {
        self.generation = self.generation.wrapping_add(1);
        if self.generation == 0 {
            self.stamp.iter_mut().for_each(|s| *s = 0);
            self.generation = 1;
        }
        self.generation
    }

    /// Changed points together with every point whose score they may affect, sorted.
    pub fn affected(&mut self, idx: &[usize]) -> Vec<usize> {
        let g = self.next_generation();
        let mut out = Vec::new();
        for &i in idx {
            for &p in std::iter::once(&i).chain(self.infl[i].iter()) {
                if self.stamp[p] != g {
                    self.stamp[p] = g;
                    out.push(p);
                }
            }
        }
        out.sort_unstable();
        out
    }

    pub fn delta(&mut self, changes: &[(usize, OptMark)]) -> Result<ScoreDelta> {
        let idx: Vec<usize> = changes.iter().map(|(i, _)| *i).collect();
        let affected = self.affected(&idx);
        let saved: Vec<OptMark> = changes
            .iter()
            .map(|(i, m)| std::mem::replace(&mut self.marks[*i], m.clone()))
            .collect();
        let mut delta = ScoreDelta::ZERO;
        let mut result = Ok(());
        for &p in &affected {
            match self.scorer.score(&self.marks, p) {
                Ok(s) => {
                    delta = delta.accumulate(ExtendedScore::difference(s, self.scores[p]));
                    if delta == ScoreDelta::NegInfinity {
                        break;
                    }
                }
                Err(e) => {
                    result = Err(e);
                    break;
                }
            }
        }
        for ((i, _), m) in changes.iter().zip(saved) {
            self.marks[*i] = m;
        }
        result.map(|_| delta)
    }

    pub fn apply(&mut self, changes: &[(usize, OptMark)]) -> Result<()> {
        let idx: Vec<usize> = changes.iter().map(|(i, _)| *i).collect();
        for (i, m) in changes {
            self.marks[*i] = m.clone();
        }
        for p in self.affected(&idx) {
            self.scores[p] = self.scorer.score(&self.marks, p)?;
        }
        Ok(())
    }

    /// Marks tried for point `i` by the exhaustive scan.
    fn alternatives(&self, i: usize, grid: &[f64]) -> Vec<OptMark> {
        let cur = &self.marks[i];
        match (&self.space, cur) {
            (MarkSpace::Radius, OptMark::Radius(r)) => grid
                .iter()
                .map(|d| r + d)
                .filter(|v| *v >= 0.0 && v != r)
                .map(OptMark::Radius)
                .collect(),
            (MarkSpace::AccessProb, OptMark::AccessProb(p)) => grid
                .iter()
                .map(|d| p + d)
                .filter(|v| *v > 0.0 && *v <= 1.0 && v != p)
                .map(OptMark::AccessProb)
                .collect(),
            (MarkSpace::Partner, _) => (0..self.marks.len())
                .filter(|&j| j != i)
                .map(OptMark::Partner)
                .filter(|m| m != cur)
                .collect(),
            _ => self
                .values
                .as_ref()
                .expect("discrete space")
                .iter()
                .filter(|m| *m != cur)
                .cloned()
                .collect(),
        }
    }

    /// A random mark for point `i` different from its current one, if any.
    fn propose(&self, i: usize, sigma: f64, rng: &mut ChaCha8Rng) -> Option<OptMark> {
        let cur = &self.marks[i];
        let m = match (&self.space, cur) {
            (MarkSpace::Radius, OptMark::Radius(r)) => {
                let v = if rng.random::<bool>() {
                    (r + sigma * rng.sample::<f64, _>(StandardNormal)).abs()
                } else {
                    2.0 * r.max(sigma) * rng.random::<f64>()
                };
                OptMark::Radius(v)
            }
            (MarkSpace::AccessProb, OptMark::AccessProb(p)) => {
                let v = if rng.random::<bool>() {
                    let x = p + sigma * rng.sample::<f64, _>(StandardNormal);
                    if x <= 0.0 {
                        p / 2.0
                    } else {
                        x.min(1.0)
                    }
                } else {
                    1.0 - rng.random::<f64>()
                };
                OptMark::AccessProb(v)
            }
            (MarkSpace::Partner, _) => {
                let n = self.marks.len();
                if n < 2 {
                    return None;
                }
                let mut j = rng.random_range(0..n - 1);
                if j >= i {
                    j += 1;
                }
                OptMark::Partner(j)
            }
            _ => {
                let vals = self.values.as_ref().expect("discrete space");
                if vals.len() < 2 {
                    return None;
                }
                vals[rng.random_range(0..vals.len())].clone()
            }
        };
        (m != *cur).then_some(m)
    }
}

/// Number of swaps of at most `k` points drawn from groups of the given sizes.
fn swap_count(sizes: &[usize], k: usize) -> u128 {
    // elementary symmetric polynomials e_0..e_k of the sizes
    let mut e = vec![0u128; k + 1];
    e[0] = 1;
    for &s in sizes {
        for j in (1..=k).rev() {
            e[j] = e[j].saturating_add(e[j - 1].saturating_mul(s as u128));
        }
    }
    e[1..].iter().fold(0u128, |a, &b| a.saturating_add(b))
}

type Found = (Vec<(usize, OptMark)>, ScoreDelta);

struct Scan<'s, 'a> {
    state: &'s mut SearchState<'a>,
    subset: Vec<usize>,
    alts: Vec<Vec<OptMark>>,
    groups: Vec<Vec<usize>>,
    choice: Vec<usize>,
    delta_min: f64,
    best: Option<(Vec<(usize, OptMark)>, ScoreDelta)>,
    done: bool,
}

impl Scan<'_, '_> {
    fn dfs(&mut self, t: usize, partial: ScoreDelta) -> Result<()> {
        let i = self.subset[t];
        let original = self.state.marks[i].clone();
        for a in 0..self.alts[t].len() {
            self.state.marks[i] = self.alts[t][a].clone();
            self.choice[t] = a;
            let mut d = partial;
            for &p in &self.groups[t] {
                let s = match self.state.scorer.score(&self.state.marks, p) {
                    Ok(s) => s,
                    Err(e) => {
                        self.state.marks[i] = original;
                        return Err(e);
                    }
                };
                d = d.accumulate(ExtendedScore::difference(s, self.state.scores[p]));
                if d == ScoreDelta::NegInfinity {
                    break;
                }
            }
            if d == ScoreDelta::NegInfinity {
                continue;
            }
            if t + 1 == self.subset.len() {
                let better = match &self.best {
                    None => true,
                    Some((_, b)) => d.rank_cmp(*b).is_gt(),
                };
                if d.improves(self.delta_min) && better {
                    let changes = (0..=t)
                        .map(|u| (self.subset[u], self.alts[u][self.choice[u]].clone()))
                        .collect();
                    self.best = Some((changes, d));
                    if d == ScoreDelta::PosInfinity {
                        self.done = true;
                    }
                }
            } else if let Err(e) = self.dfs(t + 1, d) {
                self.state.marks[i] = original;
                return Err(e);
            }
            if self.done {
                break;
            }
        }
        self.state.marks[i] = original;
        Ok(())
    }
}

/// Best swap (ties: first in enumeration order) over all subsets of
/// `candidates` with at most `k_max` points, subsets by size and then
/// lexicographically, marks in mark-space order.
fn exhaustive_round(state: &mut SearchState, candidates: &[usize], p: &SearchParams) -> Result<Option<Found>> {
    let alts: Vec<Vec<OptMark>> = candidates
        .iter()
        .map(|&i| state.alternatives(i, &p.perturbation_grid))
        .collect();
    let k_max = p.k_max.min(candidates.len());
    let sizes: Vec<usize> = alts.iter().map(Vec::len).collect();
    let work = swap_count(&sizes, k_max);
    if work > EXHAUSTIVE_WORK_CAP {
        return Err(Error::WorkCap {
            required: work,
            cap: EXHAUSTIVE_WORK_CAP,
        });
    }
    let mut best: Option<Found> = None;
    let n = state.marks.len();
    let mut last = vec![0usize; n];
    for k in 1..=k_max {
        let mut comb: Vec<usize> = (0..k).collect();
        loop {
            if comb.iter().all(|&c| !alts[c].is_empty()) {
                let subset: Vec<usize> = comb.iter().map(|&c| candidates[c]).collect();
                // a point's score is final once every changed point it depends on is set
                let g = state.next_generation();
                let mut touched = Vec::new();
                for (t, &s) in subset.iter().enumerate() {
                    for &q in std::iter::once(&s).chain(state.infl[s].iter()) {
                        if state.stamp[q] != g {
                            state.stamp[q] = g;
                            touched.push(q);
                        }
                        last[q] = t;
                    }
                }
                touched.sort_unstable();
                let mut groups = vec![Vec::new(); k];
                for q in touched {
                    groups[last[q]].push(q);
                }
                let mut scan = Scan {
                    state: &mut *state,
                    subset,
                    alts: comb.iter().map(|&c| alts[c].clone()).collect(),
                    groups,
                    choice: vec![0; k],
                    delta_min: p.delta_min,
                    best: best.take(),
                    done: false,
                };
                scan.dfs(0, ScoreDelta::ZERO)?;
                best = scan.best;
                if scan.done {
                    return Ok(best);
                }
            }
            // next combination
            let m = candidates.len();
            let mut t = k;
            while t > 0 && comb[t - 1] == m - k + t - 1 {
                t -= 1;
            }
            if t == 0 {
                break;
            }
            comb[t - 1] += 1;
            for u in t..k {
                comb[u] = comb[u - 1] + 1;
            }
        }
    }
    Ok(best)
}

fn randomized_round(
    state: &mut SearchState,
    candidates: &[usize],
    p: &SearchParams,
    rng: &mut ChaCha8Rng,
) -> Result<Option<Found>> {
    if candidates.is_empty() {
        return Ok(None);
    }
    let k_max = p.k_max.min(candidates.len());
    let mut best: Option<Found> = None;
    for _ in 0..p.trial_budget {
        let k = rng.random_range(1..=k_max);
        let mut picked: Vec<usize> = sample_indices(rng, candidates.len(), k)
            .into_iter()
            .map(|c| candidates[c])
            .collect();
        picked.sort_unstable();
        let changes: Vec<(usize, OptMark)> = picked
            .into_iter()
            .filter_map(|i| state.propose(i, p.sigma, rng).map(|m| (i, m)))
            .collect();
        if changes.is_empty() {
            continue;
        }
        let d = state.delta(&changes)?;
        let better = match &best {
            None => true,
            Some((_, b)) => d.rank_cmp(*b).is_gt(),
        };
        if d.improves(p.delta_min) && better {
            best = Some((changes, d));
            if d == ScoreDelta::PosInfinity {
                break;
            }
        }
    }
    Ok(best)
}

fn run_round(
    state: &mut SearchState,
    candidates: &[usize],
    p: &SearchParams,
    rng: &mut ChaCha8Rng,
) -> Result<Option<Found>> {
    match p.mode {
        SearchMode::Exhaustive => exhaustive_round(state, candidates, p),
        SearchMode::Randomized => randomized_round(state, candidates, p, rng),
    }
}

/// One improving swap for the configuration's current marks, if found.
pub fn find_valid_swap(
    c: &Configuration,
    m: &ScoreModel,
    p: &SearchParams,
) -> Result<Option<(SwapProposal, ScoreDelta)>> {
    p.validate()?;
    let mut state = SearchState::new(m, c, c.marks())?;
    let mut rng = RngSeed::new(p.seed).rng();
    let all: Vec<usize> = (0..c.len()).collect();
    Ok(run_round(&mut state, &all, p, &mut rng)?.map(|(changes, d)| (SwapProposal::unchecked(c, changes), d)))
}

fn initial_mark(m: &ScoreModel, n: usize, i: usize, rng: &mut ChaCha8Rng) -> OptMark {
    if let Some(neutral) = m.neutral_mark() {
        return neutral;
    }
    let space = m.mark_space();
    match space {
        MarkSpace::Radius => OptMark::Radius(rng.random::<f64>()),
        MarkSpace::AccessProb => OptMark::AccessProb(1.0 - rng.random::<f64>()),
        _ => {
            let vals = space.discrete_values(n, i).unwrap_or_default();
            if vals.is_empty() {
                // a lone matching point has no partner to point at
                OptMark::Partner(i)
            } else {
                vals[rng.random_range(0..vals.len())].clone()
            }
        }
    }
}

/// Applies improving swaps until none is found or `max_rounds` is reached.
pub fn local_search(c: &Configuration, m: &ScoreModel, p: &SearchParams) -> Result<(Configuration, SearchTrace)> {
    let all: Vec<usize> = (0..c.len()).collect();
    local_search_within(c, m, p, &all)
}

/// Local search that only changes the marks of the points in `free`.
pub fn local_search_within(
    c: &Configuration,
    m: &ScoreModel,
    p: &SearchParams,
    free: &[usize],
) -> Result<(Configuration, SearchTrace)> {
    p.validate()?;
    if let Some(&bad) = free.iter().find(|&&i| i >= c.len()) {
        return Err(Error::validation(format!("free index {bad} out of range")));
    }
    let mut rng = RngSeed::new(p.seed).rng();
    let marks: Vec<OptMark> = c
        .points
        .iter()
        .enumerate()
        .map(|(i, pt)| {
            if pt.opt.is_unset() {
                initial_mark(m, c.len(), i, &mut rng)
            } else {
                pt.opt.clone()
            }
        })
        .collect();
    let start = c.with_marks(&marks);
    let mut state = SearchState::new(m, &start, marks)?;
    let mut free = free.to_vec();
    free.sort_unstable();
    free.dedup();
    let initial_total = state.total();
    let mut records = Vec::new();
    let mut certificate = Certificate::RoundLimitReached { rounds: p.max_rounds };
    for round in 1..=p.max_rounds {
        match run_round(&mut state, &free, p, &mut rng)? {
            None => {
                certificate = match p.mode {
                    SearchMode::Exhaustive => Certificate::LocallyOptimal { k_max: p.k_max },
                    SearchMode::Randomized => Certificate::NoImprovementInBudget {
                        trial_budget: p.trial_budget,
                    },
                };
                break;
            }
            Some((changes, delta)) => {
                let swap = SwapProposal::unchecked(&start, changes);
                state.apply(&swap.changes)?;
                records.push(TraceRecord {
                    round,
                    swap,
                    delta,
                    total: state.total(),
                });
            }
        }
    }
    let out = start.with_marks(&state.marks);
    Ok((
        out,
        SearchTrace {
            initial_total,
            records,
            certificate,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn swap_counts() {
        // three sites with two alternatives each, all subset sizes: 3^3 - 1
        assert_eq!(swap_count(&[2, 2, 2], 3), 26);
        assert_eq!(swap_count(&[2, 2, 2], 1), 6);
        assert_eq!(swap_count(&[], 2), 0);
    }
}
