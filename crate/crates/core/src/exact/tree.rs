use serde::{Deserialize, Serialize};

use crate::config::Configuration;
use crate::error::{Error, Result};
use crate::marks::{OptMark, Sign3};
use crate::models::ScoreModel;
use crate::optimize::SearchState;
use crate::score::ScoreDelta;
use crate::window::{tree_level, tree_neighbors, tree_vertex_count, Window};

pub const TREE_MAX_DEPTH: usize = 6;
pub const TREE_MAX_SUBSET: usize = 4;

/// `(#V, #∂V)` for a set of interior vertices of the depth-`depth` ball,
/// where `∂V` are the neighbours of `V` outside `V`. Fails with an assertion
/// error if `#∂V < #V`, which the 3-regular tree never allows.
pub fn tree_boundary(depth: usize, v: &[usize]) -> Result<(usize, usize)> {
    let mut set: Vec<usize> = v.to_vec();
    set.sort_unstable();
    set.dedup();
    if let Some(&bad) = set.iter().find(|&&x| x >= tree_vertex_count(depth) || tree_level(x) >= depth) {
        return Err(Error::validation(format!(
            "vertex {bad} is not interior to the depth-{depth} ball"
        )));
    }
    let mut boundary: Vec<usize> = set
        .iter()
        .flat_map(|&x| tree_neighbors(depth, x))
        .filter(|y| set.binary_search(y).is_err())
        .collect();
    boundary.sort_unstable();
    boundary.dedup();
    if boundary.len() < set.len() {
        return Err(Error::assertion(format!(
            "boundary of {set:?} has {} vertices, fewer than the set",
            boundary.len()
        )));
    }
    Ok((set.len(), boundary.len()))
}

fn boundary_of(depth: usize, set: &[usize]) -> Vec<usize> {
    let mut b: Vec<usize> = set
        .iter()
        .flat_map(|&x| tree_neighbors(depth, x))
        .filter(|y| !set.contains(y))
        .collect();
    b.sort_unstable();
    b.dedup();
    b
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeWitness {
    pub changes: Vec<(usize, Sign3)>,
    pub delta: ScoreDelta,
    /// Whether this is the flip-and-clear deviation `V → −s`, `∂V → 0`.
    pub shape: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeVerdict {
    pub locally_optimal: bool,
    pub witness: Option<TreeWitness>,
    pub subsets_tested: usize,
    pub deviations_tested: usize,
    /// Flip-and-clear deviations whose gain exceeded
    /// `1.1·#V − 0.9·(#V + #∂V)`; zero whenever weights lie in `[0.9, 1.1]`.
    pub bound_violations: usize,
}

/// Tests a Widom-Rowlinson marking of a tree ball against every deviation on
/// at most `v_max` interior vertices. For a constant marking `s ≠ 0` the
/// flip-and-clear deviation is tested on the same sets as well. Stops at the
/// first strictly improving deviation.
pub fn tree_local_optimality_check(c: &Configuration, v_max: usize) -> Result<TreeVerdict> {
    let depth = match c.window {
        Window::TreeBall { depth } => depth,
        _ => return Err(Error::Topology("tree check needs a tree ball".into())),
    };
    if depth > TREE_MAX_DEPTH || v_max > TREE_MAX_SUBSET {
        return Err(Error::WorkCap {
            required: (depth.max(v_max)) as u128,
            cap: TREE_MAX_DEPTH.min(TREE_MAX_SUBSET) as u128,
        });
    }
    let model = ScoreModel::WidomRowlinsonTree;
    model.validate_for(&c.window)?;
    let mut state = SearchState::new(&model, c, c.marks())?;
    let signs: Vec<Sign3> = state
        .marks
        .iter()
        .map(|m| match m {
            OptMark::Sign3(s) => *s,
            _ => unreachable!("checked by the scorer"),
        })
        .collect();
    let uniform = match signs.first() {
        Some(&s) if s != Sign3::Zero && signs.iter().all(|&t| t == s) => Some(s),
        _ => None,
    };
    let interior: Vec<usize> = (0..c.len()).filter(|&v| tree_level(v) < depth).collect();
    let mut verdict = TreeVerdict {
        locally_optimal: true,
        witness: None,
        subsets_tested: 0,
        deviations_tested: 0,
        bound_violations: 0,
    };
    let mut chosen: Vec<usize> = Vec::new();
    for size in 1..=v_max.min(interior.len()) {
        let mut idx: Vec<usize> = (0..size).collect();
        loop {
            chosen.clear();
            chosen.extend(idx.iter().map(|&k| interior[k]));
            verdict.subsets_tested += 1;
            let (nv, nb) = tree_boundary(depth, &chosen)?;
            if let Some(s) = uniform {
                let mut changes: Vec<(usize, OptMark)> =
                    chosen.iter().map(|&v| (v, OptMark::Sign3(s.flipped()))).collect();
                changes.extend(
                    boundary_of(depth, &chosen)
                        .into_iter()
                        .map(|b| (b, OptMark::Sign3(Sign3::Zero))),
                );
                let delta = state.delta(&changes)?;
                verdict.deviations_tested += 1;
                let bound = 1.1 * nv as f64 - 0.9 * (nv + nb) as f64;
                if delta.to_f64() > bound + 1e-12 {
                    verdict.bound_violations += 1;
                }
                if delta.improves(0.0) {
                    return Ok(found(verdict, changes, delta, true));
                }
            }
            // every alternative mark at every chosen vertex
            let combos = 1usize << size;
            for bits in 0..combos {
                let changes: Vec<(usize, OptMark)> = chosen
                    .iter()
                    .enumerate()
                    .map(|(k, &v)| {
                        let alts: Vec<Sign3> = Sign3::ALL.into_iter().filter(|&t| t != signs[v]).collect();
                        (v, OptMark::Sign3(alts[(bits >> k) & 1]))
                    })
                    .collect();
                let delta = state.delta(&changes)?;
                verdict.deviations_tested += 1;
                if delta.improves(0.0) {
                    return Ok(found(verdict, changes, delta, false));
                }
            }
            if !next_combination(&mut idx, interior.len()) {
                break;
            }
        }
    }
    Ok(verdict)
}

fn found(mut v: TreeVerdict, changes: Vec<(usize, OptMark)>, delta: ScoreDelta, shape: bool) -> TreeVerdict {
    v.locally_optimal = false;
    v.witness = Some(TreeWitness {
        changes: changes
            .into_iter()
            .map(|(i, m)| match m {
                OptMark::Sign3(s) => (i, s),
                _ => unreachable!(),
            })
            .collect(),
        delta,
        shape,
    });
    v
}

/// Advances `idx` to the next `k`-subset of `0..n` in lexicographic order.
pub(crate) fn next_combination(idx: &mut [usize], n: usize) -> bool {
    let k = idx.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if idx[i] < n - k + i {
            idx[i] += 1;
            for j in i + 1..k {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn boundary_sizes() {
        assert_eq!(tree_boundary(3, &[0]).unwrap(), (1, 3));
        assert_eq!(tree_boundary(3, &[0, 1]).unwrap(), (2, 4));
        assert_eq!(tree_boundary(3, &[]).unwrap(), (0, 0));
        assert!(tree_boundary(1, &[1]).is_err());
    }

    #[test]
    fn combinations_in_order() {
        let mut idx = vec![0, 1];
        let mut seen = vec![idx.clone()];
        while next_combination(&mut idx, 4) {
            seen.push(idx.clone());
        }
        assert_eq!(seen, vec![vec![0, 1], vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3], vec![2, 3]]);
    }
}
