use serde::{Deserialize, Serialize};

use crate::config::Configuration;
use crate::error::{Error, Result};
use crate::marks::{BaseMark, Sign3};
use crate::window::Window;

/// Optimum of a Widom-Rowlinson chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DpResult {
    pub marks: Vec<Sign3>,
    /// Sum of the chosen weights, added left to right.
    pub value: f64,
    /// Number of optimal markings (saturating).
    pub multiplicity: u64,
}

fn weight(w: (f64, f64), s: Sign3) -> f64 {
    match s {
        Sign3::Zero => 0.0,
        Sign3::Plus => w.0,
        Sign3::Minus => w.1,
    }
}

/// Maximizes `Σ w(ψ_k)` over conflict-free `ψ` on a chain of sites with
/// weights `(M⁺, M⁻)`. `left` and `right` are the fixed marks of the sites
/// just outside the chain; `Zero` leaves that end unconstrained. Among optimal
/// markings the lexicographically smallest in the order `0 < + < −` is returned.
pub fn wr_chain_dp(weights: &[(f64, f64)], left: Sign3, right: Sign3) -> DpResult {
    let n = weights.len();
    if n == 0 {
        return DpResult {
            marks: Vec::new(),
            value: 0.0,
            multiplicity: 1,
        };
    }
    // best[t][s]: optimum over sites t.. given site t carries s
    let mut best = vec![[f64::NEG_INFINITY; 3]; n];
    let mut count = vec![[0u64; 3]; n];
    for s in Sign3::ALL {
        if !s.conflicts(right) {
            best[n - 1][s.index()] = weight(weights[n - 1], s);
            count[n - 1][s.index()] = 1;
        }
    }
    for t in (0..n - 1).rev() {
        for s in Sign3::ALL {
            let mut m = f64::NEG_INFINITY;
            let mut k = 0u64;
            for q in Sign3::ALL {
                if s.conflicts(q) || count[t + 1][q.index()] == 0 {
                    continue;
                }
                let v = best[t + 1][q.index()];
                if v > m {
                    m = v;
                    k = count[t + 1][q.index()];
                } else if v == m {
                    k = k.saturating_add(count[t + 1][q.index()]);
                }
            }
            if k > 0 {
                best[t][s.index()] = weight(weights[t], s) + m;
                count[t][s.index()] = k;
            }
        }
    }
    let pick = |t: usize, prev: Sign3| -> (Sign3, f64, u64) {
        let mut choice = Sign3::Zero;
        let mut m = f64::NEG_INFINITY;
        let mut k = 0u64;
        for q in Sign3::ALL {
            if q.conflicts(prev) || count[t][q.index()] == 0 {
                continue;
            }
            let v = best[t][q.index()];
            if v > m {
                m = v;
                choice = q;
                k = count[t][q.index()];
            } else if v == m {
                k = k.saturating_add(count[t][q.index()]);
            }
        }
        (choice, m, k)
    };
    let (first, _, multiplicity) = pick(0, left);
    let mut marks = vec![first];
    for t in 1..n {
        let prev = marks[t - 1];
        marks.push(pick(t, prev).0);
    }
    let value = marks
        .iter()
        .zip(weights)
        .fold(0.0, |acc, (&s, &w)| acc + weight(w, s));
    DpResult {
        marks,
        value,
        multiplicity,
    }
}

/// Weights `(M⁺, M⁻)` of a Widom-Rowlinson line configuration, by site.
pub fn line_weights(c: &Configuration) -> Result<Vec<(f64, f64)>> {
    if !matches!(c.window, Window::IntegerLine { .. }) {
        return Err(Error::Topology("chain weights need an integer line".into()));
    }
    let mut out = vec![(0.0, 0.0); c.len()];
    for (i, p) in c.points.iter().enumerate() {
        let k = p.position.site().ok_or_else(|| Error::validation("line point without a site"))?;
        match p.base {
            BaseMark::WeightPair { plus, minus } => out[k] = (plus, minus),
            ref b => {
                return Err(Error::MarkSpace {
                    index: i,
                    expected: "weight_pair",
                    found: b.kind_name().into(),
                })
            }
        }
    }
    Ok(out)
}

/// Sites `lo..=hi` on which `+` strictly dominates `−` in the sense that
/// every `M⁺` inside exceeds every `M⁻` on the interval and its two
/// neighbours, and the summed `M⁺` exceeds the summed `M⁻` over the same
/// widened range. A missing neighbour beyond the line end counts as `M⁻ = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockingInterval {
    pub lo: usize,
    pub hi: usize,
}

/// Maximal blocking intervals of a Widom-Rowlinson line, ordered by left end.
pub fn wr_blocking_intervals(c: &Configuration) -> Result<Vec<BlockingInterval>> {
    Ok(blocking_intervals(&line_weights(c)?))
}

/// All maximal blocking intervals of a weight sequence, ordered by left end.
pub fn blocking_intervals(weights: &[(f64, f64)]) -> Vec<BlockingInterval> {
    let n = weights.len();
    let minus = |k: isize| -> f64 {
        if k < 0 || k as usize >= n {
            0.0
        } else {
            weights[k as usize].1
        }
    };
    let mut all = Vec::new();
    for i in 0..n {
        let mut min_plus = f64::INFINITY;
        let mut max_minus = minus(i as isize - 1).max(minus(i as isize));
        let mut sum_plus = 0.0;
        let mut sum_minus = minus(i as isize - 1);
        for j in i..n {
            min_plus = min_plus.min(weights[j].0);
            sum_plus += weights[j].0;
            sum_minus += weights[j].1;
            max_minus = max_minus.max(minus(j as isize + 1));
            if !(min_plus > max_minus) {
                // the pointwise condition only gets harder as j grows
                break;
            }
            if sum_plus > sum_minus + minus(j as isize + 1) {
                all.push(BlockingInterval { lo: i, hi: j });
            }
        }
    }
    all.sort_by(|a, b| a.lo.cmp(&b.lo).then(b.hi.cmp(&a.hi)));
    let mut maximal: Vec<BlockingInterval> = Vec::new();
    let mut reach: Option<usize> = None;
    for b in all {
        if reach.is_none_or(|r| b.hi > r) {
            maximal.push(b);
            reach = Some(b.hi);
        }
    }
    maximal
}

/// Gap between two consecutive blocking intervals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub lo: usize,
    pub hi: usize,
    /// Optimal markings of the gap given the marks at `lo − 1` and `hi + 1`.
    pub multiplicity: u64,
}

impl Segment {
    pub fn len(&self) -> usize {
        self.hi - self.lo + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Window-optimal marking of a Widom-Rowlinson line together with the sites
/// whose optimal mark cannot depend on anything outside the window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniqueMarking {
    pub marks: Vec<Sign3>,
    pub value: f64,
    pub intervals: Vec<BlockingInterval>,
    /// Nonempty gaps between consecutive intervals.
    pub segments: Vec<Segment>,
    /// Sites whose mark is the same in every locally optimal marking of any
    /// line extending this one, as certified by the flanking intervals.
    pub resolved: Vec<bool>,
    /// Indices of intervals that carry no `+` in `marks`.
    pub unshielded: Vec<usize>,
    /// Fewer than two blocking intervals: nothing is resolved.
    pub partial: bool,
}

impl UniqueMarking {
    pub fn resolved_count(&self) -> usize {
        self.resolved.iter().filter(|&&r| r).count()
    }
}

/// Every locally optimal marking carries a `+` in each blocking interval:
/// otherwise turning the interval to `+` and clearing `−` neighbours gains
/// `ΣM⁺ − ΣM⁻ > 0`. Its restriction to `a.lo..=b.hi` is therefore one of the
/// optimal markings of that window that put a `+` in `a` and in `b`, for
/// some marks just outside. Returns, per site of the window, whether all such
/// maximizers agree over every outside pair; `None` on exact DP ties.
fn shielded_agreement(w: &[(f64, f64)], a: BlockingInterval, b: BlockingInterval) -> Option<Vec<bool>> {
    let n = w.len();
    let lefts: &[Sign3] = if a.lo > 0 { &Sign3::ALL } else { &[Sign3::Zero] };
    let rights: &[Sign3] = if b.hi + 1 < n { &Sign3::ALL } else { &[Sign3::Zero] };
    let width = b.hi - a.lo + 1;
    let mut reference: Option<Vec<Sign3>> = None;
    let mut agree = vec![true; width];
    for &l in lefts {
        for &r in rights {
            let mut cands: Vec<(f64, Vec<Sign3>, bool)> = Vec::new();
            for p in a.lo..=a.hi {
                if p == a.lo && l == Sign3::Minus {
                    continue;
                }
                for q in b.lo..=b.hi {
                    if q == b.hi && r == Sign3::Minus {
                        continue;
                    }
                    let left = wr_chain_dp(&w[a.lo..p], l, Sign3::Plus);
                    let mid = wr_chain_dp(&w[p + 1..q], Sign3::Plus, Sign3::Plus);
                    let right = wr_chain_dp(&w[q + 1..=b.hi], Sign3::Plus, r);
                    let tie = left.multiplicity > 1 || mid.multiplicity > 1 || right.multiplicity > 1;
                    let value = left.value + w[p].0 + mid.value + w[q].0 + right.value;
                    let mut marks = left.marks;
                    marks.push(Sign3::Plus);
                    marks.extend(mid.marks);
                    marks.push(Sign3::Plus);
                    marks.extend(right.marks);
                    cands.push((value, marks, tie));
                }
            }
            let best = cands.iter().map(|c| c.0).fold(f64::NEG_INFINITY, f64::max);
            // one marking reached through different `+` sites differs only by rounding
            let slack = 1e-9 * best.abs().max(1.0);
            for (_, marks, tie) in cands.into_iter().filter(|c| c.0 >= best - slack) {
                if tie {
                    return None;
                }
                match &reference {
                    None => reference = Some(marks),
                    Some(base) => {
                        for (k, ok) in agree.iter_mut().enumerate() {
                            *ok &= base[k] == marks[k];
                        }
                    }
                }
            }
        }
    }
    Some(agree)
}

/// Resolves the optimal Widom-Rowlinson marking of a line between blocking
/// intervals.
pub fn wr_unique_marking(c: &Configuration) -> Result<UniqueMarking> {
    let weights = line_weights(c)?;
    let n = weights.len();
    let whole = wr_chain_dp(&weights, Sign3::Zero, Sign3::Zero);
    let intervals = blocking_intervals(&weights);
    let unshielded = intervals
        .iter()
        .enumerate()
        .filter(|(_, b)| !whole.marks[b.lo..=b.hi].contains(&Sign3::Plus))
        .map(|(k, _)| k)
        .collect();
    let mut resolved = vec![false; n];
    let mut segments = Vec::new();
    let partial = intervals.len() < 2;
    if !partial {
        for pair in intervals.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            if b.lo <= a.hi + 1 {
                continue;
            }
            if let Some(agree) = shielded_agreement(&weights, a, b) {
                for (k, ok) in agree.into_iter().enumerate() {
                    resolved[a.lo + k] |= ok;
                }
            }
            let (s, e) = (a.hi + 1, b.lo - 1);
            let dp = wr_chain_dp(&weights[s..=e], whole.marks[s - 1], whole.marks[e + 1]);
            segments.push(Segment {
                lo: s,
                hi: e,
                multiplicity: dp.multiplicity,
            });
        }
    }
    Ok(UniqueMarking {
        marks: whole.marks,
        value: whole.value,
        intervals,
        segments,
        resolved,
        unshielded,
        partial,
    })
}
