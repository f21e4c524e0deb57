use serde::{Deserialize, Serialize};

use crate::config::Configuration;
use crate::error::{Error, Result};
use crate::marks::{BaseMark, Color, OptMark};
use crate::window::{torus_dist, Window};

/// Largest color class size accepted for permutation enumeration.
pub const MATCHING_MAX_PER_COLOR: usize = 9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchingSolution {
    pub marked: Configuration,
    /// Sum of partner distances over matched pairs.
    pub length: f64,
    /// `(blue, red)` pairs in increasing blue order.
    pub pairs: Vec<(usize, usize)>,
}

/// Advances `p` to the next permutation in lexicographic order.
pub fn next_permutation(p: &mut [usize]) -> bool {
    let n = p.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// Blue and red point indices, each ascending.
pub fn color_classes(c: &Configuration) -> Result<(Vec<usize>, Vec<usize>)> {
    let mut blue = Vec::new();
    let mut red = Vec::new();
    for (i, p) in c.points.iter().enumerate() {
        match p.base {
            BaseMark::Color(Color::Blue) => blue.push(i),
            BaseMark::Color(Color::Red) => red.push(i),
            ref b => {
                return Err(Error::MarkSpace {
                    index: i,
                    expected: "color",
                    found: b.kind_name().into(),
                })
            }
        }
    }
    Ok((blue, red))
}

/// Perfect blue-red matching of minimal total torus length. The k-th blue
/// point (by index) is paired with the k-th entry of the first minimizing
/// permutation of the red points.
pub fn matching_optimum(c: &Configuration) -> Result<MatchingSolution> {
    let side = match c.window {
        Window::PeriodicCube { side, .. } => side,
        _ => return Err(Error::Topology("matching needs a periodic cube".into())),
    };
    let (blue, red) = color_classes(c)?;
    if blue.len() != red.len() {
        return Err(Error::validation(format!(
            "unbalanced colors: {} blue, {} red",
            blue.len(),
            red.len()
        )));
    }
    let k = blue.len();
    if k > MATCHING_MAX_PER_COLOR {
        return Err(Error::WorkCap {
            required: (1..=k as u128).product(),
            cap: (1..=MATCHING_MAX_PER_COLOR as u128).product(),
        });
    }
    let cost: Vec<Vec<f64>> = blue
        .iter()
        .map(|&b| red.iter().map(|&r| torus_dist(side, c.coords(b), c.coords(r))).collect())
        .collect();
    let mut perm: Vec<usize> = (0..k).collect();
    let mut best = perm.clone();
    let mut best_len = f64::INFINITY;
    loop {
        let len = (0..k).fold(0.0, |acc, t| acc + cost[t][perm[t]]);
        if len < best_len {
            best_len = len;
            best.copy_from_slice(&perm);
        }
        if !next_permutation(&mut perm) {
            break;
        }
    }
    let mut marks = vec![OptMark::Unset; c.len()];
    let mut pairs = Vec::with_capacity(k);
    for t in 0..k {
        let (b, r) = (blue[t], red[best[t]]);
        marks[b] = OptMark::Partner(r);
        marks[r] = OptMark::Partner(b);
        pairs.push((b, r));
    }
    Ok(MatchingSolution {
        marked: c.with_marks(&marks),
        length: if k == 0 { 0.0 } else { best_len },
        pairs,
    })
}
