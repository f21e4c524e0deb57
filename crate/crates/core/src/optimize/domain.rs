use serde::{Deserialize, Serialize};

use super::SwapProposal;
use crate::config::Configuration;
use crate::error::{Error, Result};
use crate::estimate::{aloha_stab_radii, hardcore_stab_radius};
use crate::models::{ScoreModel, Scorer};
use crate::window::{torus_sup_dist, tree_distance, wrapped_delta, Window};

/// A closed cube `Q_side(center)` on the torus, or a graph ball on a line or tree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Region {
    Cube { center: Vec<f64>, side: f64 },
    GraphBall { vertex: usize, radius: usize },
}

impl Region {
    pub fn intersects(&self, other: &Region, w: &Window) -> bool {
        match (self, other, w) {
            (
                Region::Cube { center: a, side: s },
                Region::Cube { center: b, side: t },
                Window::PeriodicCube { side: l, .. },
            ) => a
                .iter()
                .zip(b)
                .all(|(x, y)| wrapped_delta(*l, *x, *y).abs() <= (s + t) / 2.0),
            (
                Region::GraphBall { vertex: u, radius: r },
                Region::GraphBall { vertex: v, radius: q },
                _,
            ) => graph_distance(w, *u, *v) <= r + q,
            _ => false,
        }
    }

    /// Whether point `i` of `c` lies in the region.
    pub fn contains(&self, c: &Configuration, i: usize) -> bool {
        match (self, &c.window) {
            (Region::Cube { center, side }, Window::PeriodicCube { side: l, .. }) => {
                torus_sup_dist(*l, center, c.coords(i)) <= side / 2.0
            }
            (Region::GraphBall { vertex, radius }, w) => graph_distance(w, *vertex, i) <= *radius,
            _ => false,
        }
    }
}

fn graph_distance(w: &Window, u: usize, v: usize) -> usize {
    match w {
        Window::TreeBall { .. } => tree_distance(u, v),
        _ => u.abs_diff(v),
    }
}

/// Union of regions around the changed points of a swap.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfluenceDomain {
    pub regions: Vec<Region>,
}

impl InfluenceDomain {
    pub fn intersects(&self, other: &InfluenceDomain, w: &Window) -> bool {
        self.regions
            .iter()
            .any(|a| other.regions.iter().any(|b| a.intersects(b, w)))
    }

    pub fn contains(&self, c: &Configuration, i: usize) -> bool {
        self.regions.iter().any(|r| r.contains(c, i))
    }
}

/// Region of point `i`. The radii used here do not depend on optimization
/// marks, so the old and new marks of a swap give the same region.
fn point_region(s: &Scorer, i: usize, eps: f64) -> Result<Region> {
    let c = s.config();
    let cube = |side: f64| Region::Cube {
        center: c.coords(i).to_vec(),
        side,
    };
    match s.model() {
        ScoreModel::WidomRowlinsonLine | ScoreModel::WidomRowlinsonTree => {
            Ok(Region::GraphBall { vertex: i, radius: 1 })
        }
        ScoreModel::HardcoreThinning | ScoreModel::Caching { .. } => Ok(cube(hardcore_stab_radius(c, i)?)),
        ScoreModel::AlohaMac { beta } => {
            let (internal, external) = aloha_stab_radii(c, i, eps, *beta)?;
            Ok(cube(internal.max(external)))
        }
        ScoreModel::Lilypond => {
            let side = c.window.side().unwrap();
            let far = s
                .dependencies(i)
                .into_iter()
                .chain(s.influenced_by(i))
                .map(|j| torus_sup_dist(side, c.coords(i), c.coords(j)))
                .fold(0.0, f64::max);
            Ok(cube(2.0 * far))
        }
        ScoreModel::Matching => Err(Error::Unsupported(
            "matching scores have no external stabilization radius".into(),
        )),
    }
}

/// `ε`-influence domain of a swap: one region per changed point.
pub fn influence_domain(c: &Configuration, m: &ScoreModel, swap: &SwapProposal, eps: f64) -> Result<InfluenceDomain> {
    let s = Scorer::prepared(m, c)?;
    let regions = swap
        .changes
        .iter()
        .map(|(i, _)| point_region(&s, *i, eps))
        .collect::<Result<_>>()?;
    Ok(InfluenceDomain { regions })
}

/// Regions around every configuration point that lies in `domain`.
pub fn iterated_domain(c: &Configuration, m: &ScoreModel, domain: &InfluenceDomain, eps: f64) -> Result<InfluenceDomain> {
    let s = Scorer::prepared(m, c)?;
    let regions = (0..c.len())
        .filter(|&i| domain.contains(c, i))
        .map(|i| point_region(&s, i, eps))
        .collect::<Result<Vec<_>>>()?;
    let mut all = domain.regions.clone();
    all.extend(regions);
    Ok(InfluenceDomain { regions: all })
}

/// Matérn-type selection: swaps are visited by increasing priority (ties by
/// index) and kept when their domain meets no kept domain. Returns kept
/// indices in increasing order.
pub fn matern_compatible_subset(w: &Window, domains: &[InfluenceDomain], priorities: &[f64]) -> Result<Vec<usize>> {
    if domains.len() != priorities.len() {
        return Err(Error::validation("one priority per swap"));
    }
    if priorities.iter().any(|p| !p.is_finite()) {
        return Err(Error::validation("priorities must be finite"));
    }
    let mut order: Vec<usize> = (0..domains.len()).collect();
    order.sort_by(|&a, &b| priorities[a].total_cmp(&priorities[b]).then(a.cmp(&b)));
    let mut kept: Vec<usize> = Vec::new();
    for a in order {
        if kept.iter().all(|&b| !domains[a].intersects(&domains[b], w)) {
            kept.push(a);
        }
    }
    kept.sort_unstable();
    Ok(kept)
}

/// Domains of `swaps` (once iterated when `iterate`) followed by Matérn-type
/// selection.
pub fn matern_select(
    c: &Configuration,
    m: &ScoreModel,
    swaps: &[SwapProposal],
    priorities: &[f64],
    eps: f64,
    iterate: bool,
) -> Result<Vec<usize>> {
    let domains = swaps
        .iter()
        .map(|s| {
            let d = influence_domain(c, m, s, eps)?;
            if iterate {
                iterated_domain(c, m, &d, eps)
            } else {
                Ok(d)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    matern_compatible_subset(&c.window, &domains, priorities)
}
