//! Score functions.
//!
//! Each model maps a configuration and a point index to an [`ExtendedScore`].
//! [`Scorer`] binds a model to the base data of a configuration (positions and
//! base marks) and evaluates scores for any vector of optimization marks, so
//! search routines can mutate marks without rebuilding geometry.

mod aloha;
mod caching;
mod hardcore;
mod lilypond;
mod matching;
mod widom_rowlinson;

use serde::{Deserialize, Serialize};

use crate::config::Configuration;
use crate::error::{Error, Result};
use crate::marks::{BaseMark, Color, OptMark, Sign3};
use crate::score::ExtendedScore;
use crate::window::{torus_dist, wrap_coord, Window, GEOM_TOL};

pub use caching::caching_coverage_count;

/// A score function with its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScoreModel {
    HardcoreThinning,
    WidomRowlinsonLine,
    WidomRowlinsonTree,
    Lilypond,
    AlohaMac {
        beta: f64,
    },
    Caching {
        /// Popularity of items `1..=N`.
        popularity: Vec<f64>,
        /// Cache memory size.
        k: usize,
        /// Append `k` zero-popularity items to the catalogue so that a neutral
        /// mark exists.
        #[serde(default)]
        reserve_neutral: bool,
        /// Quadrature step in d = 2; defaults to a twentieth of the smallest radius.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        grid_step: Option<f64>,
    },
    Matching,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignRegime {
    NonnegOrNegInf,
    NonposOrNegInf,
}

/// The optimization mark space of a model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MarkSpace {
    Binary,
    Sign3,
    Radius,
    AccessProb,
    ItemSets { items: u32, k: usize },
    Partner,
}

impl MarkSpace {
    /// All marks of a finite space in enumeration order. `Partner` ranges over
    /// the other point indices and is enumerated relative to `point`.
    pub fn discrete_values(&self, n_points: usize, point: usize) -> Option<Vec<OptMark>> {
        match *self {
            MarkSpace::Binary => Some(vec![OptMark::Retain(false), OptMark::Retain(true)]),
            MarkSpace::Sign3 => Some(Sign3::ALL.iter().map(|&s| OptMark::Sign3(s)).collect()),
            MarkSpace::ItemSets { items, k } => Some(
                k_subsets(items, k)
                    .into_iter()
                    .map(OptMark::ItemSet)
                    .collect(),
            ),
            MarkSpace::Partner => Some(
                (0..n_points)
                    .filter(|&j| j != point)
                    .map(OptMark::Partner)
                    .collect(),
            ),
            MarkSpace::Radius | MarkSpace::AccessProb => None,
        }
    }

    pub fn is_discrete(&self) -> bool {
        !matches!(self, MarkSpace::Radius | MarkSpace::AccessProb)
    }

    /// Number of marks in a finite space (per point).
    pub fn cardinality(&self, n_points: usize) -> Option<u128> {
        match *self {
            MarkSpace::Binary => Some(2),
            MarkSpace::Sign3 => Some(3),
            MarkSpace::ItemSets { items, k } => Some(binomial(items as u128, k as u128)),
            MarkSpace::Partner => Some(n_points.saturating_sub(1) as u128),
            _ => None,
        }
    }

    pub fn accepts(&self, m: &OptMark) -> bool {
        matches!(
            (self, m),
            (MarkSpace::Binary, OptMark::Retain(_))
                | (MarkSpace::Sign3, OptMark::Sign3(_))
                | (MarkSpace::Radius, OptMark::Radius(_))
                | (MarkSpace::AccessProb, OptMark::AccessProb(_))
                | (MarkSpace::ItemSets { .. }, OptMark::ItemSet(_))
                | (MarkSpace::Partner, OptMark::Partner(_))
        )
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            MarkSpace::Binary => "retain",
            MarkSpace::Sign3 => "sign3",
            MarkSpace::Radius => "radius",
            MarkSpace::AccessProb => "access_prob",
            MarkSpace::ItemSets { .. } => "item_set",
            MarkSpace::Partner => "partner",
        }
    }
}

pub(crate) fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) / (i + 1))
}

/// All `k`-subsets of `1..=n` in lexicographic order.
pub(crate) fn k_subsets(n: u32, k: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut cur: Vec<u32> = Vec::with_capacity(k);
    fn rec(start: u32, n: u32, k: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        let remaining = (k - cur.len()) as u32;
        for v in start..=n {
            if n - v + 1 < remaining {
                break;
            }
            cur.push(v);
            rec(v + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(1, n, k, &mut cur, &mut out);
    out
}

impl ScoreModel {
    pub fn caching(popularity: Vec<f64>, k: usize) -> Self {
        ScoreModel::Caching {
            popularity,
            k,
            reserve_neutral: false,
            grid_step: None,
        }
    }

    /// Identifier stored in configuration files.
    pub fn id(&self) -> &'static str {
        match self {
            ScoreModel::HardcoreThinning => "hardcore_thinning",
            ScoreModel::WidomRowlinsonLine => "widom_rowlinson_line",
            ScoreModel::WidomRowlinsonTree => "widom_rowlinson_tree",
            ScoreModel::Lilypond => "lilypond",
            ScoreModel::AlohaMac { .. } => "aloha_mac",
            ScoreModel::Caching { .. } => "caching",
            ScoreModel::Matching => "matching",
        }
    }

    pub fn sign_regime(&self) -> SignRegime {
        match self {
            ScoreModel::HardcoreThinning
            | ScoreModel::WidomRowlinsonLine
            | ScoreModel::WidomRowlinsonTree
            | ScoreModel::Caching { .. } => SignRegime::NonnegOrNegInf,
            ScoreModel::Lilypond | ScoreModel::AlohaMac { .. } | ScoreModel::Matching => {
                SignRegime::NonposOrNegInf
            }
        }
    }

    /// Effective popularity vector of the caching model (with reserved items).
    pub fn popularity(&self) -> Option<Vec<f64>> {
        match self {
            ScoreModel::Caching {
                popularity,
                k,
                reserve_neutral,
                ..
            } => {
                let mut p = popularity.clone();
                if *reserve_neutral {
                    p.extend(std::iter::repeat_n(0.0, *k));
                }
                Some(p)
            }
            _ => None,
        }
    }

    /// A mark that never lowers other points' scores and scores nonnegative
    /// itself. Caching has one only when `k` items have zero popularity; the
    /// largest such item ids are used.
    pub fn neutral_mark(&self) -> Option<OptMark> {
        match self {
            ScoreModel::HardcoreThinning => Some(OptMark::Retain(false)),
            ScoreModel::Caching { k, .. } => {
                let p = self.popularity().unwrap();
                let mut zeros: Vec<u32> = (1..=p.len() as u32)
                    .rev()
                    .filter(|&item| p[item as usize - 1] == 0.0)
                    .take(*k)
                    .collect();
                if zeros.len() < *k {
                    return None;
                }
                zeros.sort_unstable();
                Some(OptMark::ItemSet(zeros))
            }
            _ => None,
        }
    }

    pub fn mark_space(&self) -> MarkSpace {
        match self {
            ScoreModel::HardcoreThinning => MarkSpace::Binary,
            ScoreModel::WidomRowlinsonLine | ScoreModel::WidomRowlinsonTree => MarkSpace::Sign3,
            ScoreModel::Lilypond => MarkSpace::Radius,
            ScoreModel::AlohaMac { .. } => MarkSpace::AccessProb,
            ScoreModel::Caching { k, .. } => MarkSpace::ItemSets {
                items: self.popularity().unwrap().len() as u32,
                k: *k,
            },
            ScoreModel::Matching => MarkSpace::Partner,
        }
    }

    fn expected_base(&self) -> &'static str {
        match self {
            ScoreModel::HardcoreThinning | ScoreModel::Caching { .. } => "grain_radius",
            ScoreModel::WidomRowlinsonLine | ScoreModel::WidomRowlinsonTree => "weight_pair",
            ScoreModel::Lilypond => "none",
            ScoreModel::AlohaMac { .. } => "receiver_offset",
            ScoreModel::Matching => "color",
        }
    }

    /// Parameter constraints, independent of any window.
    pub fn validate_params(&self) -> Result<()> {
        match self {
            ScoreModel::AlohaMac { beta } if !(beta.is_finite() && *beta > 0.0) => {
                Err(Error::validation(format!("aloha beta must be positive, got {beta}")))
            }
            ScoreModel::Caching {
                popularity,
                k,
                grid_step,
                ..
            } => {
                if popularity.iter().any(|&p| !(p.is_finite() && p >= 0.0)) {
                    return Err(Error::validation("popularities must be nonnegative"));
                }
                let total: f64 = popularity.iter().sum();
                if (total - 1.0).abs() > 1e-12 {
                    return Err(Error::validation(format!(
                        "popularities must sum to 1, got {total}"
                    )));
                }
                let n = self.popularity().unwrap().len();
                if *k == 0 || *k > n {
                    return Err(Error::validation(format!(
                        "cache size K must satisfy 1 <= K <= N = {n}, got {k}"
                    )));
                }
                if let Some(h) = grid_step {
                    if !(h.is_finite() && *h > 0.0) {
                        return Err(Error::validation("grid_step must be positive"));
                    }
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Checks parameters against a window (topology, dimension, `beta > d`).
    pub fn validate_for(&self, w: &Window) -> Result<()> {
        self.validate_params()?;
        match (self, w) {
            (ScoreModel::WidomRowlinsonLine, Window::IntegerLine { .. }) => Ok(()),
            (ScoreModel::WidomRowlinsonTree, Window::TreeBall { .. }) => Ok(()),
            (ScoreModel::WidomRowlinsonLine, _) => {
                Err(Error::Topology("widom_rowlinson_line needs an integer line".into()))
            }
            (ScoreModel::WidomRowlinsonTree, _) => {
                Err(Error::Topology("widom_rowlinson_tree needs a tree ball".into()))
            }
            (ScoreModel::HardcoreThinning | ScoreModel::Caching { .. }, Window::PeriodicCube { d, .. }) => {
                if *d == 1 || *d == 2 {
                    Ok(())
                } else {
                    Err(Error::validation(format!("{} supports d in {{1, 2}}, got {d}", self.id())))
                }
            }
            (ScoreModel::AlohaMac { beta }, Window::PeriodicCube { d, .. }) => {
                if *beta > *d as f64 {
                    Ok(())
                } else {
                    Err(Error::validation(format!(
                        "aloha requires beta > d (beta = {beta}, d = {d})"
                    )))
                }
            }
            (ScoreModel::Lilypond | ScoreModel::Matching, Window::PeriodicCube { .. }) => Ok(()),
            (_, w) => Err(Error::Topology(format!(
                "{} needs a periodic cube, window is {}",
                self.id(),
                w.kind_name()
            ))),
        }
    }
}

/// Per-point lists of the points whose marks can influence a score.
#[derive(Debug, Clone)]
enum DepLists {
    All,
    Lists(Vec<Vec<usize>>),
}

/// A score model bound to the base data of one configuration.
#[derive(Debug, Clone)]
pub struct Scorer<'a> {
    model: &'a ScoreModel,
    config: &'a Configuration,
    n: usize,
    dist: Option<Vec<f64>>,
    /// `rx_dist[j * n + i]`: distance from transmitter `j` to the receiver of `i`.
    rx_dist: Option<Vec<f64>>,
    receivers: Vec<Vec<f64>>,
    popularity: Vec<f64>,
    grid_step: f64,
    deps: Option<DepLists>,
    infl: Option<DepLists>,
}

impl<'a> Scorer<'a> {
    /// Validates model and base marks; no geometry is precomputed.
    pub fn new(model: &'a ScoreModel, config: &'a Configuration) -> Result<Self> {
        model.validate_for(&config.window)?;
        let expected = model.expected_base();
        for (i, p) in config.points.iter().enumerate() {
            if p.base.kind_name() != expected {
                return Err(Error::MarkSpace {
                    index: i,
                    expected,
                    found: p.base.kind_name().to_string(),
                });
            }
            if let (BaseMark::ReceiverOffset(y), Window::PeriodicCube { d, .. }) = (&p.base, &config.window) {
                if y.len() != *d {
                    return Err(Error::validation(format!(
                        "receiver offset of point {i} has dimension {}, window has {d}",
                        y.len()
                    )));
                }
            }
        }
        let receivers = match (model, &config.window) {
            (ScoreModel::AlohaMac { .. }, Window::PeriodicCube { side, .. }) => config
                .points
                .iter()
                .map(|p| match &p.base {
                    BaseMark::ReceiverOffset(y) => p
                        .coords()
                        .iter()
                        .zip(y)
                        .map(|(x, dy)| wrap_coord(*side, x + dy))
                        .collect(),
                    _ => unreachable!(),
                })
                .collect(),
            _ => Vec::new(),
        };
        let popularity = model.popularity().unwrap_or_default();
        let grid_step = match model {
            ScoreModel::Caching { grid_step: Some(h), .. } => *h,
            _ => {
                let r_min = config
                    .points
                    .iter()
                    .filter_map(|p| match p.base {
                        BaseMark::GrainRadius(r) => Some(r),
                        _ => None,
                    })
                    .fold(f64::INFINITY, f64::min);
                if r_min.is_finite() {
                    r_min / 20.0
                } else {
                    1.0
                }
            }
        };
        Ok(Scorer {
            model,
            config,
            n: config.len(),
            dist: None,
            rx_dist: None,
            receivers,
            popularity,
            grid_step,
            deps: None,
            infl: None,
        })
    }

    /// Like [`Scorer::new`], additionally caching pairwise distances and the
    /// dependency structure used by swap evaluation.
    pub fn prepared(model: &'a ScoreModel, config: &'a Configuration) -> Result<Self> {
        let mut s = Scorer::new(model, config)?;
        let n = s.n;
        if let Window::PeriodicCube { side, .. } = config.window {
            let mut dist = vec![0.0; n * n];
            for i in 0..n {
                for j in (i + 1)..n {
                    let d = torus_dist(side, config.coords(i), config.coords(j));
                    dist[i * n + j] = d;
                    dist[j * n + i] = d;
                }
            }
            s.dist = Some(dist);
            if matches!(model, ScoreModel::AlohaMac { .. }) {
                let mut rx = vec![0.0; n * n];
                for j in 0..n {
                    for i in 0..n {
                        rx[j * n + i] = torus_dist(side, config.coords(j), &s.receivers[i]);
                    }
                }
                s.rx_dist = Some(rx);
            }
        }
        let deps = s.compute_deps();
        let infl = match &deps {
            DepLists::All => DepLists::All,
            DepLists::Lists(lists) => {
                let mut t = vec![Vec::new(); n];
                for (p, list) in lists.iter().enumerate() {
                    for &q in list {
                        t[q].push(p);
                    }
                }
                DepLists::Lists(t)
            }
        };
        s.deps = Some(deps);
        s.infl = Some(infl);
        Ok(s)
    }

    fn compute_deps(&self) -> DepLists {
        let n = self.n;
        match self.model {
            ScoreModel::WidomRowlinsonLine | ScoreModel::WidomRowlinsonTree => {
                DepLists::Lists((0..n).map(|i| self.config.window.site_neighbors(i)).collect())
            }
            ScoreModel::HardcoreThinning | ScoreModel::Caching { .. } => DepLists::Lists(
                (0..n)
                    .map(|i| {
                        (0..n)
                            .filter(|&j| j != i && self.dist(i, j) < self.grain(i) + self.grain(j))
                            .collect()
                    })
                    .collect(),
            ),
            ScoreModel::Lilypond => DepLists::Lists(
                (0..n)
                    .map(|i| {
                        let nn = (0..n)
                            .filter(|&j| j != i)
                            .map(|j| self.dist(i, j))
                            .fold(f64::INFINITY, f64::min);
                        (0..n)
                            .filter(|&j| j != i && self.dist(i, j) <= 2.0 * nn + GEOM_TOL)
                            .collect()
                    })
                    .collect(),
            ),
            ScoreModel::AlohaMac { .. } | ScoreModel::Matching => DepLists::All,
        }
    }

    pub fn model(&self) -> &ScoreModel {
        self.model
    }

    pub fn config(&self) -> &Configuration {
        self.config
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Torus distance between points `i` and `j`.
    #[inline]
    pub fn dist(&self, i: usize, j: usize) -> f64 {
        match &self.dist {
            Some(m) => m[i * self.n + j],
            None => match self.config.window {
                Window::PeriodicCube { side, .. } => {
                    torus_dist(side, self.config.coords(i), self.config.coords(j))
                }
                _ => (i as f64 - j as f64).abs(),
            },
        }
    }

    /// Distance from transmitter `j` to the receiver of point `i`.
    #[inline]
    pub fn receiver_dist(&self, j: usize, i: usize) -> f64 {
        match &self.rx_dist {
            Some(m) => m[j * self.n + i],
            None => {
                let side = self.config.window.side().unwrap();
                torus_dist(side, self.config.coords(j), &self.receivers[i])
            }
        }
    }

    pub fn receiver(&self, i: usize) -> &[f64] {
        &self.receivers[i]
    }

    pub(crate) fn popularity_vec(&self) -> &[f64] {
        &self.popularity
    }

    pub(crate) fn grid_step(&self) -> f64 {
        self.grid_step
    }

    pub(crate) fn grain(&self, i: usize) -> f64 {
        match self.config.points[i].base {
            BaseMark::GrainRadius(r) => r,
            _ => unreachable!("base marks validated at construction"),
        }
    }

    pub(crate) fn color(&self, i: usize) -> Color {
        match self.config.points[i].base {
            BaseMark::Color(c) => c,
            _ => unreachable!("base marks validated at construction"),
        }
    }

    pub(crate) fn weight(&self, i: usize, s: Sign3) -> f64 {
        self.config.points[i].base.weight(s).expect("base marks validated at construction")
    }

    /// Calls `f` for every `j != i` whose mark may influence the score of `i`.
    pub(crate) fn for_each_dep(&self, i: usize, mut f: impl FnMut(usize)) {
        match &self.deps {
            Some(DepLists::Lists(l)) => l[i].iter().copied().for_each(f),
            _ => match self.model {
                ScoreModel::WidomRowlinsonLine | ScoreModel::WidomRowlinsonTree => {
                    self.config.window.site_neighbors(i).into_iter().for_each(f)
                }
                _ => (0..self.n).filter(|&j| j != i).for_each(&mut f),
            },
        }
    }

    /// Points `p != i` whose score may change when the mark of `i` changes.
    pub fn influenced_by(&self, i: usize) -> Vec<usize> {
        match &self.infl {
            Some(DepLists::Lists(l)) => l[i].clone(),
            Some(DepLists::All) => (0..self.n).filter(|&j| j != i).collect(),
            None => {
                let mut out = Vec::new();
                for p in 0..self.n {
                    if p == i {
                        continue;
                    }
                    let mut hit = false;
                    self.for_each_dep(p, |q| hit |= q == i);
                    if hit {
                        out.push(p);
                    }
                }
                out
            }
        }
    }

    /// Points `j != i` whose marks may influence the score of `i`.
    pub fn dependencies(&self, i: usize) -> Vec<usize> {
        let mut out = Vec::new();
        self.for_each_dep(i, |j| out.push(j));
        out
    }

    /// Checks that every mark is set and belongs to the model's mark space.
    pub fn check_marks(&self, marks: &[OptMark]) -> Result<()> {
        if marks.len() != self.n {
            return Err(Error::validation(format!(
                "{} marks for {} points",
                marks.len(),
                self.n
            )));
        }
        let space = self.model.mark_space();
        for (i, m) in marks.iter().enumerate() {
            if m.is_unset() {
                return Err(Error::UnsetMark(i));
            }
            if !space.accepts(m) {
                return Err(Error::MarkSpace {
                    index: i,
                    expected: space.kind_name(),
                    found: m.kind_name().to_string(),
                });
            }
            m.validate()?;
            if let (MarkSpace::ItemSets { items, k }, OptMark::ItemSet(set)) = (&space, m) {
                if set.len() != *k || set.iter().any(|&v| v == 0 || v > *items) {
                    return Err(Error::validation(format!(
                        "point {i} must store {k} distinct items from 1..={items}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Score of point `i` under `marks`.
    pub fn score(&self, marks: &[OptMark], i: usize) -> Result<ExtendedScore> {
        let s = match self.model {
            ScoreModel::HardcoreThinning => hardcore::score(self, marks, i)?,
            ScoreModel::WidomRowlinsonLine | ScoreModel::WidomRowlinsonTree => {
                widom_rowlinson::score(self, marks, i)?
            }
            ScoreModel::Lilypond => lilypond::score(self, marks, i)?,
            ScoreModel::AlohaMac { beta } => aloha::score(self, marks, i, *beta)?,
            ScoreModel::Caching { .. } => caching::score(self, marks, i)?,
            ScoreModel::Matching => matching::score(self, marks, i)?,
        };
        if let ExtendedScore::Finite(x) = s {
            let ok = match self.model.sign_regime() {
                SignRegime::NonnegOrNegInf => x >= 0.0,
                SignRegime::NonposOrNegInf => x <= 0.0,
            };
            if !ok || x.is_nan() {
                return Err(Error::assertion(format!(
                    "{} score {x} at point {i} violates its sign regime",
                    self.model.id()
                )));
            }
        }
        Ok(s)
    }

    pub fn scores(&self, marks: &[OptMark]) -> Result<Vec<ExtendedScore>> {
        (0..self.n).map(|i| self.score(marks, i)).collect()
    }

    /// Sum of all scores; `−∞` is absorbing.
    pub fn total(&self, marks: &[OptMark]) -> Result<ExtendedScore> {
        let mut acc = ExtendedScore::ZERO;
        for i in 0..self.n {
            acc = acc + self.score(marks, i)?;
        }
        Ok(acc)
    }
}

// Mark accessors shared by the evaluators.

pub(crate) fn mark_error(marks: &[OptMark], i: usize, expected: &'static str) -> Error {
    match &marks[i] {
        OptMark::Unset => Error::UnsetMark(i),
        m => Error::MarkSpace {
            index: i,
            expected,
            found: m.kind_name().to_string(),
        },
    }
}

pub(crate) fn retain_mark(marks: &[OptMark], i: usize) -> Result<bool> {
    match marks[i] {
        OptMark::Retain(b) => Ok(b),
        _ => Err(mark_error(marks, i, "retain")),
    }
}

pub(crate) fn sign_mark(marks: &[OptMark], i: usize) -> Result<Sign3> {
    match marks[i] {
        OptMark::Sign3(s) => Ok(s),
        _ => Err(mark_error(marks, i, "sign3")),
    }
}

pub(crate) fn radius_mark(marks: &[OptMark], i: usize) -> Result<f64> {
    match marks[i] {
        OptMark::Radius(r) => Ok(r),
        _ => Err(mark_error(marks, i, "radius")),
    }
}

pub(crate) fn prob_mark(marks: &[OptMark], i: usize) -> Result<f64> {
    match marks[i] {
        OptMark::AccessProb(p) if p > 0.0 && p <= 1.0 => Ok(p),
        OptMark::AccessProb(p) => Err(Error::validation(format!(
            "access probability of point {i} must lie in (0, 1], got {p}"
        ))),
        _ => Err(mark_error(marks, i, "access_prob")),
    }
}

pub(crate) fn items_mark(marks: &[OptMark], i: usize) -> Result<&[u32]> {
    match &marks[i] {
        OptMark::ItemSet(v) => Ok(v),
        _ => Err(mark_error(marks, i, "item_set")),
    }
}

pub(crate) fn partner_mark(marks: &[OptMark], i: usize) -> Result<usize> {
    match marks[i] {
        OptMark::Partner(j) => Ok(j),
        _ => Err(mark_error(marks, i, "partner")),
    }
}

/// Score of point `i` in configuration `c`; checks every mark first.
pub fn score_at(c: &Configuration, i: usize, model: &ScoreModel) -> Result<ExtendedScore> {
    if i >= c.len() {
        return Err(Error::validation(format!("point index {i} out of range")));
    }
    let s = Scorer::new(model, c)?;
    let marks = c.marks();
    s.check_marks(&marks)?;
    s.score(&marks, i)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subsets_enumerate_lexicographically() {
        assert_eq!(
            k_subsets(4, 2),
            vec![vec![1, 2], vec![1, 3], vec![1, 4], vec![2, 3], vec![2, 4], vec![3, 4]]
        );
        assert_eq!(binomial(4, 2), 6);
        assert_eq!(binomial(10, 0), 1);
    }

    #[test]
    fn caching_parameters() {
        let m = ScoreModel::caching(vec![0.5, 0.5, 0.1], 2);
        assert!(m.validate_params().is_err());
        let m = ScoreModel::caching(vec![0.6, 0.4], 3);
        assert!(m.validate_params().is_err());
        let m = ScoreModel::caching(vec![0.6, 0.4, 0.0, 0.0], 2);
        assert_eq!(m.neutral_mark(), Some(OptMark::ItemSet(vec![3, 4])));
        // no zero-popularity items: no neutral mark
        let m = ScoreModel::caching(vec![0.4, 0.3, 0.2, 0.1], 2);
        assert_eq!(m.neutral_mark(), None);
        let m = ScoreModel::Caching {
            popularity: vec![0.4, 0.3, 0.2, 0.1],
            k: 2,
            reserve_neutral: true,
            grid_step: None,
        };
        assert_eq!(m.neutral_mark(), Some(OptMark::ItemSet(vec![5, 6])));
        assert_eq!(m.mark_space(), MarkSpace::ItemSets { items: 6, k: 2 });
    }

    #[test]
    fn aloha_requires_beta_above_dimension() {
        let w = Window::periodic_cube(2, 10.0).unwrap();
        assert!(ScoreModel::AlohaMac { beta: 2.0 }.validate_for(&w).is_err());
        assert!(ScoreModel::AlohaMac { beta: 4.0 }.validate_for(&w).is_ok());
    }

    #[test]
    fn topology_checks() {
        let line = Window::integer_line(3).unwrap();
        assert!(ScoreModel::HardcoreThinning.validate_for(&line).is_err());
        assert!(ScoreModel::WidomRowlinsonLine.validate_for(&line).is_ok());
        assert!(ScoreModel::WidomRowlinsonTree.validate_for(&line).is_err());
        let cube3 = Window::periodic_cube(3, 2.0).unwrap();
        assert!(ScoreModel::HardcoreThinning.validate_for(&cube3).is_err());
    }

    #[test]
    fn model_json_shape() {
        let s = serde_json::to_string(&ScoreModel::AlohaMac { beta: 4.0 }).unwrap();
        assert_eq!(s, r#"{"kind":"aloha_mac","beta":4.0}"#);
        let m: ScoreModel = serde_json::from_str(r#"{"kind":"hardcore_thinning"}"#).unwrap();
        assert_eq!(m, ScoreModel::HardcoreThinning);
    }
}
