use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::config::Configuration;
use crate::error::{Error, Result};
use crate::marks::{BaseMark, OptMark};
use crate::models::{caching_coverage_count, ScoreModel, Scorer};
use crate::rng::RngSeed;
use crate::score::ExtendedScore;
use crate::window::{torus_dist, Window};

/// Monte Carlo proportion with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProportionEstimate {
    pub estimate: f64,
    pub stderr: f64,
    pub ci95: (f64, f64),
    pub samples: usize,
}

impl ProportionEstimate {
    fn from_hits(hits: usize, samples: usize) -> Self {
        let p = if samples == 0 { 0.0 } else { hits as f64 / samples as f64 };
        let stderr = if samples == 0 {
            0.0
        } else {
            (p * (1.0 - p) / samples as f64).sqrt()
        };
        ProportionEstimate {
            estimate: p,
            stderr,
            ci95: (p - 1.96 * stderr, p + 1.96 * stderr),
            samples,
        }
    }
}

fn cube(c: &Configuration) -> Result<(usize, f64)> {
    match c.window {
        Window::PeriodicCube { d, side } => Ok((d, side)),
        _ => Err(Error::Topology("coverage needs a periodic cube".into())),
    }
}

fn uniform_point<R: Rng>(rng: &mut R, d: usize, side: f64) -> Vec<f64> {
    (0..d).map(|_| side * rng.random::<f64>()).collect()
}

fn sample_item<R: Rng>(rng: &mut R, cumulative: &[f64]) -> u32 {
    let u = rng.random::<f64>() * cumulative.last().copied().unwrap_or(1.0);
    let k = cumulative.partition_point(|&c| c <= u);
    (k.min(cumulative.len() - 1) + 1) as u32
}

/// Probability that a uniform location requesting an item drawn from the
/// popularity law is covered by a cache storing that item.
pub fn coverage_hit_probability(
    c: &Configuration,
    model: &ScoreModel,
    samples: usize,
    seed: RngSeed,
) -> Result<ProportionEstimate> {
    let (d, side) = cube(c)?;
    let popularity = model
        .popularity()
        .ok_or_else(|| Error::validation("hit probability needs the caching model"))?;
    let s = Scorer::new(model, c)?;
    s.check_marks(&c.marks())?;
    let mut cumulative = Vec::with_capacity(popularity.len());
    let mut acc = 0.0;
    for p in &popularity {
        acc += p;
        cumulative.push(acc);
    }
    let mut rng = seed.rng();
    let mut hits = 0;
    for _ in 0..samples {
        let y = uniform_point(&mut rng, d, side);
        let k = sample_item(&mut rng, &cumulative);
        if caching_coverage_count(c, &y, k)? > 0 {
            hits += 1;
        }
    }
    Ok(ProportionEstimate::from_hits(hits, samples))
}

/// Length of the union of arcs `[x − r, x + r]` on a circle of length `side`.
pub fn union_length_1d(side: f64, arcs: &[(f64, f64)]) -> f64 {
    let mut pieces: Vec<(f64, f64)> = Vec::new();
    for &(x, r) in arcs {
        if 2.0 * r >= side {
            return side;
        }
        let (lo, hi) = (x - r, x + r);
        if lo < 0.0 {
            pieces.push((lo + side, side));
            pieces.push((0.0, hi));
        } else if hi > side {
            pieces.push((lo, side));
            pieces.push((0.0, hi - side));
        } else {
            pieces.push((lo, hi));
        }
    }
    pieces.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut total = 0.0;
    let mut current: Option<(f64, f64)> = None;
    for (lo, hi) in pieces {
        current = match current {
            Some((a, b)) if lo <= b => Some((a, b.max(hi))),
            Some((a, b)) => {
                total += b - a;
                Some((lo, hi))
            }
            None => Some((lo, hi)),
        };
    }
    if let Some((a, b)) = current {
        total += b - a;
    }
    total
}

/// Both sides of a mass-transport identity on one configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CampbellCheck {
    /// Score sum divided by window volume.
    pub score_per_volume: f64,
    /// Covered volume fraction (hardcore) or hit probability (caching).
    pub spatial: f64,
    /// Monte Carlo standard error of `spatial`; zero when computed exactly.
    pub spatial_stderr: f64,
    /// `|score_per_volume − spatial| / max(spatial, 1e−12)`.
    pub gap: f64,
}

/// Compares the score sum per volume with the spatial quantity it transports:
/// the covered fraction for hardcore thinning (exact sweep in d = 1, Monte
/// Carlo in d = 2) and the hit probability for caching (Monte Carlo).
pub fn campbell_identity_check(
    c: &Configuration,
    model: &ScoreModel,
    samples: usize,
    seed: RngSeed,
) -> Result<CampbellCheck> {
    let (d, side) = cube(c)?;
    let s = Scorer::new(model, c)?;
    let marks = c.marks();
    s.check_marks(&marks)?;
    let total = match s.total(&marks)? {
        ExtendedScore::Finite(t) => t,
        ExtendedScore::NegInfinity => {
            return Err(Error::validation("the identity needs an admissible marking"))
        }
    };
    let score_per_volume = total / c.window.volume();
    let (spatial, spatial_stderr) = match model {
        ScoreModel::HardcoreThinning => {
            let grains: Vec<(Vec<f64>, f64)> = c
                .points
                .iter()
                .filter(|p| p.opt == OptMark::Retain(true))
                .map(|p| match p.base {
                    BaseMark::GrainRadius(r) => (p.coords().to_vec(), r),
                    _ => unreachable!("checked by the scorer"),
                })
                .collect();
            if d == 1 {
                let arcs: Vec<(f64, f64)> = grains.iter().map(|(x, r)| (x[0], *r)).collect();
                (union_length_1d(side, &arcs) / side, 0.0)
            } else {
                let mut rng = seed.rng();
                let mut hits = 0;
                for _ in 0..samples {
                    let y = uniform_point(&mut rng, d, side);
                    if grains.iter().any(|(x, r)| torus_dist(side, &y, x) <= *r) {
                        hits += 1;
                    }
                }
                let e = ProportionEstimate::from_hits(hits, samples);
                (e.estimate, e.stderr)
            }
        }
        ScoreModel::Caching { .. } => {
            let e = coverage_hit_probability(c, model, samples, seed)?;
            (e.estimate, e.stderr)
        }
        m => {
            return Err(Error::Unsupported(format!(
                "no spatial identity implemented for {}",
                m.id()
            )))
        }
    };
    let gap = (score_per_volume - spatial).abs() / spatial.max(1e-12);
    Ok(CampbellCheck {
        score_per_volume,
        spatial,
        spatial_stderr,
        gap,
    })
}
