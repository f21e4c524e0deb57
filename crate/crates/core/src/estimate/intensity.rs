use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::Configuration;
use crate::error::{Error, Result};
use crate::exact::apply_oracle;
use crate::marks::{OptMark, Sign3};
use crate::models::{MarkSpace, ScoreModel, Scorer};
use crate::optimize::{local_search, SearchParams};
use crate::rng::RngSeed;
use crate::sample::PointProcess;
use crate::score::ExtendedScore;
use crate::window::Window;

/// How a replicate's optimization marks are chosen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Policy {
    /// Every grain retained (hardcore only).
    AllRetain,
    /// The model's neutral mark everywhere.
    Neutral,
    /// The same mark at every point.
    Constant { mark: OptMark },
    /// Independent marks: `Retain(true)` with probability `p`, `±` with
    /// probability `p/2` each; other spaces uniform.
    RandomIid {
        #[serde(default = "half")]
        p: f64,
    },
    LocalSearch { search: SearchParams },
    /// Named construction from the exact module.
    Oracle { name: String },
}

fn half() -> f64 {
    0.5
}

impl Policy {
    pub fn name(&self) -> String {
        match self {
            Policy::AllRetain => "all_retain".into(),
            Policy::Neutral => "neutral".into(),
            Policy::Constant { .. } => "constant".into(),
            Policy::RandomIid { .. } => "random_iid".into(),
            Policy::LocalSearch { search } => format!("local_search_{}", match search.mode {
                crate::optimize::SearchMode::Exhaustive => "exhaustive",
                crate::optimize::SearchMode::Randomized => "randomized",
            }),
            Policy::Oracle { name } => format!("oracle_{name}"),
        }
    }

    pub fn validate(&self, model: &ScoreModel) -> Result<()> {
        match self {
            Policy::AllRetain if *model != ScoreModel::HardcoreThinning => {
                Err(Error::validation("all_retain applies to hardcore_thinning only"))
            }
            Policy::Neutral if model.neutral_mark().is_none() => Err(Error::validation(format!(
                "{} has no neutral mark",
                model.id()
            ))),
            Policy::Constant { mark } if !model.mark_space().accepts(mark) => Err(Error::validation(format!(
                "constant mark {} does not belong to the mark space of {}",
                mark.kind_name(),
                model.id()
            ))),
            Policy::RandomIid { p } if !(*p >= 0.0 && *p <= 1.0) => {
                Err(Error::validation("random_iid probability must lie in [0, 1]"))
            }
            Policy::LocalSearch { search } => search.validate(),
            Policy::Oracle { name } => crate::exact::check_oracle(name, model),
            _ => Ok(()),
        }
    }

    /// Marks `c` according to the policy. Returns the marked configuration
    /// and, for searches, the certificate label.
    pub fn apply(&self, c: &Configuration, model: &ScoreModel, seed: RngSeed) -> Result<(Configuration, Option<String>)> {
        self.validate(model)?;
        let n = c.len();
        let fill = |mark: OptMark| c.with_marks(&vec![mark; n]);
        match self {
            Policy::AllRetain => Ok((fill(OptMark::Retain(true)), None)),
            Policy::Neutral => Ok((fill(model.neutral_mark().unwrap()), None)),
            Policy::Constant { mark } => Ok((fill(mark.clone()), None)),
            Policy::RandomIid { p } => {
                let mut rng = seed.rng();
                let space = model.mark_space();
                let marks: Vec<OptMark> = (0..n)
                    .map(|i| match space {
                        MarkSpace::Binary => OptMark::Retain(rng.random::<f64>() < *p),
                        MarkSpace::Sign3 => {
                            let u = rng.random::<f64>();
                            OptMark::Sign3(if u < p / 2.0 {
                                Sign3::Plus
                            } else if u < *p {
                                Sign3::Minus
                            } else {
                                Sign3::Zero
                            })
                        }
                        MarkSpace::Radius => OptMark::Radius(rng.random::<f64>()),
                        MarkSpace::AccessProb => OptMark::AccessProb(1.0 - rng.random::<f64>()),
                        _ => {
                            let vals = space.discrete_values(n, i).unwrap_or_default();
                            if vals.is_empty() {
                                OptMark::Partner(i)
                            } else {
                                vals[rng.random_range(0..vals.len())].clone()
                            }
                        }
                    })
                    .collect();
                Ok((c.with_marks(&marks), None))
            }
            Policy::LocalSearch { search } => {
                let mut params = search.clone();
                params.seed = seed.child(0).seed ^ seed.stream;
                let unset = c.with_marks(&vec![OptMark::Unset; n]);
                let (out, trace) = local_search(&unset, model, &params)?;
                Ok((out, Some(trace.certificate.label())))
            }
            Policy::Oracle { name } => Ok((apply_oracle(name, c, model)?, None)),
        }
    }
}

/// Outcome of one replicate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateOutcome {
    pub replicate: usize,
    pub seed: RngSeed,
    pub n_points: usize,
    pub total: ExtendedScore,
    pub certificate: Option<String>,
    /// `|Σ ξ / vol − (n / vol)·(Σ ξ / n)|`, zero when inadmissible or empty.
    pub palm_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntensityEstimate {
    /// Mean score per unit volume over admissible replicates.
    pub mean: f64,
    pub stderr: f64,
    pub ci95: (f64, f64),
    pub replicates: usize,
    pub inadmissible_fraction: f64,
    /// Largest Palm-consistency gap over replicates.
    pub palm_gap: f64,
}

/// Samples, marks and scores one replicate.
pub fn run_replicate(
    policy: &Policy,
    model: &ScoreModel,
    window: &Window,
    process: &PointProcess,
    base: RngSeed,
    replicate: usize,
) -> Result<(Configuration, ReplicateOutcome)> {
    let seed = base.child(replicate as u64);
    let c = process.sample(window, seed, model.id())?;
    let (marked, certificate) = policy.apply(&c, model, seed.child(1))?;
    let scorer = Scorer::new(model, &marked)?;
    let marks = marked.marks();
    scorer.check_marks(&marks)?;
    let scores = scorer.scores(&marks)?;
    let total = scores.iter().fold(ExtendedScore::ZERO, |a, &s| a + s);
    let vol = window.volume();
    let palm_gap = match total {
        ExtendedScore::Finite(t) if !scores.is_empty() => {
            let n = scores.len() as f64;
            (t / vol - (n / vol) * (t / n)).abs()
        }
        _ => 0.0,
    };
    let outcome = ReplicateOutcome {
        replicate,
        seed,
        n_points: marked.len(),
        total,
        certificate,
        palm_gap,
    };
    Ok((marked, outcome))
}

/// Aggregates replicate totals into a per-volume estimate.
pub fn summarize(outcomes: &[ReplicateOutcome], volume: f64) -> IntensityEstimate {
    let vals: Vec<f64> = outcomes
        .iter()
        .filter_map(|o| o.total.finite())
        .map(|t| t / volume)
        .collect();
    let k = vals.len();
    let mean = if k == 0 { f64::NAN } else { vals.iter().sum::<f64>() / k as f64 };
    let stderr = if k < 2 {
        0.0
    } else {
        let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1) as f64;
        (var / k as f64).sqrt()
    };
    let inadmissible = outcomes.len() - k;
    IntensityEstimate {
        mean,
        stderr,
        ci95: (mean - 1.96 * stderr, mean + 1.96 * stderr),
        replicates: outcomes.len(),
        inadmissible_fraction: if outcomes.is_empty() {
            0.0
        } else {
            inadmissible as f64 / outcomes.len() as f64
        },
        palm_gap: outcomes.iter().map(|o| o.palm_gap).fold(0.0, f64::max),
    }
}

/// Monte Carlo estimate of the score intensity of a marking policy.
/// Replicates run in parallel on per-replicate substreams of `seed`.
pub fn intensity_estimate(
    policy: &Policy,
    model: &ScoreModel,
    window: &Window,
    process: &PointProcess,
    replicates: usize,
    seed: RngSeed,
) -> Result<IntensityEstimate> {
    model.validate_for(window)?;
    policy.validate(model)?;
    let outcomes = (0..replicates)
        .into_par_iter()
        .map(|r| run_replicate(policy, model, window, process, seed, r).map(|(_, o)| o))
        .collect::<Result<Vec<_>>>()?;
    Ok(summarize(&outcomes, window.volume()))
}
