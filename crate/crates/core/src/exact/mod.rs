//! Independent oracles and explicit optimal constructions.

mod brute;
pub(crate) mod lilypond;
mod matching;
mod mtp;
mod tree;
mod wr;

use serde::{Deserialize, Serialize};

pub use brute::{brute_force_optimum, brute_force_optimum_over, BruteForceResult, BRUTE_FORCE_CAP};
pub use lilypond::{lilypond_fixed_point, lilypond_residual, lilypond_residuals, lilypond_solve, FreezeEvent, LilypondSolution};
pub use matching::{color_classes, matching_optimum, next_permutation, MatchingSolution, MATCHING_MAX_PER_COLOR};
pub use mtp::{
    aloha_coefficients, aloha_objective, aloha_optimal_marking, concave_argmax_with_slope, mtp_argmax, MarkInterval,
    Shape, ARGMAX_GRID_CAP,
};
pub use tree::{tree_boundary, tree_local_optimality_check, TreeVerdict, TreeWitness, TREE_MAX_DEPTH, TREE_MAX_SUBSET};
pub use wr::{
    blocking_intervals, line_weights, wr_blocking_intervals, wr_chain_dp, wr_unique_marking, BlockingInterval,
    DpResult, Segment, UniqueMarking,
};

use crate::config::Configuration;
use crate::error::{Error, Result};
use crate::marks::OptMark;
use crate::models::ScoreModel;

/// Tolerance of the Aloha construction when used as a policy.
pub const ALOHA_TOL: f64 = 1e-12;

/// Oracle names accepted by [`apply_oracle`].
pub const ORACLES: [&str; 5] = [
    "brute_force",
    "wr_unique_marking",
    "lilypond_solve",
    "aloha_optimal_marking",
    "matching_optimum",
];

/// Checks that oracle `name` exists and applies to `model`.
pub fn check_oracle(name: &str, model: &ScoreModel) -> Result<()> {
    let ok = match name {
        "brute_force" => model.mark_space().is_discrete(),
        "wr_unique_marking" => *model == ScoreModel::WidomRowlinsonLine,
        "lilypond_solve" => *model == ScoreModel::Lilypond,
        "aloha_optimal_marking" => matches!(model, ScoreModel::AlohaMac { .. }),
        "matching_optimum" => *model == ScoreModel::Matching,
        _ => {
            return Err(Error::validation(format!(
                "unknown oracle {name:?}; expected one of {}",
                ORACLES.join(", ")
            )))
        }
    };
    if ok {
        Ok(())
    } else {
        Err(Error::validation(format!("oracle {name} does not apply to {}", model.id())))
    }
}

/// Marks `c` with the output of oracle `name`.
pub fn apply_oracle(name: &str, c: &Configuration, model: &ScoreModel) -> Result<Configuration> {
    check_oracle(name, model)?;
    match name {
        "brute_force" => {
            let r = brute_force_optimum(c, model, BRUTE_FORCE_CAP)?;
            Ok(c.with_marks(&r.marks))
        }
        "wr_unique_marking" => {
            let u = wr_unique_marking(c)?;
            let marks: Vec<OptMark> = u.marks.into_iter().map(OptMark::Sign3).collect();
            Ok(c.with_marks(&marks))
        }
        "lilypond_solve" => {
            if c.len() < 2 {
                // a lone ball is unconstrained; it scores zero at any radius
                return Ok(c.with_marks(&vec![OptMark::Radius(0.0); c.len()]));
            }
            Ok(lilypond_solve(c)?.marked(c))
        }
        "aloha_optimal_marking" => match model {
            ScoreModel::AlohaMac { beta } => aloha_optimal_marking(c, *beta, ALOHA_TOL),
            _ => unreachable!("checked above"),
        },
        "matching_optimum" => Ok(matching_optimum(c)?.marked),
        _ => unreachable!("checked above"),
    }
}

/// JSON summary of one oracle call.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleRecord {
    pub oracle: String,
    pub model: String,
    pub n: usize,
    pub value: Option<f64>,
    pub multiplicity: Option<u64>,
    pub marks: Vec<OptMark>,
    pub residuals: Vec<f64>,
}
