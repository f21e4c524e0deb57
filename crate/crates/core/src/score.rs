//! Extended-real arithmetic for scores.
//!
//! Scores live in `ℝ ∪ {−∞}`; `−∞` marks an inadmissible point. Differences of
//! scores additionally need a `+∞` sentinel (repairing an inadmissible point),
//! and two inadmissible values cancel to exactly zero.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, Neg};

use serde::{Deserialize, Serialize};

/// A score value: finite real or `−∞`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtendedScore {
    Finite(f64),
    NegInfinity,
}

impl ExtendedScore {
    pub const ZERO: ExtendedScore = ExtendedScore::Finite(0.0);

    /// Maps `f64::NEG_INFINITY` to [`ExtendedScore::NegInfinity`]. NaN and `+∞`
    /// are not scores and yield `None`.
    pub fn from_f64(x: f64) -> Option<Self> {
        if x.is_nan() || x == f64::INFINITY {
            None
        } else if x == f64::NEG_INFINITY {
            Some(ExtendedScore::NegInfinity)
        } else {
            Some(ExtendedScore::Finite(x))
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, ExtendedScore::Finite(_))
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            ExtendedScore::Finite(x) => Some(x),
            ExtendedScore::NegInfinity => None,
        }
    }

    pub fn to_f64(self) -> f64 {
        match self {
            ExtendedScore::Finite(x) => x,
            ExtendedScore::NegInfinity => f64::NEG_INFINITY,
        }
    }

    /// `after − before` with the score-difference conventions.
    pub fn difference(after: ExtendedScore, before: ExtendedScore) -> ScoreDelta {
        use ExtendedScore::*;
        match (after, before) {
            (Finite(a), Finite(b)) => ScoreDelta::Finite(a - b),
            (Finite(_), NegInfinity) => ScoreDelta::PosInfinity,
            (NegInfinity, Finite(_)) => ScoreDelta::NegInfinity,
            (NegInfinity, NegInfinity) => ScoreDelta::Finite(0.0),
        }
    }
}

impl Add for ExtendedScore {
    type Output = ExtendedScore;

    fn add(self, rhs: ExtendedScore) -> ExtendedScore {
        match (self, rhs) {
            (ExtendedScore::Finite(a), ExtendedScore::Finite(b)) => ExtendedScore::Finite(a + b),
            _ => ExtendedScore::NegInfinity,
        }
    }
}

impl Sum for ExtendedScore {
    fn sum<I: Iterator<Item = ExtendedScore>>(iter: I) -> Self {
        iter.fold(ExtendedScore::ZERO, Add::add)
    }
}

impl PartialOrd for ExtendedScore {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        use ExtendedScore::*;
        match (self, other) {
            (Finite(a), Finite(b)) => a.partial_cmp(b),
            (Finite(_), NegInfinity) => Some(Ordering::Greater),
            (NegInfinity, Finite(_)) => Some(Ordering::Less),
            (NegInfinity, NegInfinity) => Some(Ordering::Equal),
        }
    }
}

impl fmt::Display for ExtendedScore {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedScore::Finite(x) => write!(f, "{x}"),
            ExtendedScore::NegInfinity => f.write_str("-inf"),
        }
    }
}

/// An aggregated score difference.
///
/// Accumulation rules: finite parts add; a `+∞` term dominates finite terms; a
/// `−∞` term is absorbing, including against `+∞` (a swap that breaks
/// admissibility somewhere is never an improvement).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreDelta {
    Finite(f64),
    PosInfinity,
    NegInfinity,
}

impl ScoreDelta {
    pub const ZERO: ScoreDelta = ScoreDelta::Finite(0.0);

    pub fn accumulate(self, rhs: ScoreDelta) -> ScoreDelta {
        use ScoreDelta::*;
        match (self, rhs) {
            (NegInfinity, _) | (_, NegInfinity) => NegInfinity,
            (PosInfinity, _) | (_, PosInfinity) => PosInfinity,
            (Finite(a), Finite(b)) => Finite(a + b),
        }
    }

    /// Whether a swap with this difference is accepted at threshold `delta_min`.
    pub fn improves(self, delta_min: f64) -> bool {
        match self {
            ScoreDelta::PosInfinity => true,
            ScoreDelta::Finite(x) => x > delta_min,
            ScoreDelta::NegInfinity => false,
        }
    }

    pub fn to_f64(self) -> f64 {
        match self {
            ScoreDelta::Finite(x) => x,
            ScoreDelta::PosInfinity => f64::INFINITY,
            ScoreDelta::NegInfinity => f64::NEG_INFINITY,
        }
    }

    /// Total order used for picking the best swap: `+∞` above every finite
    /// value, `−∞` below.
    pub fn rank_cmp(self, other: ScoreDelta) -> Ordering {
        self.to_f64().total_cmp(&other.to_f64())
    }
}

impl Neg for ScoreDelta {
    type Output = ScoreDelta;

    fn neg(self) -> ScoreDelta {
        match self {
            ScoreDelta::Finite(x) => ScoreDelta::Finite(-x),
            ScoreDelta::PosInfinity => ScoreDelta::NegInfinity,
            ScoreDelta::NegInfinity => ScoreDelta::PosInfinity,
        }
    }
}

impl Sum for ScoreDelta {
    fn sum<I: Iterator<Item = ScoreDelta>>(iter: I) -> Self {
        iter.fold(ScoreDelta::ZERO, ScoreDelta::accumulate)
    }
}

impl fmt::Display for ScoreDelta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScoreDelta::Finite(x) => write!(f, "{x}"),
            ScoreDelta::PosInfinity => f.write_str("+inf"),
            ScoreDelta::NegInfinity => f.write_str("-inf"),
        }
    }
}
