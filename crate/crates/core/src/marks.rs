//! Base marks, optimization marks and marked points.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Color {
    Blue,
    Red,
}

/// Particle type on the line or tree: none, `+` or `−`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sign3 {
    Zero,
    Plus,
    Minus,
}

impl Sign3 {
    /// Enumeration order used by every exhaustive routine.
    pub const ALL: [Sign3; 3] = [Sign3::Zero, Sign3::Plus, Sign3::Minus];

    pub fn flipped(self) -> Sign3 {
        match self {
            Sign3::Zero => Sign3::Zero,
            Sign3::Plus => Sign3::Minus,
            Sign3::Minus => Sign3::Plus,
        }
    }

    /// Opposite nonzero signs may not be adjacent.
    pub fn conflicts(self, other: Sign3) -> bool {
        matches!(
            (self, other),
            (Sign3::Plus, Sign3::Minus) | (Sign3::Minus, Sign3::Plus)
        )
    }

    pub fn index(self) -> usize {
        match self {
            Sign3::Zero => 0,
            Sign3::Plus => 1,
            Sign3::Minus => 2,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Sign3::Zero => '0',
            Sign3::Plus => '+',
            Sign3::Minus => '-',
        }
    }
}

/// Given (non-optimized) mark of a point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaseMark {
    GrainRadius(f64),
    Color(Color),
    WeightPair { plus: f64, minus: f64 },
    ReceiverOffset(Vec<f64>),
    None,
}

impl BaseMark {
    pub fn kind_name(&self) -> &'static str {
        match self {
            BaseMark::GrainRadius(_) => "grain_radius",
            BaseMark::Color(_) => "color",
            BaseMark::WeightPair { .. } => "weight_pair",
            BaseMark::ReceiverOffset(_) => "receiver_offset",
            BaseMark::None => "none",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            BaseMark::GrainRadius(r) if !(r.is_finite() && *r > 0.0) => {
                Err(Error::validation(format!("grain radius must be positive, got {r}")))
            }
            BaseMark::WeightPair { plus, minus }
                if !(plus.is_finite() && minus.is_finite() && *plus >= 0.0 && *minus >= 0.0) =>
            {
                Err(Error::validation(format!(
                    "weights must be nonnegative, got ({plus}, {minus})"
                )))
            }
            BaseMark::ReceiverOffset(y) => {
                let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
                if (norm - 1.0).abs() > 1e-12 {
                    Err(Error::validation(format!(
                        "receiver offset must have unit norm, got {norm}"
                    )))
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }

    pub fn weight(&self, sign: Sign3) -> Option<f64> {
        match (self, sign) {
            (BaseMark::WeightPair { .. }, Sign3::Zero) => Some(0.0),
            (BaseMark::WeightPair { plus, .. }, Sign3::Plus) => Some(*plus),
            (BaseMark::WeightPair { minus, .. }, Sign3::Minus) => Some(*minus),
            _ => None,
        }
    }
}

/// Optimization mark: the quantity being chosen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptMark {
    Retain(bool),
    Sign3(Sign3),
    Radius(f64),
    AccessProb(f64),
    /// Sorted set of distinct item ids in `1..=N`.
    ItemSet(Vec<u32>),
    /// Index of the matching partner within the configuration.
    Partner(usize),
    Unset,
}

impl OptMark {
    pub fn kind_name(&self) -> &'static str {
        match self {
            OptMark::Retain(_) => "retain",
            OptMark::Sign3(_) => "sign3",
            OptMark::Radius(_) => "radius",
            OptMark::AccessProb(_) => "access_prob",
            OptMark::ItemSet(_) => "item_set",
            OptMark::Partner(_) => "partner",
            OptMark::Unset => "unset",
        }
    }

    pub fn is_unset(&self) -> bool {
        matches!(self, OptMark::Unset)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            OptMark::Radius(r) if !(r.is_finite() && *r >= 0.0) => {
                Err(Error::validation(format!("radius must be nonnegative, got {r}")))
            }
            OptMark::AccessProb(p) if !(*p > 0.0 && *p <= 1.0) => Err(Error::validation(format!(
                "access probability must lie in (0, 1], got {p}"
            ))),
            OptMark::ItemSet(items) => {
                if items.windows(2).any(|w| w[0] >= w[1]) {
                    Err(Error::validation("item set must be strictly increasing"))
                } else if items.first() == Some(&0) {
                    Err(Error::validation("item ids start at 1"))
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }
}

/// Location of a point: coordinates on a periodic cube or a site/vertex id.
#[derive(Debug, Clone, PartialEq)]
pub enum Position {
    Point(Vec<f64>),
    Site(usize),
}

impl Position {
    pub fn coords(&self) -> Option<&[f64]> {
        match self {
            Position::Point(x) => Some(x),
            Position::Site(_) => None,
        }
    }

    pub fn site(&self) -> Option<usize> {
        match self {
            Position::Site(s) => Some(*s),
            Position::Point(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MarkedPointRepr", into = "MarkedPointRepr")]
pub struct MarkedPoint {
    pub position: Position,
    pub base: BaseMark,
    pub opt: OptMark,
}

impl MarkedPoint {
    pub fn at(coords: Vec<f64>, base: BaseMark) -> Self {
        MarkedPoint {
            position: Position::Point(coords),
            base,
            opt: OptMark::Unset,
        }
    }

    pub fn at_site(site: usize, base: BaseMark) -> Self {
        MarkedPoint {
            position: Position::Site(site),
            base,
            opt: OptMark::Unset,
        }
    }

    pub fn with_opt(mut self, opt: OptMark) -> Self {
        self.opt = opt;
        self
    }

    pub fn coords(&self) -> &[f64] {
        self.position.coords().unwrap_or(&[])
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MarkedPointRepr {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pos: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    site: Option<usize>,
    base: BaseMark,
    opt: OptMark,
}

impl TryFrom<MarkedPointRepr> for MarkedPoint {
    type Error = String;

    fn try_from(r: MarkedPointRepr) -> std::result::Result<Self, String> {
        let position = match (r.pos, r.site) {
            (Some(p), None) => Position::Point(p),
            (None, Some(s)) => Position::Site(s),
            _ => return Err("point needs exactly one of `pos` or `site`".into()),
        };
        Ok(MarkedPoint {
            position,
            base: r.base,
            opt: r.opt,
        })
    }
}

impl From<MarkedPoint> for MarkedPointRepr {
    fn from(p: MarkedPoint) -> Self {
        let (pos, site) = match p.position {
            Position::Point(x) => (Some(x), None),
            Position::Site(s) => (None, Some(s)),
        };
        MarkedPointRepr {
            pos,
            site,
            base: p.base,
            opt: p.opt,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mark_validation() {
        assert!(OptMark::AccessProb(0.0).validate().is_err());
        assert!(OptMark::AccessProb(1.0).validate().is_ok());
        assert!(OptMark::AccessProb(1.5).validate().is_err());
        assert!(OptMark::ItemSet(vec![1, 1]).validate().is_err());
        assert!(OptMark::ItemSet(vec![2, 5]).validate().is_ok());
        assert!(BaseMark::ReceiverOffset(vec![0.6, 0.8]).validate().is_ok());
        assert!(BaseMark::ReceiverOffset(vec![0.6, 0.7]).validate().is_err());
        assert!(BaseMark::WeightPair { plus: -1.0, minus: 0.0 }.validate().is_err());
        assert!(BaseMark::GrainRadius(0.0).validate().is_err());
    }

    #[test]
    fn sign_conflicts() {
        assert!(Sign3::Plus.conflicts(Sign3::Minus));
        assert!(!Sign3::Plus.conflicts(Sign3::Plus));
        assert!(!Sign3::Zero.conflicts(Sign3::Minus));
        assert_eq!(Sign3::Plus.flipped(), Sign3::Minus);
    }

    #[test]
    fn point_json_shape() {
        let p = MarkedPoint::at_site(3, BaseMark::WeightPair { plus: 1.5, minus: 0.25 })
            .with_opt(OptMark::Sign3(Sign3::Plus));
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(
            s,
            r#"{"site":3,"base":{"weight_pair":{"plus":1.5,"minus":0.25}},"opt":{"sign3":"plus"}}"#
        );
        let back: MarkedPoint = serde_json::from_str(&s).unwrap();
        assert_eq!(back, p);
        let bad = r#"{"site":3,"pos":[1.0],"base":"none","opt":"unset"}"#;
        assert!(serde_json::from_str::<MarkedPoint>(bad).is_err());
    }
}
