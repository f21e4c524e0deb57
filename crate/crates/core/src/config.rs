//! Finite marked configurations and their JSON representation.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::marks::{MarkedPoint, OptMark, Position};
use crate::window::Window;

/// A finite set of marked points on a window.
///
/// On lines and trees point `i` sits at site `i`, so point indices and site ids
/// coincide.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Configuration {
    pub window: Window,
    pub model_id: String,
    pub points: Vec<MarkedPoint>,
}

impl Configuration {
    pub fn new(window: Window, model_id: impl Into<String>, points: Vec<MarkedPoint>) -> Result<Self> {
        let c = Configuration {
            window,
            model_id: model_id.into(),
            points,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        self.window.validate()?;
        match self.window {
            Window::PeriodicCube { d, side } => {
                let mut seen = HashSet::with_capacity(self.points.len());
                for (i, p) in self.points.iter().enumerate() {
                    let x = match &p.position {
                        Position::Point(x) => x,
                        Position::Site(_) => {
                            return Err(Error::validation(format!(
                                "point {i} has a site id on a periodic cube"
                            )))
                        }
                    };
                    if x.len() != d {
                        return Err(Error::validation(format!(
                            "point {i} has dimension {}, window has {d}",
                            x.len()
                        )));
                    }
                    if x.iter().any(|&v| !(v.is_finite() && (0.0..side).contains(&v))) {
                        return Err(Error::validation(format!(
                            "point {i} lies outside [0, {side})^{d}"
                        )));
                    }
                    let key: Vec<u64> = x.iter().map(|v| v.to_bits()).collect();
                    if !seen.insert(key) {
                        return Err(Error::validation(format!(
                            "point {i} duplicates an earlier position"
                        )));
                    }
                }
            }
            Window::IntegerLine { .. } | Window::TreeBall { .. } => {
                let n = self.window.site_count().unwrap();
                if self.points.len() != n {
                    return Err(Error::validation(format!(
                        "{} window has {n} sites but {} points",
                        self.window.kind_name(),
                        self.points.len()
                    )));
                }
                for (i, p) in self.points.iter().enumerate() {
                    if p.position != Position::Site(i) {
                        return Err(Error::validation(format!(
                            "point {i} must sit at site {i}"
                        )));
                    }
                }
            }
        }
        for p in &self.points {
            p.base.validate()?;
            p.opt.validate()?;
        }
        Ok(())
    }

    pub fn marks(&self) -> Vec<OptMark> {
        self.points.iter().map(|p| p.opt.clone()).collect()
    }

    /// Copy of the configuration with the given optimization marks.
    pub fn with_marks(&self, marks: &[OptMark]) -> Configuration {
        assert_eq!(marks.len(), self.points.len(), "one mark per point");
        let mut out = self.clone();
        for (p, m) in out.points.iter_mut().zip(marks) {
            p.opt = m.clone();
        }
        out
    }

    pub fn coords(&self, i: usize) -> &[f64] {
        self.points[i].coords()
    }

    /// Sites `lo..=hi` of a line configuration as a new line.
    pub fn sub_line(&self, lo: usize, hi: usize) -> Result<Configuration> {
        match self.window {
            Window::IntegerLine { n } if lo <= hi && hi < n => {
                let points = self.points[lo..=hi]
                    .iter()
                    .enumerate()
                    .map(|(k, p)| MarkedPoint {
                        position: Position::Site(k),
                        base: p.base.clone(),
                        opt: p.opt.clone(),
                    })
                    .collect();
                Ok(Configuration {
                    window: Window::IntegerLine { n: hi - lo + 1 },
                    model_id: self.model_id.clone(),
                    points,
                })
            }
            Window::IntegerLine { n } => Err(Error::validation(format!(
                "sub-line {lo}..={hi} outside 0..{n}"
            ))),
            _ => Err(Error::Topology("sub_line needs an integer line".into())),
        }
    }
}

/// Pretty JSON document; floats use shortest round-trip form, so parsing the
/// output restores every value bit for bit.
pub fn serialize_configuration(c: &Configuration) -> String {
    serde_json::to_string_pretty(c).expect("configuration is always serializable")
}

pub fn deserialize_configuration(text: &str) -> Result<Configuration> {
    let c: Configuration = serde_json::from_str(text)?;
    c.validate()?;
    Ok(c)
}
