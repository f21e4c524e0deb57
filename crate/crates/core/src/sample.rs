//! Random generation of base configurations.

use rand::Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::config::Configuration;
use crate::error::{Error, Result};
use crate::marks::{BaseMark, Color, MarkedPoint};
use crate::rng::RngSeed;
use crate::window::{tree_vertex_count, Window};

/// A real-valued distribution for base marks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RealDist {
    Constant { value: f64 },
    Uniform { lo: f64, hi: f64 },
}

impl RealDist {
    pub fn uniform(lo: f64, hi: f64) -> Self {
        RealDist::Uniform { lo, hi }
    }

    pub fn constant(value: f64) -> Self {
        RealDist::Constant { value }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            RealDist::Constant { value } => value,
            RealDist::Uniform { lo, hi } => lo + (hi - lo) * rng.random::<f64>(),
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            RealDist::Constant { value } => value,
            RealDist::Uniform { lo, hi } => 0.5 * (lo + hi),
        }
    }

    pub fn bounds(&self) -> (f64, f64) {
        match *self {
            RealDist::Constant { value } => (value, value),
            RealDist::Uniform { lo, hi } => (lo, hi),
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            RealDist::Constant { value } if !value.is_finite() => {
                Err(Error::validation("constant distribution must be finite"))
            }
            RealDist::Uniform { lo, hi } if !(lo.is_finite() && hi.is_finite() && lo <= hi) => {
                Err(Error::validation(format!("invalid uniform range [{lo}, {hi}]")))
            }
            _ => Ok(()),
        }
    }
}

/// How base marks are drawn, independently across points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BaseSampler {
    GrainRadius { radius: RealDist },
    /// Fair coin between blue and red.
    Color,
    WeightPair { plus: RealDist, minus: RealDist },
    /// Uniform direction on the unit sphere.
    ReceiverOffset,
    None,
}

impl BaseSampler {
    pub fn validate(&self) -> Result<()> {
        match self {
            BaseSampler::GrainRadius { radius } => {
                radius.validate()?;
                if radius.bounds().0 <= 0.0 {
                    return Err(Error::validation("grain radii must be positive"));
                }
                Ok(())
            }
            BaseSampler::WeightPair { plus, minus } => {
                plus.validate()?;
                minus.validate()?;
                if plus.bounds().0 < 0.0 || minus.bounds().0 < 0.0 {
                    return Err(Error::validation("weights must be nonnegative"));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, d: usize) -> BaseMark {
        match self {
            BaseSampler::GrainRadius { radius } => BaseMark::GrainRadius(radius.sample(rng)),
            BaseSampler::Color => BaseMark::Color(if rng.random::<bool>() {
                Color::Blue
            } else {
                Color::Red
            }),
            BaseSampler::WeightPair { plus, minus } => BaseMark::WeightPair {
                plus: plus.sample(rng),
                minus: minus.sample(rng),
            },
            BaseSampler::ReceiverOffset => BaseMark::ReceiverOffset(unit_vector(rng, d)),
            BaseSampler::None => BaseMark::None,
        }
    }
}

/// Uniform point on the unit sphere in `ℝ^d`, normalized to unit norm.
pub fn unit_vector<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-6 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

fn uniform_position<R: Rng + ?Sized>(rng: &mut R, d: usize, side: f64) -> Vec<f64> {
    (0..d)
        .map(|_| {
            let x = side * rng.random::<f64>();
            if x >= side {
                0.0
            } else {
                x
            }
        })
        .collect()
}

/// Independently marked homogeneous Poisson process on a periodic cube.
pub fn sample_poisson_configuration(
    window: &Window,
    intensity: f64,
    base: &BaseSampler,
    seed: RngSeed,
    model_id: &str,
) -> Result<Configuration> {
    let (d, side) = match *window {
        Window::PeriodicCube { d, side } => (d, side),
        _ => return Err(Error::Topology("Poisson sampling needs a periodic cube".into())),
    };
    if !(intensity.is_finite() && intensity > 0.0) {
        return Err(Error::validation(format!("intensity must be positive, got {intensity}")));
    }
    base.validate()?;
    let mut rng = seed.rng();
    let mean = intensity * window.volume();
    let count = Poisson::new(mean)
        .map_err(|e| Error::validation(format!("poisson mean {mean}: {e}")))?
        .sample(&mut rng) as usize;
    let points = (0..count)
        .map(|_| {
            let x = uniform_position(&mut rng, d, side);
            MarkedPoint::at(x, base.sample(&mut rng, d))
        })
        .collect();
    Configuration::new(window.clone(), model_id, points)
}

/// Exactly `per_color` blue and `per_color` red points, uniform on the cube.
pub fn sample_balanced_colored(
    window: &Window,
    per_color: usize,
    seed: RngSeed,
    model_id: &str,
) -> Result<Configuration> {
    let (d, side) = match *window {
        Window::PeriodicCube { d, side } => (d, side),
        _ => return Err(Error::Topology("colored sampling needs a periodic cube".into())),
    };
    let mut rng = seed.rng();
    let points = (0..2 * per_color)
        .map(|k| {
            let color = if k < per_color { Color::Blue } else { Color::Red };
            MarkedPoint::at(uniform_position(&mut rng, d, side), BaseMark::Color(color))
        })
        .collect();
    Configuration::new(window.clone(), model_id, points)
}

/// Sites `0..n` of the integer line with iid base marks.
pub fn sample_wr_line(n: usize, base: &BaseSampler, seed: RngSeed, model_id: &str) -> Result<Configuration> {
    let window = Window::integer_line(n)?;
    base.validate()?;
    let mut rng = seed.rng();
    let points = (0..n)
        .map(|i| MarkedPoint::at_site(i, base.sample(&mut rng, 1)))
        .collect();
    Configuration::new(window, model_id, points)
}

/// Ball of the 3-regular tree with iid base marks, breadth-first indexed.
pub fn build_tree_ball(depth: usize, base: &BaseSampler, seed: RngSeed, model_id: &str) -> Result<Configuration> {
    base.validate()?;
    let mut rng = seed.rng();
    let points = (0..tree_vertex_count(depth))
        .map(|v| MarkedPoint::at_site(v, base.sample(&mut rng, 1)))
        .collect();
    Configuration::new(Window::tree_ball(depth), model_id, points)
}

/// Law of the base configuration of an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PointProcess {
    Poisson { intensity: f64, base: BaseSampler },
    /// Equal numbers of blue and red uniform points.
    BalancedColored { per_color: usize },
    /// One point per site of the window's line or tree.
    Lattice { base: BaseSampler },
}

impl PointProcess {
    pub fn validate(&self, window: &Window) -> Result<()> {
        window.validate()?;
        match (self, window) {
            (PointProcess::Poisson { intensity, base }, Window::PeriodicCube { .. }) => {
                if !(intensity.is_finite() && *intensity > 0.0) {
                    return Err(Error::validation(format!("intensity must be positive, got {intensity}")));
                }
                base.validate()
            }
            (PointProcess::BalancedColored { .. }, Window::PeriodicCube { .. }) => Ok(()),
            (PointProcess::Lattice { base }, Window::IntegerLine { .. } | Window::TreeBall { .. }) => base.validate(),
            (p, w) => Err(Error::Topology(format!(
                "process {} does not fit a {} window",
                p.kind_name(),
                w.kind_name()
            ))),
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            PointProcess::Poisson { .. } => "poisson",
            PointProcess::BalancedColored { .. } => "balanced_colored",
            PointProcess::Lattice { .. } => "lattice",
        }
    }

    /// Expected number of points per unit volume.
    pub fn intensity(&self, window: &Window) -> f64 {
        match self {
            PointProcess::Poisson { intensity, .. } => *intensity,
            PointProcess::BalancedColored { per_color } => 2.0 * *per_color as f64 / window.volume(),
            PointProcess::Lattice { .. } => 1.0,
        }
    }

    pub fn sample(&self, window: &Window, seed: RngSeed, model_id: &str) -> Result<Configuration> {
        self.validate(window)?;
        match (self, window) {
            (PointProcess::Poisson { intensity, base }, _) => {
                sample_poisson_configuration(window, *intensity, base, seed, model_id)
            }
            (PointProcess::BalancedColored { per_color }, _) => {
                sample_balanced_colored(window, *per_color, seed, model_id)
            }
            (PointProcess::Lattice { base }, Window::IntegerLine { n }) => sample_wr_line(*n, base, seed, model_id),
            (PointProcess::Lattice { base }, Window::TreeBall { depth }) => {
                build_tree_ball(*depth, base, seed, model_id)
            }
            _ => unreachable!("validated above"),
        }
    }
}
