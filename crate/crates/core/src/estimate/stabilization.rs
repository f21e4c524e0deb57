use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::config::Configuration;
use crate::error::{Error, Result};
use crate::marks::BaseMark;
use crate::sample::RealDist;
use crate::window::{torus_dist, torus_sup_dist, wrap_coord, Window, GEOM_TOL};

fn cube_side(c: &Configuration) -> Result<f64> {
    match c.window {
        Window::PeriodicCube { side, .. } => Ok(side),
        _ => Err(Error::Topology("stabilization radii need a periodic cube".into())),
    }
}

fn grain_of(c: &Configuration, i: usize) -> Result<f64> {
    match c.points[i].base {
        BaseMark::GrainRadius(r) => Ok(r),
        ref b => Err(Error::MarkSpace {
            index: i,
            expected: "grain_radius",
            found: b.kind_name().into(),
        }),
    }
}

/// Smallest `r` such that no grain centred outside `Q_r(X_i)` can overlap
/// grain `i`: twice the largest sup-norm offset of an overlap-capable grain.
pub fn hardcore_stab_radius(c: &Configuration, i: usize) -> Result<f64> {
    let side = cube_side(c)?;
    if i >= c.len() {
        return Err(Error::validation(format!("point index {i} out of range")));
    }
    let r_i = grain_of(c, i)?;
    let mut far: f64 = 0.0;
    for j in 0..c.len() {
        if j == i {
            continue;
        }
        let r_j = grain_of(c, j)?;
        if torus_dist(side, c.coords(i), c.coords(j)) < r_i + r_j - GEOM_TOL {
            far = far.max(torus_sup_dist(side, c.coords(i), c.coords(j)));
        }
    }
    Ok(2.0 * far)
}

/// Smallest candidate `r` for which the terms of points outside `Q_r(X_i)`
/// sum to at most `eps`. `terms` pairs each point's sup-norm offset with its term.
fn tail_radius(mut terms: Vec<(f64, f64)>, eps: f64) -> f64 {
    terms.sort_by(|a, b| b.0.total_cmp(&a.0));
    // walking inward, the tail holds every point strictly farther than the candidate
    let mut tail = 0.0;
    let mut k = 0;
    while k < terms.len() {
        let offset = terms[k].0;
        let mut group = 0.0;
        while k < terms.len() && terms[k].0 == offset {
            group += terms[k].1;
            k += 1;
        }
        if tail + group > eps {
            return 2.0 * offset;
        }
        tail += group;
    }
    0.0
}

fn interference_term(dist: f64, beta: f64) -> f64 {
    -(-1.0 / (1.0 + dist.powf(beta))).ln_1p()
}

/// Internal and external `ε`-stabilization radii of an Aloha point, taking
/// every access probability at its worst case of 1.
///
/// Internal: interference at the receiver of `i` from transmitters outside
/// `Q_r(X_i)`. External: the effect of transmitter `i` on receivers of points
/// outside `Q_r(X_i)`.
pub fn aloha_stab_radii(c: &Configuration, i: usize, eps: f64, beta: f64) -> Result<(f64, f64)> {
    if !(eps > 0.0) {
        return Err(Error::validation(format!("epsilon must be positive, got {eps}")));
    }
    let side = cube_side(c)?;
    if i >= c.len() {
        return Err(Error::validation(format!("point index {i} out of range")));
    }
    let receiver = |j: usize| -> Result<Vec<f64>> {
        match &c.points[j].base {
            BaseMark::ReceiverOffset(y) => Ok(c
                .coords(j)
                .iter()
                .zip(y)
                .map(|(x, dy)| wrap_coord(side, x + dy))
                .collect()),
            b => Err(Error::MarkSpace {
                index: j,
                expected: "receiver_offset",
                found: b.kind_name().into(),
            }),
        }
    };
    let rx_i = receiver(i)?;
    let mut internal = Vec::with_capacity(c.len());
    let mut external = Vec::with_capacity(c.len());
    for j in 0..c.len() {
        if j == i {
            continue;
        }
        let offset = torus_sup_dist(side, c.coords(i), c.coords(j));
        internal.push((offset, interference_term(torus_dist(side, c.coords(j), &rx_i), beta)));
        external.push((offset, interference_term(torus_dist(side, c.coords(i), &receiver(j)?), beta)));
    }
    Ok((tail_radius(internal, eps), tail_radius(external, eps)))
}

/// Radii collected over points and replicates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilizationSample {
    /// Sorted ascending.
    pub radii: Vec<f64>,
    /// Pairs `(order, empirical moment)`.
    pub moments: Vec<(f64, f64)>,
}

impl StabilizationSample {
    /// Moments of orders `1`, `d` and `d·p/(p−1)`.
    pub fn new(mut radii: Vec<f64>, d: usize, p: f64) -> Result<Self> {
        if radii.iter().any(|r| !r.is_finite() || *r < 0.0) {
            return Err(Error::validation("radii must be finite and nonnegative"));
        }
        if !(p > 1.0) {
            return Err(Error::validation("moment exponent p must exceed 1"));
        }
        radii.sort_by(f64::total_cmp);
        let mut s = StabilizationSample {
            radii,
            moments: Vec::new(),
        };
        let d = d as f64;
        s.moments = [1.0, d, d * p / (p - 1.0)]
            .iter()
            .map(|&q| (q, s.moment(q)))
            .collect();
        Ok(s)
    }

    pub fn moment(&self, order: f64) -> f64 {
        if self.radii.is_empty() {
            return 0.0;
        }
        self.radii.iter().map(|r| r.powf(order)).sum::<f64>() / self.radii.len() as f64
    }

    /// Empirical `P(R > r)`.
    pub fn ccdf(&self, r: f64) -> f64 {
        if self.radii.is_empty() {
            return 0.0;
        }
        let above = self.radii.len() - self.radii.partition_point(|&x| x <= r);
        above as f64 / self.radii.len() as f64
    }

    /// `(r, P(R > r))` at every distinct sample value.
    pub fn ccdf_points(&self) -> Vec<(f64, f64)> {
        let mut out: Vec<(f64, f64)> = Vec::new();
        for &r in &self.radii {
            if out.last().is_none_or(|(x, _)| *x != r) {
                out.push((r, self.ccdf(r)));
            }
        }
        out
    }
}

/// `|B_rho \ Q_r|` in dimension 1 or 2.
pub fn ball_minus_cube_volume(d: usize, rho: f64, r: f64) -> f64 {
    let a = r / 2.0;
    match d {
        1 => 2.0 * (rho - a).max(0.0),
        2 => {
            if rho <= a {
                return 0.0;
            }
            // area of the disk inside the square by symmetric integration over x
            let h = rho.min(a);
            let f = |x: f64| (rho * rho - x * x).max(0.0).sqrt().min(a);
            let n = 2000;
            let step = h / n as f64;
            let mut inside = 0.0;
            for k in 0..n {
                let x0 = k as f64 * step;
                let x1 = x0 + step;
                inside += step / 6.0 * (f(x0) + 4.0 * f(0.5 * (x0 + x1)) + f(x1));
            }
            (PI * rho * rho - 4.0 * inside).max(0.0)
        }
        _ => f64::NAN,
    }
}

/// Mecke-Slivnyak bound `λ·E|B_{ρ₀+ρ₁} \ Q_r|` on `P(R₀ > r)` for a
/// Poisson-Boolean model with iid radii.
pub fn mecke_slivnyak_bound(d: usize, intensity: f64, radius: &RealDist, r: f64) -> Result<f64> {
    if d != 1 && d != 2 {
        return Err(Error::validation(format!("bound implemented for d in {{1, 2}}, got {d}")));
    }
    let e = match *radius {
        RealDist::Constant { value } => ball_minus_cube_volume(d, 2.0 * value, r),
        RealDist::Uniform { lo, hi } => {
            let n = 200;
            let h = (hi - lo) / n as f64;
            let mut acc = 0.0;
            for a in 0..n {
                for b in 0..n {
                    let r0 = lo + (a as f64 + 0.5) * h;
                    let r1 = lo + (b as f64 + 0.5) * h;
                    acc += ball_minus_cube_volume(d, r0 + r1, r);
                }
            }
            acc / (n * n) as f64
        }
    };
    Ok(intensity * e)
}
