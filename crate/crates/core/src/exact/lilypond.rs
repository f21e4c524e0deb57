use serde::{Deserialize, Serialize};

use crate::config::Configuration;
use crate::error::{Error, Result};
use crate::marks::OptMark;
use crate::window::{torus_dist, Window};

/// One step of the growth process: `points` stop growing at `time`, `partner`
/// being the ball they touched.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FreezeEvent {
    pub time: f64,
    pub points: Vec<usize>,
    pub partner: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LilypondSolution {
    pub radii: Vec<f64>,
    pub events: Vec<FreezeEvent>,
    /// `max_i |r_i − min_j max(D_ij/2, D_ij − r_j)|`.
    pub residual: f64,
}

impl LilypondSolution {
    pub fn marked(&self, c: &Configuration) -> Configuration {
        let marks: Vec<OptMark> = self.radii.iter().map(|&r| OptMark::Radius(r)).collect();
        c.with_marks(&marks)
    }
}

pub(crate) fn distances(c: &Configuration) -> Result<Vec<Vec<f64>>> {
    let side = match c.window {
        Window::PeriodicCube { side, .. } => side,
        _ => return Err(Error::Topology("lilypond needs a periodic cube".into())),
    };
    if c.len() < 2 {
        return Err(Error::validation("lilypond growth needs at least two points"));
    }
    let n = c.len();
    let mut d = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let v = torus_dist(side, c.coords(i), c.coords(j));
            d[i][j] = v;
            d[j][i] = v;
        }
    }
    Ok(d)
}

fn limit(d: &[Vec<f64>], r: &[f64], frozen: &[bool], i: usize) -> (f64, usize) {
    let mut best = (f64::INFINITY, usize::MAX);
    for j in 0..d.len() {
        if j == i {
            continue;
        }
        let t = if frozen[j] { d[i][j] - r[j] } else { d[i][j] / 2.0 };
        if t < best.0 {
            best = (t, j);
        }
    }
    best
}

/// `|r_i − min_{j≠i} max(D_ij/2, D_ij − r_j)|` for every `i`.
pub fn lilypond_residuals(d: &[Vec<f64>], r: &[f64]) -> Vec<f64> {
    let n = r.len();
    (0..n)
        .map(|i| {
            let u = (0..n)
                .filter(|&j| j != i)
                .map(|j| (d[i][j] / 2.0).max(d[i][j] - r[j]))
                .fold(f64::INFINITY, f64::min);
            (r[i] - u).abs()
        })
        .collect()
}

/// Largest entry of [`lilypond_residuals`].
pub fn lilypond_residual(d: &[Vec<f64>], r: &[f64]) -> f64 {
    lilypond_residuals(d, r).into_iter().fold(0.0, f64::max)
}

/// Event-driven lilypond growth: all balls grow at unit speed from radius
/// zero and each stops when it touches another ball.
pub fn lilypond_solve(c: &Configuration) -> Result<LilypondSolution> {
    let d = distances(c)?;
    let n = c.len();
    let mut r = vec![0.0; n];
    let mut frozen = vec![false; n];
    let mut next: Vec<(f64, usize)> = (0..n).map(|i| limit(&d, &r, &frozen, i)).collect();
    let mut events = Vec::new();
    let mut remaining = n;
    while remaining > 0 {
        let mut i = usize::MAX;
        for k in 0..n {
            if !frozen[k] && (i == usize::MAX || next[k].0 < next[i].0) {
                i = k;
            }
        }
        let (t, j) = next[i];
        let mut points = vec![i];
        r[i] = t;
        frozen[i] = true;
        remaining -= 1;
        if !frozen[j] && d[i][j] / 2.0 == t {
            r[j] = t;
            frozen[j] = true;
            remaining -= 1;
            points.push(j);
        }
        events.push(FreezeEvent {
            time: t,
            points: points.clone(),
            partner: j,
        });
        // limits only rise when a ball freezes; recompute those that used it
        for k in 0..n {
            if !frozen[k] && points.contains(&next[k].1) {
                next[k] = limit(&d, &r, &frozen, k);
            }
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            if d[i][j] < r[i] + r[j] - 1e-9 {
                return Err(Error::assertion(format!("balls {i} and {j} overlap after growth")));
            }
        }
    }
    let residual = lilypond_residual(&d, &r);
    Ok(LilypondSolution {
        radii: r,
        events,
        residual,
    })
}

/// Damped Picard iteration `r ← (r + T r)/2` of the fixed-point equation from
/// `r = 0`. Returns the radii and the number of sweeps.
pub fn lilypond_fixed_point(c: &Configuration, tol: f64, max_sweeps: usize) -> Result<(Vec<f64>, usize)> {
    let d = distances(c)?;
    let n = c.len();
    let mut r = vec![0.0; n];
    let mut next = vec![0.0; n];
    for sweep in 1..=max_sweeps {
        let mut change: f64 = 0.0;
        for i in 0..n {
            let u = (0..n)
                .filter(|&j| j != i)
                .map(|j| (d[i][j] / 2.0).max(d[i][j] - r[j]))
                .fold(f64::INFINITY, f64::min);
            next[i] = 0.5 * (r[i] + u);
            change = change.max((next[i] - r[i]).abs());
        }
        std::mem::swap(&mut r, &mut next);
        if change <= tol {
            return Ok((r, sweep));
        }
    }
    Err(Error::assertion(format!(
        "fixed-point iteration did not settle within {max_sweeps} sweeps"
    )))
}
