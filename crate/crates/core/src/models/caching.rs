use super::{items_mark, Scorer};
use crate::config::Configuration;
use crate::error::{Error, Result};
use crate::marks::{BaseMark, OptMark};
use crate::score::ExtendedScore;
use crate::window::{torus_dist, wrapped_delta, Window};

pub(super) fn score(s: &Scorer, marks: &[OptMark], i: usize) -> Result<ExtendedScore> {
    let own = items_mark(marks, i)?;
    let p = s.popularity_vec();
    let mut holders: Vec<Vec<usize>> = vec![Vec::new(); own.len()];
    let mut err = None;
    s.for_each_dep(i, |j| {
        if err.is_some() {
            return;
        }
        match items_mark(marks, j) {
            Ok(theirs) => {
                for (slot, k) in own.iter().enumerate() {
                    if theirs.binary_search(k).is_ok() {
                        holders[slot].push(j);
                    }
                }
            }
            Err(e) => err = Some(e),
        }
    });
    if let Some(e) = err {
        return Err(e);
    }
    let mut total = 0.0;
    for (slot, &k) in own.iter().enumerate() {
        let pk = p[k as usize - 1];
        if pk == 0.0 {
            continue;
        }
        let integral = match s.config().window.dimension() {
            1 => shared_length_1d(s, i, &holders[slot]),
            _ => shared_area_2d(s, i, &holders[slot]),
        };
        total += pk * integral;
    }
    Ok(ExtendedScore::Finite(total))
}

/// `∫_{ball_i} 1/n(y) dy` on the circle, where `n` counts `i` plus the
/// `others` covering `y`. Exact: the integrand is piecewise constant.
fn shared_length_1d(s: &Scorer, i: usize, others: &[usize]) -> f64 {
    let side = s.config().window.side().unwrap();
    let a = s.grain(i).min(side / 2.0);
    let x_i = s.config().coords(i)[0];
    let mut events: Vec<(f64, i32)> = Vec::new();
    for &j in others {
        let b = s.grain(j);
        if 2.0 * b >= side {
            events.push((-a, 1));
            events.push((a, -1));
            continue;
        }
        let delta = wrapped_delta(side, x_i, s.config().coords(j)[0]);
        for shift in [-side, 0.0, side] {
            let lo = (delta + shift - b).max(-a);
            let hi = (delta + shift + b).min(a);
            if lo < hi {
                events.push((lo, 1));
                events.push((hi, -1));
            }
        }
    }
    if events.is_empty() {
        return 2.0 * a;
    }
    events.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
    let mut total = 0.0;
    let mut count = 0i32;
    let mut prev = -a;
    for (t, step) in events {
        if t > prev {
            total += (t - prev) / (1 + count) as f64;
            prev = t;
        }
        count += step;
    }
    total + (a - prev) / (1 + count) as f64
}

/// Midpoint quadrature of `∫_{ball_i} 1/n(y) dy` on a square grid.
fn shared_area_2d(s: &Scorer, i: usize, others: &[usize]) -> f64 {
    let c = s.config();
    let side = c.window.side().unwrap();
    let r = s.grain(i);
    let a = r.min(side / 2.0);
    let cells = ((2.0 * a / s.grid_step()).ceil() as usize).max(1);
    let h = 2.0 * a / cells as f64;
    let x = c.coords(i);
    let mut total = 0.0;
    for u in 0..cells {
        let dx = -a + (u as f64 + 0.5) * h;
        for v in 0..cells {
            let dy = -a + (v as f64 + 0.5) * h;
            if dx * dx + dy * dy > r * r {
                continue;
            }
            let y = [x[0] + dx, x[1] + dy];
            let n = 1 + others
                .iter()
                .filter(|&&j| torus_dist(side, &y, c.coords(j)) <= s.grain(j))
                .count();
            total += h * h / n as f64;
        }
    }
    total
}

/// Number of caches whose grain covers `y` and which store item `k`.
pub fn caching_coverage_count(c: &Configuration, y: &[f64], k: u32) -> Result<usize> {
    let side = match c.window {
        Window::PeriodicCube { side, .. } => side,
        _ => return Err(Error::Topology("caching needs a periodic cube".into())),
    };
    let mut count = 0;
    for (i, p) in c.points.iter().enumerate() {
        let r = match p.base {
            BaseMark::GrainRadius(r) => r,
            _ => {
                return Err(Error::MarkSpace {
                    index: i,
                    expected: "grain_radius",
                    found: p.base.kind_name().into(),
                })
            }
        };
        let stores = match &p.opt {
            OptMark::ItemSet(v) => v.binary_search(&k).is_ok(),
            OptMark::Unset => return Err(Error::UnsetMark(i)),
            m => {
                return Err(Error::MarkSpace {
                    index: i,
                    expected: "item_set",
                    found: m.kind_name().into(),
                })
            }
        };
        if stores && torus_dist(side, y, p.coords()) <= r {
            count += 1;
        }
    }
    Ok(count)
}
