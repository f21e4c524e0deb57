//! Observation windows: periodic cubes, finite integer lines and balls of the
//! 3-regular tree.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance for geometric comparisons.
pub const GEOM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Window {
    /// The torus `[0, L)^d`.
    PeriodicCube {
        d: usize,
        #[serde(rename = "L")]
        side: f64,
    },
    /// Sites `0..n` with nearest-neighbour adjacency and free ends.
    IntegerLine { n: usize },
    /// Ball of radius `depth` around a distinguished root of the 3-regular tree.
    TreeBall { depth: usize },
}

impl Window {
    pub fn periodic_cube(d: usize, side: f64) -> Result<Self> {
        let w = Window::PeriodicCube { d, side };
        w.validate()?;
        Ok(w)
    }

    pub fn integer_line(n: usize) -> Result<Self> {
        let w = Window::IntegerLine { n };
        w.validate()?;
        Ok(w)
    }

    pub fn tree_ball(depth: usize) -> Self {
        Window::TreeBall { depth }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Window::PeriodicCube { d, side } => {
                if d == 0 {
                    return Err(Error::validation("periodic cube needs dimension d >= 1"));
                }
                if !(side.is_finite() && side > 0.0) {
                    return Err(Error::validation(format!(
                        "periodic cube needs a positive finite side, got {side}"
                    )));
                }
            }
            Window::IntegerLine { n } => {
                if n == 0 {
                    return Err(Error::validation("integer line needs at least one site"));
                }
            }
            Window::TreeBall { .. } => {}
        }
        Ok(())
    }

    /// Lebesgue volume for cubes; number of sites for lines and trees.
    pub fn volume(&self) -> f64 {
        match *self {
            Window::PeriodicCube { d, side } => side.powi(d as i32),
            Window::IntegerLine { n } => n as f64,
            Window::TreeBall { depth } => tree_vertex_count(depth) as f64,
        }
    }

    /// Number of sites for the discrete topologies.
    pub fn site_count(&self) -> Option<usize> {
        match *self {
            Window::PeriodicCube { .. } => None,
            Window::IntegerLine { n } => Some(n),
            Window::TreeBall { depth } => Some(tree_vertex_count(depth)),
        }
    }

    pub fn dimension(&self) -> usize {
        match *self {
            Window::PeriodicCube { d, .. } => d,
            Window::IntegerLine { .. } => 1,
            Window::TreeBall { .. } => 0,
        }
    }

    pub fn side(&self) -> Option<f64> {
        match *self {
            Window::PeriodicCube { side, .. } => Some(side),
            _ => None,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Window::PeriodicCube { .. } => "periodic_cube",
            Window::IntegerLine { .. } => "integer_line",
            Window::TreeBall { .. } => "tree_ball",
        }
    }

    /// Graph neighbours of a site on the line or the tree.
    pub fn site_neighbors(&self, v: usize) -> Vec<usize> {
        match *self {
            Window::IntegerLine { n } => {
                let mut out = Vec::with_capacity(2);
                if v > 0 {
                    out.push(v - 1);
                }
                if v + 1 < n {
                    out.push(v + 1);
                }
                out
            }
            Window::TreeBall { depth } => tree_neighbors(depth, v),
            Window::PeriodicCube { .. } => Vec::new(),
        }
    }
}

/// Coordinate-wise wrapped difference `y - x` with components in `[-L/2, L/2)`.
#[inline]
pub fn wrapped_delta(side: f64, x: f64, y: f64) -> f64 {
    let mut t = (y - x) % side;
    if t < -side / 2.0 {
        t += side;
    } else if t >= side / 2.0 {
        t -= side;
    }
    t
}

/// Torus distance without topology checks. Slices must have equal length.
#[inline]
pub fn torus_dist(side: f64, x: &[f64], y: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(&a, &b)| {
            let t = wrapped_delta(side, a, b);
            t * t
        })
        .sum::<f64>()
        .sqrt()
}

/// Sup-norm of the wrapped difference, i.e. the half side of the smallest
/// centred cube containing `y` when centred at `x`.
#[inline]
pub fn torus_sup_dist(side: f64, x: &[f64], y: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(&a, &b)| wrapped_delta(side, a, b).abs())
        .fold(0.0, f64::max)
}

/// Euclidean norm of the coordinate-wise wrapped difference on a periodic cube.
pub fn torus_distance(w: &Window, x: &[f64], y: &[f64]) -> Result<f64> {
    match *w {
        Window::PeriodicCube { d, side } => {
            if x.len() != d || y.len() != d {
                return Err(Error::validation(format!(
                    "points must have dimension {d}, got {} and {}",
                    x.len(),
                    y.len()
                )));
            }
            Ok(torus_dist(side, x, y))
        }
        _ => Err(Error::Topology(format!(
            "torus distance needs a periodic cube, window is {}",
            w.kind_name()
        ))),
    }
}

/// Wraps a coordinate into `[0, L)`.
#[inline]
pub fn wrap_coord(side: f64, x: f64) -> f64 {
    let t = x.rem_euclid(side);
    // rem_euclid can round up to `side` for tiny negative inputs
    if t >= side {
        0.0
    } else {
        t
    }
}

// Tree ball indexing: breadth-first, root 0, level l >= 1 holds 3 * 2^(l-1)
// vertices starting at 1 + 3 * (2^(l-1) - 1).

pub fn tree_vertex_count(depth: usize) -> usize {
    if depth == 0 {
        1
    } else {
        1 + 3 * ((1usize << depth) - 1)
    }
}

fn level_start(level: usize) -> usize {
    if level == 0 {
        0
    } else {
        1 + 3 * ((1usize << (level - 1)) - 1)
    }
}

/// Distance of vertex `v` from the root.
pub fn tree_level(v: usize) -> usize {
    if v == 0 {
        return 0;
    }
    let mut level = 1;
    while level_start(level + 1) <= v {
        level += 1;
    }
    level
}

pub fn tree_parent(v: usize) -> Option<usize> {
    match tree_level(v) {
        0 => None,
        1 => Some(0),
        l => Some(level_start(l - 1) + (v - level_start(l)) / 2),
    }
}

pub fn tree_children(depth: usize, v: usize) -> Vec<usize> {
    let l = tree_level(v);
    if l >= depth {
        return Vec::new();
    }
    if l == 0 {
        return vec![1, 2, 3];
    }
    let first = level_start(l + 1) + 2 * (v - level_start(l));
    vec![first, first + 1]
}

pub fn tree_neighbors(depth: usize, v: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(3);
    if let Some(p) = tree_parent(v) {
        out.push(p);
    }
    out.extend(tree_children(depth, v));
    out
}

/// Graph distance between two tree vertices.
pub fn tree_distance(mut a: usize, mut b: usize) -> usize {
    let mut la = tree_level(a);
    let mut lb = tree_level(b);
    let mut dist = 0;
    while la > lb {
        a = tree_parent(a).unwrap();
        la -= 1;
        dist += 1;
    }
    while lb > la {
        b = tree_parent(b).unwrap();
        lb -= 1;
        dist += 1;
    }
    while a != b {
        a = tree_parent(a).unwrap();
        b = tree_parent(b).unwrap();
        dist += 2;
    }
    dist
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn window_construction() {
        let w = Window::periodic_cube(1, 10.0).unwrap();
        assert_eq!(w.volume(), 10.0);
        assert!(Window::periodic_cube(0, 5.0).is_err());
        assert!(Window::periodic_cube(2, 0.0).is_err());
        assert!(Window::periodic_cube(2, -1.0).is_err());
        assert!(Window::integer_line(0).is_err());
        assert_eq!(Window::tree_ball(2).site_count(), Some(10));
        assert_eq!(Window::periodic_cube(3, 2.5).unwrap().volume(), 2.5f64.powi(3));
    }

    #[test]
    fn tree_counts_match_closed_form() {
        for depth in 0..=10 {
            let expected = if depth == 0 { 1 } else { 1 + 3 * ((1 << depth) - 1) };
            assert_eq!(tree_vertex_count(depth), expected);
            // neighbour relation is symmetric and the root has degree 3
            let n = tree_vertex_count(depth);
            let mut edges = 0;
            for v in 0..n {
                for u in tree_neighbors(depth, v) {
                    assert!(u < n);
                    assert!(tree_neighbors(depth, u).contains(&v));
                    edges += 1;
                }
                if tree_level(v) < depth {
                    assert_eq!(tree_neighbors(depth, v).len(), 3);
                }
            }
            assert_eq!(edges, 2 * (n - 1));
        }
        assert_eq!(tree_vertex_count(1), 4);
    }

    #[test]
    fn torus_distance_examples() {
        let w1 = Window::periodic_cube(1, 10.0).unwrap();
        assert_eq!(torus_distance(&w1, &[1.0], &[9.0]).unwrap(), 2.0);
        assert_eq!(torus_distance(&w1, &[3.3], &[3.3]).unwrap(), 0.0);
        let w2 = Window::periodic_cube(2, 10.0).unwrap();
        let d = torus_distance(&w2, &[0.0, 0.0], &[9.0, 9.0]).unwrap();
        assert!((d - 2f64.sqrt()).abs() < 1e-12);
        let line = Window::integer_line(4).unwrap();
        assert!(matches!(torus_distance(&line, &[0.0], &[1.0]), Err(Error::Topology(_))));
    }

    #[test]
    fn tree_distance_paths() {
        assert_eq!(tree_distance(0, 0), 0);
        assert_eq!(tree_distance(0, 1), 1);
        assert_eq!(tree_distance(1, 2), 2);
        let leaf = tree_children(3, tree_children(3, 1)[0])[1];
        assert_eq!(tree_level(leaf), 3);
        assert_eq!(tree_distance(leaf, 3), 4);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]
        #[test]
        fn torus_metric_axioms(
            x in proptest::collection::vec(0.0f64..7.0, 2),
            y in proptest::collection::vec(0.0f64..7.0, 2),
            z in proptest::collection::vec(0.0f64..7.0, 2),
        ) {
            let side = 7.0;
            let dxy = torus_dist(side, &x, &y);
            let dyx = torus_dist(side, &y, &x);
            prop_assert!((dxy - dyx).abs() <= 1e-12);
            prop_assert_eq!(torus_dist(side, &x, &x), 0.0);
            prop_assert!(dxy <= side * 2f64.sqrt() / 2.0 + 1e-12);
            let dxz = torus_dist(side, &x, &z);
            let dzy = torus_dist(side, &z, &y);
            prop_assert!(dxy <= dxz + dzy + 1e-12);
        }
    }
}
