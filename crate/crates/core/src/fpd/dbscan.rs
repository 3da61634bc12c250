//! Density-based clustering with an exact grid acceleration.
//!
//! Semantics: a core point has at least `min_pts` neighbors within `eps`,
//! counting itself. Clusters are the connected components of the core points
//! under the eps-neighbor relation; a non-core point within eps of some core
//! attaches to its nearest core (ties to the lowest point index); everything
//! else is noise. The nearest-core border rule makes the labeling independent
//! of input order, unlike first-discoverer attachment.
//!
//! The accelerated path bins points into cells of width eps over the first
//! few dimensions and adds two exact shortcuts: a cell whose point bounding
//! box lies entirely within eps of the query contributes wholesale, and cells
//! with no unfinished points are skipped during expansion. Both preserve the
//! exact predicate `dist2(p, q) <= eps^2`, so labels match
//! [`dbscan_reference`] bit for bit.

use serde::{Deserialize, Serialize};
use std::collections::{HashMap, VecDeque};

use crate::linalg::Mat;

/// Label for points that belong to no cluster.
pub const NOISE: isize = -1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClusterConfig {
    pub eps: f64,
    pub min_pts: usize,
}

impl ClusterConfig {
    pub fn new(eps: f64, min_pts: usize) -> Self {
        assert!(eps > 0.0 && min_pts >= 1);
        ClusterConfig { eps, min_pts }
    }
}

#[inline]
fn dist2(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for (x, y) in a.iter().zip(b) {
        let d = x - y;
        s += d * d;
    }
    s
}

/// Quadratic reference implementation. Kept deliberately independent of the
/// grid machinery; the accelerated version must agree exactly.
pub fn dbscan_reference(points: &Mat, config: &ClusterConfig) -> Vec<isize> {
    let n = points.rows;
    let eps2 = config.eps * config.eps;
    let neighbor_counts: Vec<usize> = (0..n)
        .map(|i| {
            (0..n)
                .filter(|&j| dist2(points.row(i), points.row(j)) <= eps2)
                .count()
        })
        .collect();
    let core: Vec<bool> = neighbor_counts
        .iter()
        .map(|&c| c >= config.min_pts)
        .collect();

    let mut labels = vec![NOISE; n];
    let mut visited = vec![false; n];
    let mut next_cluster = 0isize;
    for seed in 0..n {
        if !core[seed] || visited[seed] {
            continue;
        }
        let id = next_cluster;
        next_cluster += 1;
        let mut queue = VecDeque::new();
        visited[seed] = true;
        labels[seed] = id;
        queue.push_back(seed);
        while let Some(q) = queue.pop_front() {
            for j in 0..n {
                if core[j] && !visited[j] && dist2(points.row(q), points.row(j)) <= eps2 {
                    visited[j] = true;
                    labels[j] = id;
                    queue.push_back(j);
                }
            }
        }
    }
    // border points: nearest core within eps, ties to the lowest core index
    for i in 0..n {
        if core[i] {
            continue;
        }
        let mut best: Option<(f64, usize)> = None;
        for j in 0..n {
            if !core[j] {
                continue;
            }
            let d2 = dist2(points.row(i), points.row(j));
            if d2 <= eps2 {
                let better = match best {
                    None => true,
                    Some((bd, bj)) => d2 < bd || (d2 == bd && j < bj),
                };
                if better {
                    best = Some((d2, j));
                }
            }
        }
        if let Some((_, j)) = best {
            labels[i] = labels[j];
        }
    }
    labels
}

/// Grid dimensions used for binning; beyond this the extra axes stop paying
/// for their 3^d neighbor enumeration.
const MAX_GRID_DIMS: usize = 6;

struct Cell {
    members: Vec<usize>,
    /// Full-dimensional bounding box of the member points.
    bbox_lo: Vec<f64>,
    bbox_hi: Vec<f64>,
    /// Points not yet labeled or marked as border candidates.
    unfinished: usize,
}

struct Grid {
    dim: usize,
    gdim: usize,
    cells: HashMap<Vec<i64>, Cell>,
    keys: Vec<Vec<i64>>,
}

impl Grid {
    fn build(points: &Mat, eps: f64) -> Self {
        let dim = points.cols;
        let gdim = dim.min(MAX_GRID_DIMS);
        let mut origin = vec![f64::INFINITY; gdim];
        for i in 0..points.rows {
            for (g, o) in origin.iter_mut().enumerate() {
                *o = o.min(points.row(i)[g]);
            }
        }
        let mut cells: HashMap<Vec<i64>, Cell> = HashMap::new();
        let mut keys = vec![Vec::new(); points.rows];
        for i in 0..points.rows {
            let p = points.row(i);
            let key: Vec<i64> = (0..gdim)
                .map(|g| ((p[g] - origin[g]) / eps).floor() as i64)
                .collect();
            let cell = cells.entry(key.clone()).or_insert_with(|| Cell {
                members: Vec::new(),
                bbox_lo: vec![f64::INFINITY; dim],
                bbox_hi: vec![f64::NEG_INFINITY; dim],
                unfinished: 0,
            });
            cell.members.push(i);
            cell.unfinished += 1;
            for d in 0..dim {
                cell.bbox_lo[d] = cell.bbox_lo[d].min(p[d]);
                cell.bbox_hi[d] = cell.bbox_hi[d].max(p[d]);
            }
            keys[i] = key;
        }
        Grid {
            dim,
            gdim,
            cells,
            keys,
        }
    }

    /// Upper bound on dist2 from `p` to any point of the cell, computed so
    /// that `bound <= eps2` certifies every member as a neighbor.
    fn bbox_bound2(&self, p: &[f64], cell: &Cell) -> f64 {
        let mut s = 0.0;
        for d in 0..self.dim {
            let a = (p[d] - cell.bbox_lo[d]).abs();
            let b = (p[d] - cell.bbox_hi[d]).abs();
            let m = a.max(b);
            s += m * m;
        }
        s
    }

    /// Visit every cell whose key differs from `key` by at most 1 per axis.
    fn for_each_neighbor_cell(&self, key: &[i64], mut f: impl FnMut(&Vec<i64>, &Cell)) {
        let mut offset = vec![-1i64; self.gdim];
        let mut cand = vec![0i64; self.gdim];
        loop {
            for g in 0..self.gdim {
                cand[g] = key[g] + offset[g];
            }
            if let Some((k, c)) = self.cells.get_key_value(&cand) {
                f(k, c);
            }
            // odometer over {-1, 0, 1}^gdim
            let mut g = 0;
            loop {
                if g == self.gdim {
                    return;
                }
                offset[g] += 1;
                if offset[g] <= 1 {
                    break;
                }
                offset[g] = -1;
                g += 1;
            }
        }
    }
}

/// Accelerated DBSCAN. Input coordinates are expected pre-scaled to the unit
/// hypercube; the algorithm itself works for any coordinates.
pub fn dbscan(points: &Mat, config: &ClusterConfig) -> Vec<isize> {
    let n = points.rows;
    if n == 0 {
        return Vec::new();
    }
    let eps2 = config.eps * config.eps;
    let mut grid = Grid::build(points, config.eps);

    // Core flags: count neighbors with early exit at min_pts; whole cells
    // count via the bbox bound.
    let mut core = vec![false; n];
    for i in 0..n {
        let p = points.row(i);
        let mut count = 0usize;
        let mut done = false;
        grid.for_each_neighbor_cell(&grid.keys[i], |_, cell| {
            if done {
                return;
            }
            if grid.bbox_bound2(p, cell) <= eps2 {
                count += cell.members.len();
            } else {
                for &j in &cell.members {
                    if dist2(p, points.row(j)) <= eps2 {
                        count += 1;
                        if count >= config.min_pts {
                            break;
                        }
                    }
                }
            }
            if count >= config.min_pts {
                done = true;
            }
        });
        core[i] = count >= config.min_pts;
    }

    // Expansion: BFS over cores in index order. Non-core contacts become
    // border candidates resolved afterwards by the nearest-core rule.
    let mut labels = vec![NOISE; n];
    let mut finished = vec![false; n];
    let mut border_candidates: Vec<usize> = Vec::new();
    let mut next_cluster = 0isize;
    let mut queue: VecDeque<usize> = VecDeque::new();

    for seed in 0..n {
        if !core[seed] || finished[seed] {
            continue;
        }
        let id = next_cluster;
        next_cluster += 1;
        finished[seed] = true;
        labels[seed] = id;
        grid.cells.get_mut(&grid.keys[seed]).unwrap().unfinished -= 1;
        queue.push_back(seed);
        while let Some(q) = queue.pop_front() {
            let pq = points.row(q);
            // collect updates first; cells cannot be mutated during iteration
            let mut touched: Vec<usize> = Vec::new();
            grid.for_each_neighbor_cell(&grid.keys[q], |_, cell| {
                if cell.unfinished == 0 {
                    return;
                }
                if grid.bbox_bound2(pq, cell) <= eps2 {
                    for &j in &cell.members {
                        if !finished[j] {
                            touched.push(j);
                        }
                    }
                } else {
                    for &j in &cell.members {
                        if !finished[j] && dist2(pq, points.row(j)) <= eps2 {
                            touched.push(j);
                        }
                    }
                }
            });
            for j in touched {
                if finished[j] {
                    continue;
                }
                finished[j] = true;
                grid.cells.get_mut(&grid.keys[j]).unwrap().unfinished -= 1;
                if core[j] {
                    labels[j] = id;
                    queue.push_back(j);
                } else {
                    border_candidates.push(j);
                }
            }
        }
    }

    // Border resolution: nearest core within eps, ties to lowest core index.
    for i in border_candidates {
        let p = points.row(i);
        let mut best: Option<(f64, usize)> = None;
        grid.for_each_neighbor_cell(&grid.keys[i], |_, cell| {
            for &j in &cell.members {
                if !core[j] {
                    continue;
                }
                let d2 = dist2(p, points.row(j));
                if d2 <= eps2 {
                    let better = match best {
                        None => true,
                        Some((bd, bj)) => d2 < bd || (d2 == bd && j < bj),
                    };
                    if better {
                        best = Some((d2, j));
                    }
                }
            }
        });
        if let Some((_, j)) = best {
            labels[i] = labels[j];
        }
    }
    labels
}
