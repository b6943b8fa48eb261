//! Directed shortest paths on a 16-neighbor grid graph. Every grid path is a
//! polyline, so the result bounds `d_F` from above.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::metric::{ManifoldPatch, Variant};
use crate::quadrature::GL4;

const OFFSETS: [(i64, i64); 16] = [
    (1, 0),
    (-1, 0),
    (0, 1),
    (0, -1),
    (1, 1),
    (1, -1),
    (-1, 1),
    (-1, -1),
    (1, 2),
    (2, 1),
    (-1, 2),
    (-2, 1),
    (1, -2),
    (2, -1),
    (-1, -2),
    (-2, -1),
];

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub value: f64,
    /// Grid nodes the endpoints were snapped to.
    pub from: Vec<f64>,
    pub to: Vec<f64>,
    /// Either endpoint moved by more than `1e-12` when snapped.
    pub snapped: bool,
    pub path: Vec<Vec<f64>>,
}

#[derive(PartialEq)]
struct Entry(f64, usize);

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then(other.1.cmp(&self.1))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// `grid_per_axis` counts cells, so each axis carries `grid_per_axis + 1`
/// nodes. Edge weights integrate `F` along the edge with 4-point
/// Gauss–Legendre; the midpoint rule underestimates convex integrands
/// enough to break the upper bound.
pub fn distance_oracle_grid(patch: &ManifoldPatch, x: &[f64], y: &[f64], grid_per_axis: usize) -> Result<OracleResult> {
    if patch.dim() != 2 {
        return Err(Error::Invalid(format!("the grid oracle is two-dimensional, patch has dimension {}", patch.dim())));
    }
    if grid_per_axis < 16 {
        return Err(Error::Invalid(format!("grid_per_axis must be at least 16, got {grid_per_axis}")));
    }
    for p in [x, y] {
        if p.len() != 2 {
            return Err(Error::Dimension { expected: 2, got: p.len() });
        }
        if !patch.contains(p) {
            return Err(Error::OutsideDomain { x: p.to_vec() });
        }
    }
    let cells = grid_per_axis as i64;
    let side = grid_per_axis + 1;
    let dom = patch.domain();
    let spacing = [(dom[0][1] - dom[0][0]) / cells as f64, (dom[1][1] - dom[1][0]) / cells as f64];
    let coord = |i: i64, axis: usize| dom[axis][0] + i as f64 * spacing[axis];
    let snap = |p: &[f64]| -> (i64, i64) {
        let s = |axis: usize| (((p[axis] - dom[axis][0]) / spacing[axis]).round() as i64).clamp(0, cells);
        (s(0), s(1))
    };
    let (src, dst) = (snap(x), snap(y));
    let index = |(i, j): (i64, i64)| i as usize * side + j as usize;
    let point = |(i, j): (i64, i64)| vec![coord(i, 0), coord(j, 1)];
    let moved = |p: &[f64], q: &[f64]| p.iter().zip(q).any(|(a, b)| (a - b).abs() > 1e-12);

    let mut dist = vec![f64::INFINITY; side * side];
    let mut prev = vec![usize::MAX; side * side];
    let mut heap = BinaryHeap::new();
    dist[index(src)] = 0.0;
    heap.push(Entry(0.0, index(src)));
    let target = index(dst);
    while let Some(Entry(d, u)) = heap.pop() {
        if u == target {
            break;
        }
        if d > dist[u] {
            continue;
        }
        let (i, j) = ((u / side) as i64, (u % side) as i64);
        for (di, dj) in OFFSETS {
            let (ni, nj) = (i + di, j + dj);
            if ni < 0 || nj < 0 || ni > cells || nj > cells {
                continue;
            }
            let disp = [di as f64 * spacing[0], dj as f64 * spacing[1]];
            let mut w = 0.0;
            for (tau, weight) in GL4 {
                let q = [coord(i, 0) + tau * disp[0], coord(j, 1) + tau * disp[1]];
                w += weight * patch.field_values(&q)?.finsler(&disp, Variant::Forward);
            }
            let v = index((ni, nj));
            if d + w < dist[v] {
                dist[v] = d + w;
                prev[v] = u;
                heap.push(Entry(d + w, v));
            }
        }
    }
    let mut path = vec![point(dst)];
    let mut at = target;
    while prev[at] != usize::MAX {
        at = prev[at];
        path.push(point(((at / side) as i64, (at % side) as i64)));
    }
    path.reverse();
    let (from, to) = (point(src), point(dst));
    Ok(OracleResult { value: dist[target], snapped: moved(&from, x) || moved(&to, y), from, to, path })
}
