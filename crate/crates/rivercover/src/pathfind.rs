//! Grid shortest paths through free space, with string-pulling smoothing.
//!
//! Used for the connector passes between meander segments and for the
//! deadhead transits of the baseline planners.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::geometry::{Point, Polyline};
use crate::river_map::RiverMap;
use crate::{Error, Result};

#[derive(PartialEq)]
struct Node {
    cost: f64,
    idx: usize,
}

impl Eq for Node {}

impl Ord for Node {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .cost
            .partial_cmp(&self.cost)
            .unwrap_or(Ordering::Equal)
            .then_with(|| other.idx.cmp(&self.idx))
    }
}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Nearest free cell to a metric point, searched over the whole grid if the
/// local window fails.
pub fn nearest_free_cell(map: &RiverMap, p: Point) -> Option<(usize, usize)> {
    let (cx, cy) = map.cell_of(p);
    for radius in 0..map.grid_width().max(map.grid_height()) as i64 {
        let mut best: Option<((usize, usize), f64)> = None;
        for dy in -radius..=radius {
            for dx in -radius..=radius {
                if dx.abs() != radius && dy.abs() != radius {
                    continue;
                }
                if map.is_free(cx + dx, cy + dy) {
                    let cell = ((cx + dx) as usize, (cy + dy) as usize);
                    let d = p.distance(map.cell_center(cell.0, cell.1));
                    if best.is_none_or(|(_, bd)| d < bd) {
                        best = Some((cell, d));
                    }
                }
            }
        }
        if let Some((cell, _)) = best {
            return Some(cell);
        }
    }
    None
}

/// A* over 8-connected free cells from `from` to `to` (metric points that
/// are snapped to their nearest free cells). Returns a smoothed metric
/// polyline starting at `from` and ending at `to`.
pub fn shortest_free_path(map: &RiverMap, from: Point, to: Point) -> Result<Polyline> {
    let (w, h) = (map.grid_width(), map.grid_height());
    let start = nearest_free_cell(map, from)
        .ok_or_else(|| Error::internal("no free cell near connector start"))?;
    let goal = nearest_free_cell(map, to)
        .ok_or_else(|| Error::internal("no free cell near connector goal"))?;
    let idx = |c: (usize, usize)| c.1 * w + c.0;

    let mut dist = vec![f64::INFINITY; w * h];
    let mut prev = vec![usize::MAX; w * h];
    let mut heap = BinaryHeap::new();
    dist[idx(start)] = 0.0;
    let goal_center = map.cell_center(goal.0, goal.1);
    heap.push(Node {
        cost: map.cell_center(start.0, start.1).distance(goal_center),
        idx: idx(start),
    });
    let res = map.resolution();
    let diag = res * std::f64::consts::SQRT_2;
    while let Some(Node { idx: cur, .. }) = heap.pop() {
        if cur == idx(goal) {
            break;
        }
        let (cx, cy) = ((cur % w) as i64, (cur / w) as i64);
        let base = dist[cur];
        for (dx, dy) in [
            (1i64, 0i64),
            (-1, 0),
            (0, 1),
            (0, -1),
            (1, 1),
            (1, -1),
            (-1, 1),
            (-1, -1),
        ] {
            let (nx, ny) = (cx + dx, cy + dy);
            if !map.is_free(nx, ny) {
                continue;
            }
            // forbid diagonal moves that cut an obstacle corner
            if dx != 0 && dy != 0 && (!map.is_free(cx + dx, cy) || !map.is_free(cx, cy + dy)) {
                continue;
            }
            let step = if dx != 0 && dy != 0 { diag } else { res };
            let ni = (ny as usize) * w + nx as usize;
            let nd = base + step;
            if nd < dist[ni] {
                dist[ni] = nd;
                prev[ni] = cur;
                let hcost = map.cell_center(nx as usize, ny as usize).distance(goal_center);
                heap.push(Node {
                    cost: nd + hcost,
                    idx: ni,
                });
            }
        }
    }
    if dist[idx(goal)].is_infinite() {
        return Err(Error::internal(
            "no free path between points (free region should be connected)",
        ));
    }
    let mut cells = vec![idx(goal)];
    while *cells.last().unwrap() != idx(start) {
        cells.push(prev[*cells.last().unwrap()]);
    }
    cells.reverse();
    let mut pts: Vec<Point> = Vec::with_capacity(cells.len() + 2);
    pts.push(from);
    pts.extend(cells.iter().map(|&i| map.cell_center(i % w, i / w)));
    pts.push(to);
    Ok(string_pull(map, &pts))
}

/// Line-of-sight shortening: keeps the farthest visible vertex at each step.
pub fn string_pull(map: &RiverMap, pts: &[Point]) -> Polyline {
    if pts.len() < 3 {
        return Polyline::new(pts.to_vec());
    }
    let mut out = vec![pts[0]];
    let mut cur = 0usize;
    while cur < pts.len() - 1 {
        let mut next = cur + 1;
        for far in (cur + 2..pts.len()).rev() {
            if map.segment_is_free(pts[cur], pts[far]) {
                next = far;
                break;
            }
        }
        out.push(pts[next]);
        cur = next;
    }
    Polyline::new(out)
}
