//! Coverage verification: distance from every free cell to the plan.

use crate::geometry::{point_segment_distance, Point};
use crate::river_map::RiverMap;

use super::CoveragePlan;

/// Fraction of free cells whose center lies within `radius` meters of the
/// plan path, measured exactly against the plan's polyline segments via a
/// bucketed ring search.
pub fn coverage_fraction(map: &RiverMap, plan: &CoveragePlan, radius: f64) -> f64 {
    let (w, h) = (map.grid_width(), map.grid_height());
    let res = map.resolution();

    // register every plan segment in the cells it passes through
    let mut buckets: Vec<Vec<u32>> = vec![Vec::new(); w * h];
    let mut segments: Vec<(Point, Point)> = Vec::new();
    for element in &plan.elements {
        let pts = element.polyline().points();
        for pair in pts.windows(2) {
            let id = segments.len() as u32;
            segments.push((pair[0], pair[1]));
            let steps = (pair[0].distance(pair[1]) / (0.5 * res)).ceil().max(1.0) as usize;
            let mut last = usize::MAX;
            for i in 0..=steps {
                let p = pair[0].lerp(pair[1], i as f64 / steps as f64);
                let (cx, cy) = map.cell_of(p);
                if cx < 0 || cy < 0 || cx >= w as i64 || cy >= h as i64 {
                    continue;
                }
                let idx = cy as usize * w + cx as usize;
                if idx != last {
                    if buckets[idx].last() != Some(&id) {
                        buckets[idx].push(id);
                    }
                    last = idx;
                }
            }
        }
    }
    if segments.is_empty() {
        return 0.0;
    }

    let max_ring = (radius / res).ceil() as i64 + 2;
    let mut covered = 0usize;
    let mut free_total = 0usize;
    for iy in 0..h {
        for ix in 0..w {
            if !map.is_free(ix as i64, iy as i64) {
                continue;
            }
            free_total += 1;
            let center = map.cell_center(ix, iy);
            let mut best = f64::INFINITY;
            'rings: for ring in 0..=max_ring {
                // no closer segment can exist beyond this ring
                if best <= (ring as f64 - 1.0) * res {
                    break;
                }
                for dy in -ring..=ring {
                    for dx in -ring..=ring {
                        if dx.abs() != ring && dy.abs() != ring {
                            continue;
                        }
                        let (jx, jy) = (ix as i64 + dx, iy as i64 + dy);
                        if jx < 0 || jy < 0 || jx >= w as i64 || jy >= h as i64 {
                            continue;
                        }
                        for &sid in &buckets[jy as usize * w + jx as usize] {
                            let (a, b) = segments[sid as usize];
                            best = best.min(point_segment_distance(center, a, b));
                        }
                    }
                }
                if ring == max_ring && best.is_infinite() {
                    break 'rings;
                }
            }
            if best <= radius {
                covered += 1;
            }
        }
    }
    if free_total == 0 {
        0.0
    } else {
        covered as f64 / free_total as f64
    }
}

/// True when every plan vertex sits on a free cell and every plan segment
/// rasterizes to free cells only.
pub fn plan_obeys_free_space(map: &RiverMap, plan: &CoveragePlan) -> bool {
    for element in &plan.elements {
        let pts = element.polyline().points();
        for p in pts {
            if !map.is_free_at(*p) {
                return false;
            }
        }
        for pair in pts.windows(2) {
            if !map.segment_is_free(pair[0], pair[1]) {
                return false;
            }
        }
    }
    true
}
