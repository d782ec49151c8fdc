//! Bank contour extraction, bank matching and flow direction.
//!
//! The free-region boundary is traced along grid-cell edges (free cells kept
//! on the left, so the loop runs counter-clockwise around the water), then
//! split into the two banks by removing the vertices that lie on the inlet
//! and outlet lids. Banks are Douglas-Peucker simplified at 1.5 cells and
//! smoothed with a 5-vertex moving average so that tangent estimates are
//! stable, then matched pair-by-pair: arc-length-fraction matching refined
//! by a nearest-perpendicular-foot search within +/-5% of arc fraction.

use serde::{Deserialize, Serialize};

use crate::geometry::{point_segment_distance, Point, Polyline};
use crate::{Error, Result};

use super::{Cell, Opening, RiverMap};

/// One matched cross-river pair: a left-bank point, a right-bank point, and
/// the centerline vertex between them.
#[derive(Debug, Clone, Copy)]
pub struct BankPair {
    pub left: Point,
    pub right: Point,
    pub center: Point,
    /// Arc length along the centerline at this pair.
    pub center_arc: f64,
    pub width: f64,
}

/// Ordered left/right bank polylines with the derived centerline.
///
/// Both banks and the centerline run in the same direction: from the end
/// nearest the start point toward the far end.
#[derive(Debug, Clone)]
pub struct BankContours {
    pub left: Polyline,
    pub right: Polyline,
    pub centerline: Polyline,
    pairs: Vec<BankPair>,
}

impl BankContours {
    pub fn pairs(&self) -> &[BankPair] {
        &self.pairs
    }

    pub fn length(&self) -> f64 {
        self.centerline.length()
    }

    fn pair_index_at(&self, center_arc: f64) -> (usize, f64) {
        let arc = center_arc.clamp(0.0, self.length());
        let idx = self
            .pairs
            .partition_point(|p| p.center_arc <= arc)
            .saturating_sub(1)
            .min(self.pairs.len().saturating_sub(2));
        let a = self.pairs[idx].center_arc;
        let b = self.pairs[idx + 1].center_arc;
        let t = if b - a > 1e-12 { (arc - a) / (b - a) } else { 0.0 };
        (idx, t)
    }

    /// Bank-to-bank cross-section at a centerline arc: (left point, right point).
    pub fn section_at(&self, center_arc: f64) -> (Point, Point) {
        let (i, t) = self.pair_index_at(center_arc);
        (
            self.pairs[i].left.lerp(self.pairs[i + 1].left, t),
            self.pairs[i].right.lerp(self.pairs[i + 1].right, t),
        )
    }

    /// Point at cross-fraction `t` from the left bank (t in [0,1]) at a
    /// centerline arc.
    pub fn interp_at(&self, center_arc: f64, t: f64) -> Point {
        let (l, r) = self.section_at(center_arc);
        l.lerp(r, t)
    }

    /// River width at a centerline arc.
    pub fn width_at(&self, center_arc: f64) -> f64 {
        let (i, t) = self.pair_index_at(center_arc);
        self.pairs[i].width * (1.0 - t) + self.pairs[i + 1].width * t
    }
}

/// Which physical end of the river the start point sits at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Orientation {
    StartIsDownstreamEnd,
    StartIsUpstreamEnd,
}

/// Start-end assumption used when inferring the flow direction. The default
/// convention places the start at the downstream end, so coverage proceeds
/// upstream first.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StartEnd {
    Downstream,
    Upstream,
}

/// Coverage heading and start-end bookkeeping.
///
/// `heading` points along the centerline away from the end nearest the
/// start — the direction the first coverage leg travels.
#[derive(Debug, Clone, Copy)]
pub struct FlowDirection {
    pub heading: Point,
    pub orientation: Orientation,
}

impl FlowDirection {
    /// +1 when water flows in the direction of increasing centerline arc
    /// (arc 0 at the start end), -1 otherwise.
    pub fn downstream_arc_sign(&self) -> f64 {
        match self.orientation {
            Orientation::StartIsDownstreamEnd => -1.0,
            Orientation::StartIsUpstreamEnd => 1.0,
        }
    }

    /// True when the leg leaving the start travels against the current.
    pub fn first_leg_is_upstream(&self) -> bool {
        self.orientation == Orientation::StartIsDownstreamEnd
    }
}

/// Width samples along the centerline, ordered by arc length.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WidthProfile {
    pub samples: Vec<(f64, f64)>,
}

impl WidthProfile {
    pub fn mean_width(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        self.samples.iter().map(|(_, w)| w).sum::<f64>() / self.samples.len() as f64
    }

    pub fn width_at(&self, arc: f64) -> f64 {
        let i = self
            .samples
            .partition_point(|(a, _)| *a <= arc)
            .saturating_sub(1)
            .min(self.samples.len().saturating_sub(2));
        let (a0, w0) = self.samples[i];
        let (a1, w1) = self.samples[i + 1];
        let t = if a1 - a0 > 1e-12 {
            ((arc - a0) / (a1 - a0)).clamp(0.0, 1.0)
        } else {
            0.0
        };
        w0 * (1.0 - t) + w1 * t
    }

    /// Mean width over an arc interval.
    pub fn mean_width_in(&self, lo: f64, hi: f64) -> f64 {
        let inside: Vec<f64> = self
            .samples
            .iter()
            .filter(|(a, _)| *a >= lo && *a <= hi)
            .map(|(_, w)| *w)
            .collect();
        if inside.is_empty() {
            self.width_at(0.5 * (lo + hi))
        } else {
            inside.iter().sum::<f64>() / inside.len() as f64
        }
    }
}

/// Extracts the two bank polylines of a river map, ordered from the end
/// nearest `start` toward the far end.
pub fn get_directional_contours(map: &RiverMap, start: Point) -> Result<BankContours> {
    let res = map.resolution();
    if map.openings().len() != 2 {
        return Err(Error::validation(format!(
            "cannot identify inlet/outlet: map has {} boundary opening(s), need exactly 2",
            map.openings().len()
        )));
    }
    match map.distance_to_free(start, 4) {
        Some(d) if d <= 2.0 * res + 0.71 * res => {}
        _ => {
            return Err(Error::validation(
                "start point is farther than 2 cells from the river",
            ))
        }
    }

    let loop_pts = trace_outer_boundary(map)?;
    let (chain_a, chain_b) = split_banks(&loop_pts, map.openings(), res)?;

    // Light simplification only: an aggressive tolerance would replace
    // gentle bends with long chords and the moving average would then drag
    // the polyline toward the chord centroids, wrecking tangent estimates.
    // 0.5 cells still collapses the rasterization staircase; resampling at
    // one cell keeps vertex density uniform for the 5-vertex window.
    let smooth = |pts: Vec<Point>| -> Polyline {
        Polyline::new(pts)
            .simplified(0.5 * res)
            .resample(res)
            .smoothed(5)
    };
    let mut bank_a = smooth(chain_a);
    let mut bank_b = smooth(chain_b);

    // orient both banks away from the opening nearest the start
    let near = nearest_opening(map.openings(), start);
    if bank_a.first().distance(near) > bank_a.last().distance(near) {
        bank_a = bank_a.reversed();
    }
    if bank_b.first().distance(near) > bank_b.last().distance(near) {
        bank_b = bank_b.reversed();
    }

    // left bank is on the left when walking in the contour direction
    let mid = bank_a.point_at(0.5 * bank_a.length());
    let dir = bank_a.segment_dir_at(0.5 * bank_a.length());
    let (_, other, _) = bank_b.nearest(mid);
    let (left, right) = if dir.cross(other - mid) > 0.0 {
        (bank_b, bank_a)
    } else {
        (bank_a, bank_b)
    };

    build_matched(left, right, res)
}

fn nearest_opening(openings: &[Opening], start: Point) -> Point {
    openings
        .iter()
        .map(|o| o.midpoint())
        .min_by(|a, b| {
            a.distance(start)
                .partial_cmp(&b.distance(start))
                .unwrap()
        })
        .unwrap()
}

fn build_matched(left: Polyline, right: Polyline, res: f64) -> Result<BankContours> {
    let n = ((left.length().max(right.length()) / res).round() as usize).clamp(16, 20_000);
    let mut pairs: Vec<BankPair> = Vec::with_capacity(n + 1);
    let mut centers: Vec<Point> = Vec::with_capacity(n + 1);
    // the matched arc on the right bank drifts away from pure fraction
    // matching on asymmetric bends, so track it and search around it
    let mut cursor = 0.0_f64;
    let mut prev_width = left.first().distance(right.first());
    for i in 0..=n {
        let f = i as f64 / n as f64;
        let pl = left.point_at(f * left.length());
        let expected = cursor + right.length() / n as f64;
        let half_window = (0.05 * right.length()).max(2.0 * prev_width);
        let lo = (cursor - prev_width).max(expected - half_window);
        let hi = expected + half_window;
        let (arc_r, pr, d) = right.nearest_in_range(pl, lo, hi);
        cursor = arc_r;
        prev_width = d.max(2.0 * res);
        let center = pl.lerp(pr, 0.5);
        if let Some(prev) = centers.last() {
            if prev.distance(center) < 1e-6 {
                continue;
            }
        }
        centers.push(center);
        pairs.push(BankPair {
            left: pl,
            right: pr,
            center,
            center_arc: 0.0,
            width: d,
        });
    }
    if pairs.len() < 2 {
        return Err(Error::internal("bank matching produced fewer than 2 pairs"));
    }
    let centerline = Polyline::new(centers);
    if centerline.len() != pairs.len() {
        // duplicate centers were dropped by Polyline::new; rebuild arcs by projection
        for p in pairs.iter_mut() {
            p.center_arc = centerline.nearest(p.center).0;
        }
        pairs.sort_by(|a, b| a.center_arc.partial_cmp(&b.center_arc).unwrap());
        pairs.dedup_by(|a, b| (a.center_arc - b.center_arc).abs() < 1e-9);
    } else {
        for (i, p) in pairs.iter_mut().enumerate() {
            p.center_arc = centerline.arc_of_vertex(i);
        }
    }
    Ok(BankContours {
        left,
        right,
        centerline,
        pairs,
    })
}

/// Infers the coverage heading from the start point, assuming the start is
/// at the downstream end, so coverage proceeds upstream first.
pub fn get_downriver_direction(contours: &BankContours, start: Point) -> Result<FlowDirection> {
    get_downriver_direction_with(contours, start, StartEnd::Downstream)
}

pub fn get_downriver_direction_with(
    contours: &BankContours,
    start: Point,
    assume: StartEnd,
) -> Result<FlowDirection> {
    let c = &contours.centerline;
    let len = c.length();
    // loose bounding-box check, inflated by one river width
    let infl = contours.width_at(0.0).max(contours.width_at(len)) + 1.0;
    let (min_x, max_x) = c
        .points()
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
            (lo.min(p.x), hi.max(p.x))
        });
    let (min_y, max_y) = c
        .points()
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
            (lo.min(p.y), hi.max(p.y))
        });
    if start.x < min_x - infl || start.x > max_x + infl || start.y < min_y - infl || start.y > max_y + infl
    {
        return Err(Error::validation("start point outside the contour bounding box"));
    }

    let d_first = start.distance(c.first());
    let d_last = start.distance(c.last());
    let sample = len / (c.len().max(2) as f64 - 1.0);
    if (d_first - d_last).abs() < sample {
        return Err(Error::validation(
            "start point is equidistant from both river ends; cannot orient coverage",
        ));
    }
    let chord = (0.02 * len).clamp(2.0 * sample, 40.0);
    let heading = if d_first < d_last {
        (c.point_at(chord) - c.first()).normalized()
    } else {
        (c.point_at(len - chord) - c.last()).normalized()
    }
    .ok_or_else(|| Error::internal("degenerate centerline"))?;
    Ok(FlowDirection {
        heading,
        orientation: match assume {
            StartEnd::Downstream => Orientation::StartIsDownstreamEnd,
            StartEnd::Upstream => Orientation::StartIsUpstreamEnd,
        },
    })
}

/// Width of the river at each centerline vertex, ordered by arc length.
pub fn width_profile(contours: &BankContours) -> WidthProfile {
    let mut samples: Vec<(f64, f64)> = contours
        .pairs()
        .iter()
        .map(|p| (p.center_arc, p.width))
        .collect();
    samples.dedup_by(|a, b| (a.0 - b.0).abs() < 1e-9);
    WidthProfile { samples }
}

/// Serializes banks and centerline as GeoJSON LineString features with a
/// `role` property.
pub fn contours_to_geojson(contours: &BankContours, geo: Option<&super::GeoRef>) -> String {
    let line = |pl: &Polyline| -> Vec<serde_json::Value> {
        pl.points()
            .iter()
            .map(|p| match geo {
                Some(g) => {
                    let (lat, lon) = g.to_lat_lon(*p);
                    serde_json::json!([lon, lat])
                }
                None => serde_json::json!([p.x, p.y]),
            })
            .collect()
    };
    let feature = |role: &str, pl: &Polyline| {
        serde_json::json!({
            "type": "Feature",
            "properties": {"role": role},
            "geometry": {"type": "LineString", "coordinates": line(pl)}
        })
    };
    let doc = serde_json::json!({
        "type": "FeatureCollection",
        "properties": {"coordinates": if geo.is_some() {"wgs84"} else {"metric"}},
        "features": [
            feature("left_bank", &contours.left),
            feature("right_bank", &contours.right),
            feature("centerline", &contours.centerline),
        ]
    });
    serde_json::to_string_pretty(&doc).unwrap()
}

// ---------------------------------------------------------------------------
// boundary tracing
// ---------------------------------------------------------------------------

/// Traces the outer boundary loop of the free region along cell edges, free
/// cells on the left (counter-clockwise). Vertices are cell corners in
/// metric coordinates.
fn trace_outer_boundary(map: &RiverMap) -> Result<Vec<Point>> {
    let (w, h) = (map.grid_width(), map.grid_height());
    let res = map.resolution();
    // directed edges between cell corners; corner (cx, cy) has id cy*(w+1)+cx
    let corner = |cx: usize, cy: usize| cy * (w + 1) + cx;
    let mut out_edges: Vec<Vec<u32>> = vec![Vec::new(); (w + 1) * (h + 1)];
    let mut edge_count = 0usize;
    for iy in 0..h {
        for ix in 0..w {
            if map.cell(ix, iy) != Cell::Free {
                continue;
            }
            let free = |jx: i64, jy: i64| map.is_free(jx, jy);
            let (x, y) = (ix as i64, iy as i64);
            // walk with free on the left
            if !free(x + 1, y) {
                out_edges[corner(ix + 1, iy)].push(corner(ix + 1, iy + 1) as u32); // north
                edge_count += 1;
            }
            if !free(x - 1, y) {
                out_edges[corner(ix, iy + 1)].push(corner(ix, iy) as u32); // south
                edge_count += 1;
            }
            if !free(x, y + 1) {
                out_edges[corner(ix + 1, iy + 1)].push(corner(ix, iy + 1) as u32); // west
                edge_count += 1;
            }
            if !free(x, y - 1) {
                out_edges[corner(ix, iy)].push(corner(ix + 1, iy) as u32); // east
                edge_count += 1;
            }
        }
    }
    if edge_count == 0 {
        return Err(Error::internal("free region has no boundary"));
    }

    let corner_pt = |id: usize| {
        Point::new(
            (id % (w + 1)) as f64 * res,
            (id / (w + 1)) as f64 * res,
        )
    };

    let mut used: Vec<Vec<bool>> = out_edges.iter().map(|v| vec![false; v.len()]).collect();
    let mut best_loop: Vec<usize> = Vec::new();
    for start_corner in 0..out_edges.len() {
        for first in 0..out_edges[start_corner].len() {
            if used[start_corner][first] {
                continue;
            }
            let mut loop_ids = vec![start_corner];
            let mut cur = start_corner;
            let mut pick = first;
            loop {
                used[cur][pick] = true;
                let next = out_edges[cur][pick] as usize;
                loop_ids.push(next);
                if next == start_corner {
                    break;
                }
                // choose the outgoing edge; at checkerboard corners prefer
                // the sharpest left turn to hug the same free component
                let incoming = corner_pt(next) - corner_pt(cur);
                let slot = best_outgoing(&out_edges[next], &used[next], corner_pt(next), incoming, &corner_pt);
                match slot {
                    Some(s) => {
                        cur = next;
                        pick = s;
                    }
                    None => break,
                }
            }
            if loop_ids.len() > best_loop.len() {
                best_loop = loop_ids;
            }
        }
    }
    if best_loop.len() < 4 {
        return Err(Error::internal("boundary tracing failed"));
    }
    best_loop.pop(); // drop the repeated first corner
    Ok(best_loop.into_iter().map(corner_pt).collect())
}

fn best_outgoing(
    outs: &[u32],
    used: &[bool],
    at: Point,
    incoming: Point,
    corner_pt: &dyn Fn(usize) -> Point,
) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &to) in outs.iter().enumerate() {
        if used[i] {
            continue;
        }
        let dir = corner_pt(to as usize) - at;
        // score: prefer left turns (positive cross), then straight
        let score = incoming.cross(dir) - incoming.dot(dir) * 1e-3;
        if best.is_none_or(|(_, s)| score > s) {
            best = Some((i, score));
        }
    }
    best.map(|(i, _)| i)
}

/// Splits the closed boundary loop into the two bank chains by removing the
/// vertices lying on the opening lids.
fn split_banks(
    loop_pts: &[Point],
    openings: &[Opening],
    res: f64,
) -> Result<(Vec<Point>, Vec<Point>)> {
    let lid_tol = 1.2 * res;
    let is_lid = |p: Point| {
        openings
            .iter()
            .any(|o| point_segment_distance(p, o.segment.0, o.segment.1) <= lid_tol)
    };
    let n = loop_pts.len();
    let lid: Vec<bool> = loop_pts.iter().map(|p| is_lid(*p)).collect();
    if !lid.iter().any(|&l| l) || lid.iter().all(|&l| l) {
        return Err(Error::validation(
            "free region touches no two distinct boundary openings",
        ));
    }
    // collect maximal circular runs of non-lid vertices
    let mut runs: Vec<Vec<Point>> = Vec::new();
    let first_lid = lid.iter().position(|&l| l).unwrap();
    let mut current: Vec<Point> = Vec::new();
    for k in 1..=n {
        let i = (first_lid + k) % n;
        if lid[i] {
            if !current.is_empty() {
                runs.push(std::mem::take(&mut current));
            }
        } else {
            current.push(loop_pts[i]);
        }
    }
    if !current.is_empty() {
        runs.push(current);
    }
    runs.retain(|r| r.len() >= 4);
    runs.sort_by_key(|r| std::cmp::Reverse(r.len()));
    if runs.len() < 2 {
        return Err(Error::validation(
            "free region touches no two distinct boundary openings",
        ));
    }
    if runs.len() > 2 {
        // tiny extra runs can appear at ragged lid corners; tolerate them if
        // they are much shorter than the banks
        let third_len: f64 = Polyline::new(runs[2].clone()).length();
        let second_len: f64 = Polyline::new(runs[1].clone()).length();
        if third_len > 0.1 * second_len {
            return Err(Error::validation(
                "boundary decomposes into more than two banks; check openings",
            ));
        }
    }
    Ok((runs[0].clone(), runs[1].clone()))
}
