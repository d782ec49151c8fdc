//! Bend classification and meander segmentation.
//!
//! A bank point is classified by intersecting the two tangent lines taken a
//! step apart along the bank: when the intersection falls in the water the
//! point is on the inner curve of a bend, when it falls on land the point is
//! on the outside of a bend. Runs of consistent polarity along the river
//! become [`MeanderSegment`]s, the unit the planner assigns pass directions
//! over.

use serde::{Deserialize, Serialize};

use crate::geometry::{circumcenter, line_intersection, Point, Polyline};
use crate::river_map::{BankContours, FlowDirection, RiverMap};
use crate::{Error, Result};

/// Angle below which consecutive tangents count as parallel. Boundary
/// aliasing on a smoothed raster contour leaves ~1 degree of angle noise in
/// the secants, so the cutoff sits a few sigma above that.
pub const STRAIGHT_ANGLE_TOL_DEG: f64 = 3.0;

/// Intersections farther than this many local widths away count as straight.
pub const STRAIGHT_DISTANCE_FACTOR: f64 = 10.0;

/// Arc-length step between consecutive tangent lines.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TangentStep(f64);

impl TangentStep {
    /// A step must span at least two cells to be meaningful on a raster.
    pub fn new(value: f64, resolution: f64) -> Result<TangentStep> {
        if value < 2.0 * resolution {
            return Err(Error::validation(format!(
                "tangent step {value} m is below 2 cells ({} m)",
                2.0 * resolution
            )));
        }
        Ok(TangentStep(value))
    }

    /// Default step for a river: half the local width, floored at 4 cells.
    /// Tied to the feature scale so the secant baseline spans enough raster
    /// cells to beat boundary aliasing.
    pub fn for_river(resolution: f64, mean_width: f64) -> TangentStep {
        TangentStep((4.0 * resolution).max(mean_width / 2.0))
    }

    pub fn get(self) -> f64 {
        self.0
    }

    pub fn halved(self, resolution: f64) -> TangentStep {
        TangentStep((self.0 / 2.0).max(2.0 * resolution))
    }
}

/// Bend label of one bank point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BendLabel {
    Inner,
    Outer,
    Straight,
}

/// Which bank is on the inside of the bend.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BankSide {
    Left,
    Right,
}

impl BankSide {
    pub fn opposite(self) -> BankSide {
        match self {
            BankSide::Left => BankSide::Right,
            BankSide::Right => BankSide::Left,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SegmentKind {
    Bend,
    Straight,
}

/// A contiguous stretch of river with a constant bend polarity.
#[derive(Debug, Clone)]
pub struct MeanderSegment {
    /// Centerline arc where the segment begins (nearer the start point).
    pub start_arc: f64,
    pub end_arc: f64,
    pub inner_bank: BankSide,
    pub kind: SegmentKind,
    /// Bank-to-bank cross-section at `start_arc`.
    pub entry_section: (Point, Point),
    /// Bank-to-bank cross-section at `end_arc`.
    pub exit_section: (Point, Point),
    /// Centerline point of extreme curvature within the segment.
    pub apex: Point,
}

impl MeanderSegment {
    pub fn arc_span(&self) -> f64 {
        self.end_arc - self.start_arc
    }

    pub fn mid_arc(&self) -> f64 {
        0.5 * (self.start_arc + self.end_arc)
    }
}

/// Tangent line of a contour at an arc position: symmetric secant between
/// the points at `arc +/- step/2`, anchored at the point at `arc`.
pub fn tangent_at(contour: &Polyline, arc: f64, step: TangentStep) -> Result<(Point, Point)> {
    let half = step.get() / 2.0;
    if arc < half || arc > contour.length() - half {
        return Err(Error::validation(format!(
            "arc {arc} out of tangent range [{half}, {}]",
            contour.length() - half
        )));
    }
    let a = contour.point_at(arc - half);
    let b = contour.point_at(arc + half);
    let dir = (b - a)
        .normalized()
        .ok_or_else(|| Error::internal("degenerate secant"))?;
    Ok((contour.point_at(arc), dir))
}

/// Classifies the bank point at `arc` by the consecutive-tangent
/// intersection test.
///
/// The two tangents are taken at `arc +/- step/2`. Near-parallel tangents or
/// an intersection farther than ten local widths away yield `Straight`. The
/// occupancy lookup at the intersection uses a 3x3 majority vote, and an
/// intersection closer to the bank than 1.5 cells is probed at that
/// clearance on the same side, since the raw point sits inside the boundary
/// aliasing band on gentle bends.
pub fn classify_bend(
    map: &RiverMap,
    contour: &Polyline,
    arc: f64,
    step: TangentStep,
) -> Result<BendLabel> {
    let half = step.get() / 2.0;
    let (anchor_a, dir_a) = tangent_at(contour, arc - half, step)?;
    let (anchor_b, dir_b) = tangent_at(contour, arc + half, step)?;
    let tol = STRAIGHT_ANGLE_TOL_DEG.to_radians();
    let Some(intersection) = line_intersection(anchor_a, dir_a, anchor_b, dir_b, tol) else {
        return Ok(BendLabel::Straight);
    };
    let anchor = contour.point_at(arc);
    let chord = (anchor_b - anchor_a)
        .normalized()
        .unwrap_or(Point::new(1.0, 0.0));

    let local_width = local_width_at(map, contour, arc, chord);
    if anchor.distance(intersection) > STRAIGHT_DISTANCE_FACTOR * local_width {
        return Ok(BendLabel::Straight);
    }

    // Which side of the bank did the intersection fall on? Measured against
    // the chord between the two tangent anchors: on gentle bends the raw
    // intersection hugs the bank inside the raster aliasing band, so the
    // lookup is probed at a fixed clearance on that side.
    let side = chord.cross(intersection - anchor_a);
    let offset = side.abs();
    let clearance = 1.5 * map.resolution();
    let probe = if offset >= clearance {
        intersection
    } else {
        anchor + chord.perp() * side.signum() * clearance
    };
    if map.is_free_at_voted(probe) {
        Ok(BendLabel::Inner)
    } else {
        Ok(BendLabel::Outer)
    }
}

/// Local channel width estimated by ray-marching inward from the bank.
fn local_width_at(map: &RiverMap, contour: &Polyline, arc: f64, tangent: Point) -> f64 {
    let p = contour.point_at(arc);
    let res = map.resolution();
    let cap = map.extent().norm();
    let mut best = 0.0_f64;
    for normal in [tangent.perp(), -tangent.perp()] {
        let origin = p + normal * (0.75 * res);
        if map.is_free_at(origin) {
            best = best.max(map.free_ray_length(origin, normal, cap) + 0.75 * res);
        }
    }
    best.max(2.0 * res)
}

/// Per-bin polarity of the river: which bank is inner.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Polarity {
    Left,
    Right,
    Straight,
}

/// Splits the river into meander segments by classifying both banks at every
/// tangent step and grouping runs of consistent polarity.
///
/// Straight runs longer than three steps become their own segments, with
/// `inner_bank` inherited from the nearest meander on the upstream side
/// (falling back downstream, then `Left`). Short straight runs are absorbed
/// into their neighbors at the midpoint.
pub fn get_meander_segments(
    map: &RiverMap,
    contours: &BankContours,
    flow: &FlowDirection,
    step: TangentStep,
) -> Result<Vec<MeanderSegment>> {
    let total = contours.length();
    if total <= step.get() * 2.0 {
        return Err(Error::validation(
            "river too short for meander segmentation at this tangent step",
        ));
    }
    let delta = step.get();
    let n_bins = (total / delta).floor().max(1.0) as usize;

    // vote per centerline bin; +1 toward Left-inner, -1 toward Right-inner.
    // Sampling at a quarter step pools several classifications per bin so
    // isolated raster-noise labels cancel out.
    let sample_step = delta / 4.0;
    let mut votes = vec![0i32; n_bins];
    let mut counts = vec![0u32; n_bins];
    for (bank, is_left) in [(&contours.left, true), (&contours.right, false)] {
        // the moving average pins bank endpoints, which kinks tangents
        // there; stay clear of the caps
        let mut arc = 1.5 * delta;
        while arc <= bank.length() - 1.5 * delta {
            if let Ok(label) = classify_bend(map, bank, arc, step) {
                let center_arc = contours.centerline.nearest(bank.point_at(arc)).0;
                let bin = ((center_arc / delta) as usize).min(n_bins - 1);
                let v = match (label, is_left) {
                    (BendLabel::Inner, true) | (BendLabel::Outer, false) => 1,
                    (BendLabel::Outer, true) | (BendLabel::Inner, false) => -1,
                    (BendLabel::Straight, _) => 0,
                };
                votes[bin] += v;
                counts[bin] += 1;
            }
            arc += sample_step;
        }
    }
    // Score each bin over a 3-bin window. Near an inflection the two banks
    // flip polarity at slightly different arcs, so single-bin votes mix;
    // the windowed score crosses zero cleanly instead of leaving a bogus
    // straight gap.
    let mut polarity: Vec<Polarity> = (0..n_bins)
        .map(|i| {
            let lo = i.saturating_sub(1);
            let hi = (i + 1).min(n_bins - 1);
            let score: i32 = votes[lo..=hi].iter().sum();
            let count: u32 = counts[lo..=hi].iter().sum();
            let floor = ((count as f64 / 3.0).ceil() as i32).max(2);
            if score >= floor {
                Polarity::Left
            } else if score <= -floor {
                Polarity::Right
            } else {
                Polarity::Straight
            }
        })
        .collect();
    // unclassifiable bins at the caps inherit their neighbor's polarity
    if let Some(first) = polarity.iter().position(|p| *p != Polarity::Straight) {
        for i in 0..first {
            if counts[i] == 0 {
                polarity[i] = polarity[first];
            }
        }
    }
    if let Some(last) = polarity.iter().rposition(|p| *p != Polarity::Straight) {
        for i in last + 1..n_bins {
            if counts[i] == 0 {
                polarity[i] = polarity[last];
            }
        }
    }

    // group into runs with arc ranges
    let mut runs: Vec<(Polarity, f64, f64)> = Vec::new();
    for (i, &p) in polarity.iter().enumerate() {
        let lo = i as f64 * delta;
        let hi = if i + 1 == polarity.len() { total } else { (i + 1) as f64 * delta };
        match runs.last_mut() {
            Some((q, _, end)) if *q == p => *end = hi,
            _ => runs.push((p, lo, hi)),
        }
    }

    // Absorb short runs into their neighbors, split at the midpoint. The
    // two banks flip polarity at arcs skewed by about half a width times
    // the crossing angle, so every inflection leaves a straight transition
    // zone of up to ~1.5 widths; only longer straight runs are real reaches.
    let mean_width = {
        let pairs = contours.pairs();
        pairs.iter().map(|p| p.width).sum::<f64>() / pairs.len().max(1) as f64
    };
    let min_straight = (3.0 * delta).max(2.0 * mean_width + delta);
    let mut absorbed: Vec<(Polarity, f64, f64)> = Vec::new();
    for i in 0..runs.len() {
        let (p, lo, hi) = runs[i];
        let too_short = match p {
            Polarity::Straight => hi - lo < min_straight,
            _ => hi - lo < 2.0 * delta,
        };
        if too_short && runs.len() > 1 {
            let has_prev = !absorbed.is_empty();
            let has_next = i + 1 < runs.len();
            match (has_prev, has_next) {
                (true, true) => {
                    let mid = 0.5 * (lo + hi);
                    absorbed.last_mut().unwrap().2 = mid;
                    runs[i + 1].1 = mid;
                }
                (true, false) => absorbed.last_mut().unwrap().2 = hi,
                (false, true) => runs[i + 1].1 = lo,
                (false, false) => absorbed.push((p, lo, hi)),
            }
        } else {
            absorbed.push((p, lo, hi));
        }
    }
    // merge adjacent runs that ended up with equal polarity
    let mut cleaned: Vec<(Polarity, f64, f64)> = Vec::new();
    for run in absorbed {
        match cleaned.last_mut() {
            Some((q, _, end)) if *q == run.0 => *end = run.2,
            _ => cleaned.push(run),
        }
    }
    if cleaned.is_empty() {
        return Err(Error::validation("empty contours produced no segments"));
    }

    // straight segments inherit inner_bank from the nearest upstream bend
    let upstream_is_forward = flow.downstream_arc_sign() < 0.0;
    let bend_side = |p: Polarity| match p {
        Polarity::Left => Some(BankSide::Left),
        Polarity::Right => Some(BankSide::Right),
        Polarity::Straight => None,
    };
    let mut segments = Vec::with_capacity(cleaned.len());
    for (i, &(p, lo, hi)) in cleaned.iter().enumerate() {
        let (kind, inner) = match bend_side(p) {
            Some(side) => (SegmentKind::Bend, side),
            None => {
                let forward = cleaned[i + 1..].iter().find_map(|r| bend_side(r.0));
                let backward = cleaned[..i].iter().rev().find_map(|r| bend_side(r.0));
                let inherited = if upstream_is_forward {
                    forward.or(backward)
                } else {
                    backward.or(forward)
                };
                (SegmentKind::Straight, inherited.unwrap_or(BankSide::Left))
            }
        };
        segments.push(build_segment(contours, lo, hi, inner, kind, step));
    }
    Ok(segments)
}

fn build_segment(
    contours: &BankContours,
    lo: f64,
    hi: f64,
    inner_bank: BankSide,
    kind: SegmentKind,
    step: TangentStep,
) -> MeanderSegment {
    let apex = match kind {
        SegmentKind::Straight => contours.centerline.point_at(0.5 * (lo + hi)),
        SegmentKind::Bend => {
            let c = &contours.centerline;
            let half = step.get() / 2.0;
            let mut best = (0.0_f64, c.point_at(0.5 * (lo + hi)));
            let mut arc = lo.max(half);
            while arc <= hi.min(c.length() - half) {
                let triple = (
                    c.point_at(arc - half),
                    c.point_at(arc),
                    c.point_at(arc + half),
                );
                if let Some(center) = circumcenter(triple.0, triple.1, triple.2) {
                    let curvature = 1.0 / center.distance(triple.1).max(1e-9);
                    if curvature > best.0 {
                        best = (curvature, triple.1);
                    }
                }
                arc += half;
            }
            best.1
        }
    };
    MeanderSegment {
        start_arc: lo,
        end_arc: hi,
        inner_bank,
        kind,
        entry_section: contours.section_at(lo),
        exit_section: contours.section_at(hi),
        apex,
    }
}

/// CSV dump of per-sample bend labels: `arc,bank,label`.
pub fn bend_labels_csv(map: &RiverMap, contours: &BankContours, step: TangentStep) -> String {
    let mut out = String::from("arc,bank,label\n");
    for (bank, name) in [(&contours.left, "left"), (&contours.right, "right")] {
        let delta = step.get();
        let mut arc = delta;
        while arc <= bank.length() - delta {
            if let Ok(label) = classify_bend(map, bank, arc, step) {
                out.push_str(&format!("{arc:.1},{name},{label:?}\n"));
            }
            arc += delta;
        }
    }
    out
}

/// GeoJSON features for the segments: centerline slices with `inner_bank`,
/// `start_arc`, `end_arc` properties.
pub fn segments_to_geojson(segments: &[MeanderSegment], contours: &BankContours) -> String {
    let features: Vec<serde_json::Value> = segments
        .iter()
        .map(|s| {
            let coords: Vec<serde_json::Value> = contours
                .centerline
                .slice(s.start_arc, s.end_arc)
                .points()
                .iter()
                .map(|p| serde_json::json!([p.x, p.y]))
                .collect();
            serde_json::json!({
                "type": "Feature",
                "properties": {
                    "inner_bank": format!("{:?}", s.inner_bank),
                    "kind": format!("{:?}", s.kind),
                    "start_arc": s.start_arc,
                    "end_arc": s.end_arc,
                },
                "geometry": {"type": "LineString", "coordinates": coords}
            })
        })
        .collect();
    serde_json::to_string_pretty(&serde_json::json!({
        "type": "FeatureCollection",
        "features": features,
    }))
    .unwrap()
}

/// Independent curvature oracle used by the verification suite: estimates
/// the osculating-circle center from three bank points and probes which side
/// of the bank it falls on. The center of curvature of an inner-bend bank
/// lies on the land side; for an outer-bend bank it lies on the water side.
pub fn curvature_side_oracle(
    map: &RiverMap,
    contour: &Polyline,
    arc: f64,
    step: TangentStep,
) -> Option<BendLabel> {
    // full-step baseline on each side: the wider sagitta beats raster noise
    let half = step.get();
    if arc < half || arc > contour.length() - half {
        return None;
    }
    let a = contour.point_at(arc - half);
    let b = contour.point_at(arc);
    let c = contour.point_at(arc + half);
    let Some(center) = circumcenter(a, b, c) else {
        return Some(BendLabel::Straight);
    };
    let radius = center.distance(b);
    // same effective straightness cutoff as the tangent test: the turn over
    // one step must exceed the parallel tolerance
    if step.get() / radius < STRAIGHT_ANGLE_TOL_DEG.to_radians() {
        return Some(BendLabel::Straight);
    }
    let toward_center = (center - b).normalized()?;
    let probe = b + toward_center * (1.5 * map.resolution());
    Some(if map.is_free_at_voted(probe) {
        BendLabel::Outer
    } else {
        BendLabel::Inner
    })
}

/// True when consecutive segments either alternate inner bank or are
/// separated by a straight segment — the structural segmentation invariant.
pub fn segments_alternate(segments: &[MeanderSegment]) -> bool {
    for w in segments.windows(2) {
        if w[0].kind == SegmentKind::Bend
            && w[1].kind == SegmentKind::Bend
            && w[0].inner_bank == w[1].inner_bank
        {
            return false;
        }
    }
    true
}
