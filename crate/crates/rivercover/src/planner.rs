//! Coverage planners.
//!
//! All planners share the same vocabulary: a plan is an ordered chain of
//! [`Pass`]es (coverage lanes with a reserved travel direction) joined by
//! connector polylines, forming one continuous path from the start point.
//!
//! The meander-aware planners reserve the lanes on the inner half of the
//! channel for upstream travel and the outer half for downstream travel,
//! pairing lane `i` with lane `k/2 + i` so each round trip covers one
//! upstream lane out and one downstream lane back. The baselines ignore the
//! meander structure: `l_cover` runs a serpentine over same-width clusters,
//! `t_cover` runs cross-river transects, and `z_cover` bounces diagonally
//! downriver in a single pass.

mod baselines;
mod coverage;

pub use baselines::{l_cover, l_cover_with, t_cover, t_cover_with, z_cover, z_cover_with};
pub use coverage::{coverage_fraction, plan_obeys_free_space};

use serde::{Deserialize, Serialize};

use crate::geometry::{Point, Polyline};
use crate::meander::{BankSide, MeanderSegment, SegmentKind};
use crate::pathfind::{nearest_free_cell, shortest_free_path};
use crate::river_map::{BankContours, FlowDirection, RiverMap, RiverModel, StartEnd, WidthProfile};
use crate::{Error, Result};

/// Water-relative travel direction of a pass.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    Upstream,
    Downstream,
}

/// One coverage lane, in travel order.
#[derive(Debug, Clone)]
pub struct Pass {
    pub polyline: Polyline,
    /// 0-based lane index counted from the inner bank.
    pub lane_index: usize,
    pub direction: Direction,
    /// Index of the owning meander segment (or cluster for baselines).
    pub segment_id: usize,
}

/// Plan element: a coverage pass or a transit connector.
#[derive(Debug, Clone)]
pub enum PlanElement {
    Pass(Pass),
    Connector(Polyline),
}

impl PlanElement {
    pub fn polyline(&self) -> &Polyline {
        match self {
            PlanElement::Pass(p) => &p.polyline,
            PlanElement::Connector(c) => c,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Algorithm {
    MCover,
    WidthMCover,
    LCover,
    TCover,
    ZCover,
}

impl Algorithm {
    /// Closed-tour algorithms return to the start; z-cover is single-pass.
    pub fn is_closed_tour(self) -> bool {
        !matches!(self, Algorithm::ZCover)
    }

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::MCover => "m-cover",
            Algorithm::WidthMCover => "width-m-cover",
            Algorithm::LCover => "l-cover",
            Algorithm::TCover => "t-cover",
            Algorithm::ZCover => "z-cover",
        }
    }

    pub fn parse(name: &str) -> Result<Algorithm> {
        match name {
            "m-cover" => Ok(Algorithm::MCover),
            "width-m-cover" => Ok(Algorithm::WidthMCover),
            "l-cover" => Ok(Algorithm::LCover),
            "t-cover" => Ok(Algorithm::TCover),
            "z-cover" => Ok(Algorithm::ZCover),
            other => Err(Error::validation(format!(
                "unknown algorithm {other}; expected one of m-cover, width-m-cover, l-cover, t-cover, z-cover"
            ))),
        }
    }
}

/// An ordered, continuous coverage tour.
#[derive(Debug, Clone)]
pub struct CoveragePlan {
    pub elements: Vec<PlanElement>,
    pub spacing: f64,
    pub algorithm: Algorithm,
    pub start: Point,
}

impl CoveragePlan {
    pub fn total_length(&self) -> f64 {
        self.elements.iter().map(|e| e.polyline().length()).sum()
    }

    /// Length of coverage passes only (connectors excluded).
    pub fn covered_length(&self) -> f64 {
        self.passes().map(|p| p.polyline.length()).sum()
    }

    pub fn passes(&self) -> impl Iterator<Item = &Pass> {
        self.elements.iter().filter_map(|e| match e {
            PlanElement::Pass(p) => Some(p),
            PlanElement::Connector(_) => None,
        })
    }

    pub fn first_point(&self) -> Option<Point> {
        self.elements.first().map(|e| e.polyline().first())
    }

    pub fn end_point(&self) -> Option<Point> {
        self.elements.last().map(|e| e.polyline().last())
    }

    /// Lane counts per segment id, ordered by id.
    pub fn lane_counts(&self) -> Vec<(usize, usize)> {
        let mut seen: std::collections::BTreeMap<usize, std::collections::BTreeSet<usize>> =
            std::collections::BTreeMap::new();
        for p in self.passes() {
            seen.entry(p.segment_id).or_default().insert(p.lane_index);
        }
        seen.into_iter().map(|(id, lanes)| (id, lanes.len())).collect()
    }

    /// Largest gap between consecutive elements, in meters.
    pub fn max_discontinuity(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for w in self.elements.windows(2) {
            worst = worst.max(w[0].polyline().last().distance(w[1].polyline().first()));
        }
        worst
    }
}

/// Nearest-even integer, half rounded up, floored at `min`.
pub fn round_to_even_half_up(x: f64, min: usize) -> usize {
    let k = 2.0 * (x / 2.0 + 0.5).floor();
    (k.max(0.0) as usize).max(min)
}

/// Nearest integer, half rounded up, floored at `min`.
pub fn round_nearest_half_up(x: f64, min: usize) -> usize {
    ((x + 0.5).floor().max(0.0) as usize).max(min)
}

/// Options shared by all planners.
#[derive(Debug, Clone, Copy)]
pub struct PlanOptions {
    /// Which river end the start point is assumed to sit at.
    pub start_end: StartEnd,
    /// Tangent step override in meters.
    pub tangent_step: Option<f64>,
}

impl Default for PlanOptions {
    fn default() -> Self {
        PlanOptions {
            start_end: StartEnd::Downstream,
            tangent_step: None,
        }
    }
}

/// A maximal stretch of river over which the width rounds to the same pass
/// count.
#[derive(Debug, Clone, Copy)]
pub struct SameWidthCluster {
    pub start_arc: f64,
    pub end_arc: f64,
    pub nominal_width: f64,
    pub pass_count: usize,
}

// ---------------------------------------------------------------------------
// lanes and directions
// ---------------------------------------------------------------------------

/// Builds the lane polyline at cross-fraction `t` from the LEFT bank over a
/// centerline arc range, in arc-increasing order.
pub(crate) fn lane_polyline(
    map: &RiverMap,
    contours: &BankContours,
    lo: f64,
    hi: f64,
    t_left: f64,
) -> Polyline {
    let mut pts = vec![contours.interp_at(lo, t_left)];
    for pair in contours.pairs() {
        if pair.center_arc > lo && pair.center_arc < hi {
            pts.push(pair.left.lerp(pair.right, t_left));
        }
    }
    pts.push(contours.interp_at(hi, t_left));
    // nudge rare aliased vertices toward the channel center
    let out = pts
        .into_iter()
        .map(|p| nudge_free(map, contours, p))
        .collect();
    Polyline::new(out)
}

fn nudge_free(map: &RiverMap, contours: &BankContours, p: Point) -> Point {
    if map.is_free_at(p) {
        return p;
    }
    let (arc, _, _) = contours.centerline.nearest(p);
    let center = contours.centerline.point_at(arc);
    for i in 1..=8 {
        let q = p.lerp(center, i as f64 / 8.0);
        if map.is_free_at(q) {
            return q;
        }
    }
    center
}

/// Splits a meander segment into an even number of lanes (`round_to_even`
/// of mean width over spacing, minimum 2). Lane 0 hugs the inner bank; all
/// lanes are returned with directions already assigned.
pub fn split_into_even_passes(
    map: &RiverMap,
    segment: &MeanderSegment,
    contours: &BankContours,
    s: f64,
) -> Result<Vec<Pass>> {
    if s <= 0.0 {
        return Err(Error::validation("spacing must be > 0"));
    }
    let profile = crate::river_map::width_profile(contours);
    let mean_w = profile.mean_width_in(segment.start_arc, segment.end_arc);
    check_spacing_fits(&profile, segment.start_arc, segment.end_arc, s)?;
    let k = round_to_even_half_up(mean_w / s, 2);
    let passes = build_lanes(map, contours, segment, k, 0);
    assign_pass_directions(passes)
}

/// Lane construction without direction assignment.
pub(crate) fn build_lanes(
    map: &RiverMap,
    contours: &BankContours,
    segment: &MeanderSegment,
    k: usize,
    segment_id: usize,
) -> Vec<Pass> {
    (0..k)
        .map(|j| {
            let u_inner = (j as f64 + 0.5) / k as f64;
            let t_left = match segment.inner_bank {
                BankSide::Left => u_inner,
                BankSide::Right => 1.0 - u_inner,
            };
            Pass {
                polyline: lane_polyline(map, contours, segment.start_arc, segment.end_arc, t_left),
                lane_index: j,
                direction: Direction::Upstream,
                segment_id,
            }
        })
        .collect()
}

/// Reserves the inner half of the lanes for upstream travel and the outer
/// half for downstream travel, preserving the pairing `(i, k/2 + i)`.
pub fn assign_pass_directions(mut passes: Vec<Pass>) -> Result<Vec<Pass>> {
    let k = passes.len();
    if !k.is_multiple_of(2) || k == 0 {
        return Err(Error::validation(format!(
            "direction assignment needs an even pass count, got {k}"
        )));
    }
    passes.sort_by_key(|p| p.lane_index);
    for p in passes.iter_mut() {
        p.direction = if p.lane_index < k / 2 {
            Direction::Upstream
        } else {
            Direction::Downstream
        };
    }
    Ok(passes)
}

pub(crate) fn check_spacing_fits(profile: &WidthProfile, lo: f64, hi: f64, s: f64) -> Result<()> {
    let offending: Vec<f64> = profile
        .samples
        .iter()
        .filter(|(a, w)| *a >= lo && *a <= hi && *w <= s)
        .map(|(a, _)| *a)
        .collect();
    if offending.is_empty() {
        return Ok(());
    }
    let shown: Vec<String> = offending.iter().take(5).map(|a| format!("{a:.0} m")).collect();
    Err(Error::infeasible(format!(
        "spacing {s} m does not fit 2 lanes at {} arc position(s) (e.g. {}); reduce spacing",
        offending.len(),
        shown.join(", ")
    )))
}

/// Free-space connector between two tour points: grid shortest path with
/// string-pulling smoothing.
pub fn create_pass_between(map: &RiverMap, exit: Point, entry: Point) -> Result<Polyline> {
    shortest_free_path(map, exit, entry)
}

// ---------------------------------------------------------------------------
// tour assembly
// ---------------------------------------------------------------------------

/// A slice of river to cover with a fixed even lane count.
#[derive(Debug, Clone)]
pub(crate) struct TourPiece {
    pub arc_lo: f64,
    pub arc_hi: f64,
    pub inner_bank: BankSide,
    pub kind: SegmentKind,
    pub lanes: usize,
    pub segment_id: usize,
}

pub(crate) fn water_direction(flow: &FlowDirection, arc_increasing: bool) -> Direction {
    if flow.downstream_arc_sign() > 0.0 {
        if arc_increasing {
            Direction::Downstream
        } else {
            Direction::Upstream
        }
    } else if arc_increasing {
        Direction::Upstream
    } else {
        Direction::Downstream
    }
}

pub(crate) fn snap_to_free(map: &RiverMap, p: Point) -> Point {
    if map.is_free_at(p) {
        p
    } else {
        match nearest_free_cell(map, p) {
            Some((ix, iy)) => map.cell_center(ix, iy),
            None => p,
        }
    }
}

/// Appends a connector from the cursor to `target` when the gap is real.
pub(crate) fn push_move(
    map: &RiverMap,
    elements: &mut Vec<PlanElement>,
    cursor: &mut Point,
    target: Point,
) -> Result<()> {
    if cursor.distance(target) > 0.25 * map.resolution() {
        let conn = create_pass_between(map, *cursor, target)?;
        elements.push(PlanElement::Connector(conn));
    }
    *cursor = target;
    Ok(())
}

/// Builds the paired round-trip tour over the pieces: for every lane pair
/// index, travel out along each piece's upstream-reserved lane and return
/// along the paired downstream lane, then close the tour at the start.
/// Pieces with fewer pairs are transited by free-space connectors.
pub(crate) fn build_round_trip_tour(
    model: &RiverModel,
    pieces: &[TourPiece],
    s: f64,
    algorithm: Algorithm,
    start: Point,
) -> Result<CoveragePlan> {
    let map = &model.map;
    let contours = &model.contours;
    if pieces.is_empty() {
        return Err(Error::infeasible("no river pieces to cover"));
    }
    // lane polylines per piece, arc-increasing order
    let mut lanes: Vec<Vec<Pass>> = Vec::with_capacity(pieces.len());
    for piece in pieces {
        let seg = MeanderSegment {
            start_arc: piece.arc_lo,
            end_arc: piece.arc_hi,
            inner_bank: piece.inner_bank,
            kind: piece.kind,
            entry_section: contours.section_at(piece.arc_lo),
            exit_section: contours.section_at(piece.arc_hi),
            apex: contours.centerline.point_at(0.5 * (piece.arc_lo + piece.arc_hi)),
        };
        let built = build_lanes(map, contours, &seg, piece.lanes, piece.segment_id);
        lanes.push(assign_pass_directions(built)?);
    }

    let up_outbound = model.flow.first_leg_is_upstream();
    let max_pairs = pieces.iter().map(|p| p.lanes / 2).max().unwrap_or(0);
    let origin = snap_to_free(map, start);
    let mut cursor = origin;
    let mut elements: Vec<PlanElement> = Vec::new();

    for pair in 0..max_pairs {
        // outbound leg: arc-increasing
        for (i, piece) in pieces.iter().enumerate() {
            if pair >= piece.lanes / 2 {
                continue;
            }
            let lane_idx = if up_outbound { pair } else { piece.lanes / 2 + pair };
            let pass = &lanes[i][lane_idx];
            push_move(map, &mut elements, &mut cursor, pass.polyline.first())?;
            elements.push(PlanElement::Pass(Pass {
                polyline: pass.polyline.clone(),
                lane_index: lane_idx,
                direction: water_direction(&model.flow, true),
                segment_id: piece.segment_id,
            }));
            cursor = pass.polyline.last();
        }
        // return leg: arc-decreasing
        for (i, piece) in pieces.iter().enumerate().rev() {
            if pair >= piece.lanes / 2 {
                continue;
            }
            let lane_idx = if up_outbound { piece.lanes / 2 + pair } else { pair };
            let pass = &lanes[i][lane_idx];
            let polyline = pass.polyline.reversed();
            push_move(map, &mut elements, &mut cursor, polyline.first())?;
            elements.push(PlanElement::Pass(Pass {
                polyline,
                lane_index: lane_idx,
                direction: water_direction(&model.flow, false),
                segment_id: piece.segment_id,
            }));
            cursor = lanes[i][lane_idx].polyline.first();
        }
    }
    push_move(map, &mut elements, &mut cursor, origin)?;

    Ok(CoveragePlan {
        elements,
        spacing: s,
        algorithm,
        start,
    })
}

// ---------------------------------------------------------------------------
// planners
// ---------------------------------------------------------------------------

/// Meander-based complete coverage: inner lanes upstream, outer lanes
/// downstream, connectors across each inflection, closed tour at the start.
pub fn m_cover(map: &RiverMap, start: Point, s: f64) -> Result<CoveragePlan> {
    m_cover_with(map, start, s, &PlanOptions::default())
}

pub fn m_cover_with(
    map: &RiverMap,
    start: Point,
    s: f64,
    opts: &PlanOptions,
) -> Result<CoveragePlan> {
    validate_spacing(s)?;
    let model = RiverModel::analyze_with(map.clone(), start, opts.start_end, opts.tangent_step)?;
    m_cover_model(&model, start, s)
}

pub(crate) fn m_cover_model(model: &RiverModel, start: Point, s: f64) -> Result<CoveragePlan> {
    let profile = crate::river_map::width_profile(&model.contours);
    check_spacing_fits(&profile, 0.0, model.contours.length(), s)?;
    let pieces: Vec<TourPiece> = model
        .segments
        .iter()
        .enumerate()
        .map(|(i, seg)| {
            let mean_w = profile.mean_width_in(seg.start_arc, seg.end_arc);
            TourPiece {
                arc_lo: seg.start_arc,
                arc_hi: seg.end_arc,
                inner_bank: seg.inner_bank,
                kind: seg.kind,
                lanes: round_to_even_half_up(mean_w / s, 2),
                segment_id: i,
            }
        })
        .collect();
    build_round_trip_tour(model, &pieces, s, Algorithm::MCover, start)
}

/// Same-width clustering: greedy sweep downriver, opening a new cluster when
/// the even-rounded pass count changes and persists for two consecutive
/// samples.
pub fn get_same_width_clusters(
    contours: &BankContours,
    flow: &FlowDirection,
    s: f64,
) -> Vec<SameWidthCluster> {
    cluster_by_counts(contours, flow, s, |w| round_to_even_half_up(w / s, 2))
}

pub(crate) fn cluster_by_counts(
    contours: &BankContours,
    flow: &FlowDirection,
    s: f64,
    count_of: impl Fn(f64) -> usize,
) -> Vec<SameWidthCluster> {
    let profile = crate::river_map::width_profile(contours);
    let total = contours.length();
    let step = s.max(total / 400.0);
    let n = (total / step).floor().max(1.0) as usize;
    // sweep in the downstream direction, covering both ends exactly
    let downstream_forward = flow.downstream_arc_sign() > 0.0;
    let mut arcs: Vec<f64> = (0..=n).map(|i| (i as f64 * step).min(total)).collect();
    if total - arcs.last().copied().unwrap_or(0.0) > 1e-9 {
        arcs.push(total);
    }
    if !downstream_forward {
        arcs.reverse();
    }

    #[derive(Clone, Copy)]
    struct Open {
        from: f64,
        count: usize,
    }
    let mut clusters: Vec<(f64, f64, usize)> = Vec::new();
    let mut open: Option<Open> = None;
    let mut pending: Option<(usize, f64, usize)> = None; // count, first arc, persistence
    for (i, &arc) in arcs.iter().enumerate() {
        let count = count_of(profile.width_at(arc));
        match open {
            None => {
                open = Some(Open { from: arc, count });
            }
            Some(o) if count == o.count => {
                pending = None;
            }
            Some(o) => {
                match pending {
                    Some((pc, first, seen)) if pc == count => {
                        if seen + 1 >= 2 || i == arcs.len() - 1 {
                            clusters.push((o.from, first, o.count));
                            open = Some(Open { from: first, count });
                            pending = None;
                        } else {
                            pending = Some((pc, first, seen + 1));
                        }
                    }
                    _ => pending = Some((count, arc, 1)),
                }
            }
        }
    }
    if let Some(o) = open {
        clusters.push((o.from, *arcs.last().unwrap(), o.count));
    }

    let mut out: Vec<SameWidthCluster> = clusters
        .into_iter()
        .map(|(a, b, count)| {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            SameWidthCluster {
                start_arc: lo,
                end_arc: hi,
                nominal_width: profile.mean_width_in(lo, hi),
                pass_count: count,
            }
        })
        .filter(|c| c.end_arc - c.start_arc > 1e-9)
        .collect();
    out.sort_by(|x, y| x.start_arc.partial_cmp(&y.start_arc).unwrap());
    out
}

/// Width-based meander coverage: same-width clusters first, then the
/// meander tour with the cluster's pass count on every piece.
pub fn width_based_m_cover(map: &RiverMap, start: Point, s: f64) -> Result<CoveragePlan> {
    width_based_m_cover_with(map, start, s, &PlanOptions::default())
}

pub fn width_based_m_cover_with(
    map: &RiverMap,
    start: Point,
    s: f64,
    opts: &PlanOptions,
) -> Result<CoveragePlan> {
    validate_spacing(s)?;
    let model = RiverModel::analyze_with(map.clone(), start, opts.start_end, opts.tangent_step)?;
    let profile = crate::river_map::width_profile(&model.contours);
    check_spacing_fits(&profile, 0.0, model.contours.length(), s)?;
    let clusters = get_same_width_clusters(&model.contours, &model.flow, s);
    let min_span = 2.0 * model.map.resolution();

    let mut pieces: Vec<TourPiece> = Vec::new();
    for cluster in &clusters {
        for (i, seg) in model.segments.iter().enumerate() {
            let lo = seg.start_arc.max(cluster.start_arc);
            let hi = seg.end_arc.min(cluster.end_arc);
            if hi - lo < min_span {
                continue;
            }
            pieces.push(TourPiece {
                arc_lo: lo,
                arc_hi: hi,
                inner_bank: seg.inner_bank,
                kind: seg.kind,
                lanes: cluster.pass_count,
                segment_id: i,
            });
        }
    }
    pieces.sort_by(|a, b| a.arc_lo.partial_cmp(&b.arc_lo).unwrap());
    build_round_trip_tour(&model, &pieces, s, Algorithm::WidthMCover, start)
}

pub(crate) fn validate_spacing(s: f64) -> Result<()> {
    if !s.is_finite() || s <= 0.0 {
        return Err(Error::validation(format!("spacing must be > 0, got {s}")));
    }
    Ok(())
}
