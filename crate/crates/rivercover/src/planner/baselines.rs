//! Baseline planners: longitudinal serpentine, transversal boustrophedon,
//! and the single-pass zig-zag.

use crate::geometry::{Point, Polyline};
use crate::river_map::{RiverMap, RiverModel};
use crate::{Error, Result};

use super::{
    cluster_by_counts, lane_polyline, push_move, round_nearest_half_up, snap_to_free,
    validate_spacing, water_direction, Algorithm, CoveragePlan, Pass, PlanElement,
    PlanOptions,
};

/// Longitudinal coverage: same-width clusters covered by a serpentine of
/// bank-parallel lanes, lane order nearest-first, odd pass counts allowed.
/// The tour is closed by a deadhead transit back to the start when the
/// serpentine parity leaves the boat at the far end.
pub fn l_cover(map: &RiverMap, start: Point, s: f64) -> Result<CoveragePlan> {
    l_cover_with(map, start, s, &PlanOptions::default())
}

pub fn l_cover_with(
    map: &RiverMap,
    start: Point,
    s: f64,
    opts: &PlanOptions,
) -> Result<CoveragePlan> {
    validate_spacing(s)?;
    let model = RiverModel::analyze_with(map.clone(), start, opts.start_end, opts.tangent_step)?;
    let profile = crate::river_map::width_profile(&model.contours);
    super::check_spacing_fits(&profile, 0.0, model.contours.length(), s)?;
    let clusters = cluster_by_counts(&model.contours, &model.flow, s, |w| {
        round_nearest_half_up(w / s, 1)
    });

    let map = &model.map;
    let contours = &model.contours;
    let origin = snap_to_free(map, start);
    let mut cursor = origin;
    let mut elements: Vec<PlanElement> = Vec::new();

    for (cid, cluster) in clusters.iter().enumerate() {
        let k = cluster.pass_count;
        // lanes at fixed fractions from the left bank, meander-agnostic
        let mut remaining: Vec<(usize, Polyline)> = (0..k)
            .map(|j| {
                let t = (j as f64 + 0.5) / k as f64;
                (
                    j,
                    lane_polyline(map, contours, cluster.start_arc, cluster.end_arc, t),
                )
            })
            .collect();
        while !remaining.is_empty() {
            // nearest-first: pick the lane whose nearest endpoint is closest
            let (pos, enter_at_start) = remaining
                .iter()
                .enumerate()
                .flat_map(|(i, (_, pl))| {
                    [
                        (i, true, cursor.distance(pl.first())),
                        (i, false, cursor.distance(pl.last())),
                    ]
                })
                .min_by(|a, b| a.2.partial_cmp(&b.2).unwrap())
                .map(|(i, fwd, _)| (i, fwd))
                .unwrap();
            let (lane_index, pl) = remaining.remove(pos);
            let polyline = if enter_at_start { pl } else { pl.reversed() };
            push_move(map, &mut elements, &mut cursor, polyline.first())?;
            let direction = water_direction(&model.flow, enter_at_start);
            cursor = polyline.last();
            elements.push(PlanElement::Pass(Pass {
                polyline,
                lane_index,
                direction,
                segment_id: cid,
            }));
        }
    }
    // closed tour: deadhead home if the serpentine ended at the far end
    push_move(map, &mut elements, &mut cursor, origin)?;

    Ok(CoveragePlan {
        elements,
        spacing: s,
        algorithm: Algorithm::LCover,
        start,
    })
}

/// Transversal coverage: cross-river transects every `s` meters of
/// centerline arc, serpentine-linked along the banks, with a return transit
/// along one bank to close the tour.
pub fn t_cover(map: &RiverMap, start: Point, s: f64) -> Result<CoveragePlan> {
    t_cover_with(map, start, s, &PlanOptions::default())
}

pub fn t_cover_with(
    map: &RiverMap,
    start: Point,
    s: f64,
    opts: &PlanOptions,
) -> Result<CoveragePlan> {
    validate_spacing(s)?;
    let model = RiverModel::analyze_with(map.clone(), start, opts.start_end, opts.tangent_step)?;
    let map = &model.map;
    let contours = &model.contours;
    let total = contours.length();
    if total < s {
        return Err(Error::infeasible("river shorter than one transect spacing"));
    }
    // evenly spaced transects covering both ends; gap <= s
    let n_gaps = (total / s).ceil().max(1.0);
    let gap = total / n_gaps;
    let n_transects = n_gaps as usize + 1;
    let origin = snap_to_free(map, start);
    let mut cursor = origin;
    let mut elements: Vec<PlanElement> = Vec::new();
    let mut left_to_right = true;

    let mut prev_arc: Option<f64> = None;
    for i in 0..n_transects {
        let arc = (i as f64 * gap).min(total - 0.25 * map.resolution());
        let (l, r) = contours.section_at(arc);
        let width = l.distance(r).max(1e-9);
        let inset = (1.5 * map.resolution() / width).min(0.45);
        let (a, b) = (l.lerp(r, inset), l.lerp(r, 1.0 - inset));
        let (from, to) = if left_to_right { (a, b) } else { (b, a) };
        // serpentine link along the bank from the previous transect end
        if let Some(pa) = prev_arc {
            let t_link = if left_to_right { inset } else { 1.0 - inset };
            let link = lane_polyline(map, contours, pa, arc, t_link);
            push_move(map, &mut elements, &mut cursor, link.first())?;
            elements.push(PlanElement::Connector(link));
            cursor = elements.last().unwrap().polyline().last();
        }
        push_move(map, &mut elements, &mut cursor, from)?;
        let polyline = Polyline::new(vec![from, to]);
        cursor = to;
        elements.push(PlanElement::Pass(Pass {
            polyline,
            lane_index: i,
            direction: water_direction(&model.flow, true),
            segment_id: 0,
        }));
        left_to_right = !left_to_right;
        prev_arc = Some(arc);
    }
    // return along one bank to the start
    let t_return = 0.1;
    let back = lane_polyline(map, contours, 0.0, prev_arc.unwrap_or(0.0), t_return).reversed();
    push_move(map, &mut elements, &mut cursor, back.first())?;
    cursor = back.last();
    elements.push(PlanElement::Connector(back));
    push_move(map, &mut elements, &mut cursor, origin)?;

    Ok(CoveragePlan {
        elements,
        spacing: s,
        algorithm: Algorithm::TCover,
        start,
    })
}

/// Single-pass zig-zag: alternate bank touch points advancing `2*s` per
/// bounce. Not a closed tour, and not complete coverage on wide rivers.
pub fn z_cover(map: &RiverMap, start: Point, s: f64) -> Result<CoveragePlan> {
    z_cover_with(map, start, s, &PlanOptions::default())
}

pub fn z_cover_with(
    map: &RiverMap,
    start: Point,
    s: f64,
    opts: &PlanOptions,
) -> Result<CoveragePlan> {
    validate_spacing(s)?;
    let model = RiverModel::analyze_with(map.clone(), start, opts.start_end, opts.tangent_step)?;
    let map = &model.map;
    let contours = &model.contours;
    let total = contours.length();
    let advance = 2.0 * s;
    if total < advance {
        return Err(Error::infeasible("river shorter than one zig-zag bounce"));
    }
    // evenly spaced touch points, advance per bounce ~ 2 s
    let bounces = ((total / advance).round().max(1.0)) as usize;
    let step = total / bounces as f64;
    let origin = snap_to_free(map, start);
    let mut cursor = origin;
    let mut elements: Vec<PlanElement> = Vec::new();

    let touch = |i: usize| -> Point {
        let arc = (i as f64 * step).min(total - 0.25 * map.resolution());
        let (l, r) = contours.section_at(arc);
        let width = l.distance(r).max(1e-9);
        let inset = (1.5 * map.resolution() / width).min(0.45);
        if i.is_multiple_of(2) {
            l.lerp(r, inset)
        } else {
            l.lerp(r, 1.0 - inset)
        }
    };

    push_move(map, &mut elements, &mut cursor, touch(0))?;
    for i in 0..bounces {
        // each leg starts where the previous one ended
        let (a, b) = (touch(i), touch(i + 1));
        let polyline = if map.segment_is_free(a, b) {
            Polyline::new(vec![a, b])
        } else {
            super::create_pass_between(map, a, b)?
        };
        elements.push(PlanElement::Pass(Pass {
            polyline,
            lane_index: 0,
            direction: water_direction(&model.flow, true),
            segment_id: i,
        }));
    }

    Ok(CoveragePlan {
        elements,
        spacing: s,
        algorithm: Algorithm::ZCover,
        start,
    })
}
