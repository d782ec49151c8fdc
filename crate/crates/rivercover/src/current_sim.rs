//! Meander-conditioned current synthesis and plan traversal timing.
//!
//! The field encodes the one structural fact the planners exploit: within a
//! bend, the downstream current is slowest along the inner bank and fastest
//! along the outer bank. Magnitude rises with the cross-fraction from the
//! inner bank (linear by default, power-law optionally); straight reaches
//! carry the uniform mid value; magnitudes blend linearly across inflection
//! sections. Direction is always the local downstream centerline tangent.

use std::collections::VecDeque;

use crate::geometry::{total_turning, Point};
use crate::meander::SegmentKind;
use crate::planner::{CoveragePlan, Direction, PlanElement};
use crate::river_map::RiverModel;
use crate::{Error, Result};

/// Cross-channel magnitude profile, as a function of the cross-fraction
/// `u` in `[0, 1]` measured from the inner bank.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CurrentProfile {
    Linear,
    /// `u^gamma`; gamma > 1 concentrates the fast water near the outer bank.
    PowerLaw(f64),
}

impl CurrentProfile {
    fn shape(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        match *self {
            CurrentProfile::Linear => u,
            CurrentProfile::PowerLaw(gamma) => u.powf(gamma),
        }
    }
}

/// Upstream-to-downstream time ratio observed on the outer bank of a bend,
/// used to calibrate synthetic fields against the field trials.
pub const OUTER_LANE_UP_DOWN_RATIO: f64 = 1.47;

/// Per-cell water velocity over the free region.
#[derive(Debug, Clone)]
pub struct CurrentField {
    width: usize,
    height: usize,
    resolution: f64,
    /// (vx, vy) per cell; zero over obstacle cells.
    vel: Vec<[f64; 2]>,
    free: Vec<bool>,
    pub v_min: f64,
    pub v_max: f64,
}

impl CurrentField {
    /// Uniform field over the free cells of a map (testing helper).
    pub fn uniform(model: &RiverModel, velocity: Point) -> CurrentField {
        let map = &model.map;
        let (w, h) = (map.grid_width(), map.grid_height());
        let mut vel = vec![[0.0, 0.0]; w * h];
        let mut free = vec![false; w * h];
        for iy in 0..h {
            for ix in 0..w {
                if map.is_free(ix as i64, iy as i64) {
                    vel[iy * w + ix] = [velocity.x, velocity.y];
                    free[iy * w + ix] = true;
                }
            }
        }
        let mag = velocity.norm();
        CurrentField {
            width: w,
            height: h,
            resolution: map.resolution(),
            vel,
            free,
            v_min: mag,
            v_max: mag,
        }
    }

    pub fn velocity_at(&self, p: Point) -> Point {
        let ix = (p.x / self.resolution).floor() as i64;
        let iy = (p.y / self.resolution).floor() as i64;
        if ix < 0 || iy < 0 || ix >= self.width as i64 || iy >= self.height as i64 {
            return Point::new(0.0, 0.0);
        }
        let v = self.vel[iy as usize * self.width + ix as usize];
        Point::new(v[0], v[1])
    }

    pub fn is_on_water(&self, p: Point) -> bool {
        let ix = (p.x / self.resolution).floor() as i64;
        let iy = (p.y / self.resolution).floor() as i64;
        ix >= 0
            && iy >= 0
            && ix < self.width as i64
            && iy < self.height as i64
            && self.free[iy as usize * self.width + ix as usize]
    }

    /// CSV export: `cell_x,cell_y,vx,vy` for free cells.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("cell_x,cell_y,vx,vy\n");
        for iy in 0..self.height {
            for ix in 0..self.width {
                let i = iy * self.width + ix;
                if self.free[i] {
                    out.push_str(&format!(
                        "{ix},{iy},{:.4},{:.4}\n",
                        self.vel[i][0], self.vel[i][1]
                    ));
                }
            }
        }
        out
    }
}

/// Synthesizes the meander-conditioned field with a linear cross profile.
pub fn synth_current_field(model: &RiverModel, v_min: f64, v_max: f64) -> Result<CurrentField> {
    synth_current_field_with(model, v_min, v_max, CurrentProfile::Linear)
}

pub fn synth_current_field_with(
    model: &RiverModel,
    v_min: f64,
    v_max: f64,
    profile: CurrentProfile,
) -> Result<CurrentField> {
    if v_min > v_max || v_min < 0.0 {
        return Err(Error::validation(format!(
            "need 0 <= v_min <= v_max, got v_min={v_min}, v_max={v_max}"
        )));
    }
    let map = &model.map;
    let (w, h) = (map.grid_width(), map.grid_height());
    let res = map.resolution();
    let centerline = &model.contours.centerline;

    // propagate the nearest centerline arc to every free cell by BFS
    let mut arc_of = vec![f64::NAN; w * h];
    let mut queue = VecDeque::new();
    let pts = centerline.points();
    for i in 0..pts.len().saturating_sub(1) {
        let seg_len = pts[i].distance(pts[i + 1]);
        let steps = (seg_len / (0.5 * res)).ceil().max(1.0) as usize;
        for k in 0..=steps {
            let t = k as f64 / steps as f64;
            let p = pts[i].lerp(pts[i + 1], t);
            let (cx, cy) = map.cell_of(p);
            if cx < 0 || cy < 0 || cx >= w as i64 || cy >= h as i64 {
                continue;
            }
            let idx = cy as usize * w + cx as usize;
            if arc_of[idx].is_nan() {
                arc_of[idx] = centerline.arc_of_vertex(i) + seg_len * t;
                queue.push_back(idx);
            }
        }
    }
    while let Some(idx) = queue.pop_front() {
        let (ix, iy) = ((idx % w) as i64, (idx / w) as i64);
        for (dx, dy) in [(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1)] {
            let (nx, ny) = (ix + dx, iy + dy);
            if nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                continue;
            }
            let nidx = ny as usize * w + nx as usize;
            if arc_of[nidx].is_nan() {
                arc_of[nidx] = arc_of[idx];
                queue.push_back(nidx);
            }
        }
    }

    let total = model.contours.length();
    let mid = 0.5 * (v_min + v_max);
    let downstream_sign = model.flow.downstream_arc_sign();

    // magnitude as a function of arc and cross-fraction-from-left, blending
    // linearly across segment boundaries over half a width
    let magnitude = |arc: f64, t_left: f64| -> f64 {
        let seg_mag = |si: usize| -> f64 {
            let seg = &model.segments[si];
            match seg.kind {
                SegmentKind::Straight => mid,
                SegmentKind::Bend => {
                    let u = match seg.inner_bank {
                        crate::meander::BankSide::Left => t_left,
                        crate::meander::BankSide::Right => 1.0 - t_left,
                    };
                    v_min + (v_max - v_min) * profile.shape(u)
                }
            }
        };
        let si = model
            .segments
            .iter()
            .position(|s| arc >= s.start_arc && arc <= s.end_arc)
            .unwrap_or(model.segments.len() - 1);
        let blend = 0.5 * model.contours.width_at(arc);
        let seg = &model.segments[si];
        if si > 0 && arc - seg.start_arc < blend {
            let f = 0.5 + 0.5 * (arc - seg.start_arc) / blend;
            seg_mag(si - 1) * (1.0 - f) + seg_mag(si) * f
        } else if si + 1 < model.segments.len() && seg.end_arc - arc < blend {
            let f = 0.5 + 0.5 * (seg.end_arc - arc) / blend;
            seg_mag(si + 1) * (1.0 - f) + seg_mag(si) * f
        } else {
            seg_mag(si)
        }
    };

    let mut vel = vec![[0.0, 0.0]; w * h];
    let mut free = vec![false; w * h];
    for iy in 0..h {
        for ix in 0..w {
            let idx = iy * w + ix;
            if !map.is_free(ix as i64, iy as i64) {
                continue;
            }
            free[idx] = true;
            let p = map.cell_center(ix, iy);
            let arc = if arc_of[idx].is_nan() {
                centerline.nearest(p).0
            } else {
                arc_of[idx].clamp(0.0, total)
            };
            let (l, r) = model.contours.section_at(arc);
            let axis = r - l;
            let denom = axis.dot(axis).max(1e-12);
            let t_left = ((p - l).dot(axis) / denom).clamp(0.0, 1.0);
            let mag = magnitude(arc, t_left);
            let tangent = centerline.segment_dir_at(arc) * downstream_sign;
            vel[idx] = [tangent.x * mag, tangent.y * mag];
        }
    }

    Ok(CurrentField {
        width: w,
        height: h,
        resolution: res,
        vel,
        free,
        v_min,
        v_max,
    })
}

/// Calibrated field: the outer-lane current speed is set so that the
/// upstream-to-downstream time ratio on that lane equals `ratio`.
/// `outer_lane_u` is the cross-fraction of the outermost lane and
/// `vmin_fraction` fixes `v_min` as a fraction of `v_max`.
pub fn calibrated_field(
    model: &RiverModel,
    boat_speed: f64,
    outer_lane_u: f64,
    ratio: f64,
    vmin_fraction: f64,
) -> Result<CurrentField> {
    if ratio <= 1.0 {
        return Err(Error::validation("calibration ratio must exceed 1"));
    }
    let v_outer = boat_speed * (ratio - 1.0) / (ratio + 1.0);
    let v_max = v_outer / (vmin_fraction + (1.0 - vmin_fraction) * outer_lane_u);
    let v_min = vmin_fraction * v_max;
    synth_current_field(model, v_min, v_max)
}

/// Boat kinematics: constant speed through water plus an optional turning
/// cost.
#[derive(Debug, Clone, Copy)]
pub struct BoatModel {
    pub speed_through_water: f64,
    /// Seconds per radian of heading change.
    pub turn_penalty: f64,
}

impl BoatModel {
    pub fn new(speed_through_water: f64) -> BoatModel {
        BoatModel {
            speed_through_water,
            turn_penalty: 0.0,
        }
    }
}

/// Timing of one plan element.
#[derive(Debug, Clone)]
pub struct ElementTime {
    pub is_pass: bool,
    pub segment_id: usize,
    pub lane_index: usize,
    pub direction: Option<Direction>,
    pub length: f64,
    pub time: f64,
}

/// Traversal timing of a whole plan.
#[derive(Debug, Clone)]
pub struct TraversalReport {
    pub total_time: f64,
    pub total_length: f64,
    pub turn_time: f64,
    pub per_element: Vec<ElementTime>,
}

impl TraversalReport {
    /// Sum of pass times by reserved direction; connectors excluded.
    pub fn time_by_direction(&self, dir: Direction) -> f64 {
        self.per_element
            .iter()
            .filter(|e| e.is_pass && e.direction == Some(dir))
            .map(|e| e.time)
            .sum()
    }
}

/// Time to traverse a polyline against the field.
pub fn polyline_time(
    points: &[Point],
    field: &CurrentField,
    boat: &BoatModel,
) -> Result<f64> {
    let mut time = 0.0;
    for pair in points.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let len = a.distance(b);
        if len < 1e-12 {
            continue;
        }
        let dir = (b - a) / len;
        let current = field.velocity_at(a.lerp(b, 0.5));
        let ground_speed = boat.speed_through_water + current.dot(dir);
        if ground_speed <= 1e-9 {
            return Err(Error::validation(format!(
                "boat speed {} cannot make headway against current {:.2} m/s",
                boat.speed_through_water,
                current.norm()
            )));
        }
        time += len / ground_speed;
    }
    Ok(time)
}

/// Simulates traversal of a plan: sub-segment lengths over ground speed,
/// plus the turn penalty over the total heading change.
pub fn traverse_time(
    plan: &CoveragePlan,
    field: &CurrentField,
    boat: &BoatModel,
) -> Result<TraversalReport> {
    let mut per_element = Vec::with_capacity(plan.elements.len());
    let mut total_time = 0.0;
    let mut total_length = 0.0;
    let mut chain: Vec<Point> = Vec::new();
    for element in &plan.elements {
        let pts = element.polyline().points();
        let time = polyline_time(pts, field, boat)?;
        let length = element.polyline().length();
        total_time += time;
        total_length += length;
        chain.extend_from_slice(pts);
        per_element.push(match element {
            PlanElement::Pass(p) => ElementTime {
                is_pass: true,
                segment_id: p.segment_id,
                lane_index: p.lane_index,
                direction: Some(p.direction),
                length,
                time,
            },
            PlanElement::Connector(_) => ElementTime {
                is_pass: false,
                segment_id: usize::MAX,
                lane_index: usize::MAX,
                direction: None,
                length,
                time,
            },
        });
    }
    let turn_time = boat.turn_penalty * total_turning(&chain);
    Ok(TraversalReport {
        total_time: total_time + turn_time,
        total_length,
        turn_time,
        per_element,
    })
}

/// One row of a plan comparison.
#[derive(Debug, Clone)]
pub struct ComparisonRow {
    pub algorithm: String,
    pub length_m: f64,
    pub time_s: f64,
    pub ratio_vs_best: f64,
}

/// Side-by-side traversal comparison of several plans on one field.
#[derive(Debug, Clone)]
pub struct Comparison {
    pub rows: Vec<ComparisonRow>,
}

impl Comparison {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("algorithm,length_m,time_s,ratio_vs_best\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{:.1},{:.1},{:.4}\n",
                r.algorithm, r.length_m, r.time_s, r.ratio_vs_best
            ));
        }
        out
    }

    pub fn fastest(&self) -> &ComparisonRow {
        self.rows
            .iter()
            .min_by(|a, b| a.time_s.partial_cmp(&b.time_s).unwrap())
            .unwrap()
    }

    pub fn row(&self, algorithm: &str) -> Option<&ComparisonRow> {
        self.rows.iter().find(|r| r.algorithm == algorithm)
    }

    /// Time saved by `a` relative to `b`, as a percentage of `b`'s time.
    pub fn savings_pct(&self, a: &str, b: &str) -> Option<f64> {
        let ta = self.row(a)?.time_s;
        let tb = self.row(b)?.time_s;
        Some((tb - ta) / tb * 100.0)
    }
}

/// Runs the traversal simulator over several plans on the same map.
pub fn compare_plans(
    plans: &[&CoveragePlan],
    field: &CurrentField,
    boat: &BoatModel,
) -> Result<Comparison> {
    if plans.is_empty() {
        return Err(Error::validation("no plans to compare"));
    }
    let mut rows = Vec::with_capacity(plans.len());
    for plan in plans {
        // plans built on a different map will wander off this field's water
        let on_field = plan
            .elements
            .iter()
            .flat_map(|e| e.polyline().points())
            .all(|p| field.is_on_water(*p));
        if !on_field {
            return Err(Error::validation(format!(
                "plan {} does not lie on the comparison field's map",
                plan.algorithm.name()
            )));
        }
        let report = traverse_time(plan, field, boat)?;
        rows.push(ComparisonRow {
            algorithm: plan.algorithm.name().to_string(),
            length_m: report.total_length,
            time_s: report.total_time,
            ratio_vs_best: 0.0,
        });
    }
    let best = rows
        .iter()
        .map(|r| r.time_s)
        .fold(f64::INFINITY, f64::min);
    for r in rows.iter_mut() {
        r.ratio_vs_best = r.time_s / best;
    }
    Ok(Comparison { rows })
}
