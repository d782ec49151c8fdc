//! River occupancy maps and the geometric substrate derived from them.
//!
//! A [`RiverMap`] is a binary occupancy grid: `Free` cells are water inside
//! the region of interest, `Obstacle` cells are land or out-of-scope water.
//! The loader enforces the structural invariants every downstream module
//! relies on: a single 4-connected free component, a fully obstacle border,
//! and a record of where the river enters and leaves the map (the two
//! openings), which is what lets the bank extraction tell banks apart from
//! the inlet/outlet cross-sections.

mod contours;
pub(crate) mod load;

pub use contours::{
    contours_to_geojson, get_directional_contours, get_downriver_direction,
    get_downriver_direction_with, width_profile, BankContours, BankPair, FlowDirection,
    Orientation, StartEnd, WidthProfile,
};
pub use load::{from_polygon, load_geojson_polygon, load_map, load_pgm, parse_pgm, save_pgm, MapSource};

use serde::{Deserialize, Serialize};

use crate::geometry::Point;
use crate::meander::MeanderSegment;
use crate::{Error, Result};

/// Occupancy label of one grid cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cell {
    Free,
    Obstacle,
}

/// Reference that ties the local metric frame to geographic coordinates.
///
/// The local frame is anchored at (`origin_lat`, `origin_lon`) and uses an
/// equirectangular scale at the origin latitude; `rotation_rad` rotates the
/// local x axis counter-clockwise from geographic east.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoRef {
    pub origin_lat: f64,
    pub origin_lon: f64,
    pub rotation_rad: f64,
}

const EARTH_RADIUS_M: f64 = 6_371_000.0;

impl GeoRef {
    pub fn new(origin_lat: f64, origin_lon: f64) -> Self {
        Self {
            origin_lat,
            origin_lon,
            rotation_rad: 0.0,
        }
    }

    pub fn to_lat_lon(&self, p: Point) -> (f64, f64) {
        let (sin_r, cos_r) = self.rotation_rad.sin_cos();
        let east = p.x * cos_r - p.y * sin_r;
        let north = p.x * sin_r + p.y * cos_r;
        let lat = self.origin_lat + north / EARTH_RADIUS_M * 180.0 / std::f64::consts::PI;
        let lon = self.origin_lon
            + east / (EARTH_RADIUS_M * self.origin_lat.to_radians().cos()) * 180.0
                / std::f64::consts::PI;
        (lat, lon)
    }

    pub fn from_lat_lon(&self, lat: f64, lon: f64) -> Point {
        let north = (lat - self.origin_lat).to_radians() * EARTH_RADIUS_M;
        let east =
            (lon - self.origin_lon).to_radians() * EARTH_RADIUS_M * self.origin_lat.to_radians().cos();
        let (sin_r, cos_r) = self.rotation_rad.sin_cos();
        Point::new(east * cos_r + north * sin_r, -east * sin_r + north * cos_r)
    }
}

/// One open end of the river: the cross-section where the free region meets
/// the map frame (raster input) or a declared open polygon edge.
#[derive(Debug, Clone)]
pub struct Opening {
    /// Metric segment spanning the opening.
    pub segment: (Point, Point),
}

impl Opening {
    pub fn midpoint(&self) -> Point {
        self.segment.0.lerp(self.segment.1, 0.5)
    }
}

/// Binary occupancy grid with metric resolution.
///
/// Grid cell `(ix, iy)` covers the square `[ix*res, (ix+1)*res] x
/// [iy*res, (iy+1)*res]`; its center is at `((ix+0.5)*res, (iy+0.5)*res)`.
/// Row 0 is the bottom of the metric frame.
#[derive(Debug, Clone)]
pub struct RiverMap {
    width: usize,
    height: usize,
    resolution: f64,
    cells: Vec<Cell>,
    openings: Vec<Opening>,
    geo: Option<GeoRef>,
    discarded_free_cells: usize,
}

impl RiverMap {
    /// Builds a map from a raw binary grid (`true` = free), applying border
    /// closure and keeping only the largest 4-connected free component.
    ///
    /// Frame openings are detected before closure: maximal runs of free
    /// cells along one frame edge become [`Opening`]s. When `openings` is
    /// given explicitly (polygon sources) frame detection is skipped.
    pub fn from_binary(
        free: &[bool],
        width: usize,
        height: usize,
        resolution: f64,
        openings: Option<Vec<Opening>>,
        geo: Option<GeoRef>,
    ) -> Result<RiverMap> {
        if resolution <= 0.0 {
            return Err(Error::validation(format!(
                "resolution must be > 0, got {resolution}"
            )));
        }
        if width < 3 || height < 3 || free.len() != width * height {
            return Err(Error::validation("grid must be at least 3x3"));
        }

        let detected = match openings {
            Some(o) => o,
            None => detect_frame_openings(free, width, height, resolution),
        };

        let mut cells: Vec<Cell> = free
            .iter()
            .map(|&f| if f { Cell::Free } else { Cell::Obstacle })
            .collect();

        // border closure: the river must be fully enclosed
        for ix in 0..width {
            cells[ix] = Cell::Obstacle;
            cells[(height - 1) * width + ix] = Cell::Obstacle;
        }
        for iy in 0..height {
            cells[iy * width] = Cell::Obstacle;
            cells[iy * width + width - 1] = Cell::Obstacle;
        }

        let (largest, discarded) = keep_largest_component(&mut cells, width, height);
        if largest == 0 {
            return Err(Error::validation("map has zero free cells after closure"));
        }

        let map = RiverMap {
            width,
            height,
            resolution,
            cells,
            openings: detected,
            geo,
            discarded_free_cells: discarded,
        };
        Ok(map)
    }

    pub fn grid_width(&self) -> usize {
        self.width
    }

    pub fn grid_height(&self) -> usize {
        self.height
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn geo(&self) -> Option<&GeoRef> {
        self.geo.as_ref()
    }

    pub fn set_geo(&mut self, geo: Option<GeoRef>) {
        self.geo = geo;
    }

    pub fn openings(&self) -> &[Opening] {
        &self.openings
    }

    /// Free cells dropped because they belonged to a non-largest component.
    pub fn discarded_free_cells(&self) -> usize {
        self.discarded_free_cells
    }

    pub fn cell(&self, ix: usize, iy: usize) -> Cell {
        self.cells[iy * self.width + ix]
    }

    pub fn is_free(&self, ix: i64, iy: i64) -> bool {
        if ix < 0 || iy < 0 || ix >= self.width as i64 || iy >= self.height as i64 {
            return false;
        }
        self.cells[iy as usize * self.width + ix as usize] == Cell::Free
    }

    /// Grid cell containing a metric point, unclamped.
    pub fn cell_of(&self, p: Point) -> (i64, i64) {
        (
            (p.x / self.resolution).floor() as i64,
            (p.y / self.resolution).floor() as i64,
        )
    }

    pub fn cell_center(&self, ix: usize, iy: usize) -> Point {
        Point::new(
            (ix as f64 + 0.5) * self.resolution,
            (iy as f64 + 0.5) * self.resolution,
        )
    }

    pub fn is_free_at(&self, p: Point) -> bool {
        let (ix, iy) = self.cell_of(p);
        self.is_free(ix, iy)
    }

    /// Majority vote over the 3x3 neighborhood of the cell containing `p`.
    /// Cells outside the grid count as obstacles.
    pub fn is_free_at_voted(&self, p: Point) -> bool {
        let (cx, cy) = self.cell_of(p);
        let mut free = 0;
        for dy in -1..=1 {
            for dx in -1..=1 {
                if self.is_free(cx + dx, cy + dy) {
                    free += 1;
                }
            }
        }
        free > 4
    }

    pub fn free_count(&self) -> usize {
        self.cells.iter().filter(|c| **c == Cell::Free).count()
    }

    /// Metric extent of the grid.
    pub fn extent(&self) -> Point {
        Point::new(
            self.width as f64 * self.resolution,
            self.height as f64 * self.resolution,
        )
    }

    /// Distance from `p` to the nearest free cell center, searched in a
    /// window of `max_cells` around `p`. `None` when nothing is free there.
    pub fn distance_to_free(&self, p: Point, max_cells: i64) -> Option<f64> {
        let (cx, cy) = self.cell_of(p);
        let mut best: Option<f64> = None;
        for dy in -max_cells..=max_cells {
            for dx in -max_cells..=max_cells {
                if self.is_free(cx + dx, cy + dy) {
                    let c = self.cell_center((cx + dx) as usize, (cy + dy) as usize);
                    let d = p.distance(c);
                    if best.is_none_or(|b| d < b) {
                        best = Some(d);
                    }
                }
            }
        }
        best
    }

    /// True when the straight segment `a..b` stays over free cells. Uses a
    /// dense sample at half-resolution steps.
    pub fn segment_is_free(&self, a: Point, b: Point) -> bool {
        let d = a.distance(b);
        let n = (d / (self.resolution * 0.5)).ceil().max(1.0) as usize;
        for i in 0..=n {
            if !self.is_free_at(a.lerp(b, i as f64 / n as f64)) {
                return false;
            }
        }
        true
    }

    /// Ray-march from `p` along `dir` until an obstacle cell; returns the
    /// distance traveled (capped at `max_dist`).
    pub fn free_ray_length(&self, p: Point, dir: Point, max_dist: f64) -> f64 {
        let step = self.resolution * 0.5;
        let n = (max_dist / step).ceil() as usize;
        for i in 1..=n {
            let q = p + dir * (i as f64 * step);
            if !self.is_free_at(q) {
                return (i as f64 - 0.5) * step;
            }
        }
        max_dist
    }

    /// Mirrors the map vertically (rows swapped). Openings are mirrored too.
    pub fn mirrored_vertical(&self) -> RiverMap {
        let mut cells = vec![Cell::Obstacle; self.cells.len()];
        for iy in 0..self.height {
            for ix in 0..self.width {
                cells[(self.height - 1 - iy) * self.width + ix] = self.cell(ix, iy);
            }
        }
        let ext_y = self.height as f64 * self.resolution;
        let flip = |p: Point| Point::new(p.x, ext_y - p.y);
        let openings = self
            .openings
            .iter()
            .map(|o| Opening {
                segment: (flip(o.segment.0), flip(o.segment.1)),
            })
            .collect();
        RiverMap {
            width: self.width,
            height: self.height,
            resolution: self.resolution,
            cells,
            openings,
            geo: self.geo,
            discarded_free_cells: self.discarded_free_cells,
        }
    }
}

/// Detects maximal runs of free cells along each frame edge (inspected
/// before border closure). Each run becomes one opening whose segment lies
/// on the interface between the frame ring and the interior.
fn detect_frame_openings(
    free: &[bool],
    width: usize,
    height: usize,
    resolution: f64,
) -> Vec<Opening> {
    let mut openings = Vec::new();
    let at = |ix: usize, iy: usize| free[iy * width + ix];

    let mut push_run = |seg: (Point, Point)| openings.push(Opening { segment: seg });

    // west and east edges: lid is a vertical segment one cell in
    for (ix, lid_x) in [(0usize, resolution), (width - 1, (width as f64 - 1.0) * resolution)] {
        let mut run: Option<(usize, usize)> = None;
        for iy in 0..height {
            if at(ix, iy) {
                run = Some(run.map_or((iy, iy), |(a, _)| (a, iy)));
            } else if let Some((a, b)) = run.take() {
                push_run((
                    Point::new(lid_x, a as f64 * resolution),
                    Point::new(lid_x, (b + 1) as f64 * resolution),
                ));
            }
        }
        if let Some((a, b)) = run {
            push_run((
                Point::new(lid_x, a as f64 * resolution),
                Point::new(lid_x, (b + 1) as f64 * resolution),
            ));
        }
    }
    // south and north edges
    for (iy, lid_y) in [(0usize, resolution), (height - 1, (height as f64 - 1.0) * resolution)] {
        let mut run: Option<(usize, usize)> = None;
        for ix in 0..width {
            if at(ix, iy) {
                run = Some(run.map_or((ix, ix), |(a, _)| (a, ix)));
            } else if let Some((a, b)) = run.take() {
                push_run((
                    Point::new(a as f64 * resolution, lid_y),
                    Point::new((b + 1) as f64 * resolution, lid_y),
                ));
            }
        }
        if let Some((a, b)) = run {
            push_run((
                Point::new(a as f64 * resolution, lid_y),
                Point::new((b + 1) as f64 * resolution, lid_y),
            ));
        }
    }
    openings
}

/// Keeps only the largest 4-connected free component. Returns
/// (size of kept component, number of discarded free cells).
fn keep_largest_component(cells: &mut [Cell], width: usize, height: usize) -> (usize, usize) {
    let mut label = vec![0u32; cells.len()];
    let mut sizes: Vec<usize> = vec![0]; // label 0 = unlabeled
    let mut queue = Vec::new();
    for start in 0..cells.len() {
        if cells[start] != Cell::Free || label[start] != 0 {
            continue;
        }
        let id = sizes.len() as u32;
        sizes.push(0);
        queue.push(start);
        label[start] = id;
        while let Some(idx) = queue.pop() {
            sizes[id as usize] += 1;
            let (ix, iy) = (idx % width, idx / width);
            let mut visit = |jx: usize, jy: usize| {
                let j = jy * width + jx;
                if cells[j] == Cell::Free && label[j] == 0 {
                    label[j] = id;
                    queue.push(j);
                }
            };
            if ix > 0 {
                visit(ix - 1, iy);
            }
            if ix + 1 < width {
                visit(ix + 1, iy);
            }
            if iy > 0 {
                visit(ix, iy - 1);
            }
            if iy + 1 < height {
                visit(ix, iy + 1);
            }
        }
    }
    let best = (1..sizes.len()).max_by_key(|&i| sizes[i]);
    let Some(best) = best else {
        return (0, 0);
    };
    let mut discarded = 0;
    for (c, &l) in cells.iter_mut().zip(&label) {
        if *c == Cell::Free && l != best as u32 {
            *c = Cell::Obstacle;
            discarded += 1;
        }
    }
    (sizes[best], discarded)
}

/// Everything the planners need to know about one river: the map, the bank
/// contours, the coverage direction and the meander segmentation.
#[derive(Debug, Clone)]
pub struct RiverModel {
    pub map: RiverMap,
    pub contours: BankContours,
    pub flow: FlowDirection,
    pub step: crate::meander::TangentStep,
    pub segments: Vec<MeanderSegment>,
}

impl RiverModel {
    /// Runs the full analysis pipeline: contours, flow direction, tangent
    /// step, meander segmentation.
    pub fn analyze(map: RiverMap, start: Point) -> Result<RiverModel> {
        Self::analyze_with(map, start, StartEnd::Downstream, None)
    }

    pub fn analyze_with(
        map: RiverMap,
        start: Point,
        start_end: StartEnd,
        step_override: Option<f64>,
    ) -> Result<RiverModel> {
        let contours = get_directional_contours(&map, start)?;
        let flow = contours::get_downriver_direction_with(&contours, start, start_end)?;
        let mean_width = {
            let prof = width_profile(&contours);
            prof.mean_width()
        };
        let step = match step_override {
            Some(v) => crate::meander::TangentStep::new(v, map.resolution())?,
            None => crate::meander::TangentStep::for_river(map.resolution(), mean_width),
        };
        let segments = crate::meander::get_meander_segments(&map, &contours, &flow, step)?;
        Ok(RiverModel {
            map,
            contours,
            flow,
            step,
            segments,
        })
    }
}
