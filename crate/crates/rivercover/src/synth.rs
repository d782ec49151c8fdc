//! Synthetic river generators for tests, examples and demos.
//!
//! Each builder produces a rasterized [`RiverMap`], a start point placed at
//! one river end, and the analytic centerline the map was built from, so
//! geometric results can be checked against closed forms.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::geometry::{Point, Polyline};
use crate::river_map::{load::from_polygon, GeoRef, RiverMap};
use crate::Result;

/// Width of the channel as a function of fractional position along the
/// centerline parameter.
#[derive(Debug, Clone, Copy)]
pub enum WidthFn {
    Constant(f64),
    /// Linear taper over the full length.
    Taper { from: f64, to: f64 },
    /// Step between two widths with a short linear ramp centered at
    /// `at_frac`, ramp extent `ramp_frac` of the full length.
    Step {
        first: f64,
        second: f64,
        at_frac: f64,
        ramp_frac: f64,
    },
}

impl WidthFn {
    pub fn at(&self, frac: f64) -> f64 {
        match *self {
            WidthFn::Constant(w) => w,
            WidthFn::Taper { from, to } => from + (to - from) * frac.clamp(0.0, 1.0),
            WidthFn::Step {
                first,
                second,
                at_frac,
                ramp_frac,
            } => {
                let half = ramp_frac / 2.0;
                if frac < at_frac - half {
                    first
                } else if frac > at_frac + half {
                    second
                } else {
                    let t = (frac - (at_frac - half)) / ramp_frac;
                    first + (second - first) * t
                }
            }
        }
    }
}

/// A generated fixture: the raster map, the start point, and the analytic
/// centerline in map coordinates.
#[derive(Debug, Clone)]
pub struct SynthRiver {
    pub map: RiverMap,
    pub start: Point,
    pub centerline: Polyline,
}

/// Straight west-to-east rectangular river.
pub fn rectangle_river(length: f64, width: f64, resolution: f64) -> Result<SynthRiver> {
    let ring = vec![
        Point::new(0.0, 0.0),
        Point::new(length, 0.0),
        Point::new(length, width),
        Point::new(0.0, width),
    ];
    let map = from_polygon(&ring, [1, 3], resolution, None)?;
    let shift = 1.5 * resolution;
    let start = Point::new(shift + 2.0 * resolution, shift + width / 2.0);
    let centerline = Polyline::new(vec![
        Point::new(shift, shift + width / 2.0),
        Point::new(shift + length, shift + width / 2.0),
    ]);
    Ok(SynthRiver {
        map,
        start,
        centerline,
    })
}

/// Sinusoidal river description.
#[derive(Debug, Clone, Copy)]
pub struct SineRiver {
    /// Number of half-wavelengths (= number of bends).
    pub half_waves: usize,
    pub wavelength: f64,
    pub amplitude: f64,
    pub width: WidthFn,
    pub resolution: f64,
}

impl SineRiver {
    /// Scales the wavelength so the centerline arc length hits `target`,
    /// keeping the amplitude-to-wavelength ratio fixed.
    pub fn with_arc_length(mut self, target: f64) -> SineRiver {
        let ratio = self.amplitude / self.wavelength;
        let mut lo = target / self.half_waves as f64 * 0.5;
        let mut hi = target / self.half_waves as f64 * 2.2;
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            self.wavelength = mid;
            self.amplitude = ratio * mid;
            let arc = self.centerline_points().map_or(0.0, |p| Polyline::new(p).length());
            if arc > target {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        self
    }

    fn centerline_points(&self) -> Option<Vec<Point>> {
        let x_max = self.half_waves as f64 * self.wavelength / 2.0;
        let n = (x_max / 1.0).ceil() as usize; // 1 m parameter step
        if n < 2 {
            return None;
        }
        let k = 2.0 * std::f64::consts::PI / self.wavelength;
        Some(
            (0..=n)
                .map(|i| {
                    let x = x_max * i as f64 / n as f64;
                    Point::new(x, self.amplitude * (k * x).sin())
                })
                .collect(),
        )
    }
}

/// Builds a sinusoidal river. The start point sits at the x = 0 end.
pub fn sine_river(spec: SineRiver) -> Result<SynthRiver> {
    let pts = spec
        .centerline_points()
        .ok_or_else(|| crate::Error::validation("sine river too short"))?;
    banded_river(&pts, spec.width, spec.resolution, None)
}

/// Quarter-annulus river between two radii, start at the angle-0 end.
pub fn annulus_river(r_inner: f64, r_outer: f64, resolution: f64) -> Result<SynthRiver> {
    let r_mid = 0.5 * (r_inner + r_outer);
    let n = ((std::f64::consts::FRAC_PI_2 * r_mid) / 1.0).ceil() as usize;
    let pts: Vec<Point> = (0..=n)
        .map(|i| {
            let t = std::f64::consts::FRAC_PI_2 * i as f64 / n as f64;
            Point::new(r_mid * t.cos(), r_mid * t.sin())
        })
        .collect();
    banded_river(&pts, WidthFn::Constant(r_outer - r_inner), resolution, None)
}

/// Two opposite bends followed by a straight tail (C1-continuous join).
pub fn s_curve_river(
    wavelength: f64,
    amplitude: f64,
    tail: f64,
    width: f64,
    resolution: f64,
) -> Result<SynthRiver> {
    let k = 2.0 * std::f64::consts::PI / wavelength;
    let n = wavelength.ceil() as usize;
    let mut pts: Vec<Point> = (0..=n)
        .map(|i| {
            let x = wavelength * i as f64 / n as f64;
            Point::new(x, amplitude * (k * x).sin())
        })
        .collect();
    // straight tail continuing at the end slope (inflection at x = wavelength)
    let slope = amplitude * k;
    let dir = Point::new(1.0, slope).normalized().unwrap();
    let end = *pts.last().unwrap();
    let m = (tail / 1.0).ceil() as usize;
    for i in 1..=m {
        pts.push(end + dir * (tail * i as f64 / m as f64));
    }
    banded_river(&pts, WidthFn::Constant(width), resolution, None)
}

/// Randomized meandering river with bounded curvature, for property tests.
pub fn random_river(seed: u64, approx_length: f64, s_min_width: f64, s_max_width: f64, resolution: f64) -> Result<SynthRiver> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let half_waves = rng.gen_range(2..=4usize);
    let wavelength = approx_length / half_waves as f64 * 2.0;
    let amplitude = wavelength * rng.gen_range(0.08..0.14);
    let w0 = rng.gen_range(s_min_width..s_max_width);
    let w1 = rng.gen_range(s_min_width..s_max_width);
    let phase = rng.gen_range(0.0..std::f64::consts::PI);
    let k = 2.0 * std::f64::consts::PI / wavelength;
    let x_max = half_waves as f64 * wavelength / 2.0;
    let n = x_max.ceil() as usize;
    let pts: Vec<Point> = (0..=n)
        .map(|i| {
            let x = x_max * i as f64 / n as f64;
            let y = amplitude * (k * x + phase).sin() - amplitude * phase.sin();
            Point::new(x, y)
        })
        .collect();
    banded_river(&pts, WidthFn::Taper { from: w0, to: w1 }, resolution, None)
}

/// Builds a river band around an arbitrary centerline polyline.
pub fn banded_river(
    centerline: &[Point],
    width: WidthFn,
    resolution: f64,
    geo: Option<GeoRef>,
) -> Result<SynthRiver> {
    let center = Polyline::new(centerline.to_vec());
    let total = center.length();
    let step = (resolution * 0.75).min(total / 16.0);
    let n = (total / step).ceil() as usize;
    let mut left: Vec<Point> = Vec::with_capacity(n + 1);
    let mut right: Vec<Point> = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let arc = total * i as f64 / n as f64;
        let p = center.point_at(arc);
        let t = center.segment_dir_at((arc - 0.01).max(0.0));
        let normal = t.perp();
        let w = width.at(arc / total);
        left.push(p + normal * (w / 2.0));
        right.push(p - normal * (w / 2.0));
    }
    let mut ring = left.clone();
    ring.extend(right.iter().rev());
    // open edges: far cap connects left[n] -> right[n] (edge n);
    // near cap connects right[0] -> left[0] (last edge)
    let open_far = left.len() - 1;
    let open_near = ring.len() - 1;
    let map = from_polygon(&ring, [open_far, open_near], resolution, geo)?;

    // from_polygon shifts geometry so the bounding box sits at 1.5 cells
    let min_x = ring.iter().map(|p| p.x).fold(f64::INFINITY, f64::min);
    let min_y = ring.iter().map(|p| p.y).fold(f64::INFINITY, f64::min);
    let shift = Point::new(1.5 * resolution - min_x, 1.5 * resolution - min_y);
    let shifted_center = Polyline::new(centerline.iter().map(|p| *p + shift).collect());
    let start = shifted_center.point_at(2.0 * resolution);
    Ok(SynthRiver {
        map,
        start,
        centerline: shifted_center,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rectangle_has_two_openings() {
        let r = rectangle_river(300.0, 60.0, 3.0).unwrap();
        assert_eq!(r.map.openings().len(), 2);
        assert!(r.map.is_free_at(r.start));
    }

    #[test]
    fn sine_arc_length_scaling() {
        let spec = SineRiver {
            half_waves: 3,
            wavelength: 900.0,
            amplitude: 110.0,
            width: WidthFn::Constant(90.0),
            resolution: 3.0,
        }
        .with_arc_length(2760.0);
        let pts = spec.centerline_points().unwrap();
        let arc = Polyline::new(pts).length();
        assert!((arc - 2760.0).abs() < 5.0, "arc {arc}");
    }

    #[test]
    fn annulus_is_quarter_ring() {
        let r = annulus_river(100.0, 180.0, 2.0).unwrap();
        // area of the quarter ring: pi/4 (R^2 - r^2)
        let expected = std::f64::consts::FRAC_PI_4 * (180.0f64.powi(2) - 100.0f64.powi(2));
        let actual = r.map.free_count() as f64 * 4.0;
        assert!(
            (actual - expected).abs() / expected < 0.03,
            "area {actual} vs {expected}"
        );
    }

    #[test]
    fn random_river_is_loadable() {
        for seed in 0..3 {
            let r = random_river(seed, 900.0, 60.0, 98.0, 3.0).unwrap();
            assert_eq!(r.map.openings().len(), 2, "seed {seed}");
            assert!(r.map.is_free_at(r.start), "seed {seed}");
        }
    }
}
