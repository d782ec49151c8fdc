//! Planar geometry primitives shared by the mapping and planning modules.
//!
//! Everything works in a projected metric frame (meters). Polylines carry a
//! cumulative arc-length table so positions, tangents and sub-ranges can be
//! queried by arc length in O(log n).

use std::ops::{Add, Div, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

/// A point (or free vector) in the metric plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the cross product; positive when `other` is to the left.
    pub fn cross(self, other: Point) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, other: Point) -> f64 {
        (self - other).norm()
    }

    /// Unit vector in the same direction. Returns `None` for near-zero vectors.
    pub fn normalized(self) -> Option<Point> {
        let n = self.norm();
        if n < 1e-12 {
            None
        } else {
            Some(self / n)
        }
    }

    /// Counter-clockwise perpendicular (rotate by +90 degrees).
    pub fn perp(self) -> Point {
        Point::new(-self.y, self.x)
    }

    pub fn lerp(self, other: Point, t: f64) -> Point {
        self + (other - self) * t
    }

    /// Angle of this vector in radians, in (-pi, pi].
    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }

    /// Unsigned angle between two vectors in radians.
    pub fn angle_between(self, other: Point) -> f64 {
        let d = self.dot(other);
        let c = self.cross(other);
        c.atan2(d).abs()
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, rhs: Point) -> Point {
        Point::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, rhs: Point) -> Point {
        Point::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, rhs: f64) -> Point {
        Point::new(self.x * rhs, self.y * rhs)
    }
}

impl Div<f64> for Point {
    type Output = Point;
    fn div(self, rhs: f64) -> Point {
        Point::new(self.x / rhs, self.y / rhs)
    }
}

impl Neg for Point {
    type Output = Point;
    fn neg(self) -> Point {
        Point::new(-self.x, -self.y)
    }
}

/// An open polyline with a precomputed cumulative arc-length table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polyline {
    points: Vec<Point>,
    cum: Vec<f64>,
}

impl Polyline {
    /// Builds a polyline, dropping consecutive duplicate vertices.
    pub fn new(points: Vec<Point>) -> Self {
        let mut pts: Vec<Point> = Vec::with_capacity(points.len());
        for p in points {
            if pts.last().is_none_or(|q| q.distance(p) > 1e-9) {
                pts.push(p);
            }
        }
        let mut cum = Vec::with_capacity(pts.len());
        let mut acc = 0.0;
        for (i, p) in pts.iter().enumerate() {
            if i > 0 {
                acc += pts[i - 1].distance(*p);
            }
            cum.push(acc);
        }
        Self { points: pts, cum }
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn length(&self) -> f64 {
        self.cum.last().copied().unwrap_or(0.0)
    }

    pub fn first(&self) -> Point {
        self.points[0]
    }

    pub fn last(&self) -> Point {
        *self.points.last().unwrap()
    }

    pub fn arc_of_vertex(&self, i: usize) -> f64 {
        self.cum[i]
    }

    /// Index of the segment containing arc `s` and the fraction within it.
    fn locate(&self, s: f64) -> (usize, f64) {
        let s = s.clamp(0.0, self.length());
        let i = match self
            .cum
            .binary_search_by(|c| c.partial_cmp(&s).unwrap())
        {
            Ok(i) => i.min(self.points.len().saturating_sub(2)),
            Err(i) => i.saturating_sub(1).min(self.points.len().saturating_sub(2)),
        };
        let seg = self.cum[i + 1] - self.cum[i];
        let t = if seg > 1e-12 { (s - self.cum[i]) / seg } else { 0.0 };
        (i, t)
    }

    /// Point at arc length `s` from the first vertex (clamped to the ends).
    pub fn point_at(&self, s: f64) -> Point {
        if self.points.len() == 1 {
            return self.points[0];
        }
        let (i, t) = self.locate(s);
        self.points[i].lerp(self.points[i + 1], t)
    }

    /// Unit direction of the segment under arc length `s`.
    pub fn segment_dir_at(&self, s: f64) -> Point {
        if self.points.len() < 2 {
            return Point::new(1.0, 0.0);
        }
        let (i, _) = self.locate(s);
        (self.points[i + 1] - self.points[i])
            .normalized()
            .unwrap_or(Point::new(1.0, 0.0))
    }

    /// Arc position of the closest point on the polyline to `p`, with the
    /// closest point itself and its distance.
    pub fn nearest(&self, p: Point) -> (f64, Point, f64) {
        let mut best = (0.0, self.points[0], p.distance(self.points[0]));
        for i in 0..self.points.len().saturating_sub(1) {
            let a = self.points[i];
            let b = self.points[i + 1];
            let ab = b - a;
            let l2 = ab.dot(ab);
            let t = if l2 > 1e-18 {
                ((p - a).dot(ab) / l2).clamp(0.0, 1.0)
            } else {
                0.0
            };
            let q = a.lerp(b, t);
            let d = p.distance(q);
            if d < best.2 {
                best = (self.cum[i] + t * l2.sqrt(), q, d);
            }
        }
        best
    }

    /// Like [`Polyline::nearest`], restricted to arcs within `[lo, hi]`.
    pub fn nearest_in_range(&self, p: Point, lo: f64, hi: f64) -> (f64, Point, f64) {
        let lo = lo.clamp(0.0, self.length());
        let hi = hi.clamp(0.0, self.length());
        let mut best: Option<(f64, Point, f64)> = None;
        for i in 0..self.points.len().saturating_sub(1) {
            if self.cum[i + 1] < lo || self.cum[i] > hi {
                continue;
            }
            let a = self.points[i];
            let b = self.points[i + 1];
            let ab = b - a;
            let l2 = ab.dot(ab);
            let seg_len = l2.sqrt();
            let mut t = if l2 > 1e-18 {
                ((p - a).dot(ab) / l2).clamp(0.0, 1.0)
            } else {
                0.0
            };
            // clamp the parameter so the arc stays inside [lo, hi]
            if seg_len > 1e-12 {
                let t_lo = ((lo - self.cum[i]) / seg_len).clamp(0.0, 1.0);
                let t_hi = ((hi - self.cum[i]) / seg_len).clamp(0.0, 1.0);
                t = t.clamp(t_lo, t_hi);
            }
            let q = a.lerp(b, t);
            let d = p.distance(q);
            if best.is_none_or(|b| d < b.2) {
                best = Some((self.cum[i] + t * seg_len, q, d));
            }
        }
        best.unwrap_or_else(|| self.nearest(p))
    }

    /// Sub-polyline between arc lengths `a` and `b` (a < b), inclusive of
    /// interpolated endpoints.
    pub fn slice(&self, a: f64, b: f64) -> Polyline {
        let a = a.clamp(0.0, self.length());
        let b = b.clamp(0.0, self.length());
        let mut out = vec![self.point_at(a)];
        for (i, &c) in self.cum.iter().enumerate() {
            if c > a && c < b {
                out.push(self.points[i]);
            }
        }
        out.push(self.point_at(b));
        Polyline::new(out)
    }

    pub fn reversed(&self) -> Polyline {
        let mut pts = self.points.clone();
        pts.reverse();
        Polyline::new(pts)
    }

    /// Resamples at a fixed arc step. Always keeps both endpoints.
    pub fn resample(&self, step: f64) -> Polyline {
        let total = self.length();
        if total < step || self.points.len() < 2 {
            return self.clone();
        }
        let n = (total / step).round().max(1.0) as usize;
        let mut pts = Vec::with_capacity(n + 1);
        for i in 0..=n {
            pts.push(self.point_at(total * i as f64 / n as f64));
        }
        Polyline::new(pts)
    }

    /// Douglas-Peucker simplification with absolute tolerance in meters.
    pub fn simplified(&self, tolerance: f64) -> Polyline {
        if self.points.len() < 3 {
            return self.clone();
        }
        let mut keep = vec![false; self.points.len()];
        keep[0] = true;
        keep[self.points.len() - 1] = true;
        let mut stack = vec![(0usize, self.points.len() - 1)];
        while let Some((lo, hi)) = stack.pop() {
            if hi <= lo + 1 {
                continue;
            }
            let a = self.points[lo];
            let b = self.points[hi];
            let mut max_d = -1.0;
            let mut max_i = lo;
            for i in lo + 1..hi {
                let d = point_segment_distance(self.points[i], a, b);
                if d > max_d {
                    max_d = d;
                    max_i = i;
                }
            }
            if max_d > tolerance {
                keep[max_i] = true;
                stack.push((lo, max_i));
                stack.push((max_i, hi));
            }
        }
        let pts = self
            .points
            .iter()
            .zip(&keep)
            .filter(|(_, k)| **k)
            .map(|(p, _)| *p)
            .collect();
        Polyline::new(pts)
    }

    /// Moving-average smoothing over a centered odd window; endpoints fixed.
    pub fn smoothed(&self, window: usize) -> Polyline {
        let n = self.points.len();
        if n < 3 || window < 3 {
            return self.clone();
        }
        let half = window / 2;
        let mut pts = Vec::with_capacity(n);
        for i in 0..n {
            if i == 0 || i == n - 1 {
                pts.push(self.points[i]);
                continue;
            }
            let lo = i.saturating_sub(half);
            let hi = (i + half).min(n - 1);
            let mut acc = Point::new(0.0, 0.0);
            for p in &self.points[lo..=hi] {
                acc = acc + *p;
            }
            pts.push(acc / (hi - lo + 1) as f64);
        }
        Polyline::new(pts)
    }

    /// Number of times the polyline crosses the open segment `(a, b)`.
    pub fn crossings_of_segment(&self, a: Point, b: Point) -> usize {
        let mut count = 0;
        for w in self.points.windows(2) {
            if segments_intersect(w[0], w[1], a, b) {
                count += 1;
            }
        }
        count
    }
}

/// Distance from point `p` to segment `ab`.
pub fn point_segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let ab = b - a;
    let l2 = ab.dot(ab);
    if l2 < 1e-18 {
        return p.distance(a);
    }
    let t = ((p - a).dot(ab) / l2).clamp(0.0, 1.0);
    p.distance(a.lerp(b, t))
}

/// Intersection of two infinite lines given as point + direction.
/// Returns `None` when the directions are parallel within `angle_tol` radians.
pub fn line_intersection(p1: Point, d1: Point, p2: Point, d2: Point, angle_tol: f64) -> Option<Point> {
    let denom = d1.cross(d2);
    let sin_angle = denom / (d1.norm() * d2.norm()).max(1e-18);
    if sin_angle.abs() < angle_tol.sin().abs().max(1e-15) {
        return None;
    }
    let t = (p2 - p1).cross(d2) / denom;
    Some(p1 + d1 * t)
}

/// Proper or touching intersection test for closed segments `ab` and `cd`.
pub fn segments_intersect(a: Point, b: Point, c: Point, d: Point) -> bool {
    let d1 = (b - a).cross(c - a);
    let d2 = (b - a).cross(d - a);
    let d3 = (d - c).cross(a - c);
    let d4 = (d - c).cross(b - c);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    false
}

/// Even-odd point-in-polygon test; the ring does not need to repeat its
/// first vertex.
pub fn point_in_polygon(p: Point, ring: &[Point]) -> bool {
    let n = ring.len();
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (ring[i], ring[j]);
        if (a.y > p.y) != (b.y > p.y) {
            let x_int = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
            if p.x < x_int {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

/// Circumcenter of three points, `None` when nearly collinear.
pub fn circumcenter(a: Point, b: Point, c: Point) -> Option<Point> {
    let d = 2.0 * (a.x * (b.y - c.y) + b.x * (c.y - a.y) + c.x * (a.y - b.y));
    if d.abs() < 1e-9 {
        return None;
    }
    let a2 = a.dot(a);
    let b2 = b.dot(b);
    let c2 = c.dot(c);
    let ux = (a2 * (b.y - c.y) + b2 * (c.y - a.y) + c2 * (a.y - b.y)) / d;
    let uy = (a2 * (c.x - b.x) + b2 * (a.x - c.x) + c2 * (b.x - a.x)) / d;
    Some(Point::new(ux, uy))
}

/// Total absolute heading change along a polyline, in radians.
pub fn total_turning(points: &[Point]) -> f64 {
    let mut total = 0.0;
    for w in points.windows(3) {
        let d1 = w[1] - w[0];
        let d2 = w[2] - w[1];
        if let (Some(u), Some(v)) = (d1.normalized(), d2.normalized()) {
            total += u.angle_between(v);
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn polyline_arc_queries() {
        let p = Polyline::new(vec![
            Point::new(0.0, 0.0),
            Point::new(10.0, 0.0),
            Point::new(10.0, 10.0),
        ]);
        assert_relative_eq!(p.length(), 20.0);
        let q = p.point_at(15.0);
        assert_relative_eq!(q.x, 10.0);
        assert_relative_eq!(q.y, 5.0);
        let d = p.segment_dir_at(5.0);
        assert_relative_eq!(d.x, 1.0);
    }

    #[test]
    fn slice_preserves_interior_vertices() {
        let p = Polyline::new(vec![
            Point::new(0.0, 0.0),
            Point::new(10.0, 0.0),
            Point::new(10.0, 10.0),
        ]);
        let s = p.slice(5.0, 15.0);
        assert_eq!(s.len(), 3);
        assert_relative_eq!(s.length(), 10.0);
    }

    #[test]
    fn simplify_collinear_chain() {
        let pts: Vec<Point> = (0..100).map(|i| Point::new(i as f64, 0.0)).collect();
        let p = Polyline::new(pts).simplified(0.1);
        assert_eq!(p.len(), 2);
    }

    #[test]
    fn line_intersection_perpendicular() {
        let p = line_intersection(
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(5.0, -3.0),
            Point::new(0.0, 1.0),
            0.001,
        )
        .unwrap();
        assert_relative_eq!(p.x, 5.0);
        assert_relative_eq!(p.y, 0.0);
    }

    #[test]
    fn line_intersection_parallel_is_none() {
        assert!(line_intersection(
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(0.0, 1.0),
            Point::new(1.0, 1e-6),
            0.01
        )
        .is_none());
    }

    #[test]
    fn circumcenter_of_circle_points() {
        let r = 100.0;
        let pts: Vec<Point> = [0.0f64, 0.7, 1.4]
            .iter()
            .map(|t| Point::new(r * t.cos(), r * t.sin()))
            .collect();
        let c = circumcenter(pts[0], pts[1], pts[2]).unwrap();
        assert!(c.norm() < 1e-6);
    }

    #[test]
    fn nearest_point_on_polyline() {
        let p = Polyline::new(vec![Point::new(0.0, 0.0), Point::new(10.0, 0.0)]);
        let (arc, q, d) = p.nearest(Point::new(3.0, 4.0));
        assert_relative_eq!(arc, 3.0);
        assert_relative_eq!(q.y, 0.0);
        assert_relative_eq!(d, 4.0);
    }
}
