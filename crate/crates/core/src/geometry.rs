//! Planar convex geometry: points, convex polygons, clipping and distances.
//!
//! Polygons are stored counter-clockwise. Regions with zero area are kept as
//! one or two vertices so that distance and containment still work on them.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance for every orientation, containment and deduplication test.
pub const EPS: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("degenerate cone: cap radius {radius} is not below apex distance {distance}")]
    DegenerateCone { radius: f64, distance: f64 },
    #[error("operation needs a non-empty region")]
    EmptyRegion,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl From<[f64; 2]> for Point {
    fn from(a: [f64; 2]) -> Self {
        Point::new(a[0], a[1])
    }
}

impl From<Point> for [f64; 2] {
    fn from(p: Point) -> Self {
        [p.x, p.y]
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn polar(r: f64, theta: f64) -> Self {
        Point::new(r * theta.cos(), r * theta.sin())
    }

    pub fn dot(self, o: Point) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn cross(self, o: Point) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn norm2(self) -> f64 {
        self.dot(self)
    }

    pub fn dist(self, o: Point) -> f64 {
        (self - o).norm()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// Rotate counter-clockwise by `theta` radians about the origin.
    pub fn rotate(self, theta: f64) -> Point {
        let (s, c) = theta.sin_cos();
        Point::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    pub fn perp(self) -> Point {
        Point::new(-self.y, self.x)
    }

    pub fn lerp(self, o: Point, t: f64) -> Point {
        self + (o - self) * t
    }

    /// Unit vector, or zero for a (near) zero vector.
    pub fn unit(self) -> Point {
        let n = self.norm();
        if n <= f64::MIN_POSITIVE {
            Point::ORIGIN
        } else {
            self * (1.0 / n)
        }
    }

    /// Move toward `target` by at most `step`.
    pub fn toward(self, target: Point, step: f64) -> Point {
        let d = self.dist(target);
        if d <= step {
            target
        } else {
            self + (target - self) * (step / d)
        }
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, s: f64) -> Point {
        Point::new(self.x * s, self.y * s)
    }
}

impl Neg for Point {
    type Output = Point;
    fn neg(self) -> Point {
        Point::new(-self.x, -self.y)
    }
}

/// Closest point of segment `[a, b]` to `p`.
pub fn closest_on_segment(p: Point, a: Point, b: Point) -> Point {
    let ab = b - a;
    let l2 = ab.norm2();
    if l2 <= EPS * EPS {
        return a;
    }
    let t = ((p - a).dot(ab) / l2).clamp(0.0, 1.0);
    a + ab * t
}

pub fn segment_distance(p: Point, a: Point, b: Point) -> f64 {
    p.dist(closest_on_segment(p, a, b))
}

/// Convex hull by monotone chain; collinear and duplicate points dropped.
pub fn convex_hull(points: &[Point]) -> Vec<Point> {
    let mut pts: Vec<Point> = points.iter().copied().filter(|p| p.is_finite()).collect();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup_by(|a, b| a.dist(*b) <= EPS);
    if pts.len() < 3 {
        return pts;
    }
    let mut lower: Vec<Point> = Vec::with_capacity(pts.len());
    for &p in &pts {
        while lower.len() >= 2 && turn(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<Point> = Vec::with_capacity(pts.len());
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && turn(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

fn turn(a: Point, b: Point, c: Point) -> f64 {
    (b - a).cross(c - a)
}

/// Closed convex region, counter-clockwise. Zero, one or two vertices mean the
/// empty set, a point and a segment.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ConvexPolygon {
    vertices: Vec<Point>,
}

impl ConvexPolygon {
    pub fn empty() -> Self {
        ConvexPolygon { vertices: Vec::new() }
    }

    pub fn point(p: Point) -> Self {
        ConvexPolygon { vertices: vec![p] }
    }

    pub fn segment(a: Point, b: Point) -> Self {
        Self::from_points(&[a, b])
    }

    /// Convex hull of arbitrary points, normalized (deduped, thin hulls collapsed).
    pub fn from_points(points: &[Point]) -> Self {
        Self::tidy(convex_hull(points))
    }

    /// Axis-aligned rectangle.
    pub fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        Self::from_points(&[
            Point::new(x0, y0),
            Point::new(x1, y0),
            Point::new(x1, y1),
            Point::new(x0, y1),
        ])
    }

    /// Drop near-duplicate neighbours and collapse slivers thinner than `EPS`.
    fn tidy(v: Vec<Point>) -> Self {
        let mut out: Vec<Point> = Vec::with_capacity(v.len());
        for p in v {
            if out.last().map_or(true, |q: &Point| q.dist(p) > EPS) {
                out.push(p);
            }
        }
        while out.len() > 1 && out[0].dist(out[out.len() - 1]) <= EPS {
            out.pop();
        }
        if out.len() >= 3 {
            let far = |from: Point| {
                *out.iter().max_by(|a, b| a.dist(from).total_cmp(&b.dist(from))).unwrap()
            };
            let pa = far(out[0]);
            let pb = far(pa);
            let d = pb - pa;
            let len = d.norm();
            let width = out.iter().map(|&p| d.cross(p - pa).abs() / len).fold(0.0, f64::max);
            if width <= EPS {
                out = vec![pa, pb];
            }
        }
        if out.len() == 2 && out[0].dist(out[1]) <= EPS {
            out.truncate(1);
        }
        ConvexPolygon { vertices: out }
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// True when the region has positive area.
    pub fn has_interior(&self) -> bool {
        self.vertices.len() >= 3
    }

    pub fn edges(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    pub fn area(&self) -> f64 {
        if self.vertices.len() < 3 {
            return 0.0;
        }
        0.5 * self.edges().map(|(a, b)| a.cross(b)).sum::<f64>()
    }

    /// Area centroid, falling back to the vertex mean for degenerate regions.
    pub fn centroid(&self) -> Option<Point> {
        match self.vertices.len() {
            0 => None,
            1 | 2 => Some(self.vertex_mean()),
            _ => {
                let a = self.area();
                if a <= EPS * EPS {
                    return Some(self.vertex_mean());
                }
                let o = self.vertices[0];
                let (mut cx, mut cy) = (0.0, 0.0);
                for (p, q) in self.edges() {
                    let (p, q) = (p - o, q - o);
                    let c = p.cross(q);
                    cx += (p.x + q.x) * c;
                    cy += (p.y + q.y) * c;
                }
                Some(o + Point::new(cx, cy) * (1.0 / (6.0 * a)))
            }
        }
    }

    fn vertex_mean(&self) -> Point {
        let n = self.vertices.len() as f64;
        let s = self.vertices.iter().fold(Point::ORIGIN, |acc, &p| acc + p);
        s * (1.0 / n)
    }

    /// Inside or within `EPS` of the boundary.
    pub fn contains(&self, p: Point) -> bool {
        match self.vertices.len() {
            0 => false,
            1 => self.vertices[0].dist(p) <= EPS,
            2 => segment_distance(p, self.vertices[0], self.vertices[1]) <= EPS,
            _ => self.edges().all(|(a, b)| {
                let e = b - a;
                e.cross(p - a) / e.norm() >= -EPS
            }),
        }
    }

    /// Largest signed distance outside any edge line; negative means strictly inside.
    pub fn outside_margin(&self, p: Point) -> f64 {
        if !self.has_interior() {
            return self.distance_to(p);
        }
        self.edges()
            .map(|(a, b)| {
                let e = b - a;
                -e.cross(p - a) / e.norm()
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Closest point of the region to `p`.
    pub fn closest_point(&self, p: Point) -> Option<Point> {
        match self.vertices.len() {
            0 => None,
            1 => Some(self.vertices[0]),
            2 => Some(closest_on_segment(p, self.vertices[0], self.vertices[1])),
            _ => {
                if self.contains(p) {
                    return Some(p);
                }
                self.edges()
                    .map(|(a, b)| closest_on_segment(p, a, b))
                    .min_by(|u, v| u.dist(p).total_cmp(&v.dist(p)))
            }
        }
    }

    pub fn distance_to(&self, p: Point) -> f64 {
        self.closest_point(p).map_or(f64::INFINITY, |q| q.dist(p))
    }

    /// Keep the part on the left of the directed line `a -> b`.
    pub fn clip_left_of(&self, a: Point, b: Point) -> ConvexPolygon {
        let e = b - a;
        let len = e.norm();
        if len <= EPS || self.is_empty() {
            return self.clone();
        }
        let side = |p: Point| e.cross(p - a) / len;
        let v = &self.vertices;
        if v.len() == 1 {
            return if side(v[0]) >= -EPS { self.clone() } else { ConvexPolygon::empty() };
        }
        let mut out = Vec::with_capacity(v.len() + 2);
        let n = v.len();
        for i in 0..n {
            let (p, q) = (v[i], v[(i + 1) % n]);
            let (sp, sq) = (side(p), side(q));
            let (ip, iq) = (sp >= -EPS, sq >= -EPS);
            if ip {
                out.push(p);
            }
            if ip != iq {
                let t = sp / (sp - sq);
                out.push(p.lerp(q, t));
            }
        }
        ConvexPolygon::tidy(out)
    }

    /// Intersection of two convex regions.
    pub fn intersect(&self, other: &ConvexPolygon) -> ConvexPolygon {
        if self.is_empty() || other.is_empty() || !boxes_overlap(self.bbox(), other.bbox()) {
            return ConvexPolygon::empty();
        }
        match (self.has_interior(), other.has_interior()) {
            (_, true) => clip_by(self, other),
            (true, false) => clip_by(other, self),
            (false, false) => degenerate_intersection(self, other),
        }
    }

    fn bbox(&self) -> (Point, Point) {
        self.vertices.iter().fold(
            (Point::new(f64::INFINITY, f64::INFINITY), Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY)),
            |(lo, hi), p| (Point::new(lo.x.min(p.x), lo.y.min(p.y)), Point::new(hi.x.max(p.x), hi.y.max(p.y))),
        )
    }

    pub fn intersects(&self, other: &ConvexPolygon) -> bool {
        !self.intersect(other).is_empty()
    }

    /// Minimum Euclidean distance between two non-empty regions.
    pub fn min_distance(&self, other: &ConvexPolygon) -> Result<f64, GeometryError> {
        if self.is_empty() || other.is_empty() {
            return Err(GeometryError::EmptyRegion);
        }
        if self.intersects(other) {
            return Ok(0.0);
        }
        let one_way = |a: &ConvexPolygon, b: &ConvexPolygon| {
            a.vertices
                .iter()
                .map(|&p| b.distance_to_boundary(p))
                .fold(f64::INFINITY, f64::min)
        };
        Ok(one_way(self, other).min(one_way(other, self)))
    }

    fn distance_to_boundary(&self, p: Point) -> f64 {
        match self.vertices.len() {
            1 => self.vertices[0].dist(p),
            _ => self
                .edges()
                .map(|(a, b)| segment_distance(p, a, b))
                .fold(f64::INFINITY, f64::min),
        }
    }

    pub fn translate(&self, d: Point) -> ConvexPolygon {
        ConvexPolygon { vertices: self.vertices.iter().map(|&p| p + d).collect() }
    }

    /// Rotation about the origin; keeps vertex order.
    pub fn rotate(&self, theta: f64) -> ConvexPolygon {
        ConvexPolygon { vertices: self.vertices.iter().map(|&p| p.rotate(theta)).collect() }
    }

    /// Checks the stored-form invariants: CCW, convex, no near-duplicate neighbours.
    pub fn is_valid(&self) -> bool {
        let v = &self.vertices;
        if v.iter().any(|p| !p.is_finite()) {
            return false;
        }
        let n = v.len();
        if n == 2 {
            return v[0].dist(v[1]) > EPS;
        }
        if n < 3 {
            return true;
        }
        (0..n).all(|i| {
            let (a, b, c) = (v[i], v[(i + 1) % n], v[(i + 2) % n]);
            a.dist(b) > EPS && (b - a).cross(c - b) / (b - a).norm() >= -EPS
        })
    }
}

fn clip_by(subject: &ConvexPolygon, clipper: &ConvexPolygon) -> ConvexPolygon {
    let mut out = subject.clone();
    for (a, b) in clipper.edges() {
        out = out.clip_left_of(a, b);
        if out.is_empty() {
            break;
        }
    }
    out
}

fn degenerate_intersection(a: &ConvexPolygon, b: &ConvexPolygon) -> ConvexPolygon {
    let (va, vb) = (a.vertices(), b.vertices());
    if va.len() == 1 {
        return if b.contains(va[0]) { a.clone() } else { ConvexPolygon::empty() };
    }
    if vb.len() == 1 {
        return if a.contains(vb[0]) { b.clone() } else { ConvexPolygon::empty() };
    }
    let (p, q, r, s) = (va[0], va[1], vb[0], vb[1]);
    let d1 = q - p;
    let d2 = s - r;
    let denom = d1.cross(d2);
    if denom.abs() > EPS * d1.norm() * d2.norm() {
        let t = (r - p).cross(d2) / denom;
        let x = p + d1 * t.clamp(0.0, 1.0);
        return if a.contains(x) && b.contains(x) {
            ConvexPolygon::point(x)
        } else {
            ConvexPolygon::empty()
        };
    }
    // parallel: overlap only when collinear
    if (d1.cross(r - p) / d1.norm()).abs() > EPS {
        return ConvexPolygon::empty();
    }
    let l2 = d1.norm2();
    let proj = |x: Point| (x - p).dot(d1) / l2;
    let (u0, u1) = {
        let (x, y) = (proj(r), proj(s));
        (x.min(y), x.max(y))
    };
    let lo = u0.max(0.0);
    let hi = u1.min(1.0);
    let tol = EPS / d1.norm();
    if lo > hi + tol {
        return ConvexPolygon::empty();
    }
    let hi = hi.max(lo);
    ConvexPolygon::segment(p + d1 * lo, p + d1 * hi)
}

/// Convex hull of `{apex}` and the disk `(cap_center, cap_radius)`, with the
/// far arc replaced by `arc_segments` inscribed chords.
fn boxes_overlap(a: (Point, Point), b: (Point, Point)) -> bool {
    a.0.x <= b.1.x + EPS && b.0.x <= a.1.x + EPS && a.0.y <= b.1.y + EPS && b.0.y <= a.1.y + EPS
}

pub fn cone_hull(
    apex: Point,
    cap_center: Point,
    cap_radius: f64,
    arc_segments: usize,
) -> Result<ConvexPolygon, GeometryError> {
    let axis = cap_center - apex;
    let l = axis.norm();
    if !(cap_radius < l) || cap_radius < 0.0 {
        return Err(GeometryError::DegenerateCone { radius: cap_radius, distance: l });
    }
    if cap_radius <= EPS {
        return Ok(ConvexPolygon::segment(apex, cap_center));
    }
    let segs = arc_segments.max(2);
    let alpha = (cap_radius / l).asin();
    let phi = axis.y.atan2(axis.x);
    let beta = PI / 2.0 + alpha;
    let mut pts = Vec::with_capacity(segs + 2);
    pts.push(apex);
    for j in 0..=segs {
        let ang = phi - beta + 2.0 * beta * j as f64 / segs as f64;
        pts.push(cap_center + Point::polar(cap_radius, ang));
    }
    Ok(ConvexPolygon::from_points(&pts))
}

/// Exact area of the hull of a point and a disk at distance `l` with radius `r < l`.
pub fn cone_hull_exact_area(l: f64, r: f64) -> f64 {
    let alpha = (r / l).asin();
    l * r * alpha.cos() + 0.5 * r * r * (PI + 2.0 * alpha)
}

/// Inscribed regular polygon of a disk, `segments` vertices.
pub fn disk_polygon(center: Point, radius: f64, segments: usize) -> ConvexPolygon {
    let segs = segments.max(3);
    let pts: Vec<Point> = (0..segs)
        .map(|j| center + Point::polar(radius, 2.0 * PI * j as f64 / segs as f64))
        .collect();
    ConvexPolygon::from_points(&pts)
}
