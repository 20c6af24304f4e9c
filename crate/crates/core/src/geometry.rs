//! Small 2D geometry kernel shared by the mesh generators and the element code.

use serde::{Deserialize, Serialize};
use std::ops::{Add, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn dot(self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 3D cross product.
    pub fn cross(self, other: Point) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, other: Point) -> f64 {
        (self - other).norm()
    }

    /// Rotates by -90 degrees; for a CCW boundary traversal this is the outward normal direction.
    pub fn perp_cw(self) -> Point {
        Point::new(self.y, -self.x)
    }

    pub fn normalized(self) -> Point {
        let n = self.norm();
        Point::new(self.x / n, self.y / n)
    }

    pub fn lerp(self, other: Point, t: f64) -> Point {
        self + (other - self) * t
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

/// Twice the signed area of the triangle (a, b, c); positive when counter-clockwise.
pub fn orient2d(a: Point, b: Point, c: Point) -> f64 {
    (b - a).cross(c - a)
}

/// Signed area of a polygon (shoelace formula).
pub fn signed_area(poly: &[Point]) -> f64 {
    let n = poly.len();
    let mut s = 0.0;
    for i in 0..n {
        s += poly[i].cross(poly[(i + 1) % n]);
    }
    0.5 * s
}

/// Area centroid of a simple polygon. Falls back to the vertex average for degenerate input.
pub fn centroid(poly: &[Point]) -> Point {
    let n = poly.len();
    let a = signed_area(poly);
    if a.abs() < f64::MIN_POSITIVE * 1e10 {
        return vertex_average(poly);
    }
    // Shift to the first vertex to limit cancellation on small cells far from the origin.
    let o = poly[0];
    let (mut cx, mut cy) = (0.0, 0.0);
    for i in 0..n {
        let p = poly[i] - o;
        let q = poly[(i + 1) % n] - o;
        let w = p.cross(q);
        cx += (p.x + q.x) * w;
        cy += (p.y + q.y) * w;
    }
    o + Point::new(cx / (6.0 * a), cy / (6.0 * a))
}

pub fn vertex_average(poly: &[Point]) -> Point {
    let n = poly.len() as f64;
    let s = poly.iter().fold(Point::default(), |acc, &p| acc + p);
    s * (1.0 / n)
}

/// Largest distance between two vertices.
pub fn diameter(poly: &[Point]) -> f64 {
    let mut d: f64 = 0.0;
    for i in 0..poly.len() {
        for j in i + 1..poly.len() {
            d = d.max(poly[i].dist(poly[j]));
        }
    }
    d
}

/// A directed line `origin + s * dir`; the left side is `cross(dir, p - origin) > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Line {
    pub origin: Point,
    pub dir: Point,
}

impl Line {
    pub fn through(a: Point, b: Point) -> Self {
        Line { origin: a, dir: b - a }
    }

    /// Signed distance, positive on the left.
    pub fn signed_distance(&self, p: Point) -> f64 {
        self.dir.cross(p - self.origin) / self.dir.norm()
    }

    /// Parameter of the orthogonal projection of `p`, in units of `dir`.
    pub fn param(&self, p: Point) -> f64 {
        self.dir.dot(p - self.origin) / self.dir.dot(self.dir)
    }
}

/// Half-plane `{p : normal . p <= offset}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfPlane {
    pub normal: Point,
    pub offset: f64,
}

impl HalfPlane {
    /// Points closer to `a` than to `b`. The offset is formed from the midpoint so that
    /// mirrored generator pairs produce bit-exact bisectors.
    pub fn bisector(a: Point, b: Point) -> Self {
        let normal = b - a;
        let mid = (a + b) * 0.5;
        HalfPlane { normal, offset: normal.dot(mid) }
    }

    /// Interior side of the directed edge `a -> b` of a CCW polygon.
    pub fn left_of(a: Point, b: Point) -> Self {
        let normal = (b - a).perp_cw();
        HalfPlane { normal, offset: normal.dot(a) }
    }

    pub fn value(&self, p: Point) -> f64 {
        self.normal.dot(p) - self.offset
    }
}

/// Sutherland–Hodgman clip of a convex polygon against a half-plane.
pub fn clip_convex(poly: &[Point], hp: &HalfPlane) -> Vec<Point> {
    let n = poly.len();
    let mut out = Vec::with_capacity(n + 1);
    for i in 0..n {
        let p = poly[i];
        let q = poly[(i + 1) % n];
        let fp = hp.value(p);
        let fq = hp.value(q);
        if fp <= 0.0 {
            out.push(p);
        }
        if (fp < 0.0 && fq > 0.0) || (fp > 0.0 && fq < 0.0) {
            let t = fp / (fp - fq);
            out.push(p.lerp(q, t));
        }
    }
    out
}

/// Center and radius of the largest disc inside the intersection of the half-planes.
///
/// Exhaustive over triples (and parallel pairs) of constraint lines; intended for
/// the small constraint sets that arise from single polygon cells.
pub fn chebyshev_center(hps: &[HalfPlane]) -> Option<(Point, f64)> {
    let unit: Vec<(Point, f64)> = hps
        .iter()
        .filter(|h| h.normal.norm() > 0.0)
        .map(|h| {
            let n = h.normal.norm();
            (h.normal * (1.0 / n), h.offset / n)
        })
        .collect();
    let m = unit.len();
    let feasible = |c: Point, r: f64| unit.iter().all(|(a, b)| a.dot(c) + r <= b + 1e-12 * (1.0 + b.abs()));
    let mut best: Option<(Point, f64)> = None;
    for i in 0..m {
        for j in i + 1..m {
            for l in j + 1..m {
                // a_t . c + r = b_t for t in {i, j, l}
                let rows = [unit[i], unit[j], unit[l]];
                let mat = nalgebra::Matrix3::new(
                    rows[0].0.x, rows[0].0.y, 1.0,
                    rows[1].0.x, rows[1].0.y, 1.0,
                    rows[2].0.x, rows[2].0.y, 1.0,
                );
                let rhs = nalgebra::Vector3::new(rows[0].1, rows[1].1, rows[2].1);
                let Some(sol) = mat.lu().solve(&rhs) else { continue };
                let (c, r) = (Point::new(sol[0], sol[1]), sol[2]);
                if !r.is_finite() || r < 0.0 || !feasible(c, r) {
                    continue;
                }
                if best.is_none_or(|(_, rb)| r > rb) {
                    best = Some((c, r));
                }
            }
        }
    }
    best
}

/// Kernel half-planes of a CCW polygon (one per edge).
pub fn kernel_halfplanes(poly: &[Point]) -> Vec<HalfPlane> {
    let n = poly.len();
    (0..n)
        .filter(|&i| poly[i].dist(poly[(i + 1) % n]) > 0.0)
        .map(|i| HalfPlane::left_of(poly[i], poly[(i + 1) % n]))
        .collect()
}
