//! Small 2-D geometric primitives: points, segments, polygons.

use std::ops::{Add, Mul, Neg, Sub};

/// A point (or vector) in the plane, lengths in meters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pt {
    pub x: f64,
    pub y: f64,
}

pub const fn pt(x: f64, y: f64) -> Pt {
    Pt { x, y }
}

impl Pt {
    pub fn dot(self, o: Pt) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the cross product `self x o`.
    pub fn cross(self, o: Pt) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, o: Pt) -> f64 {
        (self - o).norm()
    }

    pub fn mid(self, o: Pt) -> Pt {
        pt(0.5 * (self.x + o.x), 0.5 * (self.y + o.y))
    }

    /// Polar angle in [-pi, pi].
    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }
}

impl Add for Pt {
    type Output = Pt;
    fn add(self, o: Pt) -> Pt {
        pt(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Pt {
    type Output = Pt;
    fn sub(self, o: Pt) -> Pt {
        pt(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Pt {
    type Output = Pt;
    fn mul(self, s: f64) -> Pt {
        pt(self.x * s, self.y * s)
    }
}

impl Neg for Pt {
    type Output = Pt;
    fn neg(self) -> Pt {
        pt(-self.x, -self.y)
    }
}

/// Twice the signed area of triangle (a, b, c); positive for ccw order.
pub fn orient2d(a: Pt, b: Pt, c: Pt) -> f64 {
    (b - a).cross(c - a)
}

/// Signed area of a simple polygon (ccw positive).
pub fn signed_area(poly: &[Pt]) -> f64 {
    let n = poly.len();
    let mut acc = 0.0;
    for i in 0..n {
        acc += poly[i].cross(poly[(i + 1) % n]);
    }
    0.5 * acc
}

/// Even-odd point-in-polygon test. Points on the boundary may land on
/// either side; callers pass strictly interior probes (e.g. centroids).
pub fn point_in_polygon(poly: &[Pt], p: Pt) -> bool {
    let n = poly.len();
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (poly[i], poly[j]);
        if (a.y > p.y) != (b.y > p.y) {
            let x_cross = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
            if p.x < x_cross {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

/// Distance from `p` to the closed segment [a, b].
pub fn dist_point_segment(p: Pt, a: Pt, b: Pt) -> f64 {
    let ab = b - a;
    let len2 = ab.dot(ab);
    if len2 == 0.0 {
        return p.dist(a);
    }
    let t = ((p - a).dot(ab) / len2).clamp(0.0, 1.0);
    p.dist(a + ab * t)
}

/// True if `p` lies on segment [a, b] within absolute tolerance `tol`.
pub fn point_on_segment(p: Pt, a: Pt, b: Pt, tol: f64) -> bool {
    dist_point_segment(p, a, b) <= tol
}

/// True if the open segments (a, b) and (c, d) cross at an interior point
/// of both. Shared endpoints and touching at endpoints do not count.
pub fn segments_cross_properly(a: Pt, b: Pt, c: Pt, d: Pt) -> bool {
    let d1 = orient2d(c, d, a);
    let d2 = orient2d(c, d, b);
    let d3 = orient2d(a, b, c);
    let d4 = orient2d(a, b, d);
    ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
}

/// True if a simple polygon check fails: any two non-adjacent edges cross.
pub fn polygon_self_intersects(poly: &[Pt]) -> bool {
    let n = poly.len();
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        for j in (i + 1)..n {
            if j == i || (j + 1) % n == i || (i + 1) % n == j {
                continue;
            }
            let (c, d) = (poly[j], poly[(j + 1) % n]);
            if segments_cross_properly(a, b, c, d) {
                return true;
            }
        }
    }
    false
}

/// Intersections of the polygon boundary with the line y = 0, returned as
/// a sorted list of x-intervals where the polygon overlaps the line.
pub fn ground_spans(poly: &[Pt]) -> Vec<(f64, f64)> {
    let n = poly.len();
    let mut xs: Vec<f64> = Vec::new();
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        if a.y == 0.0 {
            xs.push(a.x);
        }
        if (a.y > 0.0) != (b.y > 0.0) && a.y != 0.0 && b.y != 0.0 {
            xs.push(a.x + (0.0 - a.y) / (b.y - a.y) * (b.x - a.x));
        }
    }
    if xs.is_empty() {
        return Vec::new();
    }
    xs.sort_by(|p, q| p.partial_cmp(q).unwrap());
    vec![(xs[0], *xs.last().unwrap())]
}
