//! Fixed-size vector helpers. Planar points carry a zero third coordinate so
//! that one representation serves both supported dimensions.

pub type Point = [f64; 3];

pub const ORIGIN: Point = [0.0; 3];

#[inline]
pub fn add(a: Point, b: Point) -> Point {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

#[inline]
pub fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub fn scale(a: Point, s: f64) -> Point {
    [a[0] * s, a[1] * s, a[2] * s]
}

#[inline]
pub fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn cross(a: Point, b: Point) -> Point {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
pub fn norm(a: Point) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn dist(a: Point, b: Point) -> f64 {
    norm(sub(a, b))
}

/// Point on the segment `a + s (b - a)`.
#[inline]
pub fn lerp(a: Point, b: Point, s: f64) -> Point {
    [
        a[0] + s * (b[0] - a[0]),
        a[1] + s * (b[1] - a[1]),
        a[2] + s * (b[2] - a[2]),
    ]
}

pub fn normalize(a: Point) -> Option<Point> {
    let n = norm(a);
    if n > 0.0 && n.is_finite() {
        Some(scale(a, 1.0 / n))
    } else {
        None
    }
}

/// Canonical representative of the line direction `±a` in the upper
/// half-sphere of `R^dim`: last coordinate positive; on the equator (last
/// coordinate exactly zero) the first nonzero coordinate is made positive.
pub fn canonical(a: Point, dim: usize) -> Point {
    let last = a[dim - 1];
    let flip = if last != 0.0 {
        last < 0.0
    } else {
        a[..dim].iter().find(|x| **x != 0.0).is_some_and(|x| *x < 0.0)
    };
    let b = if flip { scale(a, -1.0) } else { a };
    // drop negative zeros
    [b[0] + 0.0, b[1] + 0.0, b[2] + 0.0]
}

pub fn centroid(points: &[Point]) -> Point {
    let mut c = ORIGIN;
    for p in points {
        c = add(c, *p);
    }
    scale(c, 1.0 / points.len().max(1) as f64)
}

/// Embed a coordinate slice of length 2 or 3.
pub fn from_slice(xs: &[f64]) -> Point {
    let mut p = ORIGIN;
    p[..xs.len()].copy_from_slice(xs);
    p
}
