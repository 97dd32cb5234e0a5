use serde::{Deserialize, Serialize};

use super::ConvexPolytope;
use crate::error::{Error, Result};
use crate::point::{self, Point};

/// Axis-parallel simulation box `[lo, hi]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl Window {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(Error::DimensionMismatch { expected: lo.len(), got: hi.len() });
        }
        if !(2..=3).contains(&lo.len()) {
            return Err(Error::UnsupportedDimension { dim: lo.len(), what: "simulation window" });
        }
        if lo.iter().zip(&hi).any(|(a, b)| !(b > a) || !a.is_finite() || !b.is_finite()) {
            return Err(Error::EmptyBody);
        }
        Ok(Window { lo, hi })
    }

    /// `[0, 1]^d`.
    pub fn unit(dim: usize) -> Result<Self> {
        Self::new(vec![0.0; dim], vec![1.0; dim])
    }

    /// `[0, side_1] x ... x [0, side_d]`.
    pub fn with_sides(sides: &[f64]) -> Result<Self> {
        Self::new(vec![0.0; sides.len()], sides.to_vec())
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn sides(&self) -> Vec<f64> {
        self.lo.iter().zip(&self.hi).map(|(a, b)| b - a).collect()
    }

    pub fn volume(&self) -> f64 {
        self.sides().iter().product()
    }

    pub fn center(&self) -> Point {
        let c: Vec<f64> = self.lo.iter().zip(&self.hi).map(|(a, b)| 0.5 * (a + b)).collect();
        point::from_slice(&c)
    }

    pub fn polytope(&self) -> ConvexPolytope {
        ConvexPolytope::cuboid(&self.lo, &self.hi).expect("window boxes are valid")
    }

    /// Shrink every side by `margin` times its length on both ends.
    pub fn shrink(&self, margin: f64) -> Result<Window> {
        if !(0.0..0.5).contains(&margin) {
            return Err(Error::InvalidMargin(margin));
        }
        let sides = self.sides();
        Ok(Window {
            lo: self.lo.iter().zip(&sides).map(|(a, s)| a + margin * s).collect(),
            hi: self.hi.iter().zip(&sides).map(|(b, s)| b - margin * s).collect(),
        })
    }

    pub fn contains(&self, p: Point, tol: f64) -> bool {
        (0..self.dim()).all(|i| p[i] >= self.lo[i] - tol && p[i] <= self.hi[i] + tol)
    }

    /// Whether `p` lies on the boundary within `tol`.
    pub fn on_boundary(&self, p: Point, tol: f64) -> bool {
        self.contains(p, tol)
            && (0..self.dim()).any(|i| (p[i] - self.lo[i]).abs() <= tol || (p[i] - self.hi[i]).abs() <= tol)
    }

    /// Parameter interval `[a, b]` of the line `base + s u` inside the box,
    /// or `None` if the line misses the interior.
    pub fn line_interval(&self, base: Point, u: Point) -> Option<(f64, f64)> {
        let (mut a, mut b) = (f64::NEG_INFINITY, f64::INFINITY);
        for i in 0..self.dim() {
            if u[i] == 0.0 {
                if base[i] <= self.lo[i] || base[i] >= self.hi[i] {
                    return None;
                }
            } else {
                let s1 = (self.lo[i] - base[i]) / u[i];
                let s2 = (self.hi[i] - base[i]) / u[i];
                a = a.max(s1.min(s2));
                b = b.min(s1.max(s2));
            }
        }
        (b > a).then_some((a, b))
    }

    pub fn scaled(&self, r: f64) -> Window {
        Window {
            lo: self.lo.iter().map(|x| x * r).collect(),
            hi: self.hi.iter().map(|x| x * r).collect(),
        }
    }
}
