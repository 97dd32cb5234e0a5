//! Translation-invariant hyperplane measures.
//!
//! A measure `Λ` is the product of Lebesgue measure on offsets and a
//! directional distribution `Q` on unit normals in the upper half-sphere, so
//! the hitting measure of a convex body is `Λ(⟨c⟩) = ∫ width(c, n) Q(dn)`.

use std::f64::consts::PI;
use std::fmt;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::ConvexPolytope;
use crate::point::{self, Point};

const UNIT_TOL: f64 = 1e-12;

/// A hyperplane `{x : <x, normal> = offset}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hyperplane {
    pub normal: Point,
    pub offset: f64,
    pub id: u64,
    pub birth_time: Option<f64>,
}

impl Hyperplane {
    pub fn new(normal: Point, offset: f64) -> Self {
        Hyperplane { normal, offset, id: 0, birth_time: None }
    }

    pub fn signed_distance(&self, x: Point) -> f64 {
        point::dot(x, self.normal) - self.offset
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Kind {
    Isotropic,
    Axis,
    Discrete(Vec<(Point, f64)>),
}

/// The directional distribution `Q`.
#[derive(Clone, Debug, PartialEq)]
pub struct DirectionalDistribution {
    dim: usize,
    kind: Kind,
}

/// Which family a directional distribution belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DirectionKind {
    Isotropic,
    Axis,
    Discrete,
}

impl DirectionalDistribution {
    pub fn isotropic(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(DirectionalDistribution { dim, kind: Kind::Isotropic })
    }

    pub fn axis(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(DirectionalDistribution { dim, kind: Kind::Axis })
    }

    /// Atoms must be unit normals in the upper half-sphere with positive
    /// weights summing to one, and they must span `R^d`.
    pub fn discrete(dim: usize, atoms: Vec<(Point, f64)>) -> Result<Self> {
        check_dim(dim)?;
        if atoms.is_empty() {
            return Err(Error::InvalidDirections("no atoms".into()));
        }
        let mut total = 0.0;
        for (n, w) in &atoms {
            if n[dim..].iter().any(|x| *x != 0.0) {
                return Err(Error::InvalidDirections("normal has too many coordinates".into()));
            }
            if (point::norm(*n) - 1.0).abs() > UNIT_TOL {
                return Err(Error::InvalidDirections("normal is not a unit vector".into()));
            }
            if point::canonical(*n, dim) != *n {
                return Err(Error::InvalidDirections("normal is not in the upper half-sphere".into()));
            }
            if !(*w > 0.0) || !w.is_finite() {
                return Err(Error::InvalidDirections("weights must be positive".into()));
            }
            total += w;
        }
        if (total - 1.0).abs() > UNIT_TOL {
            return Err(Error::InvalidDirections(format!("weights sum to {total}, not 1")));
        }
        let normals: Vec<Point> = atoms.iter().map(|a| a.0).collect();
        if rank(&normals, dim) < dim {
            return Err(Error::DegenerateDirections);
        }
        Ok(DirectionalDistribution { dim, kind: Kind::Discrete(atoms) })
    }

    /// Parse `isotropic`, `axis` or `discrete:[((n1..),w1),((n2..),w2),...]`.
    /// Discrete normals are normalized and flipped into the upper
    /// half-sphere, and weights are normalized to sum to one.
    pub fn parse(s: &str, dim: usize) -> Result<Self> {
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        match compact.as_str() {
            "isotropic" => Self::isotropic(dim),
            "axis" | "axis-aligned" | "axis_aligned" => Self::axis(dim),
            other => {
                let body = other
                    .strip_prefix("discrete:")
                    .ok_or_else(|| Error::InvalidDirections(format!("unknown kind `{s}`")))?;
                let raw = parse_atoms(body)?;
                let total: f64 = raw.iter().map(|a| a.1).sum();
                let mut atoms = Vec::with_capacity(raw.len());
                for (coords, w) in raw {
                    if coords.len() != dim {
                        return Err(Error::DimensionMismatch { expected: dim, got: coords.len() });
                    }
                    let n = point::normalize(point::from_slice(&coords))
                        .ok_or_else(|| Error::InvalidDirections("zero normal".into()))?;
                    atoms.push((point::canonical(n, dim), w / total));
                }
                Self::discrete(dim, atoms)
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> DirectionKind {
        match self.kind {
            Kind::Isotropic => DirectionKind::Isotropic,
            Kind::Axis => DirectionKind::Axis,
            Kind::Discrete(_) => DirectionKind::Discrete,
        }
    }

    /// Atoms of a discrete or axis-aligned distribution; `None` if isotropic.
    pub fn atoms(&self) -> Option<Vec<(Point, f64)>> {
        match &self.kind {
            Kind::Isotropic => None,
            Kind::Axis => Some(
                (0..self.dim)
                    .map(|i| {
                        let mut e = point::ORIGIN;
                        e[i] = 1.0;
                        (e, 1.0 / self.dim as f64)
                    })
                    .collect(),
            ),
            Kind::Discrete(a) => Some(a.clone()),
        }
    }

    /// Config-file form; [`DirectionalDistribution::parse`] inverts it.
    pub fn descriptor(&self) -> String {
        match &self.kind {
            Kind::Isotropic => "isotropic".into(),
            Kind::Axis => "axis".into(),
            Kind::Discrete(atoms) => {
                let parts: Vec<String> = atoms
                    .iter()
                    .map(|(n, w)| {
                        let c: Vec<String> = n[..self.dim].iter().map(|x| format!("{x}")).collect();
                        format!("(({}),{w})", c.join(","))
                    })
                    .collect();
                format!("discrete:[{}]", parts.join(","))
            }
        }
    }

    /// `Λ(⟨[0, u]⟩) = ∫ |<u, n>| Q(dn)` for a unit vector `u`.
    pub fn lambda_of_direction(&self, u: Point) -> f64 {
        lambda_of_body(self, &Segment::new(self.dim, point::ORIGIN, u)).expect("segment is a valid body")
    }

    fn sample_direction<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        match self.dim {
            2 => {
                let theta = rng.gen::<f64>() * PI;
                point::canonical([theta.cos(), theta.sin(), 0.0], 2)
            }
            _ => loop {
                let g = [
                    rng.sample::<f64, _>(StandardNormal),
                    rng.sample::<f64, _>(StandardNormal),
                    rng.sample::<f64, _>(StandardNormal),
                ];
                if let Some(n) = point::normalize(g) {
                    break point::canonical(n, 3);
                }
            },
        }
    }
}

impl fmt::Display for DirectionalDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.descriptor())
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if !(2..=3).contains(&dim) {
        return Err(Error::UnsupportedDimension { dim, what: "hyperplane measure" });
    }
    Ok(())
}

#[allow(clippy::needless_range_loop)]
fn rank(vectors: &[Point], dim: usize) -> usize {
    let mut rows: Vec<Vec<f64>> = vectors.iter().map(|v| v[..dim].to_vec()).collect();
    let mut r = 0;
    for col in 0..dim {
        let Some(p) = (r..rows.len()).max_by(|&a, &b| rows[a][col].abs().total_cmp(&rows[b][col].abs())) else {
            break;
        };
        if rows[p][col].abs() < 1e-9 {
            continue;
        }
        rows.swap(r, p);
        for i in 0..rows.len() {
            if i != r {
                let f = rows[i][col] / rows[r][col];
                for k in col..dim {
                    rows[i][k] -= f * rows[r][k];
                }
            }
        }
        r += 1;
    }
    r
}

fn parse_atoms(s: &str) -> Result<Vec<(Vec<f64>, f64)>> {
    let bad = || Error::InvalidDirections(format!("cannot parse atoms `{s}`"));
    let inner = s.strip_prefix('[').and_then(|x| x.strip_suffix(']')).ok_or_else(bad)?;
    let mut atoms = Vec::new();
    let mut rest = inner;
    while !rest.is_empty() {
        let r = rest.strip_prefix("((").ok_or_else(bad)?;
        let close = r.find(')').ok_or_else(bad)?;
        let coords = r[..close]
            .split(',')
            .map(|x| x.parse::<f64>().map_err(|_| bad()))
            .collect::<Result<Vec<_>>>()?;
        let r = r[close + 1..].strip_prefix(',').ok_or_else(bad)?;
        let end = r.find(')').ok_or_else(bad)?;
        let w = r[..end].parse::<f64>().map_err(|_| bad())?;
        atoms.push((coords, w));
        rest = &r[end + 1..];
        rest = rest.strip_prefix(',').unwrap_or(rest);
    }
    Ok(atoms)
}

/// A bounded convex body the measure can be evaluated on.
pub trait ConvexBody {
    fn dim(&self) -> usize;
    /// `(min, max)` of `<x, n>` over the body.
    fn support_interval(&self, n: Point) -> (f64, f64);
    /// Mean width, i.e. the width averaged over isotropic directions.
    fn mean_width(&self) -> f64;
    fn diameter(&self) -> f64;
    fn is_empty(&self) -> bool {
        false
    }
}

impl ConvexBody for ConvexPolytope {
    fn dim(&self) -> usize {
        ConvexPolytope::dim(self)
    }
    fn support_interval(&self, n: Point) -> (f64, f64) {
        ConvexPolytope::support_interval(self, n)
    }
    fn mean_width(&self) -> f64 {
        ConvexPolytope::mean_width(self)
    }
    fn diameter(&self) -> f64 {
        ConvexPolytope::diameter(self)
    }
    fn is_empty(&self) -> bool {
        self.vertices().is_empty()
    }
}

/// A line segment `[a, b]` in `R^d`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Segment {
    pub dim: usize,
    pub a: Point,
    pub b: Point,
}

impl Segment {
    pub fn new(dim: usize, a: Point, b: Point) -> Self {
        Segment { dim, a, b }
    }
}

impl ConvexBody for Segment {
    fn dim(&self) -> usize {
        self.dim
    }
    fn support_interval(&self, n: Point) -> (f64, f64) {
        let (x, y) = (point::dot(self.a, n), point::dot(self.b, n));
        (x.min(y), x.max(y))
    }
    fn mean_width(&self) -> f64 {
        mean_abs_projection(self.dim) * point::dist(self.a, self.b)
    }
    fn diameter(&self) -> f64 {
        point::dist(self.a, self.b)
    }
}

/// `E|<u, n>|` for a uniform unit `n` in `R^d`: `Γ(d/2) / (√π Γ((d+1)/2))`.
pub fn mean_abs_projection(dim: usize) -> f64 {
    match dim {
        2 => 2.0 / PI,
        3 => 0.5,
        d => {
            let d = d as f64;
            (statrs::function::gamma::ln_gamma(d / 2.0) - statrs::function::gamma::ln_gamma((d + 1.0) / 2.0)).exp()
                / PI.sqrt()
        }
    }
}

/// `max <x,n> - min <x,n>` over the body.
pub fn width<B: ConvexBody + ?Sized>(c: &B, n: Point) -> Result<f64> {
    if c.is_empty() {
        return Err(Error::EmptyBody);
    }
    let (lo, hi) = c.support_interval(n);
    Ok(hi - lo)
}

/// `Λ(⟨c⟩)`: exact weighted sum for atomic `Q`, mean width for isotropic `Q`.
pub fn lambda_of_body<B: ConvexBody + ?Sized>(q: &DirectionalDistribution, c: &B) -> Result<f64> {
    if c.is_empty() {
        return Err(Error::EmptyBody);
    }
    if c.dim() != q.dim {
        return Err(Error::DimensionMismatch { expected: q.dim, got: c.dim() });
    }
    Ok(match &q.kind {
        Kind::Isotropic => c.mean_width(),
        Kind::Axis => {
            let mut acc = 0.0;
            for i in 0..q.dim {
                let mut e = point::ORIGIN;
                e[i] = 1.0;
                let (lo, hi) = c.support_interval(e);
                acc += hi - lo;
            }
            acc / q.dim as f64
        }
        Kind::Discrete(atoms) => atoms
            .iter()
            .map(|(n, w)| {
                let (lo, hi) = c.support_interval(*n);
                w * (hi - lo)
            })
            .sum(),
    })
}

/// Isotropic `Λ(⟨c⟩)` by Gauss–Legendre quadrature over the half-sphere:
/// `nodes` points in the angle on `[0, π)` for `d = 2`, and a product rule
/// with `nodes` polar by `2 nodes` azimuthal points for `d = 3`.
pub fn isotropic_lambda_quadrature<B: ConvexBody + ?Sized>(c: &B, nodes: usize) -> f64 {
    let w = |n: Point| {
        let (lo, hi) = c.support_interval(n);
        hi - lo
    };
    let rule = crate::analytic::quadrature::GaussLegendre::new(nodes);
    match c.dim() {
        2 => rule.integrate(0.0, PI, |th| w([th.cos(), th.sin(), 0.0])) / PI,
        _ => {
            let az = crate::analytic::quadrature::GaussLegendre::new(2 * nodes);
            // upper hemisphere: polar angle in [0, π/2], azimuth in [0, 2π)
            rule.integrate(0.0, PI / 2.0, |th| {
                let (s, co) = th.sin_cos();
                s * az.integrate(0.0, 2.0 * PI, |ph| w([s * ph.cos(), s * ph.sin(), co]))
            }) / (2.0 * PI)
        }
    }
}

/// Draw a hyperplane from `Λ(· | ⟨c⟩)`: direction with density proportional
/// to `width(c, ·)` against `Q`, offset uniform on the support interval.
pub fn sample_hitting_hyperplane<R: Rng + ?Sized>(
    q: &DirectionalDistribution,
    c: &ConvexPolytope,
    rng: &mut R,
) -> Result<Hyperplane> {
    if c.dim() != q.dim {
        return Err(Error::DimensionMismatch { expected: q.dim, got: c.dim() });
    }
    if !(c.volume() > 0.0) {
        return Err(Error::DegeneratePolytope("cannot sample in a flat cell".into()));
    }
    let normal = match &q.kind {
        Kind::Isotropic => {
            let envelope = c.diameter();
            loop {
                let n = q.sample_direction(rng);
                if rng.gen::<f64>() * envelope < c.width(n) {
                    break n;
                }
            }
        }
        Kind::Axis => {
            let widths: Vec<f64> = (0..q.dim)
                .map(|i| {
                    let mut e = point::ORIGIN;
                    e[i] = 1.0;
                    c.width(e)
                })
                .collect();
            let i = pick(&widths, rng);
            let mut e = point::ORIGIN;
            e[i] = 1.0;
            e
        }
        Kind::Discrete(atoms) => {
            let weights: Vec<f64> = atoms.iter().map(|(n, w)| w * c.width(*n)).collect();
            atoms[pick(&weights, rng)].0
        }
    };
    let (lo, hi) = c.support_interval(normal);
    let offset = lo + rng.gen::<f64>() * (hi - lo);
    Ok(Hyperplane::new(normal, offset))
}

fn pick<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> usize {
    let total: f64 = weights.iter().sum();
    let mut u = rng.gen::<f64>() * total;
    for (i, w) in weights.iter().enumerate() {
        if u < *w {
            return i;
        }
        u -= w;
    }
    weights.iter().rposition(|w| *w > 0.0).unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::StreamKey;

    fn square() -> ConvexPolytope {
        ConvexPolytope::cuboid(&[0.0, 0.0], &[1.0, 1.0]).unwrap()
    }

    #[test]
    fn widths_of_square() {
        let sq = square();
        assert_eq!(width(&sq, [1.0, 0.0, 0.0]).unwrap(), 1.0);
        let k = 0.5f64.sqrt();
        assert!((width(&sq, [k, k, 0.0]).unwrap() - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn lambda_examples() {
        let axis = DirectionalDistribution::axis(2).unwrap();
        assert_eq!(lambda_of_body(&axis, &square()).unwrap(), 1.0);
        let seg = Segment::new(2, point::ORIGIN, [1.0, 0.0, 0.0]);
        assert_eq!(lambda_of_body(&axis, &seg).unwrap(), 0.5);
        let iso = DirectionalDistribution::isotropic(2).unwrap();
        let exact = lambda_of_body(&iso, &square()).unwrap();
        assert!((exact - 4.0 / PI).abs() < 1e-15);
        // the width function has kinks, so plain Gauss–Legendre converges slowly
        assert!((isotropic_lambda_quadrature(&square(), 64) - 4.0 / PI).abs() < 2e-4);
    }

    #[test]
    fn isotropic_cube_quadrature_matches_mean_width() {
        let cube = ConvexPolytope::cuboid(&[0.0; 3], &[1.0; 3]).unwrap();
        let iso = DirectionalDistribution::isotropic(3).unwrap();
        let exact = lambda_of_body(&iso, &cube).unwrap();
        assert!((exact - 1.5).abs() < 1e-14);
        assert!((isotropic_lambda_quadrature(&cube, 64) - 1.5).abs() < 1e-3);
        let seg = Segment::new(3, point::ORIGIN, [0.0, 0.0, 2.0]);
        assert!((isotropic_lambda_quadrature(&seg, 64) - 1.0).abs() < 1e-3);
        assert_eq!(lambda_of_body(&iso, &seg).unwrap(), 1.0);
    }

    #[test]
    fn parse_round_trip() {
        let q = DirectionalDistribution::parse("discrete:[((1,0),0.25), ((1,1),0.25), ((0,-2),0.5)]", 2).unwrap();
        let atoms = q.atoms().unwrap();
        assert_eq!(atoms[2].0, [0.0, 1.0, 0.0]);
        assert!((point::norm(atoms[1].0) - 1.0).abs() < 1e-15);
        let back = DirectionalDistribution::parse(&q.descriptor(), 2).unwrap();
        for (a, b) in back.atoms().unwrap().iter().zip(&atoms) {
            assert!(point::dist(a.0, b.0) < 1e-15 && (a.1 - b.1).abs() < 1e-15);
        }
        assert_eq!(DirectionalDistribution::parse("axis", 3).unwrap().kind(), DirectionKind::Axis);
        assert!(DirectionalDistribution::parse("discrete:[((1,0),1)]", 2).is_err());
        assert!(matches!(
            DirectionalDistribution::parse("discrete:[((1,0,0),0.5),((0,1,0),0.5)]", 3),
            Err(Error::DegenerateDirections)
        ));
    }

    #[test]
    fn discrete_validation() {
        assert!(DirectionalDistribution::discrete(2, vec![([1.0, 0.0, 0.0], 0.5), ([0.0, -1.0, 0.0], 0.5)]).is_err());
        assert!(DirectionalDistribution::discrete(2, vec![([1.0, 0.0, 0.0], 0.5), ([0.0, 1.0, 0.0], 0.4)]).is_err());
        assert!(DirectionalDistribution::discrete(2, vec![([1.0, 0.0, 0.0], 0.5), ([0.0, 1.0, 0.0], 0.5)]).is_ok());
    }

    #[test]
    fn axis_sampling_is_balanced_on_square() {
        let q = DirectionalDistribution::axis(2).unwrap();
        let sq = square();
        let mut rng = StreamKey::root(11).rng();
        let n = 100_000;
        let mut hits = 0usize;
        for _ in 0..n {
            let h = sample_hitting_hyperplane(&q, &sq, &mut rng).unwrap();
            if h.normal[0] == 1.0 {
                hits += 1;
            }
            assert!(h.offset > 0.0 && h.offset < 1.0);
        }
        let frac = hits as f64 / n as f64;
        assert!((frac - 0.5).abs() < 3.0 * (0.25 / n as f64).sqrt());
    }

    #[test]
    fn isotropic_sampling_splits_the_cell() {
        let q = DirectionalDistribution::isotropic(3).unwrap();
        let cube = ConvexPolytope::cuboid(&[0.0; 3], &[1.0, 2.0, 0.5]).unwrap();
        let mut rng = StreamKey::root(3).rng();
        for _ in 0..200 {
            let h = sample_hitting_hyperplane(&q, &cube, &mut rng).unwrap();
            assert!(h.normal[2] >= 0.0);
            let (lo, hi) = cube.support_interval(h.normal);
            assert!(h.offset > lo && h.offset < hi);
        }
    }
}
