//! Convex polytope kernel for `d = 2` and `d = 3`.
//!
//! A cell is stored as a vertex list plus facet incidences. Every facet keeps
//! the outward normal of its supporting hyperplane and a provenance tag: either
//! the window boundary or the id of the splitting event that created it.
//! Planar cells keep their vertices in counter-clockwise order and facet `i`
//! is the edge from vertex `i` to vertex `i + 1`.

mod clip;
mod window;

pub use clip::{Split, SplitFace};
pub use window::Window;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::point::{self, Point};

/// Relative tolerance for vertex-on-plane snapping (times the diameter).
pub const SNAP_TOL: f64 = 1e-9;

/// Provenance of a facet.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FacetTag {
    Window,
    Split(u64),
}

impl FacetTag {
    pub fn split_id(self) -> Option<u64> {
        match self {
            FacetTag::Split(id) => Some(id),
            FacetTag::Window => None,
        }
    }

    pub fn is_window(self) -> bool {
        matches!(self, FacetTag::Window)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Facet {
    /// Outward unit normal; the polytope lies in `<x, normal> <= offset`.
    pub normal: Point,
    pub offset: f64,
    pub tag: FacetTag,
    /// Vertex cycle (3d) or the two endpoints (2d).
    pub vertices: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvexPolytope {
    dim: usize,
    vertices: Vec<Point>,
    facets: Vec<Facet>,
    volume: f64,
    diameter: f64,
}

/// An edge of a cell together with the tags of the facets meeting along it.
#[derive(Clone, Debug, PartialEq)]
pub struct TaggedEdge {
    pub a: Point,
    pub b: Point,
    /// One tag in the plane, two in space.
    pub tags: Vec<FacetTag>,
}

impl ConvexPolytope {
    /// Assemble a polytope from vertices and facets, computing volume and
    /// diameter. Rejects empty or flat input.
    pub fn from_parts(dim: usize, vertices: Vec<Point>, facets: Vec<Facet>) -> Result<Self> {
        if !(2..=3).contains(&dim) {
            return Err(Error::UnsupportedDimension { dim, what: "polytope kernel" });
        }
        if vertices.is_empty() || facets.is_empty() {
            return Err(Error::EmptyBody);
        }
        let diameter = diameter_of(&vertices);
        let mut poly = ConvexPolytope { dim, vertices, facets, volume: 0.0, diameter };
        poly.volume = match dim {
            2 => poly.area_2d(),
            _ => poly.volume_3d(),
        };
        if !(poly.volume > 0.0) {
            return Err(Error::DegeneratePolytope("zero volume".into()));
        }
        Ok(poly)
    }

    /// Axis-parallel box `[lo, hi]` with all facets tagged as window boundary.
    pub fn cuboid(lo: &[f64], hi: &[f64]) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(Error::DimensionMismatch { expected: lo.len(), got: hi.len() });
        }
        if lo.iter().zip(hi).any(|(a, b)| !(b > a)) {
            return Err(Error::EmptyBody);
        }
        match lo.len() {
            2 => {
                let v = vec![
                    [lo[0], lo[1], 0.0],
                    [hi[0], lo[1], 0.0],
                    [hi[0], hi[1], 0.0],
                    [lo[0], hi[1], 0.0],
                ];
                let normals = [
                    ([0.0, -1.0, 0.0], -lo[1]),
                    ([1.0, 0.0, 0.0], hi[0]),
                    ([0.0, 1.0, 0.0], hi[1]),
                    ([-1.0, 0.0, 0.0], -lo[0]),
                ];
                let facets = normals
                    .iter()
                    .enumerate()
                    .map(|(i, &(normal, offset))| Facet {
                        normal,
                        offset,
                        tag: FacetTag::Window,
                        vertices: vec![i, (i + 1) % 4],
                    })
                    .collect();
                Self::from_parts(2, v, facets)
            }
            3 => {
                let corner = |i: usize| -> Point {
                    [
                        if i & 1 == 0 { lo[0] } else { hi[0] },
                        if i & 2 == 0 { lo[1] } else { hi[1] },
                        if i & 4 == 0 { lo[2] } else { hi[2] },
                    ]
                };
                let v: Vec<Point> = (0..8).map(corner).collect();
                let faces: [(Point, f64, [usize; 4]); 6] = [
                    ([-1.0, 0.0, 0.0], -lo[0], [0, 4, 6, 2]),
                    ([1.0, 0.0, 0.0], hi[0], [1, 3, 7, 5]),
                    ([0.0, -1.0, 0.0], -lo[1], [0, 1, 5, 4]),
                    ([0.0, 1.0, 0.0], hi[1], [2, 6, 7, 3]),
                    ([0.0, 0.0, -1.0], -lo[2], [0, 2, 3, 1]),
                    ([0.0, 0.0, 1.0], hi[2], [4, 5, 7, 6]),
                ];
                let facets = faces
                    .iter()
                    .map(|(normal, offset, cyc)| Facet {
                        normal: *normal,
                        offset: *offset,
                        tag: FacetTag::Window,
                        vertices: cyc.to_vec(),
                    })
                    .collect();
                Self::from_parts(3, v, facets)
            }
            d => Err(Error::UnsupportedDimension { dim: d, what: "polytope kernel" }),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    /// Area (2d) or volume (3d).
    pub fn volume(&self) -> f64 {
        self.volume
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    pub fn centroid(&self) -> Point {
        point::centroid(&self.vertices)
    }

    /// Extent of the polytope along `n`: `max <x,n> - min <x,n>`.
    pub fn width(&self, n: Point) -> f64 {
        let (lo, hi) = self.support_interval(n);
        hi - lo
    }

    /// `(min <x,n>, max <x,n>)` over the vertices.
    pub fn support_interval(&self, n: Point) -> (f64, f64) {
        support_interval(&self.vertices, n)
    }

    /// Perimeter of a planar cell.
    pub fn perimeter(&self) -> f64 {
        self.facets
            .iter()
            .map(|f| point::dist(self.vertices[f.vertices[0]], self.vertices[f.vertices[1]]))
            .sum()
    }

    /// Boundary area of a spatial cell or perimeter of a planar one.
    pub fn surface(&self) -> f64 {
        match self.dim {
            2 => self.perimeter(),
            _ => self.facets.iter().map(|f| self.facet_area(f)).sum(),
        }
    }

    /// Area of a facet cycle in 3d.
    pub(crate) fn facet_area(&self, f: &Facet) -> f64 {
        polygon_area(&f.vertices.iter().map(|&i| self.vertices[i]).collect::<Vec<_>>())
    }

    fn area_2d(&self) -> f64 {
        let n = self.vertices.len();
        let mut acc = 0.0;
        for i in 0..n {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            acc += a[0] * b[1] - a[1] * b[0];
        }
        0.5 * acc.abs()
    }

    // Divergence theorem: V = (1/3) sum_F h_F |F| with h_F the signed distance
    // of the facet plane from an interior reference point.
    fn volume_3d(&self) -> f64 {
        let c = self.centroid();
        self.facets
            .iter()
            .map(|f| (f.offset - point::dot(f.normal, c)) * self.facet_area(f))
            .sum::<f64>()
            / 3.0
    }

    /// Largest violation of a facet inequality over all vertices.
    pub fn max_facet_violation(&self) -> f64 {
        self.facets
            .iter()
            .flat_map(|f| self.vertices.iter().map(move |v| point::dot(f.normal, *v) - f.offset))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn contains(&self, p: Point, tol: f64) -> bool {
        self.facets.iter().all(|f| point::dot(f.normal, p) - f.offset <= tol)
    }

    /// Edges with the tags of their incident facets.
    pub fn edges_with_tags(&self) -> Result<Vec<TaggedEdge>> {
        match self.dim {
            2 => Ok(self
                .facets
                .iter()
                .map(|f| TaggedEdge {
                    a: self.vertices[f.vertices[0]],
                    b: self.vertices[f.vertices[1]],
                    tags: vec![f.tag],
                })
                .collect()),
            3 => {
                let mut keyed: Vec<((usize, usize), FacetTag)> = Vec::new();
                for f in &self.facets {
                    let m = f.vertices.len();
                    for k in 0..m {
                        let (a, b) = (f.vertices[k], f.vertices[(k + 1) % m]);
                        keyed.push(((a.min(b), a.max(b)), f.tag));
                    }
                }
                keyed.sort();
                let mut edges = Vec::with_capacity(keyed.len() / 2);
                let mut i = 0;
                while i < keyed.len() {
                    let key = keyed[i].0;
                    let mut tags = vec![keyed[i].1];
                    let mut j = i + 1;
                    while j < keyed.len() && keyed[j].0 == key {
                        tags.push(keyed[j].1);
                        j += 1;
                    }
                    edges.push(TaggedEdge { a: self.vertices[key.0], b: self.vertices[key.1], tags });
                    i = j;
                }
                Ok(edges)
            }
            d => Err(Error::UnsupportedDimension { dim: d, what: "edge extraction" }),
        }
    }

    /// Sum over edges of length times exterior dihedral angle, divided by
    /// `4 pi` (3d), or perimeter over `pi` (2d): the mean width.
    pub fn mean_width(&self) -> f64 {
        match self.dim {
            2 => self.perimeter() / std::f64::consts::PI,
            _ => {
                let mut keyed: Vec<((usize, usize), usize)> = Vec::new();
                for (fi, f) in self.facets.iter().enumerate() {
                    let m = f.vertices.len();
                    for k in 0..m {
                        let (a, b) = (f.vertices[k], f.vertices[(k + 1) % m]);
                        keyed.push(((a.min(b), a.max(b)), fi));
                    }
                }
                keyed.sort();
                let mut acc = 0.0;
                for pair in keyed.windows(2) {
                    if pair[0].0 == pair[1].0 {
                        let (a, b) = pair[0].0;
                        let n1 = self.facets[pair[0].1].normal;
                        let n2 = self.facets[pair[1].1].normal;
                        let angle = point::dot(n1, n2).clamp(-1.0, 1.0).acos();
                        acc += point::dist(self.vertices[a], self.vertices[b]) * angle;
                    }
                }
                acc / (4.0 * std::f64::consts::PI)
            }
        }
    }

    /// Uniform dilation about the origin.
    pub fn scaled(&self, r: f64) -> ConvexPolytope {
        ConvexPolytope {
            dim: self.dim,
            vertices: self.vertices.iter().map(|v| point::scale(*v, r)).collect(),
            facets: self
                .facets
                .iter()
                .map(|f| Facet { offset: f.offset * r, ..f.clone() })
                .collect(),
            volume: self.volume * r.powi(self.dim as i32),
            diameter: self.diameter * r,
        }
    }

    pub fn to_json(&self) -> PolytopeJson {
        PolytopeJson {
            vertices: self.vertices.iter().map(|v| v[..self.dim].to_vec()).collect(),
            facets: self
                .facets
                .iter()
                .map(|f| FacetJson { tag: f.tag, vertex_indices: f.vertices.clone() })
                .collect(),
        }
    }

    /// Rebuild from the JSON form, recomputing supporting hyperplanes.
    pub fn from_json(json: &PolytopeJson) -> Result<Self> {
        let dim = json.vertices.first().map(|v| v.len()).ok_or(Error::EmptyBody)?;
        if json.vertices.iter().any(|v| v.len() != dim) {
            return Err(Error::invalid("inconsistent vertex dimensions"));
        }
        let vertices: Vec<Point> = json.vertices.iter().map(|v| point::from_slice(v)).collect();
        let center = point::centroid(&vertices);
        let mut facets = Vec::with_capacity(json.facets.len());
        for f in &json.facets {
            if f.vertex_indices.iter().any(|&i| i >= vertices.len()) {
                return Err(Error::invalid("facet vertex index out of range"));
            }
            let pts: Vec<Point> = f.vertex_indices.iter().map(|&i| vertices[i]).collect();
            let raw = match dim {
                2 if pts.len() == 2 => {
                    let e = point::sub(pts[1], pts[0]);
                    [e[1], -e[0], 0.0]
                }
                3 if pts.len() >= 3 => newell_normal(&pts),
                _ => return Err(Error::invalid("malformed facet")),
            };
            let mut normal = point::normalize(raw).ok_or_else(|| Error::invalid("flat facet"))?;
            let mut offset = point::dot(normal, pts[0]);
            if point::dot(normal, center) > offset {
                normal = point::scale(normal, -1.0);
                offset = -offset;
            }
            facets.push(Facet { normal, offset, tag: f.tag, vertices: f.vertex_indices.clone() });
        }
        Self::from_parts(dim, vertices, facets)
    }
}

/// Serialized polytope: `{vertices: [[..]], facets: [{tag, vertex_indices}]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolytopeJson {
    pub vertices: Vec<Vec<f64>>,
    pub facets: Vec<FacetJson>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FacetJson {
    pub tag: FacetTag,
    pub vertex_indices: Vec<usize>,
}

pub(crate) fn support_interval(points: &[Point], n: Point) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in points {
        let s = point::dot(*v, n);
        lo = lo.min(s);
        hi = hi.max(s);
    }
    (lo, hi)
}

pub(crate) fn diameter_of(points: &[Point]) -> f64 {
    let mut best = 0.0f64;
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            best = best.max(point::dist(*a, *b));
        }
    }
    best
}

pub(crate) fn newell_normal(pts: &[Point]) -> Point {
    let mut n = point::ORIGIN;
    for k in 0..pts.len() {
        let a = pts[k];
        let b = pts[(k + 1) % pts.len()];
        n[0] += (a[1] - b[1]) * (a[2] + b[2]);
        n[1] += (a[2] - b[2]) * (a[0] + b[0]);
        n[2] += (a[0] - b[0]) * (a[1] + b[1]);
    }
    n
}

/// Area of a planar polygon embedded in 3-space (vertex cycle order).
pub fn polygon_area(pts: &[Point]) -> f64 {
    if pts.len() < 3 {
        return 0.0;
    }
    let o = pts[0];
    let mut acc = point::ORIGIN;
    for k in 1..pts.len() - 1 {
        acc = point::add(acc, point::cross(point::sub(pts[k], o), point::sub(pts[k + 1], o)));
    }
    0.5 * point::norm(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_square_and_cube_measures() {
        let sq = ConvexPolytope::cuboid(&[0.0, 0.0], &[1.0, 1.0]).unwrap();
        assert!((sq.volume() - 1.0).abs() < 1e-15);
        assert!((sq.diameter() - 2f64.sqrt()).abs() < 1e-15);
        assert!((sq.perimeter() - 4.0).abs() < 1e-15);
        let cube = ConvexPolytope::cuboid(&[0.0; 3], &[1.0; 3]).unwrap();
        assert!((cube.volume() - 1.0).abs() < 1e-14);
        assert!((cube.surface() - 6.0).abs() < 1e-14);
        assert!((cube.mean_width() - 1.5).abs() < 1e-14);
        assert!(cube.max_facet_violation() <= 1e-15);
    }

    #[test]
    fn width_is_symmetric() {
        let sq = ConvexPolytope::cuboid(&[0.0, 0.0], &[1.0, 1.0]).unwrap();
        assert!((sq.width([1.0, 0.0, 0.0]) - 1.0).abs() < 1e-15);
        let diag = [0.5f64.sqrt(), 0.5f64.sqrt(), 0.0];
        assert!((sq.width(diag) - 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(sq.width(diag), sq.width(point::scale(diag, -1.0)));
    }

    #[test]
    fn unit_cube_edges() {
        let cube = ConvexPolytope::cuboid(&[0.0; 3], &[1.0; 3]).unwrap();
        let edges = cube.edges_with_tags().unwrap();
        assert_eq!(edges.len(), 12);
        assert!(edges.iter().all(|e| e.tags == vec![FacetTag::Window, FacetTag::Window]));
        assert!(edges.iter().all(|e| (point::dist(e.a, e.b) - 1.0).abs() < 1e-15));
    }

    #[test]
    fn json_round_trip_keeps_geometry() {
        let cube = ConvexPolytope::cuboid(&[0.0, -1.0, 2.0], &[1.0, 1.0, 2.5]).unwrap();
        let back = ConvexPolytope::from_json(&cube.to_json()).unwrap();
        assert!((back.volume() - cube.volume()).abs() < 1e-14);
        for (a, b) in back.facets().iter().zip(cube.facets()) {
            assert!(point::dist(a.normal, b.normal) < 1e-14);
            assert!((a.offset - b.offset).abs() < 1e-14);
        }
        let json = serde_json::to_string(&cube.to_json()).unwrap();
        assert!(json.starts_with("{\"vertices\":[[0.0,-1.0,2.0]"));
        assert!(json.contains("\"tag\":\"window\""));
    }

    #[test]
    fn empty_box_rejected() {
        assert!(matches!(ConvexPolytope::cuboid(&[0.0, 0.0], &[0.0, 1.0]), Err(Error::EmptyBody)));
    }
}
