//! Maximal polytopes of a tessellation and their marks.
//!
//! Maximal facets are read off the event log. Maximal segments are
//! identified by the ids of the two hyperplanes they lie on: in the plane a
//! segment is a division chord; in space the segment on `H_A ∩ H_B` (with `B`
//! born after `A`) is the edge of `B`'s birth face that lies on a facet of
//! the divided cell tagged `A`.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::engine::Tessellation;
use crate::error::{Error, Result};
use crate::geometry::{polygon_area, FacetTag, SplitFace, Window};
use crate::point::{self, Point};

/// Direction used to pick a unique lowest point of an object.
const GENERIC: Point = [0.267_941_652_975_067_4, 0.433_526_023_174_421_4, 0.860_383_882_718_436_4];

#[derive(Clone, Debug)]
pub struct MaximalFacet {
    pub id: u64,
    pub birth_time: f64,
    pub face: SplitFace,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaximalSegment {
    pub a: Point,
    pub b: Point,
    pub length: f64,
    /// Unit direction in the upper half-sphere.
    pub direction: Point,
    /// Ascending birth times of the `d - 1` hyperplanes through the segment.
    pub birth_times: Vec<f64>,
    /// Ids of those hyperplanes, in the same order.
    pub hyperplanes: Vec<u64>,
    pub internal_vertices: usize,
    pub touches_boundary: bool,
}

impl MaximalSegment {
    pub fn last_birth_time(&self) -> f64 {
        *self.birth_times.last().expect("segments have birth times")
    }

    pub fn midpoint(&self) -> Point {
        point::lerp(self.a, self.b, 0.5)
    }
}

/// `j = 0` counts objects, `j = 1` weights segments by length; for facets
/// `j = d - 1` weights by area.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightingMode {
    Typical,
    LengthWeighted,
}

impl WeightingMode {
    pub fn j(self) -> usize {
        match self {
            WeightingMode::Typical => 0,
            WeightingMode::LengthWeighted => 1,
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "typical" | "0" | "count" => Ok(WeightingMode::Typical),
            "lengthweighted" | "lw" | "1" | "length" => Ok(WeightingMode::LengthWeighted),
            _ => Err(Error::invalid(format!("unknown weighting mode `{s}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Statistic {
    InternalVertices,
    BirthTimes,
    Length,
    LastBirthTime,
}

impl Statistic {
    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "internal_vertices" | "n" => Ok(Statistic::InternalVertices),
            "birth_times" => Ok(Statistic::BirthTimes),
            "length" => Ok(Statistic::Length),
            "last_birth_time" => Ok(Statistic::LastBirthTime),
            _ => Err(Error::invalid(format!("unknown statistic `{s}`"))),
        }
    }
}

/// Which segments of a window count as observed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Selection {
    /// Entirely inside the window shrunk by the margin (minus-sampling).
    Contained,
    /// Midpoint inside the shrunk window and not cut by the window.
    Midpoint,
}

pub fn maximal_facets(t: &Tessellation) -> Vec<MaximalFacet> {
    t.events
        .iter()
        .map(|e| MaximalFacet { id: e.id, birth_time: e.birth_time, face: e.face.clone() })
        .collect()
}

pub fn maximal_segments(t: &Tessellation) -> Result<Vec<MaximalSegment>> {
    let segs = match t.dim() {
        2 => segments_2d(t),
        3 => segments_3d(t),
        d => return Err(Error::UnsupportedDimension { dim: d, what: "maximal segments" }),
    };
    for s in &segs {
        debug_assert!(s.birth_times.windows(2).all(|w| w[0] < w[1]));
        debug_assert!(s.birth_times.iter().all(|b| *b > 0.0 && *b <= t.horizon));
    }
    Ok(segs)
}

fn segments_2d(t: &Tessellation) -> Vec<MaximalSegment> {
    let mut ends_on: HashMap<u64, usize> = HashMap::new();
    for e in &t.events {
        for tag in &e.face.edge_tags {
            if let FacetTag::Split(id) = tag {
                *ends_on.entry(*id).or_default() += 1;
            }
        }
    }
    t.events
        .iter()
        .map(|e| {
            let (a, b) = (e.face.vertices[0], e.face.vertices[1]);
            let length = point::dist(a, b);
            MaximalSegment {
                a,
                b,
                length,
                direction: direction_of(a, b, 2),
                birth_times: vec![e.birth_time],
                hyperplanes: vec![e.id],
                internal_vertices: ends_on.get(&e.id).copied().unwrap_or(0),
                touches_boundary: e.face.edge_tags.iter().any(|g| g.is_window()),
            }
        })
        .collect()
}

fn direction_of(a: Point, b: Point, dim: usize) -> Point {
    point::canonical(point::normalize(point::sub(b, a)).unwrap_or([1.0, 0.0, 0.0]), dim)
}

fn segments_3d(t: &Tessellation) -> Vec<MaximalSegment> {
    let birth: HashMap<u64, f64> = t.events.iter().map(|e| (e.id, e.birth_time)).collect();
    let mut segs = Vec::new();
    for e in &t.events {
        let f = &e.face;
        let m = f.vertices.len();
        for k in 0..m {
            let FacetTag::Split(older) = f.edge_tags[k] else { continue };
            let (a, b) = (f.vertices[k], f.vertices[(k + 1) % m]);
            let prev = f.edge_tags[(k + m - 1) % m];
            let next = f.edge_tags[(k + 1) % m];
            segs.push(MaximalSegment {
                a,
                b,
                length: point::dist(a, b),
                direction: direction_of(a, b, 3),
                birth_times: vec![birth[&older], e.birth_time],
                hyperplanes: vec![older, e.id],
                internal_vertices: 0,
                touches_boundary: prev.is_window() || next.is_window(),
            });
        }
    }
    count_internal_3d(t, &mut segs);
    segs
}

// A point of relint S, S on H_A ∩ H_B, is a vertex iff some third plane H_C
// passes through it and the maximal facet of C reaches it, i.e. the point
// lies on the segment on H_A ∩ H_C or on H_B ∩ H_C.
fn count_internal_3d(t: &Tessellation, segs: &mut [MaximalSegment]) {
    let planes: HashMap<u64, (Point, f64)> =
        t.events.iter().map(|e| (e.id, (e.hyperplane.normal, e.hyperplane.offset))).collect();
    let mut by_id: HashMap<u64, Vec<usize>> = HashMap::new();
    for (i, s) in segs.iter().enumerate() {
        for id in &s.hyperplanes {
            by_id.entry(*id).or_default().push(i);
        }
    }
    let scale = t.window.sides().iter().map(|x| x * x).sum::<f64>().sqrt();
    let tol = 1e-9 * scale;
    let mut counts = vec![0usize; segs.len()];
    for (i, s) in segs.iter().enumerate() {
        let (ia, ib) = (s.hyperplanes[0], s.hyperplanes[1]);
        let mut seen: Vec<u64> = Vec::new();
        for &own in &[ia, ib] {
            for &j in &by_id[&own] {
                if j == i {
                    continue;
                }
                let other = &segs[j];
                let c = if other.hyperplanes[0] == own { other.hyperplanes[1] } else { other.hyperplanes[0] };
                if c == ia || c == ib || seen.contains(&c) {
                    continue;
                }
                let (n, off) = planes[&c];
                let (da, db) = (point::dot(n, s.a) - off, point::dot(n, s.b) - off);
                if !(da.abs() > tol && db.abs() > tol && da * db < 0.0) {
                    continue;
                }
                let p = point::lerp(s.a, s.b, da / (da - db));
                if dist_to_segment(p, other.a, other.b) <= tol * 10.0 {
                    seen.push(c);
                }
            }
        }
        counts[i] = seen.len();
    }
    for (s, c) in segs.iter_mut().zip(counts) {
        s.internal_vertices = c;
    }
}

fn dist_to_segment(p: Point, a: Point, b: Point) -> f64 {
    let ab = point::sub(b, a);
    let len2 = point::dot(ab, ab);
    let s = if len2 > 0.0 { (point::dot(point::sub(p, a), ab) / len2).clamp(0.0, 1.0) } else { 0.0 };
    point::dist(p, point::lerp(a, b, s))
}

/// Summary of the cross-check between birth-face segments and the cell
/// 1-skeleton in space.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GroupingCheck {
    /// Cell edges carrying two division tags.
    pub split_edges: usize,
    /// Of those, edges lying on the segment of their id pair.
    pub matched: usize,
    /// Id pairs that occur among cell edges.
    pub groups: usize,
}

/// Group the cell edges whose two incident facets are both division facets
/// by their id pair and check that every such edge lies on the segment
/// extracted for that pair.
pub fn check_edge_grouping(t: &Tessellation, segs: &[MaximalSegment]) -> Result<GroupingCheck> {
    if t.dim() != 3 {
        return Err(Error::UnsupportedDimension { dim: t.dim(), what: "edge grouping" });
    }
    let mut pairs: HashMap<(u64, u64), usize> = HashMap::new();
    for (i, s) in segs.iter().enumerate() {
        let (x, y) = (s.hyperplanes[0], s.hyperplanes[1]);
        pairs.insert((x.min(y), x.max(y)), i);
    }
    let scale = t.window.sides().iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut check = GroupingCheck::default();
    let mut seen: BTreeMap<(u64, u64), ()> = BTreeMap::new();
    for c in &t.cells {
        for e in c.polytope.edges_with_tags()? {
            let ids: Vec<u64> = e.tags.iter().filter_map(|g| g.split_id()).collect();
            if ids.len() != 2 || e.tags.len() != 2 {
                continue;
            }
            check.split_edges += 1;
            let key = (ids[0].min(ids[1]), ids[0].max(ids[1]));
            seen.insert(key, ());
            if let Some(&i) = pairs.get(&key) {
                let s = &segs[i];
                if dist_to_segment(e.a, s.a, s.b) < 1e-8 * scale && dist_to_segment(e.b, s.a, s.b) < 1e-8 * scale {
                    check.matched += 1;
                }
            }
        }
    }
    check.groups = seen.len();
    Ok(check)
}

/// Keep segments not cut by the window and observed under `selection`.
pub fn select(segments: &[MaximalSegment], window: &Window, margin: f64, selection: Selection) -> Result<Vec<MaximalSegment>> {
    let inner = window.shrink(margin)?;
    Ok(segments
        .iter()
        .filter(|s| !s.touches_boundary)
        .filter(|s| match selection {
            Selection::Contained => inner.contains(s.a, 0.0) && inner.contains(s.b, 0.0),
            Selection::Midpoint => inner.contains(s.midpoint(), 0.0),
        })
        .cloned()
        .collect())
}

/// Minus-sampling: segments entirely inside the window shrunk by `margin`
/// (a fraction of each side), never those cut by the window.
pub fn minus_sample(segments: &[MaximalSegment], window: &Window, margin: f64) -> Result<Vec<MaximalSegment>> {
    select(segments, window, margin, Selection::Contained)
}

/// A weighted sample of a statistic, weights normalized to sum to one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightedSample {
    pub statistic: Statistic,
    pub mode: WeightingMode,
    pub values: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl WeightedSample {
    /// Weighted mean of the first component.
    pub fn mean(&self) -> f64 {
        self.values.iter().zip(&self.weights).map(|(v, w)| v[0] * w).sum()
    }

    /// Weighted frequency of `value` in the first component.
    pub fn frequency(&self, value: f64) -> f64 {
        self.values.iter().zip(&self.weights).filter(|(v, _)| v[0] == value).map(|(_, w)| w).sum()
    }
}

pub fn statistic_value(s: &MaximalSegment, stat: Statistic) -> Vec<f64> {
    match stat {
        Statistic::InternalVertices => vec![s.internal_vertices as f64],
        Statistic::BirthTimes => s.birth_times.clone(),
        Statistic::Length => vec![s.length],
        Statistic::LastBirthTime => vec![s.last_birth_time()],
    }
}

pub fn weight_of(s: &MaximalSegment, mode: WeightingMode) -> f64 {
    match mode {
        WeightingMode::Typical => 1.0,
        WeightingMode::LengthWeighted => s.length,
    }
}

pub fn empirical_distribution(segments: &[MaximalSegment], mode: WeightingMode, stat: Statistic) -> Result<WeightedSample> {
    if segments.is_empty() {
        return Err(Error::EmptySample);
    }
    let raw: Vec<f64> = segments.iter().map(|s| weight_of(s, mode)).collect();
    let total: f64 = raw.iter().sum();
    if !(total > 0.0) {
        return Err(Error::EmptySample);
    }
    Ok(WeightedSample {
        statistic: stat,
        mode,
        values: segments.iter().map(|s| statistic_value(s, stat)).collect(),
        weights: raw.iter().map(|w| w / total).collect(),
    })
}

/// Sorted parameters `s` at which `base + s u` crosses a division face,
/// restricted to the part of the line inside the window.
pub fn line_section(t: &Tessellation, base: Point, u: Point) -> Vec<f64> {
    let Some((lo, hi)) = t.window.line_interval(base, u) else {
        return Vec::new();
    };
    let mut out = Vec::new();
    for e in &t.events {
        let h = &e.hyperplane;
        let denom = point::dot(h.normal, u);
        if denom == 0.0 {
            continue;
        }
        let s = (h.offset - point::dot(h.normal, base)) / denom;
        if !(s > lo && s < hi) {
            continue;
        }
        let p = point::add(base, point::scale(u, s));
        if face_contains(&e.face, p) {
            out.push(s);
        }
    }
    out.sort_by(f64::total_cmp);
    out
}

// Whether a point of the face's hyperplane lies in the face.
fn face_contains(f: &SplitFace, p: Point) -> bool {
    match f.dim {
        2 => {
            let (a, b) = (f.vertices[0], f.vertices[1]);
            let ab = point::sub(b, a);
            let s = point::dot(point::sub(p, a), ab) / point::dot(ab, ab);
            (0.0..=1.0).contains(&s)
        }
        _ => {
            let n = crate::geometry::newell_normal(&f.vertices);
            let m = f.vertices.len();
            let mut sign = 0.0f64;
            for k in 0..m {
                let a = f.vertices[k];
                let b = f.vertices[(k + 1) % m];
                let c = point::dot(point::cross(point::sub(b, a), point::sub(p, a)), n);
                if c != 0.0 {
                    if sign != 0.0 && c.signum() != sign {
                        return false;
                    }
                    sign = c.signum();
                }
            }
            true
        }
    }
}

/// An edge of a Poisson line tessellation: a piece of one line between
/// consecutive crossings.
#[derive(Clone, Debug, PartialEq)]
pub struct Edge {
    pub line: u64,
    pub a: Point,
    pub b: Point,
    pub length: f64,
    pub touches_boundary: bool,
}

/// Edges of a planar tessellation whose division chords cross each other
/// (Poisson line tessellations), ordered along each line.
pub fn pht_edges(t: &Tessellation) -> Result<Vec<Edge>> {
    if t.dim() != 2 {
        return Err(Error::UnsupportedDimension { dim: t.dim(), what: "line tessellation edges" });
    }
    let mut out = Vec::new();
    for e in &t.events {
        let (a, b) = (e.face.vertices[0], e.face.vertices[1]);
        let d = point::sub(b, a);
        let mut cuts = vec![0.0, 1.0];
        for o in &t.events {
            if o.id == e.id {
                continue;
            }
            let h = &o.hyperplane;
            let denom = point::dot(h.normal, d);
            if denom == 0.0 {
                continue;
            }
            let s = (h.offset - point::dot(h.normal, a)) / denom;
            if s > 0.0 && s < 1.0 && face_contains(&o.face, point::lerp(a, b, s)) {
                cuts.push(s);
            }
        }
        cuts.sort_by(f64::total_cmp);
        let last = cuts.len() - 2;
        for (k, w) in cuts.windows(2).enumerate() {
            let (p, q) = (point::lerp(a, b, w[0]), point::lerp(a, b, w[1]));
            out.push(Edge { line: e.id, a: p, b: q, length: point::dist(p, q), touches_boundary: k == 0 || k == last });
        }
    }
    Ok(out)
}

/// The point of `pts` lowest in a fixed generic direction; the reference
/// point used to count objects once.
pub fn lowest_point(pts: &[Point]) -> Point {
    pts.iter()
        .min_by(|x, y| point::dot(**x, GENERIC).total_cmp(&point::dot(**y, GENERIC)))
        .copied()
        .unwrap_or(point::ORIGIN)
}

/// Horvitz–Thompson factor of a segment observed entirely inside the box
/// `inner`: `vol(inner)` over the volume of translates of the segment that
/// stay inside. Zero when the segment is not contained.
pub fn containment_weight(s: &MaximalSegment, inner: &Window) -> f64 {
    if !(inner.contains(s.a, 0.0) && inner.contains(s.b, 0.0)) {
        return 0.0;
    }
    let mut vol = 1.0;
    for i in 0..inner.dim() {
        vol *= (inner.hi[i] - inner.lo[i]) - (s.a[i] - s.b[i]).abs();
    }
    if vol > 0.0 {
        inner.volume() / vol
    } else {
        0.0
    }
}

/// Per-window totals for a density estimate: `Σ V_j` of the maximal
/// `k`-polytopes observed in the window shrunk by `margin`, and the volume
/// of that shrunk window.
///
/// For `j = k` the content of each polytope inside the shrunk window is
/// summed; for `j = 0` a polytope is counted when its lowest point in a
/// fixed generic direction lies in the shrunk window. Both are unbiased
/// for stationary tessellations as long as the margin is positive.
pub fn density_totals(t: &Tessellation, k: usize, j: usize, margin: f64) -> Result<(f64, f64)> {
    let d = t.dim();
    if !(k == 1 || k == d - 1) || !(j == 0 || j == k) {
        return Err(Error::invalid(format!("unsupported density indices k={k}, j={j}")));
    }
    let inner = t.window.shrink(margin)?;
    let volume = inner.volume();
    let mut total = 0.0;
    let lowest_inside = |pts: &[Point]| inner.contains(lowest_point(pts), 0.0);
    if k == d - 1 {
        for e in &t.events {
            total += match (j, d) {
                (0, _) => f64::from(u8::from(lowest_inside(&e.face.vertices))),
                (_, 2) => clip_segment_length(&inner, e.face.vertices[0], e.face.vertices[1]),
                _ => polygon_area(&clip_polygon(&inner, &e.face.vertices)),
            };
        }
    } else {
        for s in maximal_segments(t)? {
            total += if j == 0 {
                f64::from(u8::from(lowest_inside(&[s.a, s.b])))
            } else {
                clip_segment_length(&inner, s.a, s.b)
            };
        }
    }
    Ok((total, volume))
}

/// Mean over tessellations of the per-window density `Σ V_j / vol`.
pub fn density_estimate(ts: &[Tessellation], k: usize, j: usize, margin: f64) -> Result<f64> {
    if ts.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut acc = 0.0;
    for t in ts {
        let (sum, vol) = density_totals(t, k, j, margin)?;
        acc += sum / vol;
    }
    Ok(acc / ts.len() as f64)
}

fn clip_segment_length(w: &Window, a: Point, b: Point) -> f64 {
    let d = point::sub(b, a);
    let len = point::norm(d);
    if len == 0.0 {
        return 0.0;
    }
    let u = point::scale(d, 1.0 / len);
    let (mut lo, mut hi) = (0.0f64, len);
    for i in 0..w.dim() {
        if u[i] == 0.0 {
            if a[i] < w.lo[i] || a[i] > w.hi[i] {
                return 0.0;
            }
        } else {
            let s1 = (w.lo[i] - a[i]) / u[i];
            let s2 = (w.hi[i] - a[i]) / u[i];
            lo = lo.max(s1.min(s2));
            hi = hi.min(s1.max(s2));
        }
    }
    (hi - lo).max(0.0)
}

// Sutherland–Hodgman against the six box planes.
fn clip_polygon(w: &Window, pts: &[Point]) -> Vec<Point> {
    let mut poly = pts.to_vec();
    for i in 0..w.dim() {
        for (sign, bound) in [(-1.0, w.lo[i]), (1.0, w.hi[i])] {
            if poly.is_empty() {
                return poly;
            }
            let inside = |p: &Point| sign * (p[i] - bound) <= 0.0;
            let mut out = Vec::with_capacity(poly.len() + 2);
            for k in 0..poly.len() {
                let (p, q) = (poly[k], poly[(k + 1) % poly.len()]);
                let (ip, iq) = (inside(&p), inside(&q));
                if ip {
                    out.push(p);
                }
                if ip != iq {
                    let s = (bound - p[i]) / (q[i] - p[i]);
                    out.push(point::lerp(p, q, s));
                }
            }
            poly = out;
        }
    }
    poly
}

/// CSV dump: one row per segment.
pub fn segments_to_csv(segments: &[MaximalSegment], dim: usize) -> String {
    let mut s = String::from("length");
    for i in 0..dim {
        let _ = write!(s, ",dir{i}");
    }
    for i in 0..dim - 1 {
        let _ = write!(s, ",birth{i}");
    }
    s.push_str(",internal_vertices,touches_boundary\n");
    for seg in segments {
        let _ = write!(s, "{}", seg.length);
        for i in 0..dim {
            let _ = write!(s, ",{}", seg.direction[i]);
        }
        for b in &seg.birth_times {
            let _ = write!(s, ",{b}");
        }
        let _ = writeln!(s, ",{},{}", seg.internal_vertices, seg.touches_boundary);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{simulate_stit, Cell, Process, SplitEvent};
    use crate::geometry::ConvexPolytope;
    use crate::measure::{DirectionalDistribution, Hyperplane};

    // Divide by the given planes in order, each splitting the unique current
    // cell containing `probe`.
    fn fixture(dim: usize, planes: &[(Point, f64, f64, Point)]) -> Tessellation {
        let window = Window::unit(dim).unwrap();
        let mut cells = vec![window.polytope()];
        let mut events = Vec::new();
        for (id, &(normal, offset, time, probe)) in planes.iter().enumerate() {
            let idx = cells.iter().position(|c| c.contains(probe, 0.0)).unwrap();
            let c: ConvexPolytope = cells.remove(idx);
            let h = Hyperplane { normal, offset, id: id as u64, birth_time: Some(time) };
            let sp = c.clip(&h).unwrap();
            cells.push(sp.positive);
            cells.push(sp.negative);
            events.push(SplitEvent { id: id as u64, parent: Some(0), hyperplane: h, birth_time: time, face: sp.face });
        }
        Tessellation {
            process: Process::Stit,
            window,
            horizon: 1.0,
            directions: DirectionalDistribution::axis(dim).unwrap(),
            cells: cells
                .into_iter()
                .enumerate()
                .map(|(i, p)| Cell { id: i as u64, birth_time: 0.0, polytope: p, frozen: false })
                .collect(),
            events,
            seed: 0,
        }
    }

    #[test]
    fn planar_t_junction() {
        let t = fixture(2, &[([1.0, 0.0, 0.0], 0.5, 0.2, [0.5; 3]), ([0.0, 1.0, 0.0], 0.5, 0.6, [0.7, 0.5, 0.0])]);
        let segs = maximal_segments(&t).unwrap();
        assert_eq!(segs[0].internal_vertices, 1);
        assert_eq!(segs[1].internal_vertices, 0);
        assert!(segs.iter().all(|s| s.touches_boundary));
        assert!((segs[1].length - 0.5).abs() < 1e-15);
        assert_eq!(maximal_facets(&t).len(), 2);
    }

    #[test]
    fn spatial_fixture_has_one_segment() {
        let t = fixture(3, &[([1.0, 0.0, 0.0], 0.5, 0.2, [0.5; 3]), ([0.0, 1.0, 0.0], 0.5, 0.6, [0.7, 0.5, 0.5])]);
        let segs = maximal_segments(&t).unwrap();
        assert_eq!(segs.len(), 1);
        assert_eq!(segs[0].birth_times, vec![0.2, 0.6]);
        assert_eq!(segs[0].internal_vertices, 0);
        assert!((segs[0].length - 1.0).abs() < 1e-15);
        assert_eq!(segs[0].direction, [0.0, 0.0, 1.0]);
        assert!(segs[0].touches_boundary);
    }

    #[test]
    fn spatial_crossing_from_far_side_is_internal() {
        // plane 0 at x = 0.5; plane 1 (y = 0.5) on the right; plane 2 (z = 0.5) on the left
        let t = fixture(
            3,
            &[
                ([1.0, 0.0, 0.0], 0.5, 0.1, [0.5; 3]),
                ([0.0, 1.0, 0.0], 0.5, 0.3, [0.7, 0.5, 0.5]),
                ([0.0, 0.0, 1.0], 0.5, 0.5, [0.3, 0.5, 0.5]),
            ],
        );
        let segs = maximal_segments(&t).unwrap();
        assert_eq!(segs.len(), 2);
        assert!(segs.iter().all(|s| s.internal_vertices == 1));
        let check = check_edge_grouping(&t, &segs).unwrap();
        assert_eq!(check.matched, check.split_edges);
    }

    #[test]
    fn planar_internal_vertices_match_vertex_census() {
        let q = DirectionalDistribution::isotropic(2).unwrap();
        for seed in 0..5 {
            let t = simulate_stit(&Window::unit(2).unwrap(), &q, 15.0, seed).unwrap();
            let segs = maximal_segments(&t).unwrap();
            let total: usize = segs.iter().map(|s| s.internal_vertices).sum();
            let mut interior: Vec<Point> = Vec::new();
            for c in &t.cells {
                for v in c.polytope.vertices() {
                    if !t.window.on_boundary(*v, 1e-9) && !interior.iter().any(|w| point::dist(*v, *w) < 1e-9) {
                        interior.push(*v);
                    }
                }
            }
            assert_eq!(total, interior.len());
        }
    }

    #[test]
    fn spatial_segments_agree_with_cell_edges() {
        let q = DirectionalDistribution::isotropic(3).unwrap();
        for seed in 0..5 {
            let t = simulate_stit(&Window::unit(3).unwrap(), &q, 6.0, seed).unwrap();
            let segs = maximal_segments(&t).unwrap();
            let check = check_edge_grouping(&t, &segs).unwrap();
            assert_eq!(check.matched, check.split_edges);
            for s in &segs {
                assert!(s.birth_times[0] < s.birth_times[1]);
            }
        }
    }

    #[test]
    fn minus_sampling_and_weights() {
        let q = DirectionalDistribution::isotropic(2).unwrap();
        let t = simulate_stit(&Window::unit(2).unwrap(), &q, 20.0, 1).unwrap();
        let segs = maximal_segments(&t).unwrap();
        let kept = minus_sample(&segs, &t.window, 0.0).unwrap();
        assert_eq!(kept.len(), segs.iter().filter(|s| !s.touches_boundary).count());
        assert!(minus_sample(&segs, &t.window, 0.5).is_err());
        let typ = empirical_distribution(&kept, WeightingMode::Typical, Statistic::InternalVertices).unwrap();
        let lw = empirical_distribution(&kept, WeightingMode::LengthWeighted, Statistic::InternalVertices).unwrap();
        assert!((typ.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        // length-weighted frequency equals the explicit ratio of sums
        let n0: f64 = kept.iter().filter(|s| s.internal_vertices == 0).map(|s| s.length).sum();
        let all: f64 = kept.iter().map(|s| s.length).sum();
        assert!((lw.frequency(0.0) - n0 / all).abs() < 1e-12);
        assert!(matches!(
            empirical_distribution(&[], WeightingMode::Typical, Statistic::Length),
            Err(Error::EmptySample)
        ));
    }

    #[test]
    fn line_section_of_fixture() {
        let t = fixture(2, &[([1.0, 0.0, 0.0], 0.5, 0.2, [0.5; 3]), ([0.0, 1.0, 0.0], 0.5, 0.6, [0.7, 0.5, 0.0])]);
        let hits = line_section(&t, [0.0, 0.25, 0.0], [1.0, 0.0, 0.0]);
        assert_eq!(hits, vec![0.5]);
        let hits = line_section(&t, [0.75, 0.0, 0.0], [0.0, 1.0, 0.0]);
        assert_eq!(hits, vec![0.5]);
        let hits = line_section(&t, [0.25, 0.0, 0.0], [0.0, 1.0, 0.0]);
        assert!(hits.is_empty());
    }

    #[test]
    fn density_of_fixture() {
        let t = fixture(2, &[([1.0, 0.0, 0.0], 0.5, 0.2, [0.5; 3]), ([0.0, 1.0, 0.0], 0.5, 0.6, [0.7, 0.5, 0.0])]);
        let (len, vol) = density_totals(&t, 1, 1, 0.25).unwrap();
        assert!((vol - 0.25).abs() < 1e-15);
        assert!((len - 0.75).abs() < 1e-15);
        let (count, _) = density_totals(&t, 1, 0, 0.0).unwrap();
        assert_eq!(count, 2.0);
        let empty = fixture(2, &[]);
        assert_eq!(density_estimate(&[empty], 1, 1, 0.1).unwrap(), 0.0);
    }

    #[test]
    fn polygon_clipping_in_box() {
        let w = Window::unit(3).unwrap();
        let sq = vec![[-1.0, -1.0, 0.5], [2.0, -1.0, 0.5], [2.0, 2.0, 0.5], [-1.0, 2.0, 0.5]];
        assert!((polygon_area(&clip_polygon(&w, &sq)) - 1.0).abs() < 1e-15);
    }
}
