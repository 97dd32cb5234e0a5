use super::{ConvexPolytope, Facet, FacetTag, SNAP_TOL};
use crate::error::{Error, Result};
use crate::measure::Hyperplane;
use crate::point::{self, Point};

/// The intersection `c ∩ H` of a cell with its splitting hyperplane.
///
/// In the plane this is a chord: `vertices` holds the two endpoints and
/// `edge_tags[i]` is the tag of the cell facet containing endpoint `i`. In
/// space it is a convex polygon: `vertices` is its cycle and `edge_tags[i]`
/// tags the edge from vertex `i` to vertex `i + 1` with the cell facet it
/// lies on.
#[derive(Clone, Debug, PartialEq)]
pub struct SplitFace {
    pub dim: usize,
    pub vertices: Vec<Point>,
    pub edge_tags: Vec<FacetTag>,
}

impl SplitFace {
    /// Length (2d) or area (3d).
    pub fn content(&self) -> f64 {
        match self.dim {
            2 => point::dist(self.vertices[0], self.vertices[1]),
            _ => super::polygon_area(&self.vertices),
        }
    }

    pub fn scaled(&self, r: f64) -> SplitFace {
        SplitFace {
            dim: self.dim,
            vertices: self.vertices.iter().map(|v| point::scale(*v, r)).collect(),
            edge_tags: self.edge_tags.clone(),
        }
    }
}

/// Result of splitting a cell: the part on the side `<x,n> >= offset`, the
/// part on the side `<x,n> <= offset`, and the shared face.
#[derive(Clone, Debug)]
pub struct Split {
    pub positive: ConvexPolytope,
    pub negative: ConvexPolytope,
    pub face: SplitFace,
}

#[inline]
fn snap(x: f64, eps: f64) -> f64 {
    if x.abs() <= eps {
        0.0
    } else {
        x
    }
}

impl ConvexPolytope {
    /// Split the cell by `h`. The new facet of both parts is tagged
    /// `Split(h.id)`.
    pub fn clip(&self, h: &Hyperplane) -> Result<Split> {
        let eps = SNAP_TOL * self.diameter;
        let s: Vec<f64> = self
            .vertices
            .iter()
            .map(|v| snap(point::dot(*v, h.normal) - h.offset, eps))
            .collect();
        if !s.iter().any(|x| *x > 0.0) || !s.iter().any(|x| *x < 0.0) {
            return Err(Error::NonSplitting);
        }
        match self.dim {
            2 => self.clip_2d(h, &s),
            _ => self.clip_3d(h, &s),
        }
    }

    fn clip_2d(&self, h: &Hyperplane, s: &[f64]) -> Result<Split> {
        let m = self.vertices.len();
        let chord = |sign: f64| Facet {
            normal: point::scale(h.normal, -sign),
            offset: -sign * h.offset,
            tag: FacetTag::Split(h.id),
            vertices: Vec::new(),
        };
        // (vertex, facet of the outgoing edge) per side
        let mut sides: [Vec<(Point, Facet)>; 2] = [Vec::with_capacity(m + 2), Vec::with_capacity(m + 2)];
        let mut face: Vec<(Point, FacetTag)> = Vec::with_capacity(2);
        for i in 0..m {
            let j = (i + 1) % m;
            let (vi, vj) = (self.vertices[i], self.vertices[j]);
            let edge = &self.facets[i];
            let crossing = s[i] * s[j] < 0.0;
            let p = if crossing { point::lerp(vi, vj, s[i] / (s[i] - s[j])) } else { vi };
            for (side, sign) in [(0usize, 1.0f64), (1, -1.0)] {
                let (si, sj) = (sign * s[i], sign * s[j]);
                if si >= 0.0 {
                    let out = if si == 0.0 && sj < 0.0 { chord(sign) } else { edge.clone() };
                    sides[side].push((vi, out));
                }
                if si > 0.0 && sj < 0.0 {
                    sides[side].push((p, chord(sign)));
                } else if si < 0.0 && sj > 0.0 {
                    sides[side].push((p, edge.clone()));
                }
            }
            if s[i] == 0.0 {
                face.push((vi, edge.tag));
            } else if crossing {
                face.push((p, edge.tag));
            }
        }
        if face.len() != 2 {
            return Err(Error::NonSplitting);
        }
        let build = |ring: Vec<(Point, Facet)>| -> Result<ConvexPolytope> {
            let k = ring.len();
            if k < 3 {
                return Err(Error::NonSplitting);
            }
            let mut vertices = Vec::with_capacity(k);
            let mut facets = Vec::with_capacity(k);
            for (idx, (v, mut f)) in ring.into_iter().enumerate() {
                vertices.push(v);
                f.vertices = vec![idx, (idx + 1) % k];
                facets.push(f);
            }
            ConvexPolytope::from_parts(2, vertices, facets).map_err(|_| Error::NonSplitting)
        };
        let [pos, neg] = sides;
        Ok(Split {
            positive: build(pos)?,
            negative: build(neg)?,
            face: SplitFace {
                dim: 2,
                vertices: vec![face[0].0, face[1].0],
                edge_tags: vec![face[0].1, face[1].1],
            },
        })
    }

    fn clip_3d(&self, h: &Hyperplane, s: &[f64]) -> Result<Split> {
        let mut verts = self.vertices.clone();
        let mut cuts: Vec<((usize, usize), usize)> = Vec::new();
        let mut pos_faces = Vec::with_capacity(self.facets.len() + 1);
        let mut neg_faces = Vec::with_capacity(self.facets.len() + 1);
        let mut cap_edges: Vec<(usize, usize, FacetTag)> = Vec::new();

        for f in &self.facets {
            let cyc = &f.vertices;
            let m = cyc.len();
            let mut pos = Vec::with_capacity(m + 1);
            let mut neg = Vec::with_capacity(m + 1);
            let mut on = Vec::with_capacity(2);
            let (mut has_pos, mut has_neg) = (false, false);
            for k in 0..m {
                let (a, b) = (cyc[k], cyc[(k + 1) % m]);
                let sa = s[a];
                has_pos |= sa > 0.0;
                has_neg |= sa < 0.0;
                if sa >= 0.0 {
                    pos.push(a);
                }
                if sa <= 0.0 {
                    neg.push(a);
                }
                if sa == 0.0 {
                    on.push(a);
                }
                if sa * s[b] < 0.0 {
                    let key = (a.min(b), a.max(b));
                    let c = match cuts.iter().find(|(k, _)| *k == key) {
                        Some(&(_, c)) => c,
                        None => {
                            let c = verts.len();
                            verts.push(point::lerp(verts[a], verts[b], sa / (sa - s[b])));
                            cuts.push((key, c));
                            c
                        }
                    };
                    pos.push(c);
                    neg.push(c);
                    on.push(c);
                }
            }
            if has_pos && pos.len() >= 3 {
                pos_faces.push(Facet { vertices: pos, ..f.clone() });
            }
            if has_neg && neg.len() >= 3 {
                neg_faces.push(Facet { vertices: neg, ..f.clone() });
            }
            match on.len() {
                0 | 1 => {}
                2 => {
                    let (u, v) = (on[0], on[1]);
                    let dup = cap_edges
                        .iter()
                        .any(|&(a, b, _)| (a == u && b == v) || (a == v && b == u));
                    if u != v && !dup {
                        cap_edges.push((u, v, f.tag));
                    }
                }
                _ => return Err(Error::NonSplitting),
            }
        }

        let (cycle, tags) = chain_cap(&cap_edges)?;
        let tag = FacetTag::Split(h.id);
        pos_faces.push(Facet {
            normal: point::scale(h.normal, -1.0),
            offset: -h.offset,
            tag,
            vertices: cycle.clone(),
        });
        neg_faces.push(Facet { normal: h.normal, offset: h.offset, tag, vertices: cycle.clone() });

        let face = SplitFace {
            dim: 3,
            vertices: cycle.iter().map(|&i| verts[i]).collect(),
            edge_tags: tags,
        };
        let build = |faces: Vec<Facet>| -> Result<ConvexPolytope> {
            let (v, f) = compact(&verts, faces);
            ConvexPolytope::from_parts(3, v, f).map_err(|_| Error::NonSplitting)
        };
        Ok(Split { positive: build(pos_faces)?, negative: build(neg_faces)?, face })
    }
}

/// Order the cap edges into a cycle; each edge carries the tag of the cell
/// facet it was cut from.
fn chain_cap(edges: &[(usize, usize, FacetTag)]) -> Result<(Vec<usize>, Vec<FacetTag>)> {
    if edges.len() < 3 {
        return Err(Error::NonSplitting);
    }
    let mut used = vec![false; edges.len()];
    let (start, mut current, first_tag) = edges[0];
    used[0] = true;
    let mut cycle = vec![start];
    let mut tags = vec![first_tag];
    while current != start {
        let next = edges
            .iter()
            .enumerate()
            .find(|(i, e)| !used[*i] && (e.0 == current || e.1 == current));
        let Some((i, e)) = next else {
            return Err(Error::NonSplitting);
        };
        used[i] = true;
        cycle.push(current);
        tags.push(e.2);
        current = if e.0 == current { e.1 } else { e.0 };
    }
    if used.iter().any(|u| !u) {
        return Err(Error::NonSplitting);
    }
    Ok((cycle, tags))
}

fn compact(verts: &[Point], mut faces: Vec<Facet>) -> (Vec<Point>, Vec<Facet>) {
    let mut map = vec![usize::MAX; verts.len()];
    let mut out = Vec::new();
    for f in &mut faces {
        for v in &mut f.vertices {
            if map[*v] == usize::MAX {
                map[*v] = out.len();
                out.push(verts[*v]);
            }
            *v = map[*v];
        }
    }
    (out, faces)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plane(normal: Point, offset: f64, id: u64) -> Hyperplane {
        Hyperplane { normal, offset, id, birth_time: None }
    }

    #[test]
    fn square_split_in_half() {
        let sq = ConvexPolytope::cuboid(&[0.0, 0.0], &[1.0, 1.0]).unwrap();
        let split = sq.clip(&plane([1.0, 0.0, 0.0], 0.5, 7)).unwrap();
        assert!((split.positive.volume() - 0.5).abs() < 1e-15);
        assert!((split.negative.volume() - 0.5).abs() < 1e-15);
        assert!((split.face.content() - 1.0).abs() < 1e-15);
        assert_eq!(split.face.edge_tags, vec![FacetTag::Window, FacetTag::Window]);
        for part in [&split.positive, &split.negative] {
            assert_eq!(part.facets().iter().filter(|f| f.tag == FacetTag::Split(7)).count(), 1);
            assert!(part.max_facet_violation() < 1e-12);
        }
        assert!(split.positive.vertices().iter().all(|v| v[0] >= 0.5 - 1e-12));
    }

    #[test]
    fn cube_diagonal_cut_gives_hexagon() {
        let cube = ConvexPolytope::cuboid(&[0.0; 3], &[1.0; 3]).unwrap();
        let k = 1.0 / 3f64.sqrt();
        let split = cube.clip(&plane([k, k, k], 1.5 * k, 1)).unwrap();
        assert_eq!(split.face.vertices.len(), 6);
        // regular hexagon with side sqrt(2)/2
        for i in 0..6 {
            let d = point::dist(split.face.vertices[i], split.face.vertices[(i + 1) % 6]);
            assert!((d - 0.5f64.sqrt()).abs() < 1e-12);
        }
        let area = 3.0 * 3f64.sqrt() / 2.0 * 0.5;
        assert!((split.face.content() - area).abs() < 1e-12);
        assert!((split.positive.volume() - 0.5).abs() < 1e-12);
        assert!((split.negative.volume() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn missing_plane_is_rejected() {
        let cube = ConvexPolytope::cuboid(&[0.0; 3], &[1.0; 3]).unwrap();
        assert!(matches!(cube.clip(&plane([1.0, 0.0, 0.0], 2.0, 1)), Err(Error::NonSplitting)));
        assert!(matches!(cube.clip(&plane([1.0, 0.0, 0.0], 1.0, 1)), Err(Error::NonSplitting)));
        let sq = ConvexPolytope::cuboid(&[0.0, 0.0], &[1.0, 1.0]).unwrap();
        assert!(matches!(sq.clip(&plane([0.0, 1.0, 0.0], -0.1, 1)), Err(Error::NonSplitting)));
    }

    #[test]
    fn cube_split_edge_tags() {
        let cube = ConvexPolytope::cuboid(&[0.0; 3], &[1.0; 3]).unwrap();
        let split = cube.clip(&plane([1.0, 0.0, 0.0], 0.3, 4)).unwrap();
        for part in [&split.positive, &split.negative] {
            let edges = part.edges_with_tags().unwrap();
            assert_eq!(edges.len(), 12);
            let mixed = edges
                .iter()
                .filter(|e| e.tags.contains(&FacetTag::Split(4)) && e.tags.contains(&FacetTag::Window))
                .count();
            assert_eq!(mixed, 4);
        }
        // parent 12 edges; children 12 + 12 (the 4 cap edges are shared)
        let total: usize = [&split.positive, &split.negative]
            .iter()
            .map(|p| p.edges_with_tags().unwrap().len())
            .sum();
        assert!(total >= 12);
        assert_eq!(split.face.edge_tags.len(), 4);
        assert!(split.face.edge_tags.iter().all(|t| t.is_window()));
    }

    #[test]
    fn simplex_volume_by_clipping() {
        let cube = ConvexPolytope::cuboid(&[0.0; 3], &[1.0; 3]).unwrap();
        let k = 1.0 / 3f64.sqrt();
        let split = cube.clip(&plane([k, k, k], k, 1)).unwrap();
        // the part with x + y + z <= 1 is conv{0, e1, e2, e3}
        assert!((split.negative.volume() - 1.0 / 6.0).abs() < 1e-14);
        assert_eq!(split.negative.vertices().len(), 4);
        assert_eq!(split.negative.facets().len(), 4);
    }
}
