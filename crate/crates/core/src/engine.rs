//! The random processes: the cell-division construction `Y_W(t)`, Poisson
//! hyperplane tessellations, iteration and rescaling.
//!
//! A STIT run is event driven. Every live cell draws its exponential lifetime
//! once when it is created; the cell with the earliest death time below the
//! horizon is split by a hyperplane drawn from `Λ(· | ⟨c⟩)` and its two
//! children are scheduled in turn. Each cell owns a random stream derived
//! from its lineage, so a run depends only on the stream key it starts from.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt::Write as _;

use rand::Rng;
use rand_distr::{Exp1, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{ConvexPolytope, PolytopeJson, SplitFace, Window};
use crate::measure::{self, DirectionalDistribution, Hyperplane};
use crate::rng::{StreamKey, StreamRng};

/// Cells smaller than this fraction of the window are never scheduled again.
pub const SLIVER_FRACTION: f64 = 1e-12;

const MAX_REDRAWS: usize = 64;

/// One cell division: the hyperplane piece `c ∩ H` born at `birth_time`.
#[derive(Clone, Debug)]
pub struct SplitEvent {
    pub id: u64,
    /// Id of the divided cell; `None` for Poisson hyperplanes.
    pub parent: Option<u64>,
    pub hyperplane: Hyperplane,
    pub birth_time: f64,
    pub face: SplitFace,
}

#[derive(Clone, Debug)]
pub struct Cell {
    pub id: u64,
    pub birth_time: f64,
    pub polytope: ConvexPolytope,
    /// Sliver cells are kept but no longer divided.
    pub frozen: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Process {
    Stit,
    Pht,
    Iterated,
}

#[derive(Clone, Debug)]
pub struct Tessellation {
    pub process: Process,
    pub window: Window,
    pub horizon: f64,
    pub directions: DirectionalDistribution,
    pub cells: Vec<Cell>,
    /// Sorted by birth time.
    pub events: Vec<SplitEvent>,
    pub seed: u64,
}

impl Tessellation {
    pub fn dim(&self) -> usize {
        self.window.dim()
    }

    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }

    /// Total `(d-1)`-content of the division faces: edge length in the
    /// plane, facet area in space.
    pub fn total_face_content(&self) -> f64 {
        self.events.iter().map(|e| e.face.content()).sum()
    }

    /// `|Σ vol(cell) / vol(W) - 1|`.
    pub fn tiling_defect(&self) -> f64 {
        let total: f64 = self.cells.iter().map(|c| c.polytope.volume()).sum();
        (total / self.window.volume() - 1.0).abs()
    }

    /// Index of the event with the given id.
    pub fn event_index(&self, id: u64) -> Option<usize> {
        self.events.binary_search_by_key(&id, |e| e.id).ok().or_else(|| self.events.iter().position(|e| e.id == id))
    }

    pub fn to_json(&self) -> TessellationJson {
        TessellationJson {
            version: crate::VERSION.to_string(),
            process: self.process,
            dim: self.dim(),
            window: self.window.clone(),
            directions: self.directions.descriptor(),
            horizon: self.horizon,
            seed: self.seed,
            events: self
                .events
                .iter()
                .map(|e| EventJson {
                    id: e.id,
                    parent: e.parent,
                    birth_time: e.birth_time,
                    hyperplane: HyperplaneJson {
                        normal: e.hyperplane.normal[..self.dim()].to_vec(),
                        offset: e.hyperplane.offset,
                    },
                    face: e.face.vertices.iter().map(|v| v[..self.dim()].to_vec()).collect(),
                })
                .collect(),
            cells: self.cells.iter().map(|c| c.polytope.to_json()).collect(),
        }
    }

    /// Planar rendering, see [`TessellationJson::to_svg`].
    pub fn to_svg(&self, pixels: f64) -> Result<String> {
        self.to_json().to_svg(pixels)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HyperplaneJson {
    pub normal: Vec<f64>,
    pub offset: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EventJson {
    pub id: u64,
    pub parent: Option<u64>,
    pub birth_time: f64,
    pub hyperplane: HyperplaneJson,
    pub face: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TessellationJson {
    pub version: String,
    pub process: Process,
    pub dim: usize,
    pub window: Window,
    pub directions: String,
    pub horizon: f64,
    pub seed: u64,
    pub events: Vec<EventJson>,
    pub cells: Vec<PolytopeJson>,
}

impl TessellationJson {
    /// Planar rendering: the window and one line per division face. Faces
    /// born in the last quarter of the time horizon are dashed.
    pub fn to_svg(&self, pixels: f64) -> Result<String> {
        if self.dim != 2 {
            return Err(Error::UnsupportedDimension { dim: self.dim, what: "SVG rendering" });
        }
        if !(pixels > 0.0) {
            return Err(Error::invalid("image size must be positive"));
        }
        let sides = self.window.sides();
        let k = pixels / sides[0].max(sides[1]);
        let (w, h) = (sides[0] * k, sides[1] * k);
        let map = |p: &[f64]| ((p[0] - self.window.lo[0]) * k, (self.window.hi[1] - p[1]) * k);
        let stroke = (pixels / 400.0).max(0.5);
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.2}" height="{h:.2}" viewBox="0 0 {w:.2} {h:.2}">"#
        );
        let _ = writeln!(
            s,
            r#"<rect x="0" y="0" width="{w:.2}" height="{h:.2}" fill="white" stroke="black" stroke-width="{:.2}"/>"#,
            2.0 * stroke
        );
        let late = 0.75 * self.horizon;
        for e in &self.events {
            if e.face.len() != 2 || e.face.iter().any(|v| v.len() != 2) {
                return Err(Error::invalid(format!("event {} is not a planar chord", e.id)));
            }
            let (x1, y1) = map(&e.face[0]);
            let (x2, y2) = map(&e.face[1]);
            let dash = if e.birth_time > late { r#" stroke-dasharray="4 3""# } else { "" };
            let _ = writeln!(
                s,
                r#"<line x1="{x1:.3}" y1="{y1:.3}" x2="{x2:.3}" y2="{y2:.3}" stroke="black" stroke-width="{stroke:.2}"{dash}/>"#
            );
        }
        s.push_str("</svg>\n");
        Ok(s)
    }
}

fn check_inputs(window: &Window, q: &DirectionalDistribution, t: f64) -> Result<()> {
    if q.dim() != window.dim() {
        return Err(Error::DimensionMismatch { expected: window.dim(), got: q.dim() });
    }
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::invalid(format!("time horizon must be finite and non-negative, got {t}")));
    }
    Ok(())
}

/// `Y_W(t)` from the root stream of `seed`.
pub fn simulate_stit(window: &Window, q: &DirectionalDistribution, t: f64, seed: u64) -> Result<Tessellation> {
    simulate_stit_keyed(window, q, t, seed, StreamKey::root(seed))
}

/// `Y_W(t)` from an explicit stream key; `seed` is only recorded.
pub fn simulate_stit_keyed(
    window: &Window,
    q: &DirectionalDistribution,
    t: f64,
    seed: u64,
    key: StreamKey,
) -> Result<Tessellation> {
    check_inputs(window, q, t)?;
    let mut grower = Grower::new(q, window.volume() * SLIVER_FRACTION);
    grower.grow(window.polytope(), 0.0, t, key)?;
    Ok(grower.finish(Process::Stit, window, q, t, seed))
}

/// Run the division process on from the horizon of `tess` to `until` inside
/// every cell, each cell with its own stream `key.child(cell index)`.
pub fn continue_from(tess: &Tessellation, until: f64, key: StreamKey) -> Result<Tessellation> {
    if !(until >= tess.horizon) {
        return Err(Error::invalid("continuation must not go back in time"));
    }
    let q = &tess.directions;
    let mut grower = Grower::new(q, tess.window.volume() * SLIVER_FRACTION);
    grower.next_cell = tess.cells.iter().map(|c| c.id + 1).max().unwrap_or(0);
    grower.next_event = tess.events.iter().map(|e| e.id + 1).max().unwrap_or(0);
    grower.events = tess.events.clone();
    for (i, cell) in tess.cells.iter().enumerate() {
        if cell.frozen {
            grower.cells.push(cell.clone());
            continue;
        }
        grower.grow_cell(cell.polytope.clone(), cell.id, tess.horizon, until, key.child(i as u64))?;
    }
    let process = if tess.process == Process::Stit { Process::Iterated } else { tess.process };
    Ok(grower.finish(process, &tess.window, q, until, tess.seed))
}

/// `Y_W(s) ⊞ Y(t)`: an outer run to `s`, then an independent run of length
/// `t` inside every outer cell. Inner birth times are shifted into `(s, s+t)`.
pub fn iterate(window: &Window, q: &DirectionalDistribution, s: f64, t: f64, seed: u64) -> Result<Tessellation> {
    iterate_keyed(window, q, s, t, seed, StreamKey::root(seed))
}

pub fn iterate_keyed(
    window: &Window,
    q: &DirectionalDistribution,
    s: f64,
    t: f64,
    seed: u64,
    key: StreamKey,
) -> Result<Tessellation> {
    check_inputs(window, q, t)?;
    let outer = simulate_stit_keyed(window, q, s, seed, key.child(0))?;
    let mut out = continue_from(&outer, s + t, key.child(1))?;
    out.process = Process::Iterated;
    Ok(out)
}

/// Poisson hyperplane tessellation with intensity measure `tΛ`: a Poisson
/// number of hyperplanes from `Λ(· | ⟨W⟩)`, all recorded with birth time `t`.
pub fn simulate_pht(window: &Window, q: &DirectionalDistribution, t: f64, seed: u64) -> Result<Tessellation> {
    simulate_pht_keyed(window, q, t, seed, StreamKey::root(seed))
}

pub fn simulate_pht_keyed(
    window: &Window,
    q: &DirectionalDistribution,
    t: f64,
    seed: u64,
    key: StreamKey,
) -> Result<Tessellation> {
    check_inputs(window, q, t)?;
    let w = window.polytope();
    let mut rng = key.rng();
    let mean = t * measure::lambda_of_body(q, &w)?;
    let count = if mean > 0.0 { rng.sample(Poisson::new(mean).map_err(|e| Error::invalid(e.to_string()))?) as u64 } else { 0 };
    let mut cells = vec![w.clone()];
    let mut events = Vec::with_capacity(count as usize);
    for id in 0..count {
        let (h, split) = draw_split(q, &w, &mut rng, id)?;
        let h = Hyperplane { birth_time: Some(t), ..h };
        let mut next = Vec::with_capacity(cells.len() + 8);
        for c in cells {
            match c.clip(&h) {
                Ok(sp) => {
                    next.push(sp.positive);
                    next.push(sp.negative);
                }
                Err(Error::NonSplitting) => next.push(c),
                Err(e) => return Err(e),
            }
        }
        cells = next;
        events.push(SplitEvent { id, parent: None, hyperplane: h, birth_time: t, face: split.face });
    }
    let sliver = window.volume() * SLIVER_FRACTION;
    Ok(Tessellation {
        process: Process::Pht,
        window: window.clone(),
        horizon: t,
        directions: q.clone(),
        cells: cells
            .into_iter()
            .enumerate()
            .map(|(i, p)| Cell { id: i as u64, birth_time: t, frozen: p.volume() < sliver, polytope: p })
            .collect(),
        events,
        seed,
    })
}

/// Multiply all coordinates by `r`; birth times and horizon are unchanged.
pub fn rescale(tess: &Tessellation, r: f64) -> Result<Tessellation> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::invalid(format!("scale factor must be positive, got {r}")));
    }
    Ok(Tessellation {
        process: tess.process,
        window: tess.window.scaled(r),
        horizon: tess.horizon,
        directions: tess.directions.clone(),
        cells: tess
            .cells
            .iter()
            .map(|c| Cell { polytope: c.polytope.scaled(r), ..c.clone() })
            .collect(),
        events: tess
            .events
            .iter()
            .map(|e| SplitEvent {
                hyperplane: Hyperplane { offset: e.hyperplane.offset * r, ..e.hyperplane },
                face: e.face.scaled(r),
                ..e.clone()
            })
            .collect(),
        seed: tess.seed,
    })
}

// Draw from Λ(· | ⟨c⟩) until the clip succeeds numerically; failures only
// happen for hyperplanes grazing a vertex, a null set.
fn draw_split(
    q: &DirectionalDistribution,
    c: &ConvexPolytope,
    rng: &mut StreamRng,
    id: u64,
) -> Result<(Hyperplane, crate::geometry::Split)> {
    for _ in 0..MAX_REDRAWS {
        let h = Hyperplane { id, ..measure::sample_hitting_hyperplane(q, c, rng)? };
        match c.clip(&h) {
            Ok(split) => return Ok((h, split)),
            Err(Error::NonSplitting) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::DegeneratePolytope("no splitting hyperplane found".into()))
}

struct Live {
    death: f64,
    seq: u64,
    slot: usize,
}

impl PartialEq for Live {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Live {}
impl PartialOrd for Live {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Live {
    // min-heap on (death, seq)
    fn cmp(&self, other: &Self) -> Ordering {
        other.death.total_cmp(&self.death).then(other.seq.cmp(&self.seq))
    }
}

struct Slot {
    id: u64,
    polytope: ConvexPolytope,
    key: StreamKey,
    rng: StreamRng,
}

struct Grower<'a> {
    q: &'a DirectionalDistribution,
    sliver: f64,
    next_cell: u64,
    next_event: u64,
    cells: Vec<Cell>,
    events: Vec<SplitEvent>,
}

impl<'a> Grower<'a> {
    fn new(q: &'a DirectionalDistribution, sliver: f64) -> Self {
        Grower { q, sliver, next_cell: 0, next_event: 0, cells: Vec::new(), events: Vec::new() }
    }

    fn grow(&mut self, root: ConvexPolytope, from: f64, until: f64, key: StreamKey) -> Result<()> {
        let id = self.next_cell;
        self.next_cell += 1;
        self.grow_cell(root, id, from, until, key)
    }

    fn grow_cell(&mut self, root: ConvexPolytope, id: u64, from: f64, until: f64, key: StreamKey) -> Result<()> {
        let mut slots: Vec<Option<Slot>> = Vec::new();
        let mut heap = BinaryHeap::new();
        let mut seq = 0u64;
        self.schedule(&mut slots, &mut heap, &mut seq, id, root, from, until, key)?;
        while let Some(Live { death, slot, .. }) = heap.pop() {
            let Slot { id, polytope, key, mut rng, .. } = slots[slot].take().expect("live slot");
            let event = self.next_event;
            self.next_event += 1;
            let (h, split) = draw_split(self.q, &polytope, &mut rng, event)?;
            let h = Hyperplane { birth_time: Some(death), ..h };
            self.events.push(SplitEvent { id: event, parent: Some(id), hyperplane: h, birth_time: death, face: split.face });
            for (i, child) in [split.positive, split.negative].into_iter().enumerate() {
                let cid = self.next_cell;
                self.next_cell += 1;
                self.schedule(&mut slots, &mut heap, &mut seq, cid, child, death, until, key.child(i as u64))?;
            }
        }
        Ok(())
    }

    #[allow(clippy::too_many_arguments)]
    fn schedule(
        &mut self,
        slots: &mut Vec<Option<Slot>>,
        heap: &mut BinaryHeap<Live>,
        seq: &mut u64,
        id: u64,
        polytope: ConvexPolytope,
        birth: f64,
        until: f64,
        key: StreamKey,
    ) -> Result<()> {
        if polytope.volume() < self.sliver {
            self.cells.push(Cell { id, birth_time: birth, polytope, frozen: true });
            return Ok(());
        }
        let mut rng = key.rng();
        let rate = measure::lambda_of_body(self.q, &polytope)?;
        let life: f64 = rng.sample::<f64, _>(Exp1) / rate;
        let death = birth + life;
        if !(death < until) {
            self.cells.push(Cell { id, birth_time: birth, polytope, frozen: false });
            return Ok(());
        }
        slots.push(Some(Slot { id, polytope, key, rng }));
        heap.push(Live { death, seq: *seq, slot: slots.len() - 1 });
        *seq += 1;
        Ok(())
    }

    fn finish(
        mut self,
        process: Process,
        window: &Window,
        q: &DirectionalDistribution,
        t: f64,
        seed: u64,
    ) -> Tessellation {
        self.cells.sort_by_key(|c| c.id);
        self.events.sort_by(|a, b| a.birth_time.total_cmp(&b.birth_time).then(a.id.cmp(&b.id)));
        Tessellation {
            process,
            window: window.clone(),
            horizon: t,
            directions: q.clone(),
            cells: self.cells,
            events: self.events,
            seed,
        }
    }
}
