//! Puzzles Π = (F, P): a set F of little triangles and a set P of paths of
//! the dual graph H.
//!
//! A puzzle is the same thing as a tiling of the grid by F-triangles,
//! empty triangles and rhombi whose pieces agree on a 0/1 labelling of
//! their sides: F-triangles carry 1,1,1, empty triangles 0,0,0, and the
//! rhombus whose short diagonal has direction ξ_j carries 1 on its two
//! ξ_{j−1} sides and 0 on its two ξ_{j+1} sides. Rhombi are exactly the
//! arcs of H used by P; maximal runs of them along a line are the
//! nondegenerate paths, and the remaining F-sides are served by degenerate
//! paths. [`enumerate_puzzles`] searches over such tilings;
//! [`validate_puzzle`] checks the definition directly and shares no code
//! with the search.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cocirc::BoundaryData;
use crate::dualflow::{AttachedPath, CConfiguration, Element};
use crate::grid::{BoundarySign, ConvexGrid, Dir, DirEdge, HPath, LittleTriangle};
use crate::rational::Rational;

pub const DEFAULT_CAP: usize = 25;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PuzzleError {
    #[error("grid has {triangles} triangles, above the enumeration cap of {cap}")]
    GridTooLarge { triangles: usize, cap: usize },
    #[error("not a 3-side grid")]
    NotThreeSideGrid,
    #[error("invalid labelling: {0}")]
    InvalidLabeling(String),
    #[error("the labelling describes the empty puzzle")]
    EmptyPuzzle,
}

/// Enumeration cap: `TRIGRID_CAP` if set and numeric, else 25 triangles.
pub fn default_cap() -> usize {
    std::env::var("TRIGRID_CAP").ok().and_then(|v| v.trim().parse().ok()).unwrap_or(DEFAULT_CAP)
}

#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Puzzle {
    pub triangles: BTreeSet<LittleTriangle>,
    pub paths: BTreeSet<HPath>,
}

impl Puzzle {
    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty() && self.paths.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Clause {
    /// Pieces are not in the grid or paths are not paths of H.
    Domain,
    /// (i) interiors of F-triangles and paths overlap.
    Disjointness,
    /// (ii) an F-triangle side lacks exactly one attached path.
    SidePaths,
    /// (iii) a path starts or ends at an inadmissible edge.
    Terminals,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub clause: Clause,
    pub detail: String,
}

fn violation(clause: Clause, detail: String) -> Result<(), Violation> {
    Err(Violation { clause, detail })
}

/// Checks the definition of a puzzle clause by clause.
///
/// The interior of a nondegenerate path is taken to be the union of the
/// open rhombi it crosses, so (i) becomes: no little triangle lies in two
/// of F and the rhombi of P, and no degenerate path sits inside another
/// path's interior.
pub fn validate_puzzle(grid: &ConvexGrid, p: &Puzzle) -> Result<(), Violation> {
    let mut tri_ids = BTreeSet::new();
    for t in &p.triangles {
        match grid.triangle_id(t) {
            Some(i) => tri_ids.insert(i),
            None => return violation(Clause::Domain, format!("{t} is not in the grid")),
        };
    }
    let mut walks = Vec::new();
    for path in &p.paths {
        match path.vertices(grid) {
            Some(vs) => walks.push((path, vs)),
            None => return violation(Clause::Domain, format!("{path} is not a path of H")),
        }
    }

    // (i)
    let mut owner: BTreeMap<usize, String> = tri_ids.iter().map(|&t| (t, format!("F-triangle {}", grid.triangle(t)))).collect();
    let mut inner_points: BTreeMap<usize, &HPath> = BTreeMap::new();
    for (path, vs) in &walks {
        for w in vs.windows(2) {
            // the rhombus of tandem (e, e′): normal triangle at e, turned-over at e′
            let n = grid.edge_triangles(w[0]).normal.expect("tandem has a normal half");
            let t = grid.edge_triangles(w[1]).turned.expect("tandem has a turned-over half");
            for tri in [n, t] {
                if let Some(prev) = owner.insert(tri, path.to_string()) {
                    return violation(
                        Clause::Disjointness,
                        format!("{} is covered by both {prev} and {path}", grid.triangle(tri)),
                    );
                }
            }
            // midpoint of the rhombus' short diagonal
            let diag = grid.triangle(n).edge(grid.edge(w[0]).dir.next());
            inner_points.insert(grid.edge_id(&diag).unwrap(), path);
        }
        for &v in vs.iter().skip(1).take(vs.len().saturating_sub(2)) {
            inner_points.insert(v, path);
        }
    }
    for (path, vs) in &walks {
        if path.is_degenerate() {
            if let Some(other) = inner_points.get(&vs[0]) {
                return violation(Clause::Disjointness, format!("{path} lies inside {other}"));
            }
        }
    }

    let in_f = |e: &DirEdge, normal: bool| -> bool {
        let tri = if normal { e.normal_triangle() } else { e.turned_triangle() };
        p.triangles.contains(&tri)
    };
    let sign = |e: &DirEdge| grid.edge_id(e).and_then(|i| grid.sign(i));

    // (ii)
    for t in &p.triangles {
        for e in t.edges() {
            let n = if t.is_normal() {
                p.paths.iter().filter(|q| q.to == e).count()
            } else {
                p.paths.iter().filter(|q| q.from == e).count()
            };
            if n != 1 {
                let verb = if t.is_normal() { "entering" } else { "leaving" };
                return violation(Clause::SidePaths, format!("side {e} of {t} has {n} paths {verb} it"));
            }
        }
    }

    // (iii)
    for q in &p.paths {
        if !(in_f(&q.from, false) || sign(&q.from) == Some(BoundarySign::Plus)) {
            return violation(Clause::Terminals, format!("{q} leaves an inadmissible edge"));
        }
        if !(in_f(&q.to, true) || sign(&q.to) == Some(BoundarySign::Minus)) {
            return violation(Clause::Terminals, format!("{q} enters an inadmissible edge"));
        }
    }
    Ok(())
}

/// (b⁺, b⁻): outer edges left or entered by some path, split by class.
pub fn boundary(grid: &ConvexGrid, p: &Puzzle) -> (BTreeSet<DirEdge>, BTreeSet<DirEdge>) {
    let mut plus = BTreeSet::new();
    let mut minus = BTreeSet::new();
    for q in &p.paths {
        for e in [q.from, q.to] {
            match grid.edge_id(&e).and_then(|i| grid.sign(i)) {
                Some(BoundarySign::Plus) => {
                    plus.insert(e);
                }
                Some(BoundarySign::Minus) => {
                    minus.insert(e);
                }
                None => {}
            }
        }
    }
    (plus, minus)
}

/// σ(b⁺(Π)) − σ(b⁻(Π)).
pub fn puzzle_inequality(grid: &ConvexGrid, p: &Puzzle, sigma: &BoundaryData) -> Rational {
    let (plus, minus) = boundary(grid, p);
    let sum = |s: &BTreeSet<DirEdge>| s.iter().fold(Rational::zero(), |acc, e| acc + sigma.get(e));
    sum(&plus) - sum(&minus)
}

/// Γ_Π: vertices are F-triangles and boundary edges, one edge per path
/// joining what it leaves to what it enters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PuzzleGraph {
    pub vertices: Vec<Element>,
    pub edges: Vec<(usize, usize)>,
}

/// What a path of a valid puzzle leaves and enters.
fn path_ends(p: &Puzzle, q: &HPath) -> (Element, Element) {
    let from = if p.triangles.contains(&q.from.turned_triangle()) {
        Element::Triangle(q.from.turned_triangle())
    } else {
        Element::Edge(q.from)
    };
    let to = if p.triangles.contains(&q.to.normal_triangle()) {
        Element::Triangle(q.to.normal_triangle())
    } else {
        Element::Edge(q.to)
    };
    (from, to)
}

pub fn puzzle_graph(grid: &ConvexGrid, p: &Puzzle) -> PuzzleGraph {
    let (plus, minus) = boundary(grid, p);
    let mut vertices: Vec<Element> = p.triangles.iter().map(|t| Element::Triangle(*t)).collect();
    vertices.extend(plus.union(&minus).map(|e| Element::Edge(*e)));
    let index: BTreeMap<Element, usize> = vertices.iter().enumerate().map(|(i, v)| (*v, i)).collect();
    let edges = p
        .paths
        .iter()
        .map(|q| {
            let (a, b) = path_ends(p, q);
            (index[&a], index[&b])
        })
        .collect();
    PuzzleGraph { vertices, edges }
}

/// (|F|, |P|).
pub fn puzzle_counts(p: &Puzzle) -> (usize, usize) {
    (p.triangles.len(), p.paths.len())
}

/// The oriented c-configuration of a puzzle: Φ⁺ holds the turned-over
/// F-triangles and b⁺ edges, Φ⁻ the normal F-triangles and b⁻ edges, and
/// every path is attached to what it leaves and enters.
pub fn to_cconfig(grid: &ConvexGrid, p: &Puzzle) -> CConfiguration {
    let (plus, minus) = boundary(grid, p);
    let mut c = CConfiguration::default();
    c.phi_plus.extend(p.triangles.iter().filter(|t| !t.is_normal()).map(|t| Element::Triangle(*t)));
    c.phi_plus.extend(plus.iter().map(|e| Element::Edge(*e)));
    c.phi_minus.extend(p.triangles.iter().filter(|t| t.is_normal()).map(|t| Element::Triangle(*t)));
    c.phi_minus.extend(minus.iter().map(|e| Element::Edge(*e)));
    for q in &p.paths {
        let (a, b) = path_ends(p, q);
        let emitter = c.phi_plus.iter().position(|x| *x == a).expect("emitter present");
        let absorber = c.phi_minus.iter().position(|x| *x == b).expect("absorber present");
        c.paths.push(AttachedPath { path: *q, emitter, absorber });
    }
    c
}

// ---------------------------------------------------------------------------
// Tilings

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Slot {
    Full,
    Empty,
    /// Half of the rhombus whose short diagonal is this triangle's side
    /// along `diag`.
    Rhombus { diag: Dir },
}

/// Side labels of a piece; `None` marks a rhombus diagonal.
fn side_label(slot: Slot, side: Dir) -> Option<u8> {
    match slot {
        Slot::Full => Some(1),
        Slot::Empty => Some(0),
        Slot::Rhombus { diag } if side == diag => None,
        Slot::Rhombus { diag } if side == diag.prev() => Some(1),
        Slot::Rhombus { .. } => Some(0),
    }
}

/// Reads a puzzle off a complete tiling.
fn puzzle_from_tiling(grid: &ConvexGrid, slots: &[Slot]) -> Puzzle {
    let triangles: BTreeSet<LittleTriangle> =
        (0..slots.len()).filter(|&t| slots[t] == Slot::Full).map(|t| grid.triangle(t)).collect();
    // arc leaving v_e is used iff the normal triangle at e is a rhombus half
    // with diagonal along dir(e)+1
    let arc_used = |e: usize| -> bool {
        grid.dual().successor(e).is_some()
            && grid
                .edge_triangles(e)
                .normal
                .is_some_and(|n| slots[n] == Slot::Rhombus { diag: grid.edge(e).dir.next() })
    };
    let mut paths = BTreeSet::new();
    for comp in &grid.dual().lines {
        for line in comp {
            let vs = &line.vertices;
            let mut k = 0;
            while k < vs.len() {
                if arc_used(vs[k]) {
                    let start = k;
                    while arc_used(vs[k]) {
                        k += 1;
                    }
                    paths.insert(HPath::new(grid.edge(vs[start]), grid.edge(vs[k])));
                }
                k += 1;
            }
        }
    }
    let served_in: BTreeSet<DirEdge> = paths.iter().map(|q| q.to).collect();
    let served_out: BTreeSet<DirEdge> = paths.iter().map(|q| q.from).collect();
    let mut degenerate = Vec::new();
    for t in &triangles {
        for e in t.edges() {
            let served = if t.is_normal() { served_in.contains(&e) } else { served_out.contains(&e) };
            if !served {
                degenerate.push(HPath::new(e, e));
            }
        }
    }
    paths.extend(degenerate);
    Puzzle { triangles, paths }
}

struct Search<'a> {
    grid: &'a ConvexGrid,
    slots: Vec<Option<Slot>>,
    /// (label, number of pieces that set it) per edge
    labels: Vec<(u8, u8)>,
    out: Vec<Puzzle>,
}

impl Search<'_> {
    fn place(&mut self, t: usize, slot: Slot, undo: &mut Vec<usize>) -> bool {
        for side in Dir::ALL {
            let Some(l) = side_label(slot, side) else { continue };
            let e = self.grid.triangle_edges(t)[side.slot()];
            let entry = &mut self.labels[e];
            if entry.1 > 0 && entry.0 != l {
                return false;
            }
            entry.0 = l;
            entry.1 += 1;
            undo.push(e);
        }
        self.slots[t] = Some(slot);
        true
    }

    fn unplace(&mut self, t: usize, undo: &mut Vec<usize>) {
        for e in undo.drain(..) {
            self.labels[e].1 -= 1;
        }
        self.slots[t] = None;
    }

    fn run(&mut self, from: usize) {
        let Some(t) = (from..self.slots.len()).find(|&t| self.slots[t].is_none()) else {
            let slots: Vec<Slot> = self.slots.iter().map(|s| s.unwrap()).collect();
            if slots.iter().any(|s| *s != Slot::Empty) {
                self.out.push(puzzle_from_tiling(self.grid, &slots));
            }
            return;
        };
        let mut options = vec![(Slot::Empty, None), (Slot::Full, None)];
        for diag in Dir::ALL {
            let e = self.grid.triangle_edges(t)[diag.slot()];
            let et = self.grid.edge_triangles(e);
            let partner = if self.grid.triangle(t).is_normal() { et.turned } else { et.normal };
            if let Some(u) = partner.filter(|&u| self.slots[u].is_none()) {
                options.push((Slot::Rhombus { diag }, Some(u)));
            }
        }
        for (slot, partner) in options {
            let mut undo_t = Vec::new();
            let mut undo_u = Vec::new();
            let ok = self.place(t, slot, &mut undo_t) && partner.is_none_or(|u| self.place(u, slot, &mut undo_u));
            if ok {
                self.run(t + 1);
            }
            if let Some(u) = partner {
                self.unplace(u, &mut undo_u);
            }
            self.unplace(t, &mut undo_t);
        }
    }
}

/// All puzzles other than the empty one, in canonical order.
pub fn enumerate_puzzles(grid: &ConvexGrid) -> Result<Vec<Puzzle>, PuzzleError> {
    enumerate_puzzles_with_cap(grid, default_cap())
}

pub fn enumerate_puzzles_with_cap(grid: &ConvexGrid, cap: usize) -> Result<Vec<Puzzle>, PuzzleError> {
    let n = grid.triangles().len();
    if n > cap {
        return Err(PuzzleError::GridTooLarge { triangles: n, cap });
    }
    let mut s = Search { grid, slots: vec![None; n], labels: vec![(0, 0); grid.edges().len()], out: Vec::new() };
    s.run(0);
    let mut out = s.out;
    out.sort();
    Ok(out)
}

// ---------------------------------------------------------------------------
// Label form

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Piece {
    Triangle(LittleTriangle),
    /// (normal half, turned-over half)
    Rhombus(LittleTriangle, LittleTriangle),
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PuzzleLabelForm {
    pub pieces: Vec<Piece>,
    pub labels: BTreeMap<DirEdge, u8>,
}

impl PuzzleLabelForm {
    /// b(D): outer edges labelled 1.
    pub fn boundary(&self, grid: &ConvexGrid) -> BTreeSet<DirEdge> {
        self.labels
            .iter()
            .filter(|(e, l)| **l == 1 && grid.edge_id(e).is_some_and(|i| grid.is_outer(i)))
            .map(|(e, _)| *e)
            .collect()
    }
}

pub fn to_label_form(grid: &ConvexGrid, p: &Puzzle) -> Result<PuzzleLabelForm, PuzzleError> {
    if grid.three_side_size().is_none() {
        return Err(PuzzleError::NotThreeSideGrid);
    }
    let mut slots: Vec<Option<Slot>> = vec![None; grid.triangles().len()];
    let mut pieces = Vec::new();
    for t in &p.triangles {
        let i = grid.triangle_id(t).ok_or_else(|| PuzzleError::InvalidLabeling(format!("{t} is off the grid")))?;
        slots[i] = Some(Slot::Full);
        pieces.push(Piece::Triangle(*t));
    }
    for q in &p.paths {
        let vs = q.vertices(grid).ok_or_else(|| PuzzleError::InvalidLabeling(format!("{q} is not a path")))?;
        for w in vs.windows(2) {
            let n = grid.edge_triangles(w[0]).normal.unwrap();
            let t = grid.edge_triangles(w[1]).turned.unwrap();
            let diag = grid.edge(w[0]).dir.next();
            slots[n] = Some(Slot::Rhombus { diag });
            slots[t] = Some(Slot::Rhombus { diag });
            pieces.push(Piece::Rhombus(grid.triangle(n), grid.triangle(t)));
        }
    }
    for (i, s) in slots.iter_mut().enumerate() {
        if s.is_none() {
            *s = Some(Slot::Empty);
            pieces.push(Piece::Triangle(grid.triangle(i)));
        }
    }
    let mut labels = BTreeMap::new();
    for (i, s) in slots.iter().enumerate() {
        for side in Dir::ALL {
            if let Some(l) = side_label(s.unwrap(), side) {
                labels.insert(grid.triangle(i).edge(side), l);
            }
        }
    }
    pieces.sort();
    Ok(PuzzleLabelForm { pieces, labels })
}

/// Labels of a rhombus read clockwise starting at an acute vertex.
fn clockwise_from_acute(n: &LittleTriangle, t: &LittleTriangle, labels: &BTreeMap<DirEdge, u8>) -> Option<Vec<u8>> {
    let nv: BTreeSet<_> = n.vertices().into_iter().collect();
    let tv: BTreeSet<_> = t.vertices().into_iter().collect();
    let shared: Vec<_> = nv.intersection(&tv).copied().collect();
    if shared.len() != 2 {
        return None;
    }
    let acute_n = *nv.difference(&tv).next()?;
    let acute_t = *tv.difference(&nv).next()?;
    // the normal half is counterclockwise, so from its acute vertex the
    // clockwise walk first visits the shared vertex that precedes it on the
    // normal triangle's circuit
    let nvs = n.vertices();
    let k = nvs.iter().position(|&x| x == acute_n)?;
    let before = nvs[(k + 2) % 3];
    let after = nvs[(k + 1) % 3];
    let cycle = [acute_n, before, acute_t, after, acute_n];
    let mut out = Vec::new();
    for w in cycle.windows(2) {
        let e = n.edges().into_iter().chain(t.edges()).find(|e| {
            (e.tail == w[0] && e.head() == w[1]) || (e.tail == w[1] && e.head() == w[0])
        })?;
        out.push(*labels.get(&e)?);
    }
    Some(out)
}

pub fn from_label_form(grid: &ConvexGrid, d: &PuzzleLabelForm) -> Result<Puzzle, PuzzleError> {
    if grid.three_side_size().is_none() {
        return Err(PuzzleError::NotThreeSideGrid);
    }
    let bad = |m: String| PuzzleError::InvalidLabeling(m);
    let mut slots: Vec<Option<Slot>> = vec![None; grid.triangles().len()];
    let mut claim = |t: &LittleTriangle, s: Slot| -> Result<(), PuzzleError> {
        let i = grid.triangle_id(t).ok_or_else(|| bad(format!("{t} is off the grid")))?;
        if slots[i].replace(s).is_some() {
            return Err(bad(format!("{t} is in two pieces")));
        }
        Ok(())
    };
    for piece in &d.pieces {
        match piece {
            Piece::Triangle(t) => {
                let ls: Vec<Option<&u8>> = t.edges().iter().map(|e| d.labels.get(e)).collect();
                let slot = match ls.as_slice() {
                    [Some(1), Some(1), Some(1)] => Slot::Full,
                    [Some(0), Some(0), Some(0)] => Slot::Empty,
                    _ => return Err(bad(format!("{t} is not labelled 111 or 000"))),
                };
                claim(t, slot)?;
            }
            Piece::Rhombus(n, t) => {
                if !n.is_normal() || t.is_normal() {
                    return Err(bad(format!("rhombus {n}/{t} must list its normal half first")));
                }
                let diag = Dir::ALL
                    .into_iter()
                    .find(|&dir| n.edge(dir) == t.edge(dir))
                    .ok_or_else(|| bad(format!("{n} and {t} do not form a rhombus")))?;
                if clockwise_from_acute(n, t, &d.labels).as_deref() != Some(&[0, 1, 0, 1]) {
                    return Err(bad(format!("rhombus {n}/{t} is not labelled 0,1,0,1 clockwise from an acute vertex")));
                }
                claim(n, Slot::Rhombus { diag })?;
                claim(t, Slot::Rhombus { diag })?;
            }
        }
    }
    let slots: Vec<Slot> = slots
        .into_iter()
        .enumerate()
        .map(|(i, s)| s.ok_or_else(|| bad(format!("{} is in no piece", grid.triangle(i)))))
        .collect::<Result<_, _>>()?;
    // pieces must agree wherever they meet
    for (i, s) in slots.iter().enumerate() {
        for side in Dir::ALL {
            if let Some(l) = side_label(*s, side) {
                let e = grid.triangle(i).edge(side);
                if d.labels.get(&e) != Some(&l) {
                    return Err(bad(format!("edge {e} carries the wrong label for {}", grid.triangle(i))));
                }
            }
        }
    }
    let p = puzzle_from_tiling(grid, &slots);
    if p.is_empty() {
        return Err(PuzzleError::EmptyPuzzle);
    }
    validate_puzzle(grid, &p).map_err(|v| bad(v.detail))?;
    Ok(p)
}
