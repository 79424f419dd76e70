//! Convex triangular grids on the lattice spanned by ξ₁, ξ₂ (with ξ₃ = −ξ₁ − ξ₂).
//!
//! Everything here is integer arithmetic on lattice coordinates `(a, b)`,
//! meaning the point `a·ξ₁ + b·ξ₂`. The Cartesian embedding is only used for
//! drawing.
//!
//! A grid is stored in canonical form: triangles, vertices and edges are kept
//! in lexicographic order and every derived structure (boundary classes,
//! side-paths, tandems, the dual graph and its lines) refers to edges by their
//! index in [`ConvexGrid::edges`].

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GridError {
    #[error("grid size must be positive, got {0}")]
    InvalidSize(i64),
    #[error("no triangles given")]
    Empty,
    #[error("duplicate triangle {0}")]
    DuplicateTriangle(LittleTriangle),
    #[error("region is not a convex polygon: {0}")]
    NonConvexRegion(String),
    #[error("side lengths {0:?} do not close up into a polygon")]
    OpenPolygon([i64; 6]),
}

/// A lattice point `a·ξ₁ + b·ξ₂`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(from = "[i64; 2]", into = "[i64; 2]")]
pub struct LatticePoint {
    pub a: i64,
    pub b: i64,
}

impl From<[i64; 2]> for LatticePoint {
    fn from([a, b]: [i64; 2]) -> Self {
        LatticePoint { a, b }
    }
}

impl From<LatticePoint> for [i64; 2] {
    fn from(p: LatticePoint) -> Self {
        [p.a, p.b]
    }
}

impl LatticePoint {
    pub const fn new(a: i64, b: i64) -> Self {
        LatticePoint { a, b }
    }

    pub fn shift(self, (da, db): (i64, i64)) -> Self {
        LatticePoint::new(self.a + da, self.b + db)
    }

    /// Cartesian position for rendering only.
    pub fn cartesian(self) -> (f64, f64) {
        let x = self.a as f64 - 0.5 * self.b as f64;
        let y = self.b as f64 * 3f64.sqrt() / 2.0;
        (x, y)
    }
}

impl fmt::Display for LatticePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.a, self.b)
    }
}

/// 2D cross product of lattice vectors. The basis (ξ₁, ξ₂) is positively
/// oriented, so the sign agrees with the Cartesian cross product.
pub(crate) fn cross(u: (i64, i64), v: (i64, i64)) -> i64 {
    u.0 * v.1 - u.1 * v.0
}

/// One of the three lattice directions ξ₁, ξ₂, ξ₃.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Dir {
    One,
    Two,
    Three,
}

impl Dir {
    pub const ALL: [Dir; 3] = [Dir::One, Dir::Two, Dir::Three];

    pub fn index(self) -> u8 {
        match self {
            Dir::One => 1,
            Dir::Two => 2,
            Dir::Three => 3,
        }
    }

    pub fn from_index(i: u8) -> Option<Dir> {
        match i {
            1 => Some(Dir::One),
            2 => Some(Dir::Two),
            3 => Some(Dir::Three),
            _ => None,
        }
    }

    pub(crate) fn slot(self) -> usize {
        self.index() as usize - 1
    }

    /// Lattice step of ξ_dir.
    pub fn step(self) -> (i64, i64) {
        match self {
            Dir::One => (1, 0),
            Dir::Two => (0, 1),
            Dir::Three => (-1, -1),
        }
    }

    /// ξ_{i−1}, indices mod 3.
    pub fn prev(self) -> Dir {
        match self {
            Dir::One => Dir::Three,
            Dir::Two => Dir::One,
            Dir::Three => Dir::Two,
        }
    }

    /// ξ_{i+1}, indices mod 3.
    pub fn next(self) -> Dir {
        match self {
            Dir::One => Dir::Two,
            Dir::Two => Dir::Three,
            Dir::Three => Dir::One,
        }
    }

    /// Heading in units of 60° counterclockwise from ξ₁ when moving along
    /// (`forward`) or against the direction.
    pub fn heading(self, forward: bool) -> u8 {
        let h = match self {
            Dir::One => 0,
            Dir::Two => 2,
            Dir::Three => 4,
        };
        if forward {
            h
        } else {
            (h + 3) % 6
        }
    }
}

/// A directed lattice edge from `tail` to `tail + ξ_dir`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DirEdge {
    pub tail: LatticePoint,
    pub dir: Dir,
}

impl DirEdge {
    pub const fn new(tail: LatticePoint, dir: Dir) -> Self {
        DirEdge { tail, dir }
    }

    pub fn head(self) -> LatticePoint {
        self.tail.shift(self.dir.step())
    }

    /// The normal triangle containing this edge in the infinite lattice.
    pub fn normal_triangle(self) -> LittleTriangle {
        let LatticePoint { a, b } = self.tail;
        let anchor = match self.dir {
            Dir::One => LatticePoint::new(a, b),
            Dir::Two => LatticePoint::new(a - 1, b),
            Dir::Three => LatticePoint::new(a - 1, b - 1),
        };
        LittleTriangle::normal(anchor)
    }

    /// The turned-over triangle containing this edge in the infinite lattice.
    pub fn turned_triangle(self) -> LittleTriangle {
        let LatticePoint { a, b } = self.tail;
        let anchor = match self.dir {
            Dir::One => LatticePoint::new(a, b - 1),
            Dir::Two => LatticePoint::new(a, b),
            Dir::Three => LatticePoint::new(a - 1, b - 1),
        };
        LittleTriangle::turned(anchor)
    }

    /// Second edge of the normal tandem starting at this edge: the parallel
    /// edge displaced by −ξ_{i−1}.
    pub fn normal_tandem_partner(self) -> DirEdge {
        let (da, db) = self.dir.prev().step();
        DirEdge::new(self.tail.shift((-da, -db)), self.dir)
    }
}

impl fmt::Display for DirEdge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{}", self.tail.a, self.tail.b, self.dir.index())
    }
}

impl FromStr for DirEdge {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(format!("edge id {s:?} is not of the form \"a,b,dir\""));
        }
        let a = parts[0].parse::<i64>().map_err(|e| format!("{s:?}: {e}"))?;
        let b = parts[1].parse::<i64>().map_err(|e| format!("{s:?}: {e}"))?;
        let d = parts[2]
            .parse::<u8>()
            .ok()
            .and_then(Dir::from_index)
            .ok_or_else(|| format!("{s:?}: direction must be 1, 2 or 3"))?;
        Ok(DirEdge::new(LatticePoint::new(a, b), d))
    }
}

impl Serialize for DirEdge {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for DirEdge {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orient {
    Normal,
    #[serde(rename = "turnedover")]
    TurnedOver,
}

/// A unit face of the lattice.
///
/// `Normal` at `(a,b)` has vertices `(a,b),(a+1,b),(a+1,b+1)` and a
/// counterclockwise boundary circuit; `TurnedOver` at `(a,b)` has vertices
/// `(a,b),(a,b+1),(a+1,b+1)` and a clockwise one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LittleTriangle {
    pub orient: Orient,
    pub anchor: LatticePoint,
}

impl Ord for LittleTriangle {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.anchor, self.orient).cmp(&(other.anchor, other.orient))
    }
}

impl PartialOrd for LittleTriangle {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for LittleTriangle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let o = match self.orient {
            Orient::Normal => "N",
            Orient::TurnedOver => "T",
        };
        write!(f, "{o}{}", self.anchor)
    }
}

impl FromStr for LittleTriangle {
    type Err = String;

    /// Parses the `N(a,b)` / `T(a,b)` form produced by `Display`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || format!("triangle id {s:?} is not of the form \"N(a,b)\" or \"T(a,b)\"");
        let s = s.trim();
        let orient = match s.chars().next() {
            Some('N') => Orient::Normal,
            Some('T') => Orient::TurnedOver,
            _ => return Err(bad()),
        };
        let inner = s[1..].strip_prefix('(').and_then(|r| r.strip_suffix(')')).ok_or_else(bad)?;
        let (a, b) = inner.split_once(',').ok_or_else(bad)?;
        let a = a.trim().parse().map_err(|_| bad())?;
        let b = b.trim().parse().map_err(|_| bad())?;
        Ok(LittleTriangle { orient, anchor: LatticePoint::new(a, b) })
    }
}

impl LittleTriangle {
    pub const fn normal(anchor: LatticePoint) -> Self {
        LittleTriangle { orient: Orient::Normal, anchor }
    }

    pub const fn turned(anchor: LatticePoint) -> Self {
        LittleTriangle { orient: Orient::TurnedOver, anchor }
    }

    pub fn is_normal(&self) -> bool {
        self.orient == Orient::Normal
    }

    pub fn vertices(&self) -> [LatticePoint; 3] {
        let p = self.anchor;
        match self.orient {
            Orient::Normal => [p, p.shift((1, 0)), p.shift((1, 1))],
            Orient::TurnedOver => [p, p.shift((0, 1)), p.shift((1, 1))],
        }
    }

    /// The side parallel to ξ_dir.
    pub fn edge(&self, dir: Dir) -> DirEdge {
        let p = self.anchor;
        let tail = match (self.orient, dir) {
            (Orient::Normal, Dir::One) => p,
            (Orient::Normal, Dir::Two) => p.shift((1, 0)),
            (Orient::TurnedOver, Dir::One) => p.shift((0, 1)),
            (Orient::TurnedOver, Dir::Two) => p,
            (_, Dir::Three) => p.shift((1, 1)),
        };
        DirEdge::new(tail, dir)
    }

    /// Sides indexed by direction (ξ₁, ξ₂, ξ₃).
    pub fn edges(&self) -> [DirEdge; 3] {
        [self.edge(Dir::One), self.edge(Dir::Two), self.edge(Dir::Three)]
    }

    /// The triangle sharing side `dir` with this one.
    pub fn neighbour(&self, dir: Dir) -> LittleTriangle {
        let e = self.edge(dir);
        match self.orient {
            Orient::Normal => e.turned_triangle(),
            Orient::TurnedOver => e.normal_triangle(),
        }
    }
}

/// Which boundary class an outer edge belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum BoundarySign {
    /// Directed counterclockwise around the region (E⁺₀).
    #[serde(rename = "+")]
    Plus,
    /// Directed clockwise around the region (E⁻₀).
    #[serde(rename = "-")]
    Minus,
}

/// A maximal straight path of the boundary (B_i^±). Edges are listed in
/// the order of the path, i.e. along ξ_dir.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SidePath {
    pub dir: Dir,
    pub sign: BoundarySign,
    pub edges: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TandemKind {
    Normal,
    TurnedOver,
}

/// An ordered pair of opposite sides of a little rhombus, the head of `e`
/// being an obtuse vertex.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Tandem {
    pub e: DirEdge,
    pub e_prime: DirEdge,
    pub kind: TandemKind,
    /// (normal, turned-over) halves of the rhombus.
    pub rhombus: (LittleTriangle, LittleTriangle),
}

/// A maximal path of one component H_i of the dual graph. `vertices` are
/// edge indices of the grid, in path order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HLine {
    pub component: Dir,
    pub vertices: Vec<usize>,
}

/// The dual digraph H: one vertex v_e per grid edge, one arc per normal
/// tandem.
#[derive(Clone, Debug, Default)]
pub struct DualGraph {
    /// Arcs `(v_e, v_e′)` as grid edge indices, in normal-tandem order.
    pub arcs: Vec<(usize, usize)>,
    /// Lines of H₁, H₂, H₃ (slot `i−1`).
    pub lines: [Vec<HLine>; 3],
    /// For each grid edge: `(line index within its component, position)`.
    pub position: Vec<(usize, usize)>,
    succ: Vec<Option<usize>>,
}

impl DualGraph {
    pub fn successor(&self, e: usize) -> Option<usize> {
        self.succ[e]
    }

    pub fn line_of(&self, grid: &ConvexGrid, e: usize) -> &HLine {
        let comp = grid.edges[e].dir;
        &self.lines[comp.slot()][self.position[e].0]
    }

    pub fn arcs_in(&self, grid: &ConvexGrid, comp: Dir) -> usize {
        self.arcs.iter().filter(|&&(e, _)| grid.edges[e].dir == comp).count()
    }
}

/// A directed path of H from v_from to v_to along one line; `from == to`
/// is a degenerate path.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct HPath {
    #[serde(with = "dir_index")]
    pub component: Dir,
    pub from: DirEdge,
    pub to: DirEdge,
}

mod dir_index {
    use super::Dir;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(d: &Dir, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u8(d.index())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Dir, D::Error> {
        let i = u8::deserialize(d)?;
        Dir::from_index(i).ok_or_else(|| serde::de::Error::custom(format!("component must be 1, 2 or 3, got {i}")))
    }
}

impl HPath {
    pub fn new(from: DirEdge, to: DirEdge) -> Self {
        HPath { component: from.dir, from, to }
    }

    pub fn is_degenerate(&self) -> bool {
        self.from == self.to
    }

    /// Grid edges visited, in order, or `None` if the path is not a path of
    /// H in `grid`.
    pub fn vertices(&self, grid: &ConvexGrid) -> Option<Vec<usize>> {
        if self.from.dir != self.component || self.to.dir != self.component {
            return None;
        }
        let a = grid.edge_id(&self.from)?;
        let b = grid.edge_id(&self.to)?;
        let (la, pa) = grid.dual().position[a];
        let (lb, pb) = grid.dual().position[b];
        if la != lb || pa > pb {
            return None;
        }
        Some(grid.dual().line_of(grid, a).vertices[pa..=pb].to_vec())
    }
}

impl fmt::Display for HPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "H{}[{} -> {}]", self.component.index(), self.from, self.to)
    }
}

/// A maximal straight path of G (all edges of one direction on one lattice
/// line), listed along ξ_dir.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StraightPath {
    pub dir: Dir,
    pub edges: Vec<usize>,
    pub on_boundary: bool,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EdgeTriangles {
    pub normal: Option<usize>,
    pub turned: Option<usize>,
}

/// A convex triangular grid with all derived structure.
#[derive(Clone, Debug)]
pub struct ConvexGrid {
    triangles: Vec<LittleTriangle>,
    tri_index: HashMap<LittleTriangle, usize>,
    vertices: Vec<LatticePoint>,
    edges: Vec<DirEdge>,
    edge_index: HashMap<DirEdge, usize>,
    edge_tris: Vec<EdgeTriangles>,
    tri_edges: Vec<[usize; 3]>,
    sign: Vec<Option<BoundarySign>>,
    outer_plus: Vec<usize>,
    outer_minus: Vec<usize>,
    walk: Vec<(usize, bool)>,
    side_paths: Vec<SidePath>,
    tandems: Vec<Tandem>,
    normal_tandems: Vec<(usize, usize)>,
    dual: DualGraph,
}

impl PartialEq for ConvexGrid {
    fn eq(&self, other: &Self) -> bool {
        self.triangles == other.triangles
    }
}

impl Eq for ConvexGrid {}

/// Size-`n` triangle with corners `(0,0)`, `(n,0)`, `(n,n)`.
pub fn build_three_side_grid(n: i64) -> Result<ConvexGrid, GridError> {
    if n <= 0 {
        return Err(GridError::InvalidSize(n));
    }
    build_polygon([n, 0, n, 0, n, 0])
}

/// `p × q` parallelogram with sides along ξ₁ and ξ₂.
pub fn build_parallelogram(p: i64, q: i64) -> Result<ConvexGrid, GridError> {
    if p <= 0 {
        return Err(GridError::InvalidSize(p));
    }
    if q <= 0 {
        return Err(GridError::InvalidSize(q));
    }
    build_polygon([p, 0, q, p, 0, q])
}

/// Convex polygon obtained by walking counterclockwise from the origin with
/// side lengths `s[k]` along headings 0°, 60°, …, 300°. Zero lengths drop
/// the corresponding side.
pub fn build_polygon(sides: [i64; 6]) -> Result<ConvexGrid, GridError> {
    if sides.iter().any(|&s| s < 0) {
        return Err(GridError::OpenPolygon(sides));
    }
    if sides[0] + sides[1] != sides[3] + sides[4] || sides[1] + sides[2] != sides[4] + sides[5] {
        return Err(GridError::OpenPolygon(sides));
    }
    let headings: [(i64, i64); 6] = [(1, 0), (1, 1), (0, 1), (-1, 0), (-1, -1), (0, -1)];
    let mut p = LatticePoint::new(0, 0);
    let mut corners = vec![p];
    for (s, h) in sides.iter().zip(headings) {
        p = p.shift((h.0 * s, h.1 * s));
        corners.push(p);
    }
    let bounds = |f: fn(&LatticePoint) -> i64| {
        let lo = corners.iter().map(f).min().unwrap();
        let hi = corners.iter().map(f).max().unwrap();
        (lo, hi)
    };
    let (alo, ahi) = bounds(|p| p.a);
    let (blo, bhi) = bounds(|p| p.b);
    let (clo, chi) = bounds(|p| p.a - p.b);
    let inside = |p: &LatticePoint| {
        (alo..=ahi).contains(&p.a) && (blo..=bhi).contains(&p.b) && (clo..=chi).contains(&(p.a - p.b))
    };
    let mut ts = Vec::new();
    for a in alo..=ahi {
        for b in blo..=bhi {
            for t in [LittleTriangle::normal(LatticePoint::new(a, b)), LittleTriangle::turned(LatticePoint::new(a, b))] {
                if t.vertices().iter().all(inside) {
                    ts.push(t);
                }
            }
        }
    }
    build_from_triangles(ts)
}

pub fn build_from_triangles<I>(ts: I) -> Result<ConvexGrid, GridError>
where
    I: IntoIterator<Item = LittleTriangle>,
{
    let mut set = BTreeSet::new();
    for t in ts {
        if !set.insert(t) {
            return Err(GridError::DuplicateTriangle(t));
        }
    }
    if set.is_empty() {
        return Err(GridError::Empty);
    }
    ConvexGrid::assemble(set.into_iter().collect())
}

impl ConvexGrid {
    fn assemble(triangles: Vec<LittleTriangle>) -> Result<ConvexGrid, GridError> {
        let tri_index: HashMap<_, _> = triangles.iter().enumerate().map(|(i, &t)| (t, i)).collect();

        let edge_set: BTreeSet<DirEdge> = triangles.iter().flat_map(|t| t.edges()).collect();
        let edges: Vec<DirEdge> = edge_set.into_iter().collect();
        let edge_index: HashMap<_, _> = edges.iter().enumerate().map(|(i, &e)| (e, i)).collect();
        let vertices: Vec<LatticePoint> = triangles
            .iter()
            .flat_map(|t| t.vertices())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();

        let mut edge_tris = vec![EdgeTriangles::default(); edges.len()];
        let mut tri_edges = Vec::with_capacity(triangles.len());
        for (ti, t) in triangles.iter().enumerate() {
            let ids = t.edges().map(|e| edge_index[&e]);
            for &ei in &ids {
                match t.orient {
                    Orient::Normal => edge_tris[ei].normal = Some(ti),
                    Orient::TurnedOver => edge_tris[ei].turned = Some(ti),
                }
            }
            tri_edges.push(ids);
        }

        // A normal triangle lies to the left of each of its sides, so an
        // outer edge is counterclockwise around R iff its triangle is normal.
        let sign: Vec<Option<BoundarySign>> = edge_tris
            .iter()
            .map(|et| match (et.normal, et.turned) {
                (Some(_), None) => Some(BoundarySign::Plus),
                (None, Some(_)) => Some(BoundarySign::Minus),
                _ => None,
            })
            .collect();
        let outer_plus: Vec<usize> = (0..edges.len()).filter(|&i| sign[i] == Some(BoundarySign::Plus)).collect();
        let outer_minus: Vec<usize> = (0..edges.len()).filter(|&i| sign[i] == Some(BoundarySign::Minus)).collect();

        let walk = boundary_walk(&edges, &sign)?;
        let side_paths = side_paths_of(&edges, &walk)?;

        let mut tandems = Vec::new();
        let mut normal_tandems = Vec::new();
        for (si, et) in edge_tris.iter().enumerate() {
            let (Some(ni), Some(ti)) = (et.normal, et.turned) else { continue };
            let shared = edges[si].dir;
            let (n, t) = (triangles[ni], triangles[ti]);
            let pair_dir = shared.prev();
            let e = n.edge(pair_dir);
            let e_prime = t.edge(pair_dir);
            debug_assert_eq!(e.normal_tandem_partner(), e_prime);
            tandems.push(Tandem { e, e_prime, kind: TandemKind::Normal, rhombus: (n, t) });
            normal_tandems.push((edge_index[&e], edge_index[&e_prime]));
            let other = shared.next();
            tandems.push(Tandem {
                e: t.edge(other),
                e_prime: n.edge(other),
                kind: TandemKind::TurnedOver,
                rhombus: (n, t),
            });
        }
        tandems.sort();
        normal_tandems.sort();

        let dual = dual_graph_of(&edges, &normal_tandems);

        let grid = ConvexGrid {
            triangles,
            tri_index,
            vertices,
            edges,
            edge_index,
            edge_tris,
            tri_edges,
            sign,
            outer_plus,
            outer_minus,
            walk,
            side_paths,
            tandems,
            normal_tandems,
            dual,
        };
        grid.check_line_ends()?;
        Ok(grid)
    }

    /// E⁺₀ edges start their H-line and E⁻₀ edges end it, so outer edges
    /// never sit in the middle of a line.
    fn check_line_ends(&self) -> Result<(), GridError> {
        for comp in &self.dual.lines {
            for line in comp {
                for (k, &e) in line.vertices.iter().enumerate() {
                    let ok = match self.sign[e] {
                        Some(BoundarySign::Plus) => k == 0,
                        Some(BoundarySign::Minus) => k + 1 == line.vertices.len(),
                        None => true,
                    };
                    if !ok {
                        return Err(GridError::NonConvexRegion(format!(
                            "outer edge {} is interior to its dual line",
                            self.edges[e]
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn triangles(&self) -> &[LittleTriangle] {
        &self.triangles
    }

    pub fn vertices(&self) -> &[LatticePoint] {
        &self.vertices
    }

    pub fn edges(&self) -> &[DirEdge] {
        &self.edges
    }

    pub fn edge(&self, i: usize) -> DirEdge {
        self.edges[i]
    }

    pub fn edge_id(&self, e: &DirEdge) -> Option<usize> {
        self.edge_index.get(e).copied()
    }

    pub fn triangle_id(&self, t: &LittleTriangle) -> Option<usize> {
        self.tri_index.get(t).copied()
    }

    pub fn triangle(&self, i: usize) -> LittleTriangle {
        self.triangles[i]
    }

    /// Edge indices of triangle `t`, by direction.
    pub fn triangle_edges(&self, t: usize) -> [usize; 3] {
        self.tri_edges[t]
    }

    pub fn edge_triangles(&self, e: usize) -> EdgeTriangles {
        self.edge_tris[e]
    }

    pub fn sign(&self, e: usize) -> Option<BoundarySign> {
        self.sign[e]
    }

    pub fn is_outer(&self, e: usize) -> bool {
        self.sign[e].is_some()
    }

    /// θ(e): +1 on E⁺₀, −1 on E⁻₀, 0 on inner edges.
    pub fn theta(&self, e: usize) -> i64 {
        match self.sign[e] {
            Some(BoundarySign::Plus) => 1,
            Some(BoundarySign::Minus) => -1,
            None => 0,
        }
    }

    pub fn outer_plus(&self) -> &[usize] {
        &self.outer_plus
    }

    pub fn outer_minus(&self) -> &[usize] {
        &self.outer_minus
    }

    /// All outer edges in canonical order.
    pub fn outer_edges(&self) -> Vec<usize> {
        (0..self.edges.len()).filter(|&e| self.is_outer(e)).collect()
    }

    pub fn inner_edges(&self) -> Vec<usize> {
        (0..self.edges.len()).filter(|&e| !self.is_outer(e)).collect()
    }

    /// Counterclockwise boundary walk as `(edge, traversed forward)`.
    pub fn boundary_walk(&self) -> &[(usize, bool)] {
        &self.walk
    }

    /// Outer vertices in canonical order.
    pub fn outer_vertices(&self) -> Vec<LatticePoint> {
        let mut vs: Vec<_> = self.walk.iter().map(|&(e, _)| self.edges[e].tail).collect();
        vs.extend(self.walk.iter().map(|&(e, _)| self.edges[e].head()));
        vs.sort();
        vs.dedup();
        vs
    }

    pub fn side_paths(&self) -> &[SidePath] {
        &self.side_paths
    }

    pub fn side_path(&self, dir: Dir, sign: BoundarySign) -> Option<&SidePath> {
        self.side_paths.iter().find(|s| s.dir == dir && s.sign == sign)
    }

    /// A 3-side grid in the sense used for puzzles: the region is a triangle
    /// bounded by B⁺₁, B⁺₂, B⁺₃.
    pub fn three_side_size(&self) -> Option<usize> {
        if self.side_paths.len() != 3 || !self.outer_minus.is_empty() {
            return None;
        }
        let n = self.side_paths[0].edges.len();
        self.side_paths.iter().all(|s| s.edges.len() == n).then_some(n)
    }

    pub fn tandems(&self) -> &[Tandem] {
        &self.tandems
    }

    /// Normal tandems `(e, e′)` as edge indices, in canonical order.
    pub fn normal_tandems(&self) -> &[(usize, usize)] {
        &self.normal_tandems
    }

    pub fn dual(&self) -> &DualGraph {
        &self.dual
    }

    /// Maximal straight paths of G, one per occupied lattice line and
    /// direction, listed by direction then by line.
    pub fn straight_paths(&self) -> Vec<StraightPath> {
        let mut out = Vec::new();
        for dir in Dir::ALL {
            let mut by_line: std::collections::BTreeMap<i64, Vec<usize>> = Default::default();
            for (i, e) in self.edges.iter().enumerate().filter(|(_, e)| e.dir == dir) {
                let key = match dir {
                    Dir::One => e.tail.b,
                    Dir::Two => e.tail.a,
                    Dir::Three => e.tail.a - e.tail.b,
                };
                by_line.entry(key).or_default().push(i);
            }
            for (_, mut es) in by_line {
                // order along ξ_dir
                es.sort_by_key(|&i| {
                    let t = self.edges[i].tail;
                    match dir {
                        Dir::One => t.a,
                        Dir::Two => t.b,
                        Dir::Three => -t.a,
                    }
                });
                let on_boundary = es.iter().all(|&i| self.is_outer(i));
                out.push(StraightPath { dir, edges: es, on_boundary });
            }
        }
        out
    }

    /// Number of 3-circuits of G (one per little triangle).
    pub fn circuit_count(&self) -> usize {
        self.triangles.len()
    }
}

/// Counterclockwise walk around R: E⁺₀ edges forward, E⁻₀ edges backward.
/// Rejects anything but a single convex cycle.
fn boundary_walk(edges: &[DirEdge], sign: &[Option<BoundarySign>]) -> Result<Vec<(usize, bool)>, GridError> {
    let mut out_of: HashMap<LatticePoint, (usize, bool)> = HashMap::new();
    let mut count = 0;
    for (i, s) in sign.iter().enumerate() {
        let Some(s) = s else { continue };
        count += 1;
        let forward = *s == BoundarySign::Plus;
        let start = if forward { edges[i].tail } else { edges[i].head() };
        if out_of.insert(start, (i, forward)).is_some() {
            return Err(GridError::NonConvexRegion(format!("boundary pinches at {start}")));
        }
    }
    // start at the smallest vertex so the walk is canonical
    let start = *out_of.keys().min().expect("a nonempty grid has outer edges");
    let mut walk = Vec::with_capacity(count);
    let mut at = start;
    loop {
        let step = out_of[&at];
        walk.push(step);
        let e = edges[step.0];
        at = if step.1 { e.head() } else { e.tail };
        if at == start {
            break;
        }
        if walk.len() > count {
            return Err(GridError::NonConvexRegion("boundary does not close".into()));
        }
    }
    if walk.len() != count {
        return Err(GridError::NonConvexRegion("boundary splits into several circuits".into()));
    }
    let mut total_turn = 0;
    for k in 0..walk.len() {
        let (e1, f1) = walk[k];
        let (e2, f2) = walk[(k + 1) % walk.len()];
        let h1 = edges[e1].dir.heading(f1);
        let h2 = edges[e2].dir.heading(f2);
        let turn = (h2 + 6 - h1) % 6;
        if turn > 2 {
            return Err(GridError::NonConvexRegion(format!(
                "boundary turns right or reverses after edge {}",
                edges[e1]
            )));
        }
        total_turn += turn as u32;
    }
    if total_turn != 6 {
        return Err(GridError::NonConvexRegion("boundary winds more than once".into()));
    }
    Ok(walk)
}

fn side_paths_of(edges: &[DirEdge], walk: &[(usize, bool)]) -> Result<Vec<SidePath>, GridError> {
    let heading = |&(e, f): &(usize, bool)| edges[e].dir.heading(f);
    // rotate so the walk starts at a corner
    let len = walk.len();
    let first = (0..len)
        .find(|&k| heading(&walk[k]) != heading(&walk[(k + len - 1) % len]))
        .unwrap_or(0);
    let mut runs: Vec<Vec<(usize, bool)>> = Vec::new();
    for k in 0..len {
        let step = walk[(first + k) % len];
        match runs.last_mut() {
            Some(run) if heading(&run[0]) == heading(&step) => run.push(step),
            _ => runs.push(vec![step]),
        }
    }
    let mut paths: Vec<SidePath> = runs
        .into_iter()
        .map(|run| {
            let forward = run[0].1;
            let mut es: Vec<usize> = run.iter().map(|&(e, _)| e).collect();
            if !forward {
                es.reverse();
            }
            SidePath {
                dir: edges[es[0]].dir,
                sign: if forward { BoundarySign::Plus } else { BoundarySign::Minus },
                edges: es,
            }
        })
        .collect();
    paths.sort_by_key(|s| (s.dir, s.sign));
    for w in paths.windows(2) {
        if (w[0].dir, w[0].sign) == (w[1].dir, w[1].sign) {
            return Err(GridError::NonConvexRegion("two side-paths share a direction and sign".into()));
        }
    }
    Ok(paths)
}

fn dual_graph_of(edges: &[DirEdge], normal_tandems: &[(usize, usize)]) -> DualGraph {
    let mut succ = vec![None; edges.len()];
    let mut has_pred = vec![false; edges.len()];
    for &(e, f) in normal_tandems {
        succ[e] = Some(f);
        has_pred[f] = true;
    }
    let mut lines: [Vec<HLine>; 3] = Default::default();
    let mut position = vec![(usize::MAX, 0); edges.len()];
    for start in 0..edges.len() {
        if has_pred[start] {
            continue;
        }
        let comp = edges[start].dir;
        let idx = lines[comp.slot()].len();
        let mut vertices = vec![start];
        let mut at = start;
        while let Some(n) = succ[at] {
            vertices.push(n);
            at = n;
        }
        for (k, &v) in vertices.iter().enumerate() {
            position[v] = (idx, k);
        }
        lines[comp.slot()].push(HLine { component: comp, vertices });
    }
    DualGraph { arcs: normal_tandems.to_vec(), lines, position, succ }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(a: i64, b: i64) -> LatticePoint {
        LatticePoint::new(a, b)
    }

    fn e(a: i64, b: i64, d: Dir) -> DirEdge {
        DirEdge::new(p(a, b), d)
    }

    /// Independent enumeration: list lattice triangles inside the size-n
    /// triangle by brute force and count features directly.
    fn brute_three_side(n: i64) -> (usize, usize, usize, usize) {
        let inside = |q: LatticePoint| q.b >= 0 && q.a <= n && q.a >= q.b;
        let mut tris = Vec::new();
        for a in -1..=n + 1 {
            for b in -1..=n + 1 {
                for t in [LittleTriangle::normal(p(a, b)), LittleTriangle::turned(p(a, b))] {
                    if t.vertices().iter().all(|&q| inside(q)) {
                        tris.push(t);
                    }
                }
            }
        }
        let mut edge_count: HashMap<DirEdge, usize> = HashMap::new();
        for t in &tris {
            for e in t.edges() {
                *edge_count.entry(e).or_default() += 1;
            }
        }
        let verts: BTreeSet<_> = tris.iter().flat_map(|t| t.vertices()).collect();
        let inner = edge_count.values().filter(|&&c| c == 2).count();
        (tris.len(), edge_count.len(), verts.len(), inner)
    }

    #[test]
    fn three_side_counts_match_brute_force() {
        for n in 1..=5 {
            let g = build_three_side_grid(n).unwrap();
            let (t, e, v, inner) = brute_three_side(n);
            assert_eq!(g.triangles().len(), t);
            assert_eq!(g.edges().len(), e);
            assert_eq!(g.vertices().len(), v);
            assert_eq!(g.inner_edges().len(), inner);
            assert_eq!(g.triangles().len() as i64, n * n);
            assert_eq!(g.three_side_size(), Some(n as usize));
            assert!(g.outer_minus().is_empty());
        }
    }

    #[test]
    fn size_one_grid() {
        let g = build_three_side_grid(1).unwrap();
        assert_eq!(g.triangles(), &[LittleTriangle::normal(p(0, 0))]);
        assert_eq!(g.edges().len(), 3);
        assert_eq!(g.vertices().len(), 3);
        assert_eq!(g.outer_plus().len(), 3);
        assert!(g.normal_tandems().is_empty());
        assert!(g.tandems().is_empty());
        assert!(g.dual().arcs.is_empty());
        let lines: usize = g.dual().lines.iter().map(Vec::len).sum();
        assert_eq!(lines, 3);
    }

    #[test]
    fn size_two_grid() {
        let g = build_three_side_grid(2).unwrap();
        let normal = g.triangles().iter().filter(|t| t.is_normal()).count();
        assert_eq!((normal, g.triangles().len() - normal), (3, 1));
        assert_eq!(g.edges().len(), 9);
        assert_eq!(g.outer_edges().len(), 6);
        assert_eq!(g.normal_tandems().len(), 3);
        for comp in Dir::ALL {
            assert_eq!(g.dual().arcs_in(&g, comp), 1);
        }
    }

    #[test]
    fn size_three_has_one_interior_vertex() {
        let g = build_three_side_grid(3).unwrap();
        assert_eq!(g.triangles().len(), 9);
        let outer = g.outer_vertices();
        assert_eq!(g.vertices().len() - outer.len(), 1);
        assert!(!outer.contains(&p(2, 1)));
    }

    #[test]
    fn rejects_bad_sizes() {
        assert_eq!(build_three_side_grid(0).unwrap_err(), GridError::InvalidSize(0));
        assert!(build_three_side_grid(-2).is_err());
        assert!(build_polygon([1, 0, 1, 0, 2, 0]).is_err());
    }

    #[test]
    fn single_triangle_from_set() {
        let g = build_from_triangles([LittleTriangle::normal(p(0, 0))]).unwrap();
        assert_eq!(g, build_three_side_grid(1).unwrap());
    }

    #[test]
    fn unit_parallelogram() {
        let g = build_from_triangles([LittleTriangle::normal(p(0, 0)), LittleTriangle::turned(p(0, 0))]).unwrap();
        assert_eq!(g, build_parallelogram(1, 1).unwrap());
        let plus: Vec<_> = g.outer_plus().iter().map(|&i| g.edge(i)).collect();
        let minus: Vec<_> = g.outer_minus().iter().map(|&i| g.edge(i)).collect();
        assert_eq!(plus, vec![e(0, 0, Dir::One), e(1, 0, Dir::Two)]);
        assert_eq!(minus, vec![e(0, 0, Dir::Two), e(0, 1, Dir::One)]);
        let nt: Vec<_> = g.normal_tandems().iter().map(|&(a, b)| (g.edge(a), g.edge(b))).collect();
        assert_eq!(nt, vec![(e(1, 0, Dir::Two), e(0, 0, Dir::Two))]);
        assert_eq!(g.dual().arcs.len(), 1);
        assert_eq!(g.dual().arcs_in(&g, Dir::Two), 1);
        assert_eq!(g.side_paths().len(), 4);
    }

    #[test]
    fn rejects_disconnected_and_duplicates() {
        let r = build_from_triangles([LittleTriangle::normal(p(0, 0)), LittleTriangle::normal(p(1, 1))]);
        assert!(matches!(r, Err(GridError::NonConvexRegion(_))));
        let r = build_from_triangles([LittleTriangle::normal(p(0, 0)), LittleTriangle::normal(p(0, 0))]);
        assert!(matches!(r, Err(GridError::DuplicateTriangle(_))));
        assert_eq!(build_from_triangles(Vec::new()).unwrap_err(), GridError::Empty);
    }

    #[test]
    fn rejects_nonconvex_l_shape() {
        // a hexagon with one triangle removed is not convex
        let hex = build_polygon([1, 1, 1, 1, 1, 1]).unwrap();
        let mut ts = hex.triangles().to_vec();
        ts.remove(0);
        assert!(matches!(build_from_triangles(ts), Err(GridError::NonConvexRegion(_))));
    }

    #[test]
    fn hexagon_has_six_sides() {
        let g = build_polygon([1, 1, 1, 1, 1, 1]).unwrap();
        assert_eq!(g.triangles().len(), 6);
        assert_eq!(g.side_paths().len(), 6);
        assert_eq!(g.outer_plus().len(), 3);
        assert_eq!(g.outer_minus().len(), 3);
        assert_eq!(g.vertices().len(), 7);
    }

    #[test]
    fn normal_tandem_head_and_tail_are_obtuse() {
        // obtuse vertices of a rhombus are the ends of its short diagonal
        for g in [build_three_side_grid(3).unwrap(), build_polygon([2, 1, 1, 2, 1, 1]).unwrap()] {
            for tau in g.tandems() {
                let (n, t) = tau.rhombus;
                let nv: BTreeSet<_> = n.vertices().into_iter().collect();
                let tv: BTreeSet<_> = t.vertices().into_iter().collect();
                let obtuse: Vec<_> = nv.intersection(&tv).copied().collect();
                assert_eq!(obtuse.len(), 2);
                assert!(obtuse.contains(&tau.e.head()));
                assert!(obtuse.contains(&tau.e_prime.tail));
                assert_eq!(tau.e.dir, tau.e_prime.dir);
                let first_tri = if n.edges().contains(&tau.e) { n } else { t };
                assert_eq!(tau.kind == TandemKind::Normal, first_tri.is_normal());
            }
        }
    }

    #[test]
    fn tandem_counts_match_inner_edges() {
        for g in [
            build_three_side_grid(4).unwrap(),
            build_parallelogram(2, 3).unwrap(),
            build_polygon([1, 1, 1, 1, 1, 1]).unwrap(),
        ] {
            let normal = g.tandems().iter().filter(|t| t.kind == TandemKind::Normal).count();
            let turned = g.tandems().len() - normal;
            assert_eq!(normal, g.inner_edges().len());
            assert_eq!(turned, g.inner_edges().len());
        }
    }

    #[test]
    fn dual_arcs_are_antiparallel_to_previous_direction() {
        let g = build_three_side_grid(4).unwrap();
        for &(a, b) in &g.dual().arcs {
            let (ea, eb) = (g.edge(a), g.edge(b));
            let d = (eb.tail.a - ea.tail.a, eb.tail.b - ea.tail.b);
            let prev = ea.dir.prev().step();
            assert_eq!(d, (-prev.0, -prev.1));
        }
    }

    #[test]
    fn lines_partition_each_component() {
        let g = build_polygon([2, 1, 2, 1, 2, 1]).unwrap();
        let mut seen = vec![0; g.edges().len()];
        for comp in &g.dual().lines {
            for line in comp {
                for &v in &line.vertices {
                    seen[v] += 1;
                    assert_eq!(g.edge(v).dir, line.component);
                }
            }
        }
        assert!(seen.iter().all(|&c| c == 1));
    }

    #[test]
    fn walk_is_counterclockwise_closed() {
        let g = build_polygon([2, 1, 1, 2, 1, 1]).unwrap();
        let w = g.boundary_walk();
        assert_eq!(w.len(), g.outer_edges().len());
        for k in 0..w.len() {
            let (e1, f1) = w[k];
            let (e2, f2) = w[(k + 1) % w.len()];
            let end = if f1 { g.edge(e1).head() } else { g.edge(e1).tail };
            let start = if f2 { g.edge(e2).tail } else { g.edge(e2).head() };
            assert_eq!(end, start);
        }
    }

    #[test]
    fn edge_id_round_trips_through_text() {
        let x = e(-3, 7, Dir::Three);
        assert_eq!(x.to_string(), "-3,7,3");
        assert_eq!("-3,7,3".parse::<DirEdge>().unwrap(), x);
        assert!("1,2".parse::<DirEdge>().is_err());
        assert!("1,2,4".parse::<DirEdge>().is_err());
        let t = LittleTriangle::turned(p(-1, 4));
        assert_eq!(t.to_string(), "T(-1,4)");
        assert_eq!("T(-1,4)".parse::<LittleTriangle>().unwrap(), t);
        assert!("X(0,0)".parse::<LittleTriangle>().is_err());
        assert!("N(0 0)".parse::<LittleTriangle>().is_err());
    }

    #[test]
    fn hpath_vertices() {
        let g = build_parallelogram(1, 1).unwrap();
        let p = HPath::new(e(1, 0, Dir::Two), e(0, 0, Dir::Two));
        let vs = p.vertices(&g).unwrap();
        assert_eq!(vs.iter().map(|&i| g.edge(i)).collect::<Vec<_>>(), vec![p.from, p.to]);
        assert!(HPath::new(p.to, p.from).vertices(&g).is_none());
        let d = HPath::new(e(1, 1, Dir::Three), e(1, 1, Dir::Three));
        assert!(d.is_degenerate());
        assert_eq!(d.vertices(&g).unwrap().len(), 1);
    }

    #[test]
    fn rebuild_is_idempotent() {
        for g in [build_three_side_grid(3).unwrap(), build_polygon([1, 2, 1, 1, 2, 1]).unwrap()] {
            let again = build_from_triangles(g.triangles().iter().rev().copied()).unwrap();
            assert_eq!(again.edges(), g.edges());
            assert_eq!(again.normal_tandems(), g.normal_tandems());
        }
    }
}
