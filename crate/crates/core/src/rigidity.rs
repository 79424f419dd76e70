//! Rigid puzzles via gentle circuits, and the dimension of the face a puzzle
//! inequality cuts out of the border cone.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::criterion::PuzzleSet;
use crate::exactlp::{self, LpOutcome};
use crate::feasibility;
use crate::grid::{ConvexGrid, DirEdge, LatticePoint, LittleTriangle};
use crate::linalg;
use crate::puzzle::{self, Puzzle};
use crate::rational::{int, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum G0Kind {
    Tp,
    Pn,
}

/// A grid edge of G₀, traversed along ξ_dir when `forward`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct G0Edge {
    pub edge: DirEdge,
    pub kind: G0Kind,
    pub forward: bool,
}

impl G0Edge {
    pub fn from(&self) -> LatticePoint {
        if self.forward {
            self.edge.tail
        } else {
            self.edge.head()
        }
    }

    pub fn to(&self) -> LatticePoint {
        if self.forward {
            self.edge.head()
        } else {
            self.edge.tail
        }
    }

    pub fn heading(&self) -> u8 {
        self.edge.dir.heading(self.forward)
    }

    /// Turn into `next` is 0° or ±60°.
    pub fn gentle_into(&self, next: &G0Edge) -> bool {
        self.to() == next.from() && matches!((6 + next.heading() - self.heading()) % 6, 0 | 1 | 5)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct G0Graph {
    /// Rhombi split by a path, as (normal, turned-over) halves.
    pub rhombi: BTreeSet<(LittleTriangle, LittleTriangle)>,
    pub edges: Vec<G0Edge>,
}

impl G0Graph {
    /// For each edge, the edges it may be followed by.
    pub fn successors(&self) -> Vec<Vec<usize>> {
        let mut by_tail: BTreeMap<LatticePoint, Vec<usize>> = BTreeMap::new();
        for (i, x) in self.edges.iter().enumerate() {
            by_tail.entry(x.from()).or_default().push(i);
        }
        self.edges
            .iter()
            .map(|x| {
                by_tail
                    .get(&x.to())
                    .map(|ys| ys.iter().copied().filter(|&j| x.gentle_into(&self.edges[j])).collect())
                    .unwrap_or_default()
            })
            .collect()
    }
}

/// The rhombi traversed by the nondegenerate paths of `p`.
pub fn split_rhombi(grid: &ConvexGrid, p: &Puzzle) -> BTreeSet<(LittleTriangle, LittleTriangle)> {
    let mut out = BTreeSet::new();
    for q in &p.paths {
        let Some(vs) = q.vertices(grid) else { continue };
        for w in vs.windows(2) {
            out.insert((grid.edge(w[0]).normal_triangle(), grid.edge(w[1]).turned_triangle()));
        }
    }
    out
}

pub fn build_g0(grid: &ConvexGrid, p: &Puzzle) -> G0Graph {
    let rhombi = split_rhombi(grid, p);
    let covered: BTreeSet<LittleTriangle> = rhombi.iter().flat_map(|&(n, t)| [n, t]).collect();
    let mut edges = BTreeMap::new();
    for &(n, t) in &rhombi {
        for half in [n, t] {
            for x in half.edges() {
                let other = if half.is_normal() { x.turned_triangle() } else { x.normal_triangle() };
                if other == n || other == t || grid.triangle_id(&other).is_none() {
                    continue;
                }
                // the designated triangle goes on the right; turned-over
                // triangles lie right of their sides
                let (kind, right) = if p.triangles.contains(&other) {
                    (G0Kind::Tp, other)
                } else if !covered.contains(&other) {
                    (G0Kind::Pn, half)
                } else {
                    continue;
                };
                edges.insert(x, G0Edge { edge: x, kind, forward: !right.is_normal() });
            }
        }
    }
    G0Graph { rhombi, edges: edges.into_values().collect() }
}

/// A directed cycle of the gentle-turn successor digraph, as a list of
/// G₀ edges in traversal order.
pub fn gentle_circuit(g0: &G0Graph) -> Option<Vec<G0Edge>> {
    let succ = g0.successors();
    let n = succ.len();
    let mut colour = vec![0u8; n];
    for root in 0..n {
        if colour[root] != 0 {
            continue;
        }
        let mut stack: Vec<(usize, usize)> = vec![(root, 0)];
        colour[root] = 1;
        while let Some(&(v, k)) = stack.last() {
            if let Some(&w) = succ[v].get(k) {
                stack.last_mut().expect("nonempty").1 += 1;
                match colour[w] {
                    0 => {
                        colour[w] = 1;
                        stack.push((w, 0));
                    }
                    1 => {
                        let start = stack.iter().position(|&(u, _)| u == w).expect("grey vertex is on the stack");
                        return Some(stack[start..].iter().map(|&(u, _)| g0.edges[u]).collect());
                    }
                    _ => {}
                }
            } else {
                colour[v] = 2;
                stack.pop();
            }
        }
    }
    None
}

pub fn has_gentle_circuit(g0: &G0Graph) -> bool {
    gentle_circuit(g0).is_some()
}

/// No other puzzle of `set` has the same boundary as puzzle `i`.
pub fn is_rigid(set: &PuzzleSet, i: usize) -> bool {
    let b = &set.boundaries[i];
    set.boundaries.iter().enumerate().all(|(j, c)| j == i || c != b)
}

/// Dimension of {border(h) : h concave, σ(b⁺) = σ(b⁻)} as a subspace of
/// ℝ^{E₀}.
///
/// Keeps borders S found in the face and functionals C vanishing on it.
/// A nonzero c ⊥ S ∪ C is either attained with nonzero value somewhere in
/// the face (new border, rank of S grows) or vanishes on it (rank of C
/// grows). The loop ends when S ∪ C spans, so dim = rank S.
pub fn face_dimension(grid: &ConvexGrid, p: &Puzzle) -> usize {
    let outer = grid.outer_edges();
    let m = outer.len();
    let mut base = feasibility::build_system(grid, &[], None);
    for &e in &outer {
        base.add_le(vec![(e, int(1))], int(1));
        base.add_le(vec![(e, int(-1))], int(1));
    }
    let (plus, minus) = puzzle::boundary(grid, p);
    let row: Vec<(usize, Rational)> = plus
        .iter()
        .map(|e| (grid.edge_id(e).expect("boundary edge on grid"), int(1)))
        .chain(minus.iter().map(|e| (grid.edge_id(e).expect("boundary edge on grid"), int(-1))))
        .collect();
    base.add_eq(row, Rational::zero());

    let mut found: Vec<Vec<Rational>> = Vec::new();
    let mut functionals: Vec<Vec<Rational>> = Vec::new();
    loop {
        let rows: Vec<Vec<Rational>> = found.iter().chain(&functionals).cloned().collect();
        let Some(c) = linalg::nullspace(&rows, m).into_iter().next() else { break };
        let mut hit = None;
        for sign in [1, -1] {
            let mut sys = base.clone();
            sys.maximize(outer.iter().zip(&c).map(|(&e, v)| (e, v * int(sign))).filter(|(_, v)| !v.is_zero()).collect());
            match exactlp::solve(&sys) {
                LpOutcome::Optimal { point, value } if value.is_positive() => {
                    hit = Some(outer.iter().map(|&e| point[e].clone()).collect());
                    break;
                }
                LpOutcome::Optimal { .. } => {}
                other => unreachable!("bounded and feasible by construction, got {other:?}"),
            }
        }
        match hit {
            Some(sigma) => found.push(sigma),
            None => functionals.push(c),
        }
    }
    linalg::rank(&found)
}

/// One puzzle in the class where F is neither empty nor everything.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RigidityRecord {
    pub puzzle: usize,
    pub plus: BTreeSet<DirEdge>,
    pub minus: BTreeSet<DirEdge>,
    pub rigid: bool,
    pub gentle_circuit: Option<Vec<G0Edge>>,
    pub face_dim: Option<usize>,
    pub facet: Option<bool>,
}

impl RigidityRecord {
    /// rigid ⇔ no gentle circuit, and rigid ⇔ facet where the face was
    /// computed.
    pub fn consistent(&self) -> bool {
        self.rigid == self.gentle_circuit.is_none() && self.facet.is_none_or(|f| f == self.rigid)
    }
}

pub fn in_hypothesis_class(grid: &ConvexGrid, p: &Puzzle) -> bool {
    !p.triangles.is_empty() && p.triangles.len() != grid.triangles().len()
}

pub fn analyze(grid: &ConvexGrid, set: &PuzzleSet, i: usize, with_face: bool) -> RigidityRecord {
    let p = &set.puzzles[i];
    let (plus, minus) = set.boundaries[i].clone();
    let face_dim = with_face.then(|| face_dimension(grid, p));
    let m = grid.outer_edges().len();
    RigidityRecord {
        puzzle: i,
        plus,
        minus,
        rigid: is_rigid(set, i),
        gentle_circuit: gentle_circuit(&build_g0(grid, p)),
        face_dim,
        facet: face_dim.map(|d| d + 2 == m),
    }
}

/// Records for every puzzle of the hypothesis class, in puzzle order.
pub fn rigidity_report(grid: &ConvexGrid, set: &PuzzleSet, with_face: bool) -> Vec<RigidityRecord> {
    (0..set.puzzles.len())
        .filter(|&i| in_hypothesis_class(grid, &set.puzzles[i]))
        .map(|i| analyze(grid, set, i, with_face))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_parallelogram, build_three_side_grid};

    #[test]
    fn n1_has_empty_g0_and_is_rigid() {
        let g = build_three_side_grid(1).unwrap();
        let set = PuzzleSet::new(&g, 25).unwrap();
        assert_eq!(set.puzzles.len(), 1);
        assert!(build_g0(&g, &set.puzzles[0]).edges.is_empty());
        assert!(is_rigid(&set, 0));
        assert_eq!(face_dimension(&g, &set.puzzles[0]), 2);
    }

    #[test]
    fn parallelogram_path_puzzle() {
        let g = build_parallelogram(1, 1).unwrap();
        let set = PuzzleSet::new(&g, 25).unwrap();
        for (i, p) in set.puzzles.iter().enumerate() {
            assert!(is_rigid(&set, i));
            if p.triangles.is_empty() {
                let g0 = build_g0(&g, p);
                assert_eq!(g0.rhombi.len(), 1);
                assert!(g0.edges.is_empty());
            }
        }
    }

    #[test]
    fn small_three_side_equivalence() {
        for n in 1..=3 {
            let g = build_three_side_grid(n).unwrap();
            let set = PuzzleSet::new(&g, 25).unwrap();
            for r in rigidity_report(&g, &set, true) {
                assert!(r.consistent(), "n = {n}: {r:?}");
            }
        }
    }

    #[test]
    fn g0_orientation_rule() {
        let g = build_three_side_grid(3).unwrap();
        let set = PuzzleSet::new(&g, 25).unwrap();
        let mut seen = 0;
        for p in &set.puzzles {
            let g0 = build_g0(&g, p);
            for x in &g0.edges {
                seen += 1;
                let right = if x.forward { x.edge.turned_triangle() } else { x.edge.normal_triangle() };
                let left = if x.forward { x.edge.normal_triangle() } else { x.edge.turned_triangle() };
                let in_r = |t: &LittleTriangle| g0.rhombi.iter().any(|&(a, b)| a == *t || b == *t);
                match x.kind {
                    G0Kind::Tp => assert!(p.triangles.contains(&right) && in_r(&left)),
                    G0Kind::Pn => assert!(in_r(&right) && !in_r(&left) && !p.triangles.contains(&left)),
                }
            }
        }
        assert!(seen > 0);
    }
}
