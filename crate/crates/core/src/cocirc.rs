//! Cocirculations on a grid: edge functions summing to zero around every
//! little triangle.
//!
//! Functions are stored as maps keyed by [`DirEdge`]; the numeric routines
//! work on dense vectors indexed like [`ConvexGrid::edges`].

use std::collections::BTreeMap;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::{build_three_side_grid, ConvexGrid, DirEdge, LatticePoint, LittleTriangle, StraightPath};
use crate::linalg;
use crate::rational::{self, int, Rational};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CocircError {
    #[error("not a cocirculation: values around {triangle} sum to {sum}")]
    NotACocirculation { triangle: LittleTriangle, sum: Rational },
    #[error("straight path along {0} lies in the boundary")]
    PathOnBoundary(DirEdge),
    #[error("{0} is not an outer vertex")]
    NotOuterVertex(LatticePoint),
    #[error("edge {0} is not in the grid")]
    OffGrid(DirEdge),
    #[error("edge {0} is not an outer edge")]
    NotOuter(DirEdge),
    #[error("no value for edge {0}")]
    Missing(DirEdge),
}

/// An edge function h on E(G).
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cocirculation {
    #[serde(with = "rational::serde_rational_map")]
    pub values: BTreeMap<DirEdge, Rational>,
}

/// A function σ on the outer edges E₀(G).
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundaryData {
    #[serde(with = "rational::serde_rational_map")]
    pub values: BTreeMap<DirEdge, Rational>,
}

impl Cocirculation {
    pub fn zero(g: &ConvexGrid) -> Self {
        Self::from_vec(g, &vec![Rational::zero(); g.edges().len()])
    }

    pub fn from_vec(g: &ConvexGrid, v: &[Rational]) -> Self {
        Cocirculation { values: g.edges().iter().copied().zip(v.iter().cloned()).collect() }
    }

    /// Dense values in grid edge order; every grid edge must be present and
    /// no other key may appear.
    pub fn to_vec(&self, g: &ConvexGrid) -> Result<Vec<Rational>, CocircError> {
        dense(g, &self.values, g.edges().len(), |i| i)
    }

    /// h(e) = f(head) − f(tail).
    pub fn from_potential(g: &ConvexGrid, f: impl Fn(LatticePoint) -> Rational) -> Self {
        Cocirculation { values: g.edges().iter().map(|e| (*e, f(e.head()) - f(e.tail))).collect() }
    }

    pub fn add(&self, other: &Cocirculation) -> Cocirculation {
        let mut values = self.values.clone();
        for (e, v) in &other.values {
            *values.entry(*e).or_insert_with(Rational::zero) += v;
        }
        Cocirculation { values }
    }

    pub fn scale(&self, c: &Rational) -> Cocirculation {
        Cocirculation { values: self.values.iter().map(|(e, v)| (*e, v * c)).collect() }
    }
}

impl BoundaryData {
    pub fn from_vec(g: &ConvexGrid, outer: &[Rational]) -> Self {
        BoundaryData { values: g.outer_edges().iter().map(|&i| g.edge(i)).zip(outer.iter().cloned()).collect() }
    }

    /// Values on outer edges in the order of [`ConvexGrid::outer_edges`].
    pub fn to_vec(&self, g: &ConvexGrid) -> Result<Vec<Rational>, CocircError> {
        let outer = g.outer_edges();
        for e in self.values.keys() {
            match g.edge_id(e) {
                None => return Err(CocircError::OffGrid(*e)),
                Some(i) if !g.is_outer(i) => return Err(CocircError::NotOuter(*e)),
                _ => {}
            }
        }
        outer.iter().map(|&i| self.values.get(&g.edge(i)).cloned().ok_or(CocircError::Missing(g.edge(i)))).collect()
    }

    /// σ as a vector over all edges, zero off the boundary.
    pub fn to_edge_vec(&self, g: &ConvexGrid) -> Result<Vec<Rational>, CocircError> {
        let mut v = vec![Rational::zero(); g.edges().len()];
        for (i, x) in g.outer_edges().into_iter().zip(self.to_vec(g)?) {
            v[i] = x;
        }
        Ok(v)
    }

    pub fn get(&self, e: &DirEdge) -> Rational {
        self.values.get(e).cloned().unwrap_or_else(Rational::zero)
    }
}

fn dense(
    g: &ConvexGrid,
    m: &BTreeMap<DirEdge, Rational>,
    len: usize,
    slot: impl Fn(usize) -> usize,
) -> Result<Vec<Rational>, CocircError> {
    let mut v = vec![None; len];
    for (e, x) in m {
        let i = g.edge_id(e).ok_or(CocircError::OffGrid(*e))?;
        v[slot(i)] = Some(x.clone());
    }
    v.into_iter().enumerate().map(|(i, x)| x.ok_or(CocircError::Missing(g.edge(i)))).collect()
}

/// Sum of h around the 3-circuit of triangle `t`. Both orientations
/// traverse each of their sides along its own direction.
pub fn circuit_sum(g: &ConvexGrid, h: &[Rational], t: usize) -> Rational {
    g.triangle_edges(t).iter().fold(Rational::zero(), |acc, &e| acc + &h[e])
}

pub fn check_cocirculation(g: &ConvexGrid, h: &[Rational]) -> Result<(), CocircError> {
    for t in 0..g.triangles().len() {
        let sum = circuit_sum(g, h, t);
        if !sum.is_zero() {
            return Err(CocircError::NotACocirculation { triangle: g.triangle(t), sum });
        }
    }
    Ok(())
}

pub fn border(g: &ConvexGrid, h: &Cocirculation) -> BoundaryData {
    BoundaryData {
        values: h
            .values
            .iter()
            .filter(|(e, _)| g.edge_id(e).is_some_and(|i| g.is_outer(i)))
            .map(|(e, v)| (*e, v.clone()))
            .collect(),
    }
}

/// Discrepancies δ_h(τ) = h(e) − h(e′) over the normal tandems, in canonical
/// tandem order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConcavityReport {
    pub concave: bool,
    pub deltas: Vec<((DirEdge, DirEdge), Rational)>,
}

impl ConcavityReport {
    pub fn min_delta(&self) -> Option<&Rational> {
        self.deltas.iter().map(|(_, d)| d).min()
    }
}

pub fn discrepancies(g: &ConvexGrid, h: &[Rational]) -> Vec<Rational> {
    g.normal_tandems().iter().map(|&(e, f)| &h[e] - &h[f]).collect()
}

pub fn is_concave(g: &ConvexGrid, h: &Cocirculation) -> Result<ConcavityReport, CocircError> {
    let v = h.to_vec(g)?;
    check_cocirculation(g, &v)?;
    let deltas: Vec<_> = g
        .normal_tandems()
        .iter()
        .zip(discrepancies(g, &v))
        .map(|(&(e, f), d)| ((g.edge(e), g.edge(f)), d))
        .collect();
    let concave = deltas.iter().all(|(_, d)| !d.is_negative());
    Ok(ConcavityReport { concave, deltas })
}

/// h_P: +1 on non-parallel edges right of P pointing toward P, −1 on the
/// other non-parallel edges right of P, 0 elsewhere. It is the coboundary
/// of f(x) = −max(0, distance of x to the right of P).
pub fn straight_path_vec(g: &ConvexGrid, path: &StraightPath) -> Result<Vec<Rational>, CocircError> {
    let first = g.edge(path.edges[0]);
    if path.on_boundary {
        return Err(CocircError::PathOnBoundary(first));
    }
    let u = first.tail;
    let d = path.dir.step();
    let level = |x: LatticePoint| -crate::grid::cross(d, (x.a - u.a, x.b - u.b));
    let f = |x: LatticePoint| -level(x).max(0);
    Ok(g.edges().iter().map(|e| int(f(e.head()) - f(e.tail))).collect())
}

pub fn straight_path_cocirculation(g: &ConvexGrid, path: &StraightPath) -> Result<Cocirculation, CocircError> {
    Ok(Cocirculation::from_vec(g, &straight_path_vec(g, path)?))
}

pub fn vertex_bump_vec(g: &ConvexGrid, v: LatticePoint) -> Result<Vec<Rational>, CocircError> {
    if !g.outer_vertices().contains(&v) {
        return Err(CocircError::NotOuterVertex(v));
    }
    Ok(g.edges()
        .iter()
        .map(|e| {
            if e.head() == v {
                int(1)
            } else if e.tail == v {
                int(-1)
            } else {
                int(0)
            }
        })
        .collect())
}

pub fn vertex_bump(g: &ConvexGrid, v: LatticePoint) -> Result<Cocirculation, CocircError> {
    Ok(Cocirculation::from_vec(g, &vertex_bump_vec(g, v)?))
}

/// Sum of h_P over all maximal straight paths not in the boundary, in
/// canonical path order.
pub fn strict_witness_vec(g: &ConvexGrid) -> Vec<Rational> {
    let mut h = vec![Rational::zero(); g.edges().len()];
    for p in g.straight_paths().iter().filter(|p| !p.on_boundary) {
        let hp = straight_path_vec(g, p).expect("interior path");
        for (x, y) in h.iter_mut().zip(hp) {
            *x += y;
        }
    }
    h
}

pub fn strict_concave_witness(g: &ConvexGrid) -> Cocirculation {
    Cocirculation::from_vec(g, &strict_witness_vec(g))
}

/// Rank of the borders of h and of h + ½h_v over all outer vertices v,
/// h being the strict witness.
pub fn cone_dimension_rank(g: &ConvexGrid) -> usize {
    let h = strict_witness_vec(g);
    let outer = g.outer_edges();
    let restrict = |v: &[Rational]| outer.iter().map(|&i| v[i].clone()).collect::<Vec<_>>();
    let half = rational::frac(1, 2);
    let mut rows = vec![restrict(&h)];
    for v in g.outer_vertices() {
        let hv = vertex_bump_vec(g, v).expect("outer vertex");
        let sum: Vec<Rational> = h.iter().zip(&hv).map(|(a, b)| a + b * &half).collect();
        rows.push(restrict(&sum));
    }
    linalg::rank(&rows)
}

/// σ(E⁺₀) − σ(E⁻₀).
pub fn zero_sum_value(g: &ConvexGrid, sigma: &BoundaryData) -> Rational {
    let plus = g.outer_plus().iter().fold(Rational::zero(), |acc, &i| acc + sigma.get(&g.edge(i)));
    let minus = g.outer_minus().iter().fold(Rational::zero(), |acc, &i| acc + sigma.get(&g.edge(i)));
    plus - minus
}

pub fn zero_sum_check(g: &ConvexGrid, sigma: &BoundaryData) -> bool {
    zero_sum_value(g, sigma).is_zero()
}

/// Consecutive pairs (e, e′) along a side-path with σ(e) < σ(e′).
pub fn monotone_violations(g: &ConvexGrid, sigma: &BoundaryData) -> Vec<(DirEdge, DirEdge)> {
    let mut out = Vec::new();
    for side in g.side_paths() {
        for w in side.edges.windows(2) {
            let (e, f) = (g.edge(w[0]), g.edge(w[1]));
            if sigma.get(&e) < sigma.get(&f) {
                out.push((e, f));
            }
        }
    }
    out
}

pub fn monotone_check(g: &ConvexGrid, sigma: &BoundaryData) -> bool {
    monotone_violations(g, sigma).is_empty()
}

/// Cocirculation with discrepancy exactly α on every normal tandem: on each
/// maximal straight path e₁…e_k of the smallest 3-side grid containing G,
/// g(e_i) = (k − 2i + 1)α; the result is restricted to G.
pub fn constant_discrepancy_cocirculation(g: &ConvexGrid, alpha: &Rational) -> Cocirculation {
    let vs = g.vertices();
    let min_b = vs.iter().map(|p| p.b).min().unwrap();
    let max_a = vs.iter().map(|p| p.a).max().unwrap();
    let min_c = vs.iter().map(|p| p.a - p.b).min().unwrap();
    let (a0, b0) = (min_c + min_b, min_b);
    let n = max_a - a0;
    let big = build_three_side_grid(n.max(1)).expect("positive size");
    let mut values = BTreeMap::new();
    for path in big.straight_paths() {
        let k = path.edges.len() as i64;
        for (pos, &ei) in path.edges.iter().enumerate() {
            let e = big.edge(ei);
            let shifted = DirEdge::new(e.tail.shift((a0, b0)), e.dir);
            if g.edge_id(&shifted).is_some() {
                let i = pos as i64 + 1;
                values.insert(shifted, alpha * int(k - 2 * i + 1));
            }
        }
    }
    Cocirculation { values }
}

/// σ′ = σ − lower on outer edges.
pub fn reduce_discrepancy_problem(g: &ConvexGrid, sigma: &BoundaryData, lower: &Cocirculation) -> BoundaryData {
    let b = border(g, lower);
    BoundaryData {
        values: sigma.values.iter().map(|(e, v)| (*e, v - b.values.get(e).cloned().unwrap_or_default())).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_parallelogram, build_polygon, Dir};

    fn e(a: i64, b: i64, d: Dir) -> DirEdge {
        DirEdge::new(LatticePoint::new(a, b), d)
    }

    /// h on the unit parallelogram from explicit values
    /// (bottom, right, diagonal, top, left).
    fn rhombus_h(bottom: i64, right: i64, diag: i64, top: i64, left: i64) -> Cocirculation {
        Cocirculation {
            values: [
                (e(0, 0, Dir::One), int(bottom)),
                (e(1, 0, Dir::Two), int(right)),
                (e(1, 1, Dir::Three), int(diag)),
                (e(0, 1, Dir::One), int(top)),
                (e(0, 0, Dir::Two), int(left)),
            ]
            .into_iter()
            .collect(),
        }
    }

    #[test]
    fn parallelogram_border_and_discrepancy() {
        let g = build_parallelogram(1, 1).unwrap();
        let h = rhombus_h(0, 1, -1, 1, 0);
        let b = border(&g, &h);
        assert_eq!(b.to_vec(&g).unwrap(), vec![int(0), int(0), int(1), int(1)]);
        let r = is_concave(&g, &h).unwrap();
        assert!(r.concave);
        assert_eq!(r.deltas, vec![((e(1, 0, Dir::Two), e(0, 0, Dir::Two)), int(1))]);

        let swapped = rhombus_h(0, 0, 0, -1, 1);
        let r = is_concave(&g, &swapped).unwrap();
        assert!(!r.concave);
        assert_eq!(r.deltas[0].1, int(-1));
    }

    #[test]
    fn rejects_non_cocirculation() {
        let g = build_parallelogram(1, 1).unwrap();
        let h = rhombus_h(1, 1, 1, 0, 0);
        assert!(matches!(is_concave(&g, &h), Err(CocircError::NotACocirculation { .. })));
    }

    #[test]
    fn zero_is_concave() {
        let g = build_three_side_grid(3).unwrap();
        let r = is_concave(&g, &Cocirculation::zero(&g)).unwrap();
        assert!(r.concave);
        assert!(r.deltas.iter().all(|(_, d)| d.is_zero()));
        assert!(border(&g, &Cocirculation::zero(&g)).values.values().all(Zero::is_zero));
    }

    #[test]
    fn straight_paths_give_concave_cocirculations() {
        for g in [build_three_side_grid(2).unwrap(), build_three_side_grid(4).unwrap(), build_polygon([2, 1, 1, 2, 1, 1]).unwrap()] {
            for p in g.straight_paths().iter().filter(|p| !p.on_boundary) {
                let h = straight_path_cocirculation(&g, p).unwrap();
                assert!(h.values.values().all(|v| v.abs() <= int(1)));
                let r = is_concave(&g, &h).unwrap();
                assert!(r.concave);
                // parallel edges vanish
                for &i in &p.edges {
                    assert!(h.values[&g.edge(i)].is_zero());
                }
            }
            for p in g.straight_paths().iter().filter(|p| p.on_boundary) {
                assert!(matches!(straight_path_cocirculation(&g, p), Err(CocircError::PathOnBoundary(_))));
            }
        }
    }

    #[test]
    fn path_cocirculation_matches_definition_on_n2() {
        // interior ξ₁ line of the size-2 triangle runs from (1,1) to (2,1);
        // its right side is the strip 0 ≤ b ≤ 1.
        let g = build_three_side_grid(2).unwrap();
        let p = g.straight_paths().into_iter().find(|p| p.dir == Dir::One && !p.on_boundary).unwrap();
        assert_eq!(p.edges.iter().map(|&i| g.edge(i)).collect::<Vec<_>>(), vec![e(1, 1, Dir::One)]);
        let h = straight_path_cocirculation(&g, &p).unwrap();
        let expect = |edge: DirEdge| -> i64 {
            let (t, hd) = (edge.tail, edge.head());
            if edge.dir == Dir::One || t.b.max(hd.b) > 1 {
                0
            } else if hd.b > t.b {
                1
            } else {
                -1
            }
        };
        for (edge, v) in &h.values {
            assert_eq!(*v, int(expect(*edge)), "{edge}");
        }
    }

    #[test]
    fn vertex_bumps_are_cocirculations() {
        let g = build_three_side_grid(1).unwrap();
        let h = vertex_bump(&g, LatticePoint::new(0, 0)).unwrap();
        assert_eq!(h.values[&e(0, 0, Dir::One)], int(-1));
        assert_eq!(h.values[&e(1, 1, Dir::Three)], int(1));
        assert_eq!(h.values[&e(1, 0, Dir::Two)], int(0));
        let g = build_three_side_grid(3).unwrap();
        for v in g.outer_vertices() {
            let hv = vertex_bump(&g, v).unwrap();
            check_cocirculation(&g, &hv.to_vec(&g).unwrap()).unwrap();
        }
        assert!(matches!(vertex_bump(&g, LatticePoint::new(2, 1)), Err(CocircError::NotOuterVertex(_))));
    }

    #[test]
    fn strict_witness_and_bumps() {
        let g = build_three_side_grid(1).unwrap();
        assert_eq!(strict_concave_witness(&g), Cocirculation::zero(&g));
        for g in [build_three_side_grid(2).unwrap(), build_parallelogram(1, 1).unwrap(), build_three_side_grid(3).unwrap()] {
            let h = strict_concave_witness(&g);
            let r = is_concave(&g, &h).unwrap();
            assert!(r.deltas.iter().all(|(_, d)| d.is_positive()));
            for v in g.outer_vertices() {
                let sum = h.add(&vertex_bump(&g, v).unwrap().scale(&rational::frac(1, 2)));
                assert!(is_concave(&g, &sum).unwrap().concave);
            }
            let b = border(&g, &h);
            assert!(zero_sum_check(&g, &b));
            for side in g.side_paths() {
                for w in side.edges.windows(2) {
                    assert!(b.get(&g.edge(w[0])) > b.get(&g.edge(w[1])));
                }
            }
        }
    }

    #[test]
    fn cone_dimension_examples() {
        assert_eq!(cone_dimension_rank(&build_three_side_grid(1).unwrap()), 2);
        assert_eq!(cone_dimension_rank(&build_three_side_grid(2).unwrap()), 5);
        assert_eq!(cone_dimension_rank(&build_parallelogram(1, 1).unwrap()), 3);
    }

    fn sigma(g: &ConvexGrid, vals: &[(DirEdge, i64)]) -> BoundaryData {
        let mut b = BoundaryData::from_vec(g, &vec![int(0); g.outer_edges().len()]);
        for (e, v) in vals {
            b.values.insert(*e, int(*v));
        }
        b
    }

    #[test]
    fn zero_sum_and_monotone() {
        let g = build_three_side_grid(1).unwrap();
        let s = sigma(&g, &[(e(0, 0, Dir::One), 1), (e(1, 0, Dir::Two), 1), (e(1, 1, Dir::Three), -2)]);
        assert!(zero_sum_check(&g, &s));
        assert!(monotone_check(&g, &s));

        let g = build_three_side_grid(2).unwrap();
        // ν along the ξ₃ side: (2,2)→(1,1)→(0,0)
        let s = sigma(&g, &[(e(2, 2, Dir::Three), 1), (e(1, 1, Dir::Three), -1)]);
        assert!(zero_sum_check(&g, &s));
        assert!(monotone_check(&g, &s));
        let s = sigma(&g, &[(e(1, 0, Dir::One), 1), (e(1, 1, Dir::Three), -1)]);
        assert_eq!(monotone_violations(&g, &s), vec![(e(0, 0, Dir::One), e(1, 0, Dir::One))]);
    }

    #[test]
    fn constant_discrepancy_is_exact() {
        let g = build_three_side_grid(2).unwrap();
        assert_eq!(constant_discrepancy_cocirculation(&g, &int(0)), Cocirculation::zero(&g));
        let h = constant_discrepancy_cocirculation(&g, &int(1));
        assert_eq!(h.values[&e(0, 0, Dir::One)], int(1));
        assert_eq!(h.values[&e(1, 0, Dir::One)], int(-1));
        for (g, alpha) in [
            (build_three_side_grid(2).unwrap(), int(1)),
            (build_three_side_grid(3).unwrap(), int(2)),
            (build_polygon([1, 1, 1, 1, 1, 1]).unwrap(), rational::frac(-3, 7)),
            (build_parallelogram(2, 3).unwrap(), rational::frac(5, 2)),
        ] {
            let h = constant_discrepancy_cocirculation(&g, &alpha);
            let r = is_concave(&g, &h).unwrap();
            assert!(r.deltas.iter().all(|(_, d)| *d == alpha));
        }
    }

    #[test]
    fn reduce_by_own_border_is_zero() {
        let g = build_three_side_grid(3).unwrap();
        let lower = constant_discrepancy_cocirculation(&g, &int(1));
        let s = border(&g, &lower);
        let reduced = reduce_discrepancy_problem(&g, &s, &lower);
        assert!(reduced.values.values().all(Zero::is_zero));
        let same = reduce_discrepancy_problem(&g, &s, &Cocirculation::zero(&g));
        assert_eq!(same, s);
    }
}
