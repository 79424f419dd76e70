//! v-configurations read as flows on the dual graph H.
//!
//! g(τ) is the flow on the arc a_τ from v_e to v_e′. A triangle with
//! z(C) > 0 emits z(C) units through each of its sides (absorbs |z(C)| if
//! negative); an outer edge emits d(e) or absorbs |d(e)|.

use std::collections::{BTreeMap, VecDeque};

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::feasibility::VConfiguration;
use crate::grid::{ConvexGrid, DirEdge, HPath, LittleTriangle};
use crate::rational::Rational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DualflowError {
    #[error("flow balance fails at v_{edge}: residual {residual}")]
    BalanceViolation { edge: DirEdge, residual: Rational },
    #[error("configuration is not integer-valued")]
    NotIntegral,
    #[error("configuration refers to {0}, which is not part of the grid")]
    OffGrid(String),
    #[error("no free attachment for path {0}")]
    AttachmentImpossible(HPath),
}

/// Net supply at every H-vertex (indexed by grid edge): the sum of z over
/// triangles containing the edge plus d on outer edges.
fn supplies(grid: &ConvexGrid, k: &VConfiguration) -> Result<Vec<Rational>, DualflowError> {
    let mut s = vec![Rational::zero(); grid.edges().len()];
    for (t, z) in &k.z {
        grid.triangle_id(t).ok_or_else(|| DualflowError::OffGrid(t.to_string()))?;
        for e in t.edges() {
            s[grid.edge_id(&e).expect("side of a grid triangle")] += z;
        }
    }
    for (e, d) in &k.d {
        let i = grid.edge_id(e).filter(|&i| grid.is_outer(i)).ok_or_else(|| DualflowError::OffGrid(e.to_string()))?;
        s[i] += d;
    }
    Ok(s)
}

/// Flow on the arc leaving each H-vertex (zero where there is none).
fn arc_flow(grid: &ConvexGrid, k: &VConfiguration) -> Result<Vec<Rational>, DualflowError> {
    let mut out = vec![Rational::zero(); grid.edges().len()];
    for (e, g) in &k.g {
        let i = grid
            .edge_id(e)
            .filter(|&i| grid.dual().successor(i).is_some())
            .ok_or_else(|| DualflowError::OffGrid(format!("tandem at {e}")))?;
        out[i] = g.clone();
    }
    Ok(out)
}

/// Flow balance div_g(v) + Σz + Σd = 0 at every vertex of H.
pub fn validate_vconfig(grid: &ConvexGrid, k: &VConfiguration) -> Result<(), DualflowError> {
    let supply = supplies(grid, k)?;
    let out = arc_flow(grid, k)?;
    let mut div = vec![Rational::zero(); grid.edges().len()];
    for &(u, v) in &grid.dual().arcs {
        div[v] += &out[u];
        div[u] -= &out[u];
    }
    for (i, (dv, sv)) in div.iter().zip(&supply).enumerate() {
        let residual = dv + sv;
        if !residual.is_zero() {
            return Err(DualflowError::BalanceViolation { edge: grid.edge(i), residual });
        }
    }
    Ok(())
}

fn to_int(r: &Rational) -> Result<BigInt, DualflowError> {
    if r.is_integer() {
        Ok(r.to_integer())
    } else {
        Err(DualflowError::NotIntegral)
    }
}

/// Emitted and absorbed weight at each H-vertex.
fn emit_absorb(grid: &ConvexGrid, k: &VConfiguration) -> Result<(Vec<BigInt>, Vec<BigInt>), DualflowError> {
    let n = grid.edges().len();
    let (mut emit, mut absorb) = (vec![BigInt::zero(); n], vec![BigInt::zero(); n]);
    let mut add = |i: usize, v: &Rational| -> Result<(), DualflowError> {
        let v = to_int(v)?;
        if v.is_positive() {
            emit[i] += v;
        } else {
            absorb[i] -= v;
        }
        Ok(())
    };
    for (t, z) in &k.z {
        for e in t.edges() {
            add(grid.edge_id(&e).ok_or_else(|| DualflowError::OffGrid(t.to_string()))?, z)?;
        }
    }
    for (e, d) in &k.d {
        add(grid.edge_id(e).ok_or_else(|| DualflowError::OffGrid(e.to_string()))?, d)?;
    }
    Ok((emit, absorb))
}

/// Integer paths decomposition of an integer v-configuration: weighted
/// paths whose incidence vectors sum to g and whose ends match the emitted
/// and absorbed weight at every edge. Lines are processed independently;
/// at each vertex, emitted units first cancel absorbed units in place
/// (degenerate paths), remaining absorption is served by arriving units in
/// arrival order, and remaining emission continues down the line.
pub fn decompose_paths(grid: &ConvexGrid, k: &VConfiguration) -> Result<Vec<(HPath, BigInt)>, DualflowError> {
    validate_vconfig(grid, k)?;
    let (emit, absorb) = emit_absorb(grid, k)?;
    let flow: Vec<BigInt> = arc_flow(grid, k)?.iter().map(to_int).collect::<Result<_, _>>()?;
    let mut out: BTreeMap<HPath, BigInt> = BTreeMap::new();
    let mut push = |from: usize, to: usize, w: BigInt| {
        *out.entry(HPath::new(grid.edge(from), grid.edge(to))).or_default() += w;
    };
    for comp in &grid.dual().lines {
        for line in comp {
            let mut queue: VecDeque<(usize, BigInt)> = VecDeque::new();
            for &v in &line.vertices {
                let m = emit[v].clone().min(absorb[v].clone());
                if m.is_positive() {
                    push(v, v, m.clone());
                }
                let mut need = &absorb[v] - &m;
                while need.is_positive() {
                    let (s, w) = queue.pop_front().ok_or_else(|| DualflowError::BalanceViolation {
                        edge: grid.edge(v),
                        residual: Rational::from_integer(need.clone()),
                    })?;
                    let take = w.clone().min(need.clone());
                    push(s, v, take.clone());
                    need -= &take;
                    if w > take {
                        queue.push_front((s, w - take));
                    }
                }
                let rest = &emit[v] - &m;
                if rest.is_positive() {
                    queue.push_back((v, rest));
                }
                let carried: BigInt = queue.iter().map(|(_, w)| w).sum();
                if carried != flow[v] {
                    return Err(DualflowError::BalanceViolation {
                        edge: grid.edge(v),
                        residual: Rational::from_integer(carried - &flow[v]),
                    });
                }
            }
        }
    }
    Ok(out.into_iter().collect())
}

/// Σ weight·χ^P as flow on the arc leaving each H-vertex.
pub fn resum_paths(grid: &ConvexGrid, paths: &[(HPath, BigInt)]) -> Vec<BigInt> {
    let mut g = vec![BigInt::zero(); grid.edges().len()];
    for (p, w) in paths {
        let vs = p.vertices(grid).expect("path of H");
        for &v in &vs[..vs.len() - 1] {
            g[v] += w;
        }
    }
    g
}

/// Checks that the paths re-sum to g and start and end where d and z say.
pub fn check_decomposition(grid: &ConvexGrid, k: &VConfiguration, paths: &[(HPath, BigInt)]) -> Result<(), String> {
    if paths.iter().any(|(p, w)| !w.is_positive() || p.vertices(grid).is_none()) {
        return Err("decomposition contains a non-path or a non-positive weight".into());
    }
    let flow = arc_flow(grid, k).map_err(|e| e.to_string())?;
    for (i, (f, s)) in flow.iter().zip(resum_paths(grid, paths)).enumerate() {
        if *f != Rational::from_integer(s) {
            return Err(format!("path sum differs from g on the arc at {}", grid.edge(i)));
        }
    }
    let (emit, absorb) = emit_absorb(grid, k).map_err(|e| e.to_string())?;
    let n = grid.edges().len();
    let (mut leave, mut enter) = (vec![BigInt::zero(); n], vec![BigInt::zero(); n]);
    for (p, w) in paths {
        leave[grid.edge_id(&p.from).unwrap()] += w;
        enter[grid.edge_id(&p.to).unwrap()] += w;
    }
    for i in 0..n {
        if leave[i] != emit[i] || enter[i] != absorb[i] {
            return Err(format!("path ends do not match sources and sinks at {}", grid.edge(i)));
        }
    }
    Ok(())
}

/// An emitting or absorbing element.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Element {
    Triangle(LittleTriangle),
    Edge(DirEdge),
}

impl Element {
    pub fn edges(&self) -> Vec<DirEdge> {
        match self {
            Element::Triangle(t) => t.edges().to_vec(),
            Element::Edge(e) => vec![*e],
        }
    }
}

/// A path copy attached to an emitter copy (index into `phi_plus`) and an
/// absorber copy (index into `phi_minus`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AttachedPath {
    pub path: HPath,
    pub emitter: usize,
    pub absorber: usize,
}

/// Combinatorial configuration: copies of emitting and absorbing elements
/// and path copies attached to them.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CConfiguration {
    pub phi_plus: Vec<Element>,
    pub phi_minus: Vec<Element>,
    pub paths: Vec<AttachedPath>,
}

impl CConfiguration {
    /// No triangle has copies on both sides.
    pub fn is_regular(&self) -> bool {
        self.phi_plus
            .iter()
            .filter(|e| matches!(e, Element::Triangle(_)))
            .all(|e| !self.phi_minus.contains(e))
    }

    /// Φ⁺ triangles are turned-over and Φ⁻ triangles normal.
    pub fn is_oriented(&self) -> bool {
        let tri = |e: &Element, normal: bool| match e {
            Element::Triangle(t) => t.is_normal() == normal,
            Element::Edge(_) => true,
        };
        self.phi_plus.iter().all(|e| tri(e, false)) && self.phi_minus.iter().all(|e| tri(e, true))
    }

    /// Φ⁺ edges lie in E⁺₀ and Φ⁻ edges in E⁻₀.
    pub fn boundary_signs_respected(&self, grid: &ConvexGrid) -> bool {
        use crate::grid::BoundarySign::{Minus, Plus};
        let sign = |e: &DirEdge| grid.edge_id(e).and_then(|i| grid.sign(i));
        self.phi_plus.iter().all(|x| !matches!(x, Element::Edge(e) if sign(e) != Some(Plus)))
            && self.phi_minus.iter().all(|x| !matches!(x, Element::Edge(e) if sign(e) != Some(Minus)))
    }
}

/// Checks the attachment property: each path leaves its emitter and enters
/// its absorber, and every edge of every emitter (absorber) copy has
/// exactly one attached leaving (entering) path.
pub fn validate_cconfig(grid: &ConvexGrid, c: &CConfiguration) -> Result<(), String> {
    let mut out_slots: BTreeMap<(usize, DirEdge), usize> = BTreeMap::new();
    let mut in_slots: BTreeMap<(usize, DirEdge), usize> = BTreeMap::new();
    for ap in &c.paths {
        if ap.path.vertices(grid).is_none() {
            return Err(format!("{} is not a path of H", ap.path));
        }
        let em = c.phi_plus.get(ap.emitter).ok_or("emitter index out of range")?;
        let ab = c.phi_minus.get(ap.absorber).ok_or("absorber index out of range")?;
        if !em.edges().contains(&ap.path.from) {
            return Err(format!("{} does not leave its emitter", ap.path));
        }
        if !ab.edges().contains(&ap.path.to) {
            return Err(format!("{} does not enter its absorber", ap.path));
        }
        *out_slots.entry((ap.emitter, ap.path.from)).or_default() += 1;
        *in_slots.entry((ap.absorber, ap.path.to)).or_default() += 1;
    }
    for (side, elems, slots) in [("emitter", &c.phi_plus, &out_slots), ("absorber", &c.phi_minus, &in_slots)] {
        for (i, el) in elems.iter().enumerate() {
            for e in el.edges() {
                if grid.edge_id(&e).is_none() {
                    return Err(format!("{e} is not a grid edge"));
                }
                let n = slots.get(&(i, e)).copied().unwrap_or(0);
                if n != 1 {
                    return Err(format!("{side} copy {i} has {n} paths attached at {e}"));
                }
            }
        }
    }
    Ok(())
}

/// Copies of each emitting/absorbing element, a path copy per unit of
/// weight, and greedy attachment to the lowest-indexed copy with a free
/// slot at the path's end edge.
pub fn build_cconfig(grid: &ConvexGrid, k: &VConfiguration) -> Result<CConfiguration, DualflowError> {
    let paths = decompose_paths(grid, k)?;
    let mut c = CConfiguration::default();
    let mut copies = |el: Element, v: &Rational| -> Result<(), DualflowError> {
        let v = to_int(v)?;
        let n: usize = v.magnitude().try_into().expect("copy count fits in usize");
        let dst = if v.is_positive() { &mut c.phi_plus } else { &mut c.phi_minus };
        dst.extend(std::iter::repeat_n(el, n));
        Ok(())
    };
    for (t, z) in &k.z {
        copies(Element::Triangle(*t), z)?;
    }
    for (e, d) in &k.d {
        copies(Element::Edge(*e), d)?;
    }
    let mut used_out: BTreeMap<(usize, DirEdge), ()> = BTreeMap::new();
    let mut used_in: BTreeMap<(usize, DirEdge), ()> = BTreeMap::new();
    let pick = |elems: &[Element], used: &mut BTreeMap<(usize, DirEdge), ()>, e: DirEdge| -> Option<usize> {
        let i = (0..elems.len()).find(|&i| elems[i].edges().contains(&e) && !used.contains_key(&(i, e)))?;
        used.insert((i, e), ());
        Some(i)
    };
    for (p, w) in &paths {
        let mut left = w.clone();
        while left.is_positive() {
            let emitter = pick(&c.phi_plus, &mut used_out, p.from).ok_or(DualflowError::AttachmentImpossible(*p))?;
            let absorber = pick(&c.phi_minus, &mut used_in, p.to).ok_or(DualflowError::AttachmentImpossible(*p))?;
            c.paths.push(AttachedPath { path: *p, emitter, absorber });
            left -= 1;
        }
    }
    Ok(c)
}

/// z and d count copies (Φ⁺ minus Φ⁻); g = Σ χ^P.
pub fn cconfig_to_vconfig(grid: &ConvexGrid, c: &CConfiguration) -> VConfiguration {
    let mut k = VConfiguration::default();
    for (elems, s) in [(&c.phi_plus, 1), (&c.phi_minus, -1)] {
        for el in elems.iter() {
            let slot = match el {
                Element::Triangle(t) => k.z.entry(*t).or_insert_with(Rational::zero),
                Element::Edge(e) => k.d.entry(*e).or_insert_with(Rational::zero),
            };
            *slot += Rational::from_integer(BigInt::from(s));
        }
    }
    for ap in &c.paths {
        let vs = ap.path.vertices(grid).expect("path of H");
        for &v in &vs[..vs.len() - 1] {
            *k.g.entry(grid.edge(v)).or_insert_with(Rational::zero) += Rational::from_integer(BigInt::from(1));
        }
    }
    k.z.retain(|_, v| !v.is_zero());
    k.d.retain(|_, v| !v.is_zero());
    k
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::feasibility::{extend_vec, theta_configuration, FeasibilityResult};
    use crate::grid::{build_parallelogram, build_three_side_grid, Dir, LatticePoint};
    use crate::rational::int;

    fn e(a: i64, b: i64, d: Dir) -> DirEdge {
        DirEdge::new(LatticePoint::new(a, b), d)
    }

    fn single_path_config() -> (ConvexGrid, VConfiguration) {
        let g = build_parallelogram(1, 1).unwrap();
        let mut k = VConfiguration::default();
        k.d.insert(e(1, 0, Dir::Two), int(1));
        k.d.insert(e(0, 0, Dir::Two), int(-1));
        k.g.insert(e(1, 0, Dir::Two), int(1));
        (g, k)
    }

    #[test]
    fn zero_configuration() {
        let g = build_three_side_grid(2).unwrap();
        let k = VConfiguration::default();
        validate_vconfig(&g, &k).unwrap();
        assert!(decompose_paths(&g, &k).unwrap().is_empty());
        let c = build_cconfig(&g, &k).unwrap();
        assert_eq!(c, CConfiguration::default());
        assert_eq!(cconfig_to_vconfig(&g, &c), k);
    }

    #[test]
    fn parallelogram_single_path() {
        let (g, k) = single_path_config();
        validate_vconfig(&g, &k).unwrap();
        let paths = decompose_paths(&g, &k).unwrap();
        assert_eq!(paths, vec![(HPath::new(e(1, 0, Dir::Two), e(0, 0, Dir::Two)), BigInt::from(1))]);
        let c = build_cconfig(&g, &k).unwrap();
        assert_eq!(c.phi_plus, vec![Element::Edge(e(1, 0, Dir::Two))]);
        assert_eq!(c.phi_minus, vec![Element::Edge(e(0, 0, Dir::Two))]);
        assert_eq!(c.paths.len(), 1);
        validate_cconfig(&g, &c).unwrap();
        assert_eq!(cconfig_to_vconfig(&g, &c), k);
    }

    #[test]
    fn perturbed_flow_is_rejected_at_both_ends() {
        let (g, mut k) = single_path_config();
        *k.g.get_mut(&e(1, 0, Dir::Two)).unwrap() += int(1);
        match validate_vconfig(&g, &k) {
            Err(DualflowError::BalanceViolation { edge, .. }) => {
                assert!(edge == e(1, 0, Dir::Two) || edge == e(0, 0, Dir::Two));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn theta_configuration_decomposes_into_degenerate_paths() {
        let g = build_three_side_grid(2).unwrap();
        let k = theta_configuration(&g).to_sparse(&g);
        let paths = decompose_paths(&g, &k).unwrap();
        check_decomposition(&g, &k, &paths).unwrap();
        let c = build_cconfig(&g, &k).unwrap();
        validate_cconfig(&g, &c).unwrap();
        assert_eq!(cconfig_to_vconfig(&g, &c), k);
    }

    #[test]
    fn certificate_round_trip() {
        let g = build_three_side_grid(2).unwrap();
        let mut s = vec![int(0); g.outer_edges().len()];
        for (edge, v) in [(e(2, 2, Dir::Three), 1), (e(1, 1, Dir::Three), -1)] {
            let i = g.edge_id(&edge).unwrap();
            s[g.outer_edges().iter().position(|&x| x == i).unwrap()] = int(v);
        }
        let FeasibilityResult::Certificate { k, .. } = extend_vec(&g, &s).unwrap() else { panic!() };
        validate_vconfig(&g, &k).unwrap();
        let paths = decompose_paths(&g, &k).unwrap();
        check_decomposition(&g, &k, &paths).unwrap();
        let c = build_cconfig(&g, &k).unwrap();
        assert!(c.is_regular());
        validate_cconfig(&g, &c).unwrap();
        assert_eq!(cconfig_to_vconfig(&g, &c), k);
    }

    #[test]
    fn rejects_fractional() {
        let (g, mut k) = single_path_config();
        for v in k.d.values_mut().chain(k.g.values_mut()) {
            *v /= int(2);
        }
        validate_vconfig(&g, &k).unwrap();
        assert_eq!(decompose_paths(&g, &k), Err(DualflowError::NotIntegral));
    }
}
