//! Extending a border σ to a concave cocirculation, or certifying that no
//! extension exists.
//!
//! The LP has one free variable h(e) per edge. Its equality rows are one
//! 3-circuit row per little triangle (in triangle order) followed by one
//! border row h(e) = σ(e) per outer edge (in outer-edge order); its
//! inequality rows are h(e′) − h(e) ≤ 0, one per normal tandem. A Farkas
//! vector for this system is, row for row, a v-configuration (z, d, g).

use std::collections::BTreeMap;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cocirc::{self, BoundaryData, CocircError, Cocirculation};
use crate::exactlp::{self, Farkas, LinearSystem, LpOutcome};
use crate::grid::{ConvexGrid, DirEdge, LittleTriangle};
use crate::rational::{self, int, Rational};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FeasibilityError {
    #[error(transparent)]
    Domain(#[from] CocircError),
    #[error("certificate failed re-verification: {0}")]
    CertificateInvalid(String),
    #[error("v-configuration refers to {0}, which is not part of the grid")]
    OffGrid(String),
}

/// A triple (z, g, d) of dual multipliers. `g` is keyed by the first edge
/// of its normal tandem, which determines the tandem.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct VConfiguration {
    #[serde(with = "rational::serde_rational_map")]
    pub z: BTreeMap<LittleTriangle, Rational>,
    #[serde(with = "rational::serde_rational_map")]
    pub g: BTreeMap<DirEdge, Rational>,
    #[serde(with = "rational::serde_rational_map")]
    pub d: BTreeMap<DirEdge, Rational>,
}

/// The same data as dense vectors in triangle, normal-tandem and outer-edge
/// order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DenseConfig {
    pub z: Vec<Rational>,
    pub g: Vec<Rational>,
    pub d: Vec<Rational>,
}

impl VConfiguration {
    pub fn zero(grid: &ConvexGrid) -> Self {
        DenseConfig::zero(grid).to_sparse(grid)
    }

    pub fn dense(&self, grid: &ConvexGrid) -> Result<DenseConfig, FeasibilityError> {
        let mut k = DenseConfig::zero(grid);
        for (t, v) in &self.z {
            let i = grid.triangle_id(t).ok_or_else(|| FeasibilityError::OffGrid(t.to_string()))?;
            k.z[i] = v.clone();
        }
        let tandem_of: BTreeMap<usize, usize> =
            grid.normal_tandems().iter().enumerate().map(|(k, &(e, _))| (e, k)).collect();
        for (e, v) in &self.g {
            let i = grid
                .edge_id(e)
                .and_then(|i| tandem_of.get(&i).copied())
                .ok_or_else(|| FeasibilityError::OffGrid(format!("tandem at {e}")))?;
            k.g[i] = v.clone();
        }
        let outer: BTreeMap<usize, usize> = grid.outer_edges().into_iter().enumerate().map(|(k, e)| (e, k)).collect();
        for (e, v) in &self.d {
            let i = grid
                .edge_id(e)
                .and_then(|i| outer.get(&i).copied())
                .ok_or_else(|| FeasibilityError::OffGrid(format!("outer edge {e}")))?;
            k.d[i] = v.clone();
        }
        Ok(k)
    }

    pub fn is_integral(&self) -> bool {
        self.z.values().chain(self.g.values()).chain(self.d.values()).all(rational::is_integral)
    }
}

impl DenseConfig {
    pub fn zero(grid: &ConvexGrid) -> Self {
        DenseConfig {
            z: vec![Rational::zero(); grid.triangles().len()],
            g: vec![Rational::zero(); grid.normal_tandems().len()],
            d: vec![Rational::zero(); grid.outer_edges().len()],
        }
    }

    /// Sparse form; zero entries are dropped.
    pub fn to_sparse(&self, grid: &ConvexGrid) -> VConfiguration {
        let nz = |v: &Rational| !v.is_zero();
        VConfiguration {
            z: grid.triangles().iter().copied().zip(self.z.iter().cloned()).filter(|(_, v)| nz(v)).collect(),
            g: grid
                .normal_tandems()
                .iter()
                .map(|&(e, _)| grid.edge(e))
                .zip(self.g.iter().cloned())
                .filter(|(_, v)| nz(v))
                .collect(),
            d: grid
                .outer_edges()
                .into_iter()
                .map(|e| grid.edge(e))
                .zip(self.d.iter().cloned())
                .filter(|(_, v)| nz(v))
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FeasibilityResult {
    Extended(Cocirculation),
    Certificate { k: VConfiguration, violation: Rational },
}

impl FeasibilityResult {
    pub fn is_feasible(&self) -> bool {
        matches!(self, FeasibilityResult::Extended(_))
    }
}

/// θ(e) = +1 on E⁺₀, −1 on E⁻₀, in outer-edge order.
pub fn theta(grid: &ConvexGrid) -> Vec<Rational> {
    grid.outer_edges().into_iter().map(|e| int(grid.theta(e))).collect()
}

/// The v-configuration with border θ: z = −1 on normal and +1 on
/// turned-over triangles, g = 0.
pub fn theta_configuration(grid: &ConvexGrid) -> DenseConfig {
    DenseConfig {
        z: grid.triangles().iter().map(|t| if t.is_normal() { int(-1) } else { int(1) }).collect(),
        g: vec![Rational::zero(); grid.normal_tandems().len()],
        d: theta(grid),
    }
}

/// The LP for problem (5)–(7); with `tandem_rhs`, the tandem rows read
/// h(e′) − h(e) ≤ rhs instead of ≤ 0.
pub fn build_system(grid: &ConvexGrid, sigma: &[Rational], tandem_rhs: Option<&[Rational]>) -> LinearSystem {
    let one = int(1);
    let mut sys = LinearSystem::new(grid.edges().len());
    for t in 0..grid.triangles().len() {
        sys.add_eq(grid.triangle_edges(t).iter().map(|&e| (e, one.clone())).collect(), Rational::zero());
    }
    for (e, s) in grid.outer_edges().into_iter().zip(sigma) {
        sys.add_eq(vec![(e, one.clone())], s.clone());
    }
    for (k, &(e, f)) in grid.normal_tandems().iter().enumerate() {
        let rhs = tandem_rhs.map_or_else(Rational::zero, |r| r[k].clone());
        sys.add_le(vec![(f, one.clone()), (e, -one.clone())], rhs);
    }
    sys
}

/// Dual balance residual at every edge:
/// Σ_{C∋e} z(C) − Σ_{τ=(e,·)} g(τ) + Σ_{τ=(·,e)} g(τ) (+ d(e) if outer).
pub fn dual_residuals(grid: &ConvexGrid, k: &DenseConfig) -> Vec<Rational> {
    let mut r = vec![Rational::zero(); grid.edges().len()];
    for (t, z) in k.z.iter().enumerate() {
        for e in grid.triangle_edges(t) {
            r[e] += z;
        }
    }
    for (&(e, f), g) in grid.normal_tandems().iter().zip(&k.g) {
        r[e] -= g;
        r[f] += g;
    }
    for (e, d) in grid.outer_edges().into_iter().zip(&k.d) {
        r[e] += d;
    }
    r
}

/// Checks the dual balance at every edge and g ≥ 0.
pub fn check_vconfig(grid: &ConvexGrid, k: &DenseConfig) -> Result<(), String> {
    if let Some((i, _)) = k.g.iter().enumerate().find(|(_, g)| g.is_negative()) {
        let (e, _) = grid.normal_tandems()[i];
        return Err(format!("negative g on the tandem at {}", grid.edge(e)));
    }
    match dual_residuals(grid, k).iter().enumerate().find(|(_, r)| !r.is_zero()) {
        Some((e, r)) => Err(format!("balance at edge {} is off by {r}", grid.edge(e))),
        None => Ok(()),
    }
}

pub fn sigma_dot_d(sigma: &[Rational], k: &DenseConfig) -> Rational {
    rational::dot(sigma, &k.d)
}

/// Regroups raw LP multipliers into (z, g, d), scales them to coprime
/// integers and re-verifies the dual balance.
pub fn farkas_to_vconfig(grid: &ConvexGrid, raw: &Farkas) -> Result<DenseConfig, FeasibilityError> {
    let nt = grid.triangles().len();
    let no = grid.outer_edges().len();
    if raw.eq.len() != nt + no || raw.le.len() != grid.normal_tandems().len() {
        return Err(FeasibilityError::CertificateInvalid("multiplier vector has the wrong shape".into()));
    }
    let all: Vec<Rational> = raw.eq.iter().chain(&raw.le).cloned().collect();
    let ints: Vec<Rational> = rational::primitive_integer_vector(&all).into_iter().map(Rational::from_integer).collect();
    let k = DenseConfig { z: ints[..nt].to_vec(), d: ints[nt..nt + no].to_vec(), g: ints[nt + no..].to_vec() };
    check_vconfig(grid, &k).map_err(FeasibilityError::CertificateInvalid)?;
    Ok(k)
}

pub fn extend_to_concave(grid: &ConvexGrid, sigma: &BoundaryData) -> Result<FeasibilityResult, FeasibilityError> {
    let s = sigma.to_vec(grid)?;
    extend_vec(grid, &s)
}

pub fn extend_vec(grid: &ConvexGrid, sigma: &[Rational]) -> Result<FeasibilityResult, FeasibilityError> {
    let sys = build_system(grid, sigma, None);
    match exactlp::solve(&sys) {
        LpOutcome::Infeasible(raw) => {
            let k = farkas_to_vconfig(grid, &raw)?;
            let violation = sigma_dot_d(sigma, &k);
            if !violation.is_negative() {
                return Err(FeasibilityError::CertificateInvalid(format!("σ·d = {violation} is not negative")));
            }
            Ok(FeasibilityResult::Certificate { k: k.to_sparse(grid), violation })
        }
        outcome => {
            let h = outcome.point().expect("feasible outcome").to_vec();
            debug_assert!(sys.check_point(&h));
            let hc = Cocirculation::from_vec(grid, &h);
            let report = cocirc::is_concave(grid, &hc)?;
            if !report.concave {
                return Err(FeasibilityError::CertificateInvalid("extension is not concave".into()));
            }
            Ok(FeasibilityResult::Extended(hc))
        }
    }
}

/// Whether some cocirculation with border σ has δ_h(τ) ≥ lower[τ] on every
/// normal tandem (in canonical tandem order).
pub fn feasible_with_tandem_bounds(grid: &ConvexGrid, sigma: &[Rational], lower: &[Rational]) -> bool {
    let rhs: Vec<Rational> = lower.iter().map(|l| -l.clone()).collect();
    exactlp::solve(&build_system(grid, sigma, Some(&rhs))).is_feasible()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_parallelogram, build_three_side_grid, Dir, LatticePoint};

    fn e(a: i64, b: i64, d: Dir) -> DirEdge {
        DirEdge::new(LatticePoint::new(a, b), d)
    }

    fn sigma(grid: &ConvexGrid, vals: &[(DirEdge, i64)]) -> Vec<Rational> {
        let mut s = vec![int(0); grid.outer_edges().len()];
        for (edge, v) in vals {
            let i = grid.edge_id(edge).unwrap();
            let k = grid.outer_edges().iter().position(|&x| x == i).unwrap();
            s[k] = int(*v);
        }
        s
    }

    #[test]
    fn zero_border_extends() {
        let g = build_three_side_grid(1).unwrap();
        let r = extend_vec(&g, &sigma(&g, &[])).unwrap();
        assert_eq!(r, FeasibilityResult::Extended(Cocirculation::zero(&g)));
    }

    #[test]
    fn zero_sum_violation_is_certified() {
        let g = build_three_side_grid(1).unwrap();
        let s = sigma(&g, &[(e(0, 0, Dir::One), 1)]);
        match extend_vec(&g, &s).unwrap() {
            FeasibilityResult::Certificate { k, violation } => {
                assert!(violation.is_negative());
                let dense = k.dense(&g).unwrap();
                check_vconfig(&g, &dense).unwrap();
                assert_eq!(sigma_dot_d(&s, &dense), violation);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn horn_violation_on_size_two() {
        // λ = μ = 0, ν = (1, −1) along the ξ₃ side
        let g = build_three_side_grid(2).unwrap();
        let s = sigma(&g, &[(e(2, 2, Dir::Three), 1), (e(1, 1, Dir::Three), -1)]);
        match extend_vec(&g, &s).unwrap() {
            FeasibilityResult::Certificate { k, violation } => {
                assert!(violation.is_negative());
                assert!(k.is_integral());
                check_vconfig(&g, &k.dense(&g).unwrap()).unwrap();
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn parallelogram_border_extends() {
        let g = build_parallelogram(1, 1).unwrap();
        let s = sigma(&g, &[(e(1, 0, Dir::Two), 1), (e(0, 1, Dir::One), 1)]);
        let r = extend_vec(&g, &s).unwrap();
        let FeasibilityResult::Extended(h) = r else { panic!() };
        assert_eq!(cocirc::border(&g, &h).to_vec(&g).unwrap(), s);
    }

    #[test]
    fn theta_configuration_is_valid() {
        for g in [build_three_side_grid(3).unwrap(), build_parallelogram(2, 2).unwrap()] {
            check_vconfig(&g, &theta_configuration(&g)).unwrap();
        }
    }

    #[test]
    fn perturbed_config_fails() {
        let g = build_three_side_grid(2).unwrap();
        let mut k = theta_configuration(&g);
        k.g[0] += int(1);
        assert!(check_vconfig(&g, &k).is_err());
    }

    #[test]
    fn sparse_dense_round_trip() {
        let g = build_three_side_grid(3).unwrap();
        let k = theta_configuration(&g);
        assert_eq!(k.to_sparse(&g).dense(&g).unwrap(), k);
    }
}
