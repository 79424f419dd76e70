//! Deciding extendability from zero-sum, monotonicity and puzzle
//! inequalities, with Horn triples and a cross-check against the LP.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::{Arc, Mutex, OnceLock};

use num_traits::{Signed, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cocirc::{self, BoundaryData, CocircError};
use crate::exactlp::{self, LpOutcome};
use crate::feasibility::{self, FeasibilityError, FeasibilityResult};
use crate::grid::{BoundarySign, ConvexGrid, Dir, DirEdge, LittleTriangle};
use crate::puzzle::{self, Puzzle, PuzzleError};
use crate::rational::{self, frac, int, Rational};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CriterionError {
    #[error(transparent)]
    Puzzle(#[from] PuzzleError),
    #[error(transparent)]
    Domain(#[from] CocircError),
    #[error(transparent)]
    Feasibility(#[from] FeasibilityError),
    #[error("criterion and LP disagree on σ = {sigma}: criterion says {criterion}, LP says {lp}")]
    Disagreement { sigma: String, criterion: String, lp: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CriterionViolation {
    ZeroSum {
        #[serde(with = "rational::serde_rational")]
        value: Rational,
    },
    Monotone {
        e: DirEdge,
        e_prime: DirEdge,
    },
    PuzzleIneq {
        puzzle: usize,
        #[serde(with = "rational::serde_rational")]
        value: Rational,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CriterionReport {
    pub feasible: bool,
    pub violated: Option<CriterionViolation>,
}

/// The enumerated puzzles of one grid with their boundaries.
#[derive(Clone, Debug)]
pub struct PuzzleSet {
    pub puzzles: Vec<Puzzle>,
    pub boundaries: Vec<(BTreeSet<DirEdge>, BTreeSet<DirEdge>)>,
}

impl PuzzleSet {
    pub fn new(grid: &ConvexGrid, cap: usize) -> Result<Self, PuzzleError> {
        let puzzles = puzzle::enumerate_puzzles_with_cap(grid, cap)?;
        let boundaries = puzzles.iter().map(|p| puzzle::boundary(grid, p)).collect();
        Ok(PuzzleSet { puzzles, boundaries })
    }

    /// σ(b⁺) − σ(b⁻) for puzzle `i`.
    pub fn value(&self, i: usize, sigma: &BoundaryData) -> Rational {
        let (plus, minus) = &self.boundaries[i];
        let p = plus.iter().fold(Rational::zero(), |acc, e| acc + sigma.get(e));
        minus.iter().fold(p, |acc, e| acc - sigma.get(e))
    }
}

type Cache = Mutex<BTreeMap<Vec<LittleTriangle>, Arc<PuzzleSet>>>;

/// Puzzle set of `grid`, enumerated once per process and grid.
pub fn cached_puzzles(grid: &ConvexGrid, cap: usize) -> Result<Arc<PuzzleSet>, PuzzleError> {
    static CACHE: OnceLock<Cache> = OnceLock::new();
    let n = grid.triangles().len();
    if n > cap {
        return Err(PuzzleError::GridTooLarge { triangles: n, cap });
    }
    let cache = CACHE.get_or_init(Default::default);
    let mut map = cache.lock().unwrap_or_else(|e| e.into_inner());
    if let Some(s) = map.get(grid.triangles()) {
        return Ok(Arc::clone(s));
    }
    let set = Arc::new(PuzzleSet::new(grid, cap)?);
    map.insert(grid.triangles().to_vec(), Arc::clone(&set));
    Ok(set)
}

pub fn check_border(grid: &ConvexGrid, sigma: &BoundaryData) -> Result<CriterionReport, CriterionError> {
    let set = cached_puzzles(grid, puzzle::default_cap())?;
    check_border_with(grid, &set, sigma)
}

/// Zero-sum, then monotonicity, then every puzzle inequality; stops at the
/// first failure.
pub fn check_border_with(grid: &ConvexGrid, set: &PuzzleSet, sigma: &BoundaryData) -> Result<CriterionReport, CriterionError> {
    sigma.to_vec(grid)?;
    let fail = |v| Ok(CriterionReport { feasible: false, violated: Some(v) });
    let z = cocirc::zero_sum_value(grid, sigma);
    if !z.is_zero() {
        return fail(CriterionViolation::ZeroSum { value: z });
    }
    if let Some(&(e, e_prime)) = cocirc::monotone_violations(grid, sigma).first() {
        return fail(CriterionViolation::Monotone { e, e_prime });
    }
    for i in 0..set.puzzles.len() {
        let v = set.value(i, sigma);
        if v.is_negative() {
            return fail(CriterionViolation::PuzzleIneq { puzzle: i, value: v });
        }
    }
    Ok(CriterionReport { feasible: true, violated: None })
}

/// Runs both deciders. `Ok(true)` when they agree; a disagreement is
/// reported as [`CriterionError::Disagreement`].
pub fn cross_validate(grid: &ConvexGrid, sigma: &BoundaryData) -> Result<bool, CriterionError> {
    let set = cached_puzzles(grid, puzzle::default_cap())?;
    cross_validate_with(grid, &set, sigma).map(|_| true)
}

/// As [`cross_validate`], returning the agreed feasibility.
pub fn cross_validate_with(grid: &ConvexGrid, set: &PuzzleSet, sigma: &BoundaryData) -> Result<bool, CriterionError> {
    let report = check_border_with(grid, set, sigma)?;
    let lp = feasibility::extend_to_concave(grid, sigma)?;
    if report.feasible == lp.is_feasible() {
        return Ok(report.feasible);
    }
    let lp = match lp {
        FeasibilityResult::Extended(h) => format!("extended by {}", serde_json::to_string(&h).unwrap_or_default()),
        FeasibilityResult::Certificate { k, violation } => {
            format!("infeasible, σ·d = {violation}, certificate {}", serde_json::to_string(&k).unwrap_or_default())
        }
    };
    Err(CriterionError::Disagreement {
        sigma: serde_json::to_string(sigma).unwrap_or_default(),
        criterion: serde_json::to_string(&report).unwrap_or_default(),
        lp,
    })
}

// ---------------------------------------------------------------------------
// Horn triples

/// Positions (1-based) of a puzzle's boundary along B₁, B₂, B₃ of a 3-side
/// grid. The inequality reads λ(I) + μ(J) + ν(K) ≥ 0.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct HornTriple {
    #[serde(rename = "I")]
    pub i: BTreeSet<usize>,
    #[serde(rename = "J")]
    pub j: BTreeSet<usize>,
    #[serde(rename = "K")]
    pub k: BTreeSet<usize>,
}

impl HornTriple {
    pub fn is_balanced(&self) -> bool {
        self.i.len() == self.j.len() && self.j.len() == self.k.len()
    }
}

pub fn horn_triple(grid: &ConvexGrid, p: &Puzzle) -> Result<HornTriple, PuzzleError> {
    grid.three_side_size().ok_or(PuzzleError::NotThreeSideGrid)?;
    let (plus, _) = puzzle::boundary(grid, p);
    let positions = |d: Dir| -> BTreeSet<usize> {
        let side = grid.side_path(d, BoundarySign::Plus).expect("3-side grid has all three sides");
        side.edges.iter().enumerate().filter(|(_, &e)| plus.contains(&grid.edge(e))).map(|(i, _)| i + 1).collect()
    };
    Ok(HornTriple { i: positions(Dir::One), j: positions(Dir::Two), k: positions(Dir::Three) })
}

/// Triples of all puzzles of the size-n 3-side grid, each with the index of
/// the first puzzle producing it.
pub fn horn_triples(n: usize, cap: usize) -> Result<BTreeMap<HornTriple, usize>, PuzzleError> {
    let grid = crate::grid::build_three_side_grid(n as i64).map_err(|_| PuzzleError::NotThreeSideGrid)?;
    let set = cached_puzzles(&grid, cap)?;
    let mut out = BTreeMap::new();
    for (idx, p) in set.puzzles.iter().enumerate() {
        out.entry(horn_triple(&grid, p)?).or_insert(idx);
    }
    Ok(out)
}

/// Triples of the puzzles with exactly one F-triangle.
pub fn single_triangle_triples(n: usize, cap: usize) -> Result<BTreeSet<HornTriple>, PuzzleError> {
    let grid = crate::grid::build_three_side_grid(n as i64).map_err(|_| PuzzleError::NotThreeSideGrid)?;
    let set = cached_puzzles(&grid, cap)?;
    set.puzzles.iter().filter(|p| p.triangles.len() == 1).map(|p| horn_triple(&grid, p)).collect()
}

// ---------------------------------------------------------------------------
// Samplers

/// Border of an optimal vertex of {concave h : |h(e)| ≤ 1 on outer edges}
/// for a random integer objective on the outer edges.
pub fn sample_vertex_border<R: Rng + ?Sized>(grid: &ConvexGrid, rng: &mut R) -> Vec<Rational> {
    let mut sys = feasibility::build_system(grid, &[], None);
    let outer = grid.outer_edges();
    for &e in &outer {
        sys.add_le(vec![(e, int(1))], int(1));
        sys.add_le(vec![(e, int(-1))], int(1));
    }
    sys.maximize(outer.iter().map(|&e| (e, int(rng.gen_range(-5..=5)))).collect());
    match exactlp::solve(&sys) {
        LpOutcome::Optimal { point, .. } => outer.iter().map(|&e| point[e].clone()).collect(),
        other => unreachable!("bounded and feasible by construction, got {other:?}"),
    }
}

/// A feasible border: a vertex border, or a positive combination of two.
pub fn sample_feasible<R: Rng + ?Sized>(grid: &ConvexGrid, rng: &mut R) -> Vec<Rational> {
    let a = sample_vertex_border(grid, rng);
    if rng.gen_bool(0.5) {
        return a;
    }
    let b = sample_vertex_border(grid, rng);
    let (s, t) = (int(rng.gen_range(1..=3)), int(rng.gen_range(1..=3)));
    a.iter().zip(&b).map(|(x, y)| x * &s + y * &t).collect()
}

/// A border drawn to sit near or across the boundary of the cone. Some of
/// these are feasible; the LP decides which.
pub fn sample_adversarial<R: Rng + ?Sized>(grid: &ConvexGrid, rng: &mut R) -> Vec<Rational> {
    let outer = grid.outer_edges();
    let m = outer.len();
    let theta = feasibility::theta(grid);
    match rng.gen_range(0..5) {
        0 => {
            // zero-sum preserving transfer between two outer edges
            let mut s = sample_feasible(grid, rng);
            let (i, j) = (rng.gen_range(0..m), rng.gen_range(0..m));
            let x = frac(rng.gen_range(1..=4), 2);
            s[i] += &x;
            s[j] -= &x * &theta[i] * &theta[j];
            s
        }
        1 => {
            let mut s: Vec<Rational> = (0..m).map(|_| int(rng.gen_range(-3..=3))).collect();
            fix_zero_sum(&mut s, &theta);
            s
        }
        2 => {
            let mut s = sample_feasible(grid, rng);
            let i = rng.gen_range(0..m);
            s[i] += int(1);
            s
        }
        3 => {
            let mut s = sample_feasible(grid, rng);
            let i = rng.gen_range(0..m);
            s[i] -= frac(1, 2);
            fix_zero_sum(&mut s, &theta);
            s
        }
        _ => {
            // monotone along every side and zero-sum; only puzzles can object
            let mut s = vec![Rational::zero(); m];
            let pos: BTreeMap<usize, usize> = outer.iter().enumerate().map(|(i, &e)| (e, i)).collect();
            for side in grid.side_paths() {
                let mut v = rng.gen_range(-2..=4);
                for &e in &side.edges {
                    s[pos[&e]] = int(v);
                    v -= rng.gen_range(0..=2);
                }
            }
            fix_zero_sum(&mut s, &theta);
            s
        }
    }
}

/// Shifts E⁺₀ up and E⁻₀ down by the same amount so that σ(E⁺₀) = σ(E⁻₀).
/// Each side moves by a constant, so monotonicity is kept.
fn fix_zero_sum(s: &mut [Rational], theta: &[Rational]) {
    let residual = rational::dot(s, theta);
    let c = -residual / int(s.len() as i64);
    for (x, t) in s.iter_mut().zip(theta) {
        *x += &c * t;
    }
}
