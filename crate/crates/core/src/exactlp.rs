//! Exact two-phase simplex over the rationals.
//!
//! All variables are free. Every outcome carries a certificate that can be
//! re-checked against the original system with [`LinearSystem::check_point`],
//! [`LinearSystem::check_farkas`] and [`LinearSystem::check_ray`].

use num_traits::{One, Signed, Zero};

use crate::rational::Rational;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Constraint {
    /// Sparse coefficients; repeated indices are summed.
    pub coeffs: Vec<(usize, Rational)>,
    pub rhs: Rational,
}

impl Constraint {
    pub fn new(coeffs: Vec<(usize, Rational)>, rhs: Rational) -> Self {
        Constraint { coeffs, rhs }
    }

    pub fn eval(&self, x: &[Rational]) -> Rational {
        self.coeffs.iter().fold(Rational::zero(), |acc, (i, c)| acc + c * &x[*i])
    }
}

/// `eq` rows are `a·x = b`, `le` rows are `a·x ≤ b`; the optional objective
/// is maximized.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LinearSystem {
    pub num_vars: usize,
    pub eq: Vec<Constraint>,
    pub le: Vec<Constraint>,
    pub objective: Option<Vec<(usize, Rational)>>,
}

/// Multipliers proving infeasibility: free on `eq`, nonnegative on `le`,
/// combining the rows into `0·x ≤ c` with `c < 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Farkas {
    pub eq: Vec<Rational>,
    pub le: Vec<Rational>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LpOutcome {
    Feasible(Vec<Rational>),
    Optimal { point: Vec<Rational>, value: Rational },
    Unbounded { point: Vec<Rational>, ray: Vec<Rational> },
    Infeasible(Farkas),
}

impl LpOutcome {
    pub fn point(&self) -> Option<&[Rational]> {
        match self {
            LpOutcome::Feasible(p) | LpOutcome::Optimal { point: p, .. } | LpOutcome::Unbounded { point: p, .. } => {
                Some(p)
            }
            LpOutcome::Infeasible(_) => None,
        }
    }

    pub fn is_feasible(&self) -> bool {
        self.point().is_some()
    }
}

impl LinearSystem {
    pub fn new(num_vars: usize) -> Self {
        LinearSystem { num_vars, ..Default::default() }
    }

    pub fn add_eq(&mut self, coeffs: Vec<(usize, Rational)>, rhs: Rational) -> usize {
        self.eq.push(Constraint::new(coeffs, rhs));
        self.eq.len() - 1
    }

    pub fn add_le(&mut self, coeffs: Vec<(usize, Rational)>, rhs: Rational) -> usize {
        self.le.push(Constraint::new(coeffs, rhs));
        self.le.len() - 1
    }

    pub fn maximize(&mut self, coeffs: Vec<(usize, Rational)>) {
        self.objective = Some(coeffs);
    }

    pub fn objective_value(&self, x: &[Rational]) -> Rational {
        match &self.objective {
            Some(c) => c.iter().fold(Rational::zero(), |acc, (i, v)| acc + v * &x[*i]),
            None => Rational::zero(),
        }
    }

    pub fn check_point(&self, x: &[Rational]) -> bool {
        x.len() == self.num_vars
            && self.eq.iter().all(|c| c.eval(x) == c.rhs)
            && self.le.iter().all(|c| c.eval(x) <= c.rhs)
    }

    pub fn check_farkas(&self, f: &Farkas) -> bool {
        if f.eq.len() != self.eq.len() || f.le.len() != self.le.len() {
            return false;
        }
        if f.le.iter().any(Signed::is_negative) {
            return false;
        }
        let mut combined = vec![Rational::zero(); self.num_vars];
        let mut rhs = Rational::zero();
        for (y, c) in f.eq.iter().zip(&self.eq).chain(f.le.iter().zip(&self.le)) {
            if y.is_zero() {
                continue;
            }
            for (i, a) in &c.coeffs {
                combined[*i] += y * a;
            }
            rhs += y * &c.rhs;
        }
        combined.iter().all(Zero::is_zero) && rhs.is_negative()
    }

    /// A recession direction that strictly improves the objective.
    pub fn check_ray(&self, d: &[Rational]) -> bool {
        d.len() == self.num_vars
            && self.eq.iter().all(|c| c.eval(d).is_zero())
            && self.le.iter().all(|c| !c.eval(d).is_positive())
            && self.objective_value(d).is_positive()
    }
}

struct Tableau {
    rows: Vec<Vec<Rational>>,
    basis: Vec<usize>,
    /// Reduced costs `c_B·B⁻¹·A_j − c_j`; last entry is the objective value.
    obj: Vec<Rational>,
    ncols: usize,
    banned: Vec<bool>,
}

enum Step {
    Optimal,
    Unbounded(usize),
    Pivoted,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let inv = Rational::one() / &self.rows[r][c];
        let nz: Vec<usize> = (0..=self.ncols).filter(|&j| !self.rows[r][j].is_zero()).collect();
        for &j in &nz {
            self.rows[r][j] *= &inv;
        }
        let prow: Vec<(usize, Rational)> = nz.iter().map(|&j| (j, self.rows[r][j].clone())).collect();
        let eliminate = |row: &mut Vec<Rational>| {
            if row[c].is_zero() {
                return;
            }
            let f = row[c].clone();
            for (j, v) in &prow {
                row[*j] -= &f * v;
            }
        };
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i != r {
                eliminate(row);
            }
        }
        eliminate(&mut self.obj);
        self.basis[r] = c;
    }

    /// One Bland's-rule step.
    fn step(&mut self) -> Step {
        let Some(c) = (0..self.ncols).find(|&j| !self.banned[j] && self.obj[j].is_negative()) else {
            return Step::Optimal;
        };
        let mut best: Option<(usize, Rational)> = None;
        for (i, row) in self.rows.iter().enumerate() {
            if !row[c].is_positive() {
                continue;
            }
            let ratio = &row[self.ncols] / &row[c];
            let better = match &best {
                None => true,
                Some((bi, br)) => ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi]),
            };
            if better {
                best = Some((i, ratio));
            }
        }
        match best {
            None => Step::Unbounded(c),
            Some((r, _)) => {
                self.pivot(r, c);
                Step::Pivoted
            }
        }
    }

    fn run(&mut self) -> Option<usize> {
        loop {
            match self.step() {
                Step::Optimal => return None,
                Step::Unbounded(c) => return Some(c),
                Step::Pivoted => {}
            }
        }
    }

    fn set_objective(&mut self, c: &[Rational]) {
        let mut obj: Vec<Rational> = (0..=self.ncols)
            .map(|j| if j < self.ncols { -c[j].clone() } else { Rational::zero() })
            .collect();
        for (row, &b) in self.rows.iter().zip(&self.basis) {
            if c[b].is_zero() {
                continue;
            }
            for (o, v) in obj.iter_mut().zip(row) {
                if !v.is_zero() {
                    *o += &c[b] * v;
                }
            }
        }
        self.obj = obj;
    }

    fn column_values(&self) -> Vec<Rational> {
        let mut v = vec![Rational::zero(); self.ncols];
        for (row, &b) in self.rows.iter().zip(&self.basis) {
            v[b] = row[self.ncols].clone();
        }
        v
    }
}

pub fn solve(sys: &LinearSystem) -> LpOutcome {
    let n = sys.num_vars;
    let neq = sys.eq.len();
    let nle = sys.le.len();
    let m = neq + nle;
    let slack0 = 2 * n;
    let art0 = slack0 + nle;

    // Row i: a·x⁺ − a·x⁻ (+ s) = b, negated when b < 0 so the rhs is
    // nonnegative. Rows whose slack is a +1 identity column start basic in
    // it; the others get an artificial.
    let mut rows = Vec::with_capacity(m);
    let mut sign = Vec::with_capacity(m);
    let mut needs_art = Vec::with_capacity(m);
    for (k, c) in sys.eq.iter().chain(&sys.le).enumerate() {
        let neg = c.rhs.is_negative();
        let s = if neg { -Rational::one() } else { Rational::one() };
        let mut row = vec![Rational::zero(); art0 + 1];
        for (i, a) in &c.coeffs {
            assert!(*i < n, "variable index {i} out of range");
            row[*i] += a * &s;
            row[n + *i] -= a * &s;
        }
        if k >= neq {
            row[slack0 + k - neq] = s.clone();
        }
        row[art0] = &c.rhs * &s;
        needs_art.push(k < neq || neg);
        sign.push(s);
        rows.push(row);
    }
    let art_rows: Vec<usize> = (0..m).filter(|&i| needs_art[i]).collect();
    let ncols = art0 + art_rows.len();
    let mut identity_col = vec![0; m];
    let mut basis = vec![0; m];
    for (i, row) in rows.iter_mut().enumerate() {
        let rhs = row.pop().unwrap();
        row.resize(ncols, Rational::zero());
        row.push(rhs);
        if !needs_art[i] {
            identity_col[i] = slack0 + i - neq;
            basis[i] = identity_col[i];
        }
    }
    for (k, &i) in art_rows.iter().enumerate() {
        rows[i][art0 + k] = Rational::one();
        identity_col[i] = art0 + k;
        basis[i] = art0 + k;
    }

    let mut t = Tableau { rows, basis, obj: Vec::new(), ncols, banned: vec![false; ncols] };

    if !art_rows.is_empty() {
        let c1: Vec<Rational> =
            (0..ncols).map(|j| if j >= art0 { -Rational::one() } else { Rational::zero() }).collect();
        t.set_objective(&c1);
        let unbounded = t.run();
        debug_assert!(unbounded.is_none(), "phase I is bounded");
        if t.obj[ncols].is_negative() {
            // y_i = r_col + c_col on the row's identity column; undo the
            // row negation to get multipliers for the original rows.
            let y: Vec<Rational> = (0..m)
                .map(|i| {
                    let col = identity_col[i];
                    let y = &t.obj[col] + &c1[col];
                    y * &sign[i]
                })
                .collect();
            let farkas = Farkas { eq: y[..neq].to_vec(), le: y[neq..].to_vec() };
            debug_assert!(sys.check_farkas(&farkas));
            return LpOutcome::Infeasible(farkas);
        }
        // Drive remaining (zero-valued) artificials out of the basis and
        // drop rows that turn out redundant.
        let mut i = 0;
        while i < t.rows.len() {
            if t.basis[i] >= art0 {
                match (0..art0).find(|&j| !t.rows[i][j].is_zero()) {
                    Some(j) => t.pivot(i, j),
                    None => {
                        t.rows.remove(i);
                        t.basis.remove(i);
                        continue;
                    }
                }
            }
            i += 1;
        }
        for j in art0..ncols {
            t.banned[j] = true;
        }
    }

    let point_of = |t: &Tableau| -> Vec<Rational> {
        let v = t.column_values();
        (0..n).map(|j| &v[j] - &v[n + j]).collect()
    };

    let Some(objective) = &sys.objective else {
        return LpOutcome::Feasible(point_of(&t));
    };
    let mut c2 = vec![Rational::zero(); ncols];
    for (i, v) in objective {
        c2[*i] += v;
        c2[n + *i] -= v;
    }
    t.set_objective(&c2);
    match t.run() {
        None => {
            let point = point_of(&t);
            let value = sys.objective_value(&point);
            LpOutcome::Optimal { point, value }
        }
        Some(c) => {
            let mut dir = vec![Rational::zero(); ncols];
            dir[c] = Rational::one();
            for (row, &b) in t.rows.iter().zip(&t.basis) {
                dir[b] = -row[c].clone();
            }
            let ray = (0..n).map(|j| &dir[j] - &dir[n + j]).collect();
            LpOutcome::Unbounded { point: point_of(&t), ray }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{frac, int};

    fn row(v: &[(usize, i64)]) -> Vec<(usize, Rational)> {
        v.iter().map(|&(i, c)| (i, int(c))).collect()
    }

    #[test]
    fn single_equation() {
        let mut s = LinearSystem::new(1);
        s.add_eq(row(&[(0, 1)]), int(1));
        assert_eq!(solve(&s), LpOutcome::Feasible(vec![int(1)]));
    }

    #[test]
    fn contradictory_bounds() {
        let mut s = LinearSystem::new(1);
        s.add_le(row(&[(0, 1)]), int(0));
        s.add_le(row(&[(0, -1)]), int(-1));
        match solve(&s) {
            LpOutcome::Infeasible(f) => {
                assert!(s.check_farkas(&f));
                assert_eq!(f.le, vec![int(1), int(1)]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn bounded_and_unbounded_maximization() {
        let mut s = LinearSystem::new(1);
        s.add_le(row(&[(0, 1)]), int(0));
        s.maximize(row(&[(0, 1)]));
        assert_eq!(solve(&s), LpOutcome::Optimal { point: vec![int(0)], value: int(0) });

        let mut s = LinearSystem::new(1);
        s.maximize(row(&[(0, 1)]));
        match solve(&s) {
            LpOutcome::Unbounded { ray, .. } => {
                assert_eq!(ray, vec![int(1)]);
                assert!(s.check_ray(&ray));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn negative_free_variable() {
        // maximize −x − y s.t. x + y ≥ −3/2, x − y = 1/2
        let mut s = LinearSystem::new(2);
        s.add_le(row(&[(0, -1), (1, -1)]), frac(3, 2));
        s.add_eq(row(&[(0, 1), (1, -1)]), frac(1, 2));
        s.maximize(row(&[(0, -1), (1, -1)]));
        match solve(&s) {
            LpOutcome::Optimal { point, value } => {
                assert!(s.check_point(&point));
                assert_eq!(value, frac(3, 2));
                assert_eq!(point, vec![frac(-1, 2), int(-1)]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn redundant_equalities() {
        let mut s = LinearSystem::new(2);
        s.add_eq(row(&[(0, 1), (1, 1)]), int(2));
        s.add_eq(row(&[(0, 2), (1, 2)]), int(4));
        s.add_le(row(&[(0, 1)]), int(5));
        s.maximize(row(&[(1, 1), (0, 0)]));
        match solve(&s) {
            LpOutcome::Unbounded { point, ray } => {
                assert!(s.check_point(&point));
                assert!(s.check_ray(&ray));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn inconsistent_equalities() {
        let mut s = LinearSystem::new(2);
        s.add_eq(row(&[(0, 1), (1, 1)]), int(1));
        s.add_eq(row(&[(0, 1), (1, 1)]), int(2));
        match solve(&s) {
            LpOutcome::Infeasible(f) => assert!(s.check_farkas(&f)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn degenerate_cycling_example() {
        // Beale's classic cycling instance; Bland's rule must terminate.
        let mut s = LinearSystem::new(4);
        s.add_le(vec![(0, frac(1, 4)), (1, int(-60)), (2, frac(-1, 25)), (3, int(9))], int(0));
        s.add_le(vec![(0, frac(1, 2)), (1, int(-90)), (2, frac(-1, 50)), (3, int(3))], int(0));
        s.add_le(row(&[(2, 1)]), int(1));
        for i in 0..4 {
            s.add_le(row(&[(i, -1)]), int(0));
        }
        s.maximize(vec![(0, frac(3, 4)), (1, int(-150)), (2, frac(1, 50)), (3, int(-6))]);
        match solve(&s) {
            LpOutcome::Optimal { point, value } => {
                assert!(s.check_point(&point));
                assert_eq!(value, frac(1, 20));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn deterministic() {
        let mut s = LinearSystem::new(3);
        s.add_le(row(&[(0, 1), (1, 2)]), int(4));
        s.add_le(row(&[(1, 1), (2, -1)]), int(1));
        s.add_le(row(&[(0, -1)]), int(0));
        s.add_le(row(&[(2, 1)]), int(3));
        s.maximize(row(&[(0, 1), (1, 1), (2, 1)]));
        assert_eq!(solve(&s), solve(&s));
    }
}
