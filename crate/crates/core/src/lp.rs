//! Dense two-phase tableau simplex with Bland's rule.
//!
//! Variable bounds are folded into the standard form: finite lower bounds are
//! shifted out, upper-only bounds reflected, free variables split, and finite
//! upper bounds added as rows.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

const PIVOT_EPS: f64 = 1e-10;
const COST_EPS: f64 = 1e-10;
const MAX_ITERATIONS: usize = 200_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Maximize,
    Minimize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub sense: Sense,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpProblem {
    pub direction: Direction,
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
    /// `(lower, upper)`, either may be infinite. Defaults to `[0, ∞)`.
    pub bounds: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal(LpSolution),
    Infeasible,
    Unbounded,
}

impl LpOutcome {
    pub fn optimal(self) -> Option<LpSolution> {
        match self {
            LpOutcome::Optimal(s) => Some(s),
            _ => None,
        }
    }
}

impl LpProblem {
    pub fn new(direction: Direction, objective: Vec<f64>) -> Self {
        let n = objective.len();
        Self { direction, objective, constraints: Vec::new(), bounds: vec![(0.0, f64::INFINITY); n] }
    }

    pub fn n(&self) -> usize {
        self.objective.len()
    }

    pub fn with_bounds(mut self, lo: f64, hi: f64) -> Self {
        self.bounds.iter_mut().for_each(|b| *b = (lo, hi));
        self
    }

    pub fn set_bounds(&mut self, j: usize, lo: f64, hi: f64) {
        self.bounds[j] = (lo, hi);
    }

    pub fn add_constraint(&mut self, coeffs: Vec<f64>, sense: Sense, rhs: f64) {
        self.constraints.push(Constraint { coeffs, sense, rhs });
    }

    fn check(&self) -> Result<()> {
        let n = self.n();
        if self.bounds.len() != n {
            return Err(Error::MalformedLp(format!("{} bounds for {n} variables", self.bounds.len())));
        }
        if self.objective.iter().any(|c| !c.is_finite()) {
            return Err(Error::MalformedLp("non-finite objective coefficient".into()));
        }
        for (j, &(lo, hi)) in self.bounds.iter().enumerate() {
            if lo.is_nan() || hi.is_nan() || lo > hi || lo == f64::INFINITY || hi == f64::NEG_INFINITY {
                return Err(Error::MalformedLp(format!("inconsistent bounds [{lo}, {hi}] on x_{j}")));
            }
        }
        for (i, c) in self.constraints.iter().enumerate() {
            if c.coeffs.len() != n {
                return Err(Error::MalformedLp(format!("row {i} has {} coefficients, expected {n}", c.coeffs.len())));
            }
            if !c.rhs.is_finite() || c.coeffs.iter().any(|a| !a.is_finite()) {
                return Err(Error::MalformedLp(format!("row {i} has non-finite entries")));
            }
        }
        Ok(())
    }
}

/// How an original variable is recovered from standard-form columns.
#[derive(Clone, Copy)]
enum VarMap {
    Shift { col: usize, lo: f64 },
    Reflect { col: usize, hi: f64 },
    Split { pos: usize, neg: usize },
}

struct Tableau {
    width: usize,
    rows: Vec<Vec<f64>>,
    obj: Vec<f64>,
    basis: Vec<usize>,
    barred: Vec<bool>,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c];
        for v in self.rows[r].iter_mut() {
            *v /= p;
        }
        let pivot_row = core::mem::take(&mut self.rows[r]);
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f != 0.0 {
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
                row[c] = 0.0;
            }
        }
        let f = self.obj[c];
        if f != 0.0 {
            for (v, pv) in self.obj.iter_mut().zip(&pivot_row) {
                *v -= f * pv;
            }
            self.obj[c] = 0.0;
        }
        self.rows[r] = pivot_row;
        self.basis[r] = c;
    }

    /// Maximizes with the current `obj` row (reduced costs, `−z` last).
    fn run(&mut self) -> Result<bool> {
        for _ in 0..MAX_ITERATIONS {
            let Some(c) = (0..self.width).find(|&j| !self.barred[j] && self.obj[j] > COST_EPS) else {
                return Ok(true);
            };
            let mut best: Option<(usize, f64)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                let a = row[c];
                if a > PIVOT_EPS {
                    let ratio = row[self.width] / a;
                    best = match best {
                        None => Some((i, ratio)),
                        Some((bi, br)) => {
                            let tie = (ratio - br).abs() <= 1e-12 * (1.0 + br.abs());
                            if ratio < br && !tie || tie && self.basis[i] < self.basis[bi] {
                                Some((i, ratio))
                            } else {
                                Some((bi, br))
                            }
                        }
                    };
                }
            }
            match best {
                None => return Ok(false),
                Some((r, _)) => self.pivot(r, c),
            }
        }
        Err(Error::MalformedLp("simplex iteration limit reached".into()))
    }

    fn set_objective(&mut self, cost: &[f64]) {
        let mut obj = cost.to_vec();
        obj.push(0.0);
        for (row, &b) in self.rows.iter().zip(&self.basis) {
            let cb = cost[b];
            if cb != 0.0 {
                for (o, v) in obj.iter_mut().zip(row) {
                    *o -= cb * v;
                }
            }
        }
        self.obj = obj;
    }

    fn value(&self, col: usize) -> f64 {
        self.basis.iter().position(|&b| b == col).map_or(0.0, |r| self.rows[r][self.width])
    }
}

pub fn solve_lp(problem: &LpProblem) -> Result<LpOutcome> {
    problem.check()?;
    let n = problem.n();

    // standard-form columns for the structural variables
    let mut maps = Vec::with_capacity(n);
    let mut ncols = 0;
    let mut upper_rows: Vec<(usize, f64)> = Vec::new();
    for &(lo, hi) in &problem.bounds {
        if lo.is_finite() {
            maps.push(VarMap::Shift { col: ncols, lo });
            if hi.is_finite() {
                upper_rows.push((ncols, hi - lo));
            }
            ncols += 1;
        } else if hi.is_finite() {
            maps.push(VarMap::Reflect { col: ncols, hi });
            ncols += 1;
        } else {
            maps.push(VarMap::Split { pos: ncols, neg: ncols + 1 });
            ncols += 2;
        }
    }

    // rows in standard-column space: (coeffs, sense, rhs)
    let mut rows: Vec<(Vec<f64>, Sense, f64)> = Vec::new();
    for c in &problem.constraints {
        let mut a = vec![0.0; ncols];
        let mut rhs = c.rhs;
        for (j, &coef) in c.coeffs.iter().enumerate() {
            match maps[j] {
                VarMap::Shift { col, lo } => {
                    a[col] += coef;
                    rhs -= coef * lo;
                }
                VarMap::Reflect { col, hi } => {
                    a[col] -= coef;
                    rhs -= coef * hi;
                }
                VarMap::Split { pos, neg } => {
                    a[pos] += coef;
                    a[neg] -= coef;
                }
            }
        }
        rows.push((a, c.sense, rhs));
    }
    for (col, ub) in upper_rows {
        let mut a = vec![0.0; ncols];
        a[col] = 1.0;
        rows.push((a, Sense::Le, ub));
    }
    for r in rows.iter_mut() {
        if r.2 < 0.0 {
            r.0.iter_mut().for_each(|v| *v = -*v);
            r.2 = -r.2;
            r.1 = match r.1 {
                Sense::Le => Sense::Ge,
                Sense::Ge => Sense::Le,
                Sense::Eq => Sense::Eq,
            };
        }
    }

    let n_slack = rows.iter().filter(|r| r.1 != Sense::Eq).count();
    let n_art = rows.iter().filter(|r| r.1 != Sense::Le).count();
    let width = ncols + n_slack + n_art;
    let art_start = ncols + n_slack;
    let mut t = Tableau {
        width,
        rows: Vec::with_capacity(rows.len()),
        obj: Vec::new(),
        basis: Vec::with_capacity(rows.len()),
        barred: vec![false; width],
    };
    let (mut s, mut art) = (ncols, art_start);
    for (a, sense, rhs) in rows {
        let mut row = a;
        row.resize(width + 1, 0.0);
        row[width] = rhs;
        match sense {
            Sense::Le => {
                row[s] = 1.0;
                t.basis.push(s);
                s += 1;
            }
            Sense::Ge => {
                row[s] = -1.0;
                s += 1;
                row[art] = 1.0;
                t.basis.push(art);
                art += 1;
            }
            Sense::Eq => {
                row[art] = 1.0;
                t.basis.push(art);
                art += 1;
            }
        }
        t.rows.push(row);
    }

    if n_art > 0 {
        let mut phase1 = vec![0.0; width];
        phase1[art_start..].iter_mut().for_each(|v| *v = -1.0);
        t.set_objective(&phase1);
        t.run()?;
        let infeas = t.obj[width];
        let scale = 1.0 + t.rows.iter().map(|r| r[width].abs()).fold(0.0, f64::max);
        if infeas > 1e-9 * scale {
            return Ok(LpOutcome::Infeasible);
        }
        for j in art_start..width {
            t.barred[j] = true;
        }
        for r in 0..t.rows.len() {
            if t.basis[r] >= art_start {
                if let Some(c) = (0..art_start).find(|&j| t.rows[r][j].abs() > 1e-9) {
                    t.pivot(r, c);
                }
            }
        }
    }

    let sign = match problem.direction {
        Direction::Maximize => 1.0,
        Direction::Minimize => -1.0,
    };
    let mut cost = vec![0.0; width];
    for (j, &c) in problem.objective.iter().enumerate() {
        let c = sign * c;
        match maps[j] {
            VarMap::Shift { col, .. } => cost[col] += c,
            VarMap::Reflect { col, .. } => cost[col] -= c,
            VarMap::Split { pos, neg } => {
                cost[pos] += c;
                cost[neg] -= c;
            }
        }
    }
    t.set_objective(&cost);
    if !t.run()? {
        return Ok(LpOutcome::Unbounded);
    }

    let x: Vec<f64> = maps
        .iter()
        .map(|m| match *m {
            VarMap::Shift { col, lo } => lo + t.value(col),
            VarMap::Reflect { col, hi } => hi - t.value(col),
            VarMap::Split { pos, neg } => t.value(pos) - t.value(neg),
        })
        .collect();
    let objective = problem.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
    Ok(LpOutcome::Optimal(LpSolution { x, objective }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bounded_max() {
        let mut lp = LpProblem::new(Direction::Maximize, vec![1.0]);
        lp.add_constraint(vec![1.0], Sense::Le, 3.0);
        let s = solve_lp(&lp).unwrap().optimal().unwrap();
        assert!((s.x[0] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn unbounded_and_infeasible() {
        let lp = LpProblem::new(Direction::Maximize, vec![1.0]);
        assert_eq!(solve_lp(&lp).unwrap(), LpOutcome::Unbounded);
        let mut lp = LpProblem::new(Direction::Minimize, vec![1.0]);
        lp.add_constraint(vec![1.0], Sense::Ge, 2.0);
        lp.add_constraint(vec![1.0], Sense::Le, 1.0);
        assert_eq!(solve_lp(&lp).unwrap(), LpOutcome::Infeasible);
    }

    #[test]
    fn free_and_reflected_variables() {
        // min x + y, x ∈ (−∞, ∞), y ≤ 4, x − y ≥ −10, x + 2y ≥ −3
        let mut lp = LpProblem::new(Direction::Minimize, vec![1.0, 1.0]);
        lp.set_bounds(0, f64::NEG_INFINITY, f64::INFINITY);
        lp.set_bounds(1, f64::NEG_INFINITY, 4.0);
        lp.add_constraint(vec![1.0, -1.0], Sense::Ge, -10.0);
        lp.add_constraint(vec![1.0, 2.0], Sense::Ge, -3.0);
        let s = solve_lp(&lp).unwrap().optimal().unwrap();
        // vertex x − y = −10, x + 2y = −3 → y = 7/3, x = −23/3
        assert!((s.x[0] + 23.0 / 3.0).abs() < 1e-9);
        assert!((s.x[1] - 7.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn equality_and_box() {
        let mut lp = LpProblem::new(Direction::Maximize, vec![2.0, 1.0, -1.0]).with_bounds(-1.0, 1.0);
        lp.add_constraint(vec![1.0, 1.0, 1.0], Sense::Eq, 0.5);
        let s = solve_lp(&lp).unwrap().optimal().unwrap();
        assert!((s.objective - 3.5).abs() < 1e-9, "{s:?}");
    }

    #[test]
    fn malformed_is_error() {
        let mut lp = LpProblem::new(Direction::Maximize, vec![1.0, 1.0]);
        lp.add_constraint(vec![1.0], Sense::Le, 1.0);
        assert!(solve_lp(&lp).is_err());
        let mut lp = LpProblem::new(Direction::Maximize, vec![1.0]);
        lp.set_bounds(0, 2.0, 1.0);
        assert!(solve_lp(&lp).is_err());
    }
}
