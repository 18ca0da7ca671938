//! Table-form instances: a finite list of actions with costs and outcome pmfs.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::ccdf::CcdfInstance;
use crate::error::{CdfpViolation, Error, FosdViolation, Result};
use crate::model::{Distribution, OutcomeSpace};
use crate::pwl::{upper_hull_indices, PiecewiseLinearFn};
use crate::TOL;

#[derive(Debug, Clone, PartialEq)]
pub struct Action {
    pub cost: f64,
    pub dist: Distribution,
}

impl Action {
    pub fn new(cost: f64, dist: Distribution) -> Self {
        Self { cost, dist }
    }

    pub fn null(m: usize) -> Self {
        Self { cost: 0.0, dist: Distribution::point_mass(m, 0) }
    }

    pub fn is_null(&self) -> bool {
        self.cost == 0.0 && (self.dist.pmf()[0] - 1.0).abs() <= TOL
    }

    /// Expected principal value `Σ f(ω) v_ω`.
    pub fn expected_value(&self, outcomes: &OutcomeSpace) -> f64 {
        self.dist.expect(outcomes.values())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    PmfLength { action: usize, len: usize, m: usize },
    PmfNegative { action: usize, omega: usize, value: f64 },
    PmfSum { action: usize, sum: f64 },
    CostOutOfRange { action: usize, cost: f64 },
    MissingNullAction,
    NoActions,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::PmfLength { action, len, m } => {
                write!(f, "pmf length at action {action}: {len} entries, expected {m}")
            }
            Violation::PmfNegative { action, omega, value } => {
                write!(f, "pmf negative at action {action}: f({omega}) = {value}")
            }
            Violation::PmfSum { action, sum } => write!(f, "pmf sum at action {action}: {sum}"),
            Violation::CostOutOfRange { action, cost } => {
                write!(f, "cost out of range at action {action}: {cost} not in [0, 1]")
            }
            Violation::MissingNullAction => write!(f, "null action missing (cost 0, point mass at outcome 0)"),
            Violation::NoActions => write!(f, "no actions"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return write!(f, "ok");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FiniteInstance {
    outcomes: OutcomeSpace,
    actions: Vec<Action>,
}

impl FiniteInstance {
    /// Validated constructor. Actions with identical cost and distribution
    /// are collapsed to their first occurrence.
    pub fn new(outcomes: OutcomeSpace, actions: Vec<Action>) -> Result<Self> {
        let inst = Self::new_unchecked(outcomes, actions);
        let report = inst.validate();
        if !report.is_ok() {
            return Err(Error::InvalidInstance(format!("{report}")));
        }
        Ok(inst.deduplicated())
    }

    /// Keeps the actions as given. Used for empirical instances and for
    /// reporting violations of raw input.
    pub fn new_unchecked(outcomes: OutcomeSpace, actions: Vec<Action>) -> Self {
        Self { outcomes, actions }
    }

    /// Prepends the null action unless one is already present.
    pub fn with_null_action(mut self) -> Self {
        if !self.actions.iter().any(Action::is_null) {
            self.actions.insert(0, Action::null(self.outcomes.m()));
        }
        self
    }

    pub fn outcomes(&self) -> &OutcomeSpace {
        &self.outcomes
    }

    pub fn actions(&self) -> &[Action] {
        &self.actions
    }

    pub fn m(&self) -> usize {
        self.outcomes.m()
    }

    pub fn n(&self) -> usize {
        self.actions.len()
    }

    pub fn costs(&self) -> Vec<f64> {
        self.actions.iter().map(|a| a.cost).collect()
    }

    pub fn validate(&self) -> ValidationReport {
        let m = self.m();
        let mut violations = Vec::new();
        if self.actions.is_empty() {
            violations.push(Violation::NoActions);
        }
        for (i, a) in self.actions.iter().enumerate() {
            if !a.cost.is_finite() || a.cost < 0.0 || a.cost > 1.0 {
                violations.push(Violation::CostOutOfRange { action: i, cost: a.cost });
            }
            let pmf = a.dist.pmf();
            if pmf.len() != m {
                violations.push(Violation::PmfLength { action: i, len: pmf.len(), m });
                continue;
            }
            for (w, &p) in pmf.iter().enumerate() {
                if !p.is_finite() || p < -TOL {
                    violations.push(Violation::PmfNegative { action: i, omega: w, value: p });
                }
            }
            let sum: f64 = pmf.iter().sum();
            if (sum - 1.0).abs() > TOL {
                violations.push(Violation::PmfSum { action: i, sum });
            }
        }
        if !self.actions.iter().any(Action::is_null) {
            violations.push(Violation::MissingNullAction);
        }
        ValidationReport { violations }
    }

    fn deduplicated(self) -> Self {
        let mut kept: Vec<Action> = Vec::with_capacity(self.actions.len());
        for a in self.actions {
            let dup = kept
                .iter()
                .any(|k| k.cost == a.cost && k.dist.pmf().iter().zip(a.dist.pmf()).all(|(x, y)| (x - y).abs() <= TOL));
            if !dup {
                kept.push(a);
            }
        }
        Self { outcomes: self.outcomes, actions: kept }
    }

    /// Action indices sorted by cost (stable).
    pub(crate) fn cost_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.n()).collect();
        order.sort_by(|&a, &b| self.actions[a].cost.total_cmp(&self.actions[b].cost));
        order
    }

    /// First-order stochastic dominance between every pair ordered by cost.
    pub fn check_fosd(&self) -> core::result::Result<(), FosdViolation> {
        let ccdfs: Vec<Vec<f64>> = self.actions.iter().map(|a| a.dist.ccdf()).collect();
        for (i, ai) in self.actions.iter().enumerate() {
            for (j, aj) in self.actions.iter().enumerate() {
                if i == j || ai.cost < aj.cost {
                    continue;
                }
                if let Some(w) = (0..self.m()).find(|&w| ccdfs[i][w] < ccdfs[j][w] - TOL) {
                    return Err(FosdViolation { costlier: i, dominated: j, omega: w });
                }
            }
        }
        Ok(())
    }

    /// For every ω, the points `(c_a, F(ω|c_a))` lie on their upper concave
    /// hull. Assumes FOSD (equal costs carry equal distributions).
    pub fn check_cdfp(&self) -> core::result::Result<(), CdfpViolation> {
        let order = self.distinct_cost_order();
        if order.len() < 3 {
            return Ok(());
        }
        let ccdfs: Vec<Vec<f64>> = order.iter().map(|&a| self.actions[a].dist.ccdf()).collect();
        for w in 1..self.m() {
            let pts: Vec<(f64, f64)> = order.iter().zip(&ccdfs).map(|(&a, f)| (self.actions[a].cost, f[w])).collect();
            let hull = upper_hull_indices(&pts);
            for k in 0..pts.len() {
                // hull segment containing pts[k]
                let pos = hull.partition_point(|&h| pts[h].0 <= pts[k].0);
                if pos == 0 || pos >= hull.len() || hull[pos - 1] == k {
                    continue;
                }
                let (l, r) = (hull[pos - 1], hull[pos]);
                let (x0, y0) = pts[l];
                let (x1, y1) = pts[r];
                let chord = y0 + (y1 - y0) * (pts[k].0 - x0) / (x1 - x0);
                if pts[k].1 < chord - TOL {
                    return Err(CdfpViolation { omega: w, triple: (order[l], order[k], order[r]) });
                }
            }
        }
        Ok(())
    }

    /// One representative per distinct cost, ascending.
    fn distinct_cost_order(&self) -> Vec<usize> {
        let mut order = self.cost_order();
        order.dedup_by(|b, a| self.actions[*a].cost == self.actions[*b].cost);
        order
    }

    /// Piecewise-linear interpolation of each `F(ω|·)` through the action
    /// costs, extended flat from the largest cost to 1.
    pub fn to_ccdf_instance(&self) -> Result<CcdfInstance> {
        self.check_fosd()?;
        self.check_cdfp()?;
        let order = self.distinct_cost_order();
        if order.is_empty() || self.actions[order[0]].cost != 0.0 {
            return Err(Error::InvalidInstance("no zero-cost action to anchor F(ω|0)".into()));
        }
        let cost_max = self.actions[*order.last().unwrap_or(&order[0])].cost;
        let ccdfs: Vec<Vec<f64>> = order.iter().map(|&a| self.actions[a].dist.ccdf()).collect();
        let mut fns = Vec::with_capacity(self.m() - 1);
        for w in 1..self.m() {
            let mut pts: Vec<(f64, f64)> =
                order.iter().zip(&ccdfs).map(|(&a, f)| (self.actions[a].cost, f[w].clamp(0.0, 1.0))).collect();
            let last = pts[pts.len() - 1];
            if last.0 < 1.0 {
                pts.push((1.0, last.1));
            }
            fns.push(PiecewiseLinearFn::new(pts)?);
        }
        CcdfInstance::new(self.outcomes.clone(), fns, cost_max)
    }

    /// Smallest nonzero outcome probability across all actions.
    pub fn eta(&self) -> Option<f64> {
        self.actions.iter().flat_map(|a| a.dist.pmf().iter().copied()).filter(|&p| p > 0.0).min_by(f64::total_cmp)
    }

    pub fn describe(&self) -> String {
        format!("FiniteInstance(m={}, n={})", self.m(), self.n())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    pub(crate) fn figure_instance() -> FiniteInstance {
        let rows =
            [(0.2, [0.1, 0.05, 0.05]), (0.4, [0.15, 0.1, 0.1]), (0.6, [0.19, 0.11, 0.15]), (0.8, [0.18, 0.15, 0.17])];
        let mut actions = vec![Action::null(4)];
        for (c, f) in rows {
            let f0 = 1.0 - f.iter().sum::<f64>();
            actions.push(Action::new(c, Distribution::new(vec![f0, f[0], f[1], f[2]]).unwrap()));
        }
        FiniteInstance::new(OutcomeSpace::new(vec![0.0, 0.3, 0.6, 1.0]).unwrap(), actions).unwrap()
    }

    #[test]
    fn figure_instance_is_valid_fosd_cdfp() {
        let inst = figure_instance();
        assert!(inst.validate().is_ok());
        assert_eq!(inst.check_fosd(), Ok(()));
        assert_eq!(inst.check_cdfp(), Ok(()));
        let f1: Vec<f64> = inst.actions().iter().map(|a| a.dist.ccdf()[1]).collect();
        let expect = [0.0, 0.2, 0.35, 0.45, 0.5];
        for (a, b) in f1.iter().zip(expect) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn pmf_sum_and_missing_null_are_reported() {
        let os = OutcomeSpace::new(vec![0.0, 1.0]).unwrap();
        let bad = FiniteInstance::new_unchecked(
            os.clone(),
            vec![Action::null(2), Action::new(0.5, Distribution::from_pmf_unchecked(vec![0.4, 0.5]))],
        );
        let report = bad.validate();
        assert_eq!(report.violations, vec![Violation::PmfSum { action: 1, sum: 0.9 }]);
        assert!(format!("{report}").contains("pmf sum"));

        let no_null =
            FiniteInstance::new_unchecked(os, vec![Action::new(0.5, Distribution::new(vec![0.4, 0.6]).unwrap())]);
        assert_eq!(no_null.validate().violations, vec![Violation::MissingNullAction]);
        assert!(FiniteInstance::new(no_null.outcomes.clone(), no_null.actions.clone()).is_err());
        assert!(no_null.with_null_action().validate().is_ok());
    }

    #[test]
    fn cost_above_one_is_rejected() {
        let os = OutcomeSpace::new(vec![0.0, 1.0]).unwrap();
        let inst = FiniteInstance::new_unchecked(
            os,
            vec![Action::null(2), Action::new(1.5, Distribution::new(vec![0.0, 1.0]).unwrap())],
        );
        assert_eq!(inst.validate().violations, vec![Violation::CostOutOfRange { action: 1, cost: 1.5 }]);
    }

    #[test]
    fn equal_cost_different_pmf_violates_fosd_but_duplicates_merge() {
        let os = OutcomeSpace::new(vec![0.0, 1.0]).unwrap();
        let a = Action::new(0.3, Distribution::new(vec![0.5, 0.5]).unwrap());
        let b = Action::new(0.3, Distribution::new(vec![0.4, 0.6]).unwrap());
        let inst = FiniteInstance::new(os.clone(), vec![Action::null(2), a.clone(), b]).unwrap();
        assert_eq!(inst.check_fosd(), Err(FosdViolation { costlier: 1, dominated: 2, omega: 1 }));

        let merged = FiniteInstance::new(os, vec![Action::null(2), a.clone(), a]).unwrap();
        assert_eq!(merged.n(), 2);
    }

    #[test]
    fn cdfp_violation_reports_triple() {
        let os = OutcomeSpace::new(vec![0.0, 1.0]).unwrap();
        let inst = FiniteInstance::new(
            os,
            vec![
                Action::null(2),
                Action::new(0.5, Distribution::new(vec![0.9, 0.1]).unwrap()),
                Action::new(1.0, Distribution::new(vec![0.5, 0.5]).unwrap()),
            ],
        )
        .unwrap();
        assert_eq!(inst.check_fosd(), Ok(()));
        let err = inst.check_cdfp().unwrap_err();
        assert_eq!(err, CdfpViolation { omega: 1, triple: (0, 1, 2) });
        assert!(format!("{err}").starts_with("CDFP violated at (ω=1"));
    }

    #[test]
    fn to_ccdf_interpolates_and_extends_flat() {
        let c = figure_instance().to_ccdf_instance().unwrap();
        assert!((c.ccdf_value(1, 0.3) - 0.275).abs() < 1e-12);
        assert!((c.ccdf_value(1, 0.9) - 0.5).abs() < 1e-12);
        assert!((c.ccdf_value(3, 0.2) - 0.05).abs() < 1e-12);
        assert_eq!(c.cost_max(), 0.8);
    }

    #[test]
    fn to_ccdf_reproduces_table_bit_exact() {
        let inst = figure_instance();
        let c = inst.to_ccdf_instance().unwrap();
        for a in inst.actions() {
            let f = a.dist.ccdf();
            for (w, fw) in f.iter().enumerate().skip(1) {
                assert_eq!(c.ccdf_value(w, a.cost), *fw);
            }
        }
    }

    #[test]
    fn eta_is_smallest_positive_mass() {
        assert_eq!(figure_instance().eta(), Some(0.05));
    }
}
