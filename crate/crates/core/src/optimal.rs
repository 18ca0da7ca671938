//! Optimal H-bounded contracts: one min-payment LP per action, keeping the
//! action whose implementation leaves the principal the most.
//!
//! IC constraints are generated lazily: each LP starts with none and the most
//! violated one is added until the solution is incentive compatible. Actions
//! whose welfare cannot beat the incumbent are skipped.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::ccdf::{Candidate, CcdfInstance};
use crate::error::{Error, Result};
use crate::finite::FiniteInstance;
use crate::lp::{solve_lp, Direction, LpOutcome, LpProblem, Sense};
use crate::model::{Contract, OutcomeSpace};

/// IC violations below this are accepted.
const IC_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ActionLpStatus {
    Solved {
        expected_payment: f64,
        principal_utility: f64,
    },
    /// Not implementable with payments in `[0, H]`.
    Infeasible,
    /// Welfare bound at or below the best utility already found.
    Pruned,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimalContractResult {
    pub contract: Contract,
    /// Index into the action list (finite) or candidate list (ccdf).
    pub action: usize,
    pub cost: f64,
    pub principal_utility: f64,
    pub expected_payment: f64,
    pub h: f64,
    pub per_action: Vec<ActionLpStatus>,
}

#[derive(Clone, Copy, PartialEq)]
enum Repr {
    /// Variables are payments, rows are pmfs.
    Pmf,
    /// Variables are payment increments, rows are complementary CDFs.
    Increment,
}

fn check_h(h: f64) -> Result<()> {
    if !(h >= 1.0) || !h.is_finite() {
        return Err(Error::param("H", format!("{h} must be finite and ≥ 1")));
    }
    Ok(())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Per-action min-payment LP over rows `g` (pmf or ccdf) with costs `c` and
/// principal values `val`.
fn solve_rows(g: &[Vec<f64>], c: &[f64], val: &[f64], h: f64, repr: Repr) -> Result<OptimalContractResult> {
    let n = g.len();
    if n == 0 {
        return Err(Error::InvalidInstance("no actions".into()));
    }
    let m = g[0].len();
    let min_cost = c.iter().copied().fold(f64::INFINITY, f64::min);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| (val[b] - c[b]).total_cmp(&(val[a] - c[a])).then(a.cmp(&b)));

    let mut per_action = vec![ActionLpStatus::Pruned; n];
    let mut best: Option<(usize, Vec<f64>, f64, f64)> = None;
    for &a in &order {
        if let Some((_, _, u, _)) = &best {
            if val[a] - c[a] + min_cost <= *u {
                continue;
            }
        }
        match min_payment(g, c, a, h, repr)? {
            None => per_action[a] = ActionLpStatus::Infeasible,
            Some(x) => {
                let pay = dot(&g[a], &x);
                let u = val[a] - pay;
                per_action[a] = ActionLpStatus::Solved { expected_payment: pay, principal_utility: u };
                let better = match &best {
                    None => true,
                    Some((b, _, bu, _)) => u > *bu || (u == *bu && a < *b),
                };
                if better {
                    best = Some((a, x, u, pay));
                }
            }
        }
    }
    let (action, x, principal_utility, expected_payment) =
        best.ok_or_else(|| Error::InvalidInstance("no action is implementable".into()))?;
    let payments = match repr {
        Repr::Pmf => x,
        Repr::Increment => {
            let mut acc = 0.0;
            x.iter()
                .map(|q| {
                    acc += q;
                    acc
                })
                .collect()
        }
    };
    debug_assert_eq!(payments.len(), m);
    Ok(OptimalContractResult {
        contract: Contract::from_clamped(payments, h),
        action,
        cost: c[action],
        principal_utility,
        expected_payment,
        h,
        per_action,
    })
}

/// Minimum expected payment implementing action `a`; `None` if infeasible.
fn min_payment(g: &[Vec<f64>], c: &[f64], a: usize, h: f64, repr: Repr) -> Result<Option<Vec<f64>>> {
    let m = g[a].len();
    let mut lp = LpProblem::new(Direction::Minimize, g[a].clone());
    match repr {
        Repr::Pmf => lp = lp.with_bounds(0.0, h),
        Repr::Increment => {
            lp = lp.with_bounds(-h, h);
            lp.set_bounds(0, 0.0, h);
            for w in 1..m {
                let prefix: Vec<f64> = (0..m).map(|j| if j <= w { 1.0 } else { 0.0 }).collect();
                lp.add_constraint(prefix.clone(), Sense::Ge, 0.0);
                lp.add_constraint(prefix, Sense::Le, h);
            }
        }
    }
    let mut added = vec![false; g.len()];
    added[a] = true;
    loop {
        let x = match solve_lp(&lp)? {
            LpOutcome::Optimal(s) => s.x,
            LpOutcome::Infeasible => return Ok(None),
            LpOutcome::Unbounded => return Err(Error::MalformedLp("payment LP unbounded".into())),
        };
        let own = dot(&g[a], &x) - c[a];
        let mut worst: Option<(usize, f64)> = None;
        for b in 0..g.len() {
            if added[b] {
                continue;
            }
            let viol = dot(&g[b], &x) - c[b] - own;
            if viol > IC_SLACK && worst.map_or(true, |(_, v)| viol > v) {
                worst = Some((b, viol));
            }
        }
        let Some((b, _)) = worst else {
            return Ok(Some(x));
        };
        added[b] = true;
        let row: Vec<f64> = g[a].iter().zip(&g[b]).map(|(x, y)| x - y).collect();
        lp.add_constraint(row, Sense::Ge, c[a] - c[b]);
    }
}

/// Optimal contract with every payment in `[0, H]`.
pub fn optimal_bounded_contract(instance: &FiniteInstance, h: f64) -> Result<OptimalContractResult> {
    check_h(h)?;
    let v = instance.outcomes().values();
    let g: Vec<Vec<f64>> = instance.actions().iter().map(|a| a.dist.pmf().to_vec()).collect();
    let val: Vec<f64> = g.iter().map(|f| dot(f, v)).collect();
    solve_rows(&g, &instance.costs(), &val, h, Repr::Pmf)
}

/// Smallest nonzero outcome probability across all actions.
pub fn smallest_positive_probability(instance: &FiniteInstance) -> Option<f64> {
    instance.eta()
}

/// Unbounded optimum, computed as the `1/η`-bounded one.
pub fn optimal_general_contract(instance: &FiniteInstance) -> Result<OptimalContractResult> {
    let h = smallest_positive_probability(instance).map_or(1.0, |eta| (1.0 / eta).max(1.0));
    optimal_bounded_contract(instance, h)
}

/// Increment-form LP over explicit candidates (breakpoints and any point
/// actions). Payments are prefix sums of the increments.
pub fn optimal_bounded_contract_candidates(
    outcomes: &OutcomeSpace,
    candidates: &[Candidate],
    h: f64,
) -> Result<OptimalContractResult> {
    check_h(h)?;
    let m = outcomes.m();
    if let Some(bad) = candidates.iter().find(|c| c.ccdf.len() != m) {
        return Err(Error::DimensionMismatch { expected: m, got: bad.ccdf.len() });
    }
    let inc = outcomes.increments();
    let g: Vec<Vec<f64>> = candidates.iter().map(|c| c.ccdf.clone()).collect();
    let c: Vec<f64> = candidates.iter().map(|c| c.cost).collect();
    let val: Vec<f64> = g.iter().map(|f| dot(f, &inc)).collect();
    solve_rows(&g, &c, &val, h, Repr::Increment)
}

pub fn optimal_bounded_contract_ccdf(instance: &CcdfInstance, h: f64) -> Result<OptimalContractResult> {
    optimal_bounded_contract_candidates(instance.outcomes(), instance.candidates(), h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agent::best_response_finite;
    use crate::finite::Action;
    use crate::model::Distribution;

    fn additive(eps: f64, h: f64) -> FiniteInstance {
        let os = OutcomeSpace::new(vec![0.0, 1.0, 1.0]).unwrap();
        let a1 = Distribution::from_ccdf_tail(&[0.5, 4.0 * eps * eps / h]);
        let a2 = Distribution::from_ccdf_tail(&[1.0, eps / h]);
        FiniteInstance::new(os, vec![Action::null(3), Action::new(eps, a1), Action::new(0.25, a2)]).unwrap()
    }

    #[test]
    fn additive_general_and_bounded() {
        let inst = additive(0.01, 1.0);
        let big = optimal_bounded_contract(&inst, 25.0).unwrap();
        assert_eq!(big.action, 2);
        assert!((big.principal_utility - 0.75).abs() < 1e-9);
        let gen = optimal_general_contract(&inst).unwrap();
        assert!((gen.h - 2500.0).abs() < 1e-6);
        assert!((gen.principal_utility - 0.75).abs() < 1e-9);
        let one = optimal_bounded_contract(&inst, 1.0).unwrap();
        assert!(one.principal_utility >= 0.49 - 1e-9 && one.principal_utility <= 0.5292);
        assert!(one.contract.is_bounded_by(1.0));
        let br = best_response_finite(&inst, &one.contract).unwrap();
        assert!((br.principal_utility - one.principal_utility).abs() < 1e-6);
    }

    #[test]
    fn action_two_payment_floor_with_h1() {
        let eps = 0.01;
        let inst = additive(eps, 1.0);
        let r = optimal_bounded_contract(&inst, 1.0).unwrap();
        match r.per_action[2] {
            ActionLpStatus::Solved { expected_payment, .. } => {
                assert!(expected_payment >= 0.5 * (1.0 - 4.0 * eps) - eps * (1.0 - 8.0 * eps) - 1e-9)
            }
            ActionLpStatus::Infeasible => {}
            ActionLpStatus::Pruned => panic!("action 2 has the highest welfare and cannot be pruned"),
        }
    }

    #[test]
    fn null_only_instance() {
        let os = OutcomeSpace::new(vec![0.3, 1.0]).unwrap();
        let inst = FiniteInstance::new(os, vec![Action::null(2)]).unwrap();
        let r = optimal_general_contract(&inst).unwrap();
        assert_eq!(r.contract, Contract::zero(2));
        assert!((r.principal_utility - 0.3).abs() < 1e-12);
    }

    #[test]
    fn ccdf_matches_finite_single_action() {
        let os = OutcomeSpace::new(vec![0.0, 0.5, 1.0]).unwrap();
        let d = Distribution::new(vec![0.2, 0.3, 0.5]).unwrap();
        let fin = FiniteInstance::new(os, vec![Action::null(3), Action::new(0.2, d)]).unwrap();
        let ccdf = fin.to_ccdf_instance().unwrap();
        for h in [1.0, 3.0] {
            let a = optimal_bounded_contract(&fin, h).unwrap();
            let b = optimal_bounded_contract_ccdf(&ccdf, h).unwrap();
            assert!((a.principal_utility - b.principal_utility).abs() < 1e-9);
            assert!(b.contract.is_bounded_by(h));
        }
    }

    #[test]
    fn rejects_small_h() {
        let os = OutcomeSpace::new(vec![0.0, 1.0]).unwrap();
        let inst = FiniteInstance::new(os, vec![Action::null(2)]).unwrap();
        assert!(optimal_bounded_contract(&inst, 0.5).is_err());
    }
}
