//! Agent best response with principal-favoring tie-breaking.

use alloc::vec::Vec;

use crate::ccdf::{Candidate, CcdfInstance};
use crate::error::{Error, Result};
use crate::finite::FiniteInstance;
use crate::model::{increments, Contract, OutcomeSpace};
use crate::TIE_TOL;

#[derive(Debug, Clone, PartialEq)]
pub struct BestResponse {
    /// Index into the action list (finite) or the candidate list (ccdf).
    pub action: usize,
    pub cost: f64,
    pub agent_utility: f64,
    pub principal_utility: f64,
    /// Actions within [`TIE_TOL`] of the best agent utility.
    pub tied: Vec<usize>,
}

fn check_dims(m: usize, contract: &Contract) -> Result<()> {
    if contract.m() != m {
        return Err(Error::DimensionMismatch { expected: m, got: contract.m() });
    }
    Ok(())
}

/// Picks among `(cost, agent, principal)` triples: best agent utility, then
/// best principal utility inside the tie band, then lowest index.
pub(crate) fn choose(rows: impl Iterator<Item = (f64, f64, f64)>) -> Option<BestResponse> {
    let rows: Vec<(f64, f64, f64)> = rows.collect();
    let best = rows.iter().map(|r| r.1).fold(f64::NEG_INFINITY, f64::max);
    if !best.is_finite() {
        return None;
    }
    let tied: Vec<usize> = (0..rows.len()).filter(|&i| rows[i].1 >= best - TIE_TOL).collect();
    let mut pick = tied[0];
    for &i in &tied[1..] {
        if rows[i].2 > rows[pick].2 {
            pick = i;
        }
    }
    let (cost, agent_utility, principal_utility) = rows[pick];
    Some(BestResponse { action: pick, cost, agent_utility, principal_utility, tied })
}

pub fn best_response_finite(instance: &FiniteInstance, contract: &Contract) -> Result<BestResponse> {
    check_dims(instance.m(), contract)?;
    let v = instance.outcomes().values();
    let p = contract.payments();
    choose(instance.actions().iter().map(|a| {
        let pay = a.dist.expect(p);
        (a.cost, pay - a.cost, a.dist.expect(v) - pay)
    }))
    .ok_or_else(|| Error::InvalidInstance("no actions".into()))
}

/// Best response over a candidate list given in complementary-CDF form.
pub(crate) fn best_response_candidates(
    outcomes: &OutcomeSpace,
    candidates: &[Candidate],
    contract: &Contract,
) -> Result<BestResponse> {
    check_dims(outcomes.m(), contract)?;
    let pay_inc = increments(contract.payments());
    let val_inc = outcomes.increments();
    choose(candidates.iter().map(|c| {
        let pay = c.dot_increments(&pay_inc);
        (c.cost, pay - c.cost, c.dot_increments(&val_inc) - pay)
    }))
    .ok_or_else(|| Error::InvalidInstance("no candidate actions".into()))
}

/// Searches the breakpoint costs only; non-breakpoint costs are dominated.
pub fn best_response_ccdf(instance: &CcdfInstance, contract: &Contract) -> Result<BestResponse> {
    best_response_candidates(instance.outcomes(), instance.candidates(), contract)
}

pub fn principal_utility(instance: &FiniteInstance, contract: &Contract) -> Result<f64> {
    Ok(best_response_finite(instance, contract)?.principal_utility)
}

pub fn principal_utility_ccdf(instance: &CcdfInstance, contract: &Contract) -> Result<f64> {
    Ok(best_response_ccdf(instance, contract)?.principal_utility)
}
