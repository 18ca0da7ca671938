use alloc::format;
use alloc::vec::Vec;

use super::{snap_ceil, LearnerConfig, LearnerReport};
use crate::agent::principal_utility;
use crate::approx::robustify;
use crate::error::{Error, Result};
use crate::finite::{Action, FiniteInstance};
use crate::model::from_counts;
use crate::optimal::optimal_bounded_contract;
use crate::oracle::{Hidden, OracleSession, QueryMode};
use crate::TOL;

/// Samples per action: `C·H²(m + log₂(n/δ))/ε⁴`, rounded up.
pub fn action_query_samples(config: &LearnerConfig, m: usize, n: usize) -> u64 {
    snap_ceil(action_query_samples_raw(config, m, n))
}

fn action_query_samples_raw(config: &LearnerConfig, m: usize, n: usize) -> f64 {
    let x = config.h * config.h * (m as f64 + libm::log2(n as f64 / config.delta)) / libm::pow(config.eps, 4.0);
    config.sample_constant_c * x
}

/// The constant `C` for which [`action_query_samples`] equals `samples`.
pub fn action_query_constant(config: &LearnerConfig, m: usize, n: usize, samples: u64) -> f64 {
    samples as f64 / (action_query_samples_raw(config, m, n) / config.sample_constant_c)
}

/// Samples every action, solves the empirical instance with the known costs,
/// and robustifies the empirical optimum.
pub fn learn_action_query(
    session: &mut OracleSession<'_>,
    costs: &[f64],
    config: &LearnerConfig,
) -> Result<LearnerReport> {
    config.validate()?;
    if session.mode() != QueryMode::Action {
        return Err(Error::Oracle("action learner needs an action-query session".into()));
    }
    let Hidden::Finite(hidden) = session.hidden() else {
        return Err(Error::Oracle("action queries need a finite instance".into()));
    };
    if costs.len() != hidden.n() {
        return Err(Error::param("costs", format!("{} costs for {} actions", costs.len(), hidden.n())));
    }
    if let Some(i) = (0..costs.len()).find(|&i| (costs[i] - hidden.actions()[i].cost).abs() > TOL) {
        return Err(Error::param("costs", format!("cost {} of action {i} does not match", costs[i])));
    }
    let start = session.query_count();
    let n_samples = action_query_samples(config, session.m(), costs.len());
    let mut actions = Vec::with_capacity(costs.len());
    for (a, &c) in costs.iter().enumerate() {
        let counts = session.query_action_counts(a, n_samples)?;
        actions.push(Action::new(c, from_counts(&counts)));
    }
    let empirical = FiniteInstance::new_unchecked(session.outcomes().clone(), actions);
    let opt = optimal_bounded_contract(&empirical, config.h)?;
    let contract = robustify(&opt.contract, session.outcomes(), config.eps)?;
    let est_utility = principal_utility(&empirical, &contract)?;
    let queries = session.query_count() - start;
    Ok(LearnerReport {
        contract,
        est_utility,
        true_utility: None,
        opt_h_truth: None,
        queries,
        init_queries: queries,
        iterations: 1,
        bound_exceeded: false,
        history: Vec::new(),
        appended: Vec::new(),
    })
}
