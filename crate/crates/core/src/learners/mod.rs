//! The action-query and contract-query learners.

mod action;
mod contract;

use alloc::format;
use alloc::vec::Vec;

pub use action::{action_query_constant, action_query_samples, learn_action_query};
pub use contract::{
    check_invariant_i1, init_action_dominates, initialize_contract_query, learn_contract_query, refine_contract_query,
    refinement_iteration_bound, refinement_samples, EmpiricalInstance, InitPlan,
};

use crate::agent::{principal_utility, principal_utility_ccdf};
use crate::error::{Error, Result};
use crate::model::{Contract, Distribution};
use crate::optimal::{optimal_bounded_contract, optimal_bounded_contract_ccdf};
use crate::oracle::Hidden;

#[derive(Debug, Clone, PartialEq)]
pub struct LearnerConfig {
    pub eps: f64,
    pub delta: f64,
    pub h: f64,
    /// Replaces the unspecified "sufficiently large constant C".
    pub sample_constant_c: f64,
    pub max_refinement_iterations: Option<usize>,
    pub seed: u64,
    /// Hoeffding constant `K` of the subgradient oracle.
    pub hoeffding_k: f64,
    /// Overrides the initialization band `ε²/(288mH)`.
    pub init_band: Option<f64>,
    /// Overrides the subgradient oracle accuracy `band⁴/64`.
    pub oracle_accuracy: Option<f64>,
}

impl LearnerConfig {
    pub fn new(eps: f64, delta: f64, h: f64) -> Self {
        Self {
            eps,
            delta,
            h,
            sample_constant_c: 1.0,
            max_refinement_iterations: None,
            seed: 0,
            hoeffding_k: 2.0,
            init_band: None,
            oracle_accuracy: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0 && self.eps < 0.5) {
            return Err(Error::param("eps", format!("{} not in (0, 1/2)", self.eps)));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::param("delta", format!("{} not in (0, 1)", self.delta)));
        }
        if !(self.h >= 1.0) || !self.h.is_finite() {
            return Err(Error::param("H", format!("{} must be finite and ≥ 1", self.h)));
        }
        if !(self.sample_constant_c > 0.0) || !self.sample_constant_c.is_finite() {
            return Err(Error::param("C", format!("{} must be positive", self.sample_constant_c)));
        }
        if !(self.hoeffding_k > 0.0) {
            return Err(Error::param("K", format!("{} must be positive", self.hoeffding_k)));
        }
        for (name, v) in [("init_band", self.init_band), ("oracle_accuracy", self.oracle_accuracy)] {
            if let Some(v) = v {
                if !(v > 0.0 && v < 1.0) {
                    return Err(Error::param(name, format!("{v} not in (0, 1)")));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    pub empirical_opt_h: f64,
    pub est_utility: f64,
    pub samples: u64,
    pub accepted: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LearnerReport {
    pub contract: Contract,
    pub est_utility: f64,
    pub true_utility: Option<f64>,
    pub opt_h_truth: Option<f64>,
    pub queries: u64,
    /// Queries spent before refinement (contract mode) or in total (action mode).
    pub init_queries: u64,
    pub iterations: usize,
    /// Refinement stopped at its iteration cap without passing the test.
    pub bound_exceeded: bool,
    pub history: Vec<IterationRecord>,
    /// Distributions appended to the empirical instance during refinement.
    pub appended: Vec<Distribution>,
}

impl LearnerReport {
    /// Fills `true_utility` and `opt_h_truth` from the hidden instance.
    pub fn evaluate_against(&mut self, hidden: Hidden<'_>, h: f64) -> Result<()> {
        let (u, opt) = match hidden {
            Hidden::Finite(i) => {
                (principal_utility(i, &self.contract)?, optimal_bounded_contract(i, h)?.principal_utility)
            }
            Hidden::Ccdf(i) => {
                (principal_utility_ccdf(i, &self.contract)?, optimal_bounded_contract_ccdf(i, h)?.principal_utility)
            }
        };
        self.true_utility = Some(u);
        self.opt_h_truth = Some(opt);
        Ok(())
    }
}

/// `ceil(x)` that snaps values within `1e-9` of an integer to it.
pub(crate) fn snap_ceil(x: f64) -> u64 {
    let r = libm::round(x);
    let v = if (x - r).abs() <= 1e-9 { r } else { libm::ceil(x) };
    v.max(1.0) as u64
}
