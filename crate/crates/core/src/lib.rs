//! Hidden-action principal-agent toolkit.
//!
//! The crate computes optimal (H-bounded) contracts exactly with a dense
//! simplex solver, simulates the action-query and contract-query oracles,
//! runs the two sample-based contract learners, and generates the
//! bounded-contract hardness families together with their verifiers.
//!
//! Everything here is `no_std` with `alloc`; file formats, CSV output and the
//! command-line front end live in the `contractlab` crate.
//!
//! Instances come in two shapes:
//!
//! * [`FiniteInstance`]: a table of actions, each a cost and an outcome pmf.
//! * [`CcdfInstance`]: one piecewise-linear complementary CDF `F(ω|c)` per
//!   outcome threshold, describing a continuum of actions indexed by cost.
#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod agent;
pub mod approx;
pub mod ccdf;
pub mod error;
pub mod finite;
pub mod function_learning;
pub mod hardness;
pub mod learners;
pub mod linear;
pub mod lp;
pub mod model;
pub mod optimal;
pub mod oracle;
pub mod pwl;
pub mod rng;

pub use agent::{best_response_ccdf, best_response_finite, principal_utility, principal_utility_ccdf, BestResponse};
pub use approx::{check_eps_approximation, closest_mixture, robustify, EpsApproximation, Metric};
pub use ccdf::{Candidate, CcdfInstance};
pub use error::{CdfpViolation, Error, FosdViolation, Result};
pub use finite::{Action, FiniteInstance, ValidationReport, Violation};
pub use function_learning::{learn_concave, learn_convex, slope_grid};
pub use linear::{optimal_linear_contract, LinearContractResult};
pub use lp::{solve_lp, Constraint, Direction, LpOutcome, LpProblem, LpSolution, Sense};
pub use model::{empirical_distribution, kol_distance, tv_distance, Contract, Distribution, OutcomeSpace};
pub use optimal::{
    optimal_bounded_contract, optimal_bounded_contract_candidates, optimal_bounded_contract_ccdf,
    optimal_general_contract, smallest_positive_probability, ActionLpStatus, OptimalContractResult,
};
pub use oracle::{Hidden, OracleSession, QueryMode, ThresholdContract, TraceRecord};
pub use pwl::{concave_closure, PiecewiseLinearFn};

/// Absolute tolerance for probability sums and structural invariant checks.
pub const TOL: f64 = 1e-9;

/// Agent utilities within this distance of the maximum are treated as ties.
pub const TIE_TOL: f64 = 1e-7;
