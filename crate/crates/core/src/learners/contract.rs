use alloc::format;
use alloc::vec::Vec;

use super::{snap_ceil, IterationRecord, LearnerConfig, LearnerReport};
use crate::approx::{check_eps_approximation, robustify, EpsApproximation, Metric};
use crate::ccdf::{Candidate, CcdfInstance};
use crate::error::{Error, Result};
use crate::finite::Action;
use crate::function_learning::{learn_concave, slope_grid};
use crate::model::{from_counts, Contract, Distribution, OutcomeSpace};
use crate::optimal::optimal_bounded_contract_candidates;
use crate::oracle::{hoeffding_samples, OracleSession, QueryMode};
use crate::pwl::PiecewiseLinearFn;
use crate::TOL;

/// Learned CCDFs on `{0} ∪ [c_min, 1]` plus cost-0 actions appended during
/// refinement.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalInstance {
    outcomes: OutcomeSpace,
    ccdf: Vec<PiecewiseLinearFn>,
    c_min: f64,
    base: Vec<Candidate>,
    appended: Vec<Candidate>,
}

impl EmpiricalInstance {
    /// `ccdf[ω−1]` is `F̃(ω|·)` on `[0, 1]`.
    pub fn new(outcomes: OutcomeSpace, ccdf: Vec<PiecewiseLinearFn>, c_min: f64) -> Result<Self> {
        let m = outcomes.m();
        if ccdf.len() != m - 1 {
            return Err(Error::DimensionMismatch { expected: m - 1, got: ccdf.len() });
        }
        if !(0.0..1.0).contains(&c_min) {
            return Err(Error::param("c_min", format!("{c_min} not in [0, 1)")));
        }
        for (k, f) in ccdf.iter().enumerate() {
            let (lo, hi) = f.domain();
            if lo.abs() > TOL || (hi - 1.0).abs() > TOL {
                return Err(Error::InvalidInstance(format!("F̃({}|·) domain [{lo}, {hi}] is not [0, 1]", k + 1)));
            }
        }
        let mut inst = Self { outcomes, ccdf, c_min, base: Vec::new(), appended: Vec::new() };
        let mut costs: Vec<f64> =
            inst.ccdf.iter().flat_map(|f| f.xs().iter().copied()).filter(|&x| x > c_min).chain([c_min, 1.0]).collect();
        costs.sort_by(f64::total_cmp);
        costs.dedup();
        let mut base = Vec::with_capacity(costs.len() + 1);
        base.push(Candidate { cost: 0.0, ccdf: inst.ccdf_at(c_min) });
        base.extend(costs.into_iter().map(|c| Candidate { cost: c, ccdf: inst.ccdf_at(c) }));
        inst.base = base;
        Ok(inst)
    }

    pub fn outcomes(&self) -> &OutcomeSpace {
        &self.outcomes
    }

    pub fn ccdf(&self, omega: usize) -> &PiecewiseLinearFn {
        &self.ccdf[omega - 1]
    }

    pub fn c_min(&self) -> f64 {
        self.c_min
    }

    /// `F̃(0..m | c)`, clamped into `[0, 1]` and nonincreasing in ω.
    pub fn ccdf_at(&self, c: f64) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.outcomes.m());
        out.push(1.0);
        let mut prev = 1.0f64;
        for f in &self.ccdf {
            let y = f.eval_clamped(c).clamp(0.0, 1.0).min(prev);
            out.push(y);
            prev = y;
        }
        out
    }

    /// The cost-0 action carrying `F̃(·|c_min)`.
    pub fn init_action(&self) -> &Candidate {
        &self.base[0]
    }

    pub fn appended(&self) -> &[Candidate] {
        &self.appended
    }

    pub fn push_action(&mut self, dist: &Distribution) {
        self.appended.push(Candidate::from_distribution(0.0, dist));
    }

    /// Initialization action, breakpoint costs in `[c_min, 1]`, then the
    /// appended actions.
    pub fn candidates(&self) -> Vec<Candidate> {
        self.base.iter().chain(&self.appended).cloned().collect()
    }
}

/// Budget of the initialization phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitPlan {
    /// Target band `ε₂` of each learned CCDF.
    pub band: f64,
    /// Accuracy `ε₁` of each subgradient query.
    pub oracle_accuracy: f64,
    /// Failure probability per subgradient query.
    pub delta_per_query: f64,
    pub slopes_per_outcome: usize,
    pub samples_per_slope: u64,
    pub c_min: f64,
}

impl InitPlan {
    pub fn new(config: &LearnerConfig, m: usize) -> Result<Self> {
        config.validate()?;
        let (eps, h) = (config.eps, config.h);
        let band = config.init_band.unwrap_or(eps * eps / (288.0 * m as f64 * h));
        let oracle_accuracy = config.oracle_accuracy.unwrap_or(libm::pow(band, 4.0) / 64.0);
        let (_, slopes) = slope_grid(band * band / 2.0)?;
        let delta_per_query = config.delta / ((m - 1) as f64 * slopes.len() as f64);
        Ok(Self {
            band,
            oracle_accuracy,
            delta_per_query,
            slopes_per_outcome: slopes.len(),
            samples_per_slope: hoeffding_samples(oracle_accuracy, delta_per_query, config.hoeffding_k),
            c_min: eps * eps / 144.0,
        })
    }

    pub fn total_queries(&self, m: usize) -> u64 {
        (m as u64 - 1) * self.slopes_per_outcome as u64 * self.samples_per_slope
    }
}

/// Learns every `F(ω|·)` from threshold-contract queries, clips to `[0, 1]`
/// and nests the results by a running pointwise minimum over ω.
pub fn initialize_contract_query(session: &mut OracleSession<'_>, config: &LearnerConfig) -> Result<EmpiricalInstance> {
    if session.mode() != QueryMode::Contract {
        return Err(Error::Oracle("contract learner needs a contract-query session".into()));
    }
    let m = session.m();
    let plan = InitPlan::new(config, m)?;
    let mut fns: Vec<PiecewiseLinearFn> = Vec::with_capacity(m - 1);
    for w in 1..m {
        let f = learn_concave(
            |r| session.subgradient_query(w, r, plan.oracle_accuracy, plan.delta_per_query, config.hoeffding_k),
            plan.band,
        )?;
        let mut f = f.clip_values(0.0, 1.0);
        if let Some(prev) = fns.last() {
            f = f.pointwise_min(prev)?;
        }
        fns.push(f.simplify(0.0));
    }
    EmpiricalInstance::new(session.outcomes().clone(), fns, plan.c_min)
}

/// Queries per refinement iteration: `C·m³H²·log₂(mH/(δε))/ε⁴`, rounded up.
pub fn refinement_samples(config: &LearnerConfig, m: usize) -> u64 {
    let (eps, h, m) = (config.eps, config.h, m as f64);
    let x = m * m * m * h * h * libm::log2(m * h / (config.delta * eps)) / libm::pow(eps, 4.0);
    snap_ceil(config.sample_constant_c * x)
}

/// `⌈576·m²H/ε²⌉`.
pub fn refinement_iteration_bound(config: &LearnerConfig, m: usize) -> usize {
    libm::ceil(576.0 * (m * m) as f64 * config.h / (config.eps * config.eps)) as usize
}

fn estimated_utility(outcomes: &OutcomeSpace, dist: &Distribution, contract: &Contract) -> f64 {
    dist.pmf().iter().zip(outcomes.values()).zip(contract.payments()).map(|((f, v), p)| f * (v - p)).sum()
}

/// Solve, robustify, test; on failure append the observed distribution as a
/// cost-0 action and repeat.
pub fn refine_contract_query(
    session: &mut OracleSession<'_>,
    empirical: &mut EmpiricalInstance,
    config: &LearnerConfig,
) -> Result<LearnerReport> {
    config.validate()?;
    if session.mode() != QueryMode::Contract {
        return Err(Error::Oracle("contract learner needs a contract-query session".into()));
    }
    let m = session.m();
    let start = session.query_count();
    let samples = refinement_samples(config, m);
    let cap = refinement_iteration_bound(config, m).min(config.max_refinement_iterations.unwrap_or(usize::MAX)).max(1);
    let outcomes = session.outcomes().clone();
    let mut history = Vec::new();
    let mut appended = Vec::new();
    let mut best: Option<(Contract, f64)> = None;
    for it in 1..=cap {
        let opt = optimal_bounded_contract_candidates(&outcomes, &empirical.candidates(), config.h)?;
        let contract = robustify(&opt.contract, &outcomes, config.eps)?;
        let counts = session.query_contract_counts(&contract, samples)?;
        let dist = from_counts(&counts);
        let est = estimated_utility(&outcomes, &dist, &contract);
        let accepted = est >= opt.principal_utility - config.eps / 2.0;
        history.push(IterationRecord {
            iteration: it,
            empirical_opt_h: opt.principal_utility,
            est_utility: est,
            samples,
            accepted,
        });
        if best.as_ref().map_or(true, |(_, u)| est > *u) {
            best = Some((contract.clone(), est));
        }
        if accepted {
            return Ok(report(contract, est, session.query_count() - start, it, false, history, appended));
        }
        empirical.push_action(&dist);
        appended.push(dist);
    }
    let (contract, est) = best.expect("at least one iteration ran");
    Ok(report(contract, est, session.query_count() - start, cap, true, history, appended))
}

fn report(
    contract: Contract,
    est_utility: f64,
    queries: u64,
    iterations: usize,
    bound_exceeded: bool,
    history: Vec<IterationRecord>,
    appended: Vec<Distribution>,
) -> LearnerReport {
    LearnerReport {
        contract,
        est_utility,
        true_utility: None,
        opt_h_truth: None,
        queries,
        init_queries: 0,
        iterations,
        bound_exceeded,
        history,
        appended,
    }
}

pub fn learn_contract_query(session: &mut OracleSession<'_>, config: &LearnerConfig) -> Result<LearnerReport> {
    let start = session.query_count();
    let mut empirical = initialize_contract_query(session, config)?;
    let init_queries = session.query_count() - start;
    let mut rep = refine_contract_query(session, &mut empirical, config)?;
    rep.init_queries = init_queries;
    rep.queries = session.query_count() - start;
    Ok(rep)
}

/// Whether the initialization action's CCDF dominates the truth at every
/// cost below `c_min`, up to `tol`.
pub fn init_action_dominates(empirical: &EmpiricalInstance, truth: &CcdfInstance, tol: f64) -> bool {
    // the truth is nondecreasing in cost, so c_min is the binding point
    let truth_at = truth.ccdf_at(empirical.c_min());
    empirical.init_action().ccdf.iter().zip(&truth_at).all(|(a, b)| *a >= b - tol)
}

/// ε-approximation of every empirical candidate within `pool`.
pub fn check_invariant_i1(
    empirical: &EmpiricalInstance,
    pool: &[Action],
    eps: f64,
    h: f64,
    metric: Metric,
) -> Result<Vec<EpsApproximation>> {
    empirical
        .candidates()
        .iter()
        .map(|c| check_eps_approximation(c.cost, &c.distribution(), pool, eps, h, metric))
        .collect()
}
