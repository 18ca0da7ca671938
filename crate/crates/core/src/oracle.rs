//! Query oracles over a hidden instance, with a query counter and an
//! optional per-sample trace.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::agent::{best_response_ccdf, best_response_finite};
use crate::ccdf::CcdfInstance;
use crate::error::{Error, Result};
use crate::finite::FiniteInstance;
use crate::model::{Contract, Distribution, OutcomeSpace};
use crate::rng::rng_from_seed;

#[derive(Debug, Clone, Copy)]
pub enum Hidden<'a> {
    Finite(&'a FiniteInstance),
    Ccdf(&'a CcdfInstance),
}

impl Hidden<'_> {
    pub fn outcomes(&self) -> &OutcomeSpace {
        match self {
            Hidden::Finite(i) => i.outcomes(),
            Hidden::Ccdf(i) => i.outcomes(),
        }
    }

    pub fn m(&self) -> usize {
        self.outcomes().m()
    }

    /// Outcome distribution of the agent's best response and the principal's
    /// expected utility.
    pub fn respond(&self, contract: &Contract) -> Result<(Distribution, f64)> {
        match self {
            Hidden::Finite(i) => {
                let br = best_response_finite(i, contract)?;
                Ok((i.actions()[br.action].dist.clone(), br.principal_utility))
            }
            Hidden::Ccdf(i) => {
                let br = best_response_ccdf(i, contract)?;
                Ok((i.candidates()[br.action].distribution(), br.principal_utility))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QueryMode {
    Action,
    Contract,
}

impl QueryMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            QueryMode::Action => "action",
            QueryMode::Contract => "contract",
        }
    }
}

/// Pays `r` for every outcome at least `omega`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdContract {
    pub omega: usize,
    pub r: f64,
}

impl ThresholdContract {
    pub fn new(omega: usize, r: f64) -> Result<Self> {
        if omega == 0 {
            return Err(Error::param("omega", "threshold outcome must be at least 1"));
        }
        if !(r >= 0.0) || !r.is_finite() {
            return Err(Error::param("r", format!("{r} must be finite and nonnegative")));
        }
        Ok(Self { omega, r })
    }

    pub fn to_contract(&self, m: usize) -> Contract {
        Contract::from_clamped((0..m).map(|w| if w >= self.omega { self.r } else { 0.0 }).collect(), f64::MAX)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub query_index: u64,
    pub mode: QueryMode,
    pub descriptor: String,
    pub outcome: usize,
}

/// Samples needed for a Hoeffding band of `eps` at confidence `1 − delta`:
/// `ceil(K·ln(1/δ)/ε²)`.
pub fn hoeffding_samples(eps: f64, delta: f64, k: f64) -> u64 {
    libm::ceil(k * libm::log(1.0 / delta) / (eps * eps)).max(1.0) as u64
}

pub struct OracleSession<'a> {
    hidden: Hidden<'a>,
    mode: QueryMode,
    seed: u64,
    rng: ChaCha8Rng,
    query_count: u64,
    trace: Option<Vec<TraceRecord>>,
}

impl<'a> OracleSession<'a> {
    pub fn new(hidden: Hidden<'a>, mode: QueryMode, seed: u64) -> Self {
        Self { hidden, mode, seed, rng: rng_from_seed(seed), query_count: 0, trace: None }
    }

    pub fn with_trace(mut self) -> Self {
        self.trace = Some(Vec::new());
        self
    }

    pub fn hidden(&self) -> Hidden<'a> {
        self.hidden
    }

    pub fn mode(&self) -> QueryMode {
        self.mode
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn m(&self) -> usize {
        self.hidden.m()
    }

    pub fn outcomes(&self) -> &OutcomeSpace {
        self.hidden.outcomes()
    }

    pub fn query_count(&self) -> u64 {
        self.query_count
    }

    pub fn trace(&self) -> Option<&[TraceRecord]> {
        self.trace.as_deref()
    }

    fn require(&self, mode: QueryMode) -> Result<()> {
        if self.mode != mode {
            return Err(Error::Oracle(format!("{} query on a session in {} mode", mode.as_str(), self.mode.as_str())));
        }
        Ok(())
    }

    fn action_dist(&self, action: usize) -> Result<&'a Distribution> {
        let Hidden::Finite(inst) = self.hidden else {
            return Err(Error::Oracle("action queries need a finite instance".into()));
        };
        inst.actions()
            .get(action)
            .map(|a| &a.dist)
            .ok_or_else(|| Error::Oracle(format!("unknown action {action} (n = {})", inst.n())))
    }

    /// Inverse-CDF sampling over outcomes in ascending order.
    fn draw(rng: &mut ChaCha8Rng, cum: &[f64], last: usize) -> usize {
        let u: f64 = rng.random();
        cum.iter().position(|&c| u < c).unwrap_or(last)
    }

    fn draw_batch(&mut self, dist: &Distribution, n: u64, descriptor: impl Fn() -> String) -> Vec<u64> {
        let pmf = dist.pmf();
        let mut acc = 0.0;
        let cum: Vec<f64> = pmf
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        let last = pmf.iter().rposition(|&p| p > 0.0).unwrap_or(0);
        let mut counts = vec![0u64; pmf.len()];
        let desc = self.trace.as_ref().map(|_| descriptor());
        for _ in 0..n {
            let w = Self::draw(&mut self.rng, &cum, last);
            counts[w] += 1;
            if let (Some(t), Some(d)) = (self.trace.as_mut(), desc.as_ref()) {
                t.push(TraceRecord {
                    query_index: self.query_count,
                    mode: self.mode,
                    descriptor: d.clone(),
                    outcome: w,
                });
            }
            self.query_count += 1;
        }
        counts
    }

    pub fn query_action(&mut self, action: usize) -> Result<usize> {
        let counts = self.query_action_counts(action, 1)?;
        Ok(counts.iter().position(|&c| c == 1).unwrap_or(0))
    }

    /// `n` independent action queries, returned as outcome counts.
    pub fn query_action_counts(&mut self, action: usize, n: u64) -> Result<Vec<u64>> {
        self.require(QueryMode::Action)?;
        let dist = self.action_dist(action)?;
        Ok(self.draw_batch(dist, n, || format!("action:{action}")))
    }

    pub fn query_contract(&mut self, contract: &Contract) -> Result<usize> {
        let counts = self.query_contract_counts(contract, 1)?;
        Ok(counts.iter().position(|&c| c == 1).unwrap_or(0))
    }

    /// `n` identical contract queries, returned as outcome counts. The best
    /// response is computed once for the batch.
    pub fn query_contract_counts(&mut self, contract: &Contract, n: u64) -> Result<Vec<u64>> {
        self.require(QueryMode::Contract)?;
        let (dist, _) = self.hidden.respond(contract)?;
        Ok(self.draw_batch(&dist, n, || contract_descriptor(contract)))
    }

    /// Fraction of `(ω, r)`-threshold queries landing at or above `ω`, plus
    /// `eps/2`. Uses [`hoeffding_samples`] queries; unclipped.
    pub fn subgradient_query(&mut self, omega: usize, r: f64, eps: f64, delta: f64, k: f64) -> Result<f64> {
        if !(r > 0.0) {
            return Err(Error::param("r", format!("{r} must be positive")));
        }
        if omega == 0 || omega >= self.m() {
            return Err(Error::param("omega", format!("{omega} not in 1..{}", self.m())));
        }
        if !(eps > 0.0) || !(delta > 0.0 && delta < 1.0) {
            return Err(Error::param("eps", format!("eps = {eps}, delta = {delta}")));
        }
        let n = hoeffding_samples(eps, delta, k);
        let contract = ThresholdContract::new(omega, r)?.to_contract(self.m());
        let counts = self.query_contract_counts(&contract, n)?;
        let hits: u64 = counts[omega..].iter().sum();
        Ok(hits as f64 / n as f64 + eps / 2.0)
    }
}

fn contract_descriptor(c: &Contract) -> String {
    let mut s = String::from("contract:[");
    for (i, p) in c.payments().iter().enumerate() {
        if i > 0 {
            s.push(';');
        }
        s.push_str(&format!("{p}"));
    }
    s.push(']');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finite::Action;

    fn inst() -> FiniteInstance {
        let os = OutcomeSpace::new(vec![0.0, 0.5, 1.0]).unwrap();
        FiniteInstance::new(
            os,
            vec![Action::null(3), Action::new(0.3, Distribution::new(vec![0.2, 0.3, 0.5]).unwrap())],
        )
        .unwrap()
    }

    #[test]
    fn null_action_always_zero_and_counter() {
        let i = inst();
        let mut s = OracleSession::new(Hidden::Finite(&i), QueryMode::Action, 1);
        for _ in 0..100 {
            assert_eq!(s.query_action(0).unwrap(), 0);
        }
        assert_eq!(s.query_count(), 100);
        assert!(s.query_action(5).is_err());
        assert!(s.query_contract(&Contract::zero(3)).is_err());
    }

    #[test]
    fn deterministic_trace() {
        let i = inst();
        let run = || {
            let mut s = OracleSession::new(Hidden::Finite(&i), QueryMode::Contract, 9).with_trace();
            s.query_contract_counts(&Contract::new(vec![0.0, 1.0, 1.0]).unwrap(), 50).unwrap();
            s.trace().unwrap().to_vec()
        };
        let a = run();
        assert_eq!(a.len(), 50);
        assert_eq!(a, run());
        assert_eq!(a[3].descriptor, "contract:[0;1;1]");
    }

    #[test]
    fn subgradient_query_counts_and_rejects_nonpositive_r() {
        let i = inst();
        let mut s = OracleSession::new(Hidden::Finite(&i), QueryMode::Contract, 2);
        assert!(s.subgradient_query(1, 0.0, 0.1, 0.1, 2.0).is_err());
        let x = s.subgradient_query(1, 100.0, 0.1, 0.1, 2.0).unwrap();
        assert_eq!(s.query_count(), hoeffding_samples(0.1, 0.1, 2.0));
        assert!((x - 0.85).abs() < 0.1);
    }

    #[test]
    fn hoeffding_count() {
        // 2·ln(10)/0.01 = 460.5…
        assert_eq!(hoeffding_samples(0.1, 0.1, 2.0), 461);
    }
}
