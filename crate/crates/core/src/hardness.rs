//! Hardness families for bounded contracts, their verifiers, and random
//! FOSD/CDFP fixtures.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::agent::principal_utility;
use crate::ccdf::CcdfInstance;
use crate::error::{Error, Result};
use crate::finite::{Action, FiniteInstance};
use crate::linear::optimal_linear_contract;
use crate::model::{Contract, Distribution, OutcomeSpace};
use crate::optimal::{optimal_bounded_contract, optimal_general_contract};
use crate::pwl::PiecewiseLinearFn;
use crate::rng::rng_from_seed;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HardnessParams {
    pub eps: f64,
    pub h: f64,
    /// Grid points for the continuum family; ignored by the additive one.
    pub n: usize,
}

impl HardnessParams {
    pub fn new(eps: f64, h: f64, n: usize) -> Self {
        Self { eps, h, n }
    }

    fn check(&self) -> Result<()> {
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return Err(Error::param("eps", format!("{} not in (0, 1)", self.eps)));
        }
        if !(self.h >= 1.0) || !self.h.is_finite() {
            return Err(Error::param("H", format!("{} must be finite and ≥ 1", self.h)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultiplicativeHardness {
    pub finite: FiniteInstance,
    pub exact: CcdfInstance,
    /// `(0, 0, 2H/ε)`: every action ties, the costliest wins.
    pub certificate: Contract,
    pub certificate_utility: f64,
}

/// Actions `a` on a uniform grid of `[0, ln(1/ε)]` with `c_a = ε(e^a − 1 − a)`,
/// `F(1|c_a) = εe^a` and `F(2|c_a) = (ε/2H)c_a`; values `(0, 1, 1)`. The null
/// action takes the place of the grid point `a = 0`.
pub fn gen_multiplicative_hardness(params: HardnessParams) -> Result<MultiplicativeHardness> {
    params.check()?;
    let HardnessParams { eps, h, n } = params;
    if n < 2 {
        return Err(Error::param("n", format!("{n} grid points; need at least 2")));
    }
    let top = libm::log(1.0 / eps);
    let os = OutcomeSpace::new(vec![0.0, 1.0, 1.0])?;
    let mut actions = vec![Action::null(3)];
    for k in 1..n {
        let a = top * k as f64 / (n - 1) as f64;
        let c = eps * (libm::exp(a) - 1.0 - a);
        let f1 = (eps * libm::exp(a)).min(1.0);
        let f2 = eps / (2.0 * h) * c;
        if !(0.0..=1.0).contains(&c) || f2 > f1 {
            return Err(Error::param("eps", format!("{eps} gives invalid probabilities at a = {a}")));
        }
        actions.push(Action::new(c, Distribution::from_ccdf_tail(&[f1, f2])));
    }
    let finite = FiniteInstance::new(os, actions)?;
    let exact = finite.to_ccdf_instance()?;
    let certificate = Contract::new(vec![0.0, 0.0, 2.0 * h / eps])?;
    let certificate_utility = principal_utility(&finite, &certificate)?;
    Ok(MultiplicativeHardness { finite, exact, certificate, certificate_utility })
}

/// Null action plus `c_1 = ε: F = (1/2, 4ε²/H)` and `c_2 = 1/4: F = (1, ε/H)`;
/// values `(0, 1, 1)`.
pub fn gen_additive_hardness(params: HardnessParams) -> Result<FiniteInstance> {
    params.check()?;
    let HardnessParams { eps, h, .. } = params;
    if eps >= 0.125 {
        return Err(Error::param("eps", format!("{eps} must be below 1/8")));
    }
    let os = OutcomeSpace::new(vec![0.0, 1.0, 1.0])?;
    FiniteInstance::new(
        os,
        vec![
            Action::null(3),
            Action::new(eps, Distribution::from_ccdf_tail(&[0.5, 4.0 * eps * eps / h])),
            Action::new(0.25, Distribution::from_ccdf_tail(&[1.0, eps / h])),
        ],
    )
}

/// Unbounded optimum as the larger of the `1/η` LP (evaluated through the
/// agent's best response) and an optional certificate contract.
pub fn certified_opt(instance: &FiniteInstance, certificate: Option<&Contract>) -> Result<f64> {
    let lp = optimal_general_contract(instance).ok().and_then(|r| principal_utility(instance, &r.contract).ok());
    let cert = certificate.map(|c| principal_utility(instance, c)).transpose()?;
    match (lp, cert) {
        (Some(a), Some(b)) => Ok(a.max(b)),
        (Some(a), None) | (None, Some(a)) => Ok(a),
        (None, None) => Err(Error::InvalidInstance("general contract LP failed".into())),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapReport {
    pub opt: f64,
    pub opt_h: f64,
    pub h: f64,
    /// `OPT / OPT_H`; infinite when `OPT_H = 0 < OPT`, 1 when both vanish.
    pub ratio: f64,
    pub gap: f64,
}

pub fn verify_gap(instance: &FiniteInstance, h: f64, certificate: Option<&Contract>) -> Result<GapReport> {
    let opt = certified_opt(instance, certificate)?;
    let bounded = optimal_bounded_contract(instance, h)?;
    let opt_h = bounded.principal_utility;
    let ratio = if opt_h > 0.0 {
        opt / opt_h
    } else if opt > 0.0 {
        f64::INFINITY
    } else {
        1.0
    };
    Ok(GapReport { opt, opt_h, h, ratio, gap: opt - opt_h })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixedApproxRow {
    pub eps: f64,
    /// `2(log₂(1/ε)·LIN + ε)`.
    pub bound: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixedApproxReport {
    pub opt: f64,
    pub lin: f64,
    pub rho: f64,
    pub rows: Vec<MixedApproxRow>,
    /// The inequality at `ε = OPT/4`, when that lies in `(0, 1)`.
    pub at_opt_quarter: Option<MixedApproxRow>,
    /// The inequality at `ε = L/4` with `L` the smallest expected value.
    pub at_min_value_quarter: Option<MixedApproxRow>,
}

impl MixedApproxReport {
    pub fn violations(&self) -> usize {
        self.rows.iter().chain(&self.at_opt_quarter).chain(&self.at_min_value_quarter).filter(|r| !r.holds).count()
    }
}

/// Slack for floating-point evaluation of the mixed-approximation bound.
const MIXED_SLACK: f64 = 1e-9;

fn mixed_row(opt: f64, lin: f64, eps: f64) -> MixedApproxRow {
    let bound = 2.0 * (libm::log2(1.0 / eps) * lin + eps);
    MixedApproxRow { eps, bound, holds: opt <= bound + MIXED_SLACK }
}

/// Checks `OPT ≤ 2(log₂(1/ε)·LIN + ε)` at each `ε` in `eps_grid`, and at the
/// corollary choices `ε = OPT/4` and `ε = L/4`.
pub fn verify_mixed_approx(
    instance: &FiniteInstance,
    eps_grid: &[f64],
    certificate: Option<&Contract>,
) -> Result<MixedApproxReport> {
    if let Some(&e) = eps_grid.iter().find(|&&e| !(e > 0.0 && e < 1.0)) {
        return Err(Error::param("eps", format!("{e} not in (0, 1)")));
    }
    let opt = certified_opt(instance, certificate)?;
    let lin = optimal_linear_contract(instance)?;
    let rows = eps_grid.iter().map(|&e| mixed_row(opt, lin.lin, e)).collect();
    let quarter = |x: f64| (x > 0.0 && x / 4.0 < 1.0).then(|| mixed_row(opt, lin.lin, x / 4.0));
    let v = instance.outcomes().values();
    let min_value = instance.actions().iter().map(|a| a.dist.expect(v)).fold(f64::INFINITY, f64::min);
    Ok(MixedApproxReport {
        opt,
        lin: lin.lin,
        rho: lin.rho,
        rows,
        at_opt_quarter: quarter(opt),
        at_min_value_quarter: quarter(min_value),
    })
}

/// Random concave nondecreasing CCDFs with `k` linear pieces on
/// `[0, cost_max]`, sharing their breakpoints and nested node-wise.
pub fn gen_random_fosd_cdfp(m: usize, k: usize, seed: u64) -> Result<CcdfInstance> {
    if m < 2 || k == 0 {
        return Err(Error::param("m", format!("need m ≥ 2 and k ≥ 1, got m = {m}, k = {k}")));
    }
    let mut rng = rng_from_seed(seed);
    let mut values: Vec<f64> = (1..m).map(|_| rng.random::<f64>()).collect();
    values.sort_by(f64::total_cmp);
    values.insert(0, 0.0);
    let outcomes = OutcomeSpace::new(values)?;

    let cost_max: f64 = rng.random_range(0.3..=1.0);
    let mut xs: Vec<f64> = (1..k).map(|_| rng.random_range(0.0..cost_max)).collect();
    xs.push(0.0);
    xs.push(cost_max);
    xs.sort_by(f64::total_cmp);
    xs.dedup();

    let mut nodes: Vec<Vec<f64>> = Vec::with_capacity(m - 1);
    for w in 0..m - 1 {
        let mut slopes: Vec<f64> = (1..xs.len()).map(|_| rng.random_range(0.05..1.0)).collect();
        slopes.sort_by(|a, b| b.total_cmp(a));
        let mut ys = vec![0.0];
        for (i, s) in slopes.iter().enumerate() {
            ys.push(ys[i] + s * (xs[i + 1] - xs[i]));
        }
        let top: f64 = rng.random_range(0.2..=1.0);
        let scale = top / ys[ys.len() - 1];
        ys.iter_mut().for_each(|y| *y *= scale);
        if w > 0 {
            for (y, p) in ys.iter_mut().zip(&nodes[w - 1]) {
                *y = y.min(*p);
            }
        }
        nodes.push(ys);
    }
    let ccdf = nodes
        .into_iter()
        .map(|ys| {
            let mut pts: Vec<(f64, f64)> = xs.iter().copied().zip(ys).collect();
            let last = pts[pts.len() - 1];
            if last.0 < 1.0 {
                pts.push((1.0, last.1));
            }
            PiecewiseLinearFn::new(pts)
        })
        .collect::<Result<Vec<_>>>()?;
    CcdfInstance::new(outcomes, ccdf, cost_max)
}

/// Null action plus `n − 1` actions sampled at random costs of a random
/// FOSD/CDFP instance.
pub fn gen_random_finite(m: usize, n: usize, seed: u64) -> Result<FiniteInstance> {
    if n == 0 {
        return Err(Error::param("n", "need at least one action"));
    }
    let mut rng = rng_from_seed(seed ^ 0x5eed_f1e1d);
    let k = rng.random_range(1..=4);
    let base = gen_random_fosd_cdfp(m, k, seed)?;
    let mut costs: Vec<f64> = (1..n).map(|_| rng.random_range(0.0..1.0) * base.cost_max()).collect();
    costs.sort_by(f64::total_cmp);
    let mut actions = vec![Action::null(m)];
    for c in costs {
        if c > 0.0 {
            actions.push(Action::new(c, base.distribution_at(c)));
        }
    }
    FiniteInstance::new(base.outcomes().clone(), actions)
}

/// Random pmfs and costs with no structural assumption beyond the null action.
pub fn gen_random_unstructured(m: usize, n: usize, seed: u64) -> Result<FiniteInstance> {
    if m < 2 || n == 0 {
        return Err(Error::param("m", format!("need m ≥ 2 and n ≥ 1, got m = {m}, n = {n}")));
    }
    let mut rng = rng_from_seed(seed);
    let mut values: Vec<f64> = (0..m).map(|_| rng.random::<f64>()).collect();
    values.sort_by(f64::total_cmp);
    let outcomes = OutcomeSpace::new(values)?;
    let mut actions = vec![Action::null(m)];
    for _ in 1..n {
        let raw: Vec<f64> = (0..m).map(|_| rng.random::<f64>() + 0.01).collect();
        let s: f64 = raw.iter().sum();
        let pmf = raw.into_iter().map(|x| x / s).collect();
        actions.push(Action::new(rng.random_range(0.0..0.6), Distribution::new(pmf)?));
    }
    FiniteInstance::new(outcomes, actions)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn additive_probabilities() {
        let inst = gen_additive_hardness(HardnessParams::new(0.01, 1.0, 0)).unwrap();
        let p = inst.actions()[1].dist.pmf();
        assert!((p[0] - 0.5).abs() < 1e-15 && (p[1] - 0.4996).abs() < 1e-15 && (p[2] - 0.0004).abs() < 1e-15);
        assert!(inst.check_fosd().is_ok() && inst.check_cdfp().is_ok());
        assert!(gen_additive_hardness(HardnessParams::new(0.125, 1.0, 0)).is_err());
    }

    #[test]
    fn multiplicative_endpoints() {
        let g = gen_multiplicative_hardness(HardnessParams::new(0.01, 1.0, 200)).unwrap();
        let last = g.finite.actions().last().unwrap();
        assert!((last.cost - (1.0 - 0.01 - 0.01 * libm::log(100.0))).abs() < 1e-12);
        assert!((last.dist.ccdf()[1] - 1.0).abs() < 1e-12);
        assert!((g.certificate_utility - 0.01 * (1.0 + libm::log(100.0))).abs() < 1e-9);
        assert!(g.finite.check_fosd().is_ok() && g.finite.check_cdfp().is_ok());
    }

    #[test]
    fn random_fixtures_valid_and_deterministic() {
        for seed in 0..20 {
            let c = gen_random_fosd_cdfp(4, 3, seed).unwrap();
            assert_eq!(c, gen_random_fosd_cdfp(4, 3, seed).unwrap());
            let f = gen_random_finite(4, 6, seed).unwrap();
            assert!(f.check_fosd().is_ok() && f.check_cdfp().is_ok());
        }
        let one = gen_random_fosd_cdfp(2, 1, 5).unwrap();
        assert!(one.ccdf(1).len() <= 3);
    }

    #[test]
    fn null_only_gap() {
        let os = OutcomeSpace::new(vec![0.2, 1.0]).unwrap();
        let inst = FiniteInstance::new(os, vec![Action::null(2)]).unwrap();
        let r = verify_gap(&inst, 1.0, None).unwrap();
        assert_eq!((r.ratio, r.gap), (1.0, 0.0));
    }
}
