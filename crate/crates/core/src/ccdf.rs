//! Complementary-CDF instances: a continuum of actions indexed by cost.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{CdfpViolation, Error, FosdViolation, Result};
use crate::finite::{Action, FiniteInstance};
use crate::model::{Distribution, OutcomeSpace};
use crate::pwl::PiecewiseLinearFn;
use crate::TOL;

/// One action of the breakpoint search: its cost and full complementary CDF
/// `F(0..m)` with `F(0) = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub cost: f64,
    pub ccdf: Vec<f64>,
}

impl Candidate {
    pub fn from_distribution(cost: f64, dist: &Distribution) -> Self {
        Self { cost, ccdf: dist.ccdf() }
    }

    pub fn distribution(&self) -> Distribution {
        Distribution::from_ccdf_tail(&self.ccdf[1..])
    }

    /// `Σ_ω F(ω) x_ω` for an increment vector `x` (values or payments).
    pub fn dot_increments(&self, incs: &[f64]) -> f64 {
        self.ccdf.iter().zip(incs).map(|(f, q)| f * q).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CcdfInstance {
    outcomes: OutcomeSpace,
    ccdf: Vec<PiecewiseLinearFn>,
    cost_max: f64,
    candidates: Vec<Candidate>,
}

impl CcdfInstance {
    /// `ccdf[ω−1]` is `F(ω|·)` on `[0, 1]` for `ω = 1..m`.
    pub fn new(outcomes: OutcomeSpace, ccdf: Vec<PiecewiseLinearFn>, cost_max: f64) -> Result<Self> {
        let m = outcomes.m();
        if ccdf.len() != m - 1 {
            return Err(Error::DimensionMismatch { expected: m - 1, got: ccdf.len() });
        }
        if !(0.0..=1.0).contains(&cost_max) {
            return Err(Error::param("cost_max", format!("{cost_max} not in [0, 1]")));
        }
        for (k, f) in ccdf.iter().enumerate() {
            let w = k + 1;
            let (lo, hi) = f.domain();
            if lo.abs() > TOL || (hi - 1.0).abs() > TOL {
                return Err(Error::InvalidInstance(format!("F({w}|·) domain [{lo}, {hi}] is not [0, 1]")));
            }
            if f.ys()[0].abs() > TOL {
                return Err(Error::InvalidInstance(format!("F({w}|0) = {} but must be 0", f.ys()[0])));
            }
            if let Some(i) = f.ys().iter().position(|&y| !(-TOL..=1.0 + TOL).contains(&y)) {
                return Err(Error::InvalidInstance(format!("F({w}|{}) = {} outside [0, 1]", f.xs()[i], f.ys()[i])));
            }
            if let Some(i) = (1..f.len()).find(|&i| f.ys()[i] < f.ys()[i - 1] - TOL) {
                return Err(FosdViolation { costlier: i, dominated: i - 1, omega: w }.into());
            }
            for k in 1..f.len() - 1 {
                let sub = PiecewiseLinearFn::new(alloc::vec![
                    (f.xs()[k - 1], f.ys()[k - 1]),
                    (f.xs()[k + 1], f.ys()[k + 1])
                ])?;
                if f.ys()[k] < sub.eval_clamped(f.xs()[k]) - TOL {
                    return Err(CdfpViolation { omega: w, triple: (k - 1, k, k + 1) }.into());
                }
            }
            let top = f.eval_clamped(cost_max);
            if let Some(i) = (0..f.len()).find(|&i| f.xs()[i] > cost_max && (f.ys()[i] - top).abs() > TOL) {
                return Err(Error::InvalidInstance(format!(
                    "F({w}|·) not constant beyond cost_max = {cost_max} (value {} at {})",
                    f.ys()[i],
                    f.xs()[i]
                )));
            }
        }
        for w in 1..m - 1 {
            let (a, b) = (&ccdf[w - 1], &ccdf[w]);
            for &x in a.xs().iter().chain(b.xs()) {
                if b.eval_clamped(x) > a.eval_clamped(x) + TOL {
                    return Err(Error::InvalidInstance(format!("CCDFs not nested: F({}|{x}) > F({w}|{x})", w + 1)));
                }
            }
        }
        let mut inst = Self { outcomes, ccdf, cost_max, candidates: Vec::new() };
        inst.candidates = inst.breakpoint_costs().into_iter().map(|c| inst.candidate_at(c)).collect();
        Ok(inst)
    }

    pub fn outcomes(&self) -> &OutcomeSpace {
        &self.outcomes
    }

    pub fn m(&self) -> usize {
        self.outcomes.m()
    }

    pub fn cost_max(&self) -> f64 {
        self.cost_max
    }

    /// `F(ω|·)` for `ω ≥ 1`.
    pub fn ccdf(&self, omega: usize) -> &PiecewiseLinearFn {
        &self.ccdf[omega - 1]
    }

    pub fn ccdf_fns(&self) -> &[PiecewiseLinearFn] {
        &self.ccdf
    }

    /// `F(ω|c)`; `F(0|c) = 1`.
    pub fn ccdf_value(&self, omega: usize, c: f64) -> f64 {
        if omega == 0 {
            return 1.0;
        }
        self.ccdf[omega - 1].eval_clamped(c)
    }

    /// `F(0..m | c)`, clamped into `[0, 1]` and made nonincreasing in ω.
    pub fn ccdf_at(&self, c: f64) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.m());
        out.push(1.0);
        let mut prev = 1.0f64;
        for f in &self.ccdf {
            let y = f.eval_clamped(c).clamp(0.0, 1.0).min(prev);
            out.push(y);
            prev = y;
        }
        out
    }

    pub fn distribution_at(&self, c: f64) -> Distribution {
        Distribution::from_ccdf_tail(&self.ccdf_at(c)[1..])
    }

    fn candidate_at(&self, c: f64) -> Candidate {
        Candidate { cost: c, ccdf: self.ccdf_at(c) }
    }

    /// Breakpoint costs of every `F(ω|·)` in `[0, cost_max]`, plus 0 and
    /// `cost_max`, ascending and distinct.
    pub fn breakpoint_costs(&self) -> Vec<f64> {
        let mut cs: Vec<f64> = self
            .ccdf
            .iter()
            .flat_map(|f| f.xs().iter().copied())
            .filter(|&x| x <= self.cost_max)
            .chain([0.0, self.cost_max])
            .map(|x| x.clamp(0.0, 1.0))
            .collect();
        cs.sort_by(f64::total_cmp);
        cs.dedup();
        cs
    }

    /// The actions that suffice for any best response or optimal contract.
    pub fn candidates(&self) -> &[Candidate] {
        &self.candidates
    }

    /// One action per breakpoint cost; cost 0 becomes the null action.
    pub fn to_finite(&self) -> Result<FiniteInstance> {
        let actions = self.candidates.iter().map(|c| Action::new(c.cost, c.distribution())).collect();
        FiniteInstance::new(self.outcomes.clone(), actions)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn lin(points: &[(f64, f64)]) -> PiecewiseLinearFn {
        PiecewiseLinearFn::new(points.to_vec()).unwrap()
    }

    #[test]
    fn rejects_convex_ccdf() {
        let os = OutcomeSpace::new(vec![0.0, 1.0]).unwrap();
        let f = lin(&[(0.0, 0.0), (0.5, 0.1), (1.0, 0.5)]);
        let err = CcdfInstance::new(os, vec![f], 1.0).unwrap_err();
        assert!(matches!(err, Error::Cdfp(CdfpViolation { omega: 1, triple: (0, 1, 2) })));
    }

    #[test]
    fn rejects_unnested_and_nonzero_origin() {
        let os = OutcomeSpace::new(vec![0.0, 0.5, 1.0]).unwrap();
        let a = lin(&[(0.0, 0.0), (1.0, 0.3)]);
        let b = lin(&[(0.0, 0.0), (1.0, 0.5)]);
        assert!(CcdfInstance::new(os.clone(), vec![a.clone(), b.clone()], 1.0).is_err());
        assert!(CcdfInstance::new(os.clone(), vec![b.clone(), a.clone()], 1.0).is_ok());
        let c = lin(&[(0.0, 0.1), (1.0, 0.5)]);
        assert!(CcdfInstance::new(os, vec![c, a], 1.0).is_err());
    }

    #[test]
    fn rejects_growth_beyond_cost_max() {
        let os = OutcomeSpace::new(vec![0.0, 1.0]).unwrap();
        let f = lin(&[(0.0, 0.0), (1.0, 0.5)]);
        assert!(CcdfInstance::new(os, vec![f], 0.5).is_err());
    }

    #[test]
    fn null_only_instance_is_allowed() {
        let os = OutcomeSpace::new(vec![0.2, 1.0]).unwrap();
        let inst = CcdfInstance::new(os, vec![lin(&[(0.0, 0.0), (1.0, 0.0)])], 0.0).unwrap();
        assert_eq!(inst.breakpoint_costs(), vec![0.0]);
        let fin = inst.to_finite().unwrap();
        assert_eq!(fin.n(), 1);
        assert!(fin.actions()[0].is_null());
    }

    #[test]
    fn candidates_cover_breakpoints_and_ends() {
        let os = OutcomeSpace::new(vec![0.0, 0.5, 1.0]).unwrap();
        let f1 = lin(&[(0.0, 0.0), (0.3, 0.6), (0.7, 0.8), (1.0, 0.8)]);
        let f2 = lin(&[(0.0, 0.0), (0.5, 0.4), (1.0, 0.4)]);
        let inst = CcdfInstance::new(os, vec![f1, f2], 0.7).unwrap();
        assert_eq!(inst.breakpoint_costs(), vec![0.0, 0.3, 0.5, 0.7]);
        let c = &inst.candidates()[2];
        assert_eq!(c.cost, 0.5);
        assert!((c.ccdf[1] - 0.7).abs() < 1e-12);
        assert!((c.ccdf[2] - 0.4).abs() < 1e-12);
        assert!((inst.distribution_at(0.5).pmf()[1] - 0.3).abs() < 1e-12);
    }
}
