//! Outcomes, outcome distributions, contracts and the two distribution
//! metrics.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::TOL;

/// Outcomes `0..m` with principal values sorted ascending in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeSpace {
    values: Vec<f64>,
}

impl OutcomeSpace {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InvalidInstance(format!("need at least 2 outcomes, got {}", values.len())));
        }
        for (w, &v) in values.iter().enumerate() {
            if !v.is_finite() || !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidInstance(format!("value v_{w} = {v} outside [0, 1]")));
            }
            if w > 0 && v < values[w - 1] {
                return Err(Error::InvalidInstance(format!(
                    "values not sorted: v_{} = {} > v_{w} = {v}",
                    w - 1,
                    values[w - 1]
                )));
            }
        }
        Ok(Self { values })
    }

    pub fn m(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Value increments `u_ω = v_ω − v_{ω−1}` with `v_{−1} = 0`.
    pub fn increments(&self) -> Vec<f64> {
        increments(&self.values)
    }
}

pub(crate) fn increments(xs: &[f64]) -> Vec<f64> {
    let mut prev = 0.0;
    xs.iter()
        .map(|&x| {
            let d = x - prev;
            prev = x;
            d
        })
        .collect()
}

/// Probability mass function over `0..m`.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    pmf: Vec<f64>,
}

impl Distribution {
    /// Checked constructor: entries nonnegative, sum one within [`TOL`].
    pub fn new(pmf: Vec<f64>) -> Result<Self> {
        let d = Self { pmf };
        d.check()?;
        Ok(d)
    }

    /// Wraps a pmf without checking it; used for ingesting raw files that are
    /// validated afterwards.
    pub fn from_pmf_unchecked(pmf: Vec<f64>) -> Self {
        Self { pmf }
    }

    pub fn point_mass(m: usize, outcome: usize) -> Self {
        let mut pmf = alloc::vec![0.0; m];
        pmf[outcome] = 1.0;
        Self { pmf }
    }

    /// Builds a distribution from complementary-CDF values `F(1..m)`
    /// (`F(0) = 1` is implied). Values are clamped to `[0, 1]` and made
    /// nonincreasing before differencing.
    pub fn from_ccdf_tail(tail: &[f64]) -> Self {
        let m = tail.len() + 1;
        let mut ccdf = Vec::with_capacity(m + 1);
        ccdf.push(1.0);
        let mut prev = 1.0f64;
        for &t in tail {
            let t = t.clamp(0.0, 1.0).min(prev);
            ccdf.push(t);
            prev = t;
        }
        ccdf.push(0.0);
        let pmf = (0..m).map(|w| ccdf[w] - ccdf[w + 1]).collect();
        Self { pmf }
    }

    pub fn check(&self) -> Result<()> {
        if self.pmf.is_empty() {
            return Err(Error::InvalidDistribution("empty pmf".into()));
        }
        let mut sum = 0.0;
        for (w, &p) in self.pmf.iter().enumerate() {
            if !p.is_finite() || p < -TOL {
                return Err(Error::InvalidDistribution(format!("f({w}) = {p} is negative")));
            }
            sum += p;
        }
        if (sum - 1.0).abs() > TOL {
            return Err(Error::InvalidDistribution(format!("pmf sums to {sum}")));
        }
        Ok(())
    }

    pub fn m(&self) -> usize {
        self.pmf.len()
    }

    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    /// `F(ω) = Σ_{ω' ≥ ω} f(ω')` for `ω = 0..m`.
    pub fn ccdf(&self) -> Vec<f64> {
        let mut out = alloc::vec![0.0; self.pmf.len()];
        let mut acc = 0.0;
        for w in (0..self.pmf.len()).rev() {
            acc += self.pmf[w];
            out[w] = acc;
        }
        out
    }

    pub fn expect(&self, h: &[f64]) -> f64 {
        self.pmf.iter().zip(h).map(|(p, x)| p * x).sum()
    }

    /// `Σ λ_i D_i`; weights are assumed to sum to one.
    pub fn mixture(parts: &[(&Distribution, f64)]) -> Result<Self> {
        let m = parts.first().map(|(d, _)| d.m()).ok_or(Error::InvalidDistribution("empty mixture".into()))?;
        let mut pmf = alloc::vec![0.0; m];
        for (d, w) in parts {
            if d.m() != m {
                return Err(Error::DimensionMismatch { expected: m, got: d.m() });
            }
            for (acc, p) in pmf.iter_mut().zip(d.pmf()) {
                *acc += w * p;
            }
        }
        Ok(Self { pmf })
    }
}

fn same_m(d: &Distribution, d2: &Distribution) -> Result<()> {
    if d.m() != d2.m() {
        return Err(Error::DimensionMismatch { expected: d.m(), got: d2.m() });
    }
    Ok(())
}

/// `½ Σ_ω |f(ω) − f̃(ω)|`.
pub fn tv_distance(d: &Distribution, d2: &Distribution) -> Result<f64> {
    same_m(d, d2)?;
    Ok(0.5 * d.pmf.iter().zip(&d2.pmf).map(|(a, b)| (a - b).abs()).sum::<f64>())
}

/// `max_ω |F(ω) − F̃(ω)|` over complementary CDFs.
pub fn kol_distance(d: &Distribution, d2: &Distribution) -> Result<f64> {
    same_m(d, d2)?;
    let (mut fa, mut fb, mut best) = (0.0, 0.0, 0.0f64);
    for w in (0..d.m()).rev() {
        fa += d.pmf[w];
        fb += d2.pmf[w];
        best = best.max((fa - fb).abs());
    }
    Ok(best)
}

/// Uniform distribution over the observed outcomes.
pub fn empirical_distribution(samples: &[usize], m: usize) -> Result<Distribution> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    let mut counts = alloc::vec![0u64; m];
    for &s in samples {
        if s >= m {
            return Err(Error::DimensionMismatch { expected: m, got: s + 1 });
        }
        counts[s] += 1;
    }
    Ok(from_counts(&counts))
}

pub(crate) fn from_counts(counts: &[u64]) -> Distribution {
    let n: u64 = counts.iter().sum();
    let n = n.max(1) as f64;
    Distribution { pmf: counts.iter().map(|&c| c as f64 / n).collect() }
}

/// Nonnegative payment per outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct Contract {
    payments: Vec<f64>,
}

impl Contract {
    pub fn new(payments: Vec<f64>) -> Result<Self> {
        for (w, &p) in payments.iter().enumerate() {
            if !p.is_finite() || p < 0.0 {
                return Err(Error::param("payments", format!("p_{w} = {p} must be finite and nonnegative")));
            }
        }
        Ok(Self { payments })
    }

    pub fn zero(m: usize) -> Self {
        Self { payments: alloc::vec![0.0; m] }
    }

    /// `p_ω = ρ·v_ω`.
    pub fn linear(rho: f64, outcomes: &OutcomeSpace) -> Self {
        Self { payments: outcomes.values().iter().map(|v| rho * v).collect() }
    }

    pub(crate) fn from_clamped(payments: Vec<f64>, cap: f64) -> Self {
        Self { payments: payments.into_iter().map(|p| p.clamp(0.0, cap)).collect() }
    }

    pub fn payments(&self) -> &[f64] {
        &self.payments
    }

    pub fn m(&self) -> usize {
        self.payments.len()
    }

    pub fn max_payment(&self) -> f64 {
        self.payments.iter().copied().fold(0.0, f64::max)
    }

    pub fn is_bounded_by(&self, h: f64) -> bool {
        self.payments.iter().all(|&p| p <= h + TOL)
    }
}
