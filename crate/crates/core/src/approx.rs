//! Robustified contracts and the ε-approximation check between instances.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::finite::Action;
use crate::lp::{solve_lp, Direction, LpOutcome, LpProblem, Sense};
use crate::model::{Contract, Distribution, OutcomeSpace};

/// `p_ω + (ε/2)(v_ω − p_ω)`.
pub fn robustify(contract: &Contract, outcomes: &OutcomeSpace, eps: f64) -> Result<Contract> {
    if !(eps > 0.0 && eps <= 0.5) {
        return Err(Error::param("eps", format!("{eps} not in (0, 1/2]")));
    }
    if contract.m() != outcomes.m() {
        return Err(Error::DimensionMismatch { expected: outcomes.m(), got: contract.m() });
    }
    let half = eps / 2.0;
    let p = contract.payments().iter().zip(outcomes.values()).map(|(p, v)| p + half * (v - p)).collect();
    Contract::new(p)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Tv,
    Kol,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpsApproximation {
    pub is_approximation: bool,
    /// Mixture weights over the pool minimizing the distance under the cost
    /// band; `None` when no mixture meets the cost band.
    pub witness: Option<Vec<f64>>,
    pub distance: Option<f64>,
    pub cost_bound: f64,
    pub distance_bound: f64,
}

/// Mixture `λ` of `pool` with `|Σλc − cost| ≤ cost_tol` minimizing the
/// chosen distance to `dist`. Returns `(λ, distance)`, or `None` if the cost
/// band cannot be met.
pub fn closest_mixture(
    cost: f64,
    dist: &Distribution,
    pool: &[Action],
    cost_tol: f64,
    metric: Metric,
) -> Result<Option<(Vec<f64>, f64)>> {
    let n = pool.len();
    let m = dist.m();
    if n == 0 {
        return Err(Error::InvalidInstance("empty pool".into()));
    }
    if let Some(a) = pool.iter().find(|a| a.dist.m() != m) {
        return Err(Error::DimensionMismatch { expected: m, got: a.dist.m() });
    }
    // variables: λ (n), then tv splits s_ω (m) or the kol bound t (1)
    let extra = match metric {
        Metric::Tv => m,
        Metric::Kol => 1,
    };
    let width = n + extra;
    let mut obj = vec![0.0; width];
    match metric {
        Metric::Tv => obj[n..].iter_mut().for_each(|v| *v = 0.5),
        Metric::Kol => obj[n] = 1.0,
    }
    let mut lp = LpProblem::new(Direction::Minimize, obj);
    let mut row = vec![0.0; width];
    row[..n].iter_mut().for_each(|v| *v = 1.0);
    lp.add_constraint(row, Sense::Eq, 1.0);
    let mut row = vec![0.0; width];
    for (r, a) in row.iter_mut().zip(pool) {
        *r = a.cost;
    }
    lp.add_constraint(row.clone(), Sense::Le, cost + cost_tol);
    lp.add_constraint(row, Sense::Ge, cost - cost_tol);

    let (target, rows): (Vec<f64>, Vec<Vec<f64>>) = match metric {
        Metric::Tv => (dist.pmf().to_vec(), pool.iter().map(|a| a.dist.pmf().to_vec()).collect()),
        Metric::Kol => (dist.ccdf(), pool.iter().map(|a| a.dist.ccdf()).collect()),
    };
    let range = match metric {
        Metric::Tv => 0..m,
        Metric::Kol => 1..m,
    };
    for w in range {
        let slack = match metric {
            Metric::Tv => n + w,
            Metric::Kol => n,
        };
        // ±(Σ λ_a g_a(ω) − g(ω)) ≤ slack
        let mut up = vec![0.0; width];
        let mut down = vec![0.0; width];
        for (a, g) in rows.iter().enumerate() {
            up[a] = g[w];
            down[a] = -g[w];
        }
        up[slack] = -1.0;
        down[slack] = -1.0;
        lp.add_constraint(up, Sense::Le, target[w]);
        lp.add_constraint(down, Sense::Le, -target[w]);
    }
    match solve_lp(&lp)? {
        LpOutcome::Optimal(s) => {
            let lambda: Vec<f64> = s.x[..n].iter().map(|v| v.max(0.0)).collect();
            let total: f64 = lambda.iter().sum();
            let lambda: Vec<f64> = lambda.into_iter().map(|v| v / total).collect();
            let mix = mixture_of(pool, &lambda)?;
            let d = match metric {
                Metric::Tv => crate::model::tv_distance(dist, &mix)?,
                Metric::Kol => crate::model::kol_distance(dist, &mix)?,
            };
            Ok(Some((lambda, d)))
        }
        LpOutcome::Infeasible => Ok(None),
        LpOutcome::Unbounded => Err(Error::MalformedLp("mixture LP unbounded".into())),
    }
}

fn mixture_of(pool: &[Action], lambda: &[f64]) -> Result<Distribution> {
    let parts: Vec<(&Distribution, f64)> = pool.iter().zip(lambda).map(|(a, &l)| (&a.dist, l)).collect();
    Distribution::mixture(&parts)
}

/// Whether `(cost, dist)` has an ε-approximation in `pool`: a mixture within
/// `ε²/16` in cost and `ε²/(32H)` in tv (`ε²/(32mH)` in kol).
pub fn check_eps_approximation(
    cost: f64,
    dist: &Distribution,
    pool: &[Action],
    eps: f64,
    h: f64,
    metric: Metric,
) -> Result<EpsApproximation> {
    if !(eps > 0.0) || !(h > 0.0) {
        return Err(Error::param("eps", format!("eps = {eps}, H = {h} must be positive")));
    }
    let cost_bound = eps * eps / 16.0;
    let distance_bound = match metric {
        Metric::Tv => eps * eps / (32.0 * h),
        Metric::Kol => eps * eps / (32.0 * dist.m() as f64 * h),
    };
    let found = closest_mixture(cost, dist, pool, cost_bound, metric)?;
    let (witness, distance) = match found {
        Some((l, d)) => (Some(l), Some(d)),
        None => (None, None),
    };
    let is_approximation = distance.is_some_and(|d| d <= distance_bound + 1e-12);
    Ok(EpsApproximation { is_approximation, witness, distance, cost_bound, distance_bound })
}
