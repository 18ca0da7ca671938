//! Optimal linear contracts `p = ρ·v` via the upper envelope of agent lines.

use alloc::vec::Vec;

use crate::agent::best_response_finite;
use crate::error::Result;
use crate::finite::FiniteInstance;
use crate::model::Contract;

/// Offset used to probe just right of an envelope switch point.
const RIGHT_PROBE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct LinearContractResult {
    pub rho: f64,
    pub lin: f64,
    pub action: usize,
    /// Switch points of the agent's upper envelope inside `[0, 1]`.
    pub breakpoints: Vec<f64>,
}

/// Switch points of `max_a ρ·V_a − c_a` over `ρ ∈ [0, 1]`, walking right from 0.
fn envelope_breakpoints(vals: &[f64], costs: &[f64]) -> Vec<f64> {
    let line = |a: usize, rho: f64| rho * vals[a] - costs[a];
    let mut cur = 0;
    for a in 1..vals.len() {
        let (u, best) = (line(a, 0.0), line(cur, 0.0));
        if u > best || (u == best && vals[a] > vals[cur]) {
            cur = a;
        }
    }
    let mut rho = 0.0;
    let mut out = Vec::new();
    loop {
        let mut next: Option<(f64, usize)> = None;
        for b in 0..vals.len() {
            let dv = vals[b] - vals[cur];
            if dv <= 0.0 {
                continue;
            }
            let x = ((costs[b] - costs[cur]) / dv).max(rho);
            next = match next {
                Some((nx, nb)) if nx < x || (nx == x && vals[nb] >= vals[b]) => Some((nx, nb)),
                _ => Some((x, b)),
            };
        }
        match next {
            Some((x, b)) if x <= 1.0 => {
                if out.last() != Some(&x) {
                    out.push(x);
                }
                rho = x;
                cur = b;
            }
            _ => return out,
        }
    }
}

/// Best `ρ ∈ [0, 1]`, evaluating the principal at both ends, every envelope
/// switch point and just right of it.
pub fn optimal_linear_contract(instance: &FiniteInstance) -> Result<LinearContractResult> {
    let v = instance.outcomes().values();
    let vals: Vec<f64> = instance.actions().iter().map(|a| a.dist.expect(v)).collect();
    let breakpoints = envelope_breakpoints(&vals, &instance.costs());
    let mut probes = Vec::with_capacity(2 * breakpoints.len() + 2);
    probes.push(0.0);
    for &b in &breakpoints {
        probes.push(b);
        probes.push((b + RIGHT_PROBE).min(1.0));
    }
    probes.push(1.0);
    let mut best: Option<(f64, f64, usize)> = None;
    for rho in probes {
        let br = best_response_finite(instance, &Contract::linear(rho, instance.outcomes()))?;
        if best.map_or(true, |(_, u, _)| br.principal_utility > u) {
            best = Some((rho, br.principal_utility, br.action));
        }
    }
    let (rho, lin, action) = best.expect("probes are nonempty");
    Ok(LinearContractResult { rho, lin, action, breakpoints })
}
