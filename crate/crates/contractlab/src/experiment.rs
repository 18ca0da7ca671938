//! Experiment configs and the seeded trial runners behind `learn` and
//! `hardness`.

use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use contractlab_core::hardness::{
    gen_additive_hardness, gen_multiplicative_hardness, gen_random_finite, verify_gap, verify_mixed_approx,
    HardnessParams,
};
use contractlab_core::learners::{
    action_query_constant, learn_action_query, learn_contract_query, InitPlan, LearnerConfig, LearnerReport,
};
use contractlab_core::rng::derive_seed;
use contractlab_core::{Contract, FiniteInstance, Hidden, OracleSession, QueryMode};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::instance_file::{Instance, InstanceFile};
use crate::report::{GapRow, LearnRow, MixedRow, TraceRow};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum LearnMode {
    Action,
    Contract,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum HardnessKind {
    Mult,
    Add,
    Mixed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LearnExperiment {
    pub mode: LearnMode,
    pub instance: PathBuf,
    #[serde(default)]
    pub insert_null: bool,
    pub eps: f64,
    pub delta: f64,
    pub h: f64,
    pub seeds: Vec<u64>,
    #[serde(default = "one")]
    pub sample_constant_c: f64,
    /// Overrides `sample_constant_c` so each action is sampled exactly this often.
    #[serde(default)]
    pub samples_per_action: Option<u64>,
    #[serde(default)]
    pub max_refinement_iterations: Option<usize>,
    #[serde(default = "two")]
    pub hoeffding_k: f64,
    #[serde(default)]
    pub init_band: Option<f64>,
    #[serde(default)]
    pub oracle_accuracy: Option<f64>,
    /// Refuse contract-mode runs whose initialization would exceed this many queries.
    #[serde(default = "default_query_budget")]
    pub max_init_queries: u64,
    #[serde(default)]
    pub trace: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HardnessExperiment {
    pub which: HardnessKind,
    pub eps: Vec<f64>,
    pub h: f64,
    pub n: usize,
    #[serde(default)]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    /// Mixed mode: also check the two hardness families.
    #[serde(default = "yes")]
    pub families: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum ExperimentConfig {
    Learn(LearnExperiment),
    Hardness(HardnessExperiment),
}

fn one() -> f64 {
    1.0
}

fn two() -> f64 {
    2.0
}

fn yes() -> bool {
    true
}

fn default_query_budget() -> u64 {
    10_000_000_000
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("configs always serialize")
    }
}

impl LearnExperiment {
    pub fn learner_config(&self, seed: u64) -> LearnerConfig {
        LearnerConfig {
            sample_constant_c: self.sample_constant_c,
            max_refinement_iterations: self.max_refinement_iterations,
            seed,
            hoeffding_k: self.hoeffding_k,
            init_band: self.init_band,
            oracle_accuracy: self.oracle_accuracy,
            ..LearnerConfig::new(self.eps, self.delta, self.h)
        }
    }
}

/// One finished trial.
#[derive(Debug, Clone)]
pub struct Trial {
    pub row: LearnRow,
    pub report: LearnerReport,
    pub trace: Vec<TraceRow>,
}

/// Runs one trial per seed in parallel; rows come back sorted by seed.
pub fn run_learn(exp: &LearnExperiment, instance: &Instance) -> Result<Vec<Trial>> {
    let hidden = match (exp.mode, instance) {
        (LearnMode::Action, Instance::Finite(i)) => Hidden::Finite(i),
        (LearnMode::Action, Instance::Ccdf(_)) => bail!("action mode needs a finite instance"),
        (LearnMode::Contract, Instance::Finite(i)) => {
            i.check_fosd().map_err(|v| anyhow!("{v}"))?;
            i.check_cdfp().map_err(|v| anyhow!("{v}"))?;
            Hidden::Finite(i)
        }
        (LearnMode::Contract, Instance::Ccdf(i)) => Hidden::Ccdf(i),
    };
    let base = exp.learner_config(0);
    base.validate()?;
    if exp.mode == LearnMode::Contract {
        let plan = InitPlan::new(&base, hidden.m())?;
        let total = plan.total_queries(hidden.m());
        if total > exp.max_init_queries {
            bail!(
                "initialization needs {total} queries ({} slopes x {} samples per outcome); \
                 relax --init-band / --oracle-accuracy or raise --max-init-queries",
                plan.slopes_per_outcome,
                plan.samples_per_slope
            );
        }
    }
    let mut trials = exp
        .seeds
        .par_iter()
        .map(|&seed| run_trial(exp, hidden, seed).with_context(|| format!("seed {seed}")))
        .collect::<Result<Vec<_>>>()?;
    trials.sort_by_key(|t| t.row.seed);
    Ok(trials)
}

fn run_trial(exp: &LearnExperiment, hidden: Hidden<'_>, seed: u64) -> Result<Trial> {
    let mut config = exp.learner_config(seed);
    let mode = match exp.mode {
        LearnMode::Action => QueryMode::Action,
        LearnMode::Contract => QueryMode::Contract,
    };
    let mut session = OracleSession::new(hidden, mode, derive_seed(seed, mode.as_str()));
    if exp.trace {
        session = session.with_trace();
    }
    let mut report = match (exp.mode, hidden) {
        (LearnMode::Action, Hidden::Finite(inst)) => {
            if let Some(n) = exp.samples_per_action {
                config.sample_constant_c = action_query_constant(&config, inst.m(), inst.n(), n);
            }
            learn_action_query(&mut session, &inst.costs(), &config)?
        }
        (LearnMode::Action, Hidden::Ccdf(_)) => bail!("action mode needs a finite instance"),
        (LearnMode::Contract, _) => learn_contract_query(&mut session, &config)?,
    };
    report.evaluate_against(hidden, exp.h)?;
    let true_utility = report.true_utility.expect("evaluated");
    let opt_h_truth = report.opt_h_truth.expect("evaluated");
    let row = LearnRow {
        seed,
        mode: mode.as_str().to_string(),
        eps: exp.eps,
        delta: exp.delta,
        h: exp.h,
        c: config.sample_constant_c,
        queries: report.queries,
        init_queries: report.init_queries,
        iterations: report.iterations,
        bound_exceeded: report.bound_exceeded,
        est_utility: report.est_utility,
        true_utility,
        opt_h_truth,
        within_eps: true_utility >= opt_h_truth - exp.eps,
    };
    let trace = session
        .trace()
        .unwrap_or_default()
        .iter()
        .map(|t| TraceRow {
            query_index: t.query_index,
            mode: t.mode.as_str().to_string(),
            descriptor: t.descriptor.clone(),
            outcome: t.outcome,
        })
        .collect();
    Ok(Trial { row, report, trace })
}

/// A generated hardness instance with its gap report.
#[derive(Debug, Clone)]
pub struct GapRun {
    pub row: GapRow,
    pub instance: InstanceFile,
}

pub fn run_gap(kind: HardnessKind, eps: f64, h: f64, n: usize) -> Result<GapRun> {
    let params = HardnessParams::new(eps, h, n);
    let (family, inst, cert): (&str, FiniteInstance, Option<Contract>) = match kind {
        HardnessKind::Add => ("add", gen_additive_hardness(params)?, None),
        HardnessKind::Mult => {
            let g = gen_multiplicative_hardness(params)?;
            ("mult", g.finite, Some(g.certificate))
        }
        HardnessKind::Mixed => bail!("mixed has no gap report"),
    };
    let rep = verify_gap(&inst, h, cert.as_ref())?;
    Ok(GapRun {
        row: GapRow {
            family: family.to_string(),
            eps,
            h,
            n: inst.n(),
            opt: rep.opt,
            opt_h: rep.opt_h,
            ratio: rep.ratio,
            gap: rep.gap,
        },
        instance: InstanceFile::from_finite(&inst),
    })
}

/// Mixed-approximation check over `trials` random finite instances and,
/// optionally, both hardness families at `ε = 0.01`.
pub fn run_mixed(exp: &HardnessExperiment) -> Result<Vec<MixedRow>> {
    let mut sources: Vec<(String, u64)> =
        (0..exp.trials as u64).map(|i| ("random".to_string(), derive_seed(exp.seed, &format!("mixed/{i}")))).collect();
    if exp.families {
        sources.push(("add".into(), 0));
        sources.push(("mult".into(), 0));
    }
    let per_source = sources
        .par_iter()
        .map(|(source, seed)| -> Result<Vec<MixedRow>> {
            let (inst, cert) = match source.as_str() {
                "add" => (gen_additive_hardness(HardnessParams::new(0.01, exp.h, 0))?, None),
                "mult" => {
                    let g = gen_multiplicative_hardness(HardnessParams::new(0.01, exp.h, exp.n.max(2)))?;
                    (g.finite, Some(g.certificate))
                }
                _ => {
                    let m = 2 + (*seed % 4) as usize;
                    let n = 2 + ((*seed >> 8) % 7) as usize;
                    (gen_random_finite(m, n, *seed)?, None)
                }
            };
            let rep = verify_mixed_approx(&inst, &exp.eps, cert.as_ref())?;
            let violations = rep.violations();
            Ok(rep
                .rows
                .iter()
                .map(|r| MixedRow {
                    source: source.clone(),
                    seed: *seed,
                    eps: r.eps,
                    opt: rep.opt,
                    lin: rep.lin,
                    bound: r.bound,
                    holds: r.holds,
                    violations,
                })
                .collect())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(per_source.into_iter().flatten().collect())
}
