use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use contractlab::experiment::{run_gap, run_learn, run_mixed};
use contractlab::report::{csv_string, CsvRow, GAP_SCHEMA, LEARN_SCHEMA, MIXED_SCHEMA, TRACE_SCHEMA};
use contractlab::{
    ExperimentConfig, HardnessExperiment, HardnessKind, Instance, InstanceFile, LearnExperiment, LearnMode,
    LoadOptions, OUT_DIR_ENV,
};
use contractlab_core::{
    optimal_bounded_contract, optimal_bounded_contract_ccdf, optimal_general_contract, optimal_linear_contract,
    Contract, OptimalContractResult,
};

#[derive(Parser)]
#[command(
    name = "contractlab",
    version,
    about = "Optimal and learned contracts for hidden-action principal-agent problems"
)]
struct Cli {
    /// Directory for CSV and instance output; stdout when unset.
    #[arg(long, global = true, env = OUT_DIR_ENV)]
    out_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check an instance file against the model's invariants.
    Validate(InstanceArgs),
    /// Optimal H-bounded contract (unbounded when --H is omitted).
    Solve {
        #[command(flatten)]
        instance: InstanceArgs,
        #[arg(long = "H", alias = "h")]
        h: Option<f64>,
    },
    /// Optimal linear contract.
    Lin(InstanceArgs),
    /// Run a learner over several seeds against a hidden instance.
    Learn(LearnArgs),
    /// Generate hardness instances and check the approximation gaps.
    Hardness(HardnessArgs),
}

#[derive(Args)]
struct InstanceArgs {
    path: PathBuf,
    /// Add the null action when the file has none.
    #[arg(long)]
    insert_null: bool,
}

#[derive(Args)]
struct LearnArgs {
    #[arg(value_enum, required_unless_present = "config")]
    mode: Option<LearnMode>,
    #[arg(required_unless_present = "config")]
    path: Option<PathBuf>,
    /// Read every other setting from an experiment config file.
    #[arg(long, conflicts_with_all = ["mode", "path"])]
    config: Option<PathBuf>,
    /// Write the effective config to this file.
    #[arg(long)]
    save_config: Option<PathBuf>,
    #[arg(long)]
    insert_null: bool,
    #[arg(long, default_value_t = 0.1)]
    eps: f64,
    #[arg(long, default_value_t = 0.1)]
    delta: f64,
    #[arg(long = "H", alias = "h", default_value_t = 1.0)]
    h: f64,
    /// Comma-separated seeds; overrides --trials.
    #[arg(long, value_delimiter = ',')]
    seeds: Vec<u64>,
    /// Seeds 0..trials.
    #[arg(long, default_value_t = 20)]
    trials: u64,
    #[arg(long = "C", alias = "c", default_value_t = 1.0)]
    c: f64,
    /// Action mode: sample each action exactly this often.
    #[arg(long)]
    samples_per_action: Option<u64>,
    #[arg(long)]
    max_iterations: Option<usize>,
    #[arg(long, default_value_t = 2.0)]
    hoeffding_k: f64,
    #[arg(long)]
    init_band: Option<f64>,
    #[arg(long)]
    oracle_accuracy: Option<f64>,
    #[arg(long, default_value_t = 10_000_000_000)]
    max_init_queries: u64,
    /// Write one sample-trace CSV per seed (needs --out-dir).
    #[arg(long)]
    trace: bool,
}

#[derive(Args)]
struct HardnessArgs {
    #[arg(value_enum)]
    which: HardnessKind,
    /// Repeatable; mixed defaults to 1/8 and 1/32, the others to 0.01.
    #[arg(long)]
    eps: Vec<f64>,
    #[arg(long = "H", alias = "h", default_value_t = 1.0)]
    h: f64,
    /// Grid points of the multiplicative family.
    #[arg(long, default_value_t = 200)]
    n: usize,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Mixed mode: skip the two hardness families.
    #[arg(long)]
    no_families: bool,
    #[arg(long)]
    save_config: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    let out_dir = cli.out_dir.as_deref();
    match cli.command {
        Command::Validate(a) => validate(&a),
        Command::Solve { instance, h } => solve(&instance, h),
        Command::Lin(a) => lin(&a),
        Command::Learn(a) => learn(a, out_dir),
        Command::Hardness(a) => hardness(a, out_dir),
    }
}

fn load(a: &InstanceArgs) -> Result<Instance> {
    let file = InstanceFile::read(&a.path)?;
    Ok(file.build(LoadOptions { insert_null: a.insert_null })?)
}

fn validate(a: &InstanceArgs) -> Result<ExitCode> {
    let file = InstanceFile::read(&a.path)?;
    let opts = LoadOptions { insert_null: a.insert_null };
    if file.actions.is_some() {
        let report = file.validate(opts)?;
        if !report.is_ok() {
            println!("invalid");
            for v in &report.violations {
                println!("violation: {v}");
            }
            return Ok(ExitCode::FAILURE);
        }
    }
    match file.build(opts) {
        Ok(Instance::Finite(i)) => {
            println!("ok: finite instance, m={}, n={}", i.m(), i.n());
            match i.check_fosd() {
                Ok(()) => println!("fosd: true"),
                Err(v) => println!("fosd: false ({v})"),
            }
            match i.check_cdfp() {
                Ok(()) => println!("cdfp: true"),
                Err(v) => println!("cdfp: false ({v})"),
            }
        }
        Ok(Instance::Ccdf(i)) => println!("ok: ccdf instance, m={}, cost_max={}", i.m(), i.cost_max()),
        Err(e) => {
            println!("invalid");
            println!("violation: {e}");
            return Ok(ExitCode::FAILURE);
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn fmt_contract(c: &Contract) -> String {
    let parts: Vec<String> = c.payments().iter().map(|p| format!("{p}")).collect();
    format!("[{}]", parts.join(", "))
}

fn print_result(r: &OptimalContractResult) {
    println!("principal_utility={}", r.principal_utility);
    println!("action={} cost={}", r.action, r.cost);
    println!("expected_payment={}", r.expected_payment);
    println!("H={}", r.h);
    println!("contract={}", fmt_contract(&r.contract));
}

fn solve(a: &InstanceArgs, h: Option<f64>) -> Result<ExitCode> {
    let r = match (load(a)?, h) {
        (Instance::Finite(i), Some(h)) => optimal_bounded_contract(&i, h)?,
        (Instance::Finite(i), None) => optimal_general_contract(&i)?,
        (Instance::Ccdf(i), Some(h)) => optimal_bounded_contract_ccdf(&i, h)?,
        (Instance::Ccdf(_), None) => bail!("ccdf instances need --H"),
    };
    print_result(&r);
    Ok(ExitCode::SUCCESS)
}

fn lin(a: &InstanceArgs) -> Result<ExitCode> {
    let inst = match load(a)? {
        Instance::Finite(i) => i,
        Instance::Ccdf(i) => i.to_finite()?,
    };
    let r = optimal_linear_contract(&inst)?;
    println!("rho={}", r.rho);
    println!("LIN={}", r.lin);
    println!("action={}", r.action);
    Ok(ExitCode::SUCCESS)
}

fn emit<R: CsvRow>(out_dir: Option<&Path>, name: &str, schema: &str, rows: &[R]) -> Result<()> {
    let text = csv_string(schema, rows);
    match out_dir {
        Some(dir) => {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            let path = dir.join(name);
            fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
            eprintln!("wrote {}", path.display());
        }
        None => io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn save_config(path: Option<&Path>, cfg: &ExperimentConfig) -> Result<()> {
    if let Some(p) = path {
        fs::write(p, cfg.to_json() + "\n").with_context(|| format!("writing {}", p.display()))?;
    }
    Ok(())
}

fn learn(a: LearnArgs, out_dir: Option<&Path>) -> Result<ExitCode> {
    let exp = match &a.config {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            match ExperimentConfig::from_json(&text).with_context(|| format!("parsing {}", p.display()))? {
                ExperimentConfig::Learn(e) => e,
                ExperimentConfig::Hardness(_) => bail!("{} is a hardness config", p.display()),
            }
        }
        None => LearnExperiment {
            mode: a.mode.expect("required by clap"),
            instance: a.path.clone().expect("required by clap"),
            insert_null: a.insert_null,
            eps: a.eps,
            delta: a.delta,
            h: a.h,
            seeds: if a.seeds.is_empty() { (0..a.trials).collect() } else { a.seeds.clone() },
            sample_constant_c: a.c,
            samples_per_action: a.samples_per_action,
            max_refinement_iterations: a.max_iterations,
            hoeffding_k: a.hoeffding_k,
            init_band: a.init_band,
            oracle_accuracy: a.oracle_accuracy,
            max_init_queries: a.max_init_queries,
            trace: a.trace,
        },
    };
    save_config(a.save_config.as_deref(), &ExperimentConfig::Learn(exp.clone()))?;
    if exp.trace && out_dir.is_none() {
        bail!("--trace needs --out-dir or {OUT_DIR_ENV}");
    }
    let inst = InstanceFile::read(&exp.instance)?.build(LoadOptions { insert_null: exp.insert_null })?;
    let trials = run_learn(&exp, &inst)?;
    let mode = match exp.mode {
        LearnMode::Action => "action",
        LearnMode::Contract => "contract",
    };
    if exp.trace {
        for t in &trials {
            emit(out_dir, &format!("trace_{mode}_{}.csv", t.row.seed), TRACE_SCHEMA, &t.trace)?;
        }
    }
    let rows: Vec<_> = trials.into_iter().map(|t| t.row).collect();
    let hits = rows.iter().filter(|r| r.within_eps).count();
    eprintln!("{hits}/{} seeds within eps of OPT_H", rows.len());
    emit(out_dir, &format!("learn_{mode}.csv"), LEARN_SCHEMA, &rows)?;
    Ok(ExitCode::SUCCESS)
}

fn hardness(a: HardnessArgs, out_dir: Option<&Path>) -> Result<ExitCode> {
    let eps = match (a.eps.is_empty(), a.which) {
        (false, _) => a.eps.clone(),
        (true, HardnessKind::Mixed) => vec![0.125, 0.03125],
        (true, _) => vec![0.01],
    };
    let exp = HardnessExperiment {
        which: a.which,
        eps,
        h: a.h,
        n: a.n,
        trials: a.trials,
        seed: a.seed,
        families: !a.no_families,
    };
    save_config(a.save_config.as_deref(), &ExperimentConfig::Hardness(exp.clone()))?;
    if exp.which == HardnessKind::Mixed {
        let rows = run_mixed(&exp)?;
        let failed = rows.iter().filter(|r| !r.holds).count();
        eprintln!("{failed} violations over {} checks", rows.len());
        emit(out_dir, "mixed.csv", MIXED_SCHEMA, &rows)?;
        return Ok(if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE });
    }
    let name = if exp.which == HardnessKind::Add { "add" } else { "mult" };
    let mut rows = Vec::new();
    for &e in &exp.eps {
        let run = run_gap(exp.which, e, exp.h, exp.n)?;
        if let Some(dir) = out_dir {
            fs::create_dir_all(dir)?;
            let path = dir.join(format!("{name}_eps{e}_H{}.json", exp.h));
            run.instance.write(&path)?;
            eprintln!("wrote {}", path.display());
        }
        rows.push(run.row);
    }
    emit(out_dir, &format!("gap_{name}.csv"), GAP_SCHEMA, &rows)?;
    Ok(ExitCode::SUCCESS)
}
