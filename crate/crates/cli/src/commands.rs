use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use serde_json::json;
use thiserror::Error;

use ramp_core::agent::save_checkpoint;
use ramp_core::benchmarks::{
    bundled_domain, certify_config, default_spec, generate_pool, read_generator_file, read_pool, write_pool, BenchError,
    DEFAULT_RETRY_CAP,
};
use ramp_core::env::{read_jsonl, write_jsonl, DumpError, Trajectory, DEFAULT_T_MAX};
use ramp_core::evaluation::{evaluate, EvalError, WalkConfig, DEFAULT_WALKS, DEFAULT_WALK_LEN};
use ramp_core::grounding::{ground, GroundTask};
use ramp_core::learning::{learn_with_cap, parse_label, Datasets, LearnedModel, DEFAULT_SAMPLE_CAP};
use ramp_core::orchestrator::{
    aggregate, run_experiment, EpisodeRecord, EpisodeSink, ExperimentConfig, ExperimentError, ExperimentResult, Mode,
};
use ramp_core::pddl::{parse_domain, parse_problem, serialize_domain, LiftedDomain, Problem};
use ramp_core::planner::{
    format_ff_output, plan_external_model, plan_with, ExternalPlanner, PlanOutcome, PlannerConfig, DEFAULT_BUDGET,
    DEFAULT_EXPANSION_CAP,
};

use crate::config::{read_run_file, RunFile};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Io(String),
}

fn io_err(what: impl std::fmt::Display, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{what}: {e}"))
}

impl From<ExperimentError> for CliError {
    fn from(e: ExperimentError) -> Self {
        match e {
            ExperimentError::Io(e) => CliError::Io(e.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<BenchError> for CliError {
    fn from(e: BenchError) -> Self {
        match e {
            BenchError::Io(e) => CliError::Io(e.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "ramp", version, about = "Plan-first reinforcement learning with safe numeric action-model learning")]
#[command(args_conflicts_with_subcommands = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Option<Command>,
    /// Domain file (Metric-FF compatible invocation, together with -f).
    #[arg(short = 'o', value_name = "DOMAIN")]
    pub ff_domain: Option<PathBuf>,
    /// Problem file (Metric-FF compatible invocation, together with -o).
    #[arg(short = 'f', value_name = "PROBLEM")]
    pub ff_problem: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run seeded experiments and write metrics, models and an aggregate.
    Run(RunArgs),
    /// Learn a model offline from trajectory dumps.
    Learn(LearnArgs),
    /// Score a model against the ground truth.
    EvalModel(EvalArgs),
    /// Plan once with a model.
    Plan(PlanArgs),
    /// Generate a problem pool.
    Gen(GenArgs),
}

#[derive(Debug, Args, Default)]
pub struct RunArgs {
    /// Bundled domain name (counters, sailing, depot, example) or a domain file.
    #[arg(long)]
    pub domain: Option<String>,
    #[arg(long)]
    pub size: Option<String>,
    /// ramp or ppo
    #[arg(long)]
    pub mode: Option<String>,
    #[arg(long)]
    pub episodes: Option<usize>,
    #[arg(long)]
    pub tmax: Option<usize>,
    /// Planner budget per episode in seconds.
    #[arg(long)]
    pub plan_budget: Option<f64>,
    /// Number of seeds, run in parallel.
    #[arg(long)]
    pub seeds: Option<usize>,
    /// First seed; seed k runs as seed + k.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub external_planner: Option<PathBuf>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Directory of problem files; defaults to domains/<domain>/<size>.
    #[arg(long)]
    pub problems: Option<PathBuf>,
    /// Write a model snapshot every k episodes (0 disables).
    #[arg(long)]
    pub snapshot_every: Option<usize>,
    /// JSON file with flat keys named after these flags; flags win.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct LearnArgs {
    /// Bundled domain name or a domain file supplying the signature.
    #[arg(long)]
    pub domain: String,
    /// Trajectory dumps (JSON lines).
    #[arg(long, num_args = 0.., required = true)]
    pub trajectories: Vec<PathBuf>,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    #[arg(long, default_value_t = DEFAULT_SAMPLE_CAP)]
    pub sample_cap: usize,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Model to score.
    #[arg(long)]
    pub model: PathBuf,
    /// Ground-truth domain: bundled name or file.
    #[arg(long)]
    pub domain: String,
    #[arg(long, default_value = "small")]
    pub size: String,
    /// Held-out problem files; generated fresh when omitted.
    #[arg(long)]
    pub problems: Option<PathBuf>,
    #[arg(long, default_value_t = 50)]
    pub instances: usize,
    #[arg(long, default_value_t = DEFAULT_WALKS)]
    pub walks: usize,
    #[arg(long, default_value_t = DEFAULT_WALK_LEN)]
    pub walk_len: usize,
    /// Skip ground-truth plan traces when harvesting states.
    #[arg(long)]
    pub no_planner: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Planner budget in seconds for traces and the safety audit.
    #[arg(long, default_value_t = 10.0)]
    pub plan_budget: f64,
    /// Also write the report here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PlanArgs {
    /// Bundled domain name or a domain file.
    #[arg(long)]
    pub domain: String,
    #[arg(long)]
    pub problem: PathBuf,
    /// Use an external planner binary instead of the internal search.
    #[arg(long)]
    pub external: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_BUDGET.as_secs_f64())]
    pub plan_budget: f64,
    #[arg(long, default_value_t = DEFAULT_EXPANSION_CAP)]
    pub expansion_cap: usize,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub domain: String,
    #[arg(long, default_value = "small")]
    pub size: String,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub count: Option<usize>,
    /// generator.json to take the spec from (keyed by size).
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// Defaults to domains/<domain>/<size>.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Print the resolved spec as JSON and exit.
    #[arg(long)]
    pub print_spec: bool,
}

pub fn dispatch(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.command {
        Some(Command::Run(a)) => cmd_run(a),
        Some(Command::Learn(a)) => cmd_learn(a),
        Some(Command::EvalModel(a)) => cmd_eval(a),
        Some(Command::Plan(a)) => cmd_plan(a),
        Some(Command::Gen(a)) => cmd_gen(a),
        None => match (cli.ff_domain, cli.ff_problem) {
            (Some(o), Some(f)) => cmd_ff(&o, &f),
            _ => Err(CliError::Config("no command given (see --help)".into())),
        },
    }
}

/// Resolves a bundled name or reads a domain file.
fn load_domain(arg: &str) -> Result<(String, LiftedDomain), CliError> {
    let text = match bundled_domain(arg) {
        Some(t) => t.to_string(),
        None => std::fs::read_to_string(arg).map_err(|e| CliError::Config(format!("cannot read domain {arg}: {e}")))?,
    };
    let d = parse_domain(&text).map_err(|e| CliError::Config(format!("domain {arg}: {e}")))?;
    let name = if bundled_domain(arg).is_some() {
        arg.to_string()
    } else {
        Path::new(arg)
            .parent()
            .and_then(|p| p.file_name())
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| d.name.clone())
    };
    Ok((name, d))
}

fn load_problem(path: &Path, d: &LiftedDomain) -> Result<Problem, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read problem {}: {e}", path.display())))?;
    parse_problem(&text, d).map_err(|e| CliError::Config(format!("problem {}: {e}", path.display())))
}

fn load_pool(name: &str, size: &str, problems: Option<&Path>, d: &LiftedDomain) -> Result<Vec<Problem>, CliError> {
    let default_dir = Path::new("domains").join(name).join(size);
    let dir = problems.map(Path::to_path_buf).or_else(|| default_dir.is_dir().then_some(default_dir));
    if let Some(dir) = dir {
        let pool = read_pool(&dir, d).map_err(|e| CliError::Config(format!("problems in {}: {e}", dir.display())))?;
        if pool.is_empty() {
            return Err(CliError::Config(format!("no problem files in {}", dir.display())));
        }
        return Ok(pool);
    }
    if bundled_domain(name).is_none() {
        return Err(CliError::Config(format!("no problems for {name}; pass --problems")));
    }
    log::info!("generating the {name}-{size} pool");
    Ok(generate_pool(&default_spec(name, size)?, &certify_config(), DEFAULT_RETRY_CAP)?)
}

/// Flags, then the config file, then defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedRun {
    pub domain: String,
    pub size: String,
    pub seeds: usize,
    pub first_seed: u64,
    pub out_dir: PathBuf,
    pub problems: Option<PathBuf>,
    pub experiment: ExperimentConfig,
}

pub fn resolve_run(a: &RunArgs) -> Result<ResolvedRun, CliError> {
    let f = match &a.config {
        Some(p) => read_run_file(p).map_err(CliError::Config)?,
        None => RunFile::default(),
    };
    let mode: Mode = a
        .mode
        .clone()
        .or(f.mode)
        .unwrap_or_else(|| "ramp".into())
        .parse()
        .map_err(CliError::Config)?;
    let mut ppo = ramp_core::agent::PpoConfig::default();
    macro_rules! take {
        ($($k:ident),*) => { $( if let Some(v) = f.$k.clone() { ppo.$k = v; } )* };
    }
    take!(gamma, lambda, clip, vf_coef, entropy_coef, lr, grad_clip, epochs, batch, minibatch, hidden);
    let defaults = ExperimentConfig::default();
    let experiment = ExperimentConfig {
        mode,
        episodes: a.episodes.or(f.episodes).unwrap_or(defaults.episodes),
        t_max: a.tmax.or(f.tmax).unwrap_or(DEFAULT_T_MAX),
        plan_budget_s: a.plan_budget.or(f.plan_budget).unwrap_or(defaults.plan_budget_s),
        expansion_cap: f.expansion_cap.unwrap_or(defaults.expansion_cap),
        seed: 0,
        ppo,
        sample_cap: f.sample_cap.unwrap_or(defaults.sample_cap),
        external_planner: a.external_planner.clone().or(f.external_planner),
        split_equalities: f.split_equalities.unwrap_or(defaults.split_equalities),
        snapshot_every: a.snapshot_every.or(f.snapshot_every).unwrap_or(defaults.snapshot_every),
    };
    let seeds = a.seeds.or(f.seeds).unwrap_or(5);
    if seeds == 0 {
        return Err(CliError::Config("--seeds must be positive".into()));
    }
    if experiment.ppo.batch == 0 || experiment.ppo.minibatch == 0 {
        return Err(CliError::Config("batch sizes must be positive".into()));
    }
    Ok(ResolvedRun {
        domain: a.domain.clone().or(f.domain).unwrap_or_else(|| "counters".into()),
        size: a.size.clone().or(f.size).unwrap_or_else(|| "small".into()),
        seeds,
        first_seed: a.seed.or(f.seed).unwrap_or(0),
        out_dir: a.out_dir.clone().or(f.out_dir).unwrap_or_else(|| "out".into()),
        problems: a.problems.clone().or(f.problems),
        experiment,
    })
}

/// Streams metrics rows, the trajectory dump and model snapshots.
struct FileSink {
    csv: csv::Writer<File>,
    traj: BufWriter<File>,
    dir: PathBuf,
    snapshot_every: usize,
}

impl FileSink {
    fn create(dir: &Path, snapshot_every: usize) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir.join("models")).map_err(|e| io_err(dir.display(), e))?;
        let metrics = dir.join("metrics.csv");
        let traj = dir.join("trajectories.jsonl");
        Ok(FileSink {
            csv: csv::Writer::from_path(&metrics).map_err(|e| io_err(metrics.display(), e))?,
            traj: BufWriter::new(File::create(&traj).map_err(|e| io_err(traj.display(), e))?),
            dir: dir.to_path_buf(),
            snapshot_every,
        })
    }
}

impl EpisodeSink for FileSink {
    fn on_episode(&mut self, rec: &EpisodeRecord, task: &GroundTask, traj: &Trajectory, model: &LearnedModel) -> std::io::Result<()> {
        self.csv.serialize(rec).map_err(std::io::Error::other)?;
        self.csv.flush()?;
        write_jsonl(task, traj, &mut self.traj)?;
        self.traj.flush()?;
        let k = rec.episode + 1;
        if self.snapshot_every > 0 && k.is_multiple_of(self.snapshot_every) {
            std::fs::write(self.dir.join("models").join(format!("domain_ep{k:04}.pddl")), serialize_domain(&model.export()))?;
        }
        Ok(())
    }
}

fn write_json(path: &Path, v: &impl serde::Serialize) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(v).map_err(|e| io_err(path.display(), e))?;
    std::fs::write(path, text + "\n").map_err(|e| io_err(path.display(), e))
}

fn write_model(dir: &Path, model: &LearnedModel) -> Result<(), CliError> {
    let p = dir.join("domain_learned.pddl");
    std::fs::write(&p, serialize_domain(&model.export())).map_err(|e| io_err(p.display(), e))?;
    write_json(&dir.join("model_meta.json"), &model.meta_json())
}

fn run_seed(domain: &LiftedDomain, pool: Vec<Problem>, cfg: ExperimentConfig, dir: &Path) -> Result<ExperimentResult, CliError> {
    let mut sink = FileSink::create(dir, cfg.snapshot_every)?;
    let result = run_experiment(domain, pool, cfg, &mut sink)?;
    write_json(&dir.join("summary.json"), &result.summary)?;
    write_json(&dir.join("violations.json"), &result.violations)?;
    write_model(dir, &result.model)?;
    let ck = dir.join("checkpoint.bin");
    let mut out = BufWriter::new(File::create(&ck).map_err(|e| io_err(ck.display(), e))?);
    save_checkpoint(&result.agent, &mut out).map_err(|e| io_err(ck.display(), e))?;
    out.flush().map_err(|e| io_err(ck.display(), e))?;
    Ok(result)
}

pub fn cmd_run(a: RunArgs) -> Result<ExitCode, CliError> {
    let r = resolve_run(&a)?;
    let (name, domain) = load_domain(&r.domain)?;
    let pool = load_pool(&name, &r.size, r.problems.as_deref(), &domain)?;
    let exp_dir = r.out_dir.join(format!("{name}_{}_{}", r.size, r.experiment.mode));
    std::fs::create_dir_all(&exp_dir).map_err(|e| io_err(exp_dir.display(), e))?;
    write_json(
        &exp_dir.join("run_config.json"),
        &json!({
            "domain": name,
            "size": r.size,
            "seeds": (0..r.seeds).map(|k| r.first_seed + k as u64).collect::<Vec<_>>(),
            "instances": pool.iter().map(|p| p.name.clone()).collect::<Vec<_>>(),
            "experiment": r.experiment,
        }),
    )?;

    let results: Vec<(u64, Result<ExperimentResult, CliError>)> = std::thread::scope(|s| {
        let handles: Vec<_> = (0..r.seeds)
            .map(|k| {
                let seed = r.first_seed + k as u64;
                let cfg = ExperimentConfig {
                    seed,
                    ..r.experiment.clone()
                };
                let dir = exp_dir.join(format!("seed{seed}"));
                let (domain, pool) = (&domain, pool.clone());
                (seed, s.spawn(move || run_seed(domain, pool, cfg, &dir)))
            })
            .collect();
        handles
            .into_iter()
            .map(|(seed, h)| (seed, h.join().unwrap_or_else(|_| Err(CliError::Io("worker panicked".into())))))
            .collect()
    });

    let mut runs = Vec::new();
    let mut first_err = None;
    for (seed, res) in results {
        match res {
            Ok(res) => {
                let s = &res.summary;
                println!(
                    "seed {seed}: solved {}/{} rolling {:.2} cum_len {} planner {:.2} violations {}",
                    s.solved, s.episodes, s.final_rolling_success, s.cum_solution_len, s.planner_utilization, s.safety_violations
                );
                runs.push(res.records);
            }
            Err(e) => {
                eprintln!("seed {seed} failed: {e}");
                first_err.get_or_insert(e);
            }
        }
    }
    if !runs.is_empty() {
        let p = exp_dir.join("aggregate.csv");
        let mut w = csv::Writer::from_path(&p).map_err(|e| io_err(p.display(), e))?;
        for row in aggregate(&runs) {
            w.serialize(row).map_err(|e| io_err(p.display(), e))?;
        }
        w.flush().map_err(|e| io_err(p.display(), e))?;
        write_json(
            &exp_dir.join("aggregate_meta.json"),
            &json!({
                "interval": "student-t over per-seed values at each episode index",
                "level": 0.95,
                "seeds": runs.len(),
            }),
        )?;
    }
    match first_err {
        Some(e) => Err(e),
        None => Ok(ExitCode::SUCCESS),
    }
}

pub fn cmd_learn(a: LearnArgs) -> Result<ExitCode, CliError> {
    let (_, domain) = load_domain(&a.domain)?;
    let mut data = Datasets::new(&domain.signature());
    for path in &a.trajectories {
        let f = File::open(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let episodes = read_jsonl(BufReader::new(f)).map_err(|e| match e {
            DumpError::Io(e) => io_err(path.display(), e),
            other => CliError::Config(format!("{}: {other}", path.display())),
        })?;
        for ep in &episodes {
            data.add_dump_episode(ep)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        }
    }
    let model = learn_with_cap(&data, a.sample_cap).map_err(|e| CliError::Config(e.to_string()))?;
    std::fs::create_dir_all(&a.out_dir).map_err(|e| io_err(a.out_dir.display(), e))?;
    write_model(&a.out_dir, &model)?;
    println!(
        "learned {} schemas ({} exportable) from {} trajectories",
        model.actions.len(),
        model.exportable_count(),
        data.trajectories
    );
    Ok(ExitCode::SUCCESS)
}

pub fn cmd_eval(a: EvalArgs) -> Result<ExitCode, CliError> {
    let (name, truth) = load_domain(&a.domain)?;
    let model_text = std::fs::read_to_string(&a.model)
        .map_err(|e| CliError::Config(format!("cannot read model {}: {e}", a.model.display())))?;
    let model = parse_domain(&model_text).map_err(|e| CliError::Config(format!("model {}: {e}", a.model.display())))?;
    let instances = match &a.problems {
        Some(dir) => read_pool(dir, &truth).map_err(|e| CliError::Config(format!("problems in {}: {e}", dir.display())))?,
        None => {
            if bundled_domain(&name).is_none() {
                return Err(CliError::Config("pass --problems for a non-bundled domain".into()));
            }
            // held out from the training pool
            let mut spec = default_spec(&name, &a.size)?;
            spec.seed = spec.seed.wrapping_add(10_000).wrapping_add(a.seed);
            spec.count = a.instances;
            generate_pool(&spec, &certify_config(), DEFAULT_RETRY_CAP)?
        }
    };
    let budget = PlannerConfig {
        budget: Duration::from_secs_f64(a.plan_budget.max(0.0)),
        ..PlannerConfig::default()
    };
    let walks = WalkConfig {
        walks: a.walks,
        walk_len: a.walk_len,
        seed: a.seed,
    };
    let planner = (!a.no_planner).then_some(&budget);
    let report = evaluate(&model, &truth, &instances, &walks, planner, &budget, &a.size).map_err(|e| match e {
        EvalError::NoSamples => CliError::Config("no test samples (increase --walks or enable the planner)".into()),
        other => CliError::Config(other.to_string()),
    })?;
    let text = serde_json::to_string_pretty(&report).expect("report serializes");
    println!("{text}");
    if let Some(out) = &a.out {
        std::fs::write(out, text + "\n").map_err(|e| io_err(out.display(), e))?;
    }
    Ok(ExitCode::SUCCESS)
}

fn pddl_step(label: &str) -> String {
    match parse_label(label) {
        Some((name, args)) if args.is_empty() => format!("({name})"),
        Some((name, args)) => format!("({name} {})", args.join(" ")),
        None => label.to_string(),
    }
}

pub fn cmd_plan(a: PlanArgs) -> Result<ExitCode, CliError> {
    let (_, domain) = load_domain(&a.domain)?;
    let problem = load_problem(&a.problem, &domain)?;
    let budget = Duration::from_secs_f64(a.plan_budget.max(0.0));
    let outcome = match &a.external {
        Some(exe) => {
            let dir = std::env::temp_dir().join(format!("ramp-plan-{}", std::process::id()));
            std::fs::create_dir_all(&dir).map_err(|e| io_err(dir.display(), e))?;
            let r = plan_external_model(&domain, &problem, &ExternalPlanner::new(exe), budget, &dir);
            let _ = std::fs::remove_dir_all(&dir);
            r.map_err(|e| CliError::Config(e.to_string()))?
        }
        None => plan_with(
            &domain,
            &problem,
            &PlannerConfig {
                budget,
                expansion_cap: a.expansion_cap,
            },
        ),
    };
    match &outcome {
        PlanOutcome::Plan(p) => {
            for label in &p.actions {
                println!("{}", pddl_step(label));
            }
            eprintln!(
                "; {} steps, {} expanded, {:.3}s",
                p.len(),
                p.stats.expanded,
                p.stats.wall_time_s
            );
            Ok(ExitCode::SUCCESS)
        }
        other => {
            eprintln!("; {}", other.tag());
            Ok(ExitCode::from(3))
        }
    }
}

pub fn cmd_gen(a: GenArgs) -> Result<ExitCode, CliError> {
    let mut spec = match &a.spec {
        Some(p) => read_generator_file(p)?
            .remove(&a.size)
            .ok_or_else(|| CliError::Config(format!("{} has no {} entry", p.display(), a.size)))?,
        None => default_spec(&a.domain, &a.size)?,
    };
    if let Some(s) = a.seed {
        spec.seed = s;
    }
    if let Some(c) = a.count {
        spec.count = c;
    }
    if a.print_spec {
        println!("{}", serde_json::to_string_pretty(&spec).expect("spec serializes"));
        return Ok(ExitCode::SUCCESS);
    }
    let pool = generate_pool(&spec, &certify_config(), DEFAULT_RETRY_CAP)?;
    let dir = a
        .out_dir
        .unwrap_or_else(|| Path::new("domains").join(&spec.domain).join(&spec.size));
    write_pool(&dir, &pool)?;
    println!("wrote {} problems to {}", pool.len(), dir.display());
    Ok(ExitCode::SUCCESS)
}

/// `ramp -o domain.pddl -f problem.pddl`, printing Metric-FF style output.
pub fn cmd_ff(domain_file: &Path, problem_file: &Path) -> Result<ExitCode, CliError> {
    let (_, domain) = load_domain(&domain_file.to_string_lossy())?;
    let problem = load_problem(problem_file, &domain)?;
    let task = ground(&domain, &problem).map_err(|e| CliError::Config(e.to_string()))?;
    let outcome = plan_with(&domain, &problem, &PlannerConfig::default());
    print!("{}", format_ff_output(&task, &outcome));
    Ok(ExitCode::SUCCESS)
}
