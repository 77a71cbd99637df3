//! Command-line front end. `cli_dispatch` returns the process exit code:
//! 0 on success, 1 on data errors, 2 on usage errors.

use std::collections::BTreeMap;
use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bench::{self, BenchConfig, BenchError, BenchReport, PLANS_DIR, PROFILE_FILE, REPORT_FILE, TRAIN_LOG_FILE};
use crate::config::ConfigError;
use crate::generator::checkpoint::{load_policy, save_policy};
use crate::generator::condition::{ConditionSampler, OodGuard};
use crate::generator::policy::Policy;
use crate::generator::schedule::{NoiseSchedule, SamplingSchedule};
use crate::generator::training::{pretrain_baseline, synthesize_base_set, PretrainConfig};
use crate::integration::Method;
use crate::metrics::Category;
use crate::oracle::{analyze_png, OracleConfig, PlanReport};
use crate::post_training::iter::{sspt_iter_round, BaseSet, IterConfig, IterEnv};
use crate::post_training::objective::RewardClip;
use crate::post_training::oracles::SpaceSyntaxOracle;
use crate::post_training::ppo::{append_log, draw_conditions, sspt_ppo_round, PpoConfig, PpoEnv};
use crate::post_training::respace::respace;
use crate::report::{write_summary, SummaryRow, SUMMARY_FILE};
use crate::screening::{clean_dataset, selection_score, top_k, GateConfig};
use crate::svg::emit_profile_svg;

pub const CHECKPOINT_FILE: &str = "policy.ckpt";
pub const LEDGER_FILE: &str = "cleaning_ledger.csv";
pub const SCREEN_FILE: &str = "screen.csv";
pub const GUARD_FILE: &str = "ood_guard.json";

#[derive(Debug, Parser)]
#[command(
    name = "floorsyntax",
    version,
    about = "Space-syntax analysis and post-training of floor-plan layouts"
)]
#[command(arg_required_else_help = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Analyze a directory of layout PNGs into per-plan reports and a summary CSV.
    Analyze(AnalyzeArgs),
    /// Score analyzed plans with the validity gates and select the top K.
    Screen(ScreenArgs),
    /// Sample a checkpoint under evaluation programs and aggregate the oracle output.
    Bench(BenchArgs),
    /// Top-K iterative fine-tuning.
    TrainIter(TrainIterArgs),
    /// PPO fine-tuning on terminal space-syntax rewards.
    TrainPpo(TrainPpoArgs),
    /// Redraw the profile SVG of a run directory.
    Plot(PlotArgs),
}

#[derive(Debug, Args)]
struct OracleArgs {
    /// Integration method: hh or closeness.
    #[arg(long, default_value = "hh")]
    method: Method,
    /// Smallest rectangle kept in the cover, in pixels.
    #[arg(long)]
    min_rect_area: Option<usize>,
    /// Max pixel gap for a same-room proximity edge.
    #[arg(long)]
    touch_dist: Option<usize>,
    /// Max distance from a door pixel to a room core.
    #[arg(long)]
    door_reach: Option<usize>,
    /// Reject unknown codes and disconnected graphs instead of repairing them.
    #[arg(long)]
    strict: bool,
}

impl OracleArgs {
    fn config(&self) -> OracleConfig {
        let mut c = OracleConfig {
            method: self.method,
            strict_codes: self.strict,
            strict_connectivity: self.strict,
            ..OracleConfig::default()
        };
        if let Some(v) = self.min_rect_area {
            c.graph.min_rect_area = v;
        }
        if let Some(v) = self.touch_dist {
            c.graph.touch_dist = v;
        }
        if let Some(v) = self.door_reach {
            c.graph.door_reach = v;
        }
        c
    }
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    /// Directory of 4-channel layout PNGs.
    input: PathBuf,
    /// Output directory (plans/, summary CSV, cleaning ledger).
    #[arg(long, short)]
    out: PathBuf,
    #[command(flatten)]
    oracle: OracleArgs,
}

#[derive(Debug, Args)]
struct ScreenArgs {
    /// Directory holding plans/*.json.
    run_dir: PathBuf,
    /// Gate configuration file; the bundled gates are used otherwise.
    #[arg(long)]
    gates: Option<PathBuf>,
    /// Number of plans to select.
    #[arg(long, default_value_t = 100)]
    top_k: usize,
    /// Output CSV, defaults to <run_dir>/screen.csv.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Run identifier; outputs go to <runs-dir>/<run-id>.
    #[arg(long, default_value = "default")]
    run_id: String,
    #[arg(long, default_value = "runs")]
    runs_dir: PathBuf,
}

impl RunArgs {
    fn dir(&self) -> PathBuf {
        self.runs_dir.join(&self.run_id)
    }
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// Policy checkpoint; without it the seeded baseline policy is used.
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Plans to sample.
    #[arg(long, default_value_t = 200)]
    samples: usize,
    /// Room count of the evaluation programs.
    #[arg(long, default_value_t = 8)]
    eval_rooms: usize,
    /// Room cap used in training; must be below --eval-rooms.
    #[arg(long, default_value_t = 7)]
    cap: usize,
    /// Condition file (JSON lines); cycled when shorter than --samples.
    #[arg(long)]
    conditions: Option<PathBuf>,
    /// Reference profile CSV (category,median); the bundled 8-room profile by default.
    #[arg(long)]
    reference: Option<PathBuf>,
    /// Skip the reference profile and d_profile.
    #[arg(long, conflicts_with = "reference")]
    no_reference: bool,
    #[arg(long, default_value = "80,20,0,0")]
    respacing: String,
    #[command(flatten)]
    run: RunArgs,
    #[command(flatten)]
    oracle: OracleArgs,
}

#[derive(Debug, Args)]
struct TrainArgs {
    /// Starting checkpoint; without it the seeded baseline policy is used.
    #[arg(long)]
    init: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Room cap of training programs.
    #[arg(long, default_value_t = 7)]
    cap: usize,
    #[arg(long, default_value = "80,20,0,0")]
    respacing: String,
    /// Held-out programs for the before/after public-score check; 0 skips it.
    #[arg(long, default_value_t = 0)]
    eval_samples: usize,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Debug, Args)]
struct TrainIterArgs {
    #[arg(long, default_value_t = 5)]
    rounds: usize,
    /// Fresh candidates per round.
    #[arg(long, default_value_t = 256)]
    samples: usize,
    #[arg(long, default_value_t = 128)]
    topk: usize,
    /// Fine-tuning epochs per round.
    #[arg(long, default_value_t = 4)]
    epochs: usize,
    #[arg(long, default_value_t = 0.05)]
    lr: f64,
    #[command(flatten)]
    train: TrainArgs,
}

#[derive(Debug, Args)]
struct TrainPpoArgs {
    #[arg(long, default_value_t = 10)]
    rounds: usize,
    /// Rollouts per round.
    #[arg(long, default_value_t = 256)]
    rollouts: usize,
    #[arg(long, default_value_t = 0.2)]
    clip_eps: f64,
    #[arg(long, default_value_t = 0.0)]
    beta_kl: f64,
    /// none, quantile:LO,HI or fixed:LO,HI.
    #[arg(long, default_value = "quantile:0.05,0.95")]
    reward_clip: RewardClip,
    #[arg(long, default_value_t = 0.005)]
    lr: f64,
    /// Optimization passes over each batch.
    #[arg(long, default_value_t = 1)]
    sub_epochs: usize,
    #[command(flatten)]
    train: TrainArgs,
}

#[derive(Debug, Args)]
struct PlotArgs {
    /// Run directory with plans/ or bench_report.json.
    run_dir: PathBuf,
    /// Reference profile CSV; defaults to the one stored in the run's report.
    #[arg(long)]
    reference: Option<PathBuf>,
    /// Output SVG, defaults to <run_dir>/profile.svg.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Error split by exit code.
#[derive(Debug)]
enum Failure {
    Usage(String),
    Data(String),
}

impl From<BenchError> for Failure {
    fn from(e: BenchError) -> Self {
        match e {
            BenchError::Config(c) => Failure::Usage(c.to_string()),
            BenchError::Respace(r) => Failure::Usage(r.to_string()),
            other => Failure::Data(other.to_string()),
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn data<E: std::fmt::Display>(context: impl std::fmt::Display) -> impl FnOnce(E) -> Failure {
    move |e| Failure::Data(format!("{context}: {e}"))
}

/// Parses `argv` (program name first) and runs the command.
pub fn cli_dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    bench::init_workers();
    let result = match cli.command {
        Command::Analyze(a) => analyze(a),
        Command::Screen(a) => screen(a),
        Command::Bench(a) => run_bench(a),
        Command::TrainIter(a) => train_iter(a),
        Command::TrainPpo(a) => train_ppo(a),
        Command::Plot(a) => plot(a),
    };
    match result {
        Ok(()) => 0,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            2
        }
        Err(Failure::Data(m)) => {
            eprintln!("error: {m}");
            1
        }
    }
}

fn write_plans(dir: &Path, reports: &[PlanReport]) -> Result<(), Failure> {
    let plans = dir.join(PLANS_DIR);
    fs::create_dir_all(&plans).map_err(data(plans.display()))?;
    for r in reports {
        let p = plans.join(format!("{}.json", r.plan_id));
        fs::write(&p, r.to_json()).map_err(data(p.display()))?;
    }
    Ok(())
}

fn analyze(a: AnalyzeArgs) -> Result<(), Failure> {
    let cfg = a.oracle.config();
    let mut inputs: Vec<PathBuf> = fs::read_dir(&a.input)
        .map_err(data(a.input.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x.eq_ignore_ascii_case("png")))
        .collect();
    inputs.sort();
    if inputs.is_empty() {
        return Err(Failure::Data(format!("no PNG files in {}", a.input.display())));
    }
    let reports: Vec<PlanReport> = inputs
        .par_iter()
        .map(|p| {
            let id = p
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            match fs::read(p) {
                Ok(bytes) => analyze_png(&id, &bytes, &cfg),
                Err(e) => PlanReport::failed(&id, crate::oracle::PlanOutcome::ParseFailed, e.to_string(), &cfg),
            }
        })
        .collect();
    write_plans(&a.out, &reports)?;
    let rows: Vec<SummaryRow> = reports.iter().map(SummaryRow::from_report).collect();
    let summary = a.out.join(SUMMARY_FILE);
    let f = fs::File::create(&summary).map_err(data(summary.display()))?;
    write_summary(&rows, f).map_err(data(summary.display()))?;

    let outcomes: Vec<_> = reports.iter().map(|r| r.outcome).collect();
    let ledger = clean_dataset(&outcomes);
    let path = a.out.join(LEDGER_FILE);
    let f = fs::File::create(&path).map_err(data(path.display()))?;
    ledger.write_csv(f).map_err(data(path.display()))?;
    println!(
        "analyzed {} plans: {} usable ({:.2}%), summary in {}",
        ledger.total,
        ledger.usable(),
        ledger.percent(ledger.usable()),
        summary.display()
    );
    Ok(())
}

#[derive(Serialize)]
struct ScreenRow {
    plan_id: String,
    outcome: &'static str,
    z: f64,
    penalty: f64,
    score: f64,
    living_missing: bool,
    few_rooms: bool,
    small_area: bool,
    share_out_of_band: bool,
    selected: bool,
}

fn screen(a: ScreenArgs) -> Result<(), Failure> {
    if a.top_k == 0 {
        return Err(Failure::Usage("--top-k must be at least 1".into()));
    }
    let gates = match &a.gates {
        Some(p) => GateConfig::parse(&fs::read_to_string(p).map_err(data(p.display()))?)?,
        None => GateConfig::default(),
    };
    gates.validate()?;
    let reports = bench::read_plan_reports(&a.run_dir)?;
    let scores: Vec<_> = reports.iter().map(|r| selection_score(r, &gates)).collect();
    let ranked: Vec<(String, f64)> = reports
        .iter()
        .zip(&scores)
        .map(|(r, s)| (r.plan_id.clone(), s.s))
        .collect();
    let chosen: std::collections::BTreeSet<String> = top_k(&ranked, &[], a.top_k).into_iter().collect();
    let rows: Vec<ScreenRow> = reports
        .iter()
        .zip(&scores)
        .map(|(r, s)| ScreenRow {
            plan_id: r.plan_id.clone(),
            outcome: r.outcome.name(),
            z: s.z,
            penalty: s.p,
            score: s.s,
            living_missing: s.gates.living_missing,
            few_rooms: s.gates.few_rooms,
            small_area: s.gates.small_area,
            share_out_of_band: s.gates.share_out_of_band,
            selected: chosen.contains(&r.plan_id),
        })
        .collect();
    let out = a.out.unwrap_or_else(|| a.run_dir.join(SCREEN_FILE));
    let f = fs::File::create(&out).map_err(data(out.display()))?;
    crate::post_training::ppo::write_log(&rows, f).map_err(data(out.display()))?;
    let ledger = clean_dataset(&reports.iter().map(|r| r.outcome).collect::<Vec<_>>());
    println!(
        "screened {} plans ({} usable), selected {}, written to {}",
        ledger.total,
        ledger.usable(),
        chosen.len(),
        out.display()
    );
    Ok(())
}

fn load_reference(path: Option<&Path>, skip: bool) -> Result<Option<BTreeMap<Category, f64>>, Failure> {
    if skip {
        return Ok(None);
    }
    match path {
        Some(p) => {
            let f = fs::File::open(p).map_err(data(p.display()))?;
            Ok(Some(bench::read_reference(f)?))
        }
        None => Ok(Some(bench::default_reference())),
    }
}

fn load_or_baseline(path: Option<&Path>, cap: usize, seed: u64) -> Result<Policy, Failure> {
    match path {
        Some(p) => {
            let f = fs::File::open(p).map_err(data(p.display()))?;
            load_policy(BufReader::new(f)).map_err(data(p.display()))
        }
        None => Ok(pretrain_baseline(&baseline_config(cap), seed)),
    }
}

fn baseline_config(cap: usize) -> PretrainConfig {
    PretrainConfig {
        cap,
        ..PretrainConfig::default()
    }
}

fn run_bench(a: BenchArgs) -> Result<(), Failure> {
    let cfg = BenchConfig {
        cap: a.cap,
        eval_rooms: a.eval_rooms,
        samples: a.samples,
        respacing: a.respacing.clone(),
        seed: a.seed,
        oracle: a.oracle.config(),
        ..BenchConfig::default()
    };
    cfg.validate()?;
    let reference = load_reference(a.reference.as_deref(), a.no_reference)?;
    let conditions = a.conditions.as_deref().map(bench::load_conditions).transpose()?;
    let pol = load_or_baseline(a.checkpoint.as_deref(), a.cap, a.seed)?;
    let dir = a.run.dir();
    let start = Instant::now();
    let report = bench::run_bench(&pol, &cfg, conditions.as_deref(), reference.as_ref(), &dir)?;
    print_bench(&report, &dir, start.elapsed().as_secs_f64());
    Ok(())
}

fn print_bench(r: &BenchReport, dir: &Path, seconds: f64) {
    println!(
        "{} plans, {} valid, {} invalid ({seconds:.1}s)",
        r.validity.total, r.validity.valid, r.validity.invalid
    );
    for name in bench::METRICS {
        match r.metric(name) {
            Some(s) => println!(
                "{name:>13}: median {:.4}  iqr [{:.4}, {:.4}]  mean {:.4}  n {}",
                s.median, s.q25, s.q75, s.mean, s.n
            ),
            None => println!("{name:>13}: no values"),
        }
    }
    if let Some(d) = r.d_profile {
        println!("    d_profile: {d:.4} over {} categories", r.d_profile_categories);
    }
    println!("outputs in {}", dir.display());
}

/// Shared state of both training commands.
struct Session {
    dir: PathBuf,
    guard: OodGuard,
    schedule: SamplingSchedule,
    oracle: SpaceSyntaxOracle,
    eval_conds: Vec<crate::generator::condition::Condition>,
    seed: u64,
}

impl Session {
    fn new(t: &TrainArgs) -> Result<Self, Failure> {
        if t.cap == 0 {
            return Err(Failure::Usage("--cap must be at least 1".into()));
        }
        let ts = respace(&t.respacing, NoiseSchedule::DEFAULT_STEPS).map_err(|e| Failure::Usage(e.to_string()))?;
        let guard = OodGuard::new(t.cap);
        let mut rng = ChaCha8Rng::seed_from_u64(t.seed ^ 0x0e7a_1000);
        let eval_conds = draw_conditions(&ConditionSampler::train(t.cap), &guard, "h", t.eval_samples, &mut rng);
        let dir = t.run.dir();
        fs::create_dir_all(&dir).map_err(data(dir.display()))?;
        let log = dir.join(TRAIN_LOG_FILE);
        if log.exists() {
            fs::remove_file(&log).map_err(data(log.display()))?;
        }
        Ok(Self {
            dir,
            guard,
            schedule: SamplingSchedule::new(&NoiseSchedule::default(), &ts),
            oracle: SpaceSyntaxOracle::default(),
            eval_conds,
            seed: t.seed,
        })
    }

    fn eval(&self, pol: &Policy) -> Option<f64> {
        if self.eval_conds.is_empty() {
            return None;
        }
        bench::median_public_score(pol, &self.eval_conds, &self.schedule, &self.oracle, self.seed ^ 0x5eed)
    }

    fn log<T: Serialize>(&self, row: &T) -> Result<(), Failure> {
        let p = self.dir.join(TRAIN_LOG_FILE);
        append_log(&p, std::slice::from_ref(row)).map_err(data(p.display()))
    }

    fn finish(&self, pol: &Policy, before: Option<f64>, seconds: f64) -> Result<(), Failure> {
        let ckpt = self.dir.join(CHECKPOINT_FILE);
        let f = fs::File::create(&ckpt).map_err(data(ckpt.display()))?;
        save_policy(pol, std::io::BufWriter::new(f)).map_err(data(ckpt.display()))?;

        if let (Some(b), Some(a)) = (before, self.eval(pol)) {
            let hours = seconds / 3600.0;
            println!(
                "held-out median public_score {b:.4} -> {a:.4} ({:+.4} per hour)",
                (a - b) / hours.max(f64::MIN_POSITIVE)
            );
        }
        let guard = serde_json::json!({
            "cap": self.guard.cap,
            "sampled": self.guard.sampled(),
            "violations": self.guard.violations(),
        });
        let path = self.dir.join(GUARD_FILE);
        fs::write(&path, format!("{guard:#}\n")).map_err(data(path.display()))?;
        println!(
            "room-cap guard: {} conditions sampled, {} above cap {}",
            self.guard.sampled(),
            self.guard.violations(),
            self.guard.cap
        );
        println!("checkpoint written to {}", ckpt.display());
        if self.guard.violations() > 0 {
            return Err(Failure::Data(format!(
                "{} conditions exceeded the room cap",
                self.guard.violations()
            )));
        }
        Ok(())
    }
}

fn opt(x: Option<f64>) -> String {
    x.map_or("-".into(), |v| format!("{v:.4e}"))
}

fn train_iter(a: TrainIterArgs) -> Result<(), Failure> {
    let cfg = IterConfig {
        samples: a.samples,
        top_k: a.topk,
        epochs: a.epochs,
        lr: a.lr,
        respacing: a.train.respacing.clone(),
        ..IterConfig::default()
    };
    cfg.validate()?;
    let s = Session::new(&a.train)?;
    let mut pol = load_or_baseline(a.train.init.as_deref(), a.train.cap, a.train.seed)?;
    let base_plans = synthesize_base_set(&baseline_config(a.train.cap), a.train.seed);
    for (c, _) in &base_plans {
        s.guard.check(c);
    }
    let base = BaseSet::score(base_plans, &s.oracle);
    let before = s.eval(&pol);
    let env = IterEnv {
        sampler: ConditionSampler::train(a.train.cap),
        guard: &s.guard,
        schedule: &s.schedule,
        oracle: &s.oracle,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(a.train.seed);
    let start = Instant::now();
    for round in 0..a.rounds {
        let (next, d) = sspt_iter_round(&pol, &base, &cfg, &env, round, &mut rng)?;
        pol = next;
        println!(
            "round {round}: median score {}  selected {} ({} fresh)  {:.1}s",
            opt(d.median_score),
            d.selected,
            d.selected_generated,
            d.seconds
        );
        s.log(&d)?;
    }
    s.finish(&pol, before, start.elapsed().as_secs_f64())
}

fn train_ppo(a: TrainPpoArgs) -> Result<(), Failure> {
    let cfg = PpoConfig {
        clip_eps: a.clip_eps,
        beta_kl: a.beta_kl,
        sub_epochs: a.sub_epochs,
        rollouts: a.rollouts,
        reward_clip: a.reward_clip,
        respacing: a.train.respacing.clone(),
        lr: a.lr,
        ..PpoConfig::default()
    };
    cfg.validate()?;
    let s = Session::new(&a.train)?;
    let mut pol = load_or_baseline(a.train.init.as_deref(), a.train.cap, a.train.seed)?;
    let before = s.eval(&pol);
    let env = PpoEnv {
        sampler: ConditionSampler::train(a.train.cap),
        guard: &s.guard,
        schedule: &s.schedule,
        oracle: &s.oracle,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(a.train.seed);
    let start = Instant::now();
    for round in 0..a.rounds {
        let (next, d) = sspt_ppo_round(&pol, &cfg, &env, round, &mut rng)?;
        pol = next;
        println!(
            "round {round}: median reward {}  failures {}  ratio {:.4}  clip {:.3}  {:.1}s",
            opt(d.median_reward),
            d.failures,
            d.mean_ratio_last,
            d.clip_fraction,
            d.seconds
        );
        s.log(&d)?;
    }
    s.finish(&pol, before, start.elapsed().as_secs_f64())
}

fn plot(a: PlotArgs) -> Result<(), Failure> {
    let stored = a.run_dir.join(REPORT_FILE);
    let mut report: BenchReport = if a.run_dir.join(PLANS_DIR).is_dir() {
        bench::replay(&a.run_dir, None)?
    } else {
        let text = fs::read_to_string(&stored).map_err(data(stored.display()))?;
        serde_json::from_str(&text).map_err(data(stored.display()))?
    };
    report.reference = match &a.reference {
        Some(p) => Some(bench::read_reference(fs::File::open(p).map_err(data(p.display()))?)?),
        None if stored.exists() => {
            let text = fs::read_to_string(&stored).map_err(data(stored.display()))?;
            let saved: BenchReport = serde_json::from_str(&text).map_err(data(stored.display()))?;
            saved.reference
        }
        None => None,
    };
    if report.profile.is_empty() {
        return Err(Failure::Data("no valid plans to plot".into()));
    }
    let out = a.out.unwrap_or_else(|| a.run_dir.join(PROFILE_FILE));
    fs::write(&out, emit_profile_svg(&report.profile, report.reference.as_ref())).map_err(data(out.display()))?;
    println!("profile written to {}", out.display());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn no_arguments_is_a_usage_error() {
        assert_eq!(cli_dispatch(["floorsyntax"]), 2);
        assert_eq!(cli_dispatch(["floorsyntax", "bench", "--samples", "many"]), 2);
        assert_eq!(cli_dispatch(["floorsyntax", "--help"]), 0);
    }

    #[test]
    fn cap_at_eval_rooms_is_a_usage_error() {
        let dir = tempfile::tempdir().unwrap();
        let runs = dir.path().to_str().unwrap();
        assert_eq!(
            cli_dispatch([
                "floorsyntax",
                "bench",
                "--cap",
                "8",
                "--runs-dir",
                runs,
                "--samples",
                "1"
            ]),
            2
        );
    }

    #[test]
    fn missing_input_is_a_data_error() {
        let dir = tempfile::tempdir().unwrap();
        let missing = dir.path().join("nope");
        let out = dir.path().join("out");
        assert_eq!(
            cli_dispatch([
                "floorsyntax",
                "analyze",
                missing.to_str().unwrap(),
                "--out",
                out.to_str().unwrap()
            ]),
            1
        );
        assert_eq!(cli_dispatch(["floorsyntax", "screen", missing.to_str().unwrap()]), 1);
    }
}
