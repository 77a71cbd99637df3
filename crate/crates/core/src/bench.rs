//! Out-of-distribution benchmark: sample a checkpoint under exactly-N-room
//! programs, run the oracle on every plan and aggregate.
//!
//! A run directory looks like
//!
//! ```text
//! runs/<run-id>/
//!   plans/<plan-id>.json             per-plan oracle reports
//!   convex_integration_summary.csv   one row per plan
//!   bench_report.json                aggregate (BenchReport)
//!   profile.svg                      median relative profile
//!   train_log.csv                    written by the training commands
//! ```
//!
//! Everything except `train_log.csv` is a function of the `plans/` directory
//! and the reference profile; [`rebuild_outputs`] regenerates it.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, BufReader, Read};
use std::path::{Path, PathBuf};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::ConfigError;
use crate::generator::condition::{read_conditions, Condition, ConditionError, ConditionSampler};
use crate::generator::layout::RenderConfig;
use crate::generator::policy::Policy;
use crate::generator::sampling::rollout_batch;
use crate::generator::schedule::{NoiseSchedule, SamplingSchedule};
use crate::metrics::{profile_distance, Category};
use crate::oracle::{OracleConfig, PlanOutcome, PlanReport};
use crate::post_training::oracles::SpaceSyntaxOracle;
use crate::post_training::respace::{respace, RespaceError};
use crate::report::{write_summary, ReportError, SummaryRow, SUMMARY_FILE};
use crate::stats::{self, summarize, SummaryStats};
use crate::svg::{emit_profile_svg, ProfilePoint};

pub const BENCH_SCHEMA: &str = "floorsyntax.bench_report.v1";
pub const REPORT_FILE: &str = "bench_report.json";
pub const PROFILE_FILE: &str = "profile.svg";
pub const PLANS_DIR: &str = "plans";
pub const TRAIN_LOG_FILE: &str = "train_log.csv";
/// Worker-count override for the analysis pool.
pub const WORKERS_ENV: &str = "FLOORSYNTAX_WORKERS";
/// Published median relative profile of the 8-room reference corpus.
pub const DEFAULT_REFERENCE: &str = include_str!("../data/reference_rplan8.csv");

/// Metrics summarized in every report, in output order.
pub const METRICS: [&str; 4] = ["public_score", "living_room", "living_adv", "integration"];

#[derive(Debug, Error)]
pub enum BenchError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Respace(#[from] RespaceError),
    #[error(transparent)]
    Condition(#[from] ConditionError),
    #[error(transparent)]
    Report(#[from] ReportError),
    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("bad plan report {path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
    #[error("reference profile: {0}")]
    Reference(String),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> BenchError + '_ {
    move |source| BenchError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchConfig {
    /// Room cap of the training programs; evaluation must exceed it.
    pub cap: usize,
    /// Room count of every evaluation program.
    pub eval_rooms: usize,
    pub samples: usize,
    pub respacing: String,
    pub seed: u64,
    pub render: RenderConfig,
    pub oracle: OracleConfig,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            cap: 7,
            eval_rooms: 8,
            samples: 200,
            respacing: "80,20,0,0".into(),
            seed: 0,
            render: RenderConfig::default(),
            oracle: OracleConfig::default(),
        }
    }
}

impl BenchConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.cap >= self.eval_rooms {
            return Err(ConfigError::Invalid(format!(
                "training cap {} must be below the evaluation room count {}",
                self.cap, self.eval_rooms
            )));
        }
        if self.samples == 0 {
            return Err(ConfigError::Invalid("samples must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidityCounts {
    pub total: usize,
    pub valid: usize,
    pub invalid: usize,
    /// Per-outcome counts; empty when built from summary rows.
    pub outcomes: BTreeMap<String, usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub schema: String,
    pub validity: ValidityCounts,
    /// Summary statistics over valid plans; absent when no plan has the metric.
    pub metrics: BTreeMap<String, Option<SummaryStats>>,
    /// Median relative integration per category, in fixed category order.
    pub profile: Vec<ProfilePoint>,
    pub reference: Option<BTreeMap<Category, f64>>,
    /// Mean absolute gap between profile and reference medians over the
    /// categories both contain.
    pub d_profile: Option<f64>,
    pub d_profile_categories: usize,
}

impl BenchReport {
    pub fn from_rows(rows: &[SummaryRow], reference: Option<&BTreeMap<Category, f64>>) -> Self {
        let valid: Vec<&SummaryRow> = rows.iter().filter(|r| r.valid).collect();
        let metric = |f: fn(&SummaryRow) -> Option<f64>| {
            let xs: Vec<f64> = valid.iter().filter_map(|r| f(r)).filter(|x| x.is_finite()).collect();
            summarize(&xs).ok()
        };
        let mut metrics = BTreeMap::new();
        metrics.insert("public_score".to_string(), metric(|r| r.public_score));
        metrics.insert("living_room".to_string(), metric(|r| r.living_room));
        metrics.insert("living_adv".to_string(), metric(|r| r.living_adv));
        metrics.insert("integration".to_string(), metric(|r| r.integration));

        let profile: Vec<ProfilePoint> = Category::DENOMINATOR
            .iter()
            .filter_map(|&g| {
                let xs: Vec<f64> = valid.iter().filter_map(|r| r.relative.get(&g).copied()).collect();
                if xs.is_empty() {
                    return None;
                }
                let s = stats::sorted(&xs);
                Some(ProfilePoint {
                    category: g,
                    median: stats::quantile_sorted(&s, 0.5),
                    q25: stats::quantile_sorted(&s, 0.25),
                    q75: stats::quantile_sorted(&s, 0.75),
                    n: s.len(),
                })
            })
            .collect();

        let (d_profile, d_profile_categories) = match reference {
            Some(r) => {
                let y: BTreeMap<Category, f64> = profile
                    .iter()
                    .filter(|p| r.contains_key(&p.category))
                    .map(|p| (p.category, p.median))
                    .collect();
                let r: BTreeMap<Category, f64> = r
                    .iter()
                    .filter(|(g, _)| y.contains_key(g))
                    .map(|(&g, &v)| (g, v))
                    .collect();
                (profile_distance(&y, &r).ok(), y.len())
            }
            None => (None, 0),
        };

        Self {
            schema: BENCH_SCHEMA.into(),
            validity: ValidityCounts {
                total: rows.len(),
                valid: valid.len(),
                invalid: rows.len() - valid.len(),
                outcomes: BTreeMap::new(),
            },
            metrics,
            profile,
            reference: reference.cloned(),
            d_profile,
            d_profile_categories,
        }
    }

    pub fn from_reports(reports: &[PlanReport], reference: Option<&BTreeMap<Category, f64>>) -> Self {
        let rows: Vec<SummaryRow> = reports.iter().map(SummaryRow::from_report).collect();
        let mut out = Self::from_rows(&rows, reference);
        let mut outcomes: BTreeMap<String, usize> = std::iter::once(PlanOutcome::Usable)
            .chain(PlanOutcome::FAILURES)
            .map(|o| (o.name().to_string(), 0))
            .collect();
        for r in reports {
            *outcomes.entry(r.outcome.name().to_string()).or_default() += 1;
        }
        out.validity.outcomes = outcomes;
        out
    }

    pub fn metric(&self, name: &str) -> Option<&SummaryStats> {
        self.metrics.get(name).and_then(Option::as_ref)
    }

    pub fn median_profile(&self) -> BTreeMap<Category, f64> {
        self.profile.iter().map(|p| (p.category, p.median)).collect()
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn svg(&self) -> Option<String> {
        (!self.profile.is_empty()).then(|| emit_profile_svg(&self.profile, self.reference.as_ref()))
    }
}

/// Parses a `category,median` table; `#` lines are comments.
pub fn read_reference<R: Read>(r: R) -> Result<BTreeMap<Category, f64>, BenchError> {
    let mut out = BTreeMap::new();
    let mut header_seen = false;
    for (i, line) in BufReader::new(r).lines().enumerate() {
        let line = line.map_err(|e| BenchError::Reference(e.to_string()))?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        if !header_seen {
            if t.replace(' ', "") != "category,median" {
                return Err(BenchError::Reference(format!(
                    "line {}: expected header category,median",
                    i + 1
                )));
            }
            header_seen = true;
            continue;
        }
        let (name, value) = t
            .split_once(',')
            .ok_or_else(|| BenchError::Reference(format!("line {}: expected two fields", i + 1)))?;
        let g = Category::from_name(name.trim())
            .ok_or_else(|| BenchError::Reference(format!("line {}: unknown category {name:?}", i + 1)))?;
        let v: f64 = value
            .trim()
            .parse()
            .map_err(|_| BenchError::Reference(format!("line {}: bad value {value:?}", i + 1)))?;
        if out.insert(g, v).is_some() {
            return Err(BenchError::Reference(format!(
                "line {}: duplicate category {name}",
                i + 1
            )));
        }
    }
    if out.is_empty() {
        return Err(BenchError::Reference("no categories".into()));
    }
    Ok(out)
}

pub fn default_reference() -> BTreeMap<Category, f64> {
    read_reference(DEFAULT_REFERENCE.as_bytes()).expect("bundled reference parses")
}

/// Sizes the global rayon pool from the worker variable, if set. Returns the
/// requested count; later calls after the pool exists are no-ops.
pub fn init_workers() -> Option<usize> {
    let n: usize = std::env::var(WORKERS_ENV)
        .ok()?
        .trim()
        .parse()
        .ok()
        .filter(|&n| n >= 1)?;
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Some(n)
}

/// `n` evaluation programs: drawn from the seed, or cycled from a file.
pub fn eval_conditions(cfg: &BenchConfig, from_file: Option<&[Condition]>) -> Vec<Condition> {
    match from_file {
        Some(list) if !list.is_empty() => list.iter().cycle().take(cfg.samples).cloned().collect(),
        _ => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0xe7a1_8000);
            let sampler = ConditionSampler::exact(cfg.eval_rooms);
            (0..cfg.samples)
                .map(|k| sampler.sample(format!("eval{k:05}"), &mut rng))
                .collect()
        }
    }
}

pub fn load_conditions(path: &Path) -> Result<Vec<Condition>, BenchError> {
    let f = fs::File::open(path).map_err(io_err(path))?;
    Ok(read_conditions(BufReader::new(f))?)
}

/// Samples one plan per condition and analyzes each; output order follows `conds`.
pub fn sample_reports(
    pol: &Policy,
    conds: &[Condition],
    sched: &SamplingSchedule,
    oracle: &SpaceSyntaxOracle,
    seed: u64,
) -> Vec<PlanReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let enc: Vec<Vec<f64>> = conds.iter().map(|c| pol.encode(c)).collect();
    let seeds: Vec<u64> = (0..conds.len()).map(|_| rng.next_u64()).collect();
    let trajs = rollout_batch(pol, &enc, &seeds, sched);
    trajs
        .par_iter()
        .zip(conds)
        .enumerate()
        .map(|(k, (t, c))| oracle.evaluate(&format!("plan{k:05}"), &t.x0, c).report)
        .collect()
}

pub fn run_bench(
    pol: &Policy,
    cfg: &BenchConfig,
    conditions: Option<&[Condition]>,
    reference: Option<&BTreeMap<Category, f64>>,
    out_dir: &Path,
) -> Result<BenchReport, BenchError> {
    cfg.validate()?;
    let max_rooms = pol.config.max_rooms.unwrap_or(usize::MAX);
    let conds = eval_conditions(cfg, conditions);
    for c in &conds {
        c.validate(max_rooms)?;
    }
    let ts = respace(&cfg.respacing, NoiseSchedule::DEFAULT_STEPS)?;
    let sched = SamplingSchedule::new(&NoiseSchedule::default(), &ts);
    let oracle = SpaceSyntaxOracle {
        render: cfg.render,
        oracle: cfg.oracle.clone(),
        ..SpaceSyntaxOracle::default()
    };
    let reports = sample_reports(pol, &conds, &sched, &oracle, cfg.seed);

    let plans = out_dir.join(PLANS_DIR);
    fs::create_dir_all(&plans).map_err(io_err(&plans))?;
    for r in &reports {
        let p = plans.join(format!("{}.json", r.plan_id));
        fs::write(&p, r.to_json()).map_err(io_err(&p))?;
    }
    write_outputs(&reports, reference, out_dir)
}

/// Writes summary CSV, bench report and SVG for the given plan reports.
pub fn write_outputs(
    reports: &[PlanReport],
    reference: Option<&BTreeMap<Category, f64>>,
    out_dir: &Path,
) -> Result<BenchReport, BenchError> {
    fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    let rows: Vec<SummaryRow> = reports.iter().map(SummaryRow::from_report).collect();
    let summary = out_dir.join(SUMMARY_FILE);
    let f = fs::File::create(&summary).map_err(io_err(&summary))?;
    write_summary(&rows, std::io::BufWriter::new(f))?;

    let report = BenchReport::from_reports(reports, reference);
    let json = out_dir.join(REPORT_FILE);
    fs::write(&json, report.to_json()).map_err(io_err(&json))?;
    let svg = out_dir.join(PROFILE_FILE);
    match report.svg() {
        Some(s) => fs::write(&svg, s).map_err(io_err(&svg))?,
        None => {
            if svg.exists() {
                fs::remove_file(&svg).map_err(io_err(&svg))?;
            }
        }
    }
    Ok(report)
}

/// Reads every `plans/*.json` of a run directory, sorted by file name.
pub fn read_plan_reports(run_dir: &Path) -> Result<Vec<PlanReport>, BenchError> {
    let dir = run_dir.join(PLANS_DIR);
    let mut paths: Vec<PathBuf> = fs::read_dir(&dir)
        .map_err(io_err(&dir))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    paths
        .iter()
        .map(|p| {
            let text = fs::read_to_string(p).map_err(io_err(p))?;
            PlanReport::from_json(&text).map_err(|source| BenchError::Json {
                path: p.clone(),
                source,
            })
        })
        .collect()
}

/// Recomputes the aggregate of a run directory from its plan reports.
pub fn replay(run_dir: &Path, reference: Option<&BTreeMap<Category, f64>>) -> Result<BenchReport, BenchError> {
    Ok(BenchReport::from_reports(&read_plan_reports(run_dir)?, reference))
}

/// Regenerates summary CSV, bench report and SVG from the plan reports.
pub fn rebuild_outputs(run_dir: &Path, reference: Option<&BTreeMap<Category, f64>>) -> Result<BenchReport, BenchError> {
    let reports = read_plan_reports(run_dir)?;
    write_outputs(&reports, reference, run_dir)
}

/// Median public score of one plan per condition, or `None` if no plan scores.
pub fn median_public_score(
    pol: &Policy,
    conds: &[Condition],
    sched: &SamplingSchedule,
    oracle: &SpaceSyntaxOracle,
    seed: u64,
) -> Option<f64> {
    let xs: Vec<f64> = sample_reports(pol, conds, sched, oracle, seed)
        .iter()
        .filter(|r| r.valid)
        .filter_map(|r| r.public_score)
        .collect();
    (!xs.is_empty()).then(|| stats::median(&xs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generator::policy::{init_policy, PolicyConfig};
    use crate::generator::training::{pretrain_baseline, PretrainConfig};

    fn row(id: &str, valid: bool, public: f64, rel: &[(Category, f64)]) -> SummaryRow {
        SummaryRow {
            plan_id: id.into(),
            valid,
            public_score: Some(public),
            relative: rel.iter().copied().collect(),
            ..SummaryRow::default()
        }
    }

    #[test]
    fn cap_must_be_below_eval_rooms() {
        let cfg = BenchConfig {
            cap: 8,
            ..BenchConfig::default()
        };
        assert!(cfg.validate().is_err());
        let cfg = BenchConfig {
            samples: 0,
            ..BenchConfig::default()
        };
        assert!(cfg.validate().is_err());
        assert!(BenchConfig::default().validate().is_ok());
    }

    #[test]
    fn invalid_rows_only_count() {
        let rows = vec![
            row("a", true, 0.1, &[(Category::Living, 1.2)]),
            row("b", false, 9.0, &[(Category::Living, 9.0)]),
            row("c", true, 0.3, &[(Category::Living, 1.4), (Category::Bedroom, 0.8)]),
        ];
        let r = BenchReport::from_rows(&rows, None);
        assert_eq!((r.validity.total, r.validity.valid, r.validity.invalid), (3, 2, 1));
        assert!((r.metric("public_score").unwrap().median - 0.2).abs() < 1e-15);
        assert!(r.metric("integration").is_none());
        assert_eq!(r.profile.len(), 2);
        assert_eq!(r.profile[1].n, 1);
        assert_eq!(r.d_profile, None);
    }

    #[test]
    fn d_profile_uses_shared_categories() {
        let rows = vec![row(
            "a",
            true,
            0.1,
            &[(Category::Living, 1.5), (Category::Bedroom, 0.5)],
        )];
        let reference: BTreeMap<Category, f64> = [
            (Category::Living, 1.0),
            (Category::Bedroom, 1.0),
            (Category::Storage, 3.0),
        ]
        .into_iter()
        .collect();
        let r = BenchReport::from_rows(&rows, Some(&reference));
        assert_eq!(r.d_profile, Some(0.5));
        assert_eq!(r.d_profile_categories, 2);
    }

    #[test]
    fn reference_file_parses() {
        let r = default_reference();
        assert_eq!(r.len(), 5);
        assert_eq!(r[&Category::Living], 1.6286);
        assert!(read_reference("category,median\nliving,1\nliving,2\n".as_bytes()).is_err());
        assert!(read_reference("cat,value\nliving,1\n".as_bytes()).is_err());
        assert!(read_reference("# c\n".as_bytes()).is_err());
    }

    #[test]
    fn single_sample_has_degenerate_stats() {
        let pol = pretrain_baseline(
            &PretrainConfig {
                plans: 16,
                epochs: 2,
                ..PretrainConfig::default()
            },
            0,
        );
        let dir = tempfile::tempdir().unwrap();
        let cfg = BenchConfig {
            samples: 1,
            ..BenchConfig::default()
        };
        let r = run_bench(&pol, &cfg, None, None, dir.path()).unwrap();
        assert_eq!(r.validity.total, 1);
        for s in r.metrics.values().flatten() {
            assert_eq!(s.n, 1);
            assert_eq!(s.std, 0.0);
        }
    }

    #[test]
    fn outputs_rebuild_byte_equal() {
        let pol = pretrain_baseline(
            &PretrainConfig {
                plans: 32,
                epochs: 3,
                ..PretrainConfig::default()
            },
            1,
        );
        let dir = tempfile::tempdir().unwrap();
        let cfg = BenchConfig {
            samples: 12,
            seed: 5,
            ..BenchConfig::default()
        };
        let reference = default_reference();
        let r = run_bench(&pol, &cfg, None, Some(&reference), dir.path()).unwrap();
        let read = |f: &str| fs::read(dir.path().join(f)).ok();
        let before: Vec<_> = [SUMMARY_FILE, REPORT_FILE, PROFILE_FILE]
            .iter()
            .map(|f| read(f))
            .collect();
        for f in [SUMMARY_FILE, REPORT_FILE, PROFILE_FILE] {
            let _ = fs::remove_file(dir.path().join(f));
        }
        let again = rebuild_outputs(dir.path(), Some(&reference)).unwrap();
        assert_eq!(again, r);
        let after: Vec<_> = [SUMMARY_FILE, REPORT_FILE, PROFILE_FILE]
            .iter()
            .map(|f| read(f))
            .collect();
        assert_eq!(before, after);
    }

    #[test]
    fn oversized_file_conditions_are_rejected() {
        let pol = init_policy(PolicyConfig::for_layout(4), 0).unwrap();
        let cfg = BenchConfig {
            cap: 3,
            eval_rooms: 4,
            samples: 2,
            ..BenchConfig::default()
        };
        let big = ConditionSampler::exact(6).sample("big".into(), &mut ChaCha8Rng::seed_from_u64(0));
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(
            run_bench(&pol, &cfg, Some(&[big]), None, dir.path()),
            Err(BenchError::Condition(_))
        ));
    }
}
