//! Validity gates, robust living-room advantage, Top-K selection and
//! dataset-cleaning accounting.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{ConfigError, FlatConfig};
use crate::oracle::{PlanOutcome, PlanReport};
use crate::stats::{mad, median, population_std};

pub const DEFAULT_GATES: &str = include_str!("../data/gates.conf");

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ScreeningError {
    #[error("robust advantage needs at least one non-living room")]
    EmptyOthers,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateConfig {
    pub lambda_miss: f64,
    pub lambda_rooms: f64,
    pub lambda_area: f64,
    pub lambda_share: f64,
    pub min_rooms: usize,
    /// Minimum total room area in pixels.
    pub min_area: usize,
    pub share_min: f64,
    pub share_max: f64,
    pub epsilon: f64,
    /// Room type names left out of the robust advantage.
    pub ignore: Vec<String>,
}

impl Default for GateConfig {
    fn default() -> Self {
        Self::parse(DEFAULT_GATES).expect("bundled gate config is valid")
    }
}

impl GateConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let c = FlatConfig::parse(text)?;
        let known = [
            "lambda_miss",
            "lambda_rooms",
            "lambda_area",
            "lambda_share",
            "min_rooms",
            "min_area",
            "share_min",
            "share_max",
            "epsilon",
            "ignore",
        ];
        if let Some((k, _)) = c.entries().find(|(k, _)| !known.contains(k)) {
            return Err(ConfigError::UnknownKey(k.to_string()));
        }
        let need = |k: &str| -> Result<f64, ConfigError> {
            c.parse_value(k)?
                .ok_or_else(|| ConfigError::Invalid(format!("missing key {k}")))
        };
        let cfg = Self {
            lambda_miss: need("lambda_miss")?,
            lambda_rooms: need("lambda_rooms")?,
            lambda_area: need("lambda_area")?,
            lambda_share: need("lambda_share")?,
            min_rooms: c.parse_value("min_rooms")?.unwrap_or(3),
            min_area: c.parse_value("min_area")?.unwrap_or(1000),
            share_min: need("share_min")?,
            share_max: need("share_max")?,
            epsilon: c.parse_value("epsilon")?.unwrap_or(1e-8),
            ignore: c
                .get("ignore")
                .map(|v| {
                    v.split(',')
                        .map(str::trim)
                        .filter(|s| !s.is_empty())
                        .map(String::from)
                        .collect()
                })
                .unwrap_or_default(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        for (k, v) in [
            ("lambda_miss", self.lambda_miss),
            ("lambda_rooms", self.lambda_rooms),
            ("lambda_area", self.lambda_area),
            ("lambda_share", self.lambda_share),
        ] {
            if !(v <= 0.0) {
                return Err(ConfigError::Invalid(format!("{k} must be non-positive, got {v}")));
            }
        }
        if !(0.0 <= self.share_min && self.share_min < self.share_max && self.share_max <= 1.0) {
            return Err(ConfigError::Invalid(format!(
                "share band [{}, {}] must satisfy 0 <= min < max <= 1",
                self.share_min, self.share_max
            )));
        }
        if !(self.epsilon > 0.0) {
            return Err(ConfigError::Invalid("epsilon must be positive".into()));
        }
        Ok(())
    }
}

/// `z = (mu_l - median(others)) / (MAD(others) + eps)`. A zero MAD falls back
/// to the population standard deviation; if that is zero too the denominator is `eps`.
pub fn robust_advantage(mu_l: f64, others: &[f64], eps: f64) -> Result<f64, ScreeningError> {
    if others.is_empty() {
        return Err(ScreeningError::EmptyOthers);
    }
    let med = median(others);
    let spread = mad(others);
    let denom = if spread > 0.0 {
        spread + eps
    } else {
        let sd = population_std(others);
        if sd > 0.0 {
            sd + eps
        } else {
            eps
        }
    };
    Ok((mu_l - med) / denom)
}

/// Which gates fired for a plan.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateHits {
    pub living_missing: bool,
    pub few_rooms: bool,
    pub small_area: bool,
    pub share_out_of_band: bool,
}

impl GateHits {
    pub fn any(&self) -> bool {
        self.living_missing || self.few_rooms || self.small_area || self.share_out_of_band
    }
}

pub fn gate_hits(r: &PlanReport, cfg: &GateConfig) -> GateHits {
    let share_ok = r
        .living_area_share
        .is_some_and(|s| s >= cfg.share_min && s <= cfg.share_max);
    GateHits {
        living_missing: !r.living_present(),
        few_rooms: r.total_rooms < cfg.min_rooms,
        small_area: r.total_area < cfg.min_area,
        share_out_of_band: !share_ok,
    }
}

/// Additive, independent gate penalties.
pub fn penalty(r: &PlanReport, cfg: &GateConfig) -> f64 {
    penalty_from_hits(gate_hits(r, cfg), cfg)
}

fn penalty_from_hits(h: GateHits, cfg: &GateConfig) -> f64 {
    let mut p = 0.0;
    if h.living_missing {
        p += cfg.lambda_miss;
    }
    if h.few_rooms {
        p += cfg.lambda_rooms;
    }
    if h.small_area {
        p += cfg.lambda_area;
    }
    if h.share_out_of_band {
        p += cfg.lambda_share;
    }
    p
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectionScore {
    pub z: f64,
    pub p: f64,
    /// `z + p`, or negative infinity for plans without a scored graph.
    pub s: f64,
    pub gates: GateHits,
}

impl SelectionScore {
    pub fn is_selectable(&self) -> bool {
        self.s.is_finite()
    }
}

/// Scores a plan. Plans without a scored graph get `s = -inf`. A plan without
/// a scored living room or without scored rivals gets `z = 0`.
pub fn selection_score(r: &PlanReport, cfg: &GateConfig) -> SelectionScore {
    let gates = gate_hits(r, cfg);
    let p = penalty_from_hits(gates, cfg);
    if !r.has_scores() {
        return SelectionScore {
            z: 0.0,
            p,
            s: f64::NEG_INFINITY,
            gates,
        };
    }
    let (living, _) = r.living_and_others();
    let others: Vec<f64> = r
        .rooms
        .iter()
        .filter(|room| room.category != crate::metrics::Category::Living)
        .filter(|room| !cfg.ignore.contains(&room.type_name))
        .filter_map(|room| room.mean)
        .collect();
    let z = living
        .and_then(|mu| robust_advantage(mu, &others, cfg.epsilon).ok())
        .unwrap_or(0.0);
    SelectionScore { z, p, s: z + p, gates }
}

/// The `k` best ids over the union of both lists, best first. A duplicated id
/// keeps its highest score; ties go to the smaller id; non-finite scores are
/// never selected.
pub fn top_k<I: Ord + Clone>(candidates: &[(I, f64)], base: &[(I, f64)], k: usize) -> Vec<I> {
    assert!(k >= 1, "k must be at least 1");
    let mut best: BTreeMap<I, f64> = BTreeMap::new();
    for (id, s) in candidates.iter().chain(base) {
        if !s.is_finite() {
            continue;
        }
        best.entry(id.clone()).and_modify(|v| *v = v.max(*s)).or_insert(*s);
    }
    let mut ranked: Vec<(I, f64)> = best.into_iter().collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    ranked.into_iter().take(k).map(|(id, _)| id).collect()
}

/// Stage counts for a cleaned dataset.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CleaningLedger {
    pub total: usize,
    pub parse_failed: usize,
    pub build_org: usize,
    pub build_house: usize,
    pub syn_skip: usize,
}

impl CleaningLedger {
    pub fn from_counts(
        total: usize,
        parse_failed: usize,
        build_org: usize,
        build_house: usize,
        syn_skip: usize,
    ) -> Self {
        let l = Self {
            total,
            parse_failed,
            build_org,
            build_house,
            syn_skip,
        };
        assert!(l.excluded() <= total, "more failures than plans");
        l
    }

    pub fn count(&self, outcome: PlanOutcome) -> usize {
        match outcome {
            PlanOutcome::Usable => self.usable(),
            PlanOutcome::ParseFailed => self.parse_failed,
            PlanOutcome::BuildOrg => self.build_org,
            PlanOutcome::BuildHouse => self.build_house,
            PlanOutcome::SynSkip => self.syn_skip,
        }
    }

    pub fn excluded(&self) -> usize {
        self.parse_failed + self.build_org + self.build_house + self.syn_skip
    }

    pub fn usable(&self) -> usize {
        self.total - self.excluded()
    }

    /// Share of the total in percent; 0 for an empty ledger.
    pub fn percent(&self, count: usize) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            100.0 * count as f64 / self.total as f64
        }
    }

    /// Rows `(stage, count, percent)` with percentages rounded to two decimals.
    pub fn rows(&self) -> Vec<(&'static str, usize, String)> {
        let mut rows = vec![("total", self.total, format!("{:.2}", self.percent(self.total)))];
        for o in PlanOutcome::FAILURES {
            let n = self.count(o);
            rows.push((o.name(), n, format!("{:.2}", self.percent(n))));
        }
        rows.push((
            "excluded",
            self.excluded(),
            format!("{:.2}", self.percent(self.excluded())),
        ));
        rows.push(("usable", self.usable(), format!("{:.2}", self.percent(self.usable()))));
        rows
    }

    pub fn write_csv<W: Write>(&self, w: W) -> csv::Result<()> {
        let mut out = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(w);
        out.write_record(["stage", "count", "percent"])?;
        for (stage, n, pct) in self.rows() {
            out.write_record([stage.to_string(), n.to_string(), pct])?;
        }
        out.flush()?;
        Ok(())
    }
}

pub fn clean_dataset(outcomes: &[PlanOutcome]) -> CleaningLedger {
    let mut l = CleaningLedger {
        total: outcomes.len(),
        ..Default::default()
    };
    for o in outcomes {
        match o {
            PlanOutcome::Usable => {}
            PlanOutcome::ParseFailed => l.parse_failed += 1,
            PlanOutcome::BuildOrg => l.build_org += 1,
            PlanOutcome::BuildHouse => l.build_house += 1,
            PlanOutcome::SynSkip => l.syn_skip += 1,
        }
    }
    l
}
