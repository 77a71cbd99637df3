//! End-to-end plan analysis: mask -> derived masks -> rectangle graph ->
//! integration -> metrics, collected into a serializable [`PlanReport`].

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::codes::ChannelCodeTable;
use crate::integration::{
    all_pairs_depth, node_integration, plan_integration, room_mean_integration, Method, NodeScores, RaNormalization,
    RoomScores,
};
use crate::mask_io::{derive_masks, parse_layout_with, room_cores, LayoutMask};
use crate::metrics::{category_profile, living_metrics, public_score, Category, CategoryMap, MetricsError};
use crate::syntax_graph::{build_graph_from_cores, GraphParams, RectGraph};

/// Version tag written into every plan report.
pub const REPORT_SCHEMA: &str = "floorsyntax.plan_report.v1";

/// Pipeline stage at which a plan stopped, mirroring the dataset-cleaning categories.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlanOutcome {
    #[default]
    Usable,
    /// The raster could not be decoded or violates channel invariants.
    ParseFailed,
    /// A room instance has no walkable core.
    BuildOrg,
    /// No rectangle graph could be built.
    BuildHouse,
    /// Integration could not be computed on the graph.
    SynSkip,
}

impl PlanOutcome {
    pub const FAILURES: [PlanOutcome; 4] = [
        PlanOutcome::ParseFailed,
        PlanOutcome::BuildOrg,
        PlanOutcome::BuildHouse,
        PlanOutcome::SynSkip,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PlanOutcome::Usable => "usable",
            PlanOutcome::ParseFailed => "parse_failed",
            PlanOutcome::BuildOrg => "build_org",
            PlanOutcome::BuildHouse => "build_house",
            PlanOutcome::SynSkip => "syn_skip",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    pub codes: ChannelCodeTable,
    pub categories: CategoryMap,
    pub graph: GraphParams,
    pub method: Method,
    pub normalization: RaNormalization,
    /// Reject unknown boundary codes instead of snapping them.
    pub strict_codes: bool,
    /// Reject disconnected graphs instead of analyzing the largest component.
    pub strict_connectivity: bool,
}

impl Default for OracleConfig {
    fn default() -> Self {
        let codes = ChannelCodeTable::default();
        Self {
            categories: CategoryMap::from_codes(&codes),
            codes,
            graph: GraphParams::default(),
            method: Method::Hh,
            normalization: RaNormalization::Diamond,
            strict_codes: false,
            strict_connectivity: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoomReport {
    pub instance_id: u8,
    pub room_type: u8,
    pub type_name: String,
    pub category: Category,
    pub pixels: usize,
    pub core_pixels: usize,
    pub rects: usize,
    /// Room-mean integration; absent when no rectangle was scored.
    pub mean: Option<f64>,
}

/// Per-plan oracle output. Optional metrics are absent when undefined.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanReport {
    pub schema: String,
    pub plan_id: String,
    pub outcome: PlanOutcome,
    pub valid: bool,
    pub error: Option<String>,
    pub flags: Vec<String>,
    pub method: Method,
    pub width: usize,
    pub height: usize,
    pub node_count: usize,
    pub edge_count: usize,
    pub analyzed_nodes: usize,
    pub door_pairs: usize,
    pub integration: Option<f64>,
    pub public_score: Option<f64>,
    pub living_room: Option<f64>,
    pub living_adv: Option<f64>,
    /// Absolute category integration `I`.
    pub category_integration: BTreeMap<Category, f64>,
    /// Relative category integration `R`.
    pub relative_integration: BTreeMap<Category, f64>,
    pub rooms: Vec<RoomReport>,
    pub total_rooms: usize,
    pub total_area: usize,
    pub living_area: usize,
    pub living_area_share: Option<f64>,
}

impl PlanReport {
    fn empty(plan_id: &str, method: Method) -> Self {
        Self {
            schema: REPORT_SCHEMA.to_string(),
            plan_id: plan_id.to_string(),
            outcome: PlanOutcome::Usable,
            valid: false,
            error: None,
            flags: Vec::new(),
            method,
            width: 0,
            height: 0,
            node_count: 0,
            edge_count: 0,
            analyzed_nodes: 0,
            door_pairs: 0,
            integration: None,
            public_score: None,
            living_room: None,
            living_adv: None,
            category_integration: BTreeMap::new(),
            relative_integration: BTreeMap::new(),
            rooms: Vec::new(),
            total_rooms: 0,
            total_area: 0,
            living_area: 0,
            living_area_share: None,
        }
    }

    /// A report for a plan that could not be decoded or rendered.
    pub fn failed(plan_id: &str, outcome: PlanOutcome, error: impl Into<String>, cfg: &OracleConfig) -> Self {
        let mut r = Self::empty(plan_id, cfg.method);
        r.outcome = outcome;
        r.error = Some(error.into());
        r
    }

    pub fn living_present(&self) -> bool {
        self.rooms.iter().any(|r| r.category == Category::Living)
    }

    /// Highest living-room mean and the means of every other scored room.
    pub fn living_and_others(&self) -> (Option<f64>, Vec<f64>) {
        let mut living: Option<f64> = None;
        let mut others = Vec::new();
        for r in &self.rooms {
            let Some(m) = r.mean else { continue };
            if r.category == Category::Living {
                living = Some(living.map_or(m, |l| l.max(m)));
            } else {
                others.push(m);
            }
        }
        (living, others)
    }

    /// Whether a graph was built and scored at all.
    pub fn has_scores(&self) -> bool {
        self.integration.is_some()
    }

    pub fn add_flag(&mut self, flag: impl Into<String>) {
        let f = flag.into();
        if let Err(pos) = self.flags.binary_search(&f) {
            self.flags.insert(pos, f);
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plan reports serialize")
    }

    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }
}

/// Intermediate products of one analysis, for callers that need more than the report.
#[derive(Clone, Debug)]
pub struct Analysis {
    pub report: PlanReport,
    pub graph: Option<RectGraph>,
    pub node_scores: Option<NodeScores>,
    pub room_scores: Option<RoomScores>,
}

pub fn analyze_png(plan_id: &str, bytes: &[u8], cfg: &OracleConfig) -> PlanReport {
    match parse_layout_with(bytes, &cfg.codes) {
        Ok(m) => analyze_mask(plan_id, &m, cfg),
        Err(e) => PlanReport::failed(plan_id, PlanOutcome::ParseFailed, e.to_string(), cfg),
    }
}

pub fn analyze_mask(plan_id: &str, m: &LayoutMask, cfg: &OracleConfig) -> PlanReport {
    analyze(plan_id, m, cfg).report
}

/// Analyzes many masks in parallel; output order follows input order.
pub fn analyze_batch(items: &[(String, LayoutMask)], cfg: &OracleConfig) -> Vec<PlanReport> {
    items.par_iter().map(|(id, m)| analyze_mask(id, m, cfg)).collect()
}

pub fn analyze(plan_id: &str, m: &LayoutMask, cfg: &OracleConfig) -> Analysis {
    let mut report = PlanReport::empty(plan_id, cfg.method);
    report.width = m.width();
    report.height = m.height();
    let out = |report: PlanReport| Analysis {
        report,
        graph: None,
        node_scores: None,
        room_scores: None,
    };

    let flags = m.flags();
    if !flags.unknown_semantic.is_empty() {
        report.add_flag("unknown_semantic");
    }
    if !flags.mixed_instances.is_empty() {
        report.add_flag("mixed_instances");
    }
    if flags.snapped_interior > 0 {
        report.add_flag("snapped_interior");
    }

    let derived = match derive_masks(m, &cfg.codes, cfg.strict_codes) {
        Ok(d) => d,
        Err(e) => {
            report.outcome = PlanOutcome::ParseFailed;
            report.error = Some(e.to_string());
            return out(report);
        }
    };
    if derived.snapped_boundary > 0 {
        report.add_flag("snapped_boundary");
    }

    let cores: Vec<_> = room_cores(m, &derived)
        .into_iter()
        .filter(|c| cfg.codes.is_room_code(c.room_type))
        .collect();
    for c in &cores {
        let cat = cfg.categories.category(c.room_type);
        report.total_area += c.instance_pixels;
        if cat == Category::Living {
            report.living_area += c.instance_pixels;
        }
        report.rooms.push(RoomReport {
            instance_id: c.instance_id,
            room_type: c.room_type,
            type_name: cfg.codes.semantic_name(c.room_type).unwrap_or("unknown").to_string(),
            category: cat,
            pixels: c.instance_pixels,
            core_pixels: c.core_pixels,
            rects: 0,
            mean: None,
        });
    }
    report.total_rooms = cores.len();
    if report.total_area > 0 {
        report.living_area_share = Some(report.living_area as f64 / report.total_area as f64);
    }
    if cores.iter().any(|c| c.is_empty()) {
        report.outcome = PlanOutcome::BuildOrg;
        report.add_flag("empty_core");
    }

    let graph = match build_graph_from_cores(&cores, &derived, &cfg.graph) {
        Ok(g) => g,
        Err(e) => {
            if report.outcome == PlanOutcome::Usable {
                report.outcome = PlanOutcome::BuildHouse;
            }
            report.error = Some(e.to_string());
            return out(report);
        }
    };
    report.node_count = graph.node_count();
    report.edge_count = graph.edges.len();
    report.door_pairs = graph.doors.pairs.len();
    if graph.skipped_door_pairs > 0 {
        report.add_flag("skipped_door_pairs");
    }
    for (id, nodes) in graph.room_nodes() {
        if let Some(r) = report.rooms.iter_mut().find(|r| r.instance_id == id) {
            r.rects = nodes.len();
        }
    }

    let scored = all_pairs_depth(&graph, cfg.strict_connectivity).and_then(|dt| {
        if dt.restricted {
            report.add_flag("disconnected");
        }
        report.analyzed_nodes = dt.k();
        node_integration(&dt, cfg.method, cfg.normalization)
    });
    let ns = match scored {
        Ok(ns) => ns,
        Err(e) => {
            if report.outcome == PlanOutcome::Usable {
                report.outcome = PlanOutcome::SynSkip;
            }
            report.error = Some(e.to_string());
            return Analysis {
                report,
                graph: Some(graph),
                node_scores: None,
                room_scores: None,
            };
        }
    };

    report.integration = Some(plan_integration(&ns));
    let rs = room_mean_integration(&ns, &graph);
    if !rs.unscored.is_empty() || report.rooms.iter().any(|r| r.rects == 0) {
        report.add_flag("unscored_rooms");
    }
    for r in &mut report.rooms {
        r.mean = rs.rooms.get(&r.instance_id).map(|s| s.mean);
    }

    let metric_flag = |report: &mut PlanReport, e: MetricsError| {
        let f = match e {
            MetricsError::MissingPublic => "missing_public",
            MetricsError::MissingOther => "missing_other",
            MetricsError::NoValidCategory => "no_valid_category",
            MetricsError::MissingLiving => "missing_living",
            MetricsError::NoVisibleRival => "no_visible_rival",
            MetricsError::CategoryMismatch => "category_mismatch",
        };
        report.add_flag(f);
    };
    match public_score(&rs, &cfg.categories) {
        Ok(v) => report.public_score = Some(v),
        Err(e) => metric_flag(&mut report, e),
    }
    match category_profile(&rs, &cfg.categories) {
        Ok(p) => {
            match living_metrics(&p, &cfg.categories) {
                Ok((lr, adv)) => {
                    report.living_room = Some(lr);
                    report.living_adv = Some(adv);
                }
                Err(MetricsError::NoVisibleRival) => {
                    report.living_room = p.relative.get(&Category::Living).copied();
                    metric_flag(&mut report, MetricsError::NoVisibleRival);
                }
                Err(e) => metric_flag(&mut report, e),
            }
            report.category_integration = p.absolute;
            report.relative_integration = p.relative;
        }
        Err(e) => metric_flag(&mut report, e),
    }

    report.valid = report.outcome == PlanOutcome::Usable;
    Analysis {
        report,
        graph: Some(graph),
        node_scores: Some(ns),
        room_scores: Some(rs),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;

    /// Two rooms side by side, separated by a wall column with a door.
    fn two_rooms(living: u8, other: u8) -> LayoutMask {
        let (w, h) = (21, 10);
        let mut b = Grid::filled(w, h, 0u8);
        let mut s = Grid::filled(w, h, 13u8);
        let mut i = Grid::filled(w, h, 0u8);
        let mut n = Grid::filled(w, h, 255u8);
        for y in 0..h {
            for x in 0..w {
                let (id, label) = if x <= 10 { (1, living) } else { (2, other) };
                i.set(x, y, id);
                s.set(x, y, label);
                if x == 10 {
                    b.set(x, y, if (4..7).contains(&y) { 64 } else { 127 });
                }
            }
        }
        n.set(0, 0, 255);
        LayoutMask::from_channels(b, s, i, n, &ChannelCodeTable::default()).unwrap()
    }

    #[test]
    fn two_room_plan_is_scored() {
        let cfg = OracleConfig::default();
        let r = analyze_mask("p", &two_rooms(0, 3), &cfg);
        assert_eq!(r.total_rooms, 2);
        assert_eq!(r.total_area, 210);
        assert_eq!(r.living_area, 110);
        assert_eq!(r.door_pairs, 1);
        // two nodes only: HH needs three
        assert_eq!(r.outcome, PlanOutcome::SynSkip);
        let cfg = OracleConfig {
            method: Method::Closeness,
            ..OracleConfig::default()
        };
        let r = analyze_mask("p", &two_rooms(0, 3), &cfg);
        assert!(r.valid, "{r:?}");
        assert_eq!(r.public_score, Some(0.0));
        assert_eq!(r.living_room, Some(1.0));
        assert_eq!(r.living_adv, Some(0.0));
    }

    #[test]
    fn report_round_trips_through_json() {
        let cfg = OracleConfig {
            method: Method::Closeness,
            ..OracleConfig::default()
        };
        let r = analyze_mask("p", &two_rooms(0, 1), &cfg);
        let back = PlanReport::from_json(&r.to_json()).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn garbage_bytes_are_parse_failures() {
        let r = analyze_png("x", b"not a png", &OracleConfig::default());
        assert_eq!(r.outcome, PlanOutcome::ParseFailed);
        assert!(!r.valid);
        assert!(r.error.is_some());
    }

    #[test]
    fn empty_plan_is_build_house() {
        let m = LayoutMask::from_channels(
            Grid::filled(4, 4, 0),
            Grid::filled(4, 4, 13),
            Grid::filled(4, 4, 0),
            Grid::filled(4, 4, 0),
            &ChannelCodeTable::default(),
        )
        .unwrap();
        let r = analyze_mask("e", &m, &OracleConfig::default());
        assert_eq!(r.outcome, PlanOutcome::BuildHouse);
        assert!(!r.has_scores());
    }

    #[test]
    fn flags_stay_sorted_and_unique() {
        let mut r = PlanReport::empty("a", Method::Hh);
        r.add_flag("b");
        r.add_flag("a");
        r.add_flag("b");
        assert_eq!(r.flags, vec!["a", "b"]);
    }
}
