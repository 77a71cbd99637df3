//! Dataset summary CSV (`convex_integration_summary.csv`).
//!
//! One row per plan. The first line is a `#` comment naming the schema
//! version; floats use 9 significant digits in `%g` style and missing values
//! are empty cells.

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metrics::Category;
use crate::oracle::PlanReport;

pub const SUMMARY_FILE: &str = "convex_integration_summary.csv";
pub const SUMMARY_SCHEMA: &str = "# schema: floorsyntax.summary.v1";

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("bad summary header: {0}")]
    Header(String),
    #[error("bad value {value:?} in column {column}")]
    Value { column: String, value: String },
}

/// One summary-table row.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub plan_id: String,
    pub valid: bool,
    pub integration: Option<f64>,
    pub public_score: Option<f64>,
    pub living_room: Option<f64>,
    pub living_adv: Option<f64>,
    pub absolute: BTreeMap<Category, f64>,
    pub relative: BTreeMap<Category, f64>,
    pub total_rooms: usize,
    pub total_area: usize,
    pub living_area_share: Option<f64>,
}

impl SummaryRow {
    pub fn from_report(r: &PlanReport) -> Self {
        let keep = |m: &BTreeMap<Category, f64>| {
            m.iter()
                .filter(|(g, _)| **g != Category::Unknown)
                .map(|(&g, &v)| (g, v))
                .collect()
        };
        Self {
            plan_id: r.plan_id.clone(),
            valid: r.valid,
            integration: r.integration,
            public_score: r.public_score,
            living_room: r.living_room,
            living_adv: r.living_adv,
            absolute: keep(&r.category_integration),
            relative: keep(&r.relative_integration),
            total_rooms: r.total_rooms,
            total_area: r.total_area,
            living_area_share: r.living_area_share,
        }
    }
}

pub fn columns() -> Vec<String> {
    let mut c: Vec<String> = [
        "plan_id",
        "valid",
        "integration",
        "public_score",
        "living_room",
        "living_adv",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    c.extend(Category::DENOMINATOR.iter().map(|g| format!("I_{}", g.name())));
    c.extend(Category::DENOMINATOR.iter().map(|g| format!("R_{}", g.name())));
    c.extend(["total_rooms", "total_area", "living_area_share"].map(String::from));
    c
}

/// `%.9g`-style formatting: 9 significant digits, trailing zeros removed,
/// exponent form outside `[1e-4, 1e9)`.
pub fn format_float(x: f64) -> String {
    const P: i32 = 9;
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    // the exponent after rounding to P significant digits decides the style
    let sci = format!("{:.*e}", (P - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..P).contains(&exp) {
        let m = strip_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        strip_zeros(&format!("{:.*}", (P - 1 - exp) as usize, x)).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(format_float).unwrap_or_default()
}

pub fn write_summary<W: Write>(rows: &[SummaryRow], mut w: W) -> Result<(), ReportError> {
    w.write_all(SUMMARY_SCHEMA.as_bytes())?;
    w.write_all(b"\n")?;
    let mut out = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w);
    out.write_record(columns())?;
    for r in rows {
        let mut rec = vec![
            r.plan_id.clone(),
            if r.valid { "1" } else { "0" }.to_string(),
            opt(r.integration),
            opt(r.public_score),
            opt(r.living_room),
            opt(r.living_adv),
        ];
        rec.extend(Category::DENOMINATOR.iter().map(|g| opt(r.absolute.get(g).copied())));
        rec.extend(Category::DENOMINATOR.iter().map(|g| opt(r.relative.get(g).copied())));
        rec.push(r.total_rooms.to_string());
        rec.push(r.total_area.to_string());
        rec.push(opt(r.living_area_share));
        out.write_record(&rec)?;
    }
    out.flush()?;
    Ok(())
}

pub fn summary_string(rows: &[SummaryRow]) -> String {
    let mut buf = Vec::new();
    write_summary(rows, &mut buf).expect("writing to memory does not fail");
    String::from_utf8(buf).expect("csv output is utf-8")
}

/// Reads a summary table. Columns are matched by name, so a file holding a
/// subset of the columns (e.g. a fixture) is accepted as long as `plan_id` is present.
pub fn read_summary<R: Read>(r: R) -> Result<Vec<SummaryRow>, ReportError> {
    let mut reader = BufReader::new(r);
    let mut body = String::new();
    let mut line = String::new();
    // skip leading comment lines
    loop {
        line.clear();
        if reader.read_line(&mut line)? == 0 {
            break;
        }
        if !line.starts_with('#') {
            body.push_str(&line);
            break;
        }
    }
    reader.read_to_string(&mut body)?;

    let mut csv_reader = csv::ReaderBuilder::new().from_reader(body.as_bytes());
    let headers = csv_reader.headers()?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let id_col = col("plan_id").ok_or_else(|| ReportError::Header("missing plan_id".into()))?;

    let mut rows = Vec::new();
    for rec in csv_reader.records() {
        let rec = rec?;
        let float = |name: &str| -> Result<Option<f64>, ReportError> {
            match col(name).and_then(|i| rec.get(i)) {
                None | Some("") => Ok(None),
                Some(v) => v.parse().map(Some).map_err(|_| ReportError::Value {
                    column: name.into(),
                    value: v.into(),
                }),
            }
        };
        let count = |name: &str| -> Result<usize, ReportError> {
            match col(name).and_then(|i| rec.get(i)) {
                None | Some("") => Ok(0),
                Some(v) => v.parse().map_err(|_| ReportError::Value {
                    column: name.into(),
                    value: v.into(),
                }),
            }
        };
        let mut row = SummaryRow {
            plan_id: rec.get(id_col).unwrap_or_default().to_string(),
            valid: match col("valid").and_then(|i| rec.get(i)) {
                None | Some("1") | Some("true") => true,
                Some("0") | Some("false") | Some("") => false,
                Some(v) => {
                    return Err(ReportError::Value {
                        column: "valid".into(),
                        value: v.into(),
                    })
                }
            },
            integration: float("integration")?,
            public_score: float("public_score")?,
            living_room: float("living_room")?,
            living_adv: float("living_adv")?,
            total_rooms: count("total_rooms")?,
            total_area: count("total_area")?,
            living_area_share: float("living_area_share")?,
            ..Default::default()
        };
        for g in Category::DENOMINATOR {
            if let Some(v) = float(&format!("I_{}", g.name()))? {
                row.absolute.insert(g, v);
            }
            if let Some(v) = float(&format!("R_{}", g.name()))? {
                row.relative.insert(g, v);
            }
        }
        rows.push(row);
    }
    Ok(rows)
}
