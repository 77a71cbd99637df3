//! Score a directory of plans with the gated selection score and keep the best.
//!
//! cargo run --example screening [dir] [k]

use floorsyntax::oracle::{analyze_png, OracleConfig};
use floorsyntax::screening::{clean_dataset, selection_score, top_k, GateConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let dir = args
        .next()
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/plans").to_string());
    let k: usize = args.next().map_or(Ok(2), |s| s.parse())?;
    let cfg = OracleConfig::default();
    let gates = GateConfig::default();

    let mut paths: Vec<_> = std::fs::read_dir(&dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "png"))
        .collect();
    paths.sort();
    let mut reports = Vec::new();
    for p in &paths {
        let id = p.file_stem().unwrap().to_string_lossy().into_owned();
        reports.push(analyze_png(&id, &std::fs::read(p)?, &cfg));
    }

    let mut scored = Vec::new();
    for r in &reports {
        let s = selection_score(r, &gates);
        println!(
            "{:<10} z {:>12.4e}  penalty {:>6.2}  gates {:?}",
            r.plan_id, s.z, s.p, s.gates
        );
        scored.push((r.plan_id.clone(), s.s));
    }
    let outcomes: Vec<_> = reports.iter().map(|r| r.outcome).collect();
    let ledger = clean_dataset(&outcomes);
    println!("usable {} of {}", ledger.usable(), ledger.total);
    println!("top {k}: {:?}", top_k(&scored, &[], k));
    Ok(())
}
