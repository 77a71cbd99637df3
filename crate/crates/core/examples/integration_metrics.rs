//! Build the rectangle graph of a plan and walk from depths to category metrics.
//!
//! cargo run --example integration_metrics [path.png]

use floorsyntax::codes::ChannelCodeTable;
use floorsyntax::integration::{
    all_pairs_depth, node_integration, relative_asymmetry, room_mean_integration, Method, RaNormalization,
};
use floorsyntax::mask_io::{derive_masks, parse_layout};
use floorsyntax::metrics::{category_profile, living_metrics, public_score, CategoryMap};
use floorsyntax::syntax_graph::{build_graph, GraphParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/plans/plan_0.png").to_string());
    let codes = ChannelCodeTable::default();
    let mask = parse_layout(&std::fs::read(&path)?)?;
    let derived = derive_masks(&mask, &codes, false)?;
    let graph = build_graph(&mask, &derived, &GraphParams::default())?;
    println!("{} rectangles, {} edges", graph.node_count(), graph.edges.len());

    let depth = all_pairs_depth(&graph, false)?;
    let ra = relative_asymmetry(&depth);
    let scores = node_integration(&depth, Method::Hh, RaNormalization::Diamond)?;
    for ((node, td), (ra, s)) in depth
        .nodes
        .iter()
        .zip(&depth.td)
        .zip(ra.iter().zip(&scores.scores))
        .take(8)
    {
        println!("  node {node:>3}: TD {td:>4}  RA {ra:.4}  integration {s:.4}");
    }

    let cats = CategoryMap::from_codes(&codes);
    let rooms = room_mean_integration(&scores, &graph);
    let profile = category_profile(&rooms, &cats)?;
    let (living, adv) = living_metrics(&profile, &cats)?;
    println!("public score {:.4}", public_score(&rooms, &cats)?);
    println!("living room {living:.4}, living advantage {adv:.4}");
    for (cat, r) in &profile.relative {
        println!("  R[{}] = {r:.4}", cat.name());
    }
    Ok(())
}
