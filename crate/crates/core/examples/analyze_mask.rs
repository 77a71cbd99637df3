//! Parse one layout PNG, derive its masks and print the plan report.
//!
//! cargo run --example analyze_mask [path.png]

use floorsyntax::codes::ChannelCodeTable;
use floorsyntax::mask_io::{derive_masks, parse_layout, room_cores};
use floorsyntax::oracle::{analyze_mask, OracleConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/plans/plan_0.png").to_string());
    let mask = parse_layout(&std::fs::read(&path)?)?;
    let derived = derive_masks(&mask, &ChannelCodeTable::default(), false)?;
    println!(
        "{}x{} px, {} room instances",
        mask.width(),
        mask.height(),
        mask.instances().len()
    );
    for core in room_cores(&mask, &derived) {
        println!(
            "  room {:>2} type {:>2}: {} px, core {} px",
            core.instance_id, core.room_type, core.instance_pixels, core.core_pixels
        );
    }
    let report = analyze_mask("example", &mask, &OracleConfig::default());
    println!("{}", report.to_json());
    Ok(())
}
