//! Median relative-integration profile of a summary table, drawn against a reference.
//!
//! cargo run --example profile_plot [summary.csv] [out.svg]

use floorsyntax::bench::{read_reference, BenchReport};
use floorsyntax::report::read_summary;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let fixtures = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures");
    let mut args = std::env::args().skip(1);
    let summary = args.next().unwrap_or_else(|| format!("{fixtures}/ppo.csv"));
    let out = args
        .next()
        .unwrap_or_else(|| std::env::temp_dir().join("profile.svg").display().to_string());
    let reference = read_reference(std::fs::File::open(format!("{fixtures}/reference_full.csv"))?)?;
    let rows = read_summary(std::fs::File::open(&summary)?)?;
    let report = BenchReport::from_rows(&rows, Some(&reference));
    for p in &report.profile {
        println!(
            "{:<10} median {:.4}  IQR [{:.4}, {:.4}]  n {}",
            p.category.name(),
            p.median,
            p.q25,
            p.q75,
            p.n
        );
    }
    if let Some(d) = report.d_profile {
        println!("profile distance {d:.4}");
    }
    if let Some(svg) = report.svg() {
        std::fs::write(&out, svg)?;
        println!("wrote {out}");
    }
    Ok(())
}
