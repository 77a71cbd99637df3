//! Evaluate the baseline on eight-room programs and write the run directory.
//!
//! cargo run --release --example bench_eval8 [out_dir]

use floorsyntax::bench::{default_reference, run_bench, BenchConfig, METRICS};
use floorsyntax::generator::{pretrain_baseline, PretrainConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::args()
        .nth(1)
        .map_or_else(|| std::env::temp_dir().join("floorsyntax_bench_eval8"), Into::into);
    let pol = pretrain_baseline(&PretrainConfig::default(), 0);
    let cfg = BenchConfig {
        samples: 64,
        seed: 7,
        ..BenchConfig::default()
    };
    let reference = default_reference();
    let report = run_bench(&pol, &cfg, None, Some(&reference), &out)?;
    let v = &report.validity;
    println!("{} of {} plans valid", v.valid, v.total);
    for name in METRICS {
        match report.metric(name) {
            Some(s) => println!(
                "  {name:<18} median {:.4e}  IQR [{:.4e}, {:.4e}]",
                s.median, s.q25, s.q75
            ),
            None => println!("  {name:<18} (no values)"),
        }
    }
    if let Some(d) = report.d_profile {
        println!(
            "profile distance {d:.4} over {} categories",
            report.d_profile_categories
        );
    }
    println!("outputs in {}", out.display());
    Ok(())
}
