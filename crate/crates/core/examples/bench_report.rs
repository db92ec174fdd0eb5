//! Compression report on ten minutes of synthetic load, with and without LCA.
//!
//! cargo run --release --example bench_report [csv-file]

use lcp::bench::{run_bench, BenchInput, BenchOptions};
use lcp::csvio::CsvConfig;

fn input(lca: bool) -> lcp::Result<BenchInput> {
    Ok(match std::env::args().nth(1) {
        Some(path) => BenchInput::Csv {
            bytes: std::fs::read(path)?,
            config: CsvConfig::household(lca),
        },
        None => BenchInput::Synth {
            duration_s: 600.0,
            rate_hz: 50.0,
            seed: 1,
            t0_us: 1_600_000_000_000_000,
        },
    })
}

fn main() -> lcp::Result<()> {
    let opts = BenchOptions::default();
    let report = run_bench(input(false)?, &opts)?;
    println!("{}", report.to_text());

    let lca = BenchOptions { lca: true, ..opts };
    let report = run_bench(input(true)?, &lca)?;
    println!("with LCA: {:.2}x vs csv", report.ratio_vs_csv);
    Ok(())
}
