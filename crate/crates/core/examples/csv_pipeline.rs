//! CSV in, container out, CSV back.
//!
//! cargo run --example csv_pipeline

use lcp::csvio::{csv_size, emit_csv, parse_csv, CsvConfig};
use lcp::{read_container, write_container, RangeMode, WriteOptions};

const INPUT: &str = "timestamp,V,I,P,Q
1600000000.00,120.13,1.25,150,5
1600000000.02,120.13,1.25,150,5
1600000000.04,120.14,1.25,151,5
1600000000.06,120.14,1.25,151,5
1600000000.08,119.98,2.40,420,-3
";

fn main() -> lcp::Result<()> {
    let parsed = parse_csv(INPUT.as_bytes(), &CsvConfig::household(false))?;
    println!(
        "{} rows, t0 {} us, rate {} mHz (inferred: {})",
        parsed.rows(),
        parsed.t0_us,
        parsed.sample_rate_mhz,
        parsed.rate_inferred
    );

    let channels = parsed.quantize(RangeMode::Strict)?;
    let opts = WriteOptions {
        sample_rate_mhz: parsed.sample_rate_mhz,
        t0_us: parsed.t0_us,
        ..WriteOptions::default()
    };
    let bytes = write_container(&channels, &opts)?;
    let csv_bytes = csv_size(INPUT.as_bytes());
    println!("{csv_bytes} csv bytes -> {} container bytes", bytes.len());

    let dec = read_container(&bytes)?;
    let mut out = Vec::new();
    emit_csv(&dec.header, &dec.channels, b',', &mut out)?;
    print!("{}", String::from_utf8_lossy(&out));
    assert_eq!(out, INPUT.as_bytes());
    Ok(())
}
