//! Fixed-point quantization and lossy compression approximation (LCA).
//!
//! cargo run --example quantize_lca

use lcp::quantize::{dequantize, lca_round, quantize};
use lcp::{ChannelSpec, RangeMode};

fn main() -> lcp::Result<()> {
    let volts = ChannelSpec::new("V", 2, false)?;
    for x in [120.134, 120.135, 119.995, -0.005, 327.67] {
        let q = quantize(x, &volts, RangeMode::Strict)?;
        let l = lca_round(q);
        println!(
            "{x:>9}  ->  {q:>6} ({:.2})   lca {l:>6} ({:.2})",
            dequantize(q, &volts),
            dequantize(l, &volts)
        );
    }

    // 400 V does not fit in i16 at two decimals
    match quantize(400.0, &volts, RangeMode::Strict) {
        Err(e) => println!("strict: {e}"),
        Ok(q) => println!("strict: {q}"),
    }
    let q = quantize(400.0, &volts, RangeMode::Clamp)?;
    println!("clamp:  {q} ({:.2})", dequantize(q, &volts));

    println!(
        "lca corners: {} {}",
        lca_round(i16::MIN),
        lca_round(i16::MAX)
    );
    Ok(())
}
