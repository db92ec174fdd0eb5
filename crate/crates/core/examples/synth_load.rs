//! Synthetic appliance traces and their repeat rate.
//!
//! cargo run --release --example synth_load

use lcp::synth::{default_profiles, generate, household_channels, repeat_fraction};

fn main() -> lcp::Result<()> {
    let out = generate(&default_profiles(), 600.0, 50.0, 42)?;
    for (name, trace) in &out.appliances {
        let on = trace.iter().filter(|&&v| v > 5).count();
        let peak = trace.iter().max().copied().unwrap_or(0);
        println!(
            "{name:<16} on {:>5.1}%  peak {peak:>5} W  repeats {:.3}",
            100.0 * on as f64 / trace.len() as f64,
            repeat_fraction(trace)
        );
    }
    println!("aggregate repeats {:.3}", repeat_fraction(&out.aggregate));

    for ch in household_channels(&out, 42) {
        println!(
            "{:<2} repeats {:.3}",
            ch.spec.name,
            repeat_fraction(&ch.values)
        );
    }
    Ok(())
}
