//! Writes a two-channel container, dumps its header and reads it back.
//!
//! cargo run --example container_roundtrip

use lcp::container::{encode_container, timestamp_of};
use lcp::{read_container, Channel, ChannelSpec, WriteOptions};

fn main() -> lcp::Result<()> {
    let channels = vec![
        Channel {
            spec: ChannelSpec::new("P", 0, false)?,
            values: vec![23, 25, 47, 48, 3074, 3075, 3076, 3076],
        },
        Channel {
            spec: ChannelSpec::new("V", 2, true)?,
            values: vec![12000, 12005, 12005, 12005, 11995, 12000, 12000, 12000],
        },
    ];
    let opts = WriteOptions {
        sample_rate_mhz: 50_000,
        t0_us: 1_600_000_000_000_000,
        ..WriteOptions::default()
    };
    let enc = encode_container(&channels, &opts)?;
    println!(
        "{} bytes, header {} bytes",
        enc.bytes.len(),
        enc.header.encoded_len()
    );
    println!("{}", serde_json::to_string_pretty(&enc.header).unwrap());

    let dec = read_container(&enc.bytes)?;
    for (meta, values) in dec.header.channels.iter().zip(&dec.channels) {
        println!("{}: {:?}", meta.name, values);
    }
    for i in [0, 1, 7] {
        println!("t[{i}] = {} us", timestamp_of(i, &dec.header)?);
    }
    Ok(())
}
