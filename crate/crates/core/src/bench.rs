//! Compression measurements: sizes and ratios, control-class distribution,
//! single-thread codec throughput and an optional DEFLATE baseline.
//!
//! Every run decodes what it encoded and refuses to report if the result
//! differs from the input.

use std::fmt::Write as _;
use std::time::Instant;

use serde::Serialize;

use crate::bitstream::{BitReader, BitWriter};
use crate::codec::{self, ClassHistogram, ControlClass};
use crate::container::{encode_container, read_container, Channel, WriteOptions};
use crate::csvio::{self, csv_size, CsvConfig};
use crate::error::{Error, Result};
use crate::quantize::{lca_round, RangeMode};
use crate::synth;

/// Results published for the LIFTED dataset. Printed beside measured values
/// for context; never asserted, since that dataset is not bundled.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PublishedReference {
    pub lcp_ratio: f64,
    pub lca_ratio: f64,
    pub gorilla_ratio: f64,
    pub zip_ratio: f64,
    pub repeat_fraction: f64,
    pub fresh_fraction: f64,
    pub fresh_mean_bits: f64,
    pub mean_bits_per_value: f64,
    pub values_per_s: f64,
}

pub const PUBLISHED: PublishedReference = PublishedReference {
    lcp_ratio: 39.90,
    lca_ratio: 45.86,
    gorilla_ratio: 5.74,
    zip_ratio: 9.22,
    repeat_fraction: 0.91,
    fresh_fraction: 0.0392,
    fresh_mean_bits: 13.919,
    mean_bits_per_value: 1.768,
    values_per_s: 1_837_982.0,
};

/// What to measure.
#[derive(Debug, Clone)]
pub enum BenchInput {
    /// CSV bytes and how to read them.
    Csv { bytes: Vec<u8>, config: CsvConfig },
    /// Synthetic household V/I/P/Q stream, serialized to CSV first so the
    /// ratio baseline is a real file.
    Synth {
        duration_s: f64,
        rate_hz: f64,
        seed: u64,
        t0_us: u64,
    },
    /// Already quantized channels; the baseline is their CSV rendering.
    Channels {
        channels: Vec<Channel>,
        sample_rate_mhz: u32,
        t0_us: u64,
    },
}

#[derive(Debug, Clone)]
pub struct BenchOptions {
    /// Round every channel to multiples of 5 before coding.
    pub lca: bool,
    pub obfuscate: u8,
    pub seed: u64,
    pub range: RangeMode,
    /// Values to push through the codec for each throughput figure.
    pub throughput_values: u64,
    pub deflate: bool,
}

impl Default for BenchOptions {
    fn default() -> Self {
        Self {
            lca: false,
            obfuscate: 0,
            seed: 0,
            range: RangeMode::Strict,
            throughput_values: 1_000_000,
            deflate: true,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassRow {
    pub class: ControlClass,
    pub control_bits: &'static str,
    pub count: u64,
    pub fraction: f64,
    pub mean_bits: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchReport {
    pub channels: usize,
    pub values: u64,
    pub lca: bool,
    pub obfuscate: u8,
    pub csv_bytes: u64,
    pub raw16_bytes: u64,
    pub lcp_payload_bytes: u64,
    pub lcp_file_bytes: u64,
    pub deflate_bytes: Option<u64>,
    pub ratio_vs_csv: f64,
    pub payload_ratio_vs_csv: f64,
    pub ratio_vs_raw16: f64,
    pub deflate_ratio_vs_csv: Option<f64>,
    /// Bits of the coded value streams, excluding the per-channel junk
    /// count byte and byte padding.
    pub codec_bits: u64,
    pub payload_bits: u64,
    pub padding_bits: u64,
    pub bits_per_value: f64,
    pub class_histogram: Vec<ClassRow>,
    pub encode_values_per_s: f64,
    pub decode_values_per_s: f64,
    pub parallel_encode_values_per_s: f64,
    pub throughput_values: u64,
    pub hardware: String,
    pub reference: PublishedReference,
}

impl BenchReport {
    pub fn class_fraction(&self, class: ControlClass) -> f64 {
        self.class_histogram
            .iter()
            .find(|r| r.class == class)
            .map_or(0.0, |r| r.fraction)
    }

    pub fn class_count(&self, class: ControlClass) -> u64 {
        self.class_histogram
            .iter()
            .find(|r| r.class == class)
            .map_or(0, |r| r.count)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let r = &self.reference;
        let _ = writeln!(s, "channels          {}", self.channels);
        let _ = writeln!(s, "values            {}", self.values);
        let _ = writeln!(
            s,
            "mode              {}{}",
            if self.lca { "LCA" } else { "LCP" },
            if self.obfuscate > 0 {
                format!(", {} junk values per channel", self.obfuscate)
            } else {
                String::new()
            }
        );
        let _ = writeln!(s, "csv bytes         {}", self.csv_bytes);
        let _ = writeln!(s, "raw 16-bit bytes  {}", self.raw16_bytes);
        let _ = writeln!(s, "payload bytes     {}", self.lcp_payload_bytes);
        let _ = writeln!(s, "file bytes        {}", self.lcp_file_bytes);
        let _ = writeln!(
            s,
            "ratio vs csv      {:.2}   (LIFTED reference: LCP {:.2}, LCA {:.2})",
            self.ratio_vs_csv, r.lcp_ratio, r.lca_ratio
        );
        let _ = writeln!(s, "ratio vs raw16    {:.2}", self.ratio_vs_raw16);
        match (self.deflate_bytes, self.deflate_ratio_vs_csv) {
            (Some(b), Some(ratio)) => {
                let _ = writeln!(s, "deflate bytes     {b}   ratio {ratio:.2}   (LIFTED reference: zip {:.2}, gorilla {:.2})", r.zip_ratio, r.gorilla_ratio);
            }
            _ => {
                let _ = writeln!(s, "deflate bytes     n/a");
            }
        }
        let _ = writeln!(
            s,
            "bits per value    {:.4}   (LIFTED reference: {:.3})",
            self.bits_per_value, r.mean_bits_per_value
        );
        let _ = writeln!(s, "class  count       fraction  mean bits");
        for row in &self.class_histogram {
            let mean = row.mean_bits.map_or("-".to_string(), |m| format!("{m:.3}"));
            let _ = writeln!(
                s,
                "{:<6} {:<11} {:<9.4} {}",
                row.control_bits, row.count, row.fraction, mean
            );
        }
        let _ = writeln!(
            s,
            "                  (LIFTED reference: '0' {:.0}%, '111' {:.2}% at {:.3} bits)",
            r.repeat_fraction * 100.0,
            r.fresh_fraction * 100.0,
            r.fresh_mean_bits
        );
        let _ = writeln!(
            s,
            "encode            {:.0} values/s (single thread)",
            self.encode_values_per_s
        );
        let _ = writeln!(
            s,
            "decode            {:.0} values/s (single thread)",
            self.decode_values_per_s
        );
        let _ = writeln!(
            s,
            "encode, parallel  {:.0} values/s (one thread per channel, container included)",
            self.parallel_encode_values_per_s
        );
        let _ = writeln!(
            s,
            "                  (LIFTED reference: {:.0} values/s)",
            r.values_per_s
        );
        let _ = writeln!(s, "hardware          {}", self.hardware);
        s
    }
}

/// Short description of the host used for timing.
pub fn hardware_note() -> String {
    let cpu = std::fs::read_to_string("/proc/cpuinfo")
        .ok()
        .and_then(|s| {
            s.lines()
                .find(|l| l.starts_with("model name"))
                .and_then(|l| l.split(':').nth(1))
                .map(|m| m.trim().to_string())
        })
        .unwrap_or_else(|| "unknown cpu".to_string());
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get());
    format!(
        "{cpu}, {threads} threads, {}-{}, {} build",
        std::env::consts::ARCH,
        std::env::consts::OS,
        if cfg!(debug_assertions) {
            "debug-assertions"
        } else {
            "release"
        }
    )
}

/// DEFLATE size of `bytes` at the default level, when built with the
/// `deflate` feature.
pub fn deflate_size(bytes: &[u8]) -> Option<u64> {
    #[cfg(feature = "deflate")]
    {
        use std::io::Write;
        let mut enc =
            flate2::write::DeflateEncoder::new(Vec::new(), flate2::Compression::default());
        enc.write_all(bytes).ok()?;
        enc.finish().ok().map(|v| v.len() as u64)
    }
    #[cfg(not(feature = "deflate"))]
    {
        let _ = bytes;
        None
    }
}

/// Tallies control classes per channel with the junk count excluded.
pub fn class_histogram(channels: &[Channel]) -> Result<ClassHistogram> {
    let mut hist = ClassHistogram::default();
    for ch in channels {
        let mut w = BitWriter::with_capacity(ch.values.len() / 4 + 8);
        codec::encode_sequence_traced(&ch.values, &mut w, &mut hist)?;
    }
    Ok(hist)
}

/// Resolves the input into its CSV baseline and quantized channels.
fn prepare(input: BenchInput, opts: &BenchOptions) -> Result<(Vec<u8>, Vec<Channel>, u32, u64)> {
    match input {
        BenchInput::Csv { bytes, config } => {
            let parsed = csvio::parse_csv(bytes.as_slice(), &config)?;
            let channels = parsed.quantize(opts.range)?;
            Ok((bytes, channels, parsed.sample_rate_mhz, parsed.t0_us))
        }
        BenchInput::Synth {
            duration_s,
            rate_hz,
            seed,
            t0_us,
        } => {
            let out = synth::generate(&synth::default_profiles(), duration_s, rate_hz, seed)?;
            let channels = synth::household_channels(&out, seed);
            let mhz = crate::container::rate_to_mhz(rate_hz)?;
            let mut csv = Vec::new();
            csvio::emit_channels(t0_us, mhz, &channels, b',', &mut csv)?;
            Ok((csv, channels, mhz, t0_us))
        }
        BenchInput::Channels {
            channels,
            sample_rate_mhz,
            t0_us,
        } => {
            let mut csv = Vec::new();
            csvio::emit_channels(t0_us, sample_rate_mhz, &channels, b',', &mut csv)?;
            Ok((csv, channels, sample_rate_mhz, t0_us))
        }
    }
}

/// Compresses, verifies and measures.
pub fn run_bench(input: BenchInput, opts: &BenchOptions) -> Result<BenchReport> {
    let (csv, mut channels, sample_rate_mhz, t0_us) = prepare(input, opts)?;
    if opts.lca {
        for ch in &mut channels {
            if !ch.spec.lca {
                ch.spec.lca = true;
                ch.values.iter_mut().for_each(|v| *v = lca_round(*v));
            }
        }
    }
    let write = WriteOptions {
        sample_rate_mhz,
        t0_us,
        obfuscate: opts.obfuscate,
        seed: opts.seed,
    };
    let encoded = encode_container(&channels, &write)?;
    let decoded = read_container(&encoded.bytes)?;
    for (col, (ch, got)) in channels.iter().zip(&decoded.channels).enumerate() {
        if let Some(row) = ch.values.iter().zip(got).position(|(a, b)| a != b) {
            return Err(Error::Mismatch {
                row: row as u64 + 1,
                column: col + 1,
                expected: i64::from(ch.values[row]),
                actual: i64::from(got[row]),
            });
        }
    }

    let n_channels = channels.len();
    let values: u64 = channels.iter().map(|c| c.values.len() as u64).sum();
    let header = &encoded.header;
    let payload_bits: u64 = header.channels.iter().map(|c| c.payload_bit_count).sum();
    let payload_bytes = header.payload_bytes();
    let codec_bits = payload_bits - 8 * n_channels as u64;
    let file_bytes = encoded.bytes.len() as u64;
    let csv_bytes = csv_size(&csv);
    let raw16_bytes = 2 * values;

    let mut hist = ClassHistogram::default();
    for h in &encoded.histograms {
        hist.merge(h);
    }
    let class_histogram = ControlClass::ALL
        .iter()
        .map(|&class| ClassRow {
            class,
            control_bits: class.label(),
            count: hist.count(class),
            fraction: hist.fraction(class),
            mean_bits: hist.mean_bits(class),
        })
        .collect();

    let deflate_bytes = if opts.deflate {
        deflate_size(&csv)
    } else {
        None
    };
    let (encode_values_per_s, decode_values_per_s) =
        codec_throughput(&channels, opts.throughput_values)?;
    let parallel_encode_values_per_s =
        container_throughput(&channels, &write, opts.throughput_values)?;

    Ok(BenchReport {
        channels: n_channels,
        values,
        lca: opts.lca,
        obfuscate: opts.obfuscate,
        csv_bytes,
        raw16_bytes,
        lcp_payload_bytes: payload_bytes,
        lcp_file_bytes: file_bytes,
        deflate_bytes,
        ratio_vs_csv: csv_bytes as f64 / file_bytes as f64,
        payload_ratio_vs_csv: csv_bytes as f64 / payload_bytes as f64,
        ratio_vs_raw16: raw16_bytes as f64 / file_bytes as f64,
        deflate_ratio_vs_csv: deflate_bytes.map(|d| csv_bytes as f64 / d as f64),
        codec_bits,
        payload_bits,
        padding_bits: 8 * payload_bytes - payload_bits,
        bits_per_value: codec_bits as f64 / values as f64,
        class_histogram,
        encode_values_per_s,
        decode_values_per_s,
        parallel_encode_values_per_s,
        throughput_values: opts.throughput_values,
        hardware: hardware_note(),
        reference: PUBLISHED,
    })
}

/// Single-thread encode and decode rates over at least `min_values`
/// values, after one warmup pass.
pub fn codec_throughput(channels: &[Channel], min_values: u64) -> Result<(f64, f64)> {
    let per_pass: u64 = channels.iter().map(|c| c.values.len() as u64).sum();
    if per_pass == 0 {
        return Err(Error::usage("nothing to time"));
    }
    let passes = min_values.div_ceil(per_pass).max(1);

    let encode_pass = || -> Result<Vec<(Vec<u8>, u64)>> {
        channels
            .iter()
            .map(|c| {
                let mut w = BitWriter::with_capacity(c.values.len() / 4 + 8);
                codec::encode_sequence(&c.values, &mut w)?;
                Ok(w.finish())
            })
            .collect()
    };
    let streams = encode_pass()?;
    let t = Instant::now();
    for _ in 0..passes {
        std::hint::black_box(encode_pass()?);
    }
    let enc = (passes * per_pass) as f64 / t.elapsed().as_secs_f64();

    let decode_pass = || -> Result<usize> {
        let mut total = 0;
        for ((bytes, bits), c) in streams.iter().zip(channels) {
            let mut r = BitReader::with_bit_len(bytes, *bits)?;
            total += codec::decode_sequence(&mut r, c.values.len())?.len();
        }
        Ok(total)
    };
    decode_pass()?;
    let t = Instant::now();
    for _ in 0..passes {
        std::hint::black_box(decode_pass()?);
    }
    let dec = (passes * per_pass) as f64 / t.elapsed().as_secs_f64();
    Ok((enc, dec))
}

fn container_throughput(
    channels: &[Channel],
    write: &WriteOptions,
    min_values: u64,
) -> Result<f64> {
    let per_pass: u64 = channels.iter().map(|c| c.values.len() as u64).sum();
    let passes = min_values.div_ceil(per_pass).max(1);
    std::hint::black_box(encode_container(channels, write)?);
    let t = Instant::now();
    for _ in 0..passes {
        std::hint::black_box(encode_container(channels, write)?);
    }
    Ok((passes * per_pass) as f64 / t.elapsed().as_secs_f64())
}
