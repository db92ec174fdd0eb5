//! The `lcp` command line: compress, decompress, verify, inspect, stats,
//! synth and bench.
//!
//! Paths of `-` mean stdin/stdout. Failures print one line to stderr and
//! exit with [`Error::exit_code`].

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::bench::{self, BenchInput, BenchOptions};
use crate::codec::{ClassHistogram, ControlClass};
use crate::container::{self, encode_container, rate_to_mhz, read_container, WriteOptions};
use crate::csvio::{self, csv_size, ColumnMap, CsvConfig};
use crate::error::{Error, Result};
use crate::quantize::{ChannelSpec, RangeMode};
use crate::synth;

#[derive(Debug, Parser)]
#[command(
    name = "lcp",
    version,
    about = "Precision-aware XOR-delta compression for household load data"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compress a measurement CSV into a .bin container.
    Compress {
        input: PathBuf,
        output: PathBuf,
        #[command(flatten)]
        csv: CsvArgs,
        #[command(flatten)]
        codec: CodecArgs,
    },
    /// Expand a .bin container back to CSV.
    Decompress {
        input: PathBuf,
        output: PathBuf,
        #[arg(long, default_value = ",", value_parser = parse_delimiter)]
        delimiter: u8,
    },
    /// Compress and decompress in memory and compare.
    Verify {
        input: PathBuf,
        #[command(flatten)]
        csv: CsvArgs,
        #[command(flatten)]
        codec: CodecArgs,
        #[arg(long)]
        json: bool,
    },
    /// Print a container header as JSON.
    Inspect { input: PathBuf },
    /// Per-channel size and control-class statistics of a container.
    Stats {
        input: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Write a synthetic household V/I/P/Q CSV.
    Synth {
        output: PathBuf,
        /// Simulated seconds.
        #[arg(long, default_value_t = 3600.0)]
        duration: f64,
        #[arg(long, default_value_t = 50.0)]
        rate: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// First timestamp, seconds since the Unix epoch.
        #[arg(long, default_value_t = 0.0)]
        t0: f64,
    },
    /// Measure ratio, bits per value, control classes and throughput.
    Bench {
        /// CSV input; omit to benchmark synthetic data.
        input: Option<PathBuf>,
        #[command(flatten)]
        csv: CsvArgs,
        #[command(flatten)]
        codec: CodecArgs,
        /// Synthetic duration in seconds when no input is given.
        #[arg(long, default_value_t = 3600.0)]
        synth_duration: f64,
        /// Values timed for each throughput figure.
        #[arg(long, default_value_t = 1_000_000)]
        throughput_values: u64,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Debug, Clone, Args)]
pub struct CsvArgs {
    /// Column mapping, `name:index` pairs; `timestamp:none` drops the
    /// timestamp column.
    #[arg(long, default_value = "timestamp:0,V:1,I:2,P:3,Q:4")]
    pub columns: String,
    /// Decimal places per channel in column-mapping order. Defaults to 2
    /// for V and I, 0 otherwise.
    #[arg(long)]
    pub decimals: Option<String>,
    /// Sample rate in Hz; inferred from timestamps when absent.
    #[arg(long)]
    pub rate: Option<f64>,
    /// First timestamp in seconds since the Unix epoch (files without a
    /// timestamp column).
    #[arg(long)]
    pub t0: Option<f64>,
    #[arg(long, default_value = ",", value_parser = parse_delimiter)]
    pub delimiter: u8,
    /// Treat the first row as data even if it looks like a header.
    #[arg(long, conflicts_with = "header")]
    pub no_header: bool,
    /// Always skip the first row.
    #[arg(long)]
    pub header: bool,
}

#[derive(Debug, Clone, Args)]
pub struct CodecArgs {
    /// Round every channel to multiples of 5 in stored units.
    #[arg(long)]
    pub lca: bool,
    /// Junk values spliced into each channel (0-255).
    #[arg(long, default_value_t = 0)]
    pub obfuscate: u8,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Saturate out-of-range values instead of failing.
    #[arg(long)]
    pub clamp: bool,
}

impl CodecArgs {
    fn range(&self) -> RangeMode {
        if self.clamp {
            RangeMode::Clamp
        } else {
            RangeMode::Strict
        }
    }
}

fn parse_delimiter(s: &str) -> std::result::Result<u8, String> {
    match s {
        "\\t" | "tab" => Ok(b'\t'),
        _ if s.len() == 1 && s.is_ascii() => Ok(s.as_bytes()[0]),
        _ => Err(format!("delimiter must be one ASCII character, got {s:?}")),
    }
}

fn seconds_to_us(secs: f64) -> Result<u64> {
    let us = (secs * 1e6).round();
    if !secs.is_finite() || us < 0.0 || us >= u64::MAX as f64 {
        return Err(Error::usage(format!("timestamp {secs} out of range")));
    }
    Ok(us as u64)
}

impl CsvArgs {
    pub fn to_config(&self, lca: bool) -> Result<CsvConfig> {
        let mut timestamp_column = None;
        let mut seen_timestamp = false;
        let mut names = Vec::new();
        for item in self
            .columns
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
        {
            let (name, idx) = item.rsplit_once(':').ok_or_else(|| {
                Error::usage(format!("column mapping {item:?} is not name:index"))
            })?;
            let name = name.trim();
            let idx = idx.trim();
            if name.eq_ignore_ascii_case("timestamp") {
                seen_timestamp = true;
                if idx != "none" {
                    timestamp_column = Some(parse_index(idx)?);
                }
            } else {
                names.push((name.to_string(), parse_index(idx)?));
            }
        }
        if !seen_timestamp {
            timestamp_column = None;
        }
        let decimals: Vec<u8> = match &self.decimals {
            Some(list) => {
                let d = list
                    .split(',')
                    .map(|s| {
                        s.trim()
                            .parse::<u8>()
                            .map_err(|_| Error::usage(format!("bad decimal places {s:?}")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                if d.len() != names.len() {
                    return Err(Error::usage(format!(
                        "{} decimal places given for {} channels",
                        d.len(),
                        names.len()
                    )));
                }
                d
            }
            None => names
                .iter()
                .map(|(n, _)| if n == "V" || n == "I" { 2 } else { 0 })
                .collect(),
        };
        let channels = names
            .into_iter()
            .zip(decimals)
            .map(|((name, column), dp)| {
                Ok(ColumnMap {
                    column,
                    spec: ChannelSpec::new(name, dp, lca)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let config = CsvConfig {
            has_header: match (self.header, self.no_header) {
                (true, _) => Some(true),
                (_, true) => Some(false),
                _ => None,
            },
            delimiter: self.delimiter,
            timestamp_column,
            channels,
            rate_hz: self.rate,
            t0_us: self.t0.map(seconds_to_us).transpose()?,
        };
        config.validate()?;
        Ok(config)
    }
}

fn parse_index(s: &str) -> Result<usize> {
    s.parse()
        .map_err(|_| Error::usage(format!("bad column index {s:?}")))
}

fn read_input(path: &Path) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    if path == Path::new("-") {
        io::stdin().lock().read_to_end(&mut buf)?;
    } else {
        BufReader::new(File::open(path)?).read_to_end(&mut buf)?;
    }
    Ok(buf)
}

fn open_output(path: &Path) -> Result<Box<dyn Write>> {
    Ok(if path == Path::new("-") {
        Box::new(BufWriter::new(io::stdout().lock()))
    } else {
        Box::new(BufWriter::new(File::create(path)?))
    })
}

/// Summary lines go to stderr when stdout carries data.
fn summary_sink(output: &Path) -> Box<dyn Write> {
    if output == Path::new("-") {
        Box::new(io::stderr())
    } else {
        Box::new(io::stdout())
    }
}

#[derive(Debug, Serialize)]
struct HistogramJson {
    control_bits: &'static str,
    count: u64,
    fraction: f64,
    mean_bits: Option<f64>,
}

fn histogram_json(h: &ClassHistogram) -> Vec<HistogramJson> {
    ControlClass::ALL
        .iter()
        .map(|&c| HistogramJson {
            control_bits: c.label(),
            count: h.count(c),
            fraction: h.fraction(c),
            mean_bits: h.mean_bits(c),
        })
        .collect()
}

fn histogram_text(h: &ClassHistogram) -> String {
    let mut s = String::from("class  count       fraction  mean bits\n");
    for row in histogram_json(h) {
        let mean = row.mean_bits.map_or("-".to_string(), |m| format!("{m:.3}"));
        s.push_str(&format!(
            "{:<6} {:<11} {:<9.4} {}\n",
            row.control_bits, row.count, row.fraction, mean
        ));
    }
    s
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Compress {
            input,
            output,
            csv,
            codec,
        } => compress(&input, &output, &csv, &codec),
        Command::Decompress {
            input,
            output,
            delimiter,
        } => decompress(&input, &output, delimiter),
        Command::Verify {
            input,
            csv,
            codec,
            json,
        } => verify(&input, &csv, &codec, json),
        Command::Inspect { input } => inspect(&input),
        Command::Stats { input, json } => stats(&input, json),
        Command::Synth {
            output,
            duration,
            rate,
            seed,
            t0,
        } => synth_csv(&output, duration, rate, seed, t0),
        Command::Bench {
            input,
            csv,
            codec,
            synth_duration,
            throughput_values,
            json,
        } => bench_cmd(
            input.as_deref(),
            &csv,
            &codec,
            synth_duration,
            throughput_values,
            json,
        ),
    }
}

fn compress(input: &Path, output: &Path, csv: &CsvArgs, codec: &CodecArgs) -> Result<()> {
    let config = csv.to_config(codec.lca)?;
    let text = read_input(input)?;
    let parsed = csvio::parse_csv(text.as_slice(), &config)?;
    let channels = parsed.quantize(codec.range())?;
    let bytes = container::write_container(
        &channels,
        &WriteOptions {
            sample_rate_mhz: parsed.sample_rate_mhz,
            t0_us: parsed.t0_us,
            obfuscate: codec.obfuscate,
            seed: codec.seed,
        },
    )?;
    let mut out = open_output(output)?;
    out.write_all(&bytes)?;
    out.flush()?;

    let original = csv_size(&text);
    let mut msg = summary_sink(output);
    writeln!(
        msg,
        "{} rows x {} channels: {original} -> {} bytes, ratio {:.2}",
        parsed.rows(),
        channels.len(),
        bytes.len(),
        original as f64 / bytes.len() as f64
    )?;
    if parsed.spacing_warnings > 0 {
        writeln!(
            msg,
            "warning: {} rows deviate more than 1% from the sample period",
            parsed.spacing_warnings
        )?;
    }
    Ok(())
}

fn decompress(input: &Path, output: &Path, delimiter: u8) -> Result<()> {
    let bytes = read_input(input)?;
    let decoded = read_container(&bytes)?;
    let out = open_output(output)?;
    csvio::emit_csv(&decoded.header, &decoded.channels, delimiter, out)
}

#[derive(Debug, Serialize)]
struct VerifyJson {
    ok: bool,
    rows: usize,
    channels: usize,
    lca: bool,
    bits_per_value: f64,
    file_bytes: usize,
    class_histogram: Vec<HistogramJson>,
}

fn verify(input: &Path, csv: &CsvArgs, codec: &CodecArgs, json: bool) -> Result<()> {
    let config = csv.to_config(codec.lca)?;
    let text = read_input(input)?;
    let parsed = csvio::parse_csv(text.as_slice(), &config)?;
    // under --lca the reference is the rounded data
    let channels = parsed.quantize(codec.range())?;
    let encoded = encode_container(
        &channels,
        &WriteOptions {
            sample_rate_mhz: parsed.sample_rate_mhz,
            t0_us: parsed.t0_us,
            obfuscate: codec.obfuscate,
            seed: codec.seed,
        },
    )?;
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
    let hist = bench::class_histogram(&channels)?;
    let values: u64 = channels.iter().map(|c| c.values.len() as u64).sum();
    let codec_bits: u64 = encoded
        .header
        .channels
        .iter()
        .map(|c| c.payload_bit_count - 8)
        .sum();
    let bpv = codec_bits as f64 / values as f64;
    let mut out = io::stdout().lock();
    if json {
        let j = VerifyJson {
            ok: true,
            rows: parsed.rows(),
            channels: channels.len(),
            lca: codec.lca,
            bits_per_value: bpv,
            file_bytes: encoded.bytes.len(),
            class_histogram: histogram_json(&hist),
        };
        writeln!(
            out,
            "{}",
            serde_json::to_string_pretty(&j).expect("serializable")
        )?;
    } else {
        writeln!(out, "OK")?;
        writeln!(
            out,
            "{} rows x {} channels, {bpv:.4} bits/value",
            parsed.rows(),
            channels.len()
        )?;
        write!(out, "{}", histogram_text(&hist))?;
    }
    Ok(())
}

fn inspect(input: &Path) -> Result<()> {
    let bytes = read_input(input)?;
    let (header, _) = container::read_header(&bytes)?;
    let mut out = io::stdout().lock();
    writeln!(
        out,
        "{}",
        serde_json::to_string_pretty(&header).expect("serializable")
    )?;
    Ok(())
}

#[derive(Debug, Serialize)]
struct ChannelStats {
    name: String,
    decimal_places: u8,
    lca: bool,
    values: u64,
    payload_bytes: u64,
    payload_bits: u64,
    bits_per_value: f64,
    class_histogram: Vec<HistogramJson>,
}

#[derive(Debug, Serialize)]
struct StatsJson {
    file_bytes: usize,
    header_bytes: usize,
    sample_rate_hz: f64,
    t0_us: u64,
    channels: Vec<ChannelStats>,
}

fn stats(input: &Path, json: bool) -> Result<()> {
    let bytes = read_input(input)?;
    let decoded = read_container(&bytes)?;
    let h = &decoded.header;
    let channels: Vec<ChannelStats> = h
        .channels
        .iter()
        .zip(&decoded.histograms)
        .map(|(m, hist)| ChannelStats {
            name: m.name.clone(),
            decimal_places: m.decimal_places,
            lca: m.lca,
            values: m.value_count,
            payload_bytes: m.payload_len,
            payload_bits: m.payload_bit_count,
            bits_per_value: m.payload_bit_count as f64 / m.value_count as f64,
            class_histogram: histogram_json(hist),
        })
        .collect();
    let report = StatsJson {
        file_bytes: bytes.len(),
        header_bytes: h.encoded_len(),
        sample_rate_hz: f64::from(h.sample_rate_mhz) / 1000.0,
        t0_us: h.t0_us,
        channels,
    };
    let mut out = io::stdout().lock();
    if json {
        writeln!(
            out,
            "{}",
            serde_json::to_string_pretty(&report).expect("serializable")
        )?;
        return Ok(());
    }
    writeln!(
        out,
        "{} bytes ({} header), {} Hz, t0 {} us",
        report.file_bytes, report.header_bytes, report.sample_rate_hz, report.t0_us
    )?;
    for (c, hist) in report.channels.iter().zip(&decoded.histograms) {
        writeln!(
            out,
            "\n{} (dp {}{}): {} values, {} bytes, {:.4} bits/value",
            c.name,
            c.decimal_places,
            if c.lca { ", LCA" } else { "" },
            c.values,
            c.payload_bytes,
            c.bits_per_value
        )?;
        write!(out, "{}", histogram_text(hist))?;
    }
    Ok(())
}

fn synth_csv(output: &Path, duration: f64, rate: f64, seed: u64, t0: f64) -> Result<()> {
    let out = synth::generate(&synth::default_profiles(), duration, rate, seed)?;
    let channels = synth::household_channels(&out, seed);
    let sink = open_output(output)?;
    csvio::emit_channels(
        seconds_to_us(t0)?,
        rate_to_mhz(rate)?,
        &channels,
        b',',
        sink,
    )
}

fn bench_cmd(
    input: Option<&Path>,
    csv: &CsvArgs,
    codec: &CodecArgs,
    synth_duration: f64,
    throughput_values: u64,
    json: bool,
) -> Result<()> {
    let bench_input = match input {
        Some(path) => BenchInput::Csv {
            bytes: read_input(path)?,
            config: csv.to_config(false)?,
        },
        None => BenchInput::Synth {
            duration_s: synth_duration,
            rate_hz: csv.rate.unwrap_or(50.0),
            seed: codec.seed,
            t0_us: csv.t0.map(seconds_to_us).transpose()?.unwrap_or(0),
        },
    };
    let report = bench::run_bench(
        bench_input,
        &BenchOptions {
            lca: codec.lca,
            obfuscate: codec.obfuscate,
            seed: codec.seed,
            range: codec.range(),
            throughput_values,
            deflate: true,
        },
    )?;
    let mut out = io::stdout().lock();
    if json {
        writeln!(
            out,
            "{}",
            serde_json::to_string_pretty(&report).expect("serializable")
        )?;
    } else {
        write!(out, "{}", report.to_text())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(columns: &str, decimals: Option<&str>) -> CsvArgs {
        CsvArgs {
            columns: columns.to_string(),
            decimals: decimals.map(str::to_string),
            rate: Some(50.0),
            t0: Some(1.5),
            delimiter: b',',
            no_header: false,
            header: false,
        }
    }

    #[test]
    fn default_mapping() {
        let c = args("timestamp:0,V:1,I:2,P:3,Q:4", None)
            .to_config(true)
            .unwrap();
        assert_eq!(c.timestamp_column, Some(0));
        let dps: Vec<u8> = c.channels.iter().map(|m| m.spec.decimal_places).collect();
        assert_eq!(dps, [2, 2, 0, 0]);
        assert!(c.channels.iter().all(|m| m.spec.lca));
    }

    #[test]
    fn custom_mapping() {
        let c = args("timestamp:none,P:0", Some("1"))
            .to_config(false)
            .unwrap();
        assert_eq!(c.timestamp_column, None);
        assert_eq!(c.t0_us, Some(1_500_000));
        assert_eq!(c.channels[0].spec.decimal_places, 1);
        assert!(args("V:1", Some("2,2")).to_config(false).is_err());
        assert!(args("V", None).to_config(false).is_err());
        assert!(args("V:1,I:1", None).to_config(false).is_err());
    }

    #[test]
    fn delimiters() {
        assert_eq!(parse_delimiter(";").unwrap(), b';');
        assert_eq!(parse_delimiter("tab").unwrap(), b'\t');
        assert!(parse_delimiter(";;").is_err());
    }
}
