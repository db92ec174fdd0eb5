//! CSV ingestion and emission.
//!
//! The default layout is `timestamp,V,I,P,Q` with timestamps in (possibly
//! fractional) seconds since the Unix epoch and 2, 2, 0, 0 stored decimal
//! places. Sizes used as compression-ratio baselines count line endings as
//! a single LF byte.

use std::fmt::Write as _;
use std::io::{Read, Write};

use csv::{ReaderBuilder, StringRecord, Trim};

use crate::container::{offset_us, rate_to_mhz, Channel, ContainerHeader};
use crate::error::{Error, Result};
use crate::quantize::{quantize_channel, ChannelSpec, QuantizedValue, RangeMode};

/// A source column and how to store it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnMap {
    /// 0-based column index.
    pub column: usize,
    pub spec: ChannelSpec,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsvConfig {
    /// `None` detects a header from the first row: it is a header if any
    /// mapped cell is not numeric.
    pub has_header: Option<bool>,
    pub delimiter: u8,
    pub timestamp_column: Option<usize>,
    pub channels: Vec<ColumnMap>,
    /// Declared sample rate. Inferred from the timestamp column when absent.
    pub rate_hz: Option<f64>,
    /// First timestamp when the file has no timestamp column.
    pub t0_us: Option<u64>,
}

impl Default for CsvConfig {
    fn default() -> Self {
        Self::household(false)
    }
}

impl CsvConfig {
    /// `timestamp,V,I,P,Q` at 2, 2, 0, 0 decimal places.
    pub fn household(lca: bool) -> Self {
        Self {
            has_header: None,
            delimiter: b',',
            timestamp_column: Some(0),
            channels: ChannelSpec::household_defaults(lca)
                .into_iter()
                .enumerate()
                .map(|(i, spec)| ColumnMap {
                    column: i + 1,
                    spec,
                })
                .collect(),
            rate_hz: None,
            t0_us: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.channels.is_empty() {
            return Err(Error::usage("no channel columns mapped"));
        }
        let mut cols: Vec<usize> = self.channels.iter().map(|c| c.column).collect();
        cols.extend(self.timestamp_column);
        cols.sort_unstable();
        if cols.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::usage("column indices must be distinct"));
        }
        if self.timestamp_column.is_none() && (self.rate_hz.is_none() || self.t0_us.is_none()) {
            return Err(Error::usage(
                "without a timestamp column both a rate and a first timestamp are required",
            ));
        }
        if let Some(r) = self.rate_hz {
            rate_to_mhz(r)?;
        }
        Ok(())
    }
}

/// Decimal measurements read from a CSV file.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedCsv {
    pub t0_us: u64,
    pub sample_rate_mhz: u32,
    pub rate_inferred: bool,
    /// Rows whose spacing from the previous row is off by more than 1%.
    pub spacing_warnings: u64,
    pub channels: Vec<(ChannelSpec, Vec<f64>)>,
}

impl ParsedCsv {
    pub fn rows(&self) -> usize {
        self.channels.first().map_or(0, |c| c.1.len())
    }

    /// Quantizes every channel; errors name the channel and value.
    pub fn quantize(&self, mode: RangeMode) -> Result<Vec<Channel>> {
        self.channels
            .iter()
            .map(|(spec, xs)| {
                Ok(Channel {
                    spec: spec.clone(),
                    values: quantize_channel(xs, spec, mode)?,
                })
            })
            .collect()
    }
}

fn parse_cell(record: &StringRecord, col: usize, row: u64) -> Result<f64> {
    let cell = record.get(col).ok_or_else(|| Error::Parse {
        row,
        column: col + 1,
        message: format!("row has only {} fields", record.len()),
    })?;
    cell.parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| Error::Parse {
            row,
            column: col + 1,
            message: format!("cannot parse {cell:?} as a number"),
        })
}

fn seconds_to_us(secs: f64, row: u64, column: usize) -> Result<u64> {
    let us = (secs * 1e6).round();
    if us < 0.0 || us >= u64::MAX as f64 {
        return Err(Error::Parse {
            row,
            column: column + 1,
            message: format!("timestamp {secs} is outside the supported range"),
        });
    }
    Ok(us as u64)
}

pub fn parse_csv<R: Read>(input: R, config: &CsvConfig) -> Result<ParsedCsv> {
    config.validate()?;
    let mut reader = ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(Trim::All)
        .delimiter(config.delimiter)
        .from_reader(input);

    let mut channels: Vec<(ChannelSpec, Vec<f64>)> = config
        .channels
        .iter()
        .map(|c| (c.spec.clone(), Vec::new()))
        .collect();
    let mut stamps: Vec<u64> = Vec::new();
    let mut width = None;
    let mut record = StringRecord::new();
    let mut row = 0u64;

    loop {
        let more = reader.read_record(&mut record).map_err(|e| Error::Parse {
            row: row + 1,
            column: 0,
            message: e.to_string(),
        })?;
        if !more {
            break;
        }
        row += 1;
        if row == 1 {
            let is_header = match config.has_header {
                Some(h) => h,
                None => config
                    .channels
                    .iter()
                    .map(|c| c.column)
                    .chain(config.timestamp_column)
                    .any(|col| record.get(col).is_some_and(|s| s.parse::<f64>().is_err())),
            };
            width = Some(record.len());
            if is_header {
                continue;
            }
        }
        let expected = width.expect("set on first row");
        if record.len() != expected {
            return Err(Error::Parse {
                row,
                column: record.len().min(expected) + 1,
                message: format!("row has {} fields, expected {expected}", record.len()),
            });
        }
        if let Some(tc) = config.timestamp_column {
            stamps.push(seconds_to_us(parse_cell(&record, tc, row)?, row, tc)?);
        }
        for (map, (_, out)) in config.channels.iter().zip(channels.iter_mut()) {
            out.push(parse_cell(&record, map.column, row)?);
        }
    }

    let n = channels[0].1.len();
    if n == 0 {
        return Err(Error::Parse {
            row: row + 1,
            column: 0,
            message: "no data rows".to_string(),
        });
    }

    let t0_us = match (config.timestamp_column, config.t0_us) {
        (Some(_), _) => stamps[0],
        (None, Some(t0)) => t0,
        (None, None) => unreachable!("validated"),
    };

    let (sample_rate_mhz, rate_inferred) = match config.rate_hz {
        Some(r) => (rate_to_mhz(r)?, false),
        None => {
            let span = stamps[n - 1].saturating_sub(stamps[0]);
            if n < 2 || span == 0 {
                return Err(Error::usage(
                    "cannot infer a sample rate; declare one explicitly",
                ));
            }
            (rate_to_mhz((n - 1) as f64 * 1e6 / span as f64)?, true)
        }
    };

    let period = 1e9 / f64::from(sample_rate_mhz);
    let spacing_warnings = stamps
        .windows(2)
        .filter(|w| ((w[1] as f64 - w[0] as f64) - period).abs() > 0.01 * period)
        .count() as u64;

    Ok(ParsedCsv {
        t0_us,
        sample_rate_mhz,
        rate_inferred,
        spacing_warnings,
        channels,
    })
}

/// `v / 10^dp` rendered exactly with `dp` decimals.
pub fn format_fixed(v: QuantizedValue, decimal_places: u8) -> String {
    let mut s = String::new();
    push_fixed(&mut s, i64::from(v), decimal_places);
    s
}

fn push_fixed(out: &mut String, v: i64, dp: u8) {
    if dp == 0 {
        let _ = write!(out, "{v}");
        return;
    }
    let scale = 10i64.pow(u32::from(dp));
    let sign = if v < 0 { "-" } else { "" };
    let a = v.abs();
    let _ = write!(
        out,
        "{sign}{}.{:0width$}",
        a / scale,
        a % scale,
        width = usize::from(dp)
    );
}

/// Decimals needed so every timestamp prints exactly: two when all of them
/// fall on a 10 ms grid, else six.
fn timestamp_decimals(t0_us: u64, sample_rate_mhz: u32) -> u8 {
    let mhz = u64::from(sample_rate_mhz);
    let grid = 1_000_000_000 % mhz == 0 && (1_000_000_000 / mhz) % 10_000 == 0;
    if grid && t0_us.is_multiple_of(10_000) {
        2
    } else {
        6
    }
}

fn push_timestamp(out: &mut String, us: u64, decimals: u8) {
    if decimals == 2 {
        let cs = (us + 5_000) / 10_000;
        let _ = write!(out, "{}.{:02}", cs / 100, cs % 100);
    } else {
        let _ = write!(out, "{}.{:06}", us / 1_000_000, us % 1_000_000);
    }
}

/// Writes decoded channels as CSV with a header row and reconstructed
/// timestamps.
pub fn emit_csv<W: Write>(
    header: &ContainerHeader,
    channels: &[Vec<QuantizedValue>],
    delimiter: u8,
    out: W,
) -> Result<()> {
    if channels.len() != header.channels.len() {
        return Err(Error::usage(format!(
            "{} channel sequences for {} header channels",
            channels.len(),
            header.channels.len()
        )));
    }
    let cols: Vec<(&str, u8, &[QuantizedValue])> = header
        .channels
        .iter()
        .zip(channels)
        .map(|(m, v)| (m.name.as_str(), m.decimal_places, v.as_slice()))
        .collect();
    emit_rows(header.t0_us, header.sample_rate_mhz, &cols, delimiter, out)
}

/// Writes quantized channels as CSV without going through a container.
pub fn emit_channels<W: Write>(
    t0_us: u64,
    sample_rate_mhz: u32,
    channels: &[Channel],
    delimiter: u8,
    out: W,
) -> Result<()> {
    let cols: Vec<(&str, u8, &[QuantizedValue])> = channels
        .iter()
        .map(|c| {
            (
                c.spec.name.as_str(),
                c.spec.decimal_places,
                c.values.as_slice(),
            )
        })
        .collect();
    emit_rows(t0_us, sample_rate_mhz, &cols, delimiter, out)
}

fn emit_rows<W: Write>(
    t0_us: u64,
    sample_rate_mhz: u32,
    cols: &[(&str, u8, &[QuantizedValue])],
    delimiter: u8,
    mut out: W,
) -> Result<()> {
    if sample_rate_mhz == 0 {
        return Err(Error::usage("sample rate must be positive"));
    }
    let n = cols.first().map_or(0, |c| c.2.len());
    if cols.iter().any(|c| c.2.len() != n) {
        return Err(Error::usage("channels differ in length"));
    }
    let d = char::from(delimiter);
    let mut line = String::from("timestamp");
    for (name, _, _) in cols {
        line.push(d);
        line.push_str(name);
    }
    line.push('\n');
    out.write_all(line.as_bytes())?;

    let decimals = timestamp_decimals(t0_us, sample_rate_mhz);
    let mut buf = String::with_capacity(1 << 16);
    for i in 0..n {
        push_timestamp(
            &mut buf,
            t0_us + offset_us(i as u64, sample_rate_mhz),
            decimals,
        );
        for (_, dp, values) in cols {
            buf.push(d);
            push_fixed(&mut buf, i64::from(values[i]), *dp);
        }
        buf.push('\n');
        if buf.len() > (1 << 16) - 256 {
            out.write_all(buf.as_bytes())?;
            buf.clear();
        }
    }
    out.write_all(buf.as_bytes())?;
    out.flush()?;
    Ok(())
}

/// Byte size of serialized CSV with CRLF counted as one byte.
pub fn csv_size(bytes: &[u8]) -> u64 {
    let crlf = bytes.windows(2).filter(|w| w == b"\r\n").count();
    (bytes.len() - crlf) as u64
}
