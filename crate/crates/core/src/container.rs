//! The `.bin` file: one header, then one payload per channel.
//!
//! ```text
//! offset  size  field
//! 0       4     magic "LCP1"
//! 4       1     version (1)
//! 5       1     flags (bit 0: some channel is LCA-rounded)
//! 6       1     channel count
//! 7       4     sample rate, milli-hertz
//! 11      8     first timestamp, microseconds since the Unix epoch
//! 19      ...   channel table, per channel:
//!                 1   name length, then that many UTF-8 bytes
//!                 1   decimal places
//!                 1   LCA flag (0 or 1)
//!                 8   value count (before splicing)
//!                 8   payload length in bytes
//!                 8   payload length in bits
//! ...     ...   payloads, in channel order, each zero-padded to a byte
//! ```
//!
//! All integers are little-endian. Only one timestamp is stored; the rest
//! follow from the fixed sample rate.

use std::thread;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bitstream::{BitReader, BitWriter};
use crate::codec::ClassHistogram;
use crate::error::{Error, Result};
use crate::obfuscate;
use crate::quantize::{ChannelSpec, QuantizedValue, MAX_DECIMAL_PLACES};

pub const MAGIC: [u8; 4] = *b"LCP1";
pub const VERSION: u8 = 1;
pub const FLAG_LCA: u8 = 0b0000_0001;

const FIXED_HEADER_LEN: usize = 19;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChannelMeta {
    pub name: String,
    pub decimal_places: u8,
    pub lca: bool,
    pub value_count: u64,
    pub payload_len: u64,
    pub payload_bit_count: u64,
}

impl ChannelMeta {
    pub fn spec(&self) -> ChannelSpec {
        ChannelSpec {
            name: self.name.clone(),
            decimal_places: self.decimal_places,
            lca: self.lca,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ContainerHeader {
    pub version: u8,
    pub flags: u8,
    pub sample_rate_mhz: u32,
    pub t0_us: u64,
    pub channels: Vec<ChannelMeta>,
}

impl ContainerHeader {
    /// Number of samples per channel.
    pub fn value_count(&self) -> u64 {
        self.channels.first().map_or(0, |c| c.value_count)
    }

    pub fn encoded_len(&self) -> usize {
        FIXED_HEADER_LEN
            + self
                .channels
                .iter()
                .map(|c| 1 + c.name.len() + 2 + 24)
                .sum::<usize>()
    }

    pub fn payload_bytes(&self) -> u64 {
        self.channels.iter().map(|c| c.payload_len).sum()
    }

    fn write_to(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&MAGIC);
        out.push(self.version);
        out.push(self.flags);
        out.push(self.channels.len() as u8);
        out.extend_from_slice(&self.sample_rate_mhz.to_le_bytes());
        out.extend_from_slice(&self.t0_us.to_le_bytes());
        for c in &self.channels {
            out.push(c.name.len() as u8);
            out.extend_from_slice(c.name.as_bytes());
            out.push(c.decimal_places);
            out.push(u8::from(c.lca));
            out.extend_from_slice(&c.value_count.to_le_bytes());
            out.extend_from_slice(&c.payload_len.to_le_bytes());
            out.extend_from_slice(&c.payload_bit_count.to_le_bytes());
        }
    }
}

/// Sampling metadata and obfuscation settings for [`write_container`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WriteOptions {
    pub sample_rate_mhz: u32,
    pub t0_us: u64,
    /// Junk values spliced into each channel.
    pub obfuscate: u8,
    pub seed: u64,
}

impl Default for WriteOptions {
    fn default() -> Self {
        Self {
            sample_rate_mhz: 50_000,
            t0_us: 0,
            obfuscate: 0,
            seed: 0,
        }
    }
}

/// One quantized channel ready to be written.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Channel {
    pub spec: ChannelSpec,
    pub values: Vec<QuantizedValue>,
}

/// Container bytes plus per-channel encoder statistics.
#[derive(Debug, Clone)]
pub struct EncodedContainer {
    pub bytes: Vec<u8>,
    pub header: ContainerHeader,
    pub histograms: Vec<ClassHistogram>,
}

/// RNG for channel `index`: one ChaCha stream per channel under a shared
/// seed, so output does not depend on encode order or thread count.
pub fn channel_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

pub fn write_container(channels: &[Channel], opts: &WriteOptions) -> Result<Vec<u8>> {
    encode_container(channels, opts).map(|e| e.bytes)
}

/// Encodes every channel (in parallel when there are several) and
/// assembles the file.
pub fn encode_container(channels: &[Channel], opts: &WriteOptions) -> Result<EncodedContainer> {
    validate(channels, opts)?;

    let encode_one = |index: usize, ch: &Channel| -> Result<(Vec<u8>, u64, ClassHistogram)> {
        let mut rng = channel_rng(opts.seed, index);
        let mut w = BitWriter::with_capacity(ch.values.len() / 4 + 64);
        let mut hist = ClassHistogram::default();
        obfuscate::encode_obfuscated_traced(
            &ch.values,
            opts.obfuscate,
            &mut rng,
            &mut w,
            &mut hist,
        )?;
        let (bytes, bits) = w.finish();
        Ok((bytes, bits, hist))
    };

    let encoded: Vec<Result<_>> = if channels.len() == 1 {
        vec![encode_one(0, &channels[0])]
    } else {
        thread::scope(|s| {
            let handles: Vec<_> = channels
                .iter()
                .enumerate()
                .map(|(i, ch)| s.spawn(move || encode_one(i, ch)))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("channel encoder panicked"))
                .collect()
        })
    };

    let mut payloads = Vec::with_capacity(channels.len());
    let mut metas = Vec::with_capacity(channels.len());
    let mut histograms = Vec::with_capacity(channels.len());
    for (ch, res) in channels.iter().zip(encoded) {
        let (bytes, bits, hist) = res?;
        metas.push(ChannelMeta {
            name: ch.spec.name.clone(),
            decimal_places: ch.spec.decimal_places,
            lca: ch.spec.lca,
            value_count: ch.values.len() as u64,
            payload_len: bytes.len() as u64,
            payload_bit_count: bits,
        });
        payloads.push(bytes);
        histograms.push(hist);
    }

    let header = ContainerHeader {
        version: VERSION,
        flags: if channels.iter().any(|c| c.spec.lca) {
            FLAG_LCA
        } else {
            0
        },
        sample_rate_mhz: opts.sample_rate_mhz,
        t0_us: opts.t0_us,
        channels: metas,
    };
    let mut bytes =
        Vec::with_capacity(header.encoded_len() + payloads.iter().map(Vec::len).sum::<usize>());
    header.write_to(&mut bytes);
    for p in &payloads {
        bytes.extend_from_slice(p);
    }
    Ok(EncodedContainer {
        bytes,
        header,
        histograms,
    })
}

fn validate(channels: &[Channel], opts: &WriteOptions) -> Result<()> {
    if channels.is_empty() {
        return Err(Error::usage("container needs at least one channel"));
    }
    if channels.len() > usize::from(u8::MAX) {
        return Err(Error::usage(format!(
            "{} channels exceed 255",
            channels.len()
        )));
    }
    if opts.sample_rate_mhz == 0 {
        return Err(Error::usage("sample rate must be positive"));
    }
    let n = channels[0].values.len();
    if n == 0 {
        return Err(Error::usage("channels must hold at least one value"));
    }
    for ch in channels {
        if ch.values.len() != n {
            return Err(Error::usage(format!(
                "channel {} has {} values, expected {n}",
                ch.spec.name,
                ch.values.len()
            )));
        }
        if ch.spec.name.len() > usize::from(u8::MAX) {
            return Err(Error::usage(format!(
                "channel name {:?} longer than 255 bytes",
                ch.spec.name
            )));
        }
        if ch.spec.decimal_places > MAX_DECIMAL_PLACES {
            return Err(Error::usage(format!(
                "channel {} has {} decimal places",
                ch.spec.name, ch.spec.decimal_places
            )));
        }
    }
    Ok(())
}

/// Little-endian cursor over the header bytes.
struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.buf.len())
            .ok_or_else(|| Error::truncated(format!("file ends inside {what}")))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u8(&mut self, what: &str) -> Result<u8> {
        Ok(self.take(1, what)?[0])
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(
            self.take(4, what)?.try_into().expect("4 bytes"),
        ))
    }

    fn u64(&mut self, what: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(
            self.take(8, what)?.try_into().expect("8 bytes"),
        ))
    }
}

/// Parses and validates the header; returns it with the payload offset.
pub fn read_header(bytes: &[u8]) -> Result<(ContainerHeader, usize)> {
    let mut c = Cursor { buf: bytes, pos: 0 };
    let magic: [u8; 4] = c.take(4, "magic")?.try_into().expect("4 bytes");
    if magic != MAGIC {
        return Err(Error::BadMagic(magic));
    }
    let version = c.u8("version")?;
    if version != VERSION {
        return Err(Error::UnsupportedVersion(version));
    }
    let flags = c.u8("flags")?;
    let channel_count = c.u8("channel count")?;
    let sample_rate_mhz = c.u32("sample rate")?;
    let t0_us = c.u64("first timestamp")?;
    if flags & !FLAG_LCA != 0 {
        return Err(Error::corrupt(format!("unknown flag bits {flags:#010b}")));
    }
    if channel_count == 0 {
        return Err(Error::corrupt("channel count is zero"));
    }
    if sample_rate_mhz == 0 {
        return Err(Error::corrupt("sample rate is zero"));
    }

    let mut channels = Vec::with_capacity(usize::from(channel_count));
    for i in 0..channel_count {
        let name_len = c.u8("channel name length")?;
        let name = std::str::from_utf8(c.take(usize::from(name_len), "channel name")?)
            .map_err(|_| Error::corrupt(format!("channel {i} name is not UTF-8")))?
            .to_string();
        let decimal_places = c.u8("decimal places")?;
        let lca = match c.u8("LCA flag")? {
            0 => false,
            1 => true,
            b => return Err(Error::corrupt(format!("channel {name} LCA flag is {b}"))),
        };
        let value_count = c.u64("value count")?;
        let payload_len = c.u64("payload length")?;
        let payload_bit_count = c.u64("payload bit count")?;
        if decimal_places > MAX_DECIMAL_PLACES {
            return Err(Error::corrupt(format!(
                "channel {name} has {decimal_places} decimal places"
            )));
        }
        if value_count == 0 {
            return Err(Error::corrupt(format!("channel {name} has no values")));
        }
        if payload_len != payload_bit_count.div_ceil(8) {
            return Err(Error::corrupt(format!(
                "channel {name}: {payload_len} bytes cannot hold exactly {payload_bit_count} bits"
            )));
        }
        channels.push(ChannelMeta {
            name,
            decimal_places,
            lca,
            value_count,
            payload_len,
            payload_bit_count,
        });
    }
    if channels
        .iter()
        .any(|m| m.value_count != channels[0].value_count)
    {
        return Err(Error::corrupt("channels disagree on value count"));
    }
    let any_lca = channels.iter().any(|m| m.lca);
    if any_lca != (flags & FLAG_LCA != 0) {
        return Err(Error::corrupt("LCA flag disagrees with channel table"));
    }
    Ok((
        ContainerHeader {
            version,
            flags,
            sample_rate_mhz,
            t0_us,
            channels,
        },
        c.pos,
    ))
}

/// Decoded container: header and one value sequence per channel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decoded {
    pub header: ContainerHeader,
    pub channels: Vec<Vec<QuantizedValue>>,
    /// Control classes of each stored stream, junk values included.
    pub histograms: Vec<ClassHistogram>,
}

pub fn read_container(bytes: &[u8]) -> Result<Decoded> {
    let (header, mut offset) = read_header(bytes)?;
    let mut slices = Vec::with_capacity(header.channels.len());
    for meta in &header.channels {
        let len = usize::try_from(meta.payload_len)
            .map_err(|_| Error::corrupt("payload length overflows"))?;
        let end = offset
            .checked_add(len)
            .filter(|&e| e <= bytes.len())
            .ok_or_else(|| {
                Error::truncated(format!("payload of channel {} is cut short", meta.name))
            })?;
        slices.push(&bytes[offset..end]);
        offset = end;
    }
    if offset != bytes.len() {
        return Err(Error::corrupt(format!(
            "{} trailing bytes after the last payload",
            bytes.len() - offset
        )));
    }

    let decode_one =
        |meta: &ChannelMeta, payload: &[u8]| -> Result<(Vec<QuantizedValue>, ClassHistogram)> {
            let count = usize::try_from(meta.value_count)
                .map_err(|_| Error::corrupt("value count overflows"))?;
            let mut r = BitReader::with_bit_len(payload, meta.payload_bit_count)?;
            let mut hist = ClassHistogram::default();
            let values = obfuscate::decode_obfuscated_traced(&mut r, count, &mut hist)?;
            if r.remaining() != 0 {
                return Err(Error::corrupt(format!(
                    "channel {}: {} undecoded bits",
                    meta.name,
                    r.remaining()
                )));
            }
            Ok((values, hist))
        };

    let decoded: Vec<Result<_>> = if slices.len() == 1 {
        vec![decode_one(&header.channels[0], slices[0])]
    } else {
        thread::scope(|s| {
            let handles: Vec<_> = header
                .channels
                .iter()
                .zip(&slices)
                .map(|(m, &p)| s.spawn(move || decode_one(m, p)))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("channel decoder panicked"))
                .collect()
        })
    };
    let (channels, histograms) = decoded
        .into_iter()
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .unzip();
    Ok(Decoded {
        header,
        channels,
        histograms,
    })
}

/// Timestamp of sample `index` in microseconds: `t0 + round(i * 10^9 / rate_mHz)`.
pub fn timestamp_of(index: u64, header: &ContainerHeader) -> Result<u64> {
    if index >= header.value_count() {
        return Err(Error::usage(format!(
            "sample index {index} out of range for {} values",
            header.value_count()
        )));
    }
    Ok(header.t0_us + offset_us(index, header.sample_rate_mhz))
}

/// `round(index * 10^9 / rate_mhz)`, ties up, in exact integer arithmetic.
pub fn offset_us(index: u64, rate_mhz: u32) -> u64 {
    let num = u128::from(index) * 1_000_000_000u128;
    let den = u128::from(rate_mhz);
    ((2 * num + den) / (2 * den)) as u64
}

/// Converts a rate in hertz to the stored milli-hertz integer.
pub fn rate_to_mhz(rate_hz: f64) -> Result<u32> {
    let mhz = (rate_hz * 1000.0).round();
    if !rate_hz.is_finite() || mhz < 1.0 || mhz > f64::from(u32::MAX) {
        return Err(Error::usage(format!(
            "sample rate {rate_hz} Hz is not representable"
        )));
    }
    Ok(mhz as u32)
}
