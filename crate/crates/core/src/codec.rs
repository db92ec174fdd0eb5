//! XOR-delta variable-length coding of 16-bit samples.
//!
//! The first value of a stream is stored raw in 16 bits. Every later value
//! is XORed with its predecessor:
//!
//! ```text
//! XOR == 0                      '0'
//! leading and trailing match    '1' '00' meaningful
//! only leading matches          '1' '01' trailing(4) meaningful
//! only trailing matches         '1' '10' leading(4) meaningful
//! neither matches               '1' '11' leading(4) trailing(4) meaningful
//! ```
//!
//! "Matches" is strict equality with the leading/trailing zero counts of the
//! previous nonzero XOR. The counts always describe the actual XOR, so the
//! meaningful part is exactly the XOR with both zero runs stripped and its
//! length is `16 - leading - trailing`. A fresh stream starts with a window
//! that matches nothing, so its first nonzero XOR always takes `'11'`.
//!
//! Values are XORed as raw two's-complement bit patterns.

use serde::Serialize;

use crate::bitstream::{BitReader, BitWriter};
use crate::error::{Error, Result};
use crate::quantize::QuantizedValue;

/// Window count that compares unequal to every real count.
pub const SENTINEL: u8 = u8::MAX;

/// Most bits a single non-first value can cost: 1 + 2 + 4 + 4 + 16.
pub const MAX_BITS_PER_VALUE: u32 = 27;

/// Leading/trailing zero split of a nonzero 16-bit XOR.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct XorParts {
    pub leading: u8,
    pub trailing: u8,
    pub meaningful_len: u8,
    pub meaningful_bits: u16,
}

pub fn xor_parts(x: u16) -> Result<XorParts> {
    if x == 0 {
        return Err(Error::usage("zero XOR has no meaningful part"));
    }
    Ok(split(x))
}

#[inline]
fn split(x: u16) -> XorParts {
    debug_assert_ne!(x, 0);
    let leading = x.leading_zeros() as u8;
    let trailing = x.trailing_zeros() as u8;
    XorParts {
        leading,
        trailing,
        meaningful_len: 16 - leading - trailing,
        meaningful_bits: x >> trailing,
    }
}

/// Coding state carried from one value to the next.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct XorWindow {
    pub prev_value: u16,
    pub prev_leading: u8,
    pub prev_trailing: u8,
}

impl XorWindow {
    /// Window after the raw first value of a stream.
    pub fn start(first: QuantizedValue) -> Self {
        Self {
            prev_value: first as u16,
            prev_leading: SENTINEL,
            prev_trailing: SENTINEL,
        }
    }
}

/// Which branch of the grammar a value was coded with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum ControlClass {
    /// `'0'`: value repeats its predecessor.
    Repeat,
    /// `'100'`
    SameBoth,
    /// `'101'`
    SameLeading,
    /// `'110'`
    SameTrailing,
    /// `'111'`
    Fresh,
}

impl ControlClass {
    pub const ALL: [ControlClass; 5] = [
        ControlClass::Repeat,
        ControlClass::SameBoth,
        ControlClass::SameLeading,
        ControlClass::SameTrailing,
        ControlClass::Fresh,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    /// Control-bit prefix as printed in reports.
    pub fn label(self) -> &'static str {
        match self {
            ControlClass::Repeat => "0",
            ControlClass::SameBoth => "100",
            ControlClass::SameLeading => "101",
            ControlClass::SameTrailing => "110",
            ControlClass::Fresh => "111",
        }
    }
}

/// Receives one event per coded (non-first) value.
pub trait Trace {
    fn record(&mut self, class: ControlClass, bits: u32);
}

impl Trace for () {
    #[inline]
    fn record(&mut self, _: ControlClass, _: u32) {}
}

/// Per-class value counts and bit totals.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ClassHistogram {
    pub counts: [u64; 5],
    pub bits: [u64; 5],
}

impl Trace for ClassHistogram {
    #[inline]
    fn record(&mut self, class: ControlClass, bits: u32) {
        self.counts[class.index()] += 1;
        self.bits[class.index()] += u64::from(bits);
    }
}

impl ClassHistogram {
    pub fn count(&self, class: ControlClass) -> u64 {
        self.counts[class.index()]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn fraction(&self, class: ControlClass) -> f64 {
        match self.total() {
            0 => 0.0,
            n => self.count(class) as f64 / n as f64,
        }
    }

    /// Mean coded size of values in `class`, or `None` if there were none.
    pub fn mean_bits(&self, class: ControlClass) -> Option<f64> {
        let i = class.index();
        (self.counts[i] > 0).then(|| self.bits[i] as f64 / self.counts[i] as f64)
    }

    pub fn merge(&mut self, other: &ClassHistogram) {
        for i in 0..5 {
            self.counts[i] += other.counts[i];
            self.bits[i] += other.bits[i];
        }
    }
}

/// Codes `v` against the window and advances it. Returns the class used.
#[inline]
pub fn encode_next(win: &mut XorWindow, v: QuantizedValue, w: &mut BitWriter) -> ControlClass {
    encode_traced(win, v, w, &mut ())
}

#[inline]
fn encode_traced<T: Trace>(
    win: &mut XorWindow,
    v: QuantizedValue,
    w: &mut BitWriter,
    trace: &mut T,
) -> ControlClass {
    let cur = v as u16;
    let x = cur ^ win.prev_value;
    win.prev_value = cur;
    if x == 0 {
        w.put_bits(0, 1);
        trace.record(ControlClass::Repeat, 1);
        return ControlClass::Repeat;
    }
    let p = split(x);
    let len = u32::from(p.meaningful_len);
    let same_lead = p.leading == win.prev_leading;
    let same_trail = p.trailing == win.prev_trailing;
    let (class, bits) = match (same_lead, same_trail) {
        (true, true) => {
            w.put_bits(0b100, 3);
            (ControlClass::SameBoth, 3 + len)
        }
        (true, false) => {
            w.put_bits((0b101 << 4) | u32::from(p.trailing), 7);
            (ControlClass::SameLeading, 7 + len)
        }
        (false, true) => {
            w.put_bits((0b110 << 4) | u32::from(p.leading), 7);
            (ControlClass::SameTrailing, 7 + len)
        }
        (false, false) => {
            w.put_bits(
                (0b111 << 8) | (u32::from(p.leading) << 4) | u32::from(p.trailing),
                11,
            );
            (ControlClass::Fresh, 11 + len)
        }
    };
    w.put_bits(u32::from(p.meaningful_bits), len);
    win.prev_leading = p.leading;
    win.prev_trailing = p.trailing;
    trace.record(class, bits);
    class
}

/// Inverse of [`encode_next`].
#[inline]
pub fn decode_next(win: &mut XorWindow, r: &mut BitReader<'_>) -> Result<QuantizedValue> {
    decode_traced(win, r, &mut ())
}

#[inline]
fn decode_traced<T: Trace>(
    win: &mut XorWindow,
    r: &mut BitReader<'_>,
    trace: &mut T,
) -> Result<QuantizedValue> {
    let start = r.position();
    if !r.read_bit()? {
        trace.record(ControlClass::Repeat, 1);
        return Ok(win.prev_value as i16);
    }
    let (class, leading, trailing) = match r.read_bits(2)? {
        0b00 => (ControlClass::SameBoth, win.prev_leading, win.prev_trailing),
        0b01 => (
            ControlClass::SameLeading,
            win.prev_leading,
            r.read_bits(4)? as u8,
        ),
        0b10 => (
            ControlClass::SameTrailing,
            r.read_bits(4)? as u8,
            win.prev_trailing,
        ),
        _ => {
            let l = r.read_bits(4)? as u8;
            (ControlClass::Fresh, l, r.read_bits(4)? as u8)
        }
    };
    if leading == SENTINEL || trailing == SENTINEL {
        return Err(Error::corrupt(
            "control bits reuse a zero count before any was transmitted",
        ));
    }
    if u32::from(leading) + u32::from(trailing) >= 16 {
        return Err(Error::corrupt(format!(
            "leading {leading} + trailing {trailing} leaves no meaningful bits"
        )));
    }
    let len = 16 - u32::from(leading) - u32::from(trailing);
    let meaningful = r.read_bits(len)?;
    // canonical encoders always emit a meaningful part with both end bits set
    if meaningful & 1 == 0 || meaningful >> (len - 1) == 0 {
        return Err(Error::corrupt(format!(
            "meaningful part {meaningful:#b} is not bounded by set bits"
        )));
    }
    let x = (meaningful << trailing) as u16;
    win.prev_value ^= x;
    win.prev_leading = leading;
    win.prev_trailing = trailing;
    trace.record(class, (r.position() - start) as u32);
    Ok(win.prev_value as i16)
}

/// Writes a whole stream: the first value raw, then one coded entry per
/// remaining value. Returns the number of bits written.
pub fn encode_sequence(values: &[QuantizedValue], w: &mut BitWriter) -> Result<u64> {
    encode_sequence_traced(values, w, &mut ())
}

/// [`encode_sequence`] reporting each coded value to `trace`.
pub fn encode_sequence_traced<T: Trace>(
    values: &[QuantizedValue],
    w: &mut BitWriter,
    trace: &mut T,
) -> Result<u64> {
    let (&first, rest) = values
        .split_first()
        .ok_or_else(|| Error::usage("cannot encode an empty sequence"))?;
    let start = w.bit_len();
    w.put_bits(u32::from(first as u16), 16);
    let mut win = XorWindow::start(first);
    for &v in rest {
        encode_traced(&mut win, v, w, trace);
    }
    Ok(w.bit_len() - start)
}

/// Reads exactly `count` values written by [`encode_sequence`].
pub fn decode_sequence(r: &mut BitReader<'_>, count: usize) -> Result<Vec<QuantizedValue>> {
    decode_sequence_traced(r, count, &mut ())
}

/// [`decode_sequence`] reporting the class and size of each coded value.
pub fn decode_sequence_traced<T: Trace>(
    r: &mut BitReader<'_>,
    count: usize,
    trace: &mut T,
) -> Result<Vec<QuantizedValue>> {
    if count == 0 {
        return Err(Error::usage("value count must be at least 1"));
    }
    let first = r.read_bits(16)? as u16 as i16;
    let mut out = Vec::with_capacity(count);
    out.push(first);
    let mut win = XorWindow::start(first);
    for _ in 1..count {
        out.push(decode_traced(&mut win, r, trace)?);
    }
    Ok(out)
}
