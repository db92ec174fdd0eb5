//! Junk-value splicing ahead of the codec.
//!
//! A payload starts with an 8-bit count `N`. The codec stream that follows
//! holds `N` index words, then the data with `N` junk values spliced in.
//! Junk values are coded by the same grammar as real samples, so nothing in
//! the bit layout marks them; the decoder reads the index prefix and strips
//! them again.
//!
//! This is obfuscation, not encryption. Anyone who knows the format can
//! decode the stream without a key.

use rand::Rng;

use crate::bitstream::{BitReader, BitWriter};
use crate::codec::{self, Trace};
use crate::error::{Error, Result};
use crate::quantize::QuantizedValue;

pub const MAX_JUNK: usize = u8::MAX as usize;

/// Where and what to splice.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ObfuscationPlan {
    indices: Vec<u16>,
    junk: Vec<QuantizedValue>,
}

impl ObfuscationPlan {
    pub fn new(indices: Vec<u16>, junk: Vec<QuantizedValue>) -> Result<Self> {
        if indices.len() != junk.len() {
            return Err(Error::usage(format!(
                "{} indices but {} junk values",
                indices.len(),
                junk.len()
            )));
        }
        if indices.len() > MAX_JUNK {
            return Err(Error::usage(format!(
                "junk count {} exceeds {MAX_JUNK}",
                indices.len()
            )));
        }
        Ok(Self { indices, junk })
    }

    /// Draws `count` index words and `count` junk values, each uniform over
    /// all 16-bit patterns.
    pub fn random<R: Rng + ?Sized>(count: u8, rng: &mut R) -> Self {
        let indices = (0..count).map(|_| rng.gen::<u16>()).collect();
        let junk = (0..count).map(|_| rng.gen::<i16>()).collect();
        Self { indices, junk }
    }

    pub fn count(&self) -> usize {
        self.indices.len()
    }

    pub fn indices(&self) -> &[u16] {
        &self.indices
    }

    pub fn junk(&self) -> &[QuantizedValue] {
        &self.junk
    }
}

/// Inserts junk value `j` (1-based) at `indices[j] mod (L + j)` of the
/// partially spliced sequence.
pub fn splice(values: &[QuantizedValue], plan: &ObfuscationPlan) -> Vec<QuantizedValue> {
    let mut out = Vec::with_capacity(values.len() + plan.count());
    out.extend_from_slice(values);
    for (&idx, &junk) in plan.indices.iter().zip(&plan.junk) {
        // out.len() + 1 == L + j before this insertion
        let pos = usize::from(idx) % (out.len() + 1);
        out.insert(pos, junk);
    }
    out
}

/// Removes spliced junk in reverse insertion order.
pub fn unsplice(
    spliced: &[QuantizedValue],
    indices: &[u16],
    original_len: usize,
) -> Result<Vec<QuantizedValue>> {
    if spliced.len() != original_len + indices.len() {
        return Err(Error::corrupt(format!(
            "spliced length {} != {original_len} values + {} junk",
            spliced.len(),
            indices.len()
        )));
    }
    let mut out = spliced.to_vec();
    for &idx in indices.iter().rev() {
        let pos = usize::from(idx) % out.len();
        out.remove(pos);
    }
    Ok(out)
}

/// Writes the count byte, then codes `plan.indices ++ splice(values)` as one
/// stream. Returns bits written including the count byte.
pub fn encode_with_plan<T: Trace>(
    values: &[QuantizedValue],
    plan: &ObfuscationPlan,
    w: &mut BitWriter,
    trace: &mut T,
) -> Result<u64> {
    if values.is_empty() {
        return Err(Error::usage("cannot encode an empty channel"));
    }
    let start = w.bit_len();
    w.put_bits(plan.count() as u32, 8);
    let stream: Vec<QuantizedValue> = if plan.count() == 0 {
        values.to_vec()
    } else {
        plan.indices
            .iter()
            .map(|&i| i as i16)
            .chain(splice(values, plan))
            .collect()
    };
    codec::encode_sequence_traced(&stream, w, trace)?;
    Ok(w.bit_len() - start)
}

/// Draws a plan of `count` junk values from `rng` and encodes with it.
pub fn encode_obfuscated<R: Rng + ?Sized>(
    values: &[QuantizedValue],
    count: u8,
    rng: &mut R,
    w: &mut BitWriter,
) -> Result<(u64, ObfuscationPlan)> {
    encode_obfuscated_traced(values, count, rng, w, &mut ())
}

pub fn encode_obfuscated_traced<R: Rng + ?Sized, T: Trace>(
    values: &[QuantizedValue],
    count: u8,
    rng: &mut R,
    w: &mut BitWriter,
    trace: &mut T,
) -> Result<(u64, ObfuscationPlan)> {
    let plan = ObfuscationPlan::random(count, rng);
    let bits = encode_with_plan(values, &plan, w, trace)?;
    Ok((bits, plan))
}

/// Reads a payload written by [`encode_obfuscated`] holding `original_len`
/// real values.
pub fn decode_obfuscated(
    r: &mut BitReader<'_>,
    original_len: usize,
) -> Result<Vec<QuantizedValue>> {
    decode_obfuscated_traced(r, original_len, &mut ())
}

pub fn decode_obfuscated_traced<T: Trace>(
    r: &mut BitReader<'_>,
    original_len: usize,
    trace: &mut T,
) -> Result<Vec<QuantizedValue>> {
    if original_len == 0 {
        return Err(Error::usage("original length must be at least 1"));
    }
    let n = r.read_bits(8)? as usize;
    let mut stream = codec::decode_sequence_traced(r, 2 * n + original_len, trace)?;
    if n == 0 {
        return Ok(stream);
    }
    let body = stream.split_off(n);
    let indices: Vec<u16> = stream.iter().map(|&v| v as u16).collect();
    unsplice(&body, &indices, original_len)
}
