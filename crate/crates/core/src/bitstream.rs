//! MSB-first bit writer and sequential bit reader over byte buffers.
//!
//! The first bit written lands in the most significant bit of the first
//! byte, so a stream printed as a bit string reads left to right in write
//! order. Padding in the final byte is always zero and carries no meaning;
//! decoders stop on value counts, never on padding.

use crate::error::{Error, Result};

/// Append-only bit sink.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BitWriter {
    buf: Vec<u8>,
    bits: u64,
}

impl BitWriter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(bytes: usize) -> Self {
        Self {
            buf: Vec::with_capacity(bytes),
            bits: 0,
        }
    }

    /// Number of bits written so far.
    pub fn bit_len(&self) -> u64 {
        self.bits
    }

    /// Appends the `count` low-order bits of `value`, most significant first.
    ///
    /// `count` must be in `[1, 32]` and `value` must fit in `count` bits.
    pub fn write_bits(&mut self, value: u32, count: u32) -> Result<()> {
        if !(1..=32).contains(&count) {
            return Err(Error::usage(format!("bit count {count} outside [1, 32]")));
        }
        if count < 32 && value >> count != 0 {
            return Err(Error::usage(format!(
                "value {value:#x} does not fit in {count} bits"
            )));
        }
        self.put_bits(value, count);
        Ok(())
    }

    #[inline]
    pub fn write_bit(&mut self, bit: bool) {
        self.put_bits(bit as u32, 1);
    }

    /// Unchecked append used by the codec hot path.
    #[inline]
    pub(crate) fn put_bits(&mut self, value: u32, count: u32) {
        debug_assert!((1..=32).contains(&count));
        debug_assert!(count == 32 || value >> count == 0);
        let mut remaining = count;
        while remaining > 0 {
            let used = (self.bits % 8) as u32;
            if used == 0 {
                self.buf.push(0);
            }
            let free = 8 - used;
            let take = free.min(remaining);
            let shift = remaining - take;
            let chunk = ((value >> shift) & ((1u32 << take) - 1)) as u8;
            // push above guarantees a last byte
            let last = self.buf.last_mut().expect("buffer has a partial byte");
            *last |= chunk << (free - take);
            remaining -= take;
            self.bits += u64::from(take);
        }
    }

    /// Consumes the writer, returning the zero-padded bytes and the exact
    /// number of meaningful bits.
    pub fn finish(self) -> (Vec<u8>, u64) {
        (self.buf, self.bits)
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.buf
    }
}

/// Sequential reader over a byte slice, optionally bounded to fewer bits
/// than the slice holds.
#[derive(Debug, Clone)]
pub struct BitReader<'a> {
    buf: &'a [u8],
    pos: u64,
    limit: u64,
}

impl<'a> BitReader<'a> {
    pub fn new(buf: &'a [u8]) -> Self {
        Self {
            buf,
            pos: 0,
            limit: buf.len() as u64 * 8,
        }
    }

    /// Reader that treats only the first `bits` bits as readable.
    pub fn with_bit_len(buf: &'a [u8], bits: u64) -> Result<Self> {
        if bits > buf.len() as u64 * 8 {
            return Err(Error::truncated(format!(
                "{bits} bits declared but only {} bytes available",
                buf.len()
            )));
        }
        Ok(Self {
            buf,
            pos: 0,
            limit: bits,
        })
    }

    /// Bits consumed so far.
    pub fn position(&self) -> u64 {
        self.pos
    }

    pub fn remaining(&self) -> u64 {
        self.limit - self.pos
    }

    /// Reads the next `count` bits MSB-first.
    pub fn read_bits(&mut self, count: u32) -> Result<u32> {
        if !(1..=32).contains(&count) {
            return Err(Error::usage(format!("bit count {count} outside [1, 32]")));
        }
        if self.remaining() < u64::from(count) {
            return Err(Error::truncated(format!(
                "needed {count} bits at offset {}, {} left",
                self.pos,
                self.remaining()
            )));
        }
        let mut out = 0u32;
        let mut remaining = count;
        while remaining > 0 {
            let byte = self.buf[(self.pos / 8) as usize];
            let used = (self.pos % 8) as u32;
            let avail = 8 - used;
            let take = avail.min(remaining);
            let chunk = (u32::from(byte) >> (avail - take)) & ((1u32 << take) - 1);
            out = (out << take) | chunk;
            remaining -= take;
            self.pos += u64::from(take);
        }
        Ok(out)
    }

    #[inline]
    pub fn read_bit(&mut self) -> Result<bool> {
        Ok(self.read_bits(1)? == 1)
    }
}
