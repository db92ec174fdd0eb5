//! Precision-aware XOR-delta compression for high-rate household load
//! measurements.
//!
//! Measurements are quantized to 16-bit fixed point per channel
//! ([`quantize`]), coded with a variable-length XOR-delta grammar
//! ([`codec`]), optionally interleaved with junk values
//! ([`obfuscate`]) and packed into a multi-channel file that stores a
//! single timestamp ([`container`]). [`csvio`], [`synth`] and [`bench`]
//! cover ingestion, test data and measurement.

pub mod bench;
pub mod bitstream;
pub mod cli;
pub mod codec;
pub mod container;
pub mod csvio;
pub mod error;
pub mod obfuscate;
pub mod quantize;
pub mod synth;

pub use bitstream::{BitReader, BitWriter};
pub use codec::{decode_sequence, encode_sequence, ClassHistogram, ControlClass};
pub use container::{read_container, write_container, Channel, ContainerHeader, WriteOptions};
pub use error::{Error, Result};
pub use quantize::{ChannelSpec, QuantizedValue, RangeMode};
