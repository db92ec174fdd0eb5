//! Junk-value splicing. This hides the stream from a casual reader; it is
//! not encryption.
//!
//! cargo run --example obfuscation

use lcp::obfuscate::{decode_obfuscated, encode_obfuscated, splice};
use lcp::{encode_sequence, BitReader, BitWriter};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> lcp::Result<()> {
    let values: Vec<i16> = vec![23, 25, 47, 48, 3074, 3075, 3076, 3076];

    let mut plain = BitWriter::new();
    let plain_bits = encode_sequence(&values, &mut plain)?;

    for seed in [1u64, 2] {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut w = BitWriter::new();
        let (bits, plan) = encode_obfuscated(&values, 3, &mut rng, &mut w)?;
        println!(
            "seed {seed}: indices {:?} junk {:?}",
            plan.indices(),
            plan.junk()
        );
        println!("  spliced {:?}", splice(&values, &plan));
        println!("  {bits} bits (plain {plain_bits})");

        let (bytes, n) = w.finish();
        let mut r = BitReader::with_bit_len(&bytes, n)?;
        assert_eq!(decode_obfuscated(&mut r, values.len())?, values);
    }
    Ok(())
}
