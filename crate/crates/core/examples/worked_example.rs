//! Encodes the eight-sample power trace by hand and prints each codeword.
//!
//! cargo run --example worked_example

use lcp::codec::{encode_next, XorWindow};
use lcp::{decode_sequence, BitReader, BitWriter};

fn main() -> lcp::Result<()> {
    let values: [i16; 8] = [23, 25, 47, 48, 3074, 3075, 3076, 3076];

    let mut w = BitWriter::new();
    w.write_bits(values[0] as u16 as u32, 16)?;
    println!(
        "{:>5}  {:<5} {:>3} bits  {:016b}",
        values[0], "raw", 16, values[0] as u16
    );

    let mut win = XorWindow::start(values[0]);
    let mut prev = values[0];
    for &v in &values[1..] {
        let before = w.bit_len();
        let class = encode_next(&mut win, v, &mut w);
        let bits = w.bit_len() - before;
        let xor = (prev ^ v) as u16;
        println!(
            "{v:>5}  {:<5} {bits:>3} bits  xor={xor:016b}",
            class.label()
        );
        prev = v;
    }

    let total = w.bit_len();
    let (bytes, bits) = w.finish();
    println!(
        "total {total} bits in {} bytes, {:.3} bits/value",
        bytes.len(),
        total as f64 / 8.0
    );

    let mut r = BitReader::with_bit_len(&bytes, bits)?;
    let back = decode_sequence(&mut r, values.len())?;
    assert_eq!(back, values);
    println!("decoded: {back:?}");
    Ok(())
}
