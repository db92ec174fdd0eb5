use lcp::container::{encode_container, read_container};
use lcp::csvio::{emit_csv, parse_csv, CsvConfig};
use lcp::{Channel, ChannelSpec, RangeMode, WriteOptions};
use proptest::prelude::*;

fn channels_strategy() -> impl Strategy<Value = Vec<Channel>> {
    (1usize..5, 1usize..300).prop_flat_map(|(n_channels, len)| {
        prop::collection::vec(
            (
                prop::collection::vec(any::<i16>(), len),
                0u8..=4,
                any::<bool>(),
                "[A-Za-z]{1,8}",
            ),
            n_channels,
        )
        .prop_map(|chs| {
            chs.into_iter()
                .map(|(values, dp, lca, name)| Channel {
                    spec: ChannelSpec::new(name, dp, lca).unwrap(),
                    values: if lca {
                        values.into_iter().map(lcp::quantize::lca_round).collect()
                    } else {
                        values
                    },
                })
                .collect()
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn container_roundtrip(
        chans in channels_strategy(),
        rate in 1u32..1_000_000,
        t0 in 0u64..4_000_000_000_000_000,
        obfuscate in any::<u8>(),
        seed in any::<u64>(),
    ) {
        let opts = WriteOptions { sample_rate_mhz: rate, t0_us: t0, obfuscate, seed };
        let enc = encode_container(&chans, &opts).unwrap();
        let header_and_payloads = enc.header.encoded_len() as u64 + enc.header.payload_bytes();
        prop_assert_eq!(enc.bytes.len() as u64, header_and_payloads);
        let dec = read_container(&enc.bytes).unwrap();
        prop_assert_eq!(&dec.header, &enc.header);
        for (d, c) in dec.channels.iter().zip(&chans) {
            prop_assert_eq!(d, &c.values);
        }
        for (m, c) in dec.header.channels.iter().zip(&chans) {
            prop_assert_eq!(&m.spec(), &c.spec);
        }
    }

    /// emit then parse returns the same quantized values and timestamps.
    #[test]
    fn csv_emit_parse(
        values in prop::collection::vec((any::<i16>(), any::<i16>(), any::<i16>(), any::<i16>()), 2..200),
        t0_cs in 0u64..200_000_000_000,
    ) {
        let specs = ChannelSpec::household_defaults(false);
        let cols: [Vec<i16>; 4] = [
            values.iter().map(|v| v.0).collect(),
            values.iter().map(|v| v.1).collect(),
            values.iter().map(|v| v.2).collect(),
            values.iter().map(|v| v.3).collect(),
        ];
        let chans: Vec<Channel> = specs
            .into_iter()
            .zip(cols)
            .map(|(spec, values)| Channel { spec, values })
            .collect();
        let opts = WriteOptions { sample_rate_mhz: 50_000, t0_us: t0_cs * 10_000, ..WriteOptions::default() };
        let enc = encode_container(&chans, &opts).unwrap();
        let seqs: Vec<Vec<i16>> = chans.iter().map(|c| c.values.clone()).collect();
        let mut text = Vec::new();
        emit_csv(&enc.header, &seqs, b',', &mut text).unwrap();
        let parsed = parse_csv(text.as_slice(), &CsvConfig::default()).unwrap();
        prop_assert_eq!(parsed.t0_us, opts.t0_us);
        prop_assert_eq!(parsed.sample_rate_mhz, 50_000);
        prop_assert_eq!(parsed.spacing_warnings, 0);
        let back = parsed.quantize(RangeMode::Strict).unwrap();
        for (b, c) in back.iter().zip(&chans) {
            prop_assert_eq!(&b.values, &c.values);
        }
    }
}
