mod common;

use pcapvis::pcap::{chunk_stream, parse_pcap, ByteOrder, PcapError, GLOBAL_HEADER_LEN, RECORD_HEADER_LEN};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn both_byte_orders_reconstruct_payload(seed in any::<u64>(), packets in 1usize..300, chunk_size in 1usize..5000) {
        let mut rng = common::rng(seed);
        let records = common::random_records(&mut rng, packets, 1500);
        let flat: Vec<u8> = records.iter().flat_map(|r| r.data.iter().copied()).collect();

        let (_, le) = parse_pcap(&common::capture_bytes(ByteOrder::Native, &records)[..]).unwrap();
        let (_, be) = parse_pcap(&common::capture_bytes(ByteOrder::Swapped, &records)[..]).unwrap();
        prop_assert_eq!(&le, &records);
        prop_assert_eq!(&be, &records);

        let chunks = chunk_stream("p", &le, chunk_size);
        let joined: Vec<u8> = chunks.iter().flat_map(|c| c.bytes.iter().copied()).collect();
        prop_assert_eq!(&joined, &flat);
        prop_assert_eq!(chunks.len(), flat.len().div_ceil(chunk_size));
        for (i, c) in chunks.iter().enumerate() {
            prop_assert_eq!(c.index, i);
            prop_assert_eq!(c.offset, (i * chunk_size) as u64);
            if i + 1 < chunks.len() {
                prop_assert_eq!(c.len(), chunk_size);
            } else {
                prop_assert!(!c.is_empty() && c.len() <= chunk_size);
            }
        }
    }
}

#[test]
fn every_truncation_point_is_classified() {
    let mut rng = common::rng(5);
    let records = common::random_records(&mut rng, 6, 40);
    let bytes = common::capture_bytes(ByteOrder::Swapped, &records);
    let mut boundaries = vec![GLOBAL_HEADER_LEN];
    for r in &records {
        boundaries.push(boundaries.last().unwrap() + RECORD_HEADER_LEN + r.data.len());
    }
    for cut in 0..bytes.len() {
        let result = parse_pcap(&bytes[..cut]);
        match boundaries.iter().position(|&b| b == cut) {
            Some(n) => assert_eq!(result.unwrap().1, records[..n], "cut {cut}"),
            None => assert!(matches!(result, Err(PcapError::Truncated { .. })), "cut {cut}: {result:?}"),
        }
    }
}
