#![allow(dead_code)]

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use pcapvis::pcap::{write_pcap, ByteOrder, PcapHeader, PcapRecord};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random packets of 1..=max_len bytes each, with a bias toward 0x00/0xFF
/// runs so the black/white classes are well populated.
pub fn random_records(rng: &mut impl Rng, packets: usize, max_len: usize) -> Vec<PcapRecord> {
    (0..packets)
        .map(|i| {
            let len = rng.random_range(1..=max_len);
            let data = (0..len)
                .map(|_| match rng.random_range(0..10) {
                    0 => 0x00,
                    1 => 0xFF,
                    _ => rng.random(),
                })
                .collect();
            PcapRecord::new(1_700_000_000 + i as u32, rng.random_range(0..1_000_000), data)
        })
        .collect()
}

pub fn capture_bytes(order: ByteOrder, records: &[PcapRecord]) -> Vec<u8> {
    let mut buf = Vec::new();
    write_pcap(&mut buf, &PcapHeader::ethernet(order), records).unwrap();
    buf
}

pub fn write_capture(path: &Path, records: &[PcapRecord]) {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).unwrap();
    }
    let f = BufWriter::new(File::create(path).unwrap());
    write_pcap(f, &PcapHeader::ethernet(ByteOrder::Native), records).unwrap();
}

/// A capture whose payload totals exactly `total` bytes.
pub fn records_totalling(rng: &mut impl Rng, total: usize, packet: usize) -> Vec<PcapRecord> {
    let mut out = Vec::new();
    let mut left = total;
    while left > 0 {
        let n = left.min(packet);
        out.push(PcapRecord::new(0, 0, (0..n).map(|_| rng.random()).collect()));
        left -= n;
    }
    out
}
