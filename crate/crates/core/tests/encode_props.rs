mod common;

use std::collections::BTreeMap;

use pcapvis::colormap::{ColorScheme, Rgb, Shading};
use pcapvis::curve::{CurveLayout, LayoutKind};
use pcapvis::encoder::{encode_chunk, read_png, write_png};
use pcapvis::pcap::Chunk;
use proptest::prelude::*;
use rand::Rng;

fn chunk_of(bytes: Vec<u8>) -> Chunk {
    Chunk { source_id: "prop".into(), index: 3, offset: 0, bytes }
}

fn histogram(pixels: &[Rgb], skip: Rgb) -> BTreeMap<Rgb, usize> {
    let mut h = BTreeMap::new();
    for &p in pixels.iter().filter(|&&p| p != skip) {
        *h.entry(p).or_default() += 1;
    }
    h
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn accounting_and_permutation(seed in any::<u64>(), order in 1u32..=8, fill in 0.0f64..=1.0, flat in any::<bool>()) {
        let mut rng = common::rng(seed);
        let cap = 1usize << (2 * order);
        let len = ((cap as f64 * fill) as usize).clamp(1, cap);
        let bytes: Vec<u8> = (0..len).map(|_| match rng.random_range(0..4) { 0 => 0, 1 => 0xFF, _ => rng.random() }).collect();
        let scheme = ColorScheme::binvis(if flat { Shading::Flat } else { Shading::ValueScaled });
        let chunk = chunk_of(bytes.clone());

        let hil = encode_chunk(&chunk, &CurveLayout::square(LayoutKind::Hilbert, order).unwrap(), &scheme).unwrap();
        let scan = encode_chunk(&chunk, &CurveLayout::square(LayoutKind::Scanline, order).unwrap(), &scheme).unwrap();
        let pad = scheme.padding_color();

        prop_assert_eq!(hil.pixels.len(), cap);
        prop_assert_eq!(hil.pixels.iter().filter(|&&p| p != pad).count(), len);
        prop_assert_eq!(histogram(&hil.pixels, pad), histogram(&scan.pixels, pad));

        let bw_pixels = hil.pixels.iter().filter(|&&p| p == Rgb::BLACK || p == Rgb::WHITE).count();
        let bw_bytes = bytes.iter().filter(|&&b| b == 0 || b == 0xFF).count();
        prop_assert_eq!(bw_pixels, bw_bytes);
    }
}

#[test]
fn scanline_places_bytes_row_major() {
    let scheme = ColorScheme::default();
    let bytes: Vec<u8> = (0..16).collect();
    let img = encode_chunk(&chunk_of(bytes.clone()), &CurveLayout::scanline(4, 4).unwrap(), &scheme).unwrap();
    for (d, &b) in bytes.iter().enumerate() {
        assert_eq!(img.pixel(d as u32 % 4, d as u32 / 4), scheme.color_of(b));
    }
}

#[test]
fn png_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = common::rng(11);
    let bytes: Vec<u8> = (0..40_000).map(|_| rng.random()).collect();
    let img = encode_chunk(&chunk_of(bytes), &CurveLayout::hilbert(8).unwrap(), &ColorScheme::default()).unwrap();
    let (a, b) = (dir.path().join("a.png"), dir.path().join("b.png"));
    write_png(&img, &a).unwrap();
    write_png(&img, &b).unwrap();
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let back = read_png(&a).unwrap();
    assert_eq!((back.width, back.height), (256, 256));
    assert_eq!(back.pixels, img.pixels);
    assert_eq!(back.text("chunk"), Some("3"));
}
