//! Chunk to RGB image encoding and PNG output.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Seek, Write};
use std::path::Path;

use thiserror::Error;

use crate::colormap::{ColorScheme, Rgb};
use crate::curve::{CurveError, CurveLayout, LayoutKind};
use crate::pcap::Chunk;

/// Largest order the encoder picks on its own (256x256, 65536 bytes).
pub const MAX_AUTO_ORDER: u32 = 8;
pub const MAX_AUTO_CAPACITY: usize = 1 << (2 * MAX_AUTO_ORDER);

/// Deflate level used for every PNG written. Changing it changes every golden file.
pub const PNG_DEFLATE_LEVEL: u8 = 6;

#[derive(Debug, Error)]
pub enum EncodeError {
    #[error("{len} bytes exceed the largest automatic grid ({MAX_AUTO_CAPACITY} bytes)")]
    Oversize { len: usize },
    #[error("chunk of {len} bytes does not fit layout capacity {capacity}")]
    ChunkTooLarge { len: usize, capacity: u64 },
    #[error("cannot encode an empty chunk")]
    EmptyChunk,
    #[error(transparent)]
    Layout(#[from] CurveError),
    #[error("png encoding failed: {0}")]
    Png(#[from] png::EncodingError),
    #[error("png decoding failed: {0}")]
    PngDecode(#[from] png::DecodingError),
    #[error("unsupported png: {0}")]
    UnsupportedPng(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Smallest `k` with `4^k >= data_len`, at least 1 and at most [`MAX_AUTO_ORDER`].
pub fn choose_order(data_len: usize) -> Result<u32, EncodeError> {
    if data_len > MAX_AUTO_CAPACITY {
        return Err(EncodeError::Oversize { len: data_len });
    }
    let mut order = 1;
    while (1usize << (2 * order)) < data_len {
        order += 1;
    }
    Ok(order)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageMeta {
    pub source_id: String,
    pub chunk_index: usize,
    pub layout: LayoutKind,
    /// `None` only for non-square scanline layouts.
    pub order: Option<u32>,
    pub scheme_digest: String,
}

impl ImageMeta {
    pub fn layout_tag(&self) -> String {
        match self.order {
            Some(o) => format!("{}-o{o}", self.layout),
            None => self.layout.to_string(),
        }
    }

    /// `<source_id>__<chunk_index>__<layout>__o<order>.png`
    pub fn file_name(&self) -> String {
        format!(
            "{}__{}__{}__o{}.png",
            self.source_id,
            self.chunk_index,
            self.layout,
            self.order.unwrap_or(0)
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodedImage {
    pub width: u32,
    pub height: u32,
    /// Row-major RGB.
    pub pixels: Vec<Rgb>,
    pub meta: ImageMeta,
}

impl EncodedImage {
    pub fn pixel(&self, x: u32, y: u32) -> Rgb {
        self.pixels[y as usize * self.width as usize + x as usize]
    }

    pub fn raw_rgb(&self) -> Vec<u8> {
        self.pixels.iter().flat_map(|p| p.0).collect()
    }
}

/// Lays `chunk` out along `layout` and colors it with `scheme`. Cells past the
/// end of the chunk get the padding color.
pub fn encode_chunk(
    chunk: &Chunk,
    layout: &CurveLayout,
    scheme: &ColorScheme,
) -> Result<EncodedImage, EncodeError> {
    if chunk.is_empty() {
        return Err(EncodeError::EmptyChunk);
    }
    let capacity = layout.capacity();
    if chunk.len() as u64 > capacity {
        return Err(EncodeError::ChunkTooLarge {
            len: chunk.len(),
            capacity,
        });
    }
    let lut = scheme.table();
    let table = layout.table();
    let mut pixels = vec![scheme.padding_color(); capacity as usize];
    for (d, &b) in chunk.bytes.iter().enumerate() {
        pixels[table.pixel_index(d)] = lut[b as usize];
    }
    Ok(EncodedImage {
        width: layout.width(),
        height: layout.height(),
        pixels,
        meta: ImageMeta {
            source_id: chunk.source_id.clone(),
            chunk_index: chunk.index,
            layout: layout.kind(),
            order: layout.order(),
            scheme_digest: scheme.digest(),
        },
    })
}

/// Encodes with a square layout of `kind`, picking the order from the chunk
/// length unless `order` is given.
pub fn encode_auto(
    chunk: &Chunk,
    kind: LayoutKind,
    order: Option<u32>,
    scheme: &ColorScheme,
) -> Result<EncodedImage, EncodeError> {
    let order = match order {
        Some(o) => o,
        None => choose_order(chunk.len())?,
    };
    encode_chunk(chunk, &CurveLayout::square(kind, order)?, scheme)
}

/// 8-bit RGB PNG with `source`, `chunk`, `layout` and `scheme` tEXt chunks.
/// Filter and deflate level are fixed so equal images give equal files.
pub fn write_png_to<W: Write>(image: &EncodedImage, out: W) -> Result<(), EncodeError> {
    let mut enc = png::Encoder::new(out, image.width, image.height);
    enc.set_color(png::ColorType::Rgb);
    enc.set_depth(png::BitDepth::Eight);
    enc.set_deflate_compression(png::DeflateCompression::Level(PNG_DEFLATE_LEVEL));
    enc.set_filter(png::Filter::Paeth);
    let meta = &image.meta;
    enc.add_text_chunk("source".into(), meta.source_id.clone())?;
    enc.add_text_chunk("chunk".into(), meta.chunk_index.to_string())?;
    enc.add_text_chunk("layout".into(), meta.layout_tag())?;
    enc.add_text_chunk("scheme".into(), meta.scheme_digest.clone())?;
    let mut writer = enc.write_header()?;
    writer.write_image_data(&image.raw_rgb())?;
    writer.finish()?;
    Ok(())
}

pub fn write_png(image: &EncodedImage, path: impl AsRef<Path>) -> Result<(), EncodeError> {
    let mut file = BufWriter::new(File::create(path)?);
    write_png_to(image, &mut file)?;
    file.flush()?;
    Ok(())
}

/// A decoded RGB PNG and its tEXt chunks, in file order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodedPng {
    pub width: u32,
    pub height: u32,
    pub pixels: Vec<Rgb>,
    pub text: Vec<(String, String)>,
}

impl DecodedPng {
    pub fn text(&self, key: &str) -> Option<&str> {
        self.text.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

pub fn read_png_from<R: BufRead + Seek>(input: R) -> Result<DecodedPng, EncodeError> {
    let decoder = png::Decoder::new(input);
    let mut reader = decoder.read_info()?;
    let info = reader.info();
    if info.color_type != png::ColorType::Rgb || info.bit_depth != png::BitDepth::Eight {
        return Err(EncodeError::UnsupportedPng(format!(
            "{:?} {:?}",
            info.color_type, info.bit_depth
        )));
    }
    let (width, height) = (info.width, info.height);
    let mut buf = vec![0; reader.output_buffer_size().expect("rgb8 buffer size fits in memory")];
    let frame = reader.next_frame(&mut buf)?;
    buf.truncate(frame.buffer_size());
    reader.finish()?;
    let text = reader
        .info()
        .uncompressed_latin1_text
        .iter()
        .map(|t| (t.keyword.clone(), t.text.clone()))
        .collect();
    let pixels = buf.chunks_exact(3).map(|p| Rgb([p[0], p[1], p[2]])).collect();
    Ok(DecodedPng {
        width,
        height,
        pixels,
        text,
    })
}

pub fn read_png(path: impl AsRef<Path>) -> Result<DecodedPng, EncodeError> {
    read_png_from(BufReader::new(File::open(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::colormap::Shading;

    fn chunk(bytes: &[u8]) -> Chunk {
        Chunk {
            source_id: "fixture".into(),
            index: 0,
            offset: 0,
            bytes: bytes.to_vec(),
        }
    }

    #[test]
    fn order_choice() {
        assert_eq!(choose_order(65536).unwrap(), 8);
        assert_eq!(choose_order(4096).unwrap(), 6);
        assert_eq!(choose_order(4097).unwrap(), 7);
        assert_eq!(choose_order(1).unwrap(), 1);
        assert_eq!(choose_order(4).unwrap(), 1);
        assert_eq!(choose_order(5).unwrap(), 2);
        assert!(matches!(choose_order(65537), Err(EncodeError::Oversize { len: 65537 })));
    }

    #[test]
    fn two_by_two_example() {
        let scheme = ColorScheme::default();
        let img = encode_chunk(
            &chunk(&[0x00, 0xFF, 0x41, 0x9C]),
            &CurveLayout::hilbert(1).unwrap(),
            &scheme,
        )
        .unwrap();
        assert_eq!((img.width, img.height), (2, 2));
        assert_eq!(img.pixel(0, 0), Rgb::BLACK);
        assert_eq!(img.pixel(0, 1), Rgb::WHITE);
        // 0x41: 64 + round(191 * 33 / 94) = 64 + 67 = 131
        assert_eq!(img.pixel(1, 1), Rgb([0, 0, 131]));
        // 0x9C: 64 + round(191 * 28 / 126) = 64 + 42 = 106
        assert_eq!(img.pixel(1, 0), Rgb([106, 0, 0]));
    }

    #[test]
    fn padding_fills_tail() {
        let img = encode_chunk(
            &chunk(&[0, 0, 0]),
            &CurveLayout::hilbert(1).unwrap(),
            &ColorScheme::default(),
        )
        .unwrap();
        assert_eq!(img.pixel(0, 0), Rgb::BLACK);
        assert_eq!(img.pixel(0, 1), Rgb::BLACK);
        assert_eq!(img.pixel(1, 1), Rgb::BLACK);
        assert_eq!(img.pixel(1, 0), Rgb::GRAY);
    }

    #[test]
    fn rejects_empty_and_oversize() {
        let scheme = ColorScheme::default();
        let layout = CurveLayout::hilbert(1).unwrap();
        assert!(matches!(encode_chunk(&chunk(&[]), &layout, &scheme), Err(EncodeError::EmptyChunk)));
        assert!(matches!(
            encode_chunk(&chunk(&[1; 5]), &layout, &scheme),
            Err(EncodeError::ChunkTooLarge { len: 5, capacity: 4 })
        ));
        assert!(matches!(
            encode_auto(&chunk(&[1; 70_000]), LayoutKind::Hilbert, None, &scheme),
            Err(EncodeError::Oversize { .. })
        ));
    }

    #[test]
    fn auto_order_and_file_name() {
        let img = encode_auto(&chunk(&[7; 300]), LayoutKind::Hilbert, None, &ColorScheme::default()).unwrap();
        assert_eq!(img.width, 32);
        assert_eq!(img.meta.file_name(), "fixture__0__hilbert__o5.png");
        assert_eq!(img.meta.layout_tag(), "hilbert-o5");
    }

    #[test]
    fn png_round_trip_with_text() {
        let img = encode_auto(
            &chunk(&(0..=255u8).cycle().take(1000).collect::<Vec<_>>()),
            LayoutKind::Hilbert,
            None,
            &ColorScheme::binvis(Shading::Flat),
        )
        .unwrap();
        let mut buf = Vec::new();
        write_png_to(&img, &mut buf).unwrap();
        let mut again = Vec::new();
        write_png_to(&img, &mut again).unwrap();
        assert_eq!(buf, again);

        let decoded = read_png_from(io::Cursor::new(&buf[..])).unwrap();
        assert_eq!((decoded.width, decoded.height), (32, 32));
        assert_eq!(decoded.pixels, img.pixels);
        assert_eq!(decoded.text("source"), Some("fixture"));
        assert_eq!(decoded.text("chunk"), Some("0"));
        assert_eq!(decoded.text("layout"), Some("hilbert-o5"));
        assert_eq!(decoded.text("scheme"), Some(img.meta.scheme_digest.as_str()));
    }

    #[test]
    fn independent_decoder_agrees() {
        let img = encode_chunk(
            &chunk(&[0x00, 0xFF, 0x41, 0x9C]),
            &CurveLayout::hilbert(1).unwrap(),
            &ColorScheme::default(),
        )
        .unwrap();
        let mut buf = Vec::new();
        write_png_to(&img, &mut buf).unwrap();
        let decoded = image::load_from_memory_with_format(&buf, image::ImageFormat::Png)
            .unwrap()
            .to_rgb8();
        assert_eq!(decoded.dimensions(), (2, 2));
        assert_eq!(decoded.get_pixel(0, 0).0, [0, 0, 0]);
        assert_eq!(decoded.get_pixel(0, 1).0, [255, 255, 255]);
        assert_eq!(decoded.get_pixel(1, 1).0, [0, 0, 131]);
        assert_eq!(decoded.get_pixel(1, 0).0, [106, 0, 0]);
    }
}
