//! Network captures rendered as byte-class images.
//!
//! The pipeline reads classic pcap files ([`pcap`]), cuts the concatenated
//! packet bytes into fixed-size chunks, colors every byte by its ASCII class
//! ([`colormap`]), places the bytes on a Hilbert curve ([`curve`]) and writes
//! one PNG per chunk ([`encoder`]). [`dataset`] turns labeled capture
//! directories into a train/test image set with a line-delimited JSON
//! manifest, and [`eval`] scores classifier predictions against it.

pub mod colormap;
pub mod config;
pub mod curve;
pub mod dataset;
pub mod encoder;
pub mod eval;
pub mod pcap;
pub mod pipeline;

pub use colormap::{classify_byte, color_of, ByteClass, ClassHistogram, ColorScheme, Rgb, Shading};
pub use config::PipelineConfig;
pub use curve::{hilbert_d_to_xy, locality_score, scanline_d_to_xy, CurveLayout, LayoutKind};
pub use dataset::{build_dataset, summarize, DatasetSummary, Label, ManifestEntry, Split};
pub use encoder::{choose_order, encode_chunk, write_png, EncodedImage};
pub use eval::{confusion, consistency_check, metrics, Confusion, MetricsReport, PredictionRecord};
pub use pcap::{chunk_stream, parse_pcap, Chunk, PcapHeader, PcapRecord};
