//! Whole-capture operations behind the `encode` and `inspect` commands.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::colormap::{ByteClass, ClassHistogram, ColorScheme};
use crate::config::PipelineConfig;
use crate::encoder::{encode_auto, write_png, EncodeError};
use crate::pcap::{Chunker, PcapError, PcapReader};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("{path}: {source}")]
    Pcap {
        path: PathBuf,
        #[source]
        source: PcapError,
    },
    #[error("{path}: {source}")]
    Encode {
        path: PathBuf,
        #[source]
        source: EncodeError,
    },
    #[error("thread pool: {0}")]
    ThreadPool(#[from] rayon::ThreadPoolBuildError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// File stem with anything outside `[A-Za-z0-9._-]` replaced by `_`.
pub fn source_id_for(path: &Path) -> String {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "capture".into());
    stem.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '.' || c == '-' { c } else { '_' })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct EncodeReport {
    pub source: String,
    pub packets: u64,
    pub payload_bytes: u64,
    pub images: Vec<PathBuf>,
}

/// Chunks one capture and writes a PNG per chunk into `out_dir`.
pub fn encode_capture(
    pcap: &Path,
    out_dir: &Path,
    config: &PipelineConfig,
    scheme: &ColorScheme,
) -> Result<EncodeReport, PipelineError> {
    let pcap_err = |source| PipelineError::Pcap {
        path: pcap.to_owned(),
        source,
    };
    let reader = PcapReader::open(pcap).map_err(pcap_err)?;
    let source_id = source_id_for(pcap);
    let mut chunker = Chunker::new(&source_id, config.chunk_size);
    let mut chunks = Vec::new();
    let (mut packets, mut payload) = (0u64, 0u64);
    for rec in reader {
        let rec = rec.map_err(pcap_err)?;
        packets += 1;
        payload += rec.data.len() as u64;
        chunker.push(&rec.data, |c| chunks.push(c));
    }
    chunks.extend(chunker.finish());
    fs::create_dir_all(out_dir)?;

    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(jobs) = config.jobs {
        builder = builder.num_threads(jobs);
    }
    let images = builder.build()?.install(|| {
        chunks
            .par_iter()
            .map(|chunk| {
                let encode_err = |source| PipelineError::Encode {
                    path: pcap.to_owned(),
                    source,
                };
                let image = encode_auto(chunk, config.layout, config.order, scheme).map_err(encode_err)?;
                let path = out_dir.join(image.meta.file_name());
                write_png(&image, &path).map_err(encode_err)?;
                Ok(path)
            })
            .collect::<Result<Vec<_>, PipelineError>>()
    })?;
    Ok(EncodeReport {
        source: source_id,
        packets,
        payload_bytes: payload,
        images,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct InspectReport {
    pub packets: u64,
    pub bytes: u64,
    pub counts: ClassHistogram,
    pub fractions: Vec<(ByteClass, f64)>,
    /// Share of non-padding pixels that will render black or white.
    pub black_white_fraction: Option<f64>,
}

impl InspectReport {
    pub fn render(&self) -> String {
        let mut s = format!("{} packets, {} bytes\n", self.packets, self.bytes);
        for class in ByteClass::ALL {
            let frac = self
                .fractions
                .iter()
                .find(|(c, _)| *c == class)
                .map_or(0.0, |(_, f)| *f);
            s.push_str(&format!(
                "  {:<10} {:>12} {:>8.4}\n",
                class.name(),
                self.counts.get(class),
                frac
            ));
        }
        match self.black_white_fraction {
            Some(f) => s.push_str(&format!("black+white fraction {f:.4}\n")),
            None => s.push_str("black+white fraction undefined (no bytes)\n"),
        }
        s
    }
}

pub fn inspect_capture(pcap: &Path) -> Result<InspectReport, PipelineError> {
    let pcap_err = |source| PipelineError::Pcap {
        path: pcap.to_owned(),
        source,
    };
    let mut counts = ClassHistogram::default();
    let mut packets = 0;
    for rec in PcapReader::open(pcap).map_err(pcap_err)? {
        counts.add(&rec.map_err(pcap_err)?.data);
        packets += 1;
    }
    let fractions = ByteClass::ALL
        .iter()
        .filter_map(|&c| counts.fraction(c).map(|f| (c, f)))
        .collect();
    Ok(InspectReport {
        packets,
        bytes: counts.total(),
        counts,
        fractions,
        black_white_fraction: counts.black_white_fraction(),
    })
}
