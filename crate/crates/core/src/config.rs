use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::colormap::{ColorScheme, SchemeError, Shading};
use crate::curve::{LayoutKind, MAX_HILBERT_ORDER};
use crate::encoder::MAX_AUTO_CAPACITY;

pub const DEFAULT_CHUNK_SIZE: usize = 65536;
pub const DEFAULT_TRAIN_RATIO: f64 = 0.8;
pub const DEFAULT_SEED: u64 = 0x5EED;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("train_ratio must be strictly between 0 and 1, got {0}")]
    TrainRatio(f64),
    #[error("chunk_size must be at least 1")]
    ZeroChunk,
    #[error("chunk_size {chunk_size} exceeds the {capacity}-byte capacity of {what}")]
    ChunkTooLarge {
        chunk_size: usize,
        capacity: u64,
        what: String,
    },
    #[error("order must be in 1..={MAX_HILBERT_ORDER}, got {0}")]
    Order(u32),
    #[error("jobs must be at least 1")]
    ZeroJobs,
}

/// Effective settings of one run. Serialized verbatim as `run-config.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub chunk_size: usize,
    pub layout: LayoutKind,
    /// Fixed curve order; `None` picks the smallest grid that fits each chunk.
    pub order: Option<u32>,
    pub shading: Shading,
    /// Optional key-value palette file overriding the default hues.
    pub scheme_file: Option<PathBuf>,
    pub seed: u64,
    pub train_ratio: f64,
    pub split_by_source: bool,
    pub output_dir: Option<PathBuf>,
    /// Worker threads; `None` uses the available parallelism.
    pub jobs: Option<usize>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            chunk_size: DEFAULT_CHUNK_SIZE,
            layout: LayoutKind::Hilbert,
            order: None,
            shading: Shading::ValueScaled,
            scheme_file: None,
            seed: DEFAULT_SEED,
            train_ratio: DEFAULT_TRAIN_RATIO,
            split_by_source: false,
            output_dir: None,
            jobs: None,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.train_ratio > 0.0 && self.train_ratio < 1.0) {
            return Err(ConfigError::TrainRatio(self.train_ratio));
        }
        if self.chunk_size == 0 {
            return Err(ConfigError::ZeroChunk);
        }
        if self.jobs == Some(0) {
            return Err(ConfigError::ZeroJobs);
        }
        let (capacity, what) = match self.order {
            Some(o) if !(1..=MAX_HILBERT_ORDER).contains(&o) => return Err(ConfigError::Order(o)),
            Some(o) => (1u64 << (2 * o), format!("an order-{o} grid")),
            None => (MAX_AUTO_CAPACITY as u64, "the automatic order cap".to_owned()),
        };
        if self.chunk_size as u64 > capacity {
            return Err(ConfigError::ChunkTooLarge {
                chunk_size: self.chunk_size,
                capacity,
                what,
            });
        }
        Ok(())
    }

    /// Palette with this config's shading; hues from `base` when given.
    pub fn scheme_with(&self, base: Option<ColorScheme>) -> Result<ColorScheme, SchemeError> {
        match base {
            Some(s) => s.with_shading(self.shading),
            None => Ok(ColorScheme::binvis(self.shading)),
        }
    }
}
