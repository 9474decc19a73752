//! Labeled image datasets built from directories of captures.
//!
//! Layout of an output directory:
//!
//! ```text
//! <out>/manifest.jsonl           one ManifestEntry per line
//! <out>/summary.json             DatasetSummary
//! <out>/images/<label>/<source_id>__<chunk>__<layout>__o<order>.png
//! ```
//!
//! Every capture under the normal root is labeled `normal`, every capture
//! under the malware root `malware`. A first-level subdirectory of the malware
//! root names the malware family (`malware/botnet/x.pcap` is a botnet sample).

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::fs::{self, File};
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;
use walkdir::WalkDir;

use crate::colormap::ColorScheme;
use crate::config::PipelineConfig;
use crate::encoder::{encode_auto, write_png, EncodeError};
use crate::pcap::{Chunker, PcapError, PcapReader};

pub const MANIFEST_FILE: &str = "manifest.jsonl";
pub const SUMMARY_FILE: &str = "summary.json";
pub const IMAGES_DIR: &str = "images";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Normal,
    Malware,
}

impl Label {
    pub fn name(self) -> &'static str {
        match self {
            Label::Normal => "normal",
            Label::Malware => "malware",
        }
    }

    pub fn other(self) -> Label {
        match self {
            Label::Normal => Label::Malware,
            Label::Malware => Label::Normal,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Label {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "normal" => Ok(Label::Normal),
            "malware" => Ok(Label::Malware),
            _ => Err(format!("unknown label {s:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Split::Train => "train",
            Split::Test => "test",
        })
    }
}

/// One manifest row. Field order here is the on-disk field order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestEntry {
    /// Relative to the manifest's directory, `/`-separated.
    pub image_path: String,
    pub label: Label,
    pub malware_family: Option<String>,
    /// `<label>/<path under the label root>`, `/`-separated.
    pub source_pcap: String,
    pub chunk_index: usize,
    pub split: Split,
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("no pcap files found under {label} root {path}")]
    EmptyCorpus { label: Label, path: PathBuf },
    #[error("no images were produced from the corpus")]
    NoImages,
    #[error("manifest is empty")]
    EmptyManifest,
    #[error("{0} is not a directory")]
    NotADirectory(PathBuf),
    #[error("image path {0} produced by two different sources")]
    DuplicateImagePath(String),
    #[error("manifest line {line}: {source}")]
    ManifestSyntax {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("manifest line {line}: duplicate image_path {path}")]
    DuplicateManifestPath { line: usize, path: String },
    #[error("encoding {path}: {source}")]
    Encode {
        path: String,
        #[source]
        source: EncodeError,
    },
    #[error("walking {path}: {source}")]
    Walk {
        path: PathBuf,
        #[source]
        source: walkdir::Error,
    },
    #[error("thread pool: {0}")]
    ThreadPool(#[from] rayon::ThreadPoolBuildError),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// A capture found under one of the label roots.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceFile {
    pub label: Label,
    pub family: Option<String>,
    /// Label-rooted logical path, e.g. `malware/botnet/mirai.pcap`.
    pub logical: String,
    pub path: PathBuf,
}

impl SourceFile {
    /// Filesystem-safe identity used in image file names.
    pub fn source_id(&self) -> String {
        let rel = self.logical.split_once('/').map_or(self.logical.as_str(), |(_, r)| r);
        rel.chars()
            .map(|c| if c.is_ascii_alphanumeric() || c == '.' || c == '-' { c } else { '_' })
            .collect()
    }
}

fn is_capture(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("pcap") || e.eq_ignore_ascii_case("cap"))
}

/// Sorted capture discovery under one label root.
pub fn discover(root: &Path, label: Label) -> Result<Vec<SourceFile>, DatasetError> {
    if !root.is_dir() {
        return Err(DatasetError::NotADirectory(root.to_owned()));
    }
    let mut out = Vec::new();
    for entry in WalkDir::new(root).follow_links(true).sort_by_file_name() {
        let entry = entry.map_err(|source| DatasetError::Walk {
            path: root.to_owned(),
            source,
        })?;
        if !entry.file_type().is_file() || !is_capture(entry.path()) {
            continue;
        }
        let rel = entry.path().strip_prefix(root).expect("walkdir stays under root");
        let parts: Vec<String> = rel.components().map(|c| c.as_os_str().to_string_lossy().into_owned()).collect();
        let family = match label {
            Label::Malware if parts.len() > 1 => Some(parts[0].to_lowercase()),
            _ => None,
        };
        out.push(SourceFile {
            label,
            family,
            logical: format!("{}/{}", label, parts.join("/")),
            path: entry.path().to_owned(),
        });
    }
    Ok(out)
}

/// Uniform 64-bit key of a split unit under `seed`.
fn split_key(seed: u64, source: &str, chunk: Option<usize>) -> u64 {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(source.as_bytes());
    h.update([0]);
    if let Some(c) = chunk {
        h.update((c as u64).to_le_bytes());
    }
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().unwrap())
}

/// Number of training rows for `total` rows at `train_ratio`.
pub fn train_count(total: usize, train_ratio: f64) -> usize {
    ((total as f64) * train_ratio).round() as usize
}

/// Assigns splits in place. Rows are ranked by a seeded hash of
/// `(source_pcap, chunk_index)`, or of `source_pcap` alone when
/// `by_source`, and the lowest-ranked `round(n * train_ratio)` rows train.
/// The ranking ignores input order, so discovery order cannot move a row.
pub fn assign_splits(entries: &mut [ManifestEntry], seed: u64, train_ratio: f64, by_source: bool) {
    let target = train_count(entries.len(), train_ratio);
    if by_source {
        let mut sizes: BTreeMap<&str, usize> = BTreeMap::new();
        for e in entries.iter() {
            *sizes.entry(e.source_pcap.as_str()).or_default() += 1;
        }
        let mut sources: Vec<(u64, &str, usize)> = sizes
            .into_iter()
            .map(|(s, n)| (split_key(seed, s, None), s, n))
            .collect();
        sources.sort_unstable();
        let mut taken = 0;
        let mut train = BTreeSet::new();
        for (_, s, n) in sources {
            if taken < target {
                train.insert(s.to_owned());
                taken += n;
            }
        }
        for e in entries.iter_mut() {
            e.split = if train.contains(&e.source_pcap) { Split::Train } else { Split::Test };
        }
    } else {
        let mut order: Vec<(u64, usize)> = entries
            .iter()
            .enumerate()
            .map(|(i, e)| (split_key(seed, &e.source_pcap, Some(e.chunk_index)), i))
            .collect();
        order.sort_unstable_by(|a, b| {
            a.0.cmp(&b.0).then_with(|| {
                let (x, y) = (&entries[a.1], &entries[b.1]);
                (&x.source_pcap, x.chunk_index).cmp(&(&y.source_pcap, y.chunk_index))
            })
        });
        for (rank, (_, i)) in order.into_iter().enumerate() {
            entries[i].split = if rank < target { Split::Train } else { Split::Test };
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyShare {
    pub family: String,
    pub count: usize,
    /// Share of malware rows, in percent.
    pub percent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedFile {
    pub source_pcap: String,
    pub error: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LabelSplitCounts {
    pub train: usize,
    pub test: usize,
}

impl LabelSplitCounts {
    pub fn total(&self) -> usize {
        self.train + self.test
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub total: usize,
    pub normal: LabelSplitCounts,
    pub malware: LabelSplitCounts,
    pub train: usize,
    pub test: usize,
    pub train_percent: f64,
    pub test_percent: f64,
    /// Over malware rows only; empty when there are none. Rows without a
    /// family are counted as `unspecified`.
    pub malware_families: Vec<FamilyShare>,
    pub skipped_files: Vec<SkippedFile>,
    /// Captures that parsed but held no packet bytes.
    pub empty_sources: usize,
}

impl DatasetSummary {
    pub fn label(&self, label: Label) -> &LabelSplitCounts {
        match label {
            Label::Normal => &self.normal,
            Label::Malware => &self.malware,
        }
    }

    pub fn render_table(&self) -> String {
        let mut s = String::new();
        let pct = |n: usize| if self.total == 0 { 0.0 } else { 100.0 * n as f64 / self.total as f64 };
        s.push_str(&format!("{:<10} {:>8} {:>8} {:>8} {:>8}\n", "label", "train", "test", "total", "share"));
        for label in [Label::Normal, Label::Malware] {
            let c = self.label(label);
            s.push_str(&format!(
                "{:<10} {:>8} {:>8} {:>8} {:>7.2}%\n",
                label.name(),
                c.train,
                c.test,
                c.total(),
                pct(c.total())
            ));
        }
        s.push_str(&format!(
            "{:<10} {:>8} {:>8} {:>8}\n{:<10} {:>7.2}% {:>7.2}%\n",
            "all", self.train, self.test, self.total, "split", self.train_percent, self.test_percent
        ));
        if !self.malware_families.is_empty() {
            s.push_str("\nmalware family       count  percent\n");
            for f in &self.malware_families {
                s.push_str(&format!("{:<18} {:>7} {:>7.2}%\n", f.family, f.count, f.percent));
            }
        }
        if self.empty_sources > 0 {
            s.push_str(&format!("\n{} capture(s) held no packet bytes\n", self.empty_sources));
        }
        if !self.skipped_files.is_empty() {
            s.push_str(&format!("\n{} file(s) skipped:\n", self.skipped_files.len()));
            for f in &self.skipped_files {
                s.push_str(&format!("  {}: {}\n", f.source_pcap, f.error));
            }
        }
        s
    }
}

pub fn summarize(manifest: &[ManifestEntry]) -> Result<DatasetSummary, DatasetError> {
    if manifest.is_empty() {
        return Err(DatasetError::EmptyManifest);
    }
    let mut normal = LabelSplitCounts::default();
    let mut malware = LabelSplitCounts::default();
    let mut families: BTreeMap<String, usize> = BTreeMap::new();
    for e in manifest {
        let counts = match e.label {
            Label::Normal => &mut normal,
            Label::Malware => {
                let family = e.malware_family.clone().unwrap_or_else(|| "unspecified".into());
                *families.entry(family).or_default() += 1;
                &mut malware
            }
        };
        match e.split {
            Split::Train => counts.train += 1,
            Split::Test => counts.test += 1,
        }
    }
    let total = manifest.len();
    let train = normal.train + malware.train;
    let test = normal.test + malware.test;
    let malware_total = malware.total();
    let mut malware_families: Vec<FamilyShare> = families
        .into_iter()
        .map(|(family, count)| FamilyShare {
            family,
            count,
            percent: 100.0 * count as f64 / malware_total as f64,
        })
        .collect();
    malware_families.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.family.cmp(&b.family)));
    Ok(DatasetSummary {
        total,
        normal,
        malware,
        train,
        test,
        train_percent: 100.0 * train as f64 / total as f64,
        test_percent: 100.0 * test as f64 / total as f64,
        malware_families,
        skipped_files: Vec::new(),
        empty_sources: 0,
    })
}

pub fn write_manifest<W: Write>(mut out: W, manifest: &[ManifestEntry]) -> Result<(), DatasetError> {
    for e in manifest {
        serde_json::to_writer(&mut out, e)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_manifest_from<R: BufRead>(input: R) -> Result<Vec<ManifestEntry>, DatasetError> {
    let mut out = Vec::new();
    let mut seen = HashMap::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let entry: ManifestEntry = serde_json::from_str(&line)
            .map_err(|source| DatasetError::ManifestSyntax { line: i + 1, source })?;
        if seen.insert(entry.image_path.clone(), i + 1).is_some() {
            return Err(DatasetError::DuplicateManifestPath {
                line: i + 1,
                path: entry.image_path,
            });
        }
        out.push(entry);
    }
    Ok(out)
}

pub fn read_manifest(path: impl AsRef<Path>) -> Result<Vec<ManifestEntry>, DatasetError> {
    read_manifest_from(BufReader::new(File::open(path)?))
}

/// What one capture contributed.
enum SourceOutcome {
    Images(Vec<ManifestEntry>),
    Empty,
    Skipped(SkippedFile),
}

fn process_source(
    src: &SourceFile,
    out_dir: &Path,
    config: &PipelineConfig,
    scheme: &ColorScheme,
) -> Result<SourceOutcome, DatasetError> {
    let reader = match PcapReader::open(&src.path) {
        Ok(r) => r,
        Err(e) => return Ok(skip(src, &e)),
    };
    let mut chunker = Chunker::new(&src.source_id(), config.chunk_size);
    let mut chunks = Vec::new();
    for rec in reader {
        match rec {
            Ok(rec) => chunker.push(&rec.data, |c| chunks.push(c)),
            Err(e) => return Ok(skip(src, &e)),
        }
    }
    chunks.extend(chunker.finish());
    if chunks.is_empty() {
        return Ok(SourceOutcome::Empty);
    }
    let image_dir = Path::new(IMAGES_DIR).join(src.label.name());
    fs::create_dir_all(out_dir.join(&image_dir))?;
    let entries = chunks
        .par_iter()
        .map(|chunk| {
            let encode_err = |source| DatasetError::Encode {
                path: src.logical.clone(),
                source,
            };
            let image = encode_auto(chunk, config.layout, config.order, scheme).map_err(encode_err)?;
            let rel = image_dir.join(image.meta.file_name());
            write_png(&image, out_dir.join(&rel)).map_err(encode_err)?;
            Ok(ManifestEntry {
                image_path: rel_string(&rel),
                label: src.label,
                malware_family: src.family.clone(),
                source_pcap: src.logical.clone(),
                chunk_index: chunk.index,
                split: Split::Train,
            })
        })
        .collect::<Result<Vec<_>, DatasetError>>()?;
    Ok(SourceOutcome::Images(entries))
}

fn skip(src: &SourceFile, e: &PcapError) -> SourceOutcome {
    warn!("skipping {}: {e}", src.path.display());
    SourceOutcome::Skipped(SkippedFile {
        source_pcap: src.logical.clone(),
        error: e.to_string(),
    })
}

fn rel_string(p: &Path) -> String {
    p.components()
        .map(|c| c.as_os_str().to_string_lossy())
        .collect::<Vec<_>>()
        .join("/")
}

#[derive(Debug, Clone)]
pub struct BuiltDataset {
    pub manifest: Vec<ManifestEntry>,
    pub summary: DatasetSummary,
}

/// Runs the encode pipeline over both label roots and writes images,
/// `manifest.jsonl` and `summary.json` under `out_dir`. Captures that fail
/// to parse are skipped whole and listed in the summary. PNGs left under
/// `<out_dir>/images` by earlier runs that are not in the new manifest are
/// removed.
pub fn build_dataset(
    normal_dir: &Path,
    malware_dir: &Path,
    out_dir: &Path,
    config: &PipelineConfig,
    scheme: &ColorScheme,
) -> Result<BuiltDataset, DatasetError> {
    let mut sources = Vec::new();
    for (root, label) in [(normal_dir, Label::Normal), (malware_dir, Label::Malware)] {
        let found = discover(root, label)?;
        if found.is_empty() {
            return Err(DatasetError::EmptyCorpus {
                label,
                path: root.to_owned(),
            });
        }
        sources.extend(found);
    }
    let mut ids = HashMap::new();
    for src in &sources {
        let key = (src.label, src.source_id());
        if let Some(prev) = ids.insert(key, &src.logical) {
            return Err(DatasetError::DuplicateImagePath(format!("{prev} and {}", src.logical)));
        }
    }
    fs::create_dir_all(out_dir)?;

    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(jobs) = config.jobs {
        builder = builder.num_threads(jobs);
    }
    let pool = builder.build()?;
    let outcomes = pool.install(|| {
        sources
            .par_iter()
            .map(|src| process_source(src, out_dir, config, scheme))
            .collect::<Result<Vec<_>, _>>()
    })?;

    let mut manifest = Vec::new();
    let mut skipped = Vec::new();
    let mut empty = 0;
    for outcome in outcomes {
        match outcome {
            SourceOutcome::Images(rows) => manifest.extend(rows),
            SourceOutcome::Empty => empty += 1,
            SourceOutcome::Skipped(s) => skipped.push(s),
        }
    }
    if empty > 0 {
        info!("{empty} capture(s) held no packet bytes and produced no images");
    }
    if manifest.is_empty() {
        return Err(DatasetError::NoImages);
    }
    assign_splits(&mut manifest, config.seed, config.train_ratio, config.split_by_source);

    let mut summary = summarize(&manifest)?;
    summary.skipped_files = skipped;
    summary.empty_sources = empty;

    write_manifest(BufWriter::new(File::create(out_dir.join(MANIFEST_FILE))?), &manifest)?;
    let mut f = BufWriter::new(File::create(out_dir.join(SUMMARY_FILE))?);
    serde_json::to_writer_pretty(&mut f, &summary)?;
    f.write_all(b"\n")?;
    f.flush()?;
    prune_stale_images(out_dir, &manifest)?;
    Ok(BuiltDataset { manifest, summary })
}

fn prune_stale_images(out_dir: &Path, manifest: &[ManifestEntry]) -> Result<(), DatasetError> {
    let keep: BTreeSet<&str> = manifest.iter().map(|e| e.image_path.as_str()).collect();
    let images = out_dir.join(IMAGES_DIR);
    for entry in WalkDir::new(&images).sort_by_file_name() {
        let entry = entry.map_err(|source| DatasetError::Walk {
            path: images.clone(),
            source,
        })?;
        let path = entry.path();
        if !entry.file_type().is_file() || !path.extension().is_some_and(|e| e == "png") {
            continue;
        }
        let rel = rel_string(path.strip_prefix(out_dir).expect("under out_dir"));
        if !keep.contains(rel.as_str()) {
            fs::remove_file(path)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entry(source: &str, chunk: usize, label: Label, family: Option<&str>) -> ManifestEntry {
        ManifestEntry {
            image_path: format!("images/{source}__{chunk}.png"),
            label,
            malware_family: family.map(str::to_owned),
            source_pcap: source.to_owned(),
            chunk_index: chunk,
            split: Split::Train,
        }
    }

    #[test]
    fn exact_train_counts() {
        assert_eq!(train_count(1000, 0.8), 800);
        assert_eq!(train_count(10, 0.8), 8);
        assert_eq!(train_count(3, 0.5), 2);
        let mut rows: Vec<_> = (0..1000).map(|i| entry(&format!("normal/{}.pcap", i / 7), i % 7, Label::Normal, None)).collect();
        assign_splits(&mut rows, 1, 0.8, false);
        assert_eq!(rows.iter().filter(|e| e.split == Split::Train).count(), 800);
    }

    #[test]
    fn split_ignores_input_order() {
        let mut a: Vec<_> = (0..200).map(|i| entry(&format!("malware/{}.pcap", i % 13), i, Label::Malware, None)).collect();
        let mut b = a.clone();
        b.reverse();
        assign_splits(&mut a, 9, 0.8, false);
        assign_splits(&mut b, 9, 0.8, false);
        b.reverse();
        assert_eq!(a, b);
        let mut c = a.clone();
        assign_splits(&mut c, 10, 0.8, false);
        assert_ne!(a, c, "seed should matter");
    }

    #[test]
    fn split_by_source_keeps_sources_whole() {
        let mut rows: Vec<_> = (0..300).map(|i| entry(&format!("normal/{}.pcap", i % 30), i, Label::Normal, None)).collect();
        assign_splits(&mut rows, 3, 0.8, true);
        let mut split_of: HashMap<&str, Split> = HashMap::new();
        for e in &rows {
            assert_eq!(*split_of.entry(&e.source_pcap).or_insert(e.split), e.split);
        }
        let train = rows.iter().filter(|e| e.split == Split::Train).count();
        assert!((240..=250).contains(&train), "{train}");
    }

    #[test]
    fn summary_counts() {
        let mut rows: Vec<_> = (0..1000).map(|i| entry("normal/a.pcap", i, Label::Normal, None)).collect();
        assign_splits(&mut rows, 0, 0.8, false);
        let s = summarize(&rows).unwrap();
        assert_eq!((s.train, s.test), (800, 200));
        assert_eq!((s.train_percent, s.test_percent), (80.0, 20.0));
        assert!(s.malware_families.is_empty());
        assert_eq!(s.malware.total(), 0);
        assert!(s.render_table().contains("normal"));
    }

    #[test]
    fn family_percentages() {
        let rows = vec![
            entry("malware/botnet/a.pcap", 0, Label::Malware, Some("botnet")),
            entry("malware/botnet/a.pcap", 1, Label::Malware, Some("botnet")),
            entry("malware/botnet/b.pcap", 0, Label::Malware, Some("botnet")),
            entry("malware/trojan/c.pcap", 0, Label::Malware, Some("trojan")),
            entry("normal/n.pcap", 0, Label::Normal, None),
        ];
        let s = summarize(&rows).unwrap();
        let shares: Vec<_> = s.malware_families.iter().map(|f| (f.family.as_str(), f.count, f.percent)).collect();
        assert_eq!(shares, vec![("botnet", 3, 75.0), ("trojan", 1, 25.0)]);
    }

    #[test]
    fn empty_manifest() {
        assert!(matches!(summarize(&[]), Err(DatasetError::EmptyManifest)));
    }

    #[test]
    fn manifest_line_format() {
        let rows = vec![entry("malware/botnet/a.pcap", 2, Label::Malware, Some("botnet")), entry("normal/n.pcap", 0, Label::Normal, None)];
        let mut buf = Vec::new();
        write_manifest(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(
            text.lines().next().unwrap(),
            r#"{"image_path":"images/malware/botnet/a.pcap__2.png","label":"malware","malware_family":"botnet","source_pcap":"malware/botnet/a.pcap","chunk_index":2,"split":"train"}"#
        );
        assert!(text.lines().nth(1).unwrap().contains(r#""malware_family":null"#));
        assert_eq!(read_manifest_from(&buf[..]).unwrap(), rows);
    }

    #[test]
    fn manifest_rejects_duplicates_and_garbage() {
        let rows = vec![entry("normal/n.pcap", 0, Label::Normal, None); 2];
        let mut buf = Vec::new();
        write_manifest(&mut buf, &rows).unwrap();
        assert!(matches!(read_manifest_from(&buf[..]), Err(DatasetError::DuplicateManifestPath { line: 2, .. })));
        assert!(matches!(read_manifest_from(&b"{nope\n"[..]), Err(DatasetError::ManifestSyntax { line: 1, .. })));
    }

    #[test]
    fn source_ids_are_filesystem_safe() {
        let src = SourceFile {
            label: Label::Malware,
            family: Some("botnet".into()),
            logical: "malware/botnet/mirai sample.pcap".into(),
            path: PathBuf::new(),
        };
        assert_eq!(src.source_id(), "botnet_mirai_sample.pcap");
    }
}
