//! Corpus ingestion and preprocessing.
//!
//! Heterogeneous sources (raw HTTP request files, payload CSVs, JSONL)
//! normalize into a single labeled-record stream which then flows through
//! clean → balance → merge → split. Every randomized step is reproducible
//! from its seed; no step ever fabricates records.

use std::collections::HashSet;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

use crate::class::AttackClass;
use crate::http::{inspection_payload, parse_raw_request, HttpRequest, InspectionConfig};

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path} contains no records")]
    EmptyFile { path: String },
    #[error("column {column:?} missing from {path}")]
    MissingColumn { column: String, path: String },
    #[error("row {row} of {path} has label {label:?} absent from the label mapping")]
    UnmappedLabel { label: String, path: String, row: usize },
    #[error("{path}:{line}: {message}")]
    SchemaViolation {
        path: String,
        line: usize,
        message: String,
    },
    #[error("csv error in {path}: {source}")]
    Csv {
        path: String,
        #[source]
        source: csv::Error,
    },
    #[error("manifest {path} is invalid: {message}")]
    BadManifest { path: String, message: String },
    #[error("balancing needs both layer-1 classes present")]
    SingleClassData,
    #[error("record {index} has no layer-1 label (explicit or derivable)")]
    MissingL1Label { index: usize },
    #[error("train fraction must be in (0, 1), got {0}")]
    InvalidFraction(f64),
    #[error("invalid record: {0}")]
    InvalidRecord(String),
}

/// One labeled sample: the inspection payload text plus whatever labels the
/// source provides. `raw_request` carries the original request text when
/// the source had one.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledRecord {
    pub payload: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub l1_label: Option<u8>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub attack_class: Option<AttackClass>,
    pub source: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub raw_request: Option<String>,
}

impl LabeledRecord {
    /// The layer-1 label: explicit when present, otherwise derived from the
    /// attack class (`valid` ⇒ 0, any threat ⇒ 1).
    pub fn effective_l1(&self) -> Option<u8> {
        self.l1_label
            .or_else(|| self.attack_class.map(|c| u8::from(c.is_threat())))
    }

    /// Ground-truth "is attack" bit for combined-pipeline scoring: the
    /// attack class when known, the layer-1 label otherwise.
    pub fn is_attack(&self) -> Option<bool> {
        match self.attack_class {
            Some(class) => Some(class.is_threat()),
            None => self.l1_label.map(|l| l == 1),
        }
    }

    pub fn validate(&self) -> Result<(), DatasetError> {
        if self.l1_label.is_none() && self.attack_class.is_none() {
            return Err(DatasetError::InvalidRecord(
                "record carries neither l1_label nor attack_class".into(),
            ));
        }
        if let (Some(l1), Some(class)) = (self.l1_label, self.attack_class) {
            if class.is_threat() && l1 != 1 {
                return Err(DatasetError::InvalidRecord(format!(
                    "attack_class {class} requires l1_label 1, got {l1}"
                )));
            }
        }
        if let Some(l1) = self.l1_label {
            if l1 > 1 {
                return Err(DatasetError::InvalidRecord(format!(
                    "l1_label must be 0 or 1, got {l1}"
                )));
            }
        }
        Ok(())
    }

    /// Parses the stored raw request text, if any.
    pub fn request(&self) -> Option<Result<HttpRequest, crate::http::ParseError>> {
        self.raw_request.as_deref().map(parse_raw_request)
    }
}

/// File-level label for raw HTTP block files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FileLabel {
    Normal,
    Anomalous,
}

impl FileLabel {
    pub fn as_l1(&self) -> u8 {
        match self {
            FileLabel::Normal => 0,
            FileLabel::Anomalous => 1,
        }
    }
}

/// Per-source manifest entry. The `format` tag selects which extra fields
/// apply.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceEntry {
    pub name: String,
    pub path: PathBuf,
    #[serde(flatten)]
    pub format: SourceFormat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "format", rename_all = "snake_case")]
pub enum SourceFormat {
    /// A file of raw HTTP requests separated by blank lines; the whole file
    /// carries one layer-1 label.
    RawHttpBlocks { file_label: FileLabel },
    /// A CSV with a payload column and a class column mapped through
    /// `label_mapping`.
    PayloadCsv {
        payload_column: String,
        class_column: String,
        label_mapping: BTreeMap<String, AttackClass>,
    },
    /// Already-converted JSONL records.
    Jsonl,
}

/// The corpus manifest: a list of sources. Relative paths resolve against
/// the manifest file's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusManifest {
    pub sources: Vec<SourceEntry>,
}

impl CorpusManifest {
    pub fn load(path: impl AsRef<Path>) -> Result<(Self, PathBuf), DatasetError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| DatasetError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let manifest: CorpusManifest =
            serde_json::from_str(&text).map_err(|e| DatasetError::BadManifest {
                path: path.display().to_string(),
                message: e.to_string(),
            })?;
        let base = path.parent().unwrap_or_else(|| Path::new(".")).to_path_buf();
        Ok((manifest, base))
    }
}

/// Result of loading one source: records plus skip accounting.
#[derive(Debug, Clone, Default)]
pub struct LoadOutcome {
    pub records: Vec<LabeledRecord>,
    pub skipped: usize,
    pub warnings: Vec<String>,
}

/// Loads a source entry, resolving its path against `base`.
pub fn load_source(
    entry: &SourceEntry,
    base: &Path,
    inspection: &InspectionConfig,
) -> Result<LoadOutcome, DatasetError> {
    let path = if entry.path.is_absolute() {
        entry.path.clone()
    } else {
        base.join(&entry.path)
    };
    match &entry.format {
        SourceFormat::RawHttpBlocks { file_label } => {
            load_raw_http_blocks(&path, *file_label, &entry.name, inspection)
        }
        SourceFormat::PayloadCsv {
            payload_column,
            class_column,
            label_mapping,
        } => load_payload_csv(&path, payload_column, class_column, label_mapping, &entry.name)
            .map(|records| LoadOutcome {
                records,
                ..LoadOutcome::default()
            }),
        SourceFormat::Jsonl => from_jsonl(&path).map(|records| LoadOutcome {
            records,
            ..LoadOutcome::default()
        }),
    }
}

fn looks_like_request_line(line: &str) -> bool {
    let mut parts = line.split(' ');
    let method_ok = parts
        .next()
        .is_some_and(|m| !m.is_empty() && m.bytes().all(|b| b.is_ascii_uppercase()));
    method_ok && line.contains(" HTTP/")
}

/// Splits a corpus file into raw request blocks. Blocks are separated by
/// blank lines, but a blank line followed by something that is not a new
/// request line stays inside the current block (POST bodies contain the
/// header/body separator themselves).
fn split_blocks(text: &str) -> Vec<String> {
    let mut blocks: Vec<String> = Vec::new();
    let mut current = String::new();
    let mut pending_blanks = 0usize;
    for line in text.lines() {
        if line.trim().is_empty() {
            pending_blanks += 1;
            continue;
        }
        if looks_like_request_line(line) && !current.is_empty() {
            blocks.push(std::mem::take(&mut current));
            pending_blanks = 0;
        } else {
            for _ in 0..pending_blanks {
                if !current.is_empty() {
                    current.push('\n');
                }
            }
            pending_blanks = 0;
        }
        current.push_str(line);
        current.push('\n');
    }
    if !current.trim().is_empty() {
        blocks.push(current);
    }
    blocks
}

/// Loads a file of blank-line-separated raw HTTP requests, labeling every
/// parsed record with the file-level label. Unparseable blocks are counted
/// and skipped with a warning.
pub fn load_raw_http_blocks(
    path: impl AsRef<Path>,
    file_label: FileLabel,
    source_name: &str,
    inspection: &InspectionConfig,
) -> Result<LoadOutcome, DatasetError> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|source| DatasetError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let text = String::from_utf8_lossy(&bytes);
    let blocks = split_blocks(&text);
    if blocks.is_empty() {
        return Err(DatasetError::EmptyFile {
            path: path.display().to_string(),
        });
    }
    let mut outcome = LoadOutcome::default();
    for (index, block) in blocks.iter().enumerate() {
        match parse_raw_request(block) {
            Ok(req) => {
                let payload = inspection_payload(&req, inspection).text;
                outcome.records.push(LabeledRecord {
                    payload,
                    l1_label: Some(file_label.as_l1()),
                    attack_class: None,
                    source: source_name.to_string(),
                    raw_request: Some(block.clone()),
                });
            }
            Err(err) => {
                outcome.skipped += 1;
                outcome
                    .warnings
                    .push(format!("block {index} skipped: {err}"));
            }
        }
    }
    Ok(outcome)
}

/// Loads a payload CSV: header row required, payload and class columns by
/// name, source labels mapped through `label_mapping` (an unmapped label is
/// an error, never a silent guess).
pub fn load_payload_csv(
    path: impl AsRef<Path>,
    payload_column: &str,
    class_column: &str,
    label_mapping: &BTreeMap<String, AttackClass>,
    source_name: &str,
) -> Result<Vec<LabeledRecord>, DatasetError> {
    let path = path.as_ref();
    let display = path.display().to_string();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|source| DatasetError::Csv {
            path: display.clone(),
            source,
        })?;
    let headers = reader
        .headers()
        .map_err(|source| DatasetError::Csv {
            path: display.clone(),
            source,
        })?
        .clone();
    let find = |column: &str| -> Result<usize, DatasetError> {
        headers
            .iter()
            .position(|h| h == column)
            .ok_or_else(|| DatasetError::MissingColumn {
                column: column.to_string(),
                path: display.clone(),
            })
    };
    let payload_idx = find(payload_column)?;
    let class_idx = find(class_column)?;

    let mut records = Vec::new();
    for (row_number, row) in reader.records().enumerate() {
        let row = row.map_err(|source| DatasetError::Csv {
            path: display.clone(),
            source,
        })?;
        let payload = row.get(payload_idx).unwrap_or("").to_string();
        let label = row.get(class_idx).unwrap_or("").to_string();
        let class = *label_mapping
            .get(&label)
            .ok_or_else(|| DatasetError::UnmappedLabel {
                label,
                path: display.clone(),
                row: row_number + 2, // 1-based, after the header row
            })?;
        records.push(LabeledRecord {
            payload,
            l1_label: Some(u8::from(class.is_threat())),
            attack_class: Some(class),
            source: source_name.to_string(),
            raw_request: None,
        });
    }
    Ok(records)
}

/// Counts of records dropped by [`clean`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CleanReport {
    pub missing: usize,
    pub duplicates: usize,
    pub outliers: usize,
    pub kept: usize,
}

/// Nearest-rank 99.9th percentile of the given sorted values, in exact
/// integer arithmetic: rank = ceil(999 * n / 1000).
fn nearest_rank_999(sorted: &[usize]) -> usize {
    let n = sorted.len();
    let rank = (999 * n).div_ceil(1000);
    sorted[rank.clamp(1, n) - 1]
}

/// Drops records with empty payloads, exact-duplicate payloads (first
/// occurrence kept) and payload-length outliers above the batch's 99.9th
/// percentile. The outlier pass repeats until stable, which makes the whole
/// operation idempotent.
pub fn clean(records: Vec<LabeledRecord>) -> (Vec<LabeledRecord>, CleanReport) {
    let mut report = CleanReport::default();
    let mut seen: HashSet<String> = HashSet::new();
    let mut kept: Vec<LabeledRecord> = Vec::with_capacity(records.len());
    for record in records {
        if record.payload.is_empty() {
            report.missing += 1;
        } else if !seen.insert(record.payload.clone()) {
            report.duplicates += 1;
        } else {
            kept.push(record);
        }
    }

    loop {
        if kept.is_empty() {
            break;
        }
        let mut lengths: Vec<usize> = kept.iter().map(|r| r.payload.chars().count()).collect();
        lengths.sort_unstable();
        let cutoff = nearest_rank_999(&lengths);
        let before = kept.len();
        kept.retain(|r| r.payload.chars().count() <= cutoff);
        report.outliers += before - kept.len();
        if kept.len() == before {
            break;
        }
    }

    report.kept = kept.len();
    (kept, report)
}

/// Random-undersamples the majority layer-1 class down to the minority
/// count, then reshuffles. Labels come from [`LabeledRecord::effective_l1`].
pub fn balance(records: Vec<LabeledRecord>, seed: u64) -> Result<Vec<LabeledRecord>, DatasetError> {
    let mut normal: Vec<LabeledRecord> = Vec::new();
    let mut anomalous: Vec<LabeledRecord> = Vec::new();
    for (index, record) in records.into_iter().enumerate() {
        match record.effective_l1() {
            Some(0) => normal.push(record),
            Some(_) => anomalous.push(record),
            None => return Err(DatasetError::MissingL1Label { index }),
        }
    }
    if normal.is_empty() || anomalous.is_empty() {
        return Err(DatasetError::SingleClassData);
    }
    let target = normal.len().min(anomalous.len());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for side in [&mut normal, &mut anomalous] {
        if side.len() > target {
            side.shuffle(&mut rng);
            side.truncate(target);
        }
    }
    let mut out = normal;
    out.append(&mut anomalous);
    out.shuffle(&mut rng);
    Ok(out)
}

/// Concatenates record lists and applies one seeded shuffle.
pub fn merge(lists: Vec<Vec<LabeledRecord>>, seed: u64) -> Vec<LabeledRecord> {
    let mut out: Vec<LabeledRecord> = lists.into_iter().flatten().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    out.shuffle(&mut rng);
    out
}

/// Seeded shuffle then prefix split at `floor(n * train_fraction)`.
pub fn split(
    records: Vec<LabeledRecord>,
    train_fraction: f64,
    seed: u64,
) -> Result<(Vec<LabeledRecord>, Vec<LabeledRecord>), DatasetError> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(DatasetError::InvalidFraction(train_fraction));
    }
    let mut shuffled = records;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    shuffled.shuffle(&mut rng);
    let cut = (shuffled.len() as f64 * train_fraction).floor() as usize;
    let test = shuffled.split_off(cut);
    Ok((shuffled, test))
}

/// Writes records as JSON-lines.
pub fn to_jsonl(records: &[LabeledRecord], path: impl AsRef<Path>) -> Result<(), DatasetError> {
    let path = path.as_ref();
    let io_err = |source| DatasetError::Io {
        path: path.display().to_string(),
        source,
    };
    let file = std::fs::File::create(path).map_err(io_err)?;
    let mut writer = std::io::BufWriter::new(file);
    for record in records {
        let line = serde_json::to_string(record).map_err(|e| DatasetError::InvalidRecord(e.to_string()))?;
        writer.write_all(line.as_bytes()).map_err(io_err)?;
        writer.write_all(b"\n").map_err(io_err)?;
    }
    writer.flush().map_err(io_err)?;
    Ok(())
}

/// Reads JSON-lines records; a malformed line fails with its line number.
pub fn from_jsonl(path: impl AsRef<Path>) -> Result<Vec<LabeledRecord>, DatasetError> {
    let path = path.as_ref();
    let display = path.display().to_string();
    let file = std::fs::File::open(path).map_err(|source| DatasetError::Io {
        path: display.clone(),
        source,
    })?;
    let reader = BufReader::new(file);
    let mut records = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|source| DatasetError::Io {
            path: display.clone(),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let record: LabeledRecord =
            serde_json::from_str(&line).map_err(|e| DatasetError::SchemaViolation {
                path: display.clone(),
                line: i + 1,
                message: e.to_string(),
            })?;
        record.validate().map_err(|e| DatasetError::SchemaViolation {
            path: display.clone(),
            line: i + 1,
            message: e.to_string(),
        })?;
        records.push(record);
    }
    Ok(records)
}
