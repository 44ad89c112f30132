//! Recording ingest: MAT v5 and CSV parsing plus file-name metadata.
//!
//! Each data file carries its identity in its name
//! (`Day022_Hunting_SSA_20211209_124241.mat`): a day number and a timestamp
//! that together define the corpus ordering. Channel layout inside a file is
//! not guessed; a [`ChannelMap`] states which MAT variable (or matrix column,
//! or CSV column) feeds which channel label.

mod csvfile;
mod filename;
mod mat;

pub use csvfile::read_csv;
pub use filename::parse_filename;
pub use mat::read_mat;

use std::fmt;
use std::path::Path;

use chrono::NaiveDateTime;
use thiserror::Error;

/// Errors produced while turning a data file into a [`Recording`].
#[derive(Debug, Error)]
pub enum IngestError {
    #[error("malformed file name `{name}`: {reason}")]
    MalformedName { name: String, reason: String },
    #[error("{path}: unsupported MAT feature: {what}")]
    UnsupportedMatFeature { path: String, what: String },
    #[error("{path}: mapped variable `{name}` not found")]
    MissingVariable { path: String, name: String },
    #[error("{path}: corrupt file: {detail}")]
    CorruptFile { path: String, detail: String },
    #[error("{path}: row {row}: {detail}")]
    RaggedRows { path: String, row: usize, detail: String },
    #[error("{path}: non-numeric cell `{content}` at data row {row}, column {col}")]
    NonNumericCell {
        path: String,
        row: usize,
        col: usize,
        content: String,
    },
    #[error("invalid channel map: {detail}")]
    InvalidChannelMap { detail: String },
    #[error("channels are inconsistent: {detail}")]
    InconsistentRecording { detail: String },
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

/// Where one channel's samples come from inside a source file.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ChannelSource {
    /// A MAT vector variable, or a CSV header column name.
    Variable(String),
    /// One 0-based column of a 2-D MAT matrix variable (`name:col`).
    VariableColumn(String, usize),
    /// A 0-based CSV column index.
    ColumnIndex(usize),
}

impl ChannelSource {
    /// Parse a source spec: a bare integer is a CSV column index,
    /// `name:col` addresses a matrix column, anything else is a variable
    /// or CSV header name.
    pub fn parse(spec: &str) -> ChannelSource {
        let spec = spec.trim();
        if !spec.is_empty() && spec.bytes().all(|b| b.is_ascii_digit()) {
            if let Ok(idx) = spec.parse::<usize>() {
                return ChannelSource::ColumnIndex(idx);
            }
        }
        if let Some((name, col)) = spec.rsplit_once(':') {
            if !name.is_empty() && !col.is_empty() && col.bytes().all(|b| b.is_ascii_digit()) {
                if let Ok(idx) = col.parse::<usize>() {
                    return ChannelSource::VariableColumn(name.to_string(), idx);
                }
            }
        }
        ChannelSource::Variable(spec.to_string())
    }
}

impl fmt::Display for ChannelSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChannelSource::Variable(name) => write!(f, "{name}"),
            ChannelSource::VariableColumn(name, col) => write!(f, "{name}:{col}"),
            ChannelSource::ColumnIndex(idx) => write!(f, "{idx}"),
        }
    }
}

/// Ordered mapping from file-level sources to channel labels.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMap {
    entries: Vec<(ChannelSource, String)>,
}

impl ChannelMap {
    /// Build a map, rejecting duplicate labels and duplicate sources.
    pub fn new(entries: Vec<(ChannelSource, String)>) -> Result<ChannelMap, IngestError> {
        if entries.is_empty() {
            return Err(IngestError::InvalidChannelMap {
                detail: "no channels mapped".into(),
            });
        }
        for (i, (source, label)) in entries.iter().enumerate() {
            if label.trim().is_empty() {
                return Err(IngestError::InvalidChannelMap {
                    detail: format!("empty label for source `{source}`"),
                });
            }
            for (other_source, other_label) in &entries[..i] {
                if other_label == label {
                    return Err(IngestError::InvalidChannelMap {
                        detail: format!("label `{label}` mapped twice"),
                    });
                }
                if other_source == source {
                    return Err(IngestError::InvalidChannelMap {
                        detail: format!("source `{source}` mapped twice"),
                    });
                }
            }
        }
        Ok(ChannelMap { entries })
    }

    /// Build a map from `(source spec, label)` string pairs.
    pub fn parse(pairs: &[(String, String)]) -> Result<ChannelMap, IngestError> {
        ChannelMap::new(
            pairs
                .iter()
                .map(|(spec, label)| (ChannelSource::parse(spec), label.trim().to_string()))
                .collect(),
        )
    }

    pub fn entries(&self) -> &[(ChannelSource, String)] {
        &self.entries
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(_, label)| label.as_str())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// One parsed data file: ordered channel sample vectors plus the identity
/// fields recovered from the file name.
#[derive(Debug, Clone, PartialEq)]
pub struct Recording {
    file_name: String,
    day: u32,
    timestamp: NaiveDateTime,
    channels: Vec<(String, Vec<f64>)>,
}

impl Recording {
    /// Build a recording; all channels must share one length and labels must
    /// be unique.
    pub fn new(
        file_name: impl Into<String>,
        day: u32,
        timestamp: NaiveDateTime,
        channels: Vec<(String, Vec<f64>)>,
    ) -> Result<Recording, IngestError> {
        if let Some((first_label, first)) = channels.first() {
            for (label, samples) in &channels {
                if samples.len() != first.len() {
                    return Err(IngestError::InconsistentRecording {
                        detail: format!(
                            "channel `{label}` has {} samples but `{first_label}` has {}",
                            samples.len(),
                            first.len()
                        ),
                    });
                }
            }
        }
        for (i, (label, _)) in channels.iter().enumerate() {
            if channels[..i].iter().any(|(other, _)| other == label) {
                return Err(IngestError::InconsistentRecording {
                    detail: format!("duplicate channel label `{label}`"),
                });
            }
        }
        Ok(Recording {
            file_name: file_name.into(),
            day,
            timestamp,
            channels,
        })
    }

    /// Build a recording taking day/timestamp from the file name.
    pub fn from_named_file(
        file_name: &str,
        channels: Vec<(String, Vec<f64>)>,
    ) -> Result<Recording, IngestError> {
        let (day, timestamp) = parse_filename(file_name)?;
        Recording::new(file_name, day, timestamp, channels)
    }

    pub fn file_name(&self) -> &str {
        &self.file_name
    }

    pub fn day(&self) -> u32 {
        self.day
    }

    pub fn timestamp(&self) -> NaiveDateTime {
        self.timestamp
    }

    /// Samples per channel (0 when no channels are mapped).
    pub fn sample_count(&self) -> usize {
        self.channels.first().map_or(0, |(_, s)| s.len())
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.channels.iter().map(|(label, _)| label.as_str())
    }

    pub fn channel(&self, label: &str) -> Option<&[f64]> {
        self.channels
            .iter()
            .find(|(l, _)| l == label)
            .map(|(_, s)| s.as_slice())
    }

    pub fn channels(&self) -> impl Iterator<Item = (&str, &[f64])> {
        self.channels
            .iter()
            .map(|(label, s)| (label.as_str(), s.as_slice()))
    }

    /// Corpus ordering key: `(day, timestamp)`.
    pub fn sort_key(&self) -> (u32, NaiveDateTime) {
        (self.day, self.timestamp)
    }
}

/// Read a recording, dispatching on the file extension (`.mat` or `.csv`).
pub fn read_recording(path: &Path, map: &ChannelMap) -> Result<Recording, IngestError> {
    let ext = path
        .extension()
        .map(|e| e.to_string_lossy().to_ascii_lowercase());
    match ext.as_deref() {
        Some("mat") => read_mat(path, map),
        Some("csv") => read_csv(path, map),
        _ => Err(IngestError::MalformedName {
            name: path.to_string_lossy().into_owned(),
            reason: "expected a .mat or .csv extension".into(),
        }),
    }
}
