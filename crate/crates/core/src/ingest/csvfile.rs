//! CSV fallback reader: comma-separated numeric columns, UTF-8, LF or CRLF,
//! with an optional header row.

use std::path::Path;

use super::{ChannelMap, ChannelSource, IngestError, Recording};

/// Read a CSV file into a recording.
///
/// Header handling: name-based map entries require a header row and match
/// its column names. With a purely index-based map the first row is treated
/// as a header only when at least one of its cells is non-numeric, so
/// headerless numeric files parse as-is. Cell row/column indices in errors
/// are 0-based and count data rows (the header row excluded).
pub fn read_csv(path: &Path, map: &ChannelMap) -> Result<Recording, IngestError> {
    let path_str = path.to_string_lossy().into_owned();
    let raw = std::fs::read(path).map_err(|source| IngestError::Io {
        path: path_str.clone(),
        source,
    })?;
    let text = String::from_utf8(raw).map_err(|_| IngestError::CorruptFile {
        path: path_str.clone(),
        detail: "file is not valid UTF-8".into(),
    })?;
    let file_name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path_str.clone());

    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut rows: Vec<csv::StringRecord> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| IngestError::CorruptFile {
            path: path_str.clone(),
            detail: e.to_string(),
        })?;
        rows.push(record);
    }

    let wants_names = map
        .entries()
        .iter()
        .any(|(s, _)| matches!(s, ChannelSource::Variable(_)));
    let has_header = if rows.is_empty() {
        false
    } else if wants_names {
        true
    } else {
        rows[0].iter().any(|cell| parse_cell(cell).is_none())
    };
    let header: Option<&csv::StringRecord> = if has_header { Some(&rows[0]) } else { None };
    let data = if has_header { &rows[1..] } else { &rows[..] };

    if data.is_empty() {
        return Err(IngestError::RaggedRows {
            path: path_str,
            row: 0,
            detail: "file contains no data rows".into(),
        });
    }
    let width = data[0].len();
    for (r, record) in data.iter().enumerate() {
        if record.len() != width {
            return Err(IngestError::RaggedRows {
                path: path_str,
                row: r,
                detail: format!("{} columns where {} were expected", record.len(), width),
            });
        }
    }
    if let Some(h) = header {
        if h.len() != width {
            return Err(IngestError::RaggedRows {
                path: path_str,
                row: 0,
                detail: format!(
                    "header has {} columns but data rows have {}",
                    h.len(),
                    width
                ),
            });
        }
    }

    // Resolve each mapped source to a column index.
    let mut columns = Vec::with_capacity(map.len());
    for (source, label) in map.entries() {
        let col = match source {
            ChannelSource::ColumnIndex(idx) => {
                if *idx >= width {
                    return Err(IngestError::InvalidChannelMap {
                        detail: format!(
                            "column index {idx} out of range ({path_str} has {width} columns)"
                        ),
                    });
                }
                *idx
            }
            ChannelSource::Variable(name) => {
                let header = header.ok_or_else(|| IngestError::MissingVariable {
                    path: path_str.clone(),
                    name: name.clone(),
                })?;
                header
                    .iter()
                    .position(|cell| cell.trim() == name)
                    .ok_or_else(|| IngestError::MissingVariable {
                        path: path_str.clone(),
                        name: name.clone(),
                    })?
            }
            ChannelSource::VariableColumn(name, col) => {
                return Err(IngestError::InvalidChannelMap {
                    detail: format!(
                        "matrix column address `{name}:{col}` does not apply to CSV files"
                    ),
                });
            }
        };
        columns.push((col, label.clone()));
    }

    let mut channels: Vec<(String, Vec<f64>)> = columns
        .iter()
        .map(|(_, label)| (label.clone(), Vec::with_capacity(data.len())))
        .collect();
    for (r, record) in data.iter().enumerate() {
        for ((col, _), (_, samples)) in columns.iter().zip(channels.iter_mut()) {
            let cell = record.get(*col).unwrap_or("");
            let value = parse_cell(cell).ok_or_else(|| IngestError::NonNumericCell {
                path: path_str.clone(),
                row: r,
                col: *col,
                content: cell.trim().to_string(),
            })?;
            samples.push(value);
        }
    }

    Recording::from_named_file(&file_name, channels)
}

/// Parse one cell as a finite decimal (plain or scientific notation).
fn parse_cell(cell: &str) -> Option<f64> {
    let trimmed = cell.trim();
    if trimmed.is_empty() {
        return None;
    }
    trimmed.parse::<f64>().ok().filter(|v| v.is_finite())
}
