//! Segmentation and the statistical fault indicators: mean, sample standard
//! deviation, and peak-to-peak.
//!
//! The file-level peak-to-peak value per channel is the primary fault
//! indicator; segmentation feeds the scalogram path, where each channel is
//! cut into consecutive fixed-length windows and the trailing remainder is
//! dropped (405405 samples at length 4096 give 98 segments with 3997 samples
//! discarded).

use std::io::{BufRead, BufReader, Read, Write};

use chrono::NaiveDateTime;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::Recording;

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("channel too short: {len} samples, need at least {min}")]
    TooShort { len: usize, min: usize },
    #[error("file `{file}` has channels {found:?}, expected {expected:?}")]
    InconsistentChannels {
        file: String,
        expected: Vec<String>,
        found: Vec<String>,
    },
    #[error("invalid segmentation scheme: {0}")]
    InvalidScheme(String),
    #[error("bad feature table: {0}")]
    BadTable(String),
}

/// Fixed-length, non-overlapping segmentation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SegmentationScheme {
    /// Samples per segment.
    pub segment_length: usize,
    /// Optional cap on the number of segments returned.
    pub max_segments: Option<usize>,
}

impl SegmentationScheme {
    pub fn new(segment_length: usize, max_segments: Option<usize>) -> Result<Self, FeatureError> {
        let scheme = SegmentationScheme {
            segment_length,
            max_segments,
        };
        scheme.validate()?;
        Ok(scheme)
    }

    pub fn validate(&self) -> Result<(), FeatureError> {
        if self.segment_length < 2 {
            return Err(FeatureError::InvalidScheme(format!(
                "segment_length must be >= 2, got {}",
                self.segment_length
            )));
        }
        Ok(())
    }
}

impl Default for SegmentationScheme {
    /// 4096-sample segments, uncapped.
    fn default() -> Self {
        SegmentationScheme {
            segment_length: 4096,
            max_segments: None,
        }
    }
}

/// Cut a channel into consecutive non-overlapping segments of exactly
/// `segment_length` samples, starting at sample 0. The trailing
/// `len % segment_length` samples are discarded.
pub fn segment<'a>(
    channel: &'a [f64],
    scheme: &SegmentationScheme,
) -> Result<Vec<&'a [f64]>, FeatureError> {
    scheme.validate()?;
    if channel.len() < scheme.segment_length {
        return Err(FeatureError::TooShort {
            len: channel.len(),
            min: scheme.segment_length,
        });
    }
    let take = scheme.max_segments.unwrap_or(usize::MAX);
    Ok(channel
        .chunks_exact(scheme.segment_length)
        .take(take)
        .collect())
}

/// Mean, sample standard deviation, and peak-to-peak of one sample window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelStats {
    pub mean: f64,
    pub std: f64,
    pub p2p: f64,
}

/// Compute the fault indicators over a full channel.
///
/// The standard deviation uses the sample definition (N-1 denominator).
/// Sums are plain sequential reductions so results match a naive reference
/// implementation exactly.
pub fn channel_features(channel: &[f64]) -> Result<ChannelStats, FeatureError> {
    if channel.len() < 2 {
        return Err(FeatureError::TooShort {
            len: channel.len(),
            min: 2,
        });
    }
    let n = channel.len() as f64;
    let mut sum = 0.0;
    for &x in channel {
        sum += x;
    }
    let mean = sum / n;
    let mut sq = 0.0;
    let mut min = channel[0];
    let mut max = channel[0];
    for &x in channel {
        let dev = x - mean;
        sq += dev * dev;
        if x < min {
            min = x;
        }
        if x > max {
            max = x;
        }
    }
    Ok(ChannelStats {
        mean,
        std: (sq / (n - 1.0)).sqrt(),
        p2p: max - min,
    })
}

/// One feature-table row: indicators for a single (file, channel) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRow {
    pub file_name: String,
    /// Position of the file in the (day, timestamp)-sorted corpus.
    pub file_ordinal: usize,
    pub channel: String,
    pub timestamp: NaiveDateTime,
    pub mean: f64,
    pub std: f64,
    pub p2p: f64,
}

/// Build the feature table for a corpus already sorted by (day, timestamp).
///
/// Emits one row per (file, channel), ordered by (file ordinal, channel
/// label); all recordings must share one channel label set.
pub fn feature_table(recordings: &[Recording]) -> Result<Vec<FeatureRow>, FeatureError> {
    let Some(first) = recordings.first() else {
        return Ok(Vec::new());
    };
    let mut expected: Vec<String> = first.labels().map(str::to_string).collect();
    expected.sort();

    let mut rows = Vec::with_capacity(recordings.len() * expected.len());
    for (ordinal, rec) in recordings.iter().enumerate() {
        let mut found: Vec<String> = rec.labels().map(str::to_string).collect();
        found.sort();
        if found != expected {
            return Err(FeatureError::InconsistentChannels {
                file: rec.file_name().to_string(),
                expected,
                found,
            });
        }
        for label in &expected {
            let samples = rec.channel(label).expect("label set checked above");
            let stats = channel_features(samples)?;
            rows.push(FeatureRow {
                file_name: rec.file_name().to_string(),
                file_ordinal: ordinal,
                channel: label.clone(),
                timestamp: rec.timestamp(),
                mean: stats.mean,
                std: stats.std,
                p2p: stats.p2p,
            });
        }
    }
    Ok(rows)
}

const CSV_HEADER: &str = "file_name,file_ordinal,channel,timestamp,mean,std,p2p";
const TIMESTAMP_FORMAT: &str = "%Y-%m-%dT%H:%M:%S";

/// Write the feature table as CSV. Floats use the shortest representation
/// that round-trips, so a written table reloads bit-identically.
pub fn write_feature_csv<W: Write>(rows: &[FeatureRow], mut out: W) -> std::io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for row in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            row.file_name,
            row.file_ordinal,
            row.channel,
            row.timestamp.format(TIMESTAMP_FORMAT),
            row.mean,
            row.std,
            row.p2p
        )?;
    }
    Ok(())
}

/// Read a feature table previously written by [`write_feature_csv`].
pub fn read_feature_csv<R: Read>(input: R) -> Result<Vec<FeatureRow>, FeatureError> {
    let reader = BufReader::new(input);
    let mut lines = reader.lines().enumerate();
    let header = lines
        .next()
        .and_then(|(_, l)| l.ok())
        .ok_or_else(|| FeatureError::BadTable("empty file".into()))?;
    if header.trim_end() != CSV_HEADER {
        return Err(FeatureError::BadTable(format!(
            "unexpected header `{header}`"
        )));
    }
    let mut rows = Vec::new();
    for (lineno, line) in lines {
        let line = line.map_err(|e| FeatureError::BadTable(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 7 {
            return Err(FeatureError::BadTable(format!(
                "line {}: expected 7 fields, got {}",
                lineno + 1,
                fields.len()
            )));
        }
        let parse_f64 = |s: &str, what: &str| -> Result<f64, FeatureError> {
            s.parse().map_err(|_| {
                FeatureError::BadTable(format!("line {}: bad {what} `{s}`", lineno + 1))
            })
        };
        rows.push(FeatureRow {
            file_name: fields[0].to_string(),
            file_ordinal: fields[1].parse().map_err(|_| {
                FeatureError::BadTable(format!("line {}: bad ordinal `{}`", lineno + 1, fields[1]))
            })?,
            channel: fields[2].to_string(),
            timestamp: NaiveDateTime::parse_from_str(fields[3], TIMESTAMP_FORMAT).map_err(
                |_| {
                    FeatureError::BadTable(format!(
                        "line {}: bad timestamp `{}`",
                        lineno + 1,
                        fields[3]
                    ))
                },
            )?,
            mean: parse_f64(fields[4], "mean")?,
            std: parse_f64(fields[5], "std")?,
            p2p: parse_f64(fields[6], "p2p")?,
        });
    }
    Ok(rows)
}

/// Serialize the table as a JSON array of objects (one key per CSV column).
pub fn feature_table_json(rows: &[FeatureRow]) -> serde_json::Value {
    serde_json::to_value(rows).expect("feature rows always serialize")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::Recording;
    use proptest::prelude::*;

    #[test]
    fn paper_segmentation_counts() {
        let channel = vec![0.0; 405405];
        let scheme = SegmentationScheme::default();
        let segs = segment(&channel, &scheme).unwrap();
        assert_eq!(segs.len(), 98);
        assert!(segs.iter().all(|s| s.len() == 4096));
        assert_eq!(channel.len() - 98 * 4096, 3997);
    }

    #[test]
    fn exact_fit_single_segment() {
        let channel = vec![1.0; 4096];
        let segs = segment(&channel, &SegmentationScheme::default()).unwrap();
        assert_eq!(segs.len(), 1);
    }

    #[test]
    fn short_remainder_discarded() {
        let channel: Vec<f64> = (0..10).map(f64::from).collect();
        let scheme = SegmentationScheme::new(3, None).unwrap();
        let segs = segment(&channel, &scheme).unwrap();
        assert_eq!(segs.len(), 3);
        assert_eq!(segs[0], &[0.0, 1.0, 2.0]);
        assert_eq!(segs[1], &[3.0, 4.0, 5.0]);
        assert_eq!(segs[2], &[6.0, 7.0, 8.0]);
    }

    #[test]
    fn max_segments_caps_output() {
        let channel = vec![0.0; 100];
        let scheme = SegmentationScheme::new(10, Some(3)).unwrap();
        assert_eq!(segment(&channel, &scheme).unwrap().len(), 3);
    }

    #[test]
    fn too_short_channel_is_an_error() {
        let channel = vec![0.0; 5];
        let scheme = SegmentationScheme::new(10, None).unwrap();
        assert!(matches!(
            segment(&channel, &scheme),
            Err(FeatureError::TooShort { len: 5, min: 10 })
        ));
    }

    #[test]
    fn features_of_small_vectors() {
        let stats = channel_features(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(stats.mean, 2.5);
        assert!((stats.std - (5.0f64 / 3.0).sqrt()).abs() < 1e-12);
        assert_eq!(stats.p2p, 3.0);

        let stats = channel_features(&[-5.0, 5.0]).unwrap();
        assert_eq!(stats.mean, 0.0);
        assert!((stats.std - 50.0f64.sqrt()).abs() < 1e-12);
        assert_eq!(stats.p2p, 10.0);
    }

    #[test]
    fn constant_channel_has_zero_spread() {
        let stats = channel_features(&[3.25; 17]).unwrap();
        assert_eq!(stats.mean, 3.25);
        assert_eq!(stats.std, 0.0);
        assert_eq!(stats.p2p, 0.0);
    }

    #[test]
    fn single_sample_is_too_short() {
        assert!(matches!(
            channel_features(&[1.0]),
            Err(FeatureError::TooShort { len: 1, min: 2 })
        ));
    }

    fn rec(name: &str, labels: &[&str], values: &[f64]) -> Recording {
        Recording::from_named_file(
            name,
            labels
                .iter()
                .map(|l| (l.to_string(), values.to_vec()))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn table_counts_and_ordinals() {
        let labels = ["IP-1", "RF-2", "RL-3", "RR-4"];
        let recs = vec![
            rec("Day001_T_20210101_000000.csv", &labels, &[0.0, 1.0]),
            rec("Day002_T_20210102_000000.csv", &labels, &[0.0, 2.0]),
        ];
        let rows = feature_table(&recs).unwrap();
        assert_eq!(rows.len(), 8);
        assert!(rows[..4].iter().all(|r| r.file_ordinal == 0));
        assert!(rows[4..].iter().all(|r| r.file_ordinal == 1));
        let channels: Vec<&str> = rows[..4].iter().map(|r| r.channel.as_str()).collect();
        assert_eq!(channels, labels);
    }

    #[test]
    fn corpus_scale_row_count() {
        // 526 files x 4 channels = 2104 rows.
        let labels = ["IP-1", "RF-2", "RL-3", "RR-4"];
        let recs: Vec<Recording> = (0..526)
            .map(|i| {
                rec(
                    &format!("Day{:03}_T_20210101_{:02}{:02}{:02}.csv",
                        i / 10, i / 3600, (i / 60) % 60, i % 60),
                    &labels,
                    &[0.0, i as f64],
                )
            })
            .collect();
        assert_eq!(feature_table(&recs).unwrap().len(), 2104);
    }

    #[test]
    fn empty_corpus_empty_table() {
        assert!(feature_table(&[]).unwrap().is_empty());
    }

    #[test]
    fn mismatched_channel_sets_rejected() {
        let a = rec("Day001_T_20210101_000000.csv", &["IP-1"], &[0.0, 1.0]);
        let b = rec("Day002_T_20210102_000000.csv", &["RF-2"], &[0.0, 1.0]);
        assert!(matches!(
            feature_table(&[a, b]),
            Err(FeatureError::InconsistentChannels { .. })
        ));
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let labels = ["IP-1", "RR-4"];
        let recs = vec![rec(
            "Day001_T_20210101_000000.csv",
            &labels,
            &[0.1, 0.30000000000000004, -7.25],
        )];
        let rows = feature_table(&recs).unwrap();
        let mut buf = Vec::new();
        write_feature_csv(&rows, &mut buf).unwrap();
        let back = read_feature_csv(buf.as_slice()).unwrap();
        assert_eq!(rows, back);
    }

    proptest! {
        #[test]
        fn segmentation_floor_mod_contract(
            len in 2usize..20_000,
            seg_len in 2usize..512,
        ) {
            prop_assume!(len >= seg_len);
            let channel = vec![0.0; len];
            let scheme = SegmentationScheme::new(seg_len, None).unwrap();
            let segs = segment(&channel, &scheme).unwrap();
            prop_assert_eq!(segs.len(), len / seg_len);
            prop_assert!(segs.iter().all(|s| s.len() == seg_len));
        }

        #[test]
        fn shift_and_scale_laws(
            base in proptest::collection::vec(-1e3f64..1e3, 2..200),
            shift in -1e3f64..1e3,
            scale in 0.001f64..1e3,
        ) {
            let stats = channel_features(&base).unwrap();

            let shifted: Vec<f64> = base.iter().map(|x| x + shift).collect();
            let s = channel_features(&shifted).unwrap();
            let tol = 1e-9;
            prop_assert!((s.mean - (stats.mean + shift)).abs()
                <= tol * (1.0 + stats.mean.abs() + shift.abs()));
            prop_assert!((s.std - stats.std).abs() <= tol * (1.0 + stats.std));
            prop_assert!((s.p2p - stats.p2p).abs() <= tol * (1.0 + stats.p2p));

            let scaled: Vec<f64> = base.iter().map(|x| x * scale).collect();
            let s = channel_features(&scaled).unwrap();
            prop_assert!((s.mean - scale * stats.mean).abs()
                <= tol * (1.0 + (scale * stats.mean).abs()));
            prop_assert!((s.std - scale * stats.std).abs() <= tol * (1.0 + scale * stats.std));
            prop_assert!((s.p2p - scale * stats.p2p).abs() <= tol * (1.0 + scale * stats.p2p));
        }

        #[test]
        fn whole_file_p2p_bounds_segment_p2p(
            values in proptest::collection::vec(-1e3f64..1e3, 8..400),
            seg_len in 2usize..8,
        ) {
            let whole = channel_features(&values).unwrap().p2p;
            let scheme = SegmentationScheme::new(seg_len, None).unwrap();
            for seg in segment(&values, &scheme).unwrap() {
                let part = channel_features(seg).unwrap().p2p;
                prop_assert!(whole >= part - 1e-12);
            }
        }
    }
}
