//! Streaming reader/validator: turns release files into a bounded-memory
//! stream of samples plus per-kind rejection counts. Malformed lines are
//! yielded inline as rejections and never abort the stream, so audits over
//! dirty web-scale dumps stay loss-free.

use std::collections::{BTreeMap, HashSet};
use std::fs::File;
use std::hash::{Hash, Hasher};
use std::io::{self, BufRead, BufReader, Read};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::model::{validate_sample, RawRecord, Sample, ValidateError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RecordFormat {
    /// Newline-delimited records, one JSON object per line.
    NdRecords,
    /// CSV with a declared header; missing optional columns map to absent
    /// fields. The `metadata` cell carries a JSON object.
    Csv,
}

impl std::str::FromStr for RecordFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "ndrecords" | "ndjson" | "jsonl" => Ok(RecordFormat::NdRecords),
            "csv" => Ok(RecordFormat::Csv),
            other => Err(format!("unknown format: {other}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectKind {
    MalformedLine,
    MissingField,
    InvalidUrl,
    InvalidBase64,
    DuplicateUid,
    Io,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rejection {
    /// 1-based input line (ndrecords) or record number (csv).
    pub line_no: u64,
    pub kind: RejectKind,
    pub message: String,
}

/// Global stream counters. Invariant: `valid + rejected total = total_records`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StreamStats {
    pub total_records: u64,
    pub valid: u64,
    pub rejected: BTreeMap<RejectKind, u64>,
}

impl StreamStats {
    pub fn rejected_total(&self) -> u64 {
        self.rejected.values().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ReadOutcome {
    Sample(Sample),
    Rejected(Rejection),
}

/// Exact duplicate detection over 64-bit uid fingerprints, stored as a
/// sorted vector with a small staging set. Costs 8 bytes per record plus
/// the staging buffer, which keeps million-record streams cheap.
#[derive(Debug, Default)]
struct UidDeduper {
    sorted: Vec<u64>,
    staging: HashSet<u64>,
}

const STAGING_LIMIT: usize = 1 << 16;

impl UidDeduper {
    fn fingerprint(uid: &str) -> u64 {
        let mut h = std::collections::hash_map::DefaultHasher::new();
        uid.hash(&mut h);
        h.finish()
    }

    /// True when the uid was seen before; records it otherwise.
    fn check_and_insert(&mut self, uid: &str) -> bool {
        let fp = Self::fingerprint(uid);
        if self.staging.contains(&fp) || self.sorted.binary_search(&fp).is_ok() {
            return true;
        }
        self.staging.insert(fp);
        if self.staging.len() >= STAGING_LIMIT {
            self.compact();
        }
        false
    }

    fn compact(&mut self) {
        let mut batch: Vec<u64> = self.staging.drain().collect();
        batch.sort_unstable();
        let mut merged = Vec::with_capacity(self.sorted.len() + batch.len());
        let (mut i, mut j) = (0, 0);
        while i < self.sorted.len() && j < batch.len() {
            if self.sorted[i] <= batch[j] {
                merged.push(self.sorted[i]);
                i += 1;
            } else {
                merged.push(batch[j]);
                j += 1;
            }
        }
        merged.extend_from_slice(&self.sorted[i..]);
        merged.extend_from_slice(&batch[j..]);
        self.sorted = merged;
    }
}

enum Decoder {
    NdRecords {
        reader: Box<dyn BufRead + Send>,
        line_no: u64,
        buf: String,
    },
    Csv {
        reader: csv::Reader<Box<dyn Read + Send>>,
        headers: csv::StringRecord,
        record_no: u64,
    },
}

/// Single-consumer streaming reader. Yields each record's validation
/// outcome in input order; memory use is independent of file size apart
/// from the per-record duplicate fingerprints.
pub struct SampleReader {
    decoder: Decoder,
    dedup: Option<UidDeduper>,
    stats: StreamStats,
    io_failed: bool,
}

impl SampleReader {
    pub fn open(path: &Path, format: RecordFormat) -> io::Result<Self> {
        let file = File::open(path)?;
        Ok(Self::from_reader(Box::new(BufReader::new(file)), format))
    }

    pub fn from_reader(reader: Box<dyn BufRead + Send>, format: RecordFormat) -> Self {
        let decoder = match format {
            RecordFormat::NdRecords => Decoder::NdRecords {
                reader,
                line_no: 0,
                buf: String::new(),
            },
            RecordFormat::Csv => {
                let mut csv_reader = csv::ReaderBuilder::new()
                    .flexible(true)
                    .from_reader(Box::new(reader) as Box<dyn Read + Send>);
                let headers = csv_reader
                    .headers()
                    .cloned()
                    .unwrap_or_else(|_| csv::StringRecord::new());
                Decoder::Csv {
                    reader: csv_reader,
                    headers,
                    record_no: 0,
                }
            }
        };
        SampleReader {
            decoder,
            dedup: Some(UidDeduper::default()),
            stats: StreamStats::default(),
            io_failed: false,
        }
    }

    /// Disables cross-record uid duplicate detection.
    pub fn without_dedup(mut self) -> Self {
        self.dedup = None;
        self
    }

    pub fn stats(&self) -> &StreamStats {
        &self.stats
    }

    fn reject(&mut self, line_no: u64, kind: RejectKind, message: String) -> ReadOutcome {
        self.stats.total_records += 1;
        *self.stats.rejected.entry(kind).or_insert(0) += 1;
        ReadOutcome::Rejected(Rejection {
            line_no,
            kind,
            message,
        })
    }

    fn accept(&mut self, line_no: u64, record: RawRecord) -> ReadOutcome {
        match validate_sample(record) {
            Ok(sample) => {
                if let Some(dedup) = &mut self.dedup {
                    if dedup.check_and_insert(&sample.uid) {
                        return self.reject(
                            line_no,
                            RejectKind::DuplicateUid,
                            format!("duplicate uid {:?}", sample.uid),
                        );
                    }
                }
                self.stats.total_records += 1;
                self.stats.valid += 1;
                ReadOutcome::Sample(sample)
            }
            Err(e) => {
                let kind = match e {
                    ValidateError::MissingField(_) => RejectKind::MissingField,
                    ValidateError::InvalidUrl(_) => RejectKind::InvalidUrl,
                    ValidateError::InvalidBase64(_) => RejectKind::InvalidBase64,
                };
                self.reject(line_no, kind, e.to_string())
            }
        }
    }

    fn next_ndrecords(&mut self) -> Option<ReadOutcome> {
        loop {
            let (line, line_no) = match &mut self.decoder {
                Decoder::NdRecords {
                    reader,
                    line_no,
                    buf,
                } => {
                    buf.clear();
                    match reader.read_line(buf) {
                        Ok(0) => return None,
                        Ok(_) => {
                            *line_no += 1;
                            let mut line = buf.trim_end_matches(['\n', '\r']);
                            if *line_no == 1 {
                                line = line.trim_start_matches('\u{feff}');
                            }
                            (line.to_string(), *line_no)
                        }
                        Err(e) => {
                            self.io_failed = true;
                            let n = *line_no + 1;
                            return Some(self.reject(n, RejectKind::Io, e.to_string()));
                        }
                    }
                }
                Decoder::Csv { .. } => unreachable!(),
            };
            if line.trim().is_empty() {
                continue; // blank lines are not records
            }
            return Some(match serde_json::from_str::<RawRecord>(&line) {
                Ok(record) => self.accept(line_no, record),
                Err(e) => self.reject(line_no, RejectKind::MalformedLine, e.to_string()),
            });
        }
    }

    fn next_csv(&mut self) -> Option<ReadOutcome> {
        let (result, record_no, headers) = match &mut self.decoder {
            Decoder::Csv {
                reader,
                headers,
                record_no,
            } => {
                let mut record = csv::StringRecord::new();
                match reader.read_record(&mut record) {
                    Ok(false) => return None,
                    Ok(true) => {
                        *record_no += 1;
                        (Ok(record), *record_no, headers.clone())
                    }
                    Err(e) => {
                        *record_no += 1;
                        (Err(e), *record_no, headers.clone())
                    }
                }
            }
            Decoder::NdRecords { .. } => unreachable!(),
        };
        Some(match result {
            Ok(record) => {
                let raw = csv_to_raw(&headers, &record);
                match raw {
                    Ok(raw) => self.accept(record_no, raw),
                    Err(msg) => self.reject(record_no, RejectKind::MalformedLine, msg),
                }
            }
            Err(e) => self.reject(record_no, RejectKind::MalformedLine, e.to_string()),
        })
    }
}

fn csv_to_raw(headers: &csv::StringRecord, record: &csv::StringRecord) -> Result<RawRecord, String> {
    let mut raw = RawRecord::default();
    for (idx, header) in headers.iter().enumerate() {
        let Some(value) = record.get(idx) else {
            continue; // short row: remaining optional columns absent
        };
        match header.trim() {
            "uid" => raw.uid = Some(value.to_string()),
            "url" => raw.url = Some(value.to_string()),
            "caption" => raw.caption = Some(value.to_string()),
            "ocr_text" => {
                if !value.is_empty() {
                    raw.ocr_text = Some(value.to_string());
                }
            }
            "metadata" => {
                if !value.is_empty() {
                    let map = serde_json::from_str(value)
                        .map_err(|e| format!("metadata cell is not a JSON object: {e}"))?;
                    raw.metadata = Some(map);
                }
            }
            "exif_raw" => {
                if !value.is_empty() {
                    raw.exif_raw = Some(value.to_string());
                }
            }
            _ => {} // unknown columns ignored
        }
    }
    Ok(raw)
}

impl Iterator for SampleReader {
    type Item = ReadOutcome;

    fn next(&mut self) -> Option<ReadOutcome> {
        if self.io_failed {
            return None; // an I/O error already ended the stream
        }
        match &self.decoder {
            Decoder::NdRecords { .. } => self.next_ndrecords(),
            Decoder::Csv { .. } => self.next_csv(),
        }
    }
}
