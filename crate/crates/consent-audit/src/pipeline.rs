//! Per-sample channel auditing and the streaming scan runner.
//!
//! The reader stays single-consumer; scanning fans out to a bounded worker
//! pool and per-worker tallies merge associatively, so results are
//! independent of scheduling.

use std::collections::BTreeMap;

use crossbeam_channel::bounded;
use serde::{Deserialize, Serialize};

use crate::exif::{copyright_from_map, parse_exif_copyright};
use crate::ingest::{ReadOutcome, Rejection, SampleReader, StreamStats};
use crate::model::{Channel, ConsentFlags, ConsentMatch, MatchCategory, Sample};
use crate::notice::{scan_sample, PatternSet};

/// Scans every consent channel of one sample: caption and OCR text through
/// the pattern set, then the EXIF copyright tag through the metadata map
/// or, failing that, the raw bytes. Binary parse errors surface as an
/// `exif_error` note rather than a hit.
pub fn audit_sample(sample: &Sample, set: &PatternSet) -> AuditedFlags {
    let mut flags = scan_sample(sample, set);
    let mut exif_error = None;

    let map_hit = sample
        .metadata
        .as_ref()
        .and_then(|m| copyright_from_map(m));
    let exif_value = match map_hit {
        Some(v) => Some(v),
        None => match sample.exif_raw.as_deref().map(parse_exif_copyright) {
            Some(Ok(found)) => found.map(|c| c.text),
            Some(Err(e)) => {
                exif_error = Some(e.to_string());
                None
            }
            None => None,
        },
    };
    if let Some(text) = exif_value {
        flags.matches.push(ConsentMatch {
            channel: Channel::Exif,
            category: MatchCategory::ExifCopyrightTag,
            text,
        });
        flags.exif_hit = true;
    }
    AuditedFlags { flags, exif_error }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuditedFlags {
    pub flags: ConsentFlags,
    pub exif_error: Option<String>,
}

/// Per-channel sample counts over a scanned population. `union` counts a
/// sample once no matter how many channels hit.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanTally {
    pub processed: u64,
    pub caption: u64,
    pub ocr: u64,
    pub exif: u64,
    pub union: u64,
    pub exif_errors: u64,
    /// Matched-text frequencies by category, capped per worker; used for
    /// report colour, not for counts.
    pub category_counts: BTreeMap<String, u64>,
}

impl ScanTally {
    pub fn add(&mut self, audited: &AuditedFlags) {
        let f = &audited.flags;
        self.processed += 1;
        if f.caption_hit {
            self.caption += 1;
        }
        if f.ocr_hit {
            self.ocr += 1;
        }
        if f.exif_hit {
            self.exif += 1;
        }
        if f.any() {
            self.union += 1;
        }
        if audited.exif_error.is_some() {
            self.exif_errors += 1;
        }
        for m in &f.matches {
            *self
                .category_counts
                .entry(m.category.to_string())
                .or_insert(0) += 1;
        }
    }

    pub fn merge(&mut self, other: ScanTally) {
        self.processed += other.processed;
        self.caption += other.caption;
        self.ocr += other.ocr;
        self.exif += other.exif;
        self.union += other.union;
        self.exif_errors += other.exif_errors;
        for (k, v) in other.category_counts {
            *self.category_counts.entry(k).or_insert(0) += v;
        }
    }
}

#[derive(Debug)]
pub struct ScanOutput {
    pub tally: ScanTally,
    pub stats: StreamStats,
    pub rejections: Vec<Rejection>,
}

const BATCH: usize = 256;
const QUEUE_BATCHES: usize = 64;

/// Drains the reader, scanning in parallel on `jobs` workers. The observer
/// runs on the reader side every `observe_every` records (0 disables it),
/// which is where streaming-memory probes belong.
pub fn scan_stream_observed(
    mut reader: SampleReader,
    set: &PatternSet,
    jobs: usize,
    observe_every: u64,
    observer: impl FnMut(u64),
) -> ScanOutput {
    let jobs = jobs.max(1);
    let mut observer = observer;
    let mut rejections = Vec::new();

    if jobs == 1 {
        let mut tally = ScanTally::default();
        let mut seen = 0u64;
        for outcome in reader.by_ref() {
            seen += 1;
            if observe_every > 0 && seen % observe_every == 0 {
                observer(seen);
            }
            match outcome {
                ReadOutcome::Sample(sample) => tally.add(&audit_sample(&sample, set)),
                ReadOutcome::Rejected(r) => rejections.push(r),
            }
        }
        return ScanOutput {
            tally,
            stats: reader.stats().clone(),
            rejections,
        };
    }

    let (tx, rx) = bounded::<Vec<Sample>>(QUEUE_BATCHES);
    let tally = std::thread::scope(|scope| {
        let workers: Vec<_> = (0..jobs)
            .map(|_| {
                let rx = rx.clone();
                scope.spawn(move || {
                    let mut partial = ScanTally::default();
                    while let Ok(batch) = rx.recv() {
                        for sample in &batch {
                            partial.add(&audit_sample(sample, set));
                        }
                    }
                    partial
                })
            })
            .collect();
        drop(rx);

        let mut batch = Vec::with_capacity(BATCH);
        let mut seen = 0u64;
        for outcome in reader.by_ref() {
            seen += 1;
            if observe_every > 0 && seen % observe_every == 0 {
                observer(seen);
            }
            match outcome {
                ReadOutcome::Sample(sample) => {
                    batch.push(sample);
                    if batch.len() == BATCH {
                        tx.send(std::mem::replace(&mut batch, Vec::with_capacity(BATCH)))
                            .expect("workers alive");
                    }
                }
                ReadOutcome::Rejected(r) => rejections.push(r),
            }
        }
        if !batch.is_empty() {
            tx.send(batch).expect("workers alive");
        }
        drop(tx);

        let mut tally = ScanTally::default();
        for w in workers {
            tally.merge(w.join().expect("scan worker panicked"));
        }
        tally
    });

    ScanOutput {
        tally,
        stats: reader.stats().clone(),
        rejections,
    }
}

pub fn scan_stream(reader: SampleReader, set: &PatternSet, jobs: usize) -> ScanOutput {
    scan_stream_observed(reader, set, jobs, 0, |_| {})
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::RecordFormat;
    use crate::notice::default_pattern_set;
    use std::collections::BTreeMap as Map;
    use std::io::Cursor;

    fn sample(uid: &str, caption: &str) -> Sample {
        Sample {
            uid: uid.into(),
            url: "https://example.com/x.jpg".into(),
            caption: caption.into(),
            ocr_text: None,
            metadata: None,
            exif_raw: None,
        }
    }

    #[test]
    fn exif_map_channel_sets_flag() {
        let mut s = sample("a", "plain");
        let mut m = Map::new();
        m.insert("Copyright".to_string(), "© Owner".to_string());
        s.metadata = Some(m);
        let audited = audit_sample(&s, default_pattern_set());
        assert!(audited.flags.exif_hit);
        assert!(!audited.flags.caption_hit);
        assert_eq!(audited.flags.matches.len(), 1);
        assert_eq!(
            audited.flags.matches[0].category,
            MatchCategory::ExifCopyrightTag
        );
    }

    #[test]
    fn raw_exif_backs_up_missing_map() {
        let mut s = sample("a", "plain");
        // little-endian fixture from the exif module tests
        s.exif_raw = Some(vec![
            0x49, 0x49, 0x2A, 0x00, 0x08, 0x00, 0x00, 0x00, 0x01, 0x00, 0x98, 0x82, 0x02, 0x00,
            0x05, 0x00, 0x00, 0x00, 0x1A, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, b'T', b'e',
            b's', b't', 0x00,
        ]);
        let audited = audit_sample(&s, default_pattern_set());
        assert!(audited.flags.exif_hit);
        assert_eq!(audited.flags.matches[0].text, "Test");
    }

    #[test]
    fn union_counts_a_triple_hit_once() {
        let mut s = sample("a", "© caption");
        s.ocr_text = Some("© ocr".into());
        let mut m = Map::new();
        m.insert("Copyright".to_string(), "© exif".to_string());
        s.metadata = Some(m);
        let mut tally = ScanTally::default();
        tally.add(&audit_sample(&s, default_pattern_set()));
        assert_eq!(tally.caption, 1);
        assert_eq!(tally.ocr, 1);
        assert_eq!(tally.exif, 1);
        assert_eq!(tally.union, 1);
    }

    #[test]
    fn parallel_scan_matches_sequential() {
        let mut text = String::new();
        for i in 0..2000 {
            let caption = match i % 5 {
                0 => "© 2020 Studio",
                1 => "holiday photo",
                2 => "licensed CC BY-SA 2.0",
                3 => "all rights reserved",
                _ => "another caption",
            };
            text.push_str(&format!(
                "{{\"uid\":\"u{i}\",\"url\":\"https://h{}.example.com/{i}\",\"caption\":\"{caption}\"}}\n",
                i % 7
            ));
        }
        let read = |jobs| {
            let reader = SampleReader::from_reader(
                Box::new(Cursor::new(text.clone())),
                RecordFormat::NdRecords,
            );
            scan_stream(reader, default_pattern_set(), jobs)
        };
        let seq = read(1);
        let par = read(4);
        assert_eq!(seq.tally, par.tally);
        assert_eq!(seq.stats, par.stats);
        assert_eq!(seq.tally.processed, 2000);
    }
}
