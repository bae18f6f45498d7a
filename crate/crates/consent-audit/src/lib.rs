//! Streaming audit toolkit for data-consent signals in web-scraped
//! url-text dataset releases.
//!
//! Sample-level channels: copyright notices in caption and OCR text, and
//! the EXIF copyright field (decoded metadata or raw bytes). Web-domain
//! level: base-domain aggregation, robots.txt retrieval and per-agent
//! classification, and sample-weighted Terms-of-Service distributions.
//! The `metrics` module carries the detection-evaluation math used to
//! check externally supplied watermark scores.

pub mod domains;
pub mod exif;
pub mod ingest;
pub mod metrics;
pub mod model;
pub mod notice;
pub mod pipeline;
pub mod robots;
pub mod synth;
pub mod tos;

pub use model::{
    BaseDomain, Channel, ConfusionCounts, ConsentFlags, ConsentMatch, FullDomain, MatchCategory,
    RobotsDoc, Sample, TosAnnotation, Verdict,
};
