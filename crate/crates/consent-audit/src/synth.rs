//! Seeded synthetic fixture generators: record corpora with planted
//! consent signals, a reference EXIF writer, and robots.txt censuses.
//! Generators are the ground-truth side of the test suites, so they share
//! no code with the parsers and scanners they exercise.

use std::collections::BTreeMap;
use std::io::Write;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::RawRecord;

/// Byte order for the reference EXIF writer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TiffOrder {
    LittleEndian,
    BigEndian,
}

/// Composes a minimal TIFF stream whose IFD0 carries the copyright tag
/// (0x8298, ASCII) with the given value. A trailing NUL is appended per
/// the tag's ASCII convention.
pub fn write_tiff_copyright(value: &str, order: TiffOrder) -> Vec<u8> {
    let mut ascii = value.as_bytes().to_vec();
    ascii.push(0);
    let count = ascii.len() as u32;

    let u16b = |v: u16| match order {
        TiffOrder::LittleEndian => v.to_le_bytes(),
        TiffOrder::BigEndian => v.to_be_bytes(),
    };
    let u32b = |v: u32| match order {
        TiffOrder::LittleEndian => v.to_le_bytes(),
        TiffOrder::BigEndian => v.to_be_bytes(),
    };

    let mut out = Vec::new();
    match order {
        TiffOrder::LittleEndian => out.extend_from_slice(&[0x49, 0x49]),
        TiffOrder::BigEndian => out.extend_from_slice(&[0x4D, 0x4D]),
    }
    out.extend_from_slice(&u16b(42));
    out.extend_from_slice(&u32b(8)); // IFD0 directly after the header
    out.extend_from_slice(&u16b(1)); // one entry
    out.extend_from_slice(&u16b(0x8298));
    out.extend_from_slice(&u16b(2)); // ASCII
    out.extend_from_slice(&u32b(count));
    if count <= 4 {
        let mut field = [0u8; 4];
        field[..ascii.len()].copy_from_slice(&ascii);
        out.extend_from_slice(&field);
        out.extend_from_slice(&u32b(0)); // next-IFD pointer
    } else {
        let value_offset = 8 + 2 + 12 + 4; // header + count + entry + next ptr
        out.extend_from_slice(&u32b(value_offset as u32));
        out.extend_from_slice(&u32b(0)); // next-IFD pointer
        out.extend_from_slice(&ascii);
    }
    out
}

/// Wraps a TIFF stream in a JPEG APP1/Exif segment.
pub fn wrap_jpeg(tiff: &[u8]) -> Vec<u8> {
    let mut out = vec![0xFF, 0xD8, 0xFF, 0xE1];
    let len = (2 + 6 + tiff.len()) as u16;
    out.extend_from_slice(&len.to_be_bytes());
    out.extend_from_slice(b"Exif\0\0");
    out.extend_from_slice(tiff);
    out.extend_from_slice(&[0xFF, 0xD9]);
    out
}

/// How many samples receive each combination of planted channels.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PlantPlan {
    pub caption_only: u64,
    pub ocr_only: u64,
    pub exif_only: u64,
    pub caption_ocr: u64,
    pub caption_exif: u64,
    pub ocr_exif: u64,
    pub all_three: u64,
}

impl PlantPlan {
    /// Channel totals implied by the plan: (caption, ocr, exif).
    pub fn channel_totals(&self) -> (u64, u64, u64) {
        (
            self.caption_only + self.caption_ocr + self.caption_exif + self.all_three,
            self.ocr_only + self.caption_ocr + self.ocr_exif + self.all_three,
            self.exif_only + self.caption_exif + self.ocr_exif + self.all_three,
        )
    }

    pub fn union(&self) -> u64 {
        self.caption_only
            + self.ocr_only
            + self.exif_only
            + self.caption_ocr
            + self.caption_exif
            + self.ocr_exif
            + self.all_three
    }

    /// Plan matching the published small-scale rates: per 10,000 samples,
    /// 22 caption, 9 OCR, and 227 EXIF hits with two pairwise overlaps.
    pub fn scaled_default(count: u64) -> PlantPlan {
        let per = |n: u64| n * count / 10_000;
        PlantPlan {
            caption_only: per(20),
            ocr_only: per(8),
            exif_only: per(226),
            caption_ocr: per(1),
            caption_exif: per(1),
            ocr_exif: 0,
            all_three: 0,
        }
    }
}

/// Notice texts that hit the builtin patterns, one pool per channel use.
const PLANTED_NOTICES: &[&str] = &[
    "© John Doe 2025",
    "copr. 1999 Studio Nine",
    "Copyright 2019 Acme Photo",
    "all rights reserved",
    "licensed CC BY-NC 4.0",
    "(c) 2020 North Light",
    "&copy; 2018 Gallery",
    "Creative Commons attribution",
];

/// Clean caption stock; none of these hit any builtin pattern.
const CLEAN_CAPTIONS: &[&str] = &[
    "sunset over the harbor",
    "copper kettle on a stove",
    "hand drawn map of the old town",
    "fresh copra drying in the sun",
    "a bicycle by the canal",
    "two cats sleeping on a rug",
    "abstract painting in blue",
    "street food stall at night",
    "mountain trail after rain",
    "vintage car on a country road",
];

/// Host pool with heavy-tailed weights, shard prefixes included.
const HOST_POOL: &[(&str, u32)] = &[
    ("i.pinimg.com", 30),
    ("i-h1.pinimg.com", 12),
    ("cdn.wp.com", 14),
    ("s3.amazonaws.com", 11),
    ("static.photos.example.co.uk", 7),
    ("img.shopfront.net", 6),
    ("media.blogspot.com", 5),
    ("assets.stockpix.io", 4),
    ("pics.gallery.org", 3),
    ("files.weird.example", 2),
];

/// Ground truth emitted alongside a generated corpus.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CorpusTruth {
    pub records: u64,
    pub caption_hits: u64,
    pub ocr_hits: u64,
    pub exif_hits: u64,
    pub union_hits: u64,
    pub base_domain_counts: BTreeMap<String, u64>,
}

/// Streams `count` newline-delimited records to the writer, planting
/// consent signals per the plan at seeded-random positions. Returns the
/// generator-side ground truth.
pub fn generate_corpus<W: Write>(
    out: &mut W,
    count: u64,
    plan: PlantPlan,
    seed: u64,
) -> std::io::Result<CorpusTruth> {
    assert!(plan.union() <= count, "plan plants more samples than exist");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // channel bitmask per planted sample: 1=caption, 2=ocr, 4=exif
    let mut masks: Vec<u8> = Vec::with_capacity(plan.union() as usize);
    for (mask, n) in [
        (1u8, plan.caption_only),
        (2, plan.ocr_only),
        (4, plan.exif_only),
        (3, plan.caption_ocr),
        (5, plan.caption_exif),
        (6, plan.ocr_exif),
        (7, plan.all_three),
    ] {
        masks.extend(std::iter::repeat(mask).take(n as usize));
    }
    let mut positions: Vec<u64> = rand::seq::index::sample(
        &mut rng,
        count as usize,
        masks.len(),
    )
    .into_iter()
    .map(|i| i as u64)
    .collect();
    positions.sort_unstable();
    masks.shuffle(&mut rng);
    let planted: BTreeMap<u64, u8> = positions.into_iter().zip(masks).collect();

    let hosts: Vec<&str> = HOST_POOL.iter().map(|(h, _)| *h).collect();
    let weights: Vec<u32> = HOST_POOL.iter().map(|(_, w)| *w).collect();
    let total_weight: u32 = weights.iter().sum();

    let mut truth = CorpusTruth::default();
    let rules = crate::domains::SuffixRules::bundled();
    let mut line = String::with_capacity(256);
    for i in 0..count {
        let mask = planted.get(&i).copied().unwrap_or(0);
        let mut pick = rng.gen_range(0..total_weight);
        let mut host = hosts[0];
        for (h, w) in hosts.iter().zip(&weights) {
            if pick < *w {
                host = h;
                break;
            }
            pick -= w;
        }
        let caption = if mask & 1 != 0 {
            truth.caption_hits += 1;
            format!(
                "{} {}",
                CLEAN_CAPTIONS[rng.gen_range(0..CLEAN_CAPTIONS.len())],
                PLANTED_NOTICES[rng.gen_range(0..PLANTED_NOTICES.len())]
            )
        } else {
            CLEAN_CAPTIONS[rng.gen_range(0..CLEAN_CAPTIONS.len())].to_string()
        };
        let ocr_text = if mask & 2 != 0 {
            truth.ocr_hits += 1;
            Some(PLANTED_NOTICES[rng.gen_range(0..PLANTED_NOTICES.len())].to_string())
        } else if rng.gen_bool(0.05) {
            Some("menu of the day".to_string())
        } else {
            None
        };
        let metadata = if mask & 4 != 0 {
            truth.exif_hits += 1;
            let mut m = BTreeMap::new();
            m.insert(
                "Copyright".to_string(),
                format!("© Owner {}", 1990 + (i % 36)),
            );
            m.insert("Model".to_string(), "SynthCam 3000".to_string());
            Some(m)
        } else if rng.gen_bool(0.1) {
            let mut m = BTreeMap::new();
            m.insert("Model".to_string(), "SynthCam 3000".to_string());
            Some(m)
        } else {
            None
        };
        if mask != 0 {
            truth.union_hits += 1;
        }

        let url = format!("https://{host}/img/{i}.jpg");
        let full = crate::model::Sample {
            uid: format!("s{i:08}"),
            url,
            caption,
            ocr_text,
            metadata,
            exif_raw: None,
        };
        let base = crate::domains::base_domain(
            &crate::domains::full_domain(&full.url).expect("generated urls are valid"),
            rules,
        );
        *truth
            .base_domain_counts
            .entry(base.as_str().to_string())
            .or_insert(0) += 1;

        let raw: RawRecord = full.to_raw();
        line.clear();
        line.push_str(&serde_json::to_string(&raw).expect("record serializes"));
        line.push('\n');
        out.write_all(line.as_bytes())?;
        truth.records += 1;
    }
    Ok(truth)
}

/// A synthetic robots.txt census: hosts with generated bodies (some
/// unreachable) and sample weights, spanning every verdict shape.
pub fn robots_census(seed: u64, domains: usize) -> Vec<(String, Option<String>, u64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    const AGENTS: &[&str] = &["GPTBot", "CCBot", "*", "googlebot-image", "claudebot", "Bytespider"];
    let mut out = Vec::new();
    for d in 0..domains {
        let host = format!("h{d}.census.example");
        let weight = rng.gen_range(1..=20);
        if rng.gen_bool(0.15) {
            out.push((host, None, weight));
            continue;
        }
        let mut body = String::new();
        let group_count = rng.gen_range(1..=3);
        for _ in 0..group_count {
            let agent_count = rng.gen_range(1..=2);
            for _ in 0..agent_count {
                body.push_str(&format!(
                    "User-agent: {}\n",
                    AGENTS[rng.gen_range(0..AGENTS.len())]
                ));
            }
            let rule_count = rng.gen_range(1..=3);
            for _ in 0..rule_count {
                match rng.gen_range(0..5) {
                    0 => body.push_str("Disallow: /\n"),
                    1 => body.push_str("Disallow: /private/\n"),
                    2 => body.push_str("Disallow:\n"),
                    3 => body.push_str("Allow: /public/\n"),
                    _ => body.push_str("Allow: /\n"),
                }
            }
            body.push('\n');
        }
        out.push((host, Some(body), weight));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exif::parse_exif_copyright;
    use crate::notice::{default_pattern_set, scan_text};

    #[test]
    fn reference_writer_round_trips_through_the_parser() {
        for order in [TiffOrder::LittleEndian, TiffOrder::BigEndian] {
            for value in ["Test", "© ACME 2020", "ab", "a longer copyright string"] {
                let tiff = write_tiff_copyright(value, order);
                let got = parse_exif_copyright(&tiff).unwrap().unwrap();
                assert_eq!(got.text, value, "{order:?}");
                let jpeg = wrap_jpeg(&tiff);
                let got = parse_exif_copyright(&jpeg).unwrap().unwrap();
                assert_eq!(got.text, value, "jpeg {order:?}");
            }
        }
    }

    #[test]
    fn planted_pool_hits_and_clean_pool_does_not() {
        let set = default_pattern_set();
        for notice in PLANTED_NOTICES {
            assert!(!scan_text(notice, set).is_empty(), "{notice:?} must hit");
        }
        for clean in CLEAN_CAPTIONS {
            assert!(scan_text(clean, set).is_empty(), "{clean:?} must stay clean");
        }
    }

    #[test]
    fn generator_truth_matches_plan() {
        let plan = PlantPlan::scaled_default(10_000);
        let mut buf = Vec::new();
        let truth = generate_corpus(&mut buf, 10_000, plan, 7).unwrap();
        assert_eq!(truth.records, 10_000);
        let (c, o, e) = plan.channel_totals();
        assert_eq!((c, o, e), (22, 9, 227));
        assert_eq!(truth.caption_hits, c);
        assert_eq!(truth.ocr_hits, o);
        assert_eq!(truth.exif_hits, e);
        assert_eq!(truth.union_hits, plan.union());
        assert_eq!(truth.base_domain_counts.values().sum::<u64>(), 10_000);
    }

    #[test]
    fn generation_is_deterministic_per_seed() {
        let plan = PlantPlan::scaled_default(1000);
        let run = |seed| {
            let mut buf = Vec::new();
            generate_corpus(&mut buf, 1000, plan, seed).unwrap();
            buf
        };
        assert_eq!(run(3), run(3));
        assert_ne!(run(3), run(4));
    }

    #[test]
    fn census_covers_reachable_and_unreachable_hosts() {
        let census = robots_census(11, 30);
        assert_eq!(census.len(), 30);
        assert!(census.iter().any(|(_, body, _)| body.is_none()));
        assert!(census.iter().any(|(_, body, _)| body.is_some()));
    }
}
