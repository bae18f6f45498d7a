//! `domains`: aggregate sample counts per base domain and emit the top-K
//! table plus the full-domain fan-out list for the robots.txt census.

use std::collections::BTreeSet;
use std::path::PathBuf;

use anyhow::Context;
use consent_audit::domains::{top_k, DomainCounts, SuffixRules};
use consent_audit::ingest::{ReadOutcome, RecordFormat, SampleReader};

use crate::meta::FileMeta;
use crate::render::{domains_csv, full_domains_csv};
use crate::util::write_file;

pub struct DomainsArgs {
    pub input: PathBuf,
    pub format: RecordFormat,
    pub top: usize,
    pub out: PathBuf,
    pub full_out: Option<PathBuf>,
    /// Last-two-labels fallback instead of the vendored suffix snapshot.
    pub minimal_rules: bool,
}

pub fn run(args: &DomainsArgs) -> anyhow::Result<()> {
    let rules = if args.minimal_rules {
        SuffixRules::minimal()
    } else {
        SuffixRules::bundled().clone()
    };
    let reader = SampleReader::open(&args.input, args.format)
        .with_context(|| format!("cannot open {}", args.input.display()))?;
    let mut counts = DomainCounts::default();
    let mut rejected = 0u64;
    for outcome in reader {
        match outcome {
            ReadOutcome::Sample(sample) => counts.add_sample(&sample, &rules),
            ReadOutcome::Rejected(_) => rejected += 1,
        }
    }

    let top = top_k(&counts, args.top);
    let meta = FileMeta::new().with_input(&args.input)?;
    write_file(&args.out, &domains_csv(&meta, &top))?;

    let keep: BTreeSet<String> = top.iter().map(|d| d.base_domain.clone()).collect();
    let full_out = args.full_out.clone().unwrap_or_else(|| {
        args.out
            .parent()
            .unwrap_or_else(|| std::path::Path::new("."))
            .join("full_domains.csv")
    });
    write_file(&full_out, &full_domains_csv(&meta, &counts, Some(&keep)))?;

    let covered: u64 = top.iter().map(|d| d.count).sum();
    eprintln!(
        "{} samples over {} base domains ({} rejected records); top {} cover {:.1}%",
        counts.total(),
        counts.by_base.len(),
        rejected,
        top.len(),
        if counts.total() == 0 {
            0.0
        } else {
            covered as f64 * 100.0 / counts.total() as f64
        }
    );
    println!("wrote {} and {}", args.out.display(), full_out.display());
    Ok(())
}
