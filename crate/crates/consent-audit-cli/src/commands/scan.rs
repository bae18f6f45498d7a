//! `scan`: stream a release file through the notice and EXIF channels and
//! emit the per-channel measurement table.

use std::path::{Path, PathBuf};

use anyhow::Context;
use consent_audit::ingest::{RecordFormat, SampleReader};
use consent_audit::pipeline::{scan_stream, ScanOutput};

use crate::meta::FileMeta;
use crate::render::ScanReport;
use crate::util::{load_patterns, resolve_jobs, write_file};

pub struct ScanArgs {
    pub input: PathBuf,
    pub format: RecordFormat,
    pub patterns: String,
    pub jobs: usize,
    pub out_dir: PathBuf,
    /// When set, percentages divide by this released-population total
    /// instead of the processed count.
    pub released_total: Option<u64>,
}

pub fn run(args: &ScanArgs) -> anyhow::Result<()> {
    let set = load_patterns(&args.patterns)?;
    let reader = SampleReader::open(&args.input, args.format)
        .with_context(|| format!("cannot open {}", args.input.display()))?;
    let output = scan_stream(reader, &set, resolve_jobs(args.jobs));

    write_rejects(&args.input, &args.out_dir, &output)?;

    let denominator = match args.released_total {
        Some(total) => ("released samples".to_string(), total),
        None => ("processed samples".to_string(), output.tally.processed),
    };
    let meta = FileMeta::new()
        .with_input(&args.input)?
        .with_denominator(format!("{} = {}", denominator.0, denominator.1));
    let report = ScanReport {
        tally: &output.tally,
        denominator,
    };
    write_file(&args.out_dir.join("scan_report.csv"), &report.to_csv(&meta))?;
    let md = report.to_markdown(&meta);
    write_file(&args.out_dir.join("scan_report.md"), &md)?;
    print!("{md}");
    eprintln!(
        "processed {} records: {} valid, {} rejected",
        output.stats.total_records,
        output.stats.valid,
        output.stats.rejected_total()
    );
    Ok(())
}

/// Rejections go to stderr (summarized) and a sidecar file next to the
/// report bundle.
pub fn write_rejects(input: &Path, out_dir: &Path, output: &ScanOutput) -> anyhow::Result<()> {
    if output.rejections.is_empty() {
        return Ok(());
    }
    let stem = input
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "input".to_string());
    let path = out_dir.join(format!("{stem}.rejects.jsonl"));
    let mut body = String::new();
    for r in &output.rejections {
        body.push_str(&serde_json::to_string(r)?);
        body.push('\n');
    }
    write_file(&path, &body)?;
    for (kind, count) in &output.stats.rejected {
        eprintln!("rejected {count} record(s): {kind:?}");
    }
    eprintln!("reject details: {}", path.display());
    Ok(())
}
