//! `exif`: extract the copyright tag from one image file, or from every
//! record of a release stream.

use std::path::PathBuf;

use anyhow::Context;
use consent_audit::exif::{copyright_from_map, parse_exif_copyright};
use consent_audit::ingest::{ReadOutcome, RecordFormat, SampleReader};

pub struct ExifArgs {
    pub input: Option<PathBuf>,
    pub records: Option<PathBuf>,
    pub format: RecordFormat,
}

pub fn run(args: &ExifArgs) -> anyhow::Result<()> {
    match (&args.input, &args.records) {
        (Some(image), None) => single(image),
        (None, Some(records)) => batch(records, args.format),
        _ => anyhow::bail!("exif needs exactly one of --input <image> or --records <stream>"),
    }
}

fn single(path: &PathBuf) -> anyhow::Result<()> {
    let bytes =
        std::fs::read(path).with_context(|| format!("cannot read {}", path.display()))?;
    match parse_exif_copyright(&bytes) {
        Ok(Some(c)) => println!("{}", c.text),
        Ok(None) => println!("absent"),
        Err(e) => anyhow::bail!("{}: {e}", path.display()),
    }
    Ok(())
}

fn batch(path: &PathBuf, format: RecordFormat) -> anyhow::Result<()> {
    let reader = SampleReader::open(path, format)
        .with_context(|| format!("cannot open {}", path.display()))?;
    let mut found = 0u64;
    let mut total = 0u64;
    for outcome in reader {
        let ReadOutcome::Sample(sample) = outcome else {
            continue;
        };
        total += 1;
        let value = sample
            .metadata
            .as_ref()
            .and_then(|m| copyright_from_map(m))
            .or_else(|| {
                sample
                    .exif_raw
                    .as_deref()
                    .and_then(|raw| parse_exif_copyright(raw).ok().flatten())
                    .map(|c| c.text)
            });
        match value {
            Some(v) => {
                found += 1;
                println!("{}\t{v}", sample.uid);
            }
            None => println!("{}\tabsent", sample.uid),
        }
    }
    eprintln!("{found} of {total} samples carry a copyright tag");
    Ok(())
}
