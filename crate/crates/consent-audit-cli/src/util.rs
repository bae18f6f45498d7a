//! Small shared helpers for the command implementations.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::Context;
use consent_audit::notice::{default_pattern_set, parse_pattern_file, PatternSet};
use consent_audit::robots::AgentRegistry;

/// Loads `builtin` or a pattern file path.
pub fn load_patterns(spec: &str) -> anyhow::Result<PatternSet> {
    if spec == "builtin" {
        return Ok(default_pattern_set().clone());
    }
    let text = std::fs::read_to_string(spec)
        .with_context(|| format!("cannot read pattern file {spec}"))?;
    parse_pattern_file(&text).map_err(|e| anyhow::anyhow!("pattern file {spec}: {e}"))
}

/// Loads `builtin` or an agent list file.
pub fn load_agents(spec: &str) -> anyhow::Result<AgentRegistry> {
    if spec == "builtin" {
        return Ok(AgentRegistry::builtin());
    }
    let text =
        std::fs::read_to_string(spec).with_context(|| format!("cannot read agent list {spec}"))?;
    Ok(AgentRegistry::parse(&text))
}

/// Reads a weights CSV (tool-emitted files carry `#` header comments),
/// returning `key_column -> count` sums.
pub fn read_weight_csv(
    path: &Path,
    key_column: &str,
    count_column: &str,
) -> anyhow::Result<BTreeMap<String, u64>> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("cannot read {}", path.display()))?;
    let headers = reader.headers()?.clone();
    let key_idx = headers
        .iter()
        .position(|h| h == key_column)
        .ok_or_else(|| anyhow::anyhow!("{} lacks column {key_column}", path.display()))?;
    let count_idx = headers.iter().position(|h| h == count_column);
    let mut out = BTreeMap::new();
    for record in reader.records() {
        let record = record?;
        let Some(key) = record.get(key_idx) else {
            continue;
        };
        let count = match count_idx.and_then(|i| record.get(i)) {
            Some(cell) => cell
                .parse::<u64>()
                .with_context(|| format!("bad count {cell:?} for {key}"))?,
            None => 1,
        };
        *out.entry(key.to_string()).or_insert(0) += count;
    }
    Ok(out)
}

pub fn resolve_jobs(jobs: usize) -> usize {
    if jobs > 0 {
        jobs
    } else {
        std::thread::available_parallelism()
            .map(|n| n.get())
            .unwrap_or(1)
    }
}

pub fn write_file(path: &Path, contents: &str) -> anyhow::Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    std::fs::write(path, contents)
        .with_context(|| format!("cannot write {}", path.display()))
}
