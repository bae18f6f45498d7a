//! Emitted-file provenance headers: tool version, input digests, and the
//! cache snapshot timestamp. No wall-clock values, so reruns over the same
//! inputs stay byte-identical.

use std::io::Read;
use std::path::Path;

use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Default)]
pub struct FileMeta {
    pub inputs: Vec<(String, String)>,
    pub cache_snapshot: Option<u64>,
    pub denominator: Option<String>,
}

pub fn digest_file(path: &Path) -> anyhow::Result<String> {
    let mut file = std::fs::File::open(path)
        .map_err(|e| anyhow::anyhow!("cannot open {}: {e}", path.display()))?;
    let mut hasher = Sha256::new();
    let mut buf = [0u8; 64 * 1024];
    loop {
        let n = file.read(&mut buf)?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hasher
        .finalize()
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect())
}

impl FileMeta {
    pub fn new() -> Self {
        FileMeta::default()
    }

    pub fn with_input(mut self, path: &Path) -> anyhow::Result<Self> {
        let digest = digest_file(path)?;
        self.inputs
            .push((path.display().to_string(), digest));
        Ok(self)
    }

    pub fn with_cache_snapshot(mut self, ts: Option<u64>) -> Self {
        self.cache_snapshot = ts;
        self
    }

    pub fn with_denominator(mut self, text: impl Into<String>) -> Self {
        self.denominator = Some(text.into());
        self
    }

    fn lines(&self) -> Vec<String> {
        let mut lines = vec![format!(
            "tool: consent-audit {}",
            env!("CARGO_PKG_VERSION")
        )];
        for (name, digest) in &self.inputs {
            lines.push(format!("input: {name} sha256:{digest}"));
        }
        if let Some(ts) = self.cache_snapshot {
            lines.push(format!("cache-snapshot: {ts}"));
        }
        if let Some(d) = &self.denominator {
            lines.push(format!("denominator: {d}"));
        }
        lines
    }

    pub fn csv_header(&self) -> String {
        self.lines()
            .iter()
            .map(|l| format!("# {l}\n"))
            .collect()
    }

    pub fn md_header(&self) -> String {
        let mut out = String::from("<!--\n");
        for l in self.lines() {
            out.push_str(&l);
            out.push('\n');
        }
        out.push_str("-->\n");
        out
    }

    pub fn json_value(&self) -> serde_json::Value {
        serde_json::json!({
            "tool": format!("consent-audit {}", env!("CARGO_PKG_VERSION")),
            "inputs": self.inputs.iter().map(|(n, d)| {
                serde_json::json!({"path": n, "sha256": d})
            }).collect::<Vec<_>>(),
            "cache_snapshot": self.cache_snapshot,
            "denominator": self.denominator,
        })
    }
}
