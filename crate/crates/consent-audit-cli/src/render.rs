//! Table rendering for the audit reports. Markdown layouts follow the
//! published column structure so diffs against the source tables stay
//! eyeball-able; CSVs carry full precision.

use consent_audit::pipeline::ScanTally;
use consent_audit::robots::{AgentRegistry, ObservationRow, ObservationTable};
use consent_audit::tos::WeightedShare;

use crate::meta::FileMeta;

fn pct2(x: f64) -> String {
    format!("{:.2}%", x * 100.0)
}

fn pct1(x: f64) -> String {
    format!("{:.1}%", x * 100.0)
}

/// Sample-level measurement table: per-channel counts and the union, as
/// counts and percentages of the declared denominator.
pub struct ScanReport<'a> {
    pub tally: &'a ScanTally,
    /// (label, value) the percentages divide by.
    pub denominator: (String, u64),
}

impl ScanReport<'_> {
    fn rows(&self) -> Vec<(&'static str, u64)> {
        vec![
            ("Caption", self.tally.caption),
            ("OCR", self.tally.ocr),
            ("EXIF Metadata", self.tally.exif),
            ("Caption ∪ OCR ∪ EXIF", self.tally.union),
        ]
    }

    fn pct(&self, count: u64) -> f64 {
        if self.denominator.1 == 0 {
            0.0
        } else {
            count as f64 / self.denominator.1 as f64
        }
    }

    pub fn to_csv(&self, meta: &FileMeta) -> String {
        let mut out = meta.csv_header();
        out.push_str("measure,samples,share\n");
        for (label, count) in self.rows() {
            out.push_str(&format!("{label},{count},{}\n", self.pct(count)));
        }
        out
    }

    pub fn to_markdown(&self, meta: &FileMeta) -> String {
        let mut out = meta.md_header();
        out.push_str(&format!(
            "| Measure | Samples | % of {} ({}) |\n|---|---:|---:|\n",
            self.denominator.0, self.denominator.1
        ));
        for (label, count) in self.rows() {
            out.push_str(&format!("| {label} | {count} | {} |\n", pct2(self.pct(count))));
        }
        out
    }
}

/// robots.txt observation table in the published layout: the all-agents
/// row first, then agents by observed weight. Rows at or above the
/// highlight threshold are bolded and AI-purposed agents are tagged.
pub struct RobotsReport<'a> {
    pub table: &'a ObservationTable,
    pub registry: &'a AgentRegistry,
    pub highlight_threshold: f64,
    pub min_observed: u64,
}

impl RobotsReport<'_> {
    pub fn to_csv(&self, meta: &FileMeta) -> String {
        let mut out = meta.csv_header();
        out.push_str(&format!(
            "# attempted_domains: {} successful: {} observed_weight: {} unattributed_weight: {}\n",
            self.table.attempted_domains,
            self.table.successful_domains,
            self.table.observed_weight,
            self.table.unattributed_weight
        ));
        out.push_str(
            "agent,ai_purposed,observed,all_disallowed,all_share,some_disallowed,some_share,none_disallowed,none_share,highlight\n",
        );
        let all = std::iter::once(&self.table.all_agents);
        for row in all.chain(self.table.rows.iter()) {
            let obs = row.observed.max(1) as f64;
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{}\n",
                csv_quote(&row.agent),
                self.registry.is_ai(&row.agent),
                row.observed,
                row.all_disallowed,
                row.all_disallowed as f64 / obs,
                row.some_disallowed,
                row.some_disallowed as f64 / obs,
                row.none_disallowed,
                row.none_disallowed as f64 / obs,
                row.all_disallowed_rate() >= self.highlight_threshold,
            ));
        }
        out
    }

    pub fn to_markdown(&self, meta: &FileMeta) -> String {
        let mut out = meta.md_header();
        out.push_str(&format!(
            "Attempted full domains: {}; successful robots.txt: {}; samples observed: {}; unattributed weight: {}.\n\n",
            self.table.attempted_domains,
            self.table.successful_domains,
            self.table.observed_weight,
            self.table.unattributed_weight
        ));
        out.push_str("| Agent | Observed | All Disallowed | % | Some Disallowed | % | None Disallowed | % |\n");
        out.push_str("|---|---:|---:|---:|---:|---:|---:|---:|\n");
        out.push_str(&self.md_row(&self.table.all_agents, false));
        for row in &self.table.rows {
            if row.observed < self.min_observed {
                continue;
            }
            let highlight = row.all_disallowed_rate() >= self.highlight_threshold;
            out.push_str(&self.md_row(row, highlight));
        }
        out
    }

    fn md_row(&self, row: &ObservationRow, highlight: bool) -> String {
        let obs = row.observed.max(1) as f64;
        let mut name = row.agent.clone();
        if self.registry.is_ai(&row.agent) {
            name.push_str(" [AI]");
        }
        if highlight {
            name = format!("**{name}**");
        }
        format!(
            "| {name} | {} | {} | {} | {} | {} | {} | {} |\n",
            row.observed,
            row.all_disallowed,
            pct1(row.all_disallowed as f64 / obs),
            row.some_disallowed,
            pct1(row.some_disallowed as f64 / obs),
            row.none_disallowed,
            pct1(row.none_disallowed as f64 / obs),
        )
    }
}

/// Sample-weighted ToS attribute distributions.
pub struct TosReport<'a> {
    pub shares: &'a [(String, Vec<WeightedShare>)],
}

impl TosReport<'_> {
    pub fn to_csv(&self, meta: &FileMeta) -> String {
        let mut out = meta.csv_header();
        out.push_str("attribute,value,weight,share\n");
        for (attribute, shares) in self.shares {
            for s in shares {
                out.push_str(&format!(
                    "{attribute},{},{},{}\n",
                    csv_quote(&s.value),
                    s.weight,
                    s.share
                ));
            }
        }
        out
    }

    pub fn to_markdown(&self, meta: &FileMeta) -> String {
        let mut out = meta.md_header();
        for (attribute, shares) in self.shares {
            out.push_str(&format!("### {attribute}\n\n| Value | Weight | Share |\n|---|---:|---:|\n"));
            for s in shares {
                out.push_str(&format!("| {} | {} | {} |\n", s.value, s.weight, pct1(s.share)));
            }
            out.push('\n');
        }
        out
    }
}

fn csv_quote(field: &str) -> String {
    if field.contains([',', '"', '\n']) {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

/// domains.csv in the documented schema.
pub fn domains_csv(meta: &FileMeta, top: &[consent_audit::domains::TopDomain]) -> String {
    let mut out = meta.csv_header();
    out.push_str("base_domain,count,share,n_full_domains\n");
    for d in top {
        out.push_str(&format!(
            "{},{},{},{}\n",
            csv_quote(&d.base_domain),
            d.count,
            d.share,
            d.n_full_domains
        ));
    }
    out
}

/// full_domains.csv: the robots.txt fan-out list with per-host weights.
pub fn full_domains_csv(
    meta: &FileMeta,
    counts: &consent_audit::domains::DomainCounts,
    restrict_to: Option<&std::collections::BTreeSet<String>>,
) -> String {
    let full_to_base: std::collections::BTreeMap<&String, &String> = counts
        .full_by_base
        .iter()
        .flat_map(|(base, fulls)| fulls.iter().map(move |f| (f, base)))
        .collect();
    let mut out = meta.csv_header();
    out.push_str("full_domain,base_domain,count\n");
    for (full, count) in &counts.by_full {
        let base = full_to_base.get(full).map(|b| b.as_str()).unwrap_or("");
        if let Some(allowed) = restrict_to {
            if !allowed.contains(base) {
                continue;
            }
        }
        out.push_str(&format!(
            "{},{},{count}\n",
            csv_quote(full),
            csv_quote(base)
        ));
    }
    out
}
