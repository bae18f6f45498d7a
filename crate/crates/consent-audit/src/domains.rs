//! URL host extraction, registrable-domain reduction, and top-K domain
//! statistics.
//!
//! Reduction runs against a vendored snapshot of the public suffix rule
//! table (ICANN section, see `data/public_suffix_snapshot.dat` for the
//! snapshot date). A minimal last-two-labels mode exists for builds that
//! must not carry the table.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::net::IpAddr;
use std::sync::OnceLock;

use url::{Host, Url};

use crate::model::{BaseDomain, FullDomain, Sample};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DomainError {
    #[error("url has no host: {0}")]
    NoHost(String),
    #[error("invalid url: {0}")]
    InvalidUrl(String),
}

/// Public-suffix rule table. Rules are exact (`co.uk`), wildcard (`*.ck`),
/// or exception (`!www.ck`); matching follows the standard prevailing-rule
/// semantics, with the implicit `*` default for unknown TLDs.
#[derive(Debug, Clone)]
pub struct SuffixRules {
    exact: HashSet<String>,
    /// Parent of a `*.` rule ("ck" for "*.ck").
    wildcard: HashSet<String>,
    exception: HashSet<String>,
    minimal: bool,
    snapshot_date: Option<String>,
}

const SNAPSHOT: &str = include_str!("../data/public_suffix_snapshot.dat");

impl SuffixRules {
    /// The vendored snapshot, parsed once per process.
    pub fn bundled() -> &'static SuffixRules {
        static RULES: OnceLock<SuffixRules> = OnceLock::new();
        RULES.get_or_init(|| SuffixRules::parse(SNAPSHOT))
    }

    /// Fallback mode: the registrable domain is always the last two labels.
    pub fn minimal() -> SuffixRules {
        SuffixRules {
            exact: HashSet::new(),
            wildcard: HashSet::new(),
            exception: HashSet::new(),
            minimal: true,
            snapshot_date: None,
        }
    }

    pub fn parse(text: &str) -> SuffixRules {
        let mut rules = SuffixRules {
            exact: HashSet::new(),
            wildcard: HashSet::new(),
            exception: HashSet::new(),
            minimal: false,
            snapshot_date: None,
        };
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix("//") {
                if let Some(date) = rest.trim().strip_prefix("snapshot-date:") {
                    rules.snapshot_date = Some(date.trim().to_string());
                }
                continue;
            }
            let rule = line.to_ascii_lowercase();
            if let Some(parent) = rule.strip_prefix("*.") {
                rules.wildcard.insert(parent.to_string());
            } else if let Some(name) = rule.strip_prefix('!') {
                rules.exception.insert(name.to_string());
            } else {
                rules.exact.insert(rule);
            }
        }
        rules
    }

    pub fn snapshot_date(&self) -> Option<&str> {
        self.snapshot_date.as_deref()
    }

    pub fn rule_count(&self) -> usize {
        self.exact.len() + self.wildcard.len() + self.exception.len()
    }

    /// Label count of the public suffix of `labels` (rightmost labels).
    fn suffix_label_count(&self, labels: &[&str]) -> usize {
        let n = labels.len();
        if self.minimal {
            return 1.min(n);
        }
        // Exception rules prevail over everything else.
        for k in (1..=n).rev() {
            let suffix = labels[n - k..].join(".");
            if self.exception.contains(&suffix) {
                return k - 1;
            }
        }
        let mut best = 0usize;
        for k in 1..=n {
            let suffix = labels[n - k..].join(".");
            if self.exact.contains(&suffix) {
                best = best.max(k);
            }
            // "*.foo" makes "<one-label>.foo" a public suffix; the bare
            // parent is not matched by its own wildcard.
            if k < n && self.wildcard.contains(&suffix) {
                best = best.max(k + 1);
            }
        }
        if best == 0 {
            1 // implicit "*" rule: unknown TLDs are public suffixes
        } else {
            best
        }
    }

    /// True when the host is itself a public suffix under these rules.
    pub fn is_public_suffix(&self, host: &str) -> bool {
        let labels: Vec<&str> = host.split('.').collect();
        self.suffix_label_count(&labels) >= labels.len()
    }
}

/// Lowercased host of an absolute URL, port removed. IP-literal hosts are
/// returned verbatim and flagged non-reducible.
pub fn full_domain(url: &str) -> Result<FullDomain, DomainError> {
    let parsed = Url::parse(url).map_err(|e| DomainError::InvalidUrl(e.to_string()))?;
    match parsed.host() {
        Some(Host::Domain(d)) if !d.is_empty() => {
            let host = d.trim_end_matches('.').to_ascii_lowercase();
            if host.is_empty() {
                return Err(DomainError::NoHost(url.to_string()));
            }
            Ok(FullDomain::new(host, false))
        }
        Some(Host::Ipv4(ip)) => Ok(FullDomain::new(ip.to_string(), true)),
        Some(Host::Ipv6(ip)) => Ok(FullDomain::new(format!("[{ip}]"), true)),
        _ => Err(DomainError::NoHost(url.to_string())),
    }
}

/// Registrable domain: one label beyond the matched public suffix. Hosts
/// that are themselves a public suffix, and IP literals, come back
/// unchanged and flagged non-reducible.
pub fn base_domain(full: &FullDomain, rules: &SuffixRules) -> BaseDomain {
    let host = full.as_str();
    if full.is_ip_literal() || host.parse::<IpAddr>().is_ok() {
        return BaseDomain::new(host.to_string(), false);
    }
    let labels: Vec<&str> = host.split('.').collect();
    let suffix_len = rules.suffix_label_count(&labels);
    if suffix_len >= labels.len() {
        return BaseDomain::new(host.to_string(), false);
    }
    let keep = suffix_len + 1;
    BaseDomain::new(labels[labels.len() - keep..].join("."), true)
}

/// Exact per-domain sample counts plus the full-domain fan-out needed by
/// the robots.txt subsystem. Merging is associative and commutative, so
/// per-worker partials reduce to identical totals in any order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DomainCounts {
    pub by_base: BTreeMap<String, u64>,
    pub full_by_base: BTreeMap<String, BTreeSet<String>>,
    pub by_full: BTreeMap<String, u64>,
    /// Samples whose url yielded no usable host.
    pub unresolved: u64,
}

impl DomainCounts {
    pub fn add_sample(&mut self, sample: &Sample, rules: &SuffixRules) {
        self.add_url(&sample.url, rules);
    }

    pub fn add_url(&mut self, url: &str, rules: &SuffixRules) {
        let Ok(full) = full_domain(url) else {
            self.unresolved += 1;
            return;
        };
        let base = base_domain(&full, rules);
        *self.by_base.entry(base.as_str().to_string()).or_insert(0) += 1;
        *self.by_full.entry(full.as_str().to_string()).or_insert(0) += 1;
        self.full_by_base
            .entry(base.as_str().to_string())
            .or_default()
            .insert(full.as_str().to_string());
    }

    pub fn merge(&mut self, other: DomainCounts) {
        for (k, v) in other.by_base {
            *self.by_base.entry(k).or_insert(0) += v;
        }
        for (k, v) in other.by_full {
            *self.by_full.entry(k).or_insert(0) += v;
        }
        for (k, set) in other.full_by_base {
            self.full_by_base.entry(k).or_default().extend(set);
        }
        self.unresolved += other.unresolved;
    }

    pub fn total(&self) -> u64 {
        self.by_base.values().sum()
    }
}

/// Aggregates a stream of samples into domain counts.
pub fn domain_counts<'a>(
    samples: impl IntoIterator<Item = &'a Sample>,
    rules: &SuffixRules,
) -> DomainCounts {
    let mut counts = DomainCounts::default();
    for sample in samples {
        counts.add_sample(sample, rules);
    }
    counts
}

#[derive(Debug, Clone, PartialEq)]
pub struct TopDomain {
    pub base_domain: String,
    pub count: u64,
    /// Fraction of all counted samples, not just the listed ones.
    pub share: f64,
    pub n_full_domains: usize,
}

/// Top-k base domains by sample count, descending; ties break
/// lexicographically by domain name.
pub fn top_k(counts: &DomainCounts, k: usize) -> Vec<TopDomain> {
    let total = counts.total();
    let mut entries: Vec<(&String, &u64)> = counts.by_base.iter().collect();
    entries.sort_by(|a, b| b.1.cmp(a.1).then_with(|| a.0.cmp(b.0)));
    entries
        .into_iter()
        .take(k)
        .map(|(domain, &count)| TopDomain {
            base_domain: domain.clone(),
            count,
            share: if total == 0 {
                0.0
            } else {
                count as f64 / total as f64
            },
            n_full_domains: counts
                .full_by_base
                .get(domain)
                .map(BTreeSet::len)
                .unwrap_or(0),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base_of(host: &str) -> String {
        let full = FullDomain::new(host.to_string(), false);
        base_domain(&full, SuffixRules::bundled())
            .as_str()
            .to_string()
    }

    #[test]
    fn full_domain_examples() {
        let d = full_domain("https://i.pinimg.com/236x/a.jpg").unwrap();
        assert_eq!(d.as_str(), "i.pinimg.com");
        assert!(!d.is_ip_literal());

        let d = full_domain("HTTP://EXAMPLE.COM:8080/x").unwrap();
        assert_eq!(d.as_str(), "example.com");

        let d = full_domain("https://192.0.2.7/a.png").unwrap();
        assert_eq!(d.as_str(), "192.0.2.7");
        assert!(d.is_ip_literal());
    }

    #[test]
    fn full_domain_ignores_everything_but_the_host() {
        let variants = [
            "https://img.example.com/a/b.png?q=1#frag",
            "http://img.example.com:80/other",
            "https://IMG.Example.com:443/",
        ];
        for v in variants {
            assert_eq!(full_domain(v).unwrap().as_str(), "img.example.com");
        }
        assert!(matches!(
            full_domain("data:text/plain,hello"),
            Err(DomainError::NoHost(_) | DomainError::InvalidUrl(_))
        ));
    }

    #[test]
    fn base_domain_trims_shard_prefixes() {
        assert_eq!(base_of("i-h1.pinimg.com"), "pinimg.com");
        assert_eq!(base_of("i.pinimg.com"), "pinimg.com");
        assert_eq!(base_of("pinimg.com"), "pinimg.com");
        assert_eq!(base_of("static.photos.example.co.uk"), "example.co.uk");
    }

    #[test]
    fn public_suffix_hosts_are_flagged_non_reducible() {
        let full = FullDomain::new("co.uk".to_string(), false);
        let b = base_domain(&full, SuffixRules::bundled());
        assert_eq!(b.as_str(), "co.uk");
        assert!(!b.is_reducible());

        let ip = FullDomain::new("192.0.2.7".to_string(), true);
        let b = base_domain(&ip, SuffixRules::bundled());
        assert_eq!(b.as_str(), "192.0.2.7");
        assert!(!b.is_reducible());
    }

    #[test]
    fn wildcard_and_exception_rules_apply() {
        // *.ck plus the !www.ck exception: any "<label>.ck" is a public
        // suffix, so one more label is needed to be registrable
        assert_eq!(base_of("a.b.ck"), "a.b.ck");
        assert_eq!(base_of("x.a.b.ck"), "a.b.ck");
        assert_eq!(base_of("www.ck"), "www.ck");
        assert_eq!(base_of("sub.www.ck"), "www.ck");
    }

    #[test]
    fn unknown_tld_defaults_to_last_two_labels() {
        assert_eq!(base_of("img.cdn.notarealtld"), "cdn.notarealtld");
    }

    #[test]
    fn minimal_mode_keeps_last_two_labels() {
        let rules = SuffixRules::minimal();
        let full = FullDomain::new("static.photos.example.co.uk".to_string(), false);
        assert_eq!(base_domain(&full, &rules).as_str(), "co.uk");
    }

    #[test]
    fn base_domain_is_idempotent() {
        let rules = SuffixRules::bundled();
        for host in [
            "i.pinimg.com",
            "a.b.c.example.co.uk",
            "www.ck",
            "only-label",
            "x.blogspot.example",
        ] {
            let once = base_domain(&FullDomain::new(host.to_string(), false), rules);
            let twice = base_domain(&FullDomain::new(once.as_str().to_string(), false), rules);
            assert_eq!(once.as_str(), twice.as_str(), "{host}");
        }
    }

    #[test]
    fn counts_aggregate_shards() {
        let mut counts = DomainCounts::default();
        let rules = SuffixRules::bundled();
        for _ in 0..3 {
            counts.add_url("https://i.pinimg.com/x.jpg", rules);
        }
        for _ in 0..2 {
            counts.add_url("https://i-h1.pinimg.com/y.jpg", rules);
        }
        assert_eq!(counts.by_base.get("pinimg.com"), Some(&5));
        assert_eq!(counts.full_by_base.get("pinimg.com").unwrap().len(), 2);
        assert_eq!(counts.by_full.get("i.pinimg.com"), Some(&3));
    }

    #[test]
    fn empty_stream_yields_empty_maps() {
        let counts = domain_counts(std::iter::empty(), SuffixRules::bundled());
        assert!(counts.by_base.is_empty());
        assert_eq!(counts.total(), 0);
        assert!(top_k(&counts, 10).is_empty());
    }

    #[test]
    fn top_k_orders_and_breaks_ties_lexicographically() {
        let mut counts = DomainCounts::default();
        counts.by_base.insert("b.com".into(), 5);
        counts.by_base.insert("a.com".into(), 5);
        counts.by_base.insert("c.com".into(), 1);
        let top = top_k(&counts, 2);
        assert_eq!(top[0].base_domain, "a.com");
        assert_eq!(top[1].base_domain, "b.com");
        assert!((top[0].share - 5.0 / 11.0).abs() < 1e-12);

        // k beyond the number of distinct domains returns everything
        assert_eq!(top_k(&counts, 10).len(), 3);
    }

    #[test]
    fn merge_is_order_independent() {
        let rules = SuffixRules::bundled();
        let urls = [
            "https://i.pinimg.com/1.jpg",
            "https://cdn.wp.com/2.jpg",
            "https://x.example.co.uk/3.jpg",
            "https://i-h1.pinimg.com/4.jpg",
        ];
        let mut left = DomainCounts::default();
        let mut right = DomainCounts::default();
        for (i, url) in urls.iter().enumerate() {
            if i % 2 == 0 {
                left.add_url(url, rules);
            } else {
                right.add_url(url, rules);
            }
        }
        let mut a = left.clone();
        a.merge(right.clone());
        let mut b = right;
        b.merge(left);
        assert_eq!(a, b);
    }
}
