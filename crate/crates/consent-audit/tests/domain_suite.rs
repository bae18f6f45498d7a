//! Registrable-domain reduction checked against a rule-iteration oracle
//! over the vendored snapshot, plus idempotence across a generated
//! hostname corpus.

use consent_audit::domains::{base_domain, full_domain, top_k, DomainCounts, SuffixRules};
use consent_audit::model::FullDomain;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Independent oracle: iterate every rule in the snapshot text, collect
/// the ones matching the host per the standard semantics, let exceptions
/// prevail and otherwise take the longest, then keep suffix + one label.
fn oracle_base_domain(host: &str, snapshot: &str) -> String {
    let host_labels: Vec<&str> = host.split('.').collect();
    let mut best_len: usize = 0; // labels in the winning public suffix
    let mut exception_hit: Option<usize> = None;

    for line in snapshot.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with("//") {
            continue;
        }
        let (is_exception, rule) = match line.strip_prefix('!') {
            Some(r) => (true, r),
            None => (false, line),
        };
        let rule_labels: Vec<&str> = rule.split('.').collect();
        if rule_labels.len() > host_labels.len() {
            continue;
        }
        let offset = host_labels.len() - rule_labels.len();
        let matches = rule_labels
            .iter()
            .zip(&host_labels[offset..])
            .all(|(r, h)| *r == "*" || r.eq_ignore_ascii_case(h));
        if !matches {
            continue;
        }
        if is_exception {
            exception_hit = Some(rule_labels.len() - 1);
        } else {
            best_len = best_len.max(rule_labels.len());
        }
    }

    let suffix_len = exception_hit.unwrap_or(if best_len == 0 { 1 } else { best_len });
    if suffix_len >= host_labels.len() {
        return host.to_string();
    }
    host_labels[host_labels.len() - suffix_len - 1..].join(".")
}

const SNAPSHOT_TEXT: &str =
    include_str!("../data/public_suffix_snapshot.dat");

fn corpus(seed: u64, n: usize) -> Vec<String> {
    const LABELS: &[&str] = &[
        "i", "img", "cdn", "static", "media", "a", "b-1", "x9", "photos", "shard", "eu-west",
    ];
    const APEXES: &[&str] = &[
        "pinimg", "example", "shopfront", "gallery", "stockpix", "weird", "acme", "files",
    ];
    const SUFFIXES: &[&str] = &[
        "com", "net", "org", "io", "co.uk", "ac.uk", "com.au", "co.jp", "com.br", "co.in",
        "co.nz", "com.tr", "ck", "b.ck", "www.ck", "kawasaki.jp", "city.kawasaki.jp",
        "notarealtld", "xyz", "co",
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let mut host = String::new();
            for _ in 0..rng.gen_range(0..3) {
                host.push_str(LABELS[rng.gen_range(0..LABELS.len())]);
                host.push('.');
            }
            if rng.gen_bool(0.8) {
                host.push_str(APEXES[rng.gen_range(0..APEXES.len())]);
                host.push('.');
            }
            host.push_str(SUFFIXES[rng.gen_range(0..SUFFIXES.len())]);
            host
        })
        .collect()
}

#[test]
fn reduction_matches_rule_iteration_oracle() {
    let rules = SuffixRules::bundled();
    for host in corpus(7, 10_000) {
        let full = FullDomain::new(host.clone(), false);
        let got = base_domain(&full, rules);
        let expected = oracle_base_domain(&host, SNAPSHOT_TEXT);
        assert_eq!(got.as_str(), expected, "host {host}");
    }
}

#[test]
fn reduction_is_idempotent_over_the_corpus() {
    let rules = SuffixRules::bundled();
    for host in corpus(13, 10_000) {
        let once = base_domain(&FullDomain::new(host.clone(), false), rules);
        let twice = base_domain(&FullDomain::new(once.as_str().to_string(), false), rules);
        assert_eq!(once.as_str(), twice.as_str(), "host {host}");
    }
}

#[test]
fn published_shard_examples_pass_verbatim() {
    let rules = SuffixRules::bundled();
    let full = full_domain("https://i.pinimg.com/236x/a.jpg").unwrap();
    assert_eq!(full.as_str(), "i.pinimg.com");
    assert_eq!(base_domain(&full, rules).as_str(), "pinimg.com");
    let full = full_domain("https://i-h1.pinimg.com/x.jpg").unwrap();
    assert_eq!(base_domain(&full, rules).as_str(), "pinimg.com");
    // multi-label public suffix against the snapshot
    let full = full_domain("https://static.photos.example.co.uk/i.png").unwrap();
    assert_eq!(base_domain(&full, rules).as_str(), "example.co.uk");
    assert_eq!(
        oracle_base_domain("static.photos.example.co.uk", SNAPSHOT_TEXT),
        "example.co.uk"
    );
}

#[test]
fn snapshot_declares_its_date() {
    let rules = SuffixRules::bundled();
    assert!(rules.snapshot_date().is_some(), "snapshot date must be documented");
    assert!(rules.rule_count() > 300);
}

#[test]
fn top_k_shares_cover_at_most_everything() {
    let rules = SuffixRules::bundled();
    let mut counts = DomainCounts::default();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for host in corpus(21, 5_000) {
        let copies = rng.gen_range(1..4);
        for i in 0..copies {
            counts.add_url(&format!("https://{host}/{i}.jpg"), rules);
        }
    }
    let top = top_k(&counts, 50);
    let share_sum: f64 = top.iter().map(|t| t.share).sum();
    assert!(share_sum <= 1.0 + 1e-9);
    for pair in top.windows(2) {
        assert!(pair[0].count >= pair[1].count, "counts non-increasing");
    }
}
