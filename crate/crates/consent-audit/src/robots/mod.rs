//! Robots Exclusion Protocol auditing: parsing, per-agent classification,
//! the all-agents aggregation rule, and sample-weighted observation tables.

mod fetch;

pub use fetch::{sanitize_host, CacheEntry, CacheStatus, FetchOutcome, FetchPolicy, Fetcher, RobotsCache};

use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::model::{RobotsDoc, RobotsGroup, RobotsRule, RuleKind, Verdict};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RobotsError {
    #[error("robots.txt mentions no agents")]
    NoAgents,
}

/// URL a robots.txt is retrieved from: the scheme, the host (which may
/// carry an explicit port), and the fixed well-known path.
pub fn robots_url(host: &str, scheme: &str) -> String {
    format!("{scheme}://{host}/robots.txt")
}

/// How agent tokens are compared. `Exact` preserves case and is the
/// default for table reproduction (published tables list `claudebot` and
/// `ClaudeBot` as distinct rows); `CaseInsensitive` folds them together.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentMatch {
    Exact,
    CaseInsensitive,
}

fn token_matches(token: &str, agent: &str, mode: AgentMatch) -> bool {
    match mode {
        AgentMatch::Exact => token == agent,
        AgentMatch::CaseInsensitive => token.eq_ignore_ascii_case(agent),
    }
}

/// Line-oriented robots.txt parse. Consecutive `User-agent` lines open a
/// group and `Allow`/`Disallow` lines attach to it; other directives and
/// comments are preserved as annotations but excluded from the rules.
/// Arbitrary garbage yields an empty-group doc, never an error.
pub fn parse_robots(body: &str) -> RobotsDoc {
    let mut doc = RobotsDoc {
        groups: Vec::new(),
        annotations: Vec::new(),
        fetched_from: None,
        fetched_at: None,
        body_hash: hex_digest(body.as_bytes()),
    };
    let text = body.strip_prefix('\u{feff}').unwrap_or(body);
    // true while the last group is still accepting User-agent lines
    let mut accepting_agents = false;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('#') {
            doc.annotations.push((line_no, line.to_string()));
            continue;
        }
        let content = match line.find('#') {
            Some(i) => line[..i].trim_end(),
            None => line,
        };
        let Some(colon) = content.find(':') else {
            continue; // lines without a colon are ignored
        };
        let key = content[..colon].trim().to_ascii_lowercase();
        let value = content[colon + 1..].trim();
        match key.as_str() {
            "user-agent" => {
                if value.is_empty() {
                    continue;
                }
                if accepting_agents {
                    if let Some(group) = doc.groups.last_mut() {
                        group.agent_tokens.push(value.to_string());
                        continue;
                    }
                }
                doc.groups.push(RobotsGroup {
                    agent_tokens: vec![value.to_string()],
                    rules: Vec::new(),
                });
                accepting_agents = true;
            }
            "allow" | "disallow" => {
                let kind = if key == "allow" {
                    RuleKind::Allow
                } else {
                    RuleKind::Disallow
                };
                match doc.groups.last_mut() {
                    Some(group) => {
                        group.rules.push(RobotsRule {
                            kind,
                            path: value.to_string(),
                        });
                        accepting_agents = false;
                    }
                    // rules ahead of any group are dangling; keep the text
                    None => doc.annotations.push((line_no, content.to_string())),
                }
            }
            _ => doc.annotations.push((line_no, content.to_string())),
        }
    }
    doc
}

pub(crate) fn hex_digest(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let out = hasher.finalize();
    out.iter().map(|b| format!("{b:02x}")).collect()
}

/// Distinct agent tokens mentioned by the doc, normalized per the match
/// mode ("*" counts as an agent of its own).
pub fn mentioned_agents(doc: &RobotsDoc, mode: AgentMatch) -> BTreeSet<String> {
    let mut agents = BTreeSet::new();
    for group in &doc.groups {
        for token in &group.agent_tokens {
            match mode {
                AgentMatch::Exact => agents.insert(token.clone()),
                AgentMatch::CaseInsensitive => agents.insert(token.to_ascii_lowercase()),
            };
        }
    }
    agents
}

/// Classifies one agent against a parsed doc with case-insensitive token
/// matching (the published contract for single-agent queries).
pub fn classify_agent(doc: &RobotsDoc, agent: &str) -> Verdict {
    classify_agent_with(doc, agent, AgentMatch::CaseInsensitive)
}

/// Classification over the union of rules from every group naming the
/// agent: `AllDisallowed` iff a root `Disallow: /` exists with no Allow
/// rule; `NoneDisallowed` iff no Disallow with a non-empty path exists;
/// otherwise `SomeDisallowed`. An agent absent from every group is
/// `NotMentioned`; "*" is matched like any other token, never as a
/// fallback.
pub fn classify_agent_with(doc: &RobotsDoc, agent: &str, mode: AgentMatch) -> Verdict {
    let mut mentioned = false;
    let mut has_allow = false;
    let mut has_root_disallow = false;
    let mut has_nonempty_disallow = false;
    for group in &doc.groups {
        if !group
            .agent_tokens
            .iter()
            .any(|t| token_matches(t, agent, mode))
        {
            continue;
        }
        mentioned = true;
        for rule in &group.rules {
            match rule.kind {
                RuleKind::Allow => has_allow = true,
                RuleKind::Disallow => {
                    if rule.path == "/" {
                        has_root_disallow = true;
                    }
                    if !rule.path.is_empty() {
                        has_nonempty_disallow = true;
                    }
                }
            }
        }
    }
    if !mentioned {
        Verdict::NotMentioned
    } else if has_root_disallow && !has_allow {
        Verdict::AllDisallowed
    } else if !has_nonempty_disallow {
        Verdict::NoneDisallowed
    } else {
        Verdict::SomeDisallowed
    }
}

/// The all-agents aggregation rule: if every mentioned agent is
/// AllDisallowed the doc is AllDisallowed; else if any agent is All- or
/// SomeDisallowed the doc is SomeDisallowed; otherwise NoneDisallowed.
pub fn aggregate_all_agents(doc: &RobotsDoc, mode: AgentMatch) -> Result<Verdict, RobotsError> {
    let agents = mentioned_agents(doc, mode);
    if agents.is_empty() {
        return Err(RobotsError::NoAgents);
    }
    let verdicts: Vec<Verdict> = agents
        .iter()
        .map(|a| classify_agent_with(doc, a, mode))
        .collect();
    if verdicts.iter().all(|v| *v == Verdict::AllDisallowed) {
        Ok(Verdict::AllDisallowed)
    } else if verdicts
        .iter()
        .any(|v| matches!(v, Verdict::AllDisallowed | Verdict::SomeDisallowed))
    {
        Ok(Verdict::SomeDisallowed)
    } else {
        Ok(Verdict::NoneDisallowed)
    }
}

/// One full domain's contribution to the tally: its parsed robots.txt
/// (None when the fetch failed) and its sample count.
#[derive(Debug, Clone)]
pub struct DomainObservation {
    pub full_domain: String,
    pub doc: Option<RobotsDoc>,
    pub weight: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObservationRow {
    pub agent: String,
    pub observed: u64,
    pub all_disallowed: u64,
    pub some_disallowed: u64,
    pub none_disallowed: u64,
}

impl ObservationRow {
    fn add(&mut self, verdict: Verdict, weight: u64) {
        self.observed += weight;
        match verdict {
            Verdict::AllDisallowed => self.all_disallowed += weight,
            Verdict::SomeDisallowed => self.some_disallowed += weight,
            Verdict::NoneDisallowed => self.none_disallowed += weight,
            Verdict::NotMentioned => unreachable!("only mentioned agents are tallied"),
        }
    }

    pub fn all_disallowed_rate(&self) -> f64 {
        if self.observed == 0 {
            0.0
        } else {
            self.all_disallowed as f64 / self.observed as f64
        }
    }
}

/// Sample-weighted observation table. Row invariant:
/// `all + some + none == observed`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObservationTable {
    /// Agent rows, sorted by observed weight descending (ties break on the
    /// agent name).
    pub rows: Vec<ObservationRow>,
    /// Aggregation over every agent mentioned per doc.
    pub all_agents: ObservationRow,
    pub attempted_domains: u64,
    /// Domains whose robots.txt was fetched non-empty and parsed.
    pub successful_domains: u64,
    /// Total weight of samples contributing observations.
    pub observed_weight: u64,
    /// Weight of samples whose domain had no usable robots.txt (or one
    /// mentioning no agents), reported separately rather than redistributed.
    pub unattributed_weight: u64,
}

/// Tallies per-agent verdicts weighted by sample counts. A sample
/// contributes its weight to the row of every agent its domain's
/// robots.txt mentions; domains without a fetched robots.txt contribute to
/// no row.
pub fn tally(observations: &[DomainObservation], mode: AgentMatch) -> ObservationTable {
    let mut rows: BTreeMap<String, ObservationRow> = BTreeMap::new();
    let mut table = ObservationTable {
        all_agents: ObservationRow {
            agent: "All Agents".to_string(),
            ..Default::default()
        },
        ..Default::default()
    };
    for obs in observations {
        table.attempted_domains += 1;
        let Some(doc) = &obs.doc else {
            table.unattributed_weight += obs.weight;
            continue;
        };
        table.successful_domains += 1;
        let agents = mentioned_agents(doc, mode);
        if agents.is_empty() {
            table.unattributed_weight += obs.weight;
            continue;
        }
        table.observed_weight += obs.weight;
        let aggregate = aggregate_all_agents(doc, mode).expect("agents present");
        table.all_agents.add(aggregate, obs.weight);
        for agent in agents {
            let verdict = classify_agent_with(doc, &agent, mode);
            rows.entry(agent.clone())
                .or_insert_with(|| ObservationRow {
                    agent,
                    ..Default::default()
                })
                .add(verdict, obs.weight);
        }
    }
    let mut rows: Vec<ObservationRow> = rows.into_values().collect();
    rows.sort_by(|a, b| b.observed.cmp(&a.observed).then_with(|| a.agent.cmp(&b.agent)));
    table.rows = rows;
    table
}

/// Classifies and tallies every weighted host against a populated cache.
/// Hosts without a cached non-empty robots.txt contribute unattributed
/// weight. Iteration order is fixed by the sorted weight map, so the same
/// cache always produces the same table.
pub fn analyze_cache(
    cache: &RobotsCache,
    weights: &std::collections::BTreeMap<String, u64>,
    mode: AgentMatch,
) -> ObservationTable {
    let observations: Vec<DomainObservation> = weights
        .iter()
        .map(|(host, &weight)| {
            let doc = match cache.outcome(host) {
                Some(FetchOutcome::Success { body, final_url }) => {
                    let mut doc = parse_robots(&body);
                    doc.fetched_from = Some(final_url);
                    doc.fetched_at = cache.lookup(host).map(|e| e.fetched_at);
                    Some(doc)
                }
                _ => None,
            };
            DomainObservation {
                full_domain: host.clone(),
                doc,
                weight,
            }
        })
        .collect();
    tally(&observations, mode)
}

/// Named agents with an AI-purposed marker, used for report highlighting.
#[derive(Debug, Clone)]
pub struct AgentRegistry {
    agents: Vec<String>,
    ai_lower: HashSet<String>,
}

impl AgentRegistry {
    /// The studied agents from the published robots.txt tables; the AI
    /// markers mirror those tables.
    pub fn builtin() -> AgentRegistry {
        const AGENTS: &[(&str, bool)] = &[
            ("GPTBot", true),
            ("*", false),
            ("CCBot", true),
            ("Bytespider", true),
            ("googlebot-image", false),
            ("claudebot", true),
            ("Google-Extended", true),
            ("SentiBot", false),
            ("Baiduspider", false),
            ("FacebookBot", false),
            ("omgili", false),
            ("Amazonbot", false),
            ("omgilibot", false),
            ("Googlebot-Image", false),
            ("Bingbot", false),
            ("Mediapartners-Google*", false),
            ("GoogleContextual", false),
            ("Twitterbot", false),
            ("bingbot", false),
            ("ClaudeBot", true),
            ("Applebot-Extended", true),
            ("PetalBot", false),
            ("magpie-crawler", false),
            ("applebot", false),
            ("AdsBot-Google", false),
            ("Yandex", false),
            ("facebookexternalhit", false),
            ("AdIdxBot", false),
            ("Googlebot", false),
            ("Pinterestbot", false),
            ("ia_archiver", false),
            ("anthropic-ai", true),
            ("ImagesiftBot", false),
            ("meta-externalagent", true),
            ("PerplexityBot", false),
            ("MJ12bot", false),
        ];
        let mut agents = Vec::new();
        let mut ai_lower = HashSet::new();
        for (name, ai) in AGENTS {
            agents.push(name.to_string());
            if *ai {
                ai_lower.insert(name.to_ascii_lowercase());
            }
        }
        AgentRegistry { agents, ai_lower }
    }

    /// Parses an agent list: one agent per line, optionally suffixed with
    /// `,ai`. `#` lines are comments.
    pub fn parse(text: &str) -> AgentRegistry {
        let mut agents = Vec::new();
        let mut ai_lower = HashSet::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (name, ai) = match line.rsplit_once(',') {
                Some((name, marker)) if marker.trim().eq_ignore_ascii_case("ai") => {
                    (name.trim(), true)
                }
                _ => (line, false),
            };
            agents.push(name.to_string());
            if ai {
                ai_lower.insert(name.to_ascii_lowercase());
            }
        }
        AgentRegistry { agents, ai_lower }
    }

    pub fn agents(&self) -> &[String] {
        &self.agents
    }

    pub fn is_ai(&self, agent: &str) -> bool {
        self.ai_lower.contains(&agent.to_ascii_lowercase())
    }
}
