//! robots.txt retrieval: per-host politeness gating, scheme fallback, and
//! a content-addressed snapshot cache that makes offline analysis runs
//! reproducible.

use std::collections::{BTreeMap, HashMap};
use std::io::Read;
use std::path::{Path, PathBuf};
use std::sync::{Condvar, Mutex};
use std::time::{Duration, Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use super::{hex_digest, robots_url};

const MAX_BODY_BYTES: u64 = 2 * 1024 * 1024;

#[derive(Debug, Clone)]
pub struct FetchPolicy {
    pub timeout: Duration,
    pub max_redirects: usize,
    pub per_host_delay: Duration,
    pub max_concurrency: usize,
    /// Scheme order; a host is retried on the next scheme only after an
    /// Unreachable outcome (an empty 200 body does not fall through).
    pub schemes: Vec<String>,
    /// Serve exclusively from the cache; misses come back Unreachable.
    pub offline: bool,
    /// Ignore existing cache entries and fetch anew.
    pub refresh: bool,
    /// Sent as the User-agent header and logged per fetch; identifying the
    /// tool honestly is itself a consent-relevant knob.
    pub user_agent: String,
}

impl Default for FetchPolicy {
    fn default() -> Self {
        FetchPolicy {
            timeout: Duration::from_secs(10),
            max_redirects: 5,
            per_host_delay: Duration::from_millis(500),
            max_concurrency: 8,
            schemes: vec!["https".to_string(), "http".to_string()],
            offline: false,
            refresh: false,
            user_agent: format!("consent-audit/{}", env!("CARGO_PKG_VERSION")),
        }
    }
}

/// Outcome of retrieving one host's robots.txt.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FetchOutcome {
    /// HTTP 200 with a non-empty body after whitespace trim.
    Success { body: String, final_url: String },
    /// HTTP 200 with an empty body.
    Empty,
    Unreachable { reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CacheStatus {
    Success,
    Empty,
    Unreachable,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheEntry {
    pub host: String,
    pub status: CacheStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub body_file: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub final_url: Option<String>,
    /// Unix seconds at fetch time.
    pub fetched_at: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub digest: Option<String>,
    pub user_agent: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

/// Snapshot cache on disk: `<dir>/<host>/<timestamp>-<digest>.txt` bodies
/// plus an `index.json` keyed by host.
#[derive(Debug)]
pub struct RobotsCache {
    dir: PathBuf,
    index: BTreeMap<String, CacheEntry>,
}

pub fn sanitize_host(host: &str) -> String {
    host.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '.' || c == '-' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

impl RobotsCache {
    pub fn open(dir: &Path) -> std::io::Result<RobotsCache> {
        std::fs::create_dir_all(dir)?;
        let index_path = dir.join("index.json");
        let index = if index_path.exists() {
            let text = std::fs::read_to_string(&index_path)?;
            serde_json::from_str(&text).map_err(|e| {
                std::io::Error::new(std::io::ErrorKind::InvalidData, e.to_string())
            })?
        } else {
            BTreeMap::new()
        };
        Ok(RobotsCache {
            dir: dir.to_path_buf(),
            index,
        })
    }

    pub fn lookup(&self, host: &str) -> Option<&CacheEntry> {
        self.index.get(host)
    }

    pub fn hosts(&self) -> impl Iterator<Item = &str> {
        self.index.keys().map(String::as_str)
    }

    pub fn read_body(&self, entry: &CacheEntry) -> std::io::Result<String> {
        let file = entry.body_file.as_ref().ok_or_else(|| {
            std::io::Error::new(std::io::ErrorKind::NotFound, "entry has no body file")
        })?;
        std::fs::read_to_string(self.dir.join(file))
    }

    /// Cached outcome for a host, rehydrating the body for successes.
    pub fn outcome(&self, host: &str) -> Option<FetchOutcome> {
        let entry = self.lookup(host)?;
        Some(match entry.status {
            CacheStatus::Success => match self.read_body(entry) {
                Ok(body) => FetchOutcome::Success {
                    body,
                    final_url: entry
                        .final_url
                        .clone()
                        .unwrap_or_else(|| robots_url(host, "https")),
                },
                Err(e) => FetchOutcome::Unreachable {
                    reason: format!("cache body unreadable: {e}"),
                },
            },
            CacheStatus::Empty => FetchOutcome::Empty,
            CacheStatus::Unreachable => FetchOutcome::Unreachable {
                reason: entry
                    .reason
                    .clone()
                    .unwrap_or_else(|| "unreachable (cached)".to_string()),
            },
        })
    }

    /// Writes the body file (successes only) and records the index entry.
    /// Returns the cache-write error message, if any; the entry is still
    /// recorded in memory so the run can continue.
    pub fn store(
        &mut self,
        host: &str,
        outcome: &FetchOutcome,
        fetched_at: u64,
        user_agent: &str,
    ) -> Option<String> {
        let mut write_error = None;
        let entry = match outcome {
            FetchOutcome::Success { body, final_url } => {
                let digest = hex_digest(body.as_bytes());
                let rel = format!(
                    "{}/{}-{}.txt",
                    sanitize_host(host),
                    fetched_at,
                    &digest[..12]
                );
                let path = self.dir.join(&rel);
                if let Err(e) = path
                    .parent()
                    .map(std::fs::create_dir_all)
                    .transpose()
                    .and_then(|_| std::fs::write(&path, body))
                {
                    write_error = Some(format!("cache write failed for {host}: {e}"));
                }
                CacheEntry {
                    host: host.to_string(),
                    status: CacheStatus::Success,
                    body_file: Some(rel),
                    final_url: Some(final_url.clone()),
                    fetched_at,
                    digest: Some(digest),
                    user_agent: user_agent.to_string(),
                    reason: None,
                }
            }
            FetchOutcome::Empty => CacheEntry {
                host: host.to_string(),
                status: CacheStatus::Empty,
                body_file: None,
                final_url: None,
                fetched_at,
                digest: None,
                user_agent: user_agent.to_string(),
                reason: None,
            },
            FetchOutcome::Unreachable { reason } => CacheEntry {
                host: host.to_string(),
                status: CacheStatus::Unreachable,
                body_file: None,
                final_url: None,
                fetched_at,
                digest: None,
                user_agent: user_agent.to_string(),
                reason: Some(reason.clone()),
            },
        };
        self.index.insert(host.to_string(), entry);
        write_error
    }

    /// Atomic index write (temp file + rename), keys sorted.
    pub fn save_index(&self) -> std::io::Result<()> {
        let text = serde_json::to_string_pretty(&self.index)?;
        let tmp = self.dir.join("index.json.tmp");
        std::fs::write(&tmp, text)?;
        std::fs::rename(&tmp, self.dir.join("index.json"))
    }

    /// Latest fetch time across the snapshot; reports stamp outputs with
    /// this instead of the wall clock so reruns stay byte-identical.
    pub fn snapshot_timestamp(&self) -> Option<u64> {
        self.index.values().map(|e| e.fetched_at).max()
    }
}

#[derive(Debug, Default)]
struct GateState {
    busy: bool,
    next_ok: Option<Instant>,
}

/// Per-host mutual exclusion with a minimum inter-request gap. `acquire`
/// blocks until the host is idle and its delay has elapsed.
struct HostGates {
    states: Mutex<HashMap<String, GateState>>,
    cv: Condvar,
}

impl HostGates {
    fn new() -> Self {
        HostGates {
            states: Mutex::new(HashMap::new()),
            cv: Condvar::new(),
        }
    }

    fn acquire(&self, host: &str) {
        let mut states = self.states.lock().unwrap();
        loop {
            let now = Instant::now();
            let state = states.entry(host.to_string()).or_default();
            if !state.busy {
                match state.next_ok {
                    Some(t) if t > now => {
                        let wait = t - now;
                        states = self.cv.wait_timeout(states, wait).unwrap().0;
                        continue;
                    }
                    _ => {
                        state.busy = true;
                        return;
                    }
                }
            }
            states = self.cv.wait(states).unwrap();
        }
    }

    fn release(&self, host: &str, delay: Duration) {
        let mut states = self.states.lock().unwrap();
        if let Some(state) = states.get_mut(host) {
            state.busy = false;
            state.next_ok = Some(Instant::now() + delay);
        }
        drop(states);
        self.cv.notify_all();
    }
}

pub struct Fetcher {
    policy: FetchPolicy,
    client: reqwest::blocking::Client,
    gates: HostGates,
}

impl Fetcher {
    pub fn new(policy: FetchPolicy) -> Result<Fetcher, reqwest::Error> {
        let client = reqwest::blocking::Client::builder()
            .timeout(policy.timeout)
            .connect_timeout(policy.timeout)
            .redirect(reqwest::redirect::Policy::limited(policy.max_redirects))
            .user_agent(policy.user_agent.clone())
            .build()?;
        Ok(Fetcher {
            policy,
            client,
            gates: HostGates::new(),
        })
    }

    pub fn policy(&self) -> &FetchPolicy {
        &self.policy
    }

    fn request(&self, url: &str) -> Result<FetchOutcome, String> {
        let response = self.client.get(url).send().map_err(|e| e.to_string())?;
        let status = response.status();
        let final_url = response.url().to_string();
        if status != reqwest::StatusCode::OK {
            return Err(format!("status {}", status.as_u16()));
        }
        let mut buf = Vec::new();
        response
            .take(MAX_BODY_BYTES)
            .read_to_end(&mut buf)
            .map_err(|e| e.to_string())?;
        let body = String::from_utf8_lossy(&buf).into_owned();
        if body.trim().is_empty() {
            Ok(FetchOutcome::Empty)
        } else {
            Ok(FetchOutcome::Success { body, final_url })
        }
    }

    /// Fetches one host's robots.txt, walking the scheme order. Every HTTP
    /// attempt holds the host gate and stamps the politeness delay on
    /// release, so scheme fallback also respects the per-host gap.
    pub fn fetch_robots(&self, host: &str) -> FetchOutcome {
        let mut last_reason = "no schemes configured".to_string();
        for scheme in &self.policy.schemes {
            let url = robots_url(host, scheme);
            self.gates.acquire(host);
            let result = self.request(&url);
            self.gates.release(host, self.policy.per_host_delay);
            match result {
                Ok(outcome) => return outcome,
                Err(reason) => last_reason = format!("{scheme}: {reason}"),
            }
        }
        FetchOutcome::Unreachable {
            reason: last_reason,
        }
    }

    /// Fetches a census of hosts on a bounded worker pool, recording every
    /// outcome in the cache. Cache-write errors are surfaced in the
    /// returned warnings; the run continues.
    pub fn fetch_many(
        &self,
        hosts: &[String],
        cache: &mut RobotsCache,
    ) -> (BTreeMap<String, FetchOutcome>, Vec<String>) {
        let mut results: BTreeMap<String, FetchOutcome> = BTreeMap::new();
        let mut warnings = Vec::new();

        if self.policy.offline {
            for host in hosts {
                let outcome = cache.outcome(host).unwrap_or(FetchOutcome::Unreachable {
                    reason: "offline: not in cache".to_string(),
                });
                results.insert(host.clone(), outcome);
            }
            return (results, warnings);
        }

        // Serve unexpired cache entries without touching the network.
        let mut to_fetch: Vec<String> = Vec::new();
        for host in hosts {
            if !self.policy.refresh {
                if let Some(outcome) = cache.outcome(host) {
                    results.insert(host.clone(), outcome);
                    continue;
                }
            }
            to_fetch.push(host.clone());
        }

        let fetched: Vec<(String, FetchOutcome, u64)> = std::thread::scope(|scope| {
            let (task_tx, task_rx) = crossbeam_channel::unbounded::<String>();
            let (out_tx, out_rx) = crossbeam_channel::unbounded();
            for host in &to_fetch {
                task_tx.send(host.clone()).unwrap();
            }
            drop(task_tx);
            for _ in 0..self.policy.max_concurrency.max(1) {
                let task_rx = task_rx.clone();
                let out_tx = out_tx.clone();
                scope.spawn(move || {
                    while let Ok(host) = task_rx.recv() {
                        let outcome = self.fetch_robots(&host);
                        let now = SystemTime::now()
                            .duration_since(UNIX_EPOCH)
                            .map(|d| d.as_secs())
                            .unwrap_or(0);
                        out_tx.send((host, outcome, now)).unwrap();
                    }
                });
            }
            drop(out_tx);
            out_rx.iter().collect()
        });

        for (host, outcome, fetched_at) in fetched {
            if let Some(err) = cache.store(&host, &outcome, fetched_at, &self.policy.user_agent) {
                warnings.push(err);
            }
            results.insert(host, outcome);
        }
        if let Err(e) = cache.save_index() {
            warnings.push(format!("index write failed: {e}"));
        }
        (results, warnings)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sanitize_host_keeps_names_and_masks_punctuation() {
        assert_eq!(sanitize_host("i.pinimg.com"), "i.pinimg.com");
        assert_eq!(sanitize_host("127.0.0.1:8080"), "127.0.0.1_8080");
        assert_eq!(sanitize_host("[::1]"), "___1_");
    }

    #[test]
    fn cache_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let mut cache = RobotsCache::open(dir.path()).unwrap();
        let outcome = FetchOutcome::Success {
            body: "User-agent: *\nDisallow:".to_string(),
            final_url: "https://h.example.com/robots.txt".to_string(),
        };
        assert_eq!(cache.store("h.example.com", &outcome, 1700000000, "ua"), None);
        cache
            .store(
                "down.example.com",
                &FetchOutcome::Unreachable {
                    reason: "status 404".into(),
                },
                1700000001,
                "ua",
            );
        cache.save_index().unwrap();

        let reopened = RobotsCache::open(dir.path()).unwrap();
        assert_eq!(reopened.outcome("h.example.com"), Some(outcome));
        assert!(matches!(
            reopened.outcome("down.example.com"),
            Some(FetchOutcome::Unreachable { .. })
        ));
        assert_eq!(reopened.outcome("absent.example.com"), None);
        assert_eq!(reopened.snapshot_timestamp(), Some(1700000001));
    }

    #[test]
    fn offline_fetch_only_serves_cache_hits() {
        let dir = tempfile::tempdir().unwrap();
        let mut cache = RobotsCache::open(dir.path()).unwrap();
        cache.store(
            "cached.example.com",
            &FetchOutcome::Empty,
            1700000000,
            "ua",
        );
        let fetcher = Fetcher::new(FetchPolicy {
            offline: true,
            ..FetchPolicy::default()
        })
        .unwrap();
        let hosts = vec![
            "cached.example.com".to_string(),
            "missing.example.com".to_string(),
        ];
        let (results, warnings) = fetcher.fetch_many(&hosts, &mut cache);
        assert!(warnings.is_empty());
        assert_eq!(results["cached.example.com"], FetchOutcome::Empty);
        assert!(matches!(
            &results["missing.example.com"],
            FetchOutcome::Unreachable { reason } if reason.contains("offline")
        ));
    }
}
