//! Shared domain types for the audit pipeline. No I/O lives here.

use std::collections::BTreeMap;
use std::fmt;

use base64::Engine;
use serde::{Deserialize, Serialize};
use url::Url;

/// One released url-text record after validation.
///
/// All types in this module are immutable after construction and safe to
/// hand across worker threads.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sample {
    pub uid: String,
    /// Absolute src url pointing at the image asset.
    pub url: String,
    /// Alt text / caption; may be empty.
    pub caption: String,
    pub ocr_text: Option<String>,
    /// Image metadata as decoded key-value text.
    pub metadata: Option<BTreeMap<String, String>>,
    /// Raw image bytes or raw EXIF segment, when the release carries them.
    pub exif_raw: Option<Vec<u8>>,
}

/// The wire form of a record: one JSON object per line, or one CSV row.
/// `exif_raw` travels base64-encoded.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct RawRecord {
    #[serde(default)]
    pub uid: Option<String>,
    #[serde(default)]
    pub url: Option<String>,
    #[serde(default)]
    pub caption: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ocr_text: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metadata: Option<BTreeMap<String, String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exif_raw: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ValidateError {
    #[error("missing field: {0}")]
    MissingField(&'static str),
    #[error("invalid url: {0}")]
    InvalidUrl(String),
    #[error("invalid base64 in exif_raw: {0}")]
    InvalidBase64(String),
}

/// Validates a raw record into a [`Sample`]. Deterministic and total:
/// every record yields exactly one of `Ok(Sample)` or an error.
/// Unknown fields were already dropped during deserialization.
pub fn validate_sample(record: RawRecord) -> Result<Sample, ValidateError> {
    let uid = match record.uid {
        Some(u) if !u.is_empty() => u,
        _ => return Err(ValidateError::MissingField("uid")),
    };
    let url = match record.url {
        Some(u) if !u.is_empty() => u,
        _ => return Err(ValidateError::MissingField("url")),
    };
    let parsed = Url::parse(&url).map_err(|e| ValidateError::InvalidUrl(e.to_string()))?;
    if parsed.host_str().map_or(true, str::is_empty) {
        return Err(ValidateError::InvalidUrl(format!("no host in {url}")));
    }
    let exif_raw = match record.exif_raw {
        Some(b64) => Some(
            base64::engine::general_purpose::STANDARD
                .decode(b64.trim())
                .map_err(|e| ValidateError::InvalidBase64(e.to_string()))?,
        ),
        None => None,
    };
    Ok(Sample {
        uid,
        url,
        caption: record.caption.unwrap_or_default(),
        ocr_text: record.ocr_text,
        metadata: record.metadata,
        exif_raw,
    })
}

impl Sample {
    /// Wire form of this sample; round-trips through [`validate_sample`].
    pub fn to_raw(&self) -> RawRecord {
        RawRecord {
            uid: Some(self.uid.clone()),
            url: Some(self.url.clone()),
            caption: Some(self.caption.clone()),
            ocr_text: self.ocr_text.clone(),
            metadata: self.metadata.clone(),
            exif_raw: self
                .exif_raw
                .as_ref()
                .map(|b| base64::engine::general_purpose::STANDARD.encode(b)),
        }
    }
}

/// Which text channel a notice match came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    Caption,
    Ocr,
    Exif,
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Channel::Caption => write!(f, "caption"),
            Channel::Ocr => write!(f, "ocr"),
            Channel::Exif => write!(f, "exif"),
        }
    }
}

/// Category of a consent-signal match. The first three come from the
/// notice pattern set; `ExifCopyrightTag` marks a non-empty EXIF
/// copyright field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchCategory {
    CopyrightGeneral,
    CopyrightSymbol,
    CreativeCommons,
    ExifCopyrightTag,
}

impl fmt::Display for MatchCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MatchCategory::CopyrightGeneral => write!(f, "copyright_general"),
            MatchCategory::CopyrightSymbol => write!(f, "copyright_symbol"),
            MatchCategory::CreativeCommons => write!(f, "creative_commons"),
            MatchCategory::ExifCopyrightTag => write!(f, "exif_copyright_tag"),
        }
    }
}

/// One recorded signal: where it was found, what kind, and the matched text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConsentMatch {
    pub channel: Channel,
    pub category: MatchCategory,
    pub text: String,
}

/// Per-sample consent flags across the three channels.
///
/// Invariant: `caption_hit` is true iff `matches` contains at least one
/// entry with `channel == Caption`, and likewise for the other flags.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConsentFlags {
    pub caption_hit: bool,
    pub ocr_hit: bool,
    pub exif_hit: bool,
    pub matches: Vec<ConsentMatch>,
}

impl ConsentFlags {
    pub fn from_matches(matches: Vec<ConsentMatch>) -> Self {
        let caption_hit = matches.iter().any(|m| m.channel == Channel::Caption);
        let ocr_hit = matches.iter().any(|m| m.channel == Channel::Ocr);
        let exif_hit = matches.iter().any(|m| m.channel == Channel::Exif);
        ConsentFlags {
            caption_hit,
            ocr_hit,
            exif_hit,
            matches,
        }
    }

    pub fn any(&self) -> bool {
        self.caption_hit || self.ocr_hit || self.exif_hit
    }
}

/// Lowercased host of a src url, port removed. IP-literal hosts are kept
/// verbatim and marked non-reducible.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FullDomain {
    host: String,
    ip_literal: bool,
}

impl FullDomain {
    pub fn new(host: String, ip_literal: bool) -> Self {
        FullDomain { host, ip_literal }
    }

    pub fn as_str(&self) -> &str {
        &self.host
    }

    pub fn is_ip_literal(&self) -> bool {
        self.ip_literal
    }
}

impl fmt::Display for FullDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.host)
    }
}

/// Registrable domain: one label beyond the matched public suffix.
/// Hosts that are themselves a public suffix, and IP literals, are kept
/// unchanged and flagged non-reducible.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BaseDomain {
    name: String,
    reducible: bool,
}

impl BaseDomain {
    pub fn new(name: String, reducible: bool) -> Self {
        BaseDomain { name, reducible }
    }

    pub fn as_str(&self) -> &str {
        &self.name
    }

    /// False for IP literals and hosts that are themselves a public suffix.
    pub fn is_reducible(&self) -> bool {
        self.reducible
    }
}

impl fmt::Display for BaseDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

/// Allow/Disallow rule inside a robots.txt group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RuleKind {
    Allow,
    Disallow,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RobotsRule {
    pub kind: RuleKind,
    pub path: String,
}

/// One group: the agent tokens it names and its rules, in file order.
/// Agent tokens are stored case-preserved; matching is a classification
/// concern.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RobotsGroup {
    pub agent_tokens: Vec<String>,
    pub rules: Vec<RobotsRule>,
}

/// Parsed robots.txt. `fetched_from` / `fetched_at` are filled by the
/// fetch layer; bare parses leave them unset.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RobotsDoc {
    pub groups: Vec<RobotsGroup>,
    /// Directives outside the Allow/Disallow rule set (Crawl-delay,
    /// Sitemap, comments), kept verbatim with their line numbers.
    pub annotations: Vec<(usize, String)>,
    pub fetched_from: Option<String>,
    /// Unix seconds.
    pub fetched_at: Option<u64>,
    /// Hex sha-256 of the body text.
    pub body_hash: String,
}

/// The four-way classification of one (agent, robots.txt) pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    AllDisallowed,
    SomeDisallowed,
    NoneDisallowed,
    NotMentioned,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::AllDisallowed => write!(f, "all_disallowed"),
            Verdict::SomeDisallowed => write!(f, "some_disallowed"),
            Verdict::NoneDisallowed => write!(f, "none_disallowed"),
            Verdict::NotMentioned => write!(f, "not_mentioned"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AgentVerdict {
    pub agent: String,
    pub verdict: Verdict,
}

/// Codebook: core function of the data host.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TosCategory {
    Marketplace,
    CdnProvider,
    WebsiteHosting,
    BlogService,
    StockPhoto,
    ContentSharingCommunity,
    Other,
}

/// Codebook: permission granted to the end user.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TosLicenseType {
    PersonalNoncommercialResearch,
    ConditionalCommercial,
    OpenUnrestrictedCommercial,
    NotApplicable,
}

/// Codebook: restriction on web scraping.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TosScrapingPolicy {
    NoScrapingAndAi,
    NoScraping,
    NoAi,
    NoScrapingAndAiConditionally,
    NotMentioned,
}

impl TosCategory {
    pub fn label(&self) -> &'static str {
        match self {
            TosCategory::Marketplace => "Marketplace (E-commerce)",
            TosCategory::CdnProvider => "CDN Provider",
            TosCategory::WebsiteHosting => "Website Hosting Service",
            TosCategory::BlogService => "Blog Service",
            TosCategory::StockPhoto => "Stock Photo Platform",
            TosCategory::ContentSharingCommunity => "Content-sharing Community Platform",
            TosCategory::Other => "Other",
        }
    }
}

impl TosLicenseType {
    pub fn label(&self) -> &'static str {
        match self {
            TosLicenseType::PersonalNoncommercialResearch => "Personal/Noncommercial/Research Only",
            TosLicenseType::ConditionalCommercial => "Conditional Commercial Access",
            TosLicenseType::OpenUnrestrictedCommercial => "Open or Unrestricted Commercial Use",
            TosLicenseType::NotApplicable => "Not Applicable",
        }
    }
}

impl TosScrapingPolicy {
    pub fn label(&self) -> &'static str {
        match self {
            TosScrapingPolicy::NoScrapingAndAi => "No scraping and AI",
            TosScrapingPolicy::NoScraping => "No scraping",
            TosScrapingPolicy::NoAi => "No AI",
            TosScrapingPolicy::NoScrapingAndAiConditionally => "No scraping and AI conditionally",
            TosScrapingPolicy::NotMentioned => "Not Mentioned",
        }
    }
}

/// Per-base-domain human annotation from the codebook.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TosAnnotation {
    pub base_domain: String,
    pub category: TosCategory,
    pub license_type: TosLicenseType,
    pub scraping_policy: TosScrapingPolicy,
}

/// Confusion counts feeding accuracy/precision/recall/F1.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    pub fn_: u64,
}

impl ConfusionCounts {
    pub fn new(tp: u64, fp: u64, tn: u64, fn_: u64) -> Self {
        ConfusionCounts { tp, fp, tn, fn_ }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn raw(uid: &str, url: &str, caption: &str) -> RawRecord {
        RawRecord {
            uid: Some(uid.into()),
            url: Some(url.into()),
            caption: Some(caption.into()),
            ..Default::default()
        }
    }

    #[test]
    fn well_formed_record_validates() {
        let s = validate_sample(raw("a1", "https://i.pinimg.com/x.jpg", "hi")).unwrap();
        assert_eq!(s.uid, "a1");
        assert_eq!(s.url, "https://i.pinimg.com/x.jpg");
        assert_eq!(s.caption, "hi");
        assert!(s.ocr_text.is_none());
    }

    #[test]
    fn missing_url_is_rejected() {
        let mut r = raw("a2", "", "hi");
        r.url = None;
        assert_eq!(
            validate_sample(r),
            Err(ValidateError::MissingField("url"))
        );
    }

    #[test]
    fn missing_uid_is_rejected() {
        let mut r = raw("", "https://example.com/a", "hi");
        r.uid = None;
        assert_eq!(validate_sample(r), Err(ValidateError::MissingField("uid")));
        // empty string counts as missing too
        let r = raw("", "https://example.com/a", "hi");
        assert_eq!(validate_sample(r), Err(ValidateError::MissingField("uid")));
    }

    #[test]
    fn unparseable_url_is_rejected() {
        let err = validate_sample(raw("a3", "not a url", "")).unwrap_err();
        assert!(matches!(err, ValidateError::InvalidUrl(_)));
        // relative URL: no host
        let err = validate_sample(raw("a4", "/img/x.jpg", "")).unwrap_err();
        assert!(matches!(err, ValidateError::InvalidUrl(_)));
    }

    #[test]
    fn empty_caption_is_legal() {
        let s = validate_sample(raw("a5", "https://example.com/a.png", "")).unwrap();
        assert_eq!(s.caption, "");
    }

    #[test]
    fn wire_round_trip_preserves_all_fields() {
        let mut metadata = BTreeMap::new();
        metadata.insert("Copyright".to_string(), "© ACME 2020".to_string());
        let sample = Sample {
            uid: "u1".into(),
            url: "https://cdn.example.org/p/1.jpg".into(),
            caption: "a caption".into(),
            ocr_text: Some("© text".into()),
            metadata: Some(metadata),
            exif_raw: Some(vec![0x49, 0x49, 0x2a, 0x00]),
        };
        let line = serde_json::to_string(&sample.to_raw()).unwrap();
        let back: RawRecord = serde_json::from_str(&line).unwrap();
        assert_eq!(validate_sample(back).unwrap(), sample);
    }

    #[test]
    fn consent_flags_track_channels() {
        let flags = ConsentFlags::from_matches(vec![ConsentMatch {
            channel: Channel::Ocr,
            category: MatchCategory::CopyrightSymbol,
            text: "©".into(),
        }]);
        assert!(!flags.caption_hit);
        assert!(flags.ocr_hit);
        assert!(!flags.exif_hit);
        assert!(flags.any());
    }
}
