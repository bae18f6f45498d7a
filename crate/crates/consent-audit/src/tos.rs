//! Terms-of-Service annotation handling: codebook validation of human
//! annotations and sample-weighted attribute distributions. The tool never
//! annotates automatically; interpretation of ToS text stays human.

use std::collections::BTreeMap;
use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::model::{TosAnnotation, TosCategory, TosLicenseType, TosScrapingPolicy};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TosError {
    #[error("row {row}: unknown {field} value {value:?}")]
    UnknownEnumValue {
        row: u64,
        field: &'static str,
        value: String,
    },
    #[error("row {row}: duplicate domain {domain:?}")]
    DuplicateDomain { row: u64, domain: String },
    #[error("row {row}: {message}")]
    BadRow { row: u64, message: String },
    #[error("annotated domain {0:?} has no sample weight")]
    MissingWeight(String),
    #[error("io: {0}")]
    Io(String),
}

/// The three annotated attributes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TosAttribute {
    Category,
    LicenseType,
    ScrapingPolicy,
}

impl TosAttribute {
    pub fn name(&self) -> &'static str {
        match self {
            TosAttribute::Category => "category",
            TosAttribute::LicenseType => "license_type",
            TosAttribute::ScrapingPolicy => "scraping_policy",
        }
    }
}

fn fold(value: &str) -> String {
    value
        .chars()
        .filter(|c| c.is_ascii_alphanumeric())
        .collect::<String>()
        .to_ascii_lowercase()
}

fn parse_category(value: &str) -> Option<TosCategory> {
    match fold(value).as_str() {
        "marketplace" | "marketplaceecommerce" => Some(TosCategory::Marketplace),
        "cdnprovider" => Some(TosCategory::CdnProvider),
        "websitehostingservice" | "websitehosting" => Some(TosCategory::WebsiteHosting),
        "blogservice" | "blog" => Some(TosCategory::BlogService),
        "stockphotoplatform" | "stockphoto" => Some(TosCategory::StockPhoto),
        "contentsharingcommunityplatform" | "contentsharingcommunity" => {
            Some(TosCategory::ContentSharingCommunity)
        }
        "other" => Some(TosCategory::Other),
        _ => None,
    }
}

fn parse_license(value: &str) -> Option<TosLicenseType> {
    match fold(value).as_str() {
        "personalnoncommercialresearchonly" | "personalnoncommercialresearch" => {
            Some(TosLicenseType::PersonalNoncommercialResearch)
        }
        "conditionalcommercialaccess" | "conditionalcommercial" => {
            Some(TosLicenseType::ConditionalCommercial)
        }
        "openorunrestrictedcommercialuse" | "openunrestrictedcommercial" => {
            Some(TosLicenseType::OpenUnrestrictedCommercial)
        }
        "notapplicable" => Some(TosLicenseType::NotApplicable),
        _ => None,
    }
}

fn parse_scraping(value: &str) -> Option<TosScrapingPolicy> {
    match fold(value).as_str() {
        "noscrapingandai" => Some(TosScrapingPolicy::NoScrapingAndAi),
        "noscraping" => Some(TosScrapingPolicy::NoScraping),
        "noai" => Some(TosScrapingPolicy::NoAi),
        "noscrapingandaiconditionally" => Some(TosScrapingPolicy::NoScrapingAndAiConditionally),
        "notmentioned" => Some(TosScrapingPolicy::NotMentioned),
        _ => None,
    }
}

/// Loads a CSV of annotations (header `base_domain,category,license_type,
/// scraping_policy`). Enum strings are validated case-insensitively
/// against the codebook; duplicate domains are rejected.
pub fn load_annotations<R: Read>(reader: R) -> Result<BTreeMap<String, TosAnnotation>, TosError> {
    let mut csv_reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let mut out: BTreeMap<String, TosAnnotation> = BTreeMap::new();
    for (idx, record) in csv_reader.deserialize::<RawAnnotationRow>().enumerate() {
        let row = idx as u64 + 1;
        let raw = record.map_err(|e| TosError::BadRow {
            row,
            message: e.to_string(),
        })?;
        let domain = raw.base_domain.trim().to_ascii_lowercase();
        if domain.is_empty() {
            return Err(TosError::BadRow {
                row,
                message: "empty base_domain".to_string(),
            });
        }
        let category = parse_category(&raw.category).ok_or(TosError::UnknownEnumValue {
            row,
            field: "category",
            value: raw.category.clone(),
        })?;
        let license_type = parse_license(&raw.license_type).ok_or(TosError::UnknownEnumValue {
            row,
            field: "license_type",
            value: raw.license_type.clone(),
        })?;
        let scraping_policy =
            parse_scraping(&raw.scraping_policy).ok_or(TosError::UnknownEnumValue {
                row,
                field: "scraping_policy",
                value: raw.scraping_policy.clone(),
            })?;
        if out.contains_key(&domain) {
            return Err(TosError::DuplicateDomain { row, domain });
        }
        out.insert(
            domain.clone(),
            TosAnnotation {
                base_domain: domain,
                category,
                license_type,
                scraping_policy,
            },
        );
    }
    Ok(out)
}

#[derive(Debug, Deserialize)]
struct RawAnnotationRow {
    base_domain: String,
    category: String,
    license_type: String,
    scraping_policy: String,
}

/// One attribute value's sample-weighted share of the annotated population.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightedShare {
    pub value: String,
    pub weight: u64,
    pub share: f64,
}

/// Sample-weighted distribution of one attribute over the annotated
/// domains: share(v) = Σ counts of domains annotated v ÷ Σ counts of all
/// annotated domains. Unannotated domains are outside the population;
/// an annotated domain missing from the weights is an error.
pub fn weighted_distribution(
    annotations: &BTreeMap<String, TosAnnotation>,
    domain_counts: &BTreeMap<String, u64>,
    attribute: TosAttribute,
) -> Result<Vec<WeightedShare>, TosError> {
    let mut weights: BTreeMap<&'static str, u64> = BTreeMap::new();
    let mut total: u64 = 0;
    for (domain, annotation) in annotations {
        let count = *domain_counts
            .get(domain)
            .ok_or_else(|| TosError::MissingWeight(domain.clone()))?;
        total += count;
        let label = match attribute {
            TosAttribute::Category => annotation.category.label(),
            TosAttribute::LicenseType => annotation.license_type.label(),
            TosAttribute::ScrapingPolicy => annotation.scraping_policy.label(),
        };
        *weights.entry(label).or_insert(0) += count;
    }
    let mut shares: Vec<WeightedShare> = weights
        .into_iter()
        .map(|(value, weight)| WeightedShare {
            value: value.to_string(),
            weight,
            share: if total == 0 {
                0.0
            } else {
                weight as f64 / total as f64
            },
        })
        .collect();
    shares.sort_by(|a, b| b.weight.cmp(&a.weight).then_with(|| a.value.cmp(&b.value)));
    Ok(shares)
}
