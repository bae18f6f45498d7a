//! Detection-evaluation math: confusion-derived rates, ROC-AUC, binomial
//! confidence intervals, and scale extrapolation. Everything here is a pure
//! function.

use serde::{Deserialize, Serialize};

use crate::model::ConfusionCounts;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MetricsError {
    #[error("confusion counts are all zero")]
    EmptyCounts,
    #[error("labels must contain at least one positive and one negative")]
    DegenerateLabels,
    #[error("confidence level must lie strictly between 0 and 1")]
    InvalidLevel,
    #[error("successes must not exceed trials and trials must be >= 1")]
    InvalidCounts,
    #[error("scores and labels differ in length")]
    LengthMismatch,
    #[error("score at index {0} is not finite")]
    NonFiniteScore(usize),
}

/// Rates derived from a confusion matrix. `precision` is undefined when
/// no positive predictions exist and `recall` when no positives exist;
/// `f1` requires both.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prf {
    pub accuracy: f64,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
}

pub fn prf(counts: ConfusionCounts) -> Result<Prf, MetricsError> {
    let total = counts.total();
    if total == 0 {
        return Err(MetricsError::EmptyCounts);
    }
    let accuracy = (counts.tp + counts.tn) as f64 / total as f64;
    let precision = match counts.tp + counts.fp {
        0 => None,
        d => Some(counts.tp as f64 / d as f64),
    };
    let recall = match counts.tp + counts.fn_ {
        0 => None,
        d => Some(counts.tp as f64 / d as f64),
    };
    let f1 = match (precision, recall) {
        (Some(p), Some(r)) if p + r > 0.0 => Some(2.0 * p * r / (p + r)),
        (Some(_), Some(_)) => Some(0.0),
        _ => None,
    };
    Ok(Prf {
        accuracy,
        precision,
        recall,
        f1,
    })
}

fn check_scores(scores: &[f64], labels: &[bool]) -> Result<(), MetricsError> {
    if scores.len() != labels.len() {
        return Err(MetricsError::LengthMismatch);
    }
    if let Some(i) = scores.iter().position(|s| !s.is_finite()) {
        return Err(MetricsError::NonFiniteScore(i));
    }
    let pos = labels.iter().filter(|&&l| l).count();
    if pos == 0 || pos == labels.len() {
        return Err(MetricsError::DegenerateLabels);
    }
    Ok(())
}

/// Tie-corrected area under the ROC curve: the probability that a random
/// positive outscores a random negative, counting ties as half. Computed
/// by rank summation in O(n log n).
pub fn roc_auc(scores: &[f64], labels: &[bool]) -> Result<f64, MetricsError> {
    check_scores(scores, labels)?;
    let n = scores.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| scores[a].partial_cmp(&scores[b]).unwrap());

    // Average ranks over tie runs (1-based).
    let mut ranks = vec![0.0f64; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        let avg = (i + 1 + j + 1) as f64 / 2.0;
        for &idx in &order[i..=j] {
            ranks[idx] = avg;
        }
        i = j + 1;
    }

    let n_pos = labels.iter().filter(|&&l| l).count() as f64;
    let n_neg = n as f64 - n_pos;
    let rank_sum: f64 = ranks
        .iter()
        .zip(labels)
        .filter(|(_, &l)| l)
        .map(|(r, _)| r)
        .sum();
    let u = rank_sum - n_pos * (n_pos + 1.0) / 2.0;
    Ok(u / (n_pos * n_neg))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CiMethod {
    Wald,
    Wilson,
}

impl std::str::FromStr for CiMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "wald" => Ok(CiMethod::Wald),
            "wilson" => Ok(CiMethod::Wilson),
            other => Err(format!("unknown ci method: {other}")),
        }
    }
}

/// Two-sided binomial proportion confidence interval.
pub fn binomial_ci(
    k: u64,
    n: u64,
    level: f64,
    method: CiMethod,
) -> Result<(f64, f64), MetricsError> {
    if !(level > 0.0 && level < 1.0) {
        return Err(MetricsError::InvalidLevel);
    }
    if n == 0 || k > n {
        return Err(MetricsError::InvalidCounts);
    }
    let nf = n as f64;
    let p = k as f64 / nf;
    let z = probit(1.0 - (1.0 - level) / 2.0);
    match method {
        CiMethod::Wald => {
            let half = z * (p * (1.0 - p) / nf).sqrt();
            Ok(((p - half).max(0.0), (p + half).min(1.0)))
        }
        CiMethod::Wilson => {
            let z2 = z * z;
            let denom = 1.0 + z2 / nf;
            let center = (p + z2 / (2.0 * nf)) / denom;
            let half = z * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt() / denom;
            Ok((center - half, center + half))
        }
    }
}

/// Confusion counts and rates at a fixed decision threshold; ties at the
/// threshold count as positive (`score >= threshold`).
pub fn threshold_metrics(
    scores: &[f64],
    labels: &[bool],
    threshold: f64,
) -> Result<(ConfusionCounts, Prf), MetricsError> {
    check_scores(scores, labels)?;
    let mut c = ConfusionCounts::default();
    for (&s, &l) in scores.iter().zip(labels) {
        match (s >= threshold, l) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, true) => c.fn_ += 1,
            (false, false) => c.tn += 1,
        }
    }
    let rates = prf(c)?;
    Ok((c, rates))
}

/// Linear scale extrapolation: `count * target_total / source_total`.
/// Callers must ensure `source_total > 0`; the result is an estimate under
/// a scale-stability assumption and reports should label it as such.
pub fn extrapolate(count: f64, source_total: f64, target_total: f64) -> f64 {
    debug_assert!(source_total > 0.0);
    count * target_total / source_total
}

/// Inverse standard-normal CDF via Acklam's rational approximation
/// (relative error below 1.2e-9, far tighter than any tolerance here).
fn probit(p: f64) -> f64 {
    debug_assert!(p > 0.0 && p < 1.0);
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383577518672690e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const P_LOW: f64 = 0.02425;

    if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -((((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0))
    }
}
