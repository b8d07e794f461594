//! Cohort-comparison statistics: two-tailed two-proportion Z test and
//! Cohen's D with a 95% confidence interval, plus the small-m rate the
//! comparisons consume.
//!
//! Far-tail p-values matter here; observed rate gaps can push |z| past 11,
//! where 1 - CDF(z) is numerically useless. The two-tailed p is therefore
//! computed as erfc(|z| / sqrt(2)), which stays accurate down past 1e-300.

use crate::cluster::WfeVector;
use serde::Serialize;
use std::f64::consts::SQRT_2;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZTestResult {
    pub z: f64,
    /// Two-tailed normal tail probability of |z|; 1 when z is 0.
    pub p: f64,
    pub rate1: f64,
    pub rate2: f64,
    pub n1: u64,
    pub n2: u64,
    /// Set when both cohorts have zero variance; z and p are pinned to 0, 1.
    pub degenerate: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EffectSize {
    pub d: f64,
    pub ci95: (f64, f64),
    /// Set when the pooled variance vanishes; d pins to 0.
    pub degenerate: bool,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum StatsError {
    #[error("cohort sizes must be at least 1")]
    EmptyCohort,
    #[error("successes exceed trials: {k} > {n}")]
    CountsExceedTrials { k: u64, n: u64 },
    #[error("effect size needs at least 3 samples in total")]
    TooFewSamples,
}

fn check_counts(k: u64, n: u64) -> Result<(), StatsError> {
    if n == 0 {
        return Err(StatsError::EmptyCohort);
    }
    if k > n {
        return Err(StatsError::CountsExceedTrials { k, n });
    }
    Ok(())
}

/// Two-tailed tail probability of the standard normal at `z`.
pub fn normal_two_tailed_p(z: f64) -> f64 {
    libm::erfc(z.abs() / SQRT_2)
}

/// Unpooled (Welch-style) two-proportion Z. Zero-variance inputs are a
/// defined, flagged result rather than an error.
pub fn two_proportion_z(k1: u64, n1: u64, k2: u64, n2: u64) -> Result<ZTestResult, StatsError> {
    check_counts(k1, n1)?;
    check_counts(k2, n2)?;
    let rate1 = k1 as f64 / n1 as f64;
    let rate2 = k2 as f64 / n2 as f64;
    let var = rate1 * (1.0 - rate1) / n1 as f64 + rate2 * (1.0 - rate2) / n2 as f64;
    if var == 0.0 {
        return Ok(ZTestResult {
            z: 0.0,
            p: 1.0,
            rate1,
            rate2,
            n1,
            n2,
            degenerate: true,
        });
    }
    let z = (rate1 - rate2) / var.sqrt();
    Ok(ZTestResult {
        z,
        p: normal_two_tailed_p(z),
        rate1,
        rate2,
        n1,
        n2,
        degenerate: false,
    })
}

/// Cohen's D over two Bernoulli cohorts: pooled standard deviation with
/// n-1 sample variances, CI95 = d ± 1.96 * sqrt((n1+n2)/(n1*n2) + d²/(2(n1+n2))).
pub fn cohens_d(k1: u64, n1: u64, k2: u64, n2: u64) -> Result<EffectSize, StatsError> {
    check_counts(k1, n1)?;
    check_counts(k2, n2)?;
    if n1 + n2 < 3 {
        return Err(StatsError::TooFewSamples);
    }
    let (n1f, n2f) = (n1 as f64, n2 as f64);
    let p1 = k1 as f64 / n1f;
    let p2 = k2 as f64 / n2f;
    // Sample variance of a 0/1 cohort: k(n-k) / (n(n-1)); a cohort of one
    // observation contributes zero variance over zero weight.
    let ss1 = if n1 > 1 { p1 * (1.0 - p1) * n1f / (n1f - 1.0) } else { 0.0 };
    let ss2 = if n2 > 1 { p2 * (1.0 - p2) * n2f / (n2f - 1.0) } else { 0.0 };
    let pooled = ((n1f - 1.0) * ss1 + (n2f - 1.0) * ss2) / (n1f + n2f - 2.0);
    if pooled <= 0.0 {
        return Ok(EffectSize {
            d: 0.0,
            ci95: (0.0, 0.0),
            degenerate: true,
        });
    }
    let d = (p1 - p2) / pooled.sqrt();
    let half_width =
        1.96 * ((n1f + n2f) / (n1f * n2f) + d * d / (2.0 * (n1f + n2f))).sqrt();
    Ok(EffectSize {
        d,
        ci95: (d - half_width, d + half_width),
        degenerate: false,
    })
}

/// `(k, n)`: WFEs whose vector has exactly 1 or 2 m-bits, out of all WFEs.
pub fn small_m_rate(items: &[WfeVector]) -> (usize, usize) {
    let k = items
        .iter()
        .filter(|item| matches!(item.vector.m_count(), 1 | 2))
        .count();
    (k, items.len())
}
