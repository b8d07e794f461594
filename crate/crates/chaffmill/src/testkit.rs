//! Independent oracles for tests and the acceptance suite. Everything here
//! recomputes results from first principles with deliberately naive code
//! and shares no internals with the implementations it checks. Compiled
//! only with the `testkit` feature; not part of the production surface.

use crate::metrics::{LabeledPartition, VScores};
use std::f64::consts::SQRT_2;

/// Brute-force homogeneity/completeness/V: entropies recomputed by
/// scanning the raw item list per label value, no contingency table.
pub fn v_measure_oracle(part: &LabeledPartition) -> VScores {
    let items = part.items();
    let n = items.len() as f64;
    assert!(!items.is_empty(), "oracle needs a nonempty partition");
    let mut classes: Vec<&str> = items.iter().map(|(_, c, _)| c.as_str()).collect();
    classes.sort_unstable();
    classes.dedup();
    let mut clusters: Vec<&str> = items.iter().map(|(_, _, k)| k.as_str()).collect();
    clusters.sort_unstable();
    clusters.dedup();

    let count_class = |c: &str| items.iter().filter(|(_, cc, _)| cc == c).count();
    let count_cluster = |k: &str| items.iter().filter(|(_, _, kk)| kk == k).count();
    let count_joint =
        |c: &str, k: &str| items.iter().filter(|(_, cc, kk)| cc == c && kk == k).count();

    // -(num/n) ln(num/den), with 0 ln 0 = 0.
    let plogp = |num: usize, den: usize| -> f64 {
        if num == 0 {
            0.0
        } else {
            let p = num as f64;
            -(p / n) * (p / den as f64).ln()
        }
    };

    let h_c: f64 = classes.iter().map(|c| plogp(count_class(c), items.len())).sum();
    let h_k: f64 = clusters.iter().map(|k| plogp(count_cluster(k), items.len())).sum();
    let mut h_c_given_k = 0.0;
    for k in &clusters {
        for c in &classes {
            h_c_given_k += plogp(count_joint(c, k), count_cluster(k));
        }
    }
    let mut h_k_given_c = 0.0;
    for c in &classes {
        for k in &clusters {
            h_k_given_c += plogp(count_joint(c, k), count_class(c));
        }
    }
    let h = if h_c == 0.0 { 1.0 } else { 1.0 - h_c_given_k / h_c };
    let c = if h_k == 0.0 { 1.0 } else { 1.0 - h_k_given_c / h_k };
    let v = if h + c == 0.0 { 0.0 } else { 2.0 * h * c / (h + c) };
    VScores {
        homogeneity: h,
        completeness: c,
        v_measure: v,
    }
}

/// Independent two-tailed normal tail probability: erf power series below
/// z = 3, the Mills-ratio continued fraction above. Accurate far past
/// 1e-300 and entirely erfc-free.
pub fn two_tailed_p_oracle(z: f64) -> f64 {
    let x = z.abs();
    if x == 0.0 {
        return 1.0;
    }
    if x < 3.0 {
        let t = x / SQRT_2;
        let mut term = t;
        let mut sum = t;
        let mut n = 0usize;
        while term.abs() > 1e-300 && n < 500 {
            n += 1;
            term *= -t * t / n as f64;
            sum += term / (2 * n + 1) as f64;
        }
        1.0 - 2.0 / std::f64::consts::PI.sqrt() * sum
    } else {
        let phi = (-x * x / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let mut cf = 0.0f64;
        for k in (1..=300).rev() {
            cf = k as f64 / (x + cf);
        }
        2.0 * phi / (x + cf)
    }
}

/// z, p, d, and CI bounds recomputed longhand from the count quadruple.
pub struct StatsOracle {
    pub z: f64,
    pub p: f64,
    pub d: f64,
    pub ci95: (f64, f64),
    pub degenerate: bool,
}

pub fn stats_oracle(k1: u64, n1: u64, k2: u64, n2: u64) -> StatsOracle {
    let (n1f, n2f) = (n1 as f64, n2 as f64);
    let p1 = k1 as f64 / n1f;
    let p2 = k2 as f64 / n2f;
    let var = p1 * (1.0 - p1) / n1f + p2 * (1.0 - p2) / n2f;
    if var == 0.0 {
        return StatsOracle {
            z: 0.0,
            p: 1.0,
            d: 0.0,
            ci95: (0.0, 0.0),
            degenerate: true,
        };
    }
    let z = (p1 - p2) / var.sqrt();
    let p = two_tailed_p_oracle(z);
    // Pooled SD over the two Bernoulli samples with n-1 variances.
    let ss1 = if n1 > 1 {
        (k1 as f64) * (n1f - k1 as f64) / (n1f * (n1f - 1.0))
    } else {
        0.0
    };
    let ss2 = if n2 > 1 {
        (k2 as f64) * (n2f - k2 as f64) / (n2f * (n2f - 1.0))
    } else {
        0.0
    };
    let pooled = ((n1f - 1.0) * ss1 + (n2f - 1.0) * ss2) / (n1f + n2f - 2.0);
    let (d, ci95, degenerate) = if pooled <= 0.0 {
        (0.0, (0.0, 0.0), true)
    } else {
        let d = (p1 - p2) / pooled.sqrt();
        let hw = 1.96 * ((n1f + n2f) / (n1f * n2f) + d * d / (2.0 * (n1f + n2f))).sqrt();
        (d, (d - hw, d + hw), false)
    };
    StatsOracle {
        z,
        p,
        d,
        ci95,
        degenerate,
    }
}
