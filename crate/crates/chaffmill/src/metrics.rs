//! External cluster evaluation: homogeneity, completeness, V-Measure.
//!
//! Scores compare a clustering against ground-truth class labels via
//! conditional entropies of the joint class/cluster contingency counts.
//! Natural logs throughout; the measures are ratios of entropies, so the
//! base cancels. All three scores live in [0, 1].

use serde::Serialize;
use std::collections::BTreeMap;
use thiserror::Error;

/// Items with exactly one class label and one cluster id each.
#[derive(Debug, Clone, Default)]
pub struct LabeledPartition {
    items: Vec<(String, String, String)>,
}

impl LabeledPartition {
    pub fn new() -> LabeledPartition {
        LabeledPartition::default()
    }

    pub fn push(&mut self, item_id: &str, class_label: &str, cluster_id: &str) {
        self.items
            .push((item_id.to_string(), class_label.to_string(), cluster_id.to_string()));
    }

    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, &'a str)>) -> LabeledPartition {
        let mut part = LabeledPartition::new();
        for (i, (class, cluster)) in pairs.into_iter().enumerate() {
            part.push(&format!("item-{}", i), class, cluster);
        }
        part
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn items(&self) -> &[(String, String, String)] {
        &self.items
    }

    /// Class and cluster roles exchanged; completeness is homogeneity of
    /// the swapped partition.
    pub fn swapped(&self) -> LabeledPartition {
        LabeledPartition {
            items: self
                .items
                .iter()
                .map(|(id, class, cluster)| (id.clone(), cluster.clone(), class.clone()))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VScores {
    pub homogeneity: f64,
    pub completeness: f64,
    pub v_measure: f64,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MetricsError {
    #[error("cannot score an empty partition")]
    EmptyPartition,
}

fn entropy_from_counts<'a>(counts: impl Iterator<Item = &'a usize>, n: f64) -> f64 {
    let mut h = 0.0;
    for &c in counts {
        if c > 0 {
            let p = c as f64 / n;
            h -= p * p.ln();
        }
    }
    h
}

/// h = 1 - H(C|K)/H(C) and c = 1 - H(K|C)/H(K), with the convention that a
/// zero denominator yields a perfect score; V is their harmonic mean
/// (beta = 1), or 0 when both vanish.
pub fn v_measure(part: &LabeledPartition) -> Result<VScores, MetricsError> {
    if part.is_empty() {
        return Err(MetricsError::EmptyPartition);
    }
    let n = part.len() as f64;
    let mut joint: BTreeMap<(&str, &str), usize> = BTreeMap::new();
    let mut class_counts: BTreeMap<&str, usize> = BTreeMap::new();
    let mut cluster_counts: BTreeMap<&str, usize> = BTreeMap::new();
    for (_, class, cluster) in part.items() {
        *joint.entry((class, cluster)).or_insert(0) += 1;
        *class_counts.entry(class).or_insert(0) += 1;
        *cluster_counts.entry(cluster).or_insert(0) += 1;
    }

    let h_class = entropy_from_counts(class_counts.values(), n);
    let h_cluster = entropy_from_counts(cluster_counts.values(), n);

    // H(C|K) = -sum_{c,k} (n_ck / n) ln(n_ck / n_k), and symmetrically.
    let mut h_class_given_cluster = 0.0;
    let mut h_cluster_given_class = 0.0;
    for ((class, cluster), &count) in &joint {
        let p = count as f64 / n;
        let n_k = cluster_counts[cluster] as f64;
        let n_c = class_counts[class] as f64;
        h_class_given_cluster -= p * (count as f64 / n_k).ln();
        h_cluster_given_class -= p * (count as f64 / n_c).ln();
    }

    let homogeneity = if h_class == 0.0 {
        1.0
    } else {
        1.0 - h_class_given_cluster / h_class
    };
    let completeness = if h_cluster == 0.0 {
        1.0
    } else {
        1.0 - h_cluster_given_class / h_cluster
    };
    let v = if homogeneity + completeness == 0.0 {
        0.0
    } else {
        2.0 * homogeneity * completeness / (homogeneity + completeness)
    };
    Ok(VScores {
        homogeneity: homogeneity.clamp(0.0, 1.0),
        completeness: completeness.clamp(0.0, 1.0),
        v_measure: v.clamp(0.0, 1.0),
    })
}

pub fn homogeneity(part: &LabeledPartition) -> Result<f64, MetricsError> {
    v_measure(part).map(|s| s.homogeneity)
}

pub fn completeness(part: &LabeledPartition) -> Result<f64, MetricsError> {
    v_measure(part).map(|s| s.completeness)
}
