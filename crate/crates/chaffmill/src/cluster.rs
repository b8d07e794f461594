//! Semantic clustering: m/d feature vectors and equal-vector grouping.
//!
//! Bit i of a WFE's vector is m exactly when mutant i *passes* the WFE,
//! i.e. the mutant reproduces the incorrect expectation. Fail and error
//! outcomes are both d: a mutant that crashes on an input says nothing
//! about shared intent. Two WFEs share a cluster iff their vectors are
//! identical.

use crate::harness::WfeRecord;
use crate::par;
use crate::problems::{Evaluator, Outcome, ProblemSpec};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use thiserror::Error;

/// Fixed-length bit sequence over {m, d}; length equals the mutant family
/// size, order inherited from the problem.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FeatureVector(Vec<bool>);

impl FeatureVector {
    pub fn from_bits(bits: Vec<bool>) -> FeatureVector {
        FeatureVector(bits)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// True means m at position `i`.
    pub fn bit(&self, i: usize) -> bool {
        self.0[i]
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn m_count(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    pub fn is_all_d(&self) -> bool {
        self.m_count() == 0
    }

    /// Compact form, e.g. `ddmd`; used as a cluster id.
    pub fn compact(&self) -> String {
        self.0.iter().map(|&b| if b { 'm' } else { 'd' }).collect()
    }

    /// Space-separated form, e.g. `d d m d`, as reports print it.
    pub fn spaced(&self) -> String {
        let parts: Vec<&str> = self.0.iter().map(|&b| if b { "m" } else { "d" }).collect();
        parts.join(" ")
    }

    /// Accepts both the compact and the space-separated spelling.
    pub fn parse(s: &str) -> Option<FeatureVector> {
        let stripped: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if stripped.is_empty() {
            return None;
        }
        let mut bits = Vec::with_capacity(stripped.len());
        for c in stripped.chars() {
            match c {
                'm' => bits.push(true),
                'd' => bits.push(false),
                _ => return None,
            }
        }
        Some(FeatureVector(bits))
    }
}

impl fmt::Display for FeatureVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.spaced())
    }
}

impl Serialize for FeatureVector {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.spaced())
    }
}

impl<'de> Deserialize<'de> for FeatureVector {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        FeatureVector::parse(&s)
            .ok_or_else(|| serde::de::Error::custom(format!("bad feature vector {:?}", s)))
    }
}

/// A WFE paired with its vector; the unit most of the analysis consumes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WfeVector {
    pub wfe_id: String,
    pub student_id: String,
    pub vector: FeatureVector,
}

/// Runs one WFE against the whole mutant family.
pub fn featurize(eval: &Evaluator, wfe: &WfeRecord) -> FeatureVector {
    let bits = eval
        .problem()
        .mutant_family
        .iter()
        .map(|m| eval.run_example(m, &wfe.example).outcome == Outcome::Pass)
        .collect();
    FeatureVector(bits)
}

/// Featurizes a corpus; the WFE-by-mutant matrix is embarrassingly parallel
/// and output order follows input order.
pub fn featurize_corpus(eval: &Evaluator, wfes: &[WfeRecord]) -> Vec<WfeVector> {
    par::map_slice(wfes, |wfe| WfeVector {
        wfe_id: wfe.wfe_id.clone(),
        student_id: wfe.student_id.clone(),
        vector: featurize(eval, wfe),
    })
}

/// Sequential twin of [`featurize_corpus`]; exists so the two paths can be
/// compared directly in tests and benchmarks.
pub fn featurize_corpus_seq(eval: &Evaluator, wfes: &[WfeRecord]) -> Vec<WfeVector> {
    wfes.iter()
        .map(|wfe| WfeVector {
            wfe_id: wfe.wfe_id.clone(),
            student_id: wfe.student_id.clone(),
            vector: featurize(eval, wfe),
        })
        .collect()
}

/// Cluster category by m-bit count: 0, 1, 2–3, or 4+.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Category {
    NoM,
    OneM,
    SmallM,
    LargeM,
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Category::NoM => "no-m",
            Category::OneM => "one-m",
            Category::SmallM => "small-m",
            Category::LargeM => "large-m",
        };
        f.write_str(s)
    }
}

pub fn categorize(fv: &FeatureVector) -> Category {
    match fv.m_count() {
        0 => Category::NoM,
        1 => Category::OneM,
        2 | 3 => Category::SmallM,
        _ => Category::LargeM,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterMember {
    pub wfe_id: String,
    pub student_id: String,
}

/// An equal-vector group of WFEs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cluster {
    /// Compact vector string; doubles as the cluster id in reports.
    pub id: String,
    pub vector: FeatureVector,
    pub members: Vec<ClusterMember>,
    pub category: Category,
    /// Auto-filled for one-m clusters (the matching mutant's explanation);
    /// anything subtler is left for an expert to write.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub candidate_description: Option<String>,
}

impl Cluster {
    pub fn size(&self) -> usize {
        self.members.len()
    }

    pub fn distinct_students(&self) -> usize {
        self.members
            .iter()
            .map(|m| m.student_id.as_str())
            .collect::<BTreeSet<_>>()
            .len()
    }
}

#[derive(Debug, Error)]
pub enum ClusterError {
    #[error("mixed vector lengths: expected {expected}, found {found} for `{wfe_id}`")]
    MixedVectorLengths {
        expected: usize,
        found: usize,
        wfe_id: String,
    },
}

/// Size-descending order with a deterministic tie-break: fewer m-bits
/// first, then lexicographic vector (d before m).
fn cluster_order(a: &Cluster, b: &Cluster) -> std::cmp::Ordering {
    b.size()
        .cmp(&a.size())
        .then_with(|| a.vector.m_count().cmp(&b.vector.m_count()))
        .then_with(|| a.vector.cmp(&b.vector))
}

/// Partitions WFEs into equal-vector clusters; every WFE lands in exactly
/// one cluster. Vector lengths must agree with the problem's family size.
pub fn cluster_by_vector(
    items: &[WfeVector],
    problem: &ProblemSpec,
) -> Result<Vec<Cluster>, ClusterError> {
    let expected = problem.family_size();
    let mut groups: BTreeMap<&FeatureVector, Vec<ClusterMember>> = BTreeMap::new();
    for item in items {
        if item.vector.len() != expected {
            return Err(ClusterError::MixedVectorLengths {
                expected,
                found: item.vector.len(),
                wfe_id: item.wfe_id.clone(),
            });
        }
        groups.entry(&item.vector).or_default().push(ClusterMember {
            wfe_id: item.wfe_id.clone(),
            student_id: item.student_id.clone(),
        });
    }
    let mut clusters: Vec<Cluster> = groups
        .into_iter()
        .map(|(vector, members)| {
            let category = categorize(vector);
            let candidate_description = if category == Category::OneM {
                let idx = vector.bits().iter().position(|&b| b).expect("one m-bit");
                problem.mutant_family[idx].explanation.clone()
            } else {
                None
            };
            Cluster {
                id: vector.compact(),
                vector: vector.clone(),
                members,
                category,
                candidate_description,
            }
        })
        .collect();
    clusters.sort_by(cluster_order);
    Ok(clusters)
}

/// Ranking options; the default filters nothing.
#[derive(Debug, Clone, Default)]
pub struct RankOptions {
    /// Members belonging to these students are removed before ranking;
    /// outlier students can skew cluster sizes badly.
    pub exclude_students: BTreeSet<String>,
    /// Clusters with fewer distinct students than this are dropped.
    /// Zero and one mean no filtering.
    pub min_distinct_students: usize,
}

/// Filters and re-sorts clusters by descending size.
pub fn rank_clusters(clusters: Vec<Cluster>, options: &RankOptions) -> Vec<Cluster> {
    let mut ranked: Vec<Cluster> = clusters
        .into_iter()
        .filter_map(|mut c| {
            if !options.exclude_students.is_empty() {
                c.members
                    .retain(|m| !options.exclude_students.contains(&m.student_id));
            }
            if c.members.is_empty() {
                return None;
            }
            if options.min_distinct_students > 1
                && c.distinct_students() < options.min_distinct_students
            {
                return None;
            }
            Some(c)
        })
        .collect();
    ranked.sort_by(cluster_order);
    ranked
}

/// Per-mutant m counts; a WFE with k m-bits contributes to k counts.
pub fn per_chaff_counts(items: &[WfeVector], problem: &ProblemSpec) -> Vec<(String, usize)> {
    let mut counts = vec![0usize; problem.family_size()];
    for item in items {
        for (i, &bit) in item.vector.bits().iter().enumerate() {
            if bit {
                counts[i] += 1;
            }
        }
    }
    problem
        .mutant_family
        .iter()
        .zip(counts)
        .map(|(m, c)| (m.id.clone(), c))
        .collect()
}

/// The all-d / at-least-one-m split; all-d clusters carry no semantic
/// signal and are reported as a fraction instead.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SplitReport {
    pub total_wfes: usize,
    pub all_d_wfes: usize,
    pub all_d_fraction: f64,
    pub non_all_d_clusters: Vec<Cluster>,
}

pub fn split_report(clusters: &[Cluster]) -> SplitReport {
    let total: usize = clusters.iter().map(Cluster::size).sum();
    let all_d: usize = clusters
        .iter()
        .filter(|c| c.vector.is_all_d())
        .map(Cluster::size)
        .sum();
    SplitReport {
        total_wfes: total,
        all_d_wfes: all_d,
        all_d_fraction: if total == 0 { 0.0 } else { all_d as f64 / total as f64 },
        non_all_d_clusters: clusters
            .iter()
            .filter(|c| !c.vector.is_all_d())
            .cloned()
            .collect(),
    }
}
