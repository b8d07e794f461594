//! Chaff selection and the chaff utility audit.
//!
//! Selection walks ranked clusters top-down and harvests chaffs from them,
//! deliberately skipping the uninformative ones: the all-d cluster, any
//! cluster the caller marked as noise, and large-m clusters whose members
//! have too many orthogonal problems to pin down. Selection is
//! cluster-driven rather than raw-count-driven; ranking chaffs by match
//! count alone favors coarse chaffs and can leave whole subproblems
//! uncovered.

use crate::cluster::{Category, Cluster, WfeVector};
use crate::problems::ProblemSpec;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "cluster")]
pub enum Provenance {
    /// Harvested from a ranked cluster (by cluster id).
    Cluster(String),
    /// Supplied by the caller.
    Manual,
    /// Added by count-based fill or subproblem coverage.
    CoverageFill,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChaffPick {
    pub id: String,
    pub provenance: Provenance,
}

/// A deployable chaff suite; members are distinct mutant ids of the problem.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChaffSuite {
    pub problem: String,
    pub chaffs: Vec<ChaffPick>,
    /// Present when fewer than the requested number of chaffs exist.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shortfall: Option<String>,
}

impl ChaffSuite {
    pub fn ids(&self) -> Vec<String> {
        self.chaffs.iter().map(|c| c.id.clone()).collect()
    }

    pub fn contains(&self, id: &str) -> bool {
        self.chaffs.iter().any(|c| c.id == id)
    }
}

#[derive(Debug, Clone, Default)]
pub struct SelectOptions {
    /// Target suite size; the suite never exceeds it.
    pub n: usize,
    /// Cluster ids to skip as uninformative.
    pub skip: BTreeSet<String>,
    /// Guarantee at least one chaff per subproblem tag when possible.
    pub must_cover_subproblems: bool,
    /// Expert-chosen chaffs seeded into the suite first.
    pub include: Vec<String>,
}

#[derive(Debug, Error)]
pub enum SelectError {
    #[error("n must be at least 1")]
    ZeroTarget,
    #[error("`{0}` is not a mutant of problem `{1}`")]
    UnknownMutant(String, String),
    #[error("audit needs a nonempty WFE corpus")]
    EmptyCorpus,
    #[error("audit thresholds must satisfy 0 <= lo < hi <= 1, got lo={lo} hi={hi}")]
    BadThresholds { lo: f64, hi: f64 },
}

/// Per-mutant WFE match counts recovered from cluster sizes.
fn counts_from_clusters(clusters: &[Cluster], family_size: usize) -> Vec<usize> {
    let mut counts = vec![0usize; family_size];
    for c in clusters {
        for (i, &bit) in c.vector.bits().iter().enumerate() {
            if bit {
                counts[i] += c.size();
            }
        }
    }
    counts
}

pub fn select_chaffs(
    ranked_clusters: &[Cluster],
    problem: &ProblemSpec,
    options: &SelectOptions,
) -> Result<ChaffSuite, SelectError> {
    if options.n == 0 {
        return Err(SelectError::ZeroTarget);
    }
    let family = &problem.mutant_family;
    let counts = counts_from_clusters(ranked_clusters, family.len());
    // Candidate order within a cluster and for fills: most-matched first,
    // family order breaking ties.
    let by_count = |indices: &mut Vec<usize>| {
        indices.sort_by(|&x, &y| counts[y].cmp(&counts[x]).then(x.cmp(&y)));
    };

    let mut picks: Vec<ChaffPick> = Vec::new();
    let mut chosen: BTreeSet<usize> = BTreeSet::new();

    for id in &options.include {
        let idx = problem
            .mutant_index(id)
            .ok_or_else(|| SelectError::UnknownMutant(id.clone(), problem.name.clone()))?;
        if picks.len() >= options.n || chosen.contains(&idx) {
            continue;
        }
        chosen.insert(idx);
        picks.push(ChaffPick {
            id: id.clone(),
            provenance: Provenance::Manual,
        });
    }

    for cluster in ranked_clusters {
        if picks.len() >= options.n {
            break;
        }
        if cluster.vector.is_all_d()
            || options.skip.contains(&cluster.id)
            || cluster.category == Category::LargeM
        {
            continue;
        }
        let mut candidates: Vec<usize> = cluster
            .vector
            .bits()
            .iter()
            .enumerate()
            .filter(|(_, &bit)| bit)
            .map(|(i, _)| i)
            .collect();
        by_count(&mut candidates);
        if let Some(&idx) = candidates.iter().find(|i| !chosen.contains(i)) {
            chosen.insert(idx);
            picks.push(ChaffPick {
                id: family[idx].id.clone(),
                provenance: Provenance::Cluster(cluster.id.clone()),
            });
        }
    }

    // Cluster walk exhausted: top up with the most-matched unused chaffs.
    if picks.len() < options.n {
        let mut rest: Vec<usize> = (0..family.len())
            .filter(|i| !chosen.contains(i) && counts[*i] > 0)
            .collect();
        by_count(&mut rest);
        for idx in rest {
            if picks.len() >= options.n {
                break;
            }
            chosen.insert(idx);
            picks.push(ChaffPick {
                id: family[idx].id.clone(),
                provenance: Provenance::CoverageFill,
            });
        }
    }

    if options.must_cover_subproblems {
        cover_subproblems(&mut picks, &mut chosen, problem, &counts, options.n);
    }

    let shortfall = if picks.len() < options.n {
        Some(format!(
            "requested {} chaffs but only {} informative ones are available",
            options.n,
            picks.len()
        ))
    } else {
        None
    };
    Ok(ChaffSuite {
        problem: problem.name.clone(),
        chaffs: picks,
        shortfall,
    })
}

/// Ensures every subproblem tag named by the problem's functions appears in
/// the suite, appending while below the target size and otherwise replacing
/// the lowest-ranked removable pick.
fn cover_subproblems(
    picks: &mut Vec<ChaffPick>,
    chosen: &mut BTreeSet<usize>,
    problem: &ProblemSpec,
    counts: &[usize],
    n: usize,
) {
    let family = &problem.mutant_family;
    let tag_of = |id: &str| -> Option<String> {
        problem.mutant(id).and_then(|m| m.subproblem.clone())
    };
    let mut subproblems: Vec<String> = Vec::new();
    for f in &problem.functions {
        if !subproblems.contains(&f.subproblem) {
            subproblems.push(f.subproblem.clone());
        }
    }
    for tag in subproblems {
        let covered = picks.iter().any(|p| tag_of(&p.id).as_deref() == Some(&tag));
        if covered {
            continue;
        }
        let mut candidates: Vec<usize> = (0..family.len())
            .filter(|&i| !chosen.contains(&i) && family[i].subproblem.as_deref() == Some(&tag))
            .collect();
        candidates.sort_by(|&x, &y| counts[y].cmp(&counts[x]).then(x.cmp(&y)));
        let Some(&idx) = candidates.first() else {
            continue; // no chaff touches this subproblem at all
        };
        let pick = ChaffPick {
            id: family[idx].id.clone(),
            provenance: Provenance::CoverageFill,
        };
        if picks.len() < n {
            chosen.insert(idx);
            picks.push(pick);
            continue;
        }
        // Replace the last pick that is neither expert-chosen nor the sole
        // cover of its own subproblem.
        let removable = picks.iter().rposition(|p| {
            if p.provenance == Provenance::Manual {
                return false;
            }
            match tag_of(&p.id) {
                None => true,
                Some(own) => picks
                    .iter()
                    .filter(|q| q.id != p.id)
                    .any(|q| tag_of(&q.id).as_deref() == Some(&own)),
            }
        });
        if let Some(pos) = removable {
            if let Some(old) = problem.mutant_index(&picks[pos].id) {
                chosen.remove(&old);
            }
            chosen.insert(idx);
            picks[pos] = pick;
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct AuditThresholds {
    /// Pass rate at or above this flags the chaff as under-constrained.
    pub hi: f64,
    /// Pass rate at or below this flags it as over-constrained.
    pub lo: f64,
}

impl Default for AuditThresholds {
    fn default() -> AuditThresholds {
        AuditThresholds { hi: 0.8, lo: 0.01 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChaffFlag {
    Ok,
    /// Most WFEs pass it; too coarse, worth decomposing.
    UnderConstrained,
    /// Almost no WFE passes it; unproductive or off-target.
    OverConstrained,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditEntry {
    pub id: String,
    pub pass_rate: f64,
    pub flag: ChaffFlag,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChaffAudit {
    pub total_wfes: usize,
    pub entries: Vec<AuditEntry>,
}

/// Rates each deployed chaff by the share of WFEs that pass (match) it.
pub fn audit_chaffs(
    items: &[WfeVector],
    suite: &ChaffSuite,
    problem: &ProblemSpec,
    thresholds: AuditThresholds,
) -> Result<ChaffAudit, SelectError> {
    if items.is_empty() {
        return Err(SelectError::EmptyCorpus);
    }
    if !(0.0..=1.0).contains(&thresholds.lo)
        || !(0.0..=1.0).contains(&thresholds.hi)
        || thresholds.lo >= thresholds.hi
    {
        return Err(SelectError::BadThresholds {
            lo: thresholds.lo,
            hi: thresholds.hi,
        });
    }
    let total = items.len();
    let mut entries = Vec::new();
    for pick in &suite.chaffs {
        let idx = problem
            .mutant_index(&pick.id)
            .ok_or_else(|| SelectError::UnknownMutant(pick.id.clone(), problem.name.clone()))?;
        let matched = items.iter().filter(|item| item.vector.bit(idx)).count();
        let pass_rate = matched as f64 / total as f64;
        let flag = if pass_rate >= thresholds.hi {
            ChaffFlag::UnderConstrained
        } else if pass_rate <= thresholds.lo {
            ChaffFlag::OverConstrained
        } else {
            ChaffFlag::Ok
        };
        entries.push(AuditEntry {
            id: pick.id.clone(),
            pass_rate,
            flag,
        });
    }
    Ok(ChaffAudit {
        total_wfes: total,
        entries,
    })
}
