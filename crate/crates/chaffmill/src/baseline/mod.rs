//! Syntactic baseline clustering: Levenshtein distance over raw example
//! text, fed into affinity propagation. Exists to be beaten by the semantic
//! pipeline, and to show it mechanically: edit distance groups lines that
//! look similar, not lines that mean the same thing.

mod affinity;
mod levenshtein;

pub use affinity::{affinity_propagation, ApParams, BaselineClustering, SimilarityMatrix};
pub use levenshtein::levenshtein;

use crate::harness::WfeRecord;
use crate::par;

#[derive(Debug, Clone, Copy, Default)]
pub struct BaselineOptions {
    /// Collapse whitespace and lowercase before measuring distance.
    /// Off by default; distances run over the raw text.
    pub normalize: bool,
    pub params: ApParams,
}

fn normalize_text(s: &str) -> String {
    s.to_lowercase().split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Similarity = negative pairwise Levenshtein distance, preferences = median
/// off-diagonal similarity. Row construction is parallel; the matrix is
/// symmetric because the distance is.
pub fn similarity_matrix(texts: &[String], normalize: bool) -> SimilarityMatrix {
    let prepared: Vec<String> = if normalize {
        texts.iter().map(|t| normalize_text(t)).collect()
    } else {
        texts.to_vec()
    };
    let n = prepared.len();
    let rows = par::map_indexed(n, |i| {
        let mut row = vec![0.0f64; n];
        for (k, slot) in row.iter_mut().enumerate() {
            *slot = -(levenshtein(&prepared[i], &prepared[k]) as f64);
        }
        row
    });
    let mut sim = SimilarityMatrix::new(n, rows.into_iter().flatten().collect());
    let med = sim.median_off_diagonal();
    sim.set_preference(med);
    sim
}

/// Sequential twin of [`similarity_matrix`] for comparison benchmarks.
pub fn similarity_matrix_seq(texts: &[String], normalize: bool) -> SimilarityMatrix {
    let prepared: Vec<String> = if normalize {
        texts.iter().map(|t| normalize_text(t)).collect()
    } else {
        texts.to_vec()
    };
    let n = prepared.len();
    let mut s = vec![0.0f64; n * n];
    for i in 0..n {
        for k in 0..n {
            s[i * n + k] = -(levenshtein(&prepared[i], &prepared[k]) as f64);
        }
    }
    let mut sim = SimilarityMatrix::new(n, s);
    let med = sim.median_off_diagonal();
    sim.set_preference(med);
    sim
}

/// The whole baseline: distances over `raw_text`, then affinity propagation
/// with the default five-iteration stability criterion.
pub fn baseline_cluster(wfes: &[WfeRecord], options: BaselineOptions) -> BaselineClustering {
    assert!(!wfes.is_empty(), "baseline clustering needs at least one WFE");
    let texts: Vec<String> = wfes.iter().map(|w| w.example.raw_text.clone()).collect();
    let sim = similarity_matrix(&texts, options.normalize);
    affinity_propagation(&sim, options.params)
}
