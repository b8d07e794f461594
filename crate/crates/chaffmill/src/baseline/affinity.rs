//! Affinity propagation with synchronous, damped message passing.
//!
//! Responsibility and availability updates follow the standard exemplar
//! message-passing rules. Iteration stops once exemplar assignments hold
//! still for `stable_window` consecutive iterations or at `max_iter`;
//! non-convergence is a reported state, not a failure. Updates are computed
//! cell-independently from the previous matrices with fixed summation
//! order, so results are identical across thread counts and builds.

use crate::par;
use serde::Serialize;

/// Pairwise similarities with per-point preferences on the diagonal.
#[derive(Debug, Clone)]
pub struct SimilarityMatrix {
    n: usize,
    s: Vec<f64>,
}

impl SimilarityMatrix {
    pub fn new(n: usize, s: Vec<f64>) -> SimilarityMatrix {
        assert_eq!(s.len(), n * n, "similarity matrix must be n x n");
        assert!(s.iter().all(|v| v.is_finite()), "similarities must be finite");
        SimilarityMatrix { n, s }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, k: usize) -> f64 {
        self.s[i * self.n + k]
    }

    fn set(&mut self, i: usize, k: usize, v: f64) {
        self.s[i * self.n + k] = v;
    }

    /// Sets every diagonal entry to `preference`.
    pub fn set_preference(&mut self, preference: f64) {
        for i in 0..self.n {
            self.set(i, i, preference);
        }
    }

    /// Median of the off-diagonal similarities; the usual preference default.
    pub fn median_off_diagonal(&self) -> f64 {
        let mut vals = Vec::with_capacity(self.n * self.n - self.n);
        for i in 0..self.n {
            for k in 0..self.n {
                if i != k {
                    vals.push(self.get(i, k));
                }
            }
        }
        if vals.is_empty() {
            return 0.0;
        }
        vals.sort_by(f64::total_cmp);
        let mid = vals.len() / 2;
        if vals.len() % 2 == 1 {
            vals[mid]
        } else {
            (vals[mid - 1] + vals[mid]) / 2.0
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ApParams {
    /// In [0.5, 1); the share of the old message kept each update.
    pub damping: f64,
    pub max_iter: usize,
    /// Consecutive iterations the assignment must hold still.
    pub stable_window: usize,
}

impl Default for ApParams {
    fn default() -> ApParams {
        ApParams {
            damping: 0.5,
            max_iter: 1000,
            stable_window: 5,
        }
    }
}

/// Exemplar assignment per point; every assigned exemplar maps to itself.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BaselineClustering {
    pub exemplar_of: Vec<usize>,
    pub iterations_run: usize,
    pub converged: bool,
}

impl BaselineClustering {
    pub fn exemplars(&self) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .exemplar_of
            .iter()
            .enumerate()
            .filter(|(i, &e)| *i == e)
            .map(|(i, _)| i)
            .collect();
        out.sort_unstable();
        out
    }

    pub fn cluster_count(&self) -> usize {
        self.exemplars().len()
    }
}

fn argmax_tie_lowest(values: impl Iterator<Item = f64>) -> usize {
    let mut best = f64::NEG_INFINITY;
    let mut best_idx = 0;
    for (i, v) in values.enumerate() {
        if v > best {
            best = v;
            best_idx = i;
        }
    }
    best_idx
}

fn hash_unit(x: u64) -> f64 {
    // splitmix64 finalizer; uniform-ish in [0, 1).
    let mut z = x.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    ((z ^ (z >> 31)) >> 11) as f64 / (1u64 << 53) as f64
}

/// Symmetric similarity data makes message passing degenerate: evidence
/// splits exactly and every point drifts toward electing itself. A fixed
/// sub-1e-11 jitter (a hash of the cell index, no RNG state) breaks the
/// ties without disturbing any non-tied decision, and keeps runs
/// bit-reproducible. Preferences are jittered strictly downward so that a
/// complete tie resolves toward fewer exemplars, not one per point.
fn jittered(sim: &SimilarityMatrix) -> SimilarityMatrix {
    let n = sim.n();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        for k in 0..n {
            lo = lo.min(sim.get(i, k));
            hi = hi.max(sim.get(i, k));
        }
    }
    let scale = (hi - lo).max(1.0) * 1e-12;
    let mut s = Vec::with_capacity(n * n);
    for i in 0..n {
        for k in 0..n {
            let noise = hash_unit((i * n + k) as u64);
            if i == k {
                s.push(sim.get(i, k) - scale * (1.0 + noise));
            } else {
                s.push(sim.get(i, k) + scale * noise);
            }
        }
    }
    SimilarityMatrix::new(n, s)
}

/// Final message state; kept separate so tests can check the termination
/// invariants directly on the responsibility/availability sums.
struct Messages {
    r: Vec<f64>,
    a: Vec<f64>,
    assignment: Vec<usize>,
    iterations: usize,
    converged: bool,
}

fn message_passing(sim: &SimilarityMatrix, params: ApParams) -> Messages {
    let n = sim.n();
    let lam = params.damping;
    let mut r = vec![0.0f64; n * n];
    let mut a = vec![0.0f64; n * n];
    let mut assignment: Vec<usize> = (0..n).collect();
    let mut streak = 0usize;
    let mut iterations = 0usize;
    let mut converged = false;

    for iter in 1..=params.max_iter {
        iterations = iter;

        // r(i,k) = s(i,k) - max_{k' != k} (a(i,k') + s(i,k'))
        let new_r: Vec<f64> = {
            let a = &a;
            par::map_indexed(n, |i| {
                let mut top = f64::NEG_INFINITY;
                let mut second = f64::NEG_INFINITY;
                let mut top_k = usize::MAX;
                for k in 0..n {
                    let v = a[i * n + k] + sim.get(i, k);
                    if v > top {
                        second = top;
                        top = v;
                        top_k = k;
                    } else if v > second {
                        second = v;
                    }
                }
                let mut row = vec![0.0f64; n];
                for (k, slot) in row.iter_mut().enumerate() {
                    let competing = if k == top_k { second } else { top };
                    *slot = sim.get(i, k) - competing;
                }
                row
            })
            .into_iter()
            .flatten()
            .collect()
        };
        for (old, new) in r.iter_mut().zip(new_r) {
            *old = lam * *old + (1.0 - lam) * new;
        }

        // a(i,k) = min(0, r(k,k) + sum_{i' not in {i,k}} max(0, r(i',k)))
        // a(k,k) = sum_{i' != k} max(0, r(i',k))
        let col_pos_sum: Vec<f64> = {
            let r = &r;
            par::map_indexed(n, |k| {
                let mut sum = 0.0f64;
                for i in 0..n {
                    sum += r[i * n + k].max(0.0);
                }
                sum
            })
        };
        let new_a: Vec<f64> = {
            let r = &r;
            let col = &col_pos_sum;
            par::map_indexed(n, |i| {
                let mut row = vec![0.0f64; n];
                for (k, slot) in row.iter_mut().enumerate() {
                    let rkk = r[k * n + k];
                    if i == k {
                        *slot = col[k] - rkk.max(0.0);
                    } else {
                        let sum = col[k] - r[i * n + k].max(0.0) - rkk.max(0.0);
                        *slot = (rkk + sum).min(0.0);
                    }
                }
                row
            })
            .into_iter()
            .flatten()
            .collect()
        };
        for (old, new) in a.iter_mut().zip(new_a) {
            *old = lam * *old + (1.0 - lam) * new;
        }

        let next: Vec<usize> = (0..n)
            .map(|i| argmax_tie_lowest((0..n).map(|k| a[i * n + k] + r[i * n + k])))
            .collect();
        // Stability only counts once somebody elects itself; early
        // iterations have momentarily-still assignments with no exemplar
        // evidence at all.
        let has_exemplar = next.iter().enumerate().any(|(i, &e)| i == e);
        if has_exemplar && next == assignment {
            streak += 1;
            if streak >= params.stable_window {
                converged = true;
                assignment = next;
                break;
            }
        } else {
            streak = 0;
        }
        assignment = next;
    }

    Messages {
        r,
        a,
        assignment,
        iterations,
        converged,
    }
}

pub fn affinity_propagation(sim: &SimilarityMatrix, params: ApParams) -> BaselineClustering {
    assert!(
        (0.5..1.0).contains(&params.damping),
        "damping must lie in [0.5, 1)"
    );
    let n = sim.n();
    assert!(n >= 1, "at least one point required");
    if n == 1 {
        return BaselineClustering {
            exemplar_of: vec![0],
            iterations_run: 0,
            converged: true,
        };
    }
    let sim = jittered(sim);
    let messages = message_passing(&sim, params);
    let Messages {
        r,
        a,
        assignment,
        iterations,
        converged,
    } = messages;

    // Self-electing points are the exemplars; everyone else joins the
    // exemplar with maximal evidence.
    let mut exemplars: Vec<usize> = (0..n).filter(|&i| assignment[i] == i).collect();
    if exemplars.is_empty() {
        let forced = argmax_tie_lowest((0..n).map(|k| a[k * n + k] + r[k * n + k]));
        exemplars = vec![forced];
    }
    let exemplar_of: Vec<usize> = (0..n)
        .map(|i| {
            if exemplars.contains(&i) {
                return i;
            }
            if exemplars.contains(&assignment[i]) {
                return assignment[i];
            }
            *exemplars
                .iter()
                .max_by(|&&x, &&y| {
                    (a[i * n + x] + r[i * n + x]).total_cmp(&(a[i * n + y] + r[i * n + y]))
                })
                .expect("nonempty exemplar set")
        })
        .collect();

    BaselineClustering {
        exemplar_of,
        iterations_run: iterations,
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sim_from_distances(d: &[Vec<f64>]) -> SimilarityMatrix {
        let n = d.len();
        let mut s = vec![0.0; n * n];
        for i in 0..n {
            for k in 0..n {
                s[i * n + k] = -d[i][k];
            }
        }
        let mut sim = SimilarityMatrix::new(n, s);
        let med = sim.median_off_diagonal();
        sim.set_preference(med);
        sim
    }

    #[test]
    fn singleton_is_its_own_exemplar() {
        let sim = SimilarityMatrix::new(1, vec![0.0]);
        let out = affinity_propagation(&sim, ApParams::default());
        assert_eq!(out.exemplar_of, vec![0]);
        assert!(out.converged);
    }

    /// Net similarity of an exemplar choice: each exemplar contributes its
    /// preference, every other point its similarity to the nearest exemplar.
    fn net_similarity(sim: &SimilarityMatrix, exemplars: &[usize]) -> f64 {
        let mut total = 0.0;
        for i in 0..sim.n() {
            if exemplars.contains(&i) {
                total += sim.get(i, i);
            } else {
                total += exemplars
                    .iter()
                    .map(|&e| sim.get(i, e))
                    .fold(f64::NEG_INFINITY, f64::max);
            }
        }
        total
    }

    /// Exhaustive search over all nonempty exemplar subsets.
    fn best_exemplar_sets(sim: &SimilarityMatrix) -> (f64, Vec<Vec<usize>>) {
        let n = sim.n();
        let mut best = f64::NEG_INFINITY;
        let mut argbest = Vec::new();
        for mask in 1u32..(1 << n) {
            let exemplars: Vec<usize> = (0..n).filter(|&i| mask & (1 << i) != 0).collect();
            let value = net_similarity(sim, &exemplars);
            if value > best + 1e-9 {
                best = value;
                argbest = vec![exemplars];
            } else if (value - best).abs() <= 1e-9 {
                argbest.push(exemplars);
            }
        }
        (best, argbest)
    }

    #[test]
    fn two_well_separated_groups_become_two_clusters() {
        // Points 0-2 are near-identical, 3-5 likewise, with a wide gap.
        let d = vec![
            vec![0.0, 1.0, 1.0, 20.0, 21.0, 20.0],
            vec![1.0, 0.0, 1.0, 21.0, 20.0, 20.0],
            vec![1.0, 1.0, 0.0, 20.0, 20.0, 21.0],
            vec![20.0, 21.0, 20.0, 0.0, 1.0, 1.0],
            vec![21.0, 20.0, 20.0, 1.0, 0.0, 1.0],
            vec![20.0, 20.0, 21.0, 1.0, 1.0, 0.0],
        ];
        let sim = sim_from_distances(&d);
        // Brute force confirms a 2-exemplar configuration (one per group)
        // maximizes net similarity before trusting the message passing.
        let (best, argbest) = best_exemplar_sets(&sim);
        assert!(argbest.iter().all(|e| e.len() == 2));
        assert!(argbest.iter().all(|e| e[0] < 3 && e[1] >= 3));

        let out = affinity_propagation(&sim, ApParams::default());
        assert!(out.converged, "should converge quickly on separated data");
        assert_eq!(out.cluster_count(), 2);
        // Each group shares one exemplar and the groups do not mix.
        assert_eq!(out.exemplar_of[0], out.exemplar_of[1]);
        assert_eq!(out.exemplar_of[1], out.exemplar_of[2]);
        assert_eq!(out.exemplar_of[3], out.exemplar_of[4]);
        assert_eq!(out.exemplar_of[4], out.exemplar_of[5]);
        assert_ne!(out.exemplar_of[0], out.exemplar_of[3]);
        // The found configuration attains the brute-force optimum.
        assert!((net_similarity(&sim, &out.exemplars()) - best).abs() <= 1e-9);
    }

    #[test]
    fn members_attach_to_their_maximal_evidence_exemplar() {
        let d = vec![
            vec![0.0, 1.0, 1.5, 20.0, 21.0, 20.5],
            vec![1.0, 0.0, 1.2, 21.0, 20.0, 20.2],
            vec![1.5, 1.2, 0.0, 20.0, 20.3, 21.0],
            vec![20.0, 21.0, 20.0, 0.0, 1.0, 1.3],
            vec![21.0, 20.0, 20.3, 1.0, 0.0, 1.1],
            vec![20.5, 20.2, 21.0, 1.3, 1.1, 0.0],
        ];
        let sim = sim_from_distances(&d);
        let out = affinity_propagation(&sim, ApParams::default());
        assert!(out.converged);
        // At termination each point's chosen exemplar carries the maximal
        // availability + responsibility in its row.
        let jittered = super::jittered(&sim);
        let messages = super::message_passing(&jittered, ApParams::default());
        let n = sim.n();
        for i in 0..n {
            let e = out.exemplar_of[i];
            let evidence = |k: usize| messages.a[i * n + k] + messages.r[i * n + k];
            let row_max = (0..n).map(evidence).fold(f64::NEG_INFINITY, f64::max);
            assert!(
                evidence(e) >= row_max - 1e-9,
                "point {} attached to {} with evidence {} < row max {}",
                i,
                e,
                evidence(e),
                row_max
            );
        }
    }

    #[test]
    fn deterministic_across_runs() {
        let d = vec![
            vec![0.0, 2.0, 9.0, 7.0],
            vec![2.0, 0.0, 8.0, 6.0],
            vec![9.0, 8.0, 0.0, 3.0],
            vec![7.0, 6.0, 3.0, 0.0],
        ];
        let sim = sim_from_distances(&d);
        let first = affinity_propagation(&sim, ApParams::default());
        for _ in 0..3 {
            assert_eq!(affinity_propagation(&sim, ApParams::default()), first);
        }
    }

    #[test]
    fn exemplars_map_to_themselves() {
        let d = vec![
            vec![0.0, 1.0, 12.0],
            vec![1.0, 0.0, 11.0],
            vec![12.0, 11.0, 0.0],
        ];
        let sim = sim_from_distances(&d);
        let out = affinity_propagation(&sim, ApParams::default());
        for e in out.exemplars() {
            assert_eq!(out.exemplar_of[e], e);
        }
    }

    #[test]
    fn median_preference_helpers() {
        let mut sim = SimilarityMatrix::new(2, vec![0.0, -4.0, -2.0, 0.0]);
        assert_eq!(sim.median_off_diagonal(), -3.0);
        sim.set_preference(-3.0);
        assert_eq!(sim.get(0, 0), -3.0);
        assert_eq!(sim.get(1, 1), -3.0);
    }
}

