//! Acceptance suite: the ten gate criteria, each with its stated tolerance
//! and time budget. Every test prints one `ACCEPTANCE <n> PASS` line; run
//! with `--nocapture` to see them stream.

use chaffmill::baseline::{baseline_cluster, levenshtein, BaselineOptions};
use chaffmill::cluster::{
    categorize, cluster_by_vector, featurize, featurize_corpus, per_chaff_counts, Category,
    FeatureVector, WfeVector,
};
use chaffmill::harness::{assess_source, extract_wfes, Validity, WfeRecord};
use chaffmill::lang::parse_suite;
use chaffmill::metrics::{v_measure, LabeledPartition};
use chaffmill::problems::{builtin_docdiff, builtin_median, Outcome};
use chaffmill::stats::{cohens_d, small_m_rate, two_proportion_z};
use chaffmill::synth::{generate_cohort, PlantedTruth, SynthConfig, TYPO_LABEL};
use chaffmill::testkit::{stats_oracle, v_measure_oracle};
use chaffmill::Evaluator;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use std::path::Path;
use std::time::{Duration, Instant};

fn finish(criterion: u32, budget: Duration, started: Instant, detail: &str) {
    let elapsed = started.elapsed();
    assert!(
        elapsed <= budget,
        "criterion {} overran its {:?} budget: {:?}",
        criterion,
        budget,
        elapsed
    );
    println!(
        "ACCEPTANCE {} PASS ({:.2}s <= {:?}): {}",
        criterion,
        elapsed.as_secs_f64(),
        budget,
        detail
    );
}

const FIG1A: &str = "check:\n  median([list: 1]) is 1\n  median([list: 1, 2, 3]) is 3\n  median([list: 3, 3, 3, 3]) is 3\nend\n";
const FIG1B: &str = "check:\n  median([list: 1]) is 1\n  median([list: 1, 2, 3]) is 2\n  median([list: 3, 3, 3, 3]) is 3\n\n  # Shows that Median is not Mean\n  median([list: 1, 1, 3]) is 1\n\n  # Shows that Median is not Mode\n  median([list: 1, 1, 3, 4, 4]) is 3\nend\n";

/// The criterion-4 cohort: 50 students, 5 planted misconceptions,
/// typo rate 0.2, fixed seed.
fn acceptance_cohort() -> SynthConfig {
    SynthConfig {
        problem: "docdiff".to_string(),
        seed: 2022,
        students: 50,
        misconception_mix: BTreeMap::from([
            ("docdiff-no-norm".to_string(), 1.0),
            ("docdiff-min-norm".to_string(), 1.0),
            ("docdiff-mag4-norm".to_string(), 1.0),
            ("docdiff-first-vocab".to_string(), 1.0),
            ("docdiff-second-vocab".to_string(), 1.0),
        ]),
        typo_rate: 0.2,
        examples_per_student: (4, 9),
        spammer_count: 0,
    }
}

fn labeled_wfes(
    truth: &PlantedTruth,
    wfes: &[WfeRecord],
) -> Vec<(String, String)> {
    wfes.iter()
        .map(|w| {
            let label = truth
                .label_for(&w.student_id, &w.example.raw_text)
                .expect("every generated WFE carries a planted label");
            (w.wfe_id.clone(), label.to_string())
        })
        .collect()
}

#[test]
fn acceptance_01_figure_1_reproduction() {
    let started = Instant::now();
    let problem = builtin_median();
    let eval = Evaluator::new(&problem);
    let family: Vec<String> = problem.mutant_family.iter().map(|m| m.id.clone()).collect();

    let report = assess_source(&eval, FIG1A, &family).unwrap();
    match &report.validity {
        Validity::Invalid(flags) => {
            assert_eq!(flags.len(), 1, "exactly one flagged line");
            assert_eq!(flags[0].raw_text, "median([list: 1, 2, 3]) is 3");
        }
        Validity::Valid => panic!("the first suite must be invalid"),
    }
    assert!(report.chaffs_caught.is_none());

    let report = assess_source(&eval, FIG1B, &family).unwrap();
    assert!(report.is_valid(), "the second suite must be valid");
    let outcomes = report.chaffs_caught.unwrap();
    assert_eq!(outcomes.caught, vec!["median-mean", "median-mode"]);
    assert_eq!(
        outcomes.missed,
        vec!["median-unsorted-middle", "median-even-left"]
    );
    finish(
        1,
        Duration::from_secs(1),
        started,
        "invalid suite flags exactly the bad line; valid suite catches 2 of 4",
    );
}

#[test]
fn acceptance_02_v_measure_oracle_equivalence() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE);
    let mut checked = 0;
    for _ in 0..250 {
        let n = rng.random_range(1..=12);
        let classes = rng.random_range(1..=4usize);
        let clusters = rng.random_range(1..=4usize);
        let mut part = LabeledPartition::new();
        for i in 0..n {
            part.push(
                &format!("i{}", i),
                &format!("c{}", rng.random_range(0..classes)),
                &format!("k{}", rng.random_range(0..clusters)),
            );
        }
        let scores = v_measure(&part).unwrap();
        let oracle = v_measure_oracle(&part);
        assert!((scores.homogeneity - oracle.homogeneity).abs() < 1e-9);
        assert!((scores.completeness - oracle.completeness).abs() < 1e-9);
        assert!((scores.v_measure - oracle.v_measure).abs() < 1e-9);
        for v in [scores.homogeneity, scores.completeness, scores.v_measure] {
            assert!((0.0..=1.0).contains(&v), "out of range: {}", v);
        }
        // Relabeling invariance: permute names, scores must not move.
        let mut renamed = LabeledPartition::new();
        for (id, class, cluster) in part.items() {
            renamed.push(id, &format!("class-{}-x", class), &format!("K_{}", cluster));
        }
        let renamed_scores = v_measure(&renamed).unwrap();
        assert!((scores.v_measure - renamed_scores.v_measure).abs() < 1e-12);
        assert!((scores.homogeneity - renamed_scores.homogeneity).abs() < 1e-12);
        assert!((scores.completeness - renamed_scores.completeness).abs() < 1e-12);
        checked += 1;
    }
    assert!(checked >= 200);
    finish(
        2,
        Duration::from_secs(10),
        started,
        "h, c, V match the brute-force entropy oracle within 1e-9 on 250 random partitions",
    );
}

#[test]
fn acceptance_03_clustering_laws() {
    let started = Instant::now();
    let problem = builtin_docdiff();
    let mut rng = ChaCha8Rng::seed_from_u64(0xC1C1);

    // Partition law and same-cluster <=> same-vector on random corpora.
    for _ in 0..40 {
        let n = rng.random_range(0..60);
        let items: Vec<WfeVector> = (0..n)
            .map(|i| WfeVector {
                wfe_id: format!("wfe-{}", i),
                student_id: format!("s{}", rng.random_range(0..8)),
                vector: FeatureVector::from_bits(
                    (0..problem.family_size())
                        // Skewed bits so all-d and repeated vectors occur.
                        .map(|_| rng.random_range(0..4) == 0)
                        .collect(),
                ),
            })
            .collect();
        let clusters = cluster_by_vector(&items, &problem).unwrap();
        let total: usize = clusters.iter().map(|c| c.size()).sum();
        assert_eq!(total, items.len(), "partition covers every WFE once");
        let mut seen = std::collections::BTreeSet::new();
        for c in &clusters {
            for m in &c.members {
                assert!(seen.insert(m.wfe_id.clone()), "clusters must be disjoint");
                let item = items.iter().find(|i| i.wfe_id == m.wfe_id).unwrap();
                assert_eq!(item.vector, c.vector, "member vector equals cluster vector");
            }
            let expected = match c.vector.m_count() {
                0 => Category::NoM,
                1 => Category::OneM,
                2 | 3 => Category::SmallM,
                _ => Category::LargeM,
            };
            assert_eq!(categorize(&c.vector), expected);
        }
        for x in &items {
            for y in &items {
                let same = clusters.iter().any(|c| {
                    c.members.iter().any(|m| m.wfe_id == x.wfe_id)
                        && c.members.iter().any(|m| m.wfe_id == y.wfe_id)
                });
                assert_eq!(same, x.vector == y.vector);
            }
        }
    }

    // Featurize order-independence on a real evaluated corpus.
    let eval = Evaluator::new(&problem);
    let cfg = SynthConfig {
        students: 10,
        ..acceptance_cohort()
    };
    let (subs, _) = generate_cohort(&cfg, &eval).unwrap();
    let (wfes, _) = extract_wfes(&eval, &subs);
    let direct = featurize_corpus(&eval, &wfes);
    for _ in 0..3 {
        let mut shuffled = wfes.clone();
        for i in (1..shuffled.len()).rev() {
            let j = rng.random_range(0..=i);
            shuffled.swap(i, j);
        }
        let permuted = featurize_corpus(&eval, &shuffled);
        for item in &direct {
            let twin = permuted.iter().find(|p| p.wfe_id == item.wfe_id).unwrap();
            assert_eq!(item.vector, twin.vector, "permutation changed a vector");
        }
    }
    finish(
        3,
        Duration::from_secs(30),
        started,
        "partition law, vector-equality clustering both ways, order independence, category thresholds",
    );
}

#[test]
fn acceptance_04_synthetic_recovery() {
    let started = Instant::now();
    let problem = builtin_docdiff();
    let eval = Evaluator::new(&problem);
    let cfg = acceptance_cohort();
    let (subs, truth) = generate_cohort(&cfg, &eval).unwrap();
    let (wfes, _) = extract_wfes(&eval, &subs);
    let vectors = featurize_corpus(&eval, &wfes);
    let labels = labeled_wfes(&truth, &wfes);

    // Homogeneity of semantic clusters vs planted truth, typo class excluded.
    let mut part = LabeledPartition::new();
    for ((wfe_id, label), item) in labels.iter().zip(&vectors) {
        assert_eq!(wfe_id, &item.wfe_id);
        if label != TYPO_LABEL {
            part.push(wfe_id, label, &item.vector.compact());
        }
    }
    let scores = v_measure(&part).unwrap();
    assert!(
        scores.homogeneity >= 0.9,
        "homogeneity {:.4} below the 0.9 gate",
        scores.homogeneity
    );

    // Every planted mutant is the majority label of some one-m cluster.
    let clusters = cluster_by_vector(&vectors, &problem).unwrap();
    let label_of: BTreeMap<&str, &str> = labels
        .iter()
        .map(|(id, label)| (id.as_str(), label.as_str()))
        .collect();
    for planted in cfg.misconception_mix.keys() {
        let found = clusters
            .iter()
            .filter(|c| c.category == Category::OneM)
            .any(|c| {
                let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
                for m in &c.members {
                    *counts.entry(label_of[m.wfe_id.as_str()]).or_insert(0) += 1;
                }
                let majority = counts.iter().max_by_key(|(_, &n)| n).map(|(l, _)| *l);
                majority == Some(planted.as_str())
            });
        assert!(found, "{} is not the majority of any one-m cluster", planted);
    }
    finish(
        4,
        Duration::from_secs(60),
        started,
        &format!(
            "homogeneity {:.3} >= 0.9 on {} labeled WFEs; all 5 planted mutants lead a one-m cluster",
            scores.homogeneity,
            part.len()
        ),
    );
}

#[test]
fn acceptance_05_baseline_inferiority() {
    let started = Instant::now();
    let problem = builtin_docdiff();
    let eval = Evaluator::new(&problem);
    let cfg = acceptance_cohort();
    let (subs, truth) = generate_cohort(&cfg, &eval).unwrap();
    let (wfes, _) = extract_wfes(&eval, &subs);
    let vectors = featurize_corpus(&eval, &wfes);
    let labels = labeled_wfes(&truth, &wfes);

    let semantic = {
        let mut part = LabeledPartition::new();
        for ((wfe_id, label), item) in labels.iter().zip(&vectors) {
            if label != TYPO_LABEL {
                part.push(wfe_id, label, &item.vector.compact());
            }
        }
        v_measure(&part).unwrap()
    };

    let clustering = baseline_cluster(&wfes, BaselineOptions::default());
    let baseline = {
        let mut part = LabeledPartition::new();
        for (i, (wfe_id, label)) in labels.iter().enumerate() {
            if label != TYPO_LABEL {
                part.push(wfe_id, label, &format!("x{}", clustering.exemplar_of[i]));
            }
        }
        v_measure(&part).unwrap()
    };

    assert!(
        baseline.v_measure < semantic.v_measure,
        "baseline V {:.4} not strictly below semantic V {:.4}",
        baseline.v_measure,
        semantic.v_measure
    );
    finish(
        5,
        Duration::from_secs(120),
        started,
        &format!(
            "Levenshtein+AP V = {:.3} < semantic V = {:.3} on the same cohort",
            baseline.v_measure, semantic.v_measure
        ),
    );
}

#[test]
fn acceptance_06_syntactic_counterexamples() {
    let started = Instant::now();
    let problem = builtin_median();
    let eval = Evaluator::new(&problem);
    let wfe = |text: &str| -> WfeRecord {
        let (suite, errors) = parse_suite(text);
        assert!(errors.is_empty());
        WfeRecord {
            wfe_id: text.to_string(),
            example: suite.examples.into_iter().next().unwrap(),
            student_id: "s".to_string(),
            timestamp: chrono::DateTime::<chrono::Utc>::MIN_UTC,
            failed_wheats: vec!["median-wheat".to_string()],
        }
    };

    // Edit distance exactly 1, different feature vectors.
    let a = "median([1, 2]) is 1";
    let b = "median([1, 2]) is 2";
    assert_eq!(levenshtein(a, b), 1);
    let fv_a = featurize(&eval, &wfe(a));
    let fv_b = featurize(&eval, &wfe(b));
    assert_ne!(fv_a, fv_b, "near-identical text, different meaning");

    // Distant texts, identical feature vectors.
    let c = "median([1,3,2]) is 3";
    let d = "median([4,678,0,99,3]) is 0";
    let fv_c = featurize(&eval, &wfe(c));
    let fv_d = featurize(&eval, &wfe(d));
    assert_eq!(fv_c, fv_d, "distant text, same misconception");
    finish(
        6,
        Duration::from_secs(1),
        started,
        "edit distance 1 with different vectors; distant texts with identical vectors",
    );
}

#[test]
fn acceptance_07_statistics_oracle_equivalence() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x57A7);
    let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(b.abs()).max(1e-300);

    let mut quadruples: Vec<(u64, u64, u64, u64)> = Vec::new();
    while quadruples.len() < 88 {
        let n1 = rng.random_range(2..5000);
        let n2 = rng.random_range(2..5000);
        let k1 = rng.random_range(0..=n1);
        let k2 = rng.random_range(0..=n2);
        // The tail is specified as accurate down past 1e-300, which covers
        // |z| up to about 37; beyond that no f64 can hold p at all.
        if stats_oracle(k1, n1, k2, n2).z.abs() <= 36.0 {
            quadruples.push((k1, n1, k2, n2));
        }
    }
    // Far-tail cases: big cohorts, separated rates, p far below 1e-20.
    quadruples.extend([
        (141, 591, 37, 1546),
        (900, 3000, 300, 3000),
        (2400, 4000, 1200, 4000),
        (500, 1000, 100, 1000),
        (950, 1000, 700, 1000),
        (800, 1000, 400, 1000),
        (330, 400, 120, 400),
        (50, 5000, 450, 5000),
        (260, 800, 40, 800),
        (1234, 2000, 567, 2000),
        (333, 999, 33, 999),
        (720, 900, 180, 900),
    ]);
    assert!(quadruples.len() >= 100);

    let mut far_tail_seen = 0;
    for &(k1, n1, k2, n2) in &quadruples {
        let z = two_proportion_z(k1, n1, k2, n2).unwrap();
        let oracle = stats_oracle(k1, n1, k2, n2);
        assert_eq!(z.degenerate, oracle.degenerate);
        assert!(rel(z.z, oracle.z) < 1e-6, "z: {} vs {}", z.z, oracle.z);
        assert!(rel(z.p, oracle.p) < 1e-6, "p: {} vs {}", z.p, oracle.p);
        assert!(z.p > 0.0, "p underflowed to zero for ({},{},{},{})", k1, n1, k2, n2);
        if !z.degenerate && z.z != 0.0 {
            assert!(z.p < 1.0, "p rounded to one for z = {}", z.z);
        }
        if z.p < 1e-20 {
            far_tail_seen += 1;
        }
        let d = cohens_d(k1, n1, k2, n2).unwrap();
        assert_eq!(d.degenerate, oracle.degenerate);
        if !d.degenerate {
            assert!(rel(d.d, oracle.d) < 1e-6, "d: {} vs {}", d.d, oracle.d);
            assert!(rel(d.ci95.0, oracle.ci95.0) < 1e-6 || (d.ci95.0 - oracle.ci95.0).abs() < 1e-12);
            assert!(rel(d.ci95.1, oracle.ci95.1) < 1e-6 || (d.ci95.1 - oracle.ci95.1).abs() < 1e-12);
        }
    }
    assert!(
        far_tail_seen >= 5,
        "expected several far-tail cases, saw {}",
        far_tail_seen
    );
    finish(
        7,
        Duration::from_secs(10),
        started,
        &format!(
            "z, p, d, CI match the independent oracle to 1e-6 on {} quadruples ({} with p < 1e-20)",
            quadruples.len(),
            far_tail_seen
        ),
    );
}

#[test]
fn acceptance_08_counts_equal_brute_force_recounts() {
    let started = Instant::now();
    let problem = builtin_docdiff();
    let eval = Evaluator::new(&problem);
    let cfg = SynthConfig {
        students: 25,
        seed: 88,
        ..acceptance_cohort()
    };
    let (subs, _) = generate_cohort(&cfg, &eval).unwrap();
    let (wfes, _) = extract_wfes(&eval, &subs);
    let vectors = featurize_corpus(&eval, &wfes);

    // Brute-force recount straight off the pass matrix, one run_example
    // call per (WFE, mutant) cell — independent of featurize's output.
    let mut recount = vec![0usize; problem.family_size()];
    let mut small_m_recount = 0usize;
    for w in &wfes {
        let mut m_bits = 0usize;
        for (i, mutant) in problem.mutant_family.iter().enumerate() {
            if eval.run_example(mutant, &w.example).outcome == Outcome::Pass {
                recount[i] += 1;
                m_bits += 1;
            }
        }
        if m_bits == 1 || m_bits == 2 {
            small_m_recount += 1;
        }
    }

    let counts = per_chaff_counts(&vectors, &problem);
    for (i, (id, count)) in counts.iter().enumerate() {
        assert_eq!(
            *count, recount[i],
            "per-chaff count for {} deviates from the recount",
            id
        );
    }
    let (k, n) = small_m_rate(&vectors);
    assert_eq!(k, small_m_recount);
    assert_eq!(n, wfes.len());
    finish(
        8,
        Duration::from_secs(10),
        started,
        &format!(
            "per-chaff counts and small-m rate ({}/{}) equal the pass-matrix recount exactly",
            k, n
        ),
    );
}

#[test]
fn acceptance_09_throughput_3400_wfes() {
    let problem = builtin_docdiff();
    let eval = Evaluator::new(&problem);
    // Build a 3,400-WFE corpus by tiling a generated one; the work is
    // 3,400 x 14 evaluations regardless of repetition.
    let cfg = SynthConfig {
        students: 40,
        seed: 9,
        ..acceptance_cohort()
    };
    let (subs, _) = generate_cohort(&cfg, &eval).unwrap();
    let (base, _) = extract_wfes(&eval, &subs);
    assert!(!base.is_empty());
    let wfes: Vec<WfeRecord> = (0..3400)
        .map(|i| {
            let mut w = base[i % base.len()].clone();
            w.wfe_id = format!("wfe-{:06}", i);
            w
        })
        .collect();
    assert_eq!(problem.family_size(), 14);

    let started = Instant::now();
    let vectors = featurize_corpus(&eval, &wfes);
    let elapsed = started.elapsed();
    assert_eq!(vectors.len(), 3400);
    assert!(
        elapsed <= Duration::from_secs(60),
        "featurizing 3,400 WFEs took {:?}",
        elapsed
    );
    println!(
        "ACCEPTANCE 9 PASS ({:.2}s <= 60s): featurized 3,400 WFEs x 14 mutants",
        elapsed.as_secs_f64()
    );
}

#[test]
fn acceptance_10_pipeline_determinism() {
    let started = Instant::now();
    let bin = env!("CARGO_BIN_EXE_chaffmill");
    let fixture = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/docdiff-cohort.json");
    let run_pipeline = |dir: &Path| {
        let p = |name: &str| dir.join(name).to_string_lossy().into_owned();
        let steps: Vec<Vec<String>> = vec![
            vec![
                "synth".into(),
                "--problem".into(),
                "builtin:docdiff".into(),
                "--config".into(),
                fixture.to_string_lossy().into_owned(),
                "--seed".into(),
                "424242".into(),
                "--out-submissions".into(),
                p("subs.jsonl"),
                "--out-truth".into(),
                p("truth.csv"),
            ],
            vec![
                "extract".into(),
                "--problem".into(),
                "builtin:docdiff".into(),
                "--submissions".into(),
                p("subs.jsonl"),
                "--out".into(),
                p("wfes.jsonl"),
            ],
            vec![
                "featurize".into(),
                "--problem".into(),
                "builtin:docdiff".into(),
                "--wfes".into(),
                p("wfes.jsonl"),
                "--out".into(),
                p("vectors.jsonl"),
            ],
            vec![
                "cluster".into(),
                "--problem".into(),
                "builtin:docdiff".into(),
                "--vectors".into(),
                p("vectors.jsonl"),
                "--out".into(),
                p("report.json"),
            ],
            vec![
                "select".into(),
                "--problem".into(),
                "builtin:docdiff".into(),
                "--clusters".into(),
                p("report.json"),
                "--n".into(),
                "5".into(),
                "--out".into(),
                p("suite.json"),
            ],
        ];
        for args in steps {
            let out = std::process::Command::new(bin)
                .args(&args)
                .output()
                .expect("spawn chaffmill");
            assert!(
                out.status.success(),
                "step {:?} failed: {}",
                args,
                String::from_utf8_lossy(&out.stderr)
            );
        }
    };

    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    run_pipeline(dir_a.path());
    run_pipeline(dir_b.path());

    let artifacts = [
        "subs.jsonl",
        "truth.csv",
        "wfes.jsonl",
        "vectors.jsonl",
        "report.json",
        "suite.json",
    ];
    for name in artifacts {
        let a = std::fs::read(dir_a.path().join(name)).unwrap();
        let b = std::fs::read(dir_b.path().join(name)).unwrap();
        assert_eq!(a, b, "{} differs between identical runs", name);
        assert!(
            dir_a.path().join(format!("{}.manifest.json", name)).exists(),
            "{} lacks a manifest",
            name
        );
    }
    finish(
        10,
        Duration::from_secs(300),
        started,
        "synth -> extract -> featurize -> cluster -> select twice: all non-manifest bytes identical",
    );
}
