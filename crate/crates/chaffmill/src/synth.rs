//! Synthetic cohorts with planted misconceptions and typo noise.
//!
//! Real student corpora are not redistributable, so end-to-end validation
//! runs against generated ones with a known ground truth. Each student gets
//! a misconception sampled from the configured mix; their wheat-failing
//! examples are built by sampling inputs until the planted mutant and the
//! wheat disagree and asserting the mutant's output. That construction
//! guarantees the planted mutant's bit is m when the example is featurized.
//! Typo examples assert a random wrong value instead, and correct examples
//! are mixed in. Everything derives from the seed.

use crate::harness::Submission;
use crate::lang::{render_example, Example, Value};
use crate::problems::Evaluator;
use chrono::{DateTime, TimeZone, Utc};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Clone, Deserialize)]
pub struct SynthConfig {
    /// Must match the loaded problem's name.
    pub problem: String,
    #[serde(default)]
    pub seed: u64,
    pub students: u32,
    /// Mutant id -> weight; sampled per student.
    pub misconception_mix: BTreeMap<String, f64>,
    pub typo_rate: f64,
    /// Inclusive range of examples per student.
    pub examples_per_student: (u32, u32),
    #[serde(default)]
    pub spammer_count: u32,
}

/// Ground-truth label per wheat-failing example, keyed by
/// `(student_id, raw_text)`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PlantedTruth {
    labels: BTreeMap<(String, String), String>,
}

impl PlantedTruth {
    pub fn label_for(&self, student_id: &str, raw_text: &str) -> Option<&str> {
        self.labels
            .get(&(student_id.to_string(), raw_text.to_string()))
            .map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str, &str)> {
        self.labels
            .iter()
            .map(|((student, text), label)| (student.as_str(), text.as_str(), label.as_str()))
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn class_labels(&self) -> Vec<String> {
        let mut labels: Vec<String> = self.labels.values().cloned().collect();
        labels.sort();
        labels.dedup();
        labels
    }
}

pub const TYPO_LABEL: &str = "typo";

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("config problem `{0}` does not match loaded problem `{1}`")]
    ProblemMismatch(String, String),
    #[error("no input sampler for problem `{0}` (samplers exist for median and docdiff)")]
    NoSampler(String),
    #[error("misconception mix references unknown mutant `{0}`")]
    UnknownMutant(String),
    #[error("misconception weights must be nonnegative and not all zero")]
    BadWeights,
    #[error("typo_rate must lie in [0, 1], got {0}")]
    BadTypoRate(f64),
    #[error("examples_per_student range ({0}, {1}) is invalid")]
    BadRange(u32, u32),
    #[error("mutant `{0}` never disagrees with the wheat on the sampled input space")]
    Indistinguishable(String),
}

const DISAGREEMENT_ATTEMPTS: usize = 5_000;
const SPAM_DISTINCT_PROBES: usize = 30;
const SPAM_REPEATS: usize = 20;

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

fn student_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix64(seed ^ splitmix64(stream)))
}

/// Small per-problem input domains keep the disagreement search fast and
/// desk-scale recounts feasible.
fn sample_input(problem: &str, rng: &mut ChaCha8Rng) -> Option<(String, Vec<Value>)> {
    match problem {
        "median" => {
            let len = rng.random_range(1..=7);
            let xs: Vec<Value> = (0..len)
                .map(|_| Value::int(rng.random_range(-9..=9)))
                .collect();
            Some(("median".to_string(), vec![Value::List(xs)]))
        }
        "docdiff" => {
            // Two-word minimum keeps single-word squared magnitudes (always
            // 1) out of the domain; they make distinct normalization
            // mistakes collide on the same outputs.
            const VOCAB: [&str; 6] = ["nova", "Nova", "flux", "Flux", "apex", "glen"];
            let doc = |rng: &mut ChaCha8Rng| {
                let len = rng.random_range(2..=5);
                Value::List(
                    (0..len)
                        .map(|_| Value::text(VOCAB[rng.random_range(0..VOCAB.len())]))
                        .collect(),
                )
            };
            let d1 = doc(rng);
            let d2 = doc(rng);
            Some(("overlap".to_string(), vec![d1, d2]))
        }
        _ => None,
    }
}

fn random_number(rng: &mut ChaCha8Rng) -> Value {
    if rng.random_range(0..3) == 0 {
        Value::ratio(rng.random_range(1..=9), rng.random_range(2..=9))
    } else {
        Value::int(rng.random_range(-9..=9))
    }
}

/// A random value of the same variant as `correct`, never equal to it.
fn perturb(correct: &Value, rng: &mut ChaCha8Rng) -> Value {
    loop {
        let candidate = match correct {
            Value::Number(_) => random_number(rng),
            Value::Text(_) => Value::text(["lorem", "ipsum", "oops"][rng.random_range(0..3)]),
            Value::Boolean(b) => Value::Boolean(!b),
            Value::List(_) => Value::list(vec![random_number(rng)]),
            Value::Record { ctor, .. } => Value::Record {
                ctor: ctor.clone(),
                fields: vec![random_number(rng)],
            },
        };
        if &candidate != correct {
            return candidate;
        }
    }
}

struct StudentOutput {
    examples: Vec<(Example, Option<String>)>, // (example, truth label)
}

fn weighted_pick(mix: &[(String, f64)], rng: &mut ChaCha8Rng) -> String {
    let total: f64 = mix.iter().map(|(_, w)| w).sum();
    let mut roll = rng.random::<f64>() * total;
    for (id, w) in mix {
        roll -= w;
        if roll <= 0.0 {
            return id.clone();
        }
    }
    mix.last().expect("nonempty mix").0.clone()
}

fn disagreement_example(
    eval: &Evaluator,
    mutant_id: &str,
    rng: &mut ChaCha8Rng,
) -> Result<Example, SynthError> {
    let problem = eval.problem();
    let mutant = problem
        .mutant(mutant_id)
        .ok_or_else(|| SynthError::UnknownMutant(mutant_id.to_string()))?;
    let wheat = &problem.wheats[0];
    for _ in 0..DISAGREEMENT_ATTEMPTS {
        let Some((function, args)) = sample_input(&problem.name, rng) else {
            return Err(SynthError::NoSampler(problem.name.clone()));
        };
        let (Ok(wheat_out), Ok(mutant_out)) = (
            eval.eval_call(wheat, &function, &args),
            eval.eval_call(mutant, &function, &args),
        ) else {
            continue;
        };
        if wheat_out != mutant_out {
            return Ok(Example::new(&function, args, mutant_out));
        }
    }
    Err(SynthError::Indistinguishable(mutant_id.to_string()))
}

fn correct_example(eval: &Evaluator, rng: &mut ChaCha8Rng) -> Result<Example, SynthError> {
    let problem = eval.problem();
    let wheat = &problem.wheats[0];
    for _ in 0..DISAGREEMENT_ATTEMPTS {
        let Some((function, args)) = sample_input(&problem.name, rng) else {
            return Err(SynthError::NoSampler(problem.name.clone()));
        };
        if let Ok(out) = eval.eval_call(wheat, &function, &args) {
            return Ok(Example::new(&function, args, out));
        }
    }
    Err(SynthError::NoSampler(problem.name.clone()))
}

fn typo_example(eval: &Evaluator, rng: &mut ChaCha8Rng) -> Result<Example, SynthError> {
    let correct = correct_example(eval, rng)?;
    let wrong = perturb(&correct.expected, rng);
    Ok(Example::new(&correct.function, correct.args, wrong))
}

fn student_examples(
    eval: &Evaluator,
    cfg: &SynthConfig,
    mix: &[(String, f64)],
    rng: &mut ChaCha8Rng,
) -> Result<StudentOutput, SynthError> {
    let misconception = weighted_pick(mix, rng);
    let count = rng.random_range(cfg.examples_per_student.0..=cfg.examples_per_student.1);
    let mut taken: BTreeMap<String, Option<String>> = BTreeMap::new();
    let mut examples = Vec::new();
    for _ in 0..count {
        let mut produced = None;
        for _ in 0..10 {
            let (example, label) = if rng.random::<f64>() < cfg.typo_rate {
                (typo_example(eval, rng)?, Some(TYPO_LABEL.to_string()))
            } else if rng.random::<f64>() < 0.5 {
                (
                    disagreement_example(eval, &misconception, rng)?,
                    Some(misconception.clone()),
                )
            } else {
                (correct_example(eval, rng)?, None)
            };
            match taken.get(&example.raw_text) {
                Some(existing) if existing != &label => continue, // conflicting relabel; resample
                _ => {
                    taken.insert(example.raw_text.clone(), label.clone());
                    produced = Some((example, label));
                    break;
                }
            }
        }
        if let Some(pair) = produced {
            examples.push(pair);
        }
    }
    Ok(StudentOutput { examples })
}

fn render_suite(examples: &[&Example]) -> String {
    let mut text = String::from("check:\n");
    for e in examples {
        text.push_str("  ");
        text.push_str(&render_example(e));
        text.push('\n');
    }
    text.push_str("end\n");
    text
}

fn timestamp(slot: u32) -> DateTime<Utc> {
    Utc.with_ymd_and_hms(2020, 9, 1, 0, 0, 0).unwrap() + chrono::Duration::minutes(slot as i64)
}

fn validate(cfg: &SynthConfig, eval: &Evaluator) -> Result<Vec<(String, f64)>, SynthError> {
    let problem = eval.problem();
    if cfg.problem != problem.name {
        return Err(SynthError::ProblemMismatch(
            cfg.problem.clone(),
            problem.name.clone(),
        ));
    }
    if !(0.0..=1.0).contains(&cfg.typo_rate) {
        return Err(SynthError::BadTypoRate(cfg.typo_rate));
    }
    let (lo, hi) = cfg.examples_per_student;
    if lo > hi || hi == 0 {
        return Err(SynthError::BadRange(lo, hi));
    }
    let mut mix = Vec::new();
    for (id, &w) in &cfg.misconception_mix {
        if w < 0.0 {
            return Err(SynthError::BadWeights);
        }
        if problem.mutant(id).is_none() {
            return Err(SynthError::UnknownMutant(id.clone()));
        }
        if w > 0.0 {
            mix.push((id.clone(), w));
        }
    }
    if mix.is_empty() {
        return Err(SynthError::BadWeights);
    }
    Ok(mix)
}

/// Generates the cohort: regular students first, spammer students after.
/// A spammer resubmits one failing example over and over (inert after
/// dedup) and also probes with many distinct same-misconception examples,
/// which is what actually skews cluster sizes.
pub fn generate_cohort(
    cfg: &SynthConfig,
    eval: &Evaluator,
) -> Result<(Vec<Submission>, PlantedTruth), SynthError> {
    let mix = validate(cfg, eval)?;
    let mut submissions = Vec::new();
    let mut truth = PlantedTruth::default();
    let mut slot = 0u32;

    for s in 0..cfg.students {
        let student_id = format!("student-{:03}", s);
        let mut rng = student_rng(cfg.seed, s as u64);
        let output = student_examples(eval, cfg, &mix, &mut rng)?;
        for (example, label) in &output.examples {
            if let Some(label) = label {
                truth.labels.insert(
                    (student_id.clone(), example.raw_text.clone()),
                    label.clone(),
                );
            }
        }
        // Suites arrive in a few incremental submissions, like real logs.
        for chunk in output.examples.chunks(4) {
            let refs: Vec<&Example> = chunk.iter().map(|(e, _)| e).collect();
            submissions.push(Submission {
                student_id: student_id.clone(),
                timestamp: timestamp(slot),
                suite_text: render_suite(&refs),
            });
            slot += 1;
        }
    }

    for s in 0..cfg.spammer_count {
        let student_id = format!("spammer-{:03}", s);
        let mut rng = student_rng(cfg.seed, 1_000_000 + s as u64);
        let misconception = weighted_pick(&mix, &mut rng);
        let base = disagreement_example(eval, &misconception, &mut rng)?;
        truth.labels.insert(
            (student_id.clone(), base.raw_text.clone()),
            misconception.clone(),
        );
        for _ in 0..SPAM_REPEATS {
            submissions.push(Submission {
                student_id: student_id.clone(),
                timestamp: timestamp(slot),
                suite_text: render_suite(&[&base]),
            });
            slot += 1;
        }
        let mut probes = 0usize;
        while probes < SPAM_DISTINCT_PROBES {
            let probe = disagreement_example(eval, &misconception, &mut rng)?;
            let key = (student_id.clone(), probe.raw_text.clone());
            if truth.labels.contains_key(&key) {
                continue;
            }
            truth.labels.insert(key, misconception.clone());
            submissions.push(Submission {
                student_id: student_id.clone(),
                timestamp: timestamp(slot),
                suite_text: render_suite(&[&probe]),
            });
            slot += 1;
            probes += 1;
        }
    }

    Ok((submissions, truth))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cluster::featurize_corpus;
    use crate::harness::extract_wfes;
    use crate::problems::{builtin_docdiff, builtin_median, Outcome};

    fn median_cfg() -> SynthConfig {
        SynthConfig {
            problem: "median".to_string(),
            seed: 42,
            students: 10,
            misconception_mix: BTreeMap::from([("median-mean".to_string(), 1.0)]),
            typo_rate: 0.0,
            examples_per_student: (3, 6),
            spammer_count: 0,
        }
    }

    #[test]
    fn planted_mean_wfes_pass_the_mean_mutant() {
        let p = builtin_median();
        let ev = Evaluator::new(&p);
        let (subs, truth) = generate_cohort(&median_cfg(), &ev).unwrap();
        assert!(!truth.is_empty());
        let (wfes, _) = extract_wfes(&ev, &subs);
        assert!(!wfes.is_empty());
        let mean = p.mutant("median-mean").unwrap();
        for wfe in &wfes {
            // Every WFE here is labeled with the mean mutant and passes it.
            assert_eq!(
                truth.label_for(&wfe.student_id, &wfe.example.raw_text),
                Some("median-mean")
            );
            assert_eq!(ev.run_example(mean, &wfe.example).outcome, Outcome::Pass);
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let p = builtin_median();
        let ev = Evaluator::new(&p);
        let (a_subs, a_truth) = generate_cohort(&median_cfg(), &ev).unwrap();
        let (b_subs, b_truth) = generate_cohort(&median_cfg(), &ev).unwrap();
        assert_eq!(a_subs, b_subs);
        assert_eq!(a_truth, b_truth);

        let mut other = median_cfg();
        other.seed = 43;
        let (c_subs, _) = generate_cohort(&other, &ev).unwrap();
        assert_ne!(a_subs, c_subs);
    }

    #[test]
    fn planted_bit_is_always_m() {
        let p = builtin_docdiff();
        let ev = Evaluator::new(&p);
        let cfg = SynthConfig {
            problem: "docdiff".to_string(),
            seed: 7,
            students: 8,
            misconception_mix: BTreeMap::from([
                ("docdiff-no-norm".to_string(), 1.0),
                ("docdiff-mag4-norm".to_string(), 1.0),
            ]),
            typo_rate: 0.1,
            examples_per_student: (3, 5),
            spammer_count: 1,
        };
        let (subs, truth) = generate_cohort(&cfg, &ev).unwrap();
        let (wfes, _) = extract_wfes(&ev, &subs);
        let vectors = featurize_corpus(&ev, &wfes);
        let mut planted_seen = 0;
        for (wfe, wv) in wfes.iter().zip(&vectors) {
            let label = truth
                .label_for(&wfe.student_id, &wfe.example.raw_text)
                .expect("every WFE is labeled");
            if let Some(idx) = p.mutant_index(label) {
                planted_seen += 1;
                assert!(wv.vector.bit(idx), "planted bit must be m for {}", wfe.wfe_id);
            }
        }
        assert!(planted_seen > 0);
    }

    #[test]
    fn volume_respects_the_configured_range() {
        let p = builtin_median();
        let ev = Evaluator::new(&p);
        let cfg = median_cfg();
        let (subs, _) = generate_cohort(&cfg, &ev).unwrap();
        let mut per_student: BTreeMap<String, usize> = BTreeMap::new();
        for sub in &subs {
            let (suite, errors) = crate::lang::parse_suite(&sub.suite_text);
            assert!(errors.is_empty());
            *per_student.entry(sub.student_id.clone()).or_insert(0) += suite.len();
        }
        assert_eq!(per_student.len(), cfg.students as usize);
        for (_, count) in per_student {
            // Collision retries may drop a slot, never add one.
            assert!(count <= cfg.examples_per_student.1 as usize);
            assert!(count >= 1);
        }
    }

    #[test]
    fn config_validation() {
        let p = builtin_median();
        let ev = Evaluator::new(&p);
        let mut cfg = median_cfg();
        cfg.problem = "docdiff".to_string();
        assert!(matches!(
            generate_cohort(&cfg, &ev),
            Err(SynthError::ProblemMismatch(..))
        ));

        let mut cfg = median_cfg();
        cfg.misconception_mix = BTreeMap::from([("median-mean".to_string(), 0.0)]);
        assert!(matches!(generate_cohort(&cfg, &ev), Err(SynthError::BadWeights)));

        let mut cfg = median_cfg();
        cfg.misconception_mix = BTreeMap::from([("nope".to_string(), 1.0)]);
        assert!(matches!(
            generate_cohort(&cfg, &ev),
            Err(SynthError::UnknownMutant(_))
        ));

        let mut cfg = median_cfg();
        cfg.typo_rate = 1.5;
        assert!(matches!(generate_cohort(&cfg, &ev), Err(SynthError::BadTypoRate(_))));
    }

    #[test]
    fn spammers_add_many_same_cluster_wfes() {
        let p = builtin_median();
        let ev = Evaluator::new(&p);
        let mut cfg = median_cfg();
        cfg.students = 3;
        cfg.spammer_count = 1;
        let (subs, _) = generate_cohort(&cfg, &ev).unwrap();
        let (wfes, stats) = extract_wfes(&ev, &subs);
        let spam: Vec<_> = wfes.iter().filter(|w| w.student_id.starts_with("spammer")).collect();
        // 1 base example (deduped from 20 repeats) + 30 distinct probes.
        assert_eq!(spam.len(), 1 + 30);
        assert!(stats.duplicates_merged >= 19);
    }
}
