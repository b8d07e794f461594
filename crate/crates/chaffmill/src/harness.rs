//! Exemplar-style suite assessment and WFE extraction from submission logs.
//!
//! An example is wheat-failing when it fails or errors on at least one
//! wheat. Error outcomes count: a large share of wheat failures in practice
//! are typos and type errors, and those have to flow through the pipeline.

use crate::cluster::{featurize, FeatureVector};
use crate::lang::{parse_suite, Example, ExampleSuite, ParseError};
use crate::par;
use crate::problems::{Evaluator, Outcome, ProblemSpec};
use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

/// One logged suite submission.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Submission {
    pub student_id: String,
    pub timestamp: DateTime<Utc>,
    pub suite_text: String,
}

/// A wheat-failing example with its provenance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WfeRecord {
    pub wfe_id: String,
    pub example: Example,
    pub student_id: String,
    pub timestamp: DateTime<Utc>,
    /// Nonempty by definition.
    pub failed_wheats: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WfeFlag {
    pub line: u32,
    pub raw_text: String,
    pub failed_wheats: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Validity {
    Valid,
    /// The wheat-failing lines, in source order.
    Invalid(Vec<WfeFlag>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChaffOutcomes {
    pub caught: Vec<String>,
    pub missed: Vec<String>,
}

/// Wheat verdict first; chaff thoroughness only when the whole suite is
/// valid, mirroring the student-facing feedback ordering.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssessmentReport {
    pub validity: Validity,
    /// Populated iff the suite is valid.
    pub chaffs_caught: Option<ChaffOutcomes>,
    /// Per flagged line, a misconception hint when one exists.
    pub hints: Vec<(u32, String)>,
    pub parse_errors: Vec<ParseError>,
}

impl AssessmentReport {
    pub fn is_valid(&self) -> bool {
        matches!(self.validity, Validity::Valid)
    }
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("`{0}` is not a mutant of problem `{1}`")]
    UnknownChaff(String, String),
}

fn failing_wheats(eval: &Evaluator, example: &Example) -> Vec<String> {
    eval.problem()
        .wheats
        .iter()
        .filter(|w| eval.run_example(w, example).outcome != Outcome::Pass)
        .map(|w| w.id.clone())
        .collect()
}

/// Assesses a parsed suite against the wheats, then (if valid) against the
/// deployed chaffs. A chaff is caught when at least one valid example does
/// not pass under it.
pub fn assess_suite(
    eval: &Evaluator,
    suite: &ExampleSuite,
    deployed_chaffs: &[String],
) -> Result<AssessmentReport, HarnessError> {
    assess(eval, suite, &[], deployed_chaffs)
}

/// Parses `text` and assesses it; parse errors land in the report.
pub fn assess_source(
    eval: &Evaluator,
    text: &str,
    deployed_chaffs: &[String],
) -> Result<AssessmentReport, HarnessError> {
    let (suite, parse_errors) = parse_suite(text);
    assess(eval, &suite, &parse_errors, deployed_chaffs)
}

fn assess(
    eval: &Evaluator,
    suite: &ExampleSuite,
    parse_errors: &[ParseError],
    deployed_chaffs: &[String],
) -> Result<AssessmentReport, HarnessError> {
    let problem = eval.problem();
    for id in deployed_chaffs {
        if problem.mutant(id).is_none() {
            return Err(HarnessError::UnknownChaff(id.clone(), problem.name.clone()));
        }
    }
    let flags: Vec<WfeFlag> = suite
        .examples
        .iter()
        .filter_map(|e| {
            let failed = failing_wheats(eval, e);
            if failed.is_empty() {
                None
            } else {
                Some(WfeFlag {
                    line: e.source_line,
                    raw_text: e.raw_text.clone(),
                    failed_wheats: failed,
                })
            }
        })
        .collect();

    if flags.is_empty() {
        let chaffs_caught = {
            let mut caught = Vec::new();
            let mut missed = Vec::new();
            for id in deployed_chaffs {
                let imp = problem.mutant(id).expect("checked above");
                let killed = suite
                    .examples
                    .iter()
                    .any(|e| eval.run_example(imp, e).outcome != Outcome::Pass);
                if killed {
                    caught.push(id.clone());
                } else {
                    missed.push(id.clone());
                }
            }
            ChaffOutcomes { caught, missed }
        };
        Ok(AssessmentReport {
            validity: Validity::Valid,
            chaffs_caught: Some(chaffs_caught),
            hints: Vec::new(),
            parse_errors: parse_errors.to_vec(),
        })
    } else {
        // Hints for flagged lines come from the full mutant family.
        let mut hints = Vec::new();
        for flag in &flags {
            if let Some(example) = suite
                .examples
                .iter()
                .find(|e| e.source_line == flag.line)
            {
                let wfe = WfeRecord {
                    wfe_id: String::new(),
                    example: example.clone(),
                    student_id: String::new(),
                    timestamp: DateTime::<Utc>::MIN_UTC,
                    failed_wheats: flag.failed_wheats.clone(),
                };
                let fv = featurize(eval, &wfe);
                if let Some(hint) = hint_for(&wfe, &fv, problem) {
                    hints.push((flag.line, hint));
                }
            }
        }
        Ok(AssessmentReport {
            validity: Validity::Invalid(flags),
            chaffs_caught: None,
            hints,
            parse_errors: parse_errors.to_vec(),
        })
    }
}

/// Extraction tallies; unparseable lines are counted, not emitted.
#[derive(Debug, Default, Clone, PartialEq, Eq, Serialize)]
pub struct ExtractStats {
    pub submissions: usize,
    pub examples_parsed: usize,
    pub parse_errors: usize,
    pub passing_examples: usize,
    pub wfes_before_dedup: usize,
    pub duplicates_merged: usize,
}

/// Extracts one WFE per example that fails at least one wheat.
///
/// Exact `(student_id, raw_text)` duplicates merge, keeping the earliest
/// timestamp. Output order is canonical (timestamp, student, line, text)
/// regardless of scheduling, and ids are assigned in that order.
pub fn extract_wfes(
    eval: &Evaluator,
    submissions: &[Submission],
) -> (Vec<WfeRecord>, ExtractStats) {
    struct SubResult {
        candidates: Vec<(Example, DateTime<Utc>, String, Vec<String>)>,
        parsed: usize,
        parse_errors: usize,
        passing: usize,
    }

    let per_submission: Vec<SubResult> = par::map_slice(submissions, |sub| {
        let (suite, errors) = parse_suite(&sub.suite_text);
        let mut candidates = Vec::new();
        let mut passing = 0usize;
        for e in &suite.examples {
            let failed = failing_wheats(eval, e);
            if failed.is_empty() {
                passing += 1;
            } else {
                candidates.push((e.clone(), sub.timestamp, sub.student_id.clone(), failed));
            }
        }
        SubResult {
            candidates,
            parsed: suite.examples.len(),
            parse_errors: errors.len(),
            passing,
        }
    });

    // Keyed by exact raw text per student; near-duplicates stay distinct.
    type Pending = (Example, DateTime<Utc>, Vec<String>);
    let mut stats = ExtractStats {
        submissions: submissions.len(),
        ..ExtractStats::default()
    };
    let mut dedup: BTreeMap<(String, String), Pending> = BTreeMap::new();
    for result in per_submission {
        stats.examples_parsed += result.parsed;
        stats.parse_errors += result.parse_errors;
        stats.passing_examples += result.passing;
        for (example, timestamp, student_id, failed) in result.candidates {
            stats.wfes_before_dedup += 1;
            let key = (student_id, example.raw_text.clone());
            match dedup.get_mut(&key) {
                Some(existing) => {
                    stats.duplicates_merged += 1;
                    if (timestamp, example.source_line) < (existing.1, existing.0.source_line) {
                        *existing = (example, timestamp, failed);
                    }
                }
                None => {
                    dedup.insert(key, (example, timestamp, failed));
                }
            }
        }
    }

    let mut records: Vec<WfeRecord> = dedup
        .into_iter()
        .map(|((student_id, _), (example, timestamp, failed_wheats))| WfeRecord {
            wfe_id: String::new(),
            example,
            student_id,
            timestamp,
            failed_wheats,
        })
        .collect();
    records.sort_by(|a, b| {
        (a.timestamp, &a.student_id, a.example.source_line, &a.example.raw_text).cmp(&(
            b.timestamp,
            &b.student_id,
            b.example.source_line,
            &b.example.raw_text,
        ))
    });
    for (i, r) in records.iter_mut().enumerate() {
        r.wfe_id = format!("wfe-{:06}", i + 1);
    }
    (records, stats)
}

/// A hint exists when the vector has one or two m-bits: the matching
/// mutants' characteristics describe the likely misconception. More matches
/// than that pinpoint nothing.
pub fn hint_for(
    _wfe: &WfeRecord,
    fv: &FeatureVector,
    problem: &ProblemSpec,
) -> Option<String> {
    let m = fv.m_count();
    if m == 0 || m > 2 {
        return None;
    }
    let mut texts: Vec<String> = Vec::new();
    for (i, mutant) in problem.mutant_family.iter().enumerate() {
        if fv.bit(i) {
            if let Some(c) = mutant
                .characteristic_id
                .as_deref()
                .and_then(|id| problem.characteristic(id))
            {
                if !texts.contains(&c.text) {
                    texts.push(c.text.clone());
                }
            }
        }
    }
    if texts.is_empty() {
        None
    } else {
        Some(texts.join(" / "))
    }
}
