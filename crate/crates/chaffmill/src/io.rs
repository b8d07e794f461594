//! File formats the pipeline stages compose through.
//!
//! - submissions: JSONL `{"student_id", "timestamp", "suite"}`
//! - WFEs: JSONL `{"wfe_id", "student_id", "timestamp", "example", "failed_wheats"}`
//! - vectors: JSONL `{"wfe_id", "student_id", "problem", "problem_hash", "vector"}`
//! - cluster report: JSON (embedding the problem hash) or CSV rows
//! - ground truth: CSV `wfe_id,class_label`; planted truth: CSV
//!   `raw_text,student_id,label`
//! - chaff suites: JSON
//!
//! Writers emit one canonical byte stream per logical content; identical
//! inputs produce identical files.

use crate::baseline::BaselineClustering;
use crate::cluster::{Cluster, FeatureVector, SplitReport, WfeVector};
use crate::harness::{Submission, WfeRecord};
use crate::lang::parse_suite;
use crate::problems::ProblemSpec;
use crate::select::ChaffSuite;
use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};
use std::io::{BufRead, BufReader, Read, Write};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    File {
        path: String,
        source: std::io::Error,
    },
    #[error("{path} line {line}: {message}")]
    Record {
        path: String,
        line: usize,
        message: String,
    },
    #[error("{path}: problem mismatch: file was built for `{found}` ({found_hash}), loaded problem is `{expected}` ({expected_hash})")]
    ProblemMismatch {
        path: String,
        found: String,
        found_hash: String,
        expected: String,
        expected_hash: String,
    },
}

fn file_err(path: &str, source: std::io::Error) -> IoError {
    IoError::File {
        path: path.to_string(),
        source,
    }
}

fn record_err(path: &str, line: usize, message: impl Into<String>) -> IoError {
    IoError::Record {
        path: path.to_string(),
        line,
        message: message.into(),
    }
}

fn rfc3339(ts: &DateTime<Utc>) -> String {
    ts.to_rfc3339_opts(SecondsFormat::Secs, true)
}

// --- submissions ---------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct SubmissionRow {
    student_id: String,
    timestamp: String,
    suite: String,
}

pub fn write_submissions(w: &mut impl Write, submissions: &[Submission]) -> std::io::Result<()> {
    for s in submissions {
        let row = SubmissionRow {
            student_id: s.student_id.clone(),
            timestamp: rfc3339(&s.timestamp),
            suite: s.suite_text.clone(),
        };
        writeln!(w, "{}", serde_json::to_string(&row).expect("serializable"))?;
    }
    Ok(())
}

pub fn read_submissions(path: &str) -> Result<Vec<Submission>, IoError> {
    let file = std::fs::File::open(path).map_err(|e| file_err(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| file_err(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let row: SubmissionRow = serde_json::from_str(&line)
            .map_err(|e| record_err(path, i + 1, e.to_string()))?;
        let timestamp = DateTime::parse_from_rfc3339(&row.timestamp)
            .map_err(|e| record_err(path, i + 1, format!("bad timestamp: {}", e)))?
            .with_timezone(&Utc);
        if row.student_id.is_empty() {
            return Err(record_err(path, i + 1, "empty student_id"));
        }
        out.push(Submission {
            student_id: row.student_id,
            timestamp,
            suite_text: row.suite,
        });
    }
    Ok(out)
}

// --- WFE records ---------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct WfeRow {
    wfe_id: String,
    student_id: String,
    timestamp: String,
    example: String,
    failed_wheats: Vec<String>,
}

pub fn write_wfes(w: &mut impl Write, wfes: &[WfeRecord]) -> std::io::Result<()> {
    for r in wfes {
        let row = WfeRow {
            wfe_id: r.wfe_id.clone(),
            student_id: r.student_id.clone(),
            timestamp: rfc3339(&r.timestamp),
            example: r.example.raw_text.clone(),
            failed_wheats: r.failed_wheats.clone(),
        };
        writeln!(w, "{}", serde_json::to_string(&row).expect("serializable"))?;
    }
    Ok(())
}

pub fn read_wfes(path: &str) -> Result<Vec<WfeRecord>, IoError> {
    let file = std::fs::File::open(path).map_err(|e| file_err(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| file_err(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let row: WfeRow =
            serde_json::from_str(&line).map_err(|e| record_err(path, i + 1, e.to_string()))?;
        let (suite, errors) = parse_suite(&row.example);
        if suite.examples.len() != 1 || !errors.is_empty() {
            return Err(record_err(
                path,
                i + 1,
                format!("example does not parse: {:?}", row.example),
            ));
        }
        let timestamp = DateTime::parse_from_rfc3339(&row.timestamp)
            .map_err(|e| record_err(path, i + 1, format!("bad timestamp: {}", e)))?
            .with_timezone(&Utc);
        if row.failed_wheats.is_empty() {
            return Err(record_err(path, i + 1, "failed_wheats must be nonempty"));
        }
        let mut example = suite.examples.into_iter().next().unwrap();
        example.raw_text = row.example;
        out.push(WfeRecord {
            wfe_id: row.wfe_id,
            example,
            student_id: row.student_id,
            timestamp,
            failed_wheats: row.failed_wheats,
        });
    }
    Ok(out)
}

// --- feature vectors -----------------------------------------------------

#[derive(Serialize, Deserialize)]
struct VectorRow {
    wfe_id: String,
    student_id: String,
    problem: String,
    problem_hash: String,
    vector: String,
}

pub fn write_vectors(
    w: &mut impl Write,
    items: &[WfeVector],
    problem: &ProblemSpec,
) -> std::io::Result<()> {
    let hash = problem.identity_hash();
    for item in items {
        let row = VectorRow {
            wfe_id: item.wfe_id.clone(),
            student_id: item.student_id.clone(),
            problem: problem.name.clone(),
            problem_hash: hash.clone(),
            vector: item.vector.spaced(),
        };
        writeln!(w, "{}", serde_json::to_string(&row).expect("serializable"))?;
    }
    Ok(())
}

/// Reads vectors and refuses files whose embedded problem identity or
/// vector length disagrees with the loaded problem.
pub fn read_vectors(path: &str, problem: &ProblemSpec) -> Result<Vec<WfeVector>, IoError> {
    let expected_hash = problem.identity_hash();
    let file = std::fs::File::open(path).map_err(|e| file_err(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| file_err(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let row: VectorRow =
            serde_json::from_str(&line).map_err(|e| record_err(path, i + 1, e.to_string()))?;
        if row.problem != problem.name || row.problem_hash != expected_hash {
            return Err(IoError::ProblemMismatch {
                path: path.to_string(),
                found: row.problem,
                found_hash: row.problem_hash,
                expected: problem.name.clone(),
                expected_hash,
            });
        }
        let vector = FeatureVector::parse(&row.vector)
            .ok_or_else(|| record_err(path, i + 1, format!("bad vector {:?}", row.vector)))?;
        if vector.len() != problem.family_size() {
            return Err(record_err(
                path,
                i + 1,
                format!(
                    "vector length {} does not match family size {}",
                    vector.len(),
                    problem.family_size()
                ),
            ));
        }
        out.push(WfeVector {
            wfe_id: row.wfe_id,
            student_id: row.student_id,
            vector,
        });
    }
    Ok(out)
}

// --- cluster report ------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct ClusterRow {
    id: String,
    vector: FeatureVector,
    size: usize,
    distinct_students: usize,
    category: crate::cluster::Category,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    candidate_description: Option<String>,
    members: Vec<crate::cluster::ClusterMember>,
}

#[derive(Serialize, Deserialize)]
pub struct ClusterReportFile {
    pub problem: String,
    pub problem_hash: String,
    pub family_size: usize,
    pub total_wfes: usize,
    pub all_d_wfes: usize,
    pub all_d_fraction: f64,
    /// WFEs in 1-m or 2-m clusters; the numerator cohort comparisons use.
    #[serde(default)]
    pub small_m_wfes: usize,
    #[serde(rename = "clusters")]
    rows: Vec<ClusterRow>,
}

impl ClusterReportFile {
    pub fn new(problem: &ProblemSpec, clusters: &[Cluster]) -> ClusterReportFile {
        let split = crate::cluster::split_report(clusters);
        let small_m_wfes = clusters
            .iter()
            .filter(|c| matches!(c.vector.m_count(), 1 | 2))
            .map(Cluster::size)
            .sum();
        ClusterReportFile {
            problem: problem.name.clone(),
            problem_hash: problem.identity_hash(),
            family_size: problem.family_size(),
            total_wfes: split.total_wfes,
            all_d_wfes: split.all_d_wfes,
            all_d_fraction: split.all_d_fraction,
            small_m_wfes,
            rows: clusters
                .iter()
                .map(|c| ClusterRow {
                    id: c.id.clone(),
                    vector: c.vector.clone(),
                    size: c.size(),
                    distinct_students: c.distinct_students(),
                    category: c.category,
                    candidate_description: c.candidate_description.clone(),
                    members: c.members.clone(),
                })
                .collect(),
        }
    }

    pub fn clusters(&self) -> Vec<Cluster> {
        self.rows
            .iter()
            .map(|r| Cluster {
                id: r.id.clone(),
                vector: r.vector.clone(),
                members: r.members.clone(),
                category: r.category,
                candidate_description: r.candidate_description.clone(),
            })
            .collect()
    }

    pub fn split(&self) -> SplitReport {
        crate::cluster::split_report(&self.clusters())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }

    pub fn check_problem(&self, path: &str, problem: &ProblemSpec) -> Result<(), IoError> {
        let expected_hash = problem.identity_hash();
        if self.problem != problem.name || self.problem_hash != expected_hash {
            return Err(IoError::ProblemMismatch {
                path: path.to_string(),
                found: self.problem.clone(),
                found_hash: self.problem_hash.clone(),
                expected: problem.name.clone(),
                expected_hash,
            });
        }
        Ok(())
    }
}

pub fn read_cluster_report(path: &str) -> Result<ClusterReportFile, IoError> {
    let mut text = String::new();
    std::fs::File::open(path)
        .and_then(|mut f| f.read_to_string(&mut text))
        .map_err(|e| file_err(path, e))?;
    serde_json::from_str(&text).map_err(|e| record_err(path, 1, e.to_string()))
}

/// Table-style CSV: size, distinct_students, vector (`d m ...`), category,
/// candidate description, member wfe ids (space-joined).
pub fn write_cluster_csv(w: &mut impl Write, clusters: &[Cluster]) -> std::io::Result<()> {
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record([
        "size",
        "distinct_students",
        "vector",
        "category",
        "candidate_description",
        "members",
    ])?;
    for c in clusters {
        let members: Vec<&str> = c.members.iter().map(|m| m.wfe_id.as_str()).collect();
        csv.write_record([
            c.size().to_string(),
            c.distinct_students().to_string(),
            c.vector.spaced(),
            c.category.to_string(),
            c.candidate_description.clone().unwrap_or_default(),
            members.join(" "),
        ])?;
    }
    csv.flush()?;
    Ok(())
}

// --- chaff suites --------------------------------------------------------

#[derive(Serialize)]
struct SuiteChaffRow<'a> {
    id: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    characteristic: Option<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    explanation: Option<&'a str>,
    provenance: &'a crate::select::Provenance,
}

/// Suite JSON enriched with each chaff's characteristic and explanation.
pub fn chaff_suite_json(suite: &ChaffSuite, problem: &ProblemSpec) -> String {
    #[derive(Serialize)]
    struct SuiteFile<'a> {
        problem: &'a str,
        chaffs: Vec<SuiteChaffRow<'a>>,
        #[serde(skip_serializing_if = "Option::is_none")]
        warning: Option<&'a str>,
    }
    let rows: Vec<SuiteChaffRow> = suite
        .chaffs
        .iter()
        .map(|pick| {
            let imp = problem.mutant(&pick.id);
            SuiteChaffRow {
                id: &pick.id,
                characteristic: imp.and_then(|m| m.characteristic_id.as_deref()),
                explanation: imp.and_then(|m| m.explanation.as_deref()),
                provenance: &pick.provenance,
            }
        })
        .collect();
    serde_json::to_string_pretty(&SuiteFile {
        problem: &suite.problem,
        chaffs: rows,
        warning: suite.shortfall.as_deref(),
    })
    .expect("serializable")
}

pub fn read_chaff_suite(path: &str) -> Result<ChaffSuite, IoError> {
    #[derive(Deserialize)]
    struct SuiteChaffIn {
        id: String,
        #[serde(default)]
        provenance: Option<crate::select::Provenance>,
    }
    #[derive(Deserialize)]
    struct SuiteIn {
        problem: String,
        chaffs: Vec<SuiteChaffIn>,
        #[serde(default)]
        warning: Option<String>,
    }
    let mut text = String::new();
    std::fs::File::open(path)
        .and_then(|mut f| f.read_to_string(&mut text))
        .map_err(|e| file_err(path, e))?;
    let parsed: SuiteIn =
        serde_json::from_str(&text).map_err(|e| record_err(path, 1, e.to_string()))?;
    Ok(ChaffSuite {
        problem: parsed.problem,
        chaffs: parsed
            .chaffs
            .into_iter()
            .map(|c| crate::select::ChaffPick {
                id: c.id,
                provenance: c.provenance.unwrap_or(crate::select::Provenance::Manual),
            })
            .collect(),
        shortfall: parsed.warning,
    })
}

// --- truth / ground truth CSV --------------------------------------------

/// Planted truth rows: `raw_text,student_id,label`.
pub fn write_truth_csv(
    w: &mut impl Write,
    truth: &crate::synth::PlantedTruth,
) -> std::io::Result<()> {
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record(["raw_text", "student_id", "label"])?;
    for (student, text, label) in truth.iter() {
        csv.write_record([text, student, label])?;
    }
    csv.flush()?;
    Ok(())
}

pub fn read_truth_csv(path: &str) -> Result<Vec<(String, String, String)>, IoError> {
    let file = std::fs::File::open(path).map_err(|e| file_err(path, e))?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(file);
    let mut out = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row = row.map_err(|e| record_err(path, i + 2, e.to_string()))?;
        if row.len() != 3 {
            return Err(record_err(path, i + 2, "expected raw_text,student_id,label"));
        }
        out.push((row[0].to_string(), row[1].to_string(), row[2].to_string()));
    }
    Ok(out)
}

/// Ground truth rows: `wfe_id,class_label`.
pub fn read_ground_truth_csv(path: &str) -> Result<Vec<(String, String)>, IoError> {
    let file = std::fs::File::open(path).map_err(|e| file_err(path, e))?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(file);
    let mut out = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row = row.map_err(|e| record_err(path, i + 2, e.to_string()))?;
        if row.len() != 2 {
            return Err(record_err(path, i + 2, "expected wfe_id,class_label"));
        }
        out.push((row[0].to_string(), row[1].to_string()));
    }
    Ok(out)
}

pub fn write_ground_truth_csv(
    w: &mut impl Write,
    rows: &[(String, String)],
) -> std::io::Result<()> {
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record(["wfe_id", "class_label"])?;
    for (id, label) in rows {
        csv.write_record([id, label])?;
    }
    csv.flush()?;
    Ok(())
}

// --- baseline assignments -------------------------------------------------

/// Assignments CSV: `wfe_id,exemplar_wfe_id`.
pub fn write_baseline_csv(
    w: &mut impl Write,
    wfes: &[WfeRecord],
    clustering: &BaselineClustering,
) -> std::io::Result<()> {
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record(["wfe_id", "exemplar_wfe_id"])?;
    for (i, wfe) in wfes.iter().enumerate() {
        let exemplar = &wfes[clustering.exemplar_of[i]];
        csv.write_record([&wfe.wfe_id, &exemplar.wfe_id])?;
    }
    csv.flush()?;
    Ok(())
}
