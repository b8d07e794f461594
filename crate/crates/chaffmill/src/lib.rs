//! Turns logged student example suites into conceptual mutants ("chaffs").
//!
//! The pipeline mirrors how a course staff would hunt for misconceptions:
//!
//! 1. [`lang`] parses example suites (`median([list: 1, 2, 3]) is 2`) into
//!    exact-rational values.
//! 2. [`problems`] hosts executable wheats (correct implementations) and
//!    mutant families, either built in or behind a subprocess plug-in.
//! 3. [`harness`] assesses suites Exemplar-style and extracts wheat-failing
//!    examples (WFEs) from submission logs.
//! 4. [`cluster`] builds m/d feature vectors by running every WFE against
//!    every mutant, then groups WFEs with identical vectors.
//! 5. [`baseline`] is the syntactic alternative (Levenshtein distance fed
//!    into affinity propagation) that semantic clustering is compared to.
//! 6. [`metrics`] and [`stats`] score clusterings (homogeneity, completeness,
//!    V-Measure) and compare cohorts (two-tailed Z, Cohen's D).
//! 7. [`select`] turns ranked clusters into a deployable chaff suite and
//!    audits chaff utility.
//! 8. [`synth`] generates seeded cohorts with planted misconceptions so the
//!    whole pipeline can be validated against a known ground truth.
//!
//! The WFE-by-mutant evaluation matrix and the similarity-matrix / message
//! passing loops are data parallel; they run on rayon when the `parallel`
//! feature (default) is enabled and fall back to sequential loops otherwise.
//! Both paths produce identical output.

pub mod baseline;
pub mod cluster;
pub mod harness;
pub mod io;
pub mod lang;
pub mod metrics;
pub mod par;
pub mod problems;
pub mod select;
pub mod stats;
pub mod synth;
#[cfg(feature = "testkit")]
pub mod testkit;

pub use lang::{parse_suite, render_example, value_eq, Example, ExampleSuite, Value};
pub use problems::{Evaluator, Implementation, ProblemSpec, Verdict};
