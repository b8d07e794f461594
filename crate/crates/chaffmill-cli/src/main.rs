//! chaffmill: mine conceptual mutants from wheat-failing student examples.
//!
//! Stages compose through files so humans can review between steps:
//! `extract` pulls WFEs out of submission logs, `featurize` runs them
//! against the mutant family, `cluster` groups equal vectors, `report`
//! prints the table, `select` builds a chaff suite, `audit` rates it.
//! `run` assesses one suite the way students see it; `baseline`,
//! `eval-clusters`, and `compare` evaluate. Exit codes: 0 success, 1
//! domain error, 2 usage error.

mod manifest;

use chaffmill::baseline::{affinity_propagation, ApParams};
use chaffmill::cluster::{cluster_by_vector, featurize_corpus, rank_clusters, RankOptions};
use chaffmill::harness::{assess_source, extract_wfes, Validity};
use chaffmill::io;
use chaffmill::metrics::{v_measure, LabeledPartition};
use chaffmill::problems::load_problem;
use chaffmill::select::{audit_chaffs, select_chaffs, AuditThresholds, SelectOptions};
use chaffmill::stats::{cohens_d, two_proportion_z};
use chaffmill::synth::{generate_cohort, SynthConfig};
use chaffmill::{Evaluator, ProblemSpec};
use clap::{Args, Parser, Subcommand, ValueEnum};
use manifest::RunManifest;
use std::collections::BTreeSet;
use std::io::Write as _;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "chaffmill", version, about = "Turn wheat-failing examples into conceptual mutants")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Worker threads for parallel stages; default uses all cores.
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Args)]
struct ProblemArg {
    /// Problem config JSON, or builtin:median / builtin:docdiff.
    #[arg(long)]
    problem: String,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Assess one example suite against wheats and deployed chaffs.
    Run {
        #[command(flatten)]
        problem: ProblemArg,
        /// Suite file: one example per line, check:/end wrappers allowed.
        #[arg(long)]
        suite: String,
        /// Chaff suite JSON; defaults to the whole mutant family.
        #[arg(long)]
        chaffs: Option<String>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Extract wheat-failing examples from a submissions log.
    Extract {
        #[command(flatten)]
        problem: ProblemArg,
        /// Submissions JSONL: {"student_id", "timestamp", "suite"}.
        #[arg(long)]
        submissions: String,
        /// WFE JSONL output; stdout when omitted.
        #[arg(long)]
        out: Option<String>,
    },
    /// Run every WFE against the mutant family, emitting feature vectors.
    Featurize {
        #[command(flatten)]
        problem: ProblemArg,
        #[arg(long)]
        wfes: String,
        /// Vectors JSONL output; stdout when omitted.
        #[arg(long)]
        out: Option<String>,
    },
    /// Group WFEs with identical feature vectors into ranked clusters.
    Cluster {
        #[command(flatten)]
        problem: ProblemArg,
        /// Feature vectors JSONL (from featurize).
        #[arg(long, conflicts_with = "wfes")]
        vectors: Option<String>,
        /// WFE JSONL; featurized on the fly when given instead of --vectors.
        #[arg(long)]
        wfes: Option<String>,
        /// Students whose WFEs are dropped before ranking (outlier filtering).
        #[arg(long, value_delimiter = ',')]
        exclude_students: Vec<String>,
        /// Drop clusters with fewer distinct students than this.
        #[arg(long, default_value_t = 1)]
        min_distinct_students: usize,
        /// Cluster report JSON output; stdout when omitted.
        #[arg(long)]
        out: Option<String>,
    },
    /// Print a cluster report as a table, CSV, or JSON.
    Report {
        /// Cluster report JSON (from cluster).
        #[arg(long)]
        clusters: String,
        /// Show only the largest N clusters.
        #[arg(long)]
        top: Option<usize>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Choose a deployable chaff suite from ranked clusters.
    Select {
        #[command(flatten)]
        problem: ProblemArg,
        #[arg(long)]
        clusters: String,
        /// Target suite size.
        #[arg(long)]
        n: usize,
        /// Cluster ids (compact vector strings) to skip as uninformative.
        #[arg(long, value_delimiter = ',')]
        skip: Vec<String>,
        /// Mutant ids to force into the suite (expert picks).
        #[arg(long, value_delimiter = ',')]
        include: Vec<String>,
        /// Guarantee at least one chaff per subproblem when possible.
        #[arg(long)]
        must_cover_subproblems: bool,
        /// Chaff suite JSON output; stdout when omitted.
        #[arg(long)]
        out: Option<String>,
    },
    /// Rate each deployed chaff by the share of WFEs that match it.
    Audit {
        #[command(flatten)]
        problem: ProblemArg,
        #[arg(long)]
        vectors: String,
        /// Chaff suite JSON (from select).
        #[arg(long)]
        suite: String,
        /// Pass-rate at or above this is under-constrained.
        #[arg(long, default_value_t = 0.8)]
        hi: f64,
        /// Pass-rate at or below this is over-constrained.
        #[arg(long, default_value_t = 0.01)]
        lo: f64,
        #[arg(long)]
        out: Option<String>,
    },
    /// Score a clustering against ground-truth class labels.
    #[command(name = "eval-clusters")]
    EvalClusters {
        /// Cluster report JSON.
        #[arg(long)]
        clusters: String,
        /// CSV: wfe_id,class_label — or raw_text,student_id,label with --wfes.
        #[arg(long)]
        ground_truth: String,
        /// WFE JSONL for joining a raw_text-keyed truth file.
        #[arg(long)]
        wfes: Option<String>,
        /// Class labels to leave out (e.g. typo).
        #[arg(long, value_delimiter = ',')]
        exclude_class: Vec<String>,
        #[arg(long)]
        out: Option<String>,
    },
    /// Syntactic baseline: Levenshtein distance + affinity propagation.
    Baseline {
        #[arg(long)]
        wfes: String,
        /// Collapse whitespace and case before measuring distance.
        #[arg(long)]
        normalize: bool,
        #[arg(long, default_value_t = 0.5)]
        damping: f64,
        #[arg(long, default_value_t = 1000)]
        max_iter: usize,
        /// Iterations the assignment must hold still to count as converged.
        #[arg(long, default_value_t = 5)]
        stable_window: usize,
        /// Assignments CSV output; stdout when omitted.
        #[arg(long)]
        out: Option<String>,
    },
    /// Two-tailed two-proportion Z test and Cohen's D for two cohorts.
    Compare {
        /// Successes and trials for each cohort.
        #[arg(long)]
        k1: u64,
        #[arg(long)]
        n1: u64,
        #[arg(long)]
        k2: u64,
        #[arg(long)]
        n2: u64,
        #[arg(long)]
        out: Option<String>,
    },
    /// Generate a synthetic cohort with planted misconceptions.
    Synth {
        #[command(flatten)]
        problem: ProblemArg,
        /// Synth config JSON (students, mix, typo_rate, ...).
        #[arg(long)]
        config: String,
        /// Explicit seed; no wall-clock seeding.
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out_submissions: String,
        #[arg(long)]
        out_truth: String,
    },
}

enum CliError {
    Domain(String),
    Usage(String),
}

impl CliError {
    fn domain(e: impl std::fmt::Display) -> CliError {
        CliError::Domain(e.to_string())
    }
}

type CliResult = Result<(), CliError>;

macro_rules! from_domain_error {
    ($($ty:ty),+) => {
        $(impl From<$ty> for CliError {
            fn from(e: $ty) -> CliError {
                CliError::Domain(e.to_string())
            }
        })+
    };
}

from_domain_error!(
    chaffmill::problems::ProblemError,
    chaffmill::io::IoError,
    chaffmill::harness::HarnessError,
    chaffmill::cluster::ClusterError,
    chaffmill::select::SelectError,
    chaffmill::metrics::MetricsError,
    chaffmill::stats::StatsError,
    chaffmill::synth::SynthError,
    std::io::Error
);

fn main() -> ExitCode {
    let cli = Cli::parse();
    let jobs = cli.jobs;
    let outcome = chaffmill::par::with_jobs(jobs, move || dispatch(cli.command));
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Domain(msg)) => {
            eprintln!("error: {}", msg);
            ExitCode::from(1)
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("usage error: {}", msg);
            ExitCode::from(2)
        }
    }
}

/// Writes `content` to `path`, or to stdout when no path is given; file
/// outputs get a manifest sidecar.
fn emit(out: &Option<String>, content: &str, manifest: RunManifest) -> CliResult {
    match out {
        Some(path) => {
            std::fs::write(path, content).map_err(CliError::domain)?;
            manifest.write_beside(path).map_err(CliError::domain)?;
            Ok(())
        }
        None => {
            print!("{}", content);
            std::io::stdout().flush().map_err(CliError::domain)?;
            Ok(())
        }
    }
}

fn load(problem: &ProblemArg) -> Result<ProblemSpec, CliError> {
    Ok(load_problem(&problem.problem)?)
}

fn dispatch(command: Command) -> CliResult {
    match command {
        Command::Run {
            problem,
            suite,
            chaffs,
            format,
        } => cmd_run(&problem, &suite, chaffs.as_deref(), format),
        Command::Extract {
            problem,
            submissions,
            out,
        } => cmd_extract(&problem, &submissions, &out),
        Command::Featurize { problem, wfes, out } => cmd_featurize(&problem, &wfes, &out),
        Command::Cluster {
            problem,
            vectors,
            wfes,
            exclude_students,
            min_distinct_students,
            out,
        } => cmd_cluster(&problem, vectors, wfes, exclude_students, min_distinct_students, &out),
        Command::Report {
            clusters,
            top,
            format,
        } => cmd_report(&clusters, top, format),
        Command::Select {
            problem,
            clusters,
            n,
            skip,
            include,
            must_cover_subproblems,
            out,
        } => cmd_select(&problem, &clusters, n, skip, include, must_cover_subproblems, &out),
        Command::Audit {
            problem,
            vectors,
            suite,
            hi,
            lo,
            out,
        } => cmd_audit(&problem, &vectors, &suite, hi, lo, &out),
        Command::EvalClusters {
            clusters,
            ground_truth,
            wfes,
            exclude_class,
            out,
        } => cmd_eval_clusters(&clusters, &ground_truth, wfes.as_deref(), &exclude_class, &out),
        Command::Baseline {
            wfes,
            normalize,
            damping,
            max_iter,
            stable_window,
            out,
        } => cmd_baseline(&wfes, normalize, damping, max_iter, stable_window, &out),
        Command::Compare { k1, n1, k2, n2, out } => cmd_compare(k1, n1, k2, n2, &out),
        Command::Synth {
            problem,
            config,
            seed,
            out_submissions,
            out_truth,
        } => cmd_synth(&problem, &config, seed, &out_submissions, &out_truth),
    }
}

fn cmd_run(
    problem_arg: &ProblemArg,
    suite_path: &str,
    chaffs_path: Option<&str>,
    format: Format,
) -> CliResult {
    let problem = load(problem_arg)?;
    let eval = Evaluator::new(&problem);
    let suite_text = std::fs::read_to_string(suite_path)
        .map_err(|e| CliError::Domain(format!("{}: {}", suite_path, e)))?;
    let deployed: Vec<String> = match chaffs_path {
        Some(path) => {
            let suite = io::read_chaff_suite(path)?;
            if suite.problem != problem.name {
                return Err(CliError::Domain(format!(
                    "{}: chaff suite is for `{}`, not `{}`",
                    path, suite.problem, problem.name
                )));
            }
            suite.ids()
        }
        None => problem.mutant_family.iter().map(|m| m.id.clone()).collect(),
    };
    let report = assess_source(&eval, &suite_text, &deployed)?;

    if format == Format::Json {
        let json = serde_json::json!({
            "valid": report.is_valid(),
            "flags": match &report.validity {
                Validity::Valid => Vec::new(),
                Validity::Invalid(flags) => flags.clone(),
            },
            "chaffs_caught": report.chaffs_caught,
            "hints": report.hints,
            "parse_errors": report.parse_errors,
        });
        println!("{}", serde_json::to_string_pretty(&json).expect("serializable"));
        return Ok(());
    }

    match &report.validity {
        Validity::Valid => {
            println!("VALID");
            let outcomes = report.chaffs_caught.as_ref().expect("valid suites get chaff results");
            let total = outcomes.caught.len() + outcomes.missed.len();
            println!("Caught {} of {} sample buggy programs.", outcomes.caught.len(), total);
            if !outcomes.caught.is_empty() {
                println!("  caught: {}", outcomes.caught.join(", "));
            }
            if !outcomes.missed.is_empty() {
                println!("  missed: {}", outcomes.missed.join(", "));
            }
        }
        Validity::Invalid(flags) => {
            println!("INCORRECT — thoroughness is unknown until every example is valid.");
            println!("These examples do not match the assignment behavior:");
            for flag in flags {
                println!("  line {}: {}", flag.line, flag.raw_text);
            }
            for (line, hint) in &report.hints {
                println!("  hint (line {}): {}", line, hint);
            }
        }
    }
    if !report.parse_errors.is_empty() {
        println!("Malformed lines:");
        for e in &report.parse_errors {
            println!("  {}", e);
        }
    }
    Ok(())
}

fn cmd_extract(problem_arg: &ProblemArg, submissions_path: &str, out: &Option<String>) -> CliResult {
    let problem = load(problem_arg)?;
    let eval = Evaluator::new(&problem);
    let submissions = io::read_submissions(submissions_path)?;
    let (wfes, stats) = extract_wfes(&eval, &submissions);
    let mut buf = Vec::new();
    io::write_wfes(&mut buf, &wfes).map_err(CliError::domain)?;
    let manifest = RunManifest::new("extract")
        .with_problem(&problem_arg.problem, &problem)
        .map_err(CliError::domain)?
        .with_input(submissions_path)
        .map_err(CliError::domain)?;
    emit(out, &String::from_utf8(buf).expect("utf-8"), manifest)?;
    eprintln!(
        "{}",
        serde_json::to_string(&stats).expect("serializable")
    );
    Ok(())
}

fn cmd_featurize(problem_arg: &ProblemArg, wfes_path: &str, out: &Option<String>) -> CliResult {
    let problem = load(problem_arg)?;
    let eval = Evaluator::new(&problem);
    let wfes = io::read_wfes(wfes_path)?;
    let vectors = featurize_corpus(&eval, &wfes);
    let mut buf = Vec::new();
    io::write_vectors(&mut buf, &vectors, &problem).map_err(CliError::domain)?;
    let manifest = RunManifest::new("featurize")
        .with_problem(&problem_arg.problem, &problem)
        .map_err(CliError::domain)?
        .with_input(wfes_path)
        .map_err(CliError::domain)?;
    emit(out, &String::from_utf8(buf).expect("utf-8"), manifest)
}

fn cmd_cluster(
    problem_arg: &ProblemArg,
    vectors_path: Option<String>,
    wfes_path: Option<String>,
    exclude_students: Vec<String>,
    min_distinct_students: usize,
    out: &Option<String>,
) -> CliResult {
    let problem = load(problem_arg)?;
    let (vectors, input_path) = match (&vectors_path, &wfes_path) {
        (Some(path), None) => (io::read_vectors(path, &problem)?, path.clone()),
        (None, Some(path)) => {
            let eval = Evaluator::new(&problem);
            let wfes = io::read_wfes(path)?;
            (featurize_corpus(&eval, &wfes), path.clone())
        }
        _ => {
            return Err(CliError::Usage(
                "cluster needs exactly one of --vectors or --wfes".to_string(),
            ))
        }
    };
    let clusters = cluster_by_vector(&vectors, &problem)?;
    let options = RankOptions {
        exclude_students: exclude_students.into_iter().collect(),
        min_distinct_students,
    };
    let ranked = rank_clusters(clusters, &options);
    let report = io::ClusterReportFile::new(&problem, &ranked);
    let manifest = RunManifest::new("cluster")
        .with_problem(&problem_arg.problem, &problem)
        .map_err(CliError::domain)?
        .with_input(&input_path)
        .map_err(CliError::domain)?;
    emit(out, &(report.to_json() + "\n"), manifest)
}

fn cmd_report(clusters_path: &str, top: Option<usize>, format: Format) -> CliResult {
    let report = io::read_cluster_report(clusters_path)?;
    let clusters = report.clusters();
    let shown = top.unwrap_or(clusters.len()).min(clusters.len());
    match format {
        Format::Json => {
            println!("{}", report.to_json());
        }
        Format::Csv => {
            let mut buf = Vec::new();
            io::write_cluster_csv(&mut buf, &clusters[..shown]).map_err(CliError::domain)?;
            print!("{}", String::from_utf8(buf).expect("utf-8"));
        }
        Format::Text => {
            println!(
                "{} WFEs in {} clusters; all-d: {} ({:.1}%); in 1-m or 2-m clusters: {} of {}",
                report.total_wfes,
                clusters.len(),
                report.all_d_wfes,
                report.all_d_fraction * 100.0,
                report.small_m_wfes,
                report.total_wfes
            );
            println!("{:>6}  {:>8}  {:<10}  vector / candidate description", "size", "students", "category");
            for c in &clusters[..shown] {
                println!(
                    "{:>6}  {:>8}  {:<10}  {}",
                    c.size(),
                    c.distinct_students(),
                    c.category.to_string(),
                    c.vector.spaced()
                );
                if let Some(desc) = &c.candidate_description {
                    println!("{:>6}  {:>8}  {:<10}  {}", "", "", "", desc);
                }
            }
        }
    }
    Ok(())
}

fn cmd_select(
    problem_arg: &ProblemArg,
    clusters_path: &str,
    n: usize,
    skip: Vec<String>,
    include: Vec<String>,
    must_cover_subproblems: bool,
    out: &Option<String>,
) -> CliResult {
    let problem = load(problem_arg)?;
    let report = io::read_cluster_report(clusters_path)?;
    report.check_problem(clusters_path, &problem)?;
    let ranked = report.clusters();
    let options = SelectOptions {
        n,
        skip: skip.into_iter().collect::<BTreeSet<_>>(),
        must_cover_subproblems,
        include,
    };
    let suite = select_chaffs(&ranked, &problem, &options)?;
    if let Some(warning) = &suite.shortfall {
        eprintln!("warning: {}", warning);
    }
    let manifest = RunManifest::new("select")
        .with_problem(&problem_arg.problem, &problem)
        .map_err(CliError::domain)?
        .with_input(clusters_path)
        .map_err(CliError::domain)?;
    emit(out, &(io::chaff_suite_json(&suite, &problem) + "\n"), manifest)
}

fn cmd_audit(
    problem_arg: &ProblemArg,
    vectors_path: &str,
    suite_path: &str,
    hi: f64,
    lo: f64,
    out: &Option<String>,
) -> CliResult {
    let problem = load(problem_arg)?;
    let vectors = io::read_vectors(vectors_path, &problem)?;
    let suite = io::read_chaff_suite(suite_path)?;
    if suite.problem != problem.name {
        return Err(CliError::Domain(format!(
            "{}: chaff suite is for `{}`, not `{}`",
            suite_path, suite.problem, problem.name
        )));
    }
    let audit = audit_chaffs(&vectors, &suite, &problem, AuditThresholds { hi, lo })?;
    let manifest = RunManifest::new("audit")
        .with_problem(&problem_arg.problem, &problem)
        .map_err(CliError::domain)?
        .with_input(vectors_path)
        .map_err(CliError::domain)?
        .with_input(suite_path)
        .map_err(CliError::domain)?;
    emit(
        out,
        &(serde_json::to_string_pretty(&audit).expect("serializable") + "\n"),
        manifest,
    )
}

fn cmd_eval_clusters(
    clusters_path: &str,
    truth_path: &str,
    wfes_path: Option<&str>,
    exclude_class: &[String],
    out: &Option<String>,
) -> CliResult {
    let report = io::read_cluster_report(clusters_path)?;
    // wfe_id -> cluster id.
    let mut cluster_of = std::collections::BTreeMap::new();
    for c in report.clusters() {
        for m in &c.members {
            cluster_of.insert(m.wfe_id.clone(), c.id.clone());
        }
    }
    // wfe_id -> class label, from either truth schema.
    let mut class_of: Vec<(String, String)> = Vec::new();
    match io::read_ground_truth_csv(truth_path) {
        Ok(rows) => class_of = rows,
        Err(_) => {
            let rows = io::read_truth_csv(truth_path)?;
            let wfes_path = wfes_path.ok_or_else(|| {
                CliError::Usage(format!(
                    "{} is keyed by raw_text; pass --wfes to join it to wfe ids",
                    truth_path
                ))
            })?;
            let wfes = io::read_wfes(wfes_path)?;
            let mut by_key = std::collections::BTreeMap::new();
            for w in &wfes {
                by_key.insert((w.student_id.clone(), w.example.raw_text.clone()), w.wfe_id.clone());
            }
            for (raw_text, student_id, label) in rows {
                if let Some(id) = by_key.get(&(student_id, raw_text)) {
                    class_of.push((id.clone(), label));
                }
            }
        }
    }
    let mut part = LabeledPartition::new();
    for (wfe_id, label) in &class_of {
        if exclude_class.contains(label) {
            continue;
        }
        if let Some(cluster) = cluster_of.get(wfe_id) {
            part.push(wfe_id, label, cluster);
        }
    }
    if part.is_empty() {
        return Err(CliError::Domain(format!(
            "no labeled items overlap between {} and {}",
            truth_path, clusters_path
        )));
    }
    let scores = v_measure(&part)?;
    let json = serde_json::json!({
        "homogeneity": scores.homogeneity,
        "completeness": scores.completeness,
        "v_measure": scores.v_measure,
        "items": part.len(),
    });
    let mut manifest = RunManifest::new("eval-clusters")
        .with_input(clusters_path)
        .map_err(CliError::domain)?
        .with_input(truth_path)
        .map_err(CliError::domain)?;
    if let Some(path) = wfes_path {
        manifest = manifest.with_input(path).map_err(CliError::domain)?;
    }
    emit(
        out,
        &(serde_json::to_string_pretty(&json).expect("serializable") + "\n"),
        manifest,
    )
}

fn cmd_baseline(
    wfes_path: &str,
    normalize: bool,
    damping: f64,
    max_iter: usize,
    stable_window: usize,
    out: &Option<String>,
) -> CliResult {
    let wfes = io::read_wfes(wfes_path)?;
    if wfes.is_empty() {
        return Err(CliError::Domain(format!("{}: no WFEs to cluster", wfes_path)));
    }
    if !(0.5..1.0).contains(&damping) {
        return Err(CliError::Usage(format!(
            "damping must lie in [0.5, 1), got {}",
            damping
        )));
    }
    let texts: Vec<String> = wfes.iter().map(|w| w.example.raw_text.clone()).collect();
    let sim = chaffmill::baseline::similarity_matrix(&texts, normalize);
    let clustering = affinity_propagation(
        &sim,
        ApParams {
            damping,
            max_iter,
            stable_window,
        },
    );
    let mut buf = Vec::new();
    io::write_baseline_csv(&mut buf, &wfes, &clustering).map_err(CliError::domain)?;
    let meta = serde_json::json!({
        "iterations_run": clustering.iterations_run,
        "converged": clustering.converged,
        "clusters": clustering.cluster_count(),
    });
    let manifest = RunManifest::new("baseline")
        .with_input(wfes_path)
        .map_err(CliError::domain)?;
    match out {
        Some(_) => {
            emit(out, &String::from_utf8(buf).expect("utf-8"), manifest)?;
            println!("{}", meta);
        }
        None => {
            emit(out, &String::from_utf8(buf).expect("utf-8"), manifest)?;
            eprintln!("{}", meta);
        }
    }
    Ok(())
}

fn cmd_compare(k1: u64, n1: u64, k2: u64, n2: u64, out: &Option<String>) -> CliResult {
    let z = two_proportion_z(k1, n1, k2, n2)?;
    let d = cohens_d(k1, n1, k2, n2)?;
    let json = serde_json::json!({
        "z": z.z,
        "p": z.p,
        "rate1": z.rate1,
        "rate2": z.rate2,
        "n1": n1,
        "n2": n2,
        "degenerate_z": z.degenerate,
        "cohens_d": d.d,
        "ci95": [d.ci95.0, d.ci95.1],
        "degenerate_d": d.degenerate,
    });
    emit(
        out,
        &(serde_json::to_string_pretty(&json).expect("serializable") + "\n"),
        RunManifest::new("compare"),
    )
}

fn cmd_synth(
    problem_arg: &ProblemArg,
    config_path: &str,
    seed: u64,
    out_submissions: &str,
    out_truth: &str,
) -> CliResult {
    let problem = load(problem_arg)?;
    let eval = Evaluator::new(&problem);
    let text = std::fs::read_to_string(config_path)
        .map_err(|e| CliError::Domain(format!("{}: {}", config_path, e)))?;
    let mut cfg: SynthConfig = serde_json::from_str(&text)
        .map_err(|e| CliError::Domain(format!("{}: {}", config_path, e)))?;
    cfg.seed = seed;
    let (submissions, truth) = generate_cohort(&cfg, &eval)?;

    let mut buf = Vec::new();
    io::write_submissions(&mut buf, &submissions).map_err(CliError::domain)?;
    std::fs::write(out_submissions, &buf).map_err(CliError::domain)?;
    RunManifest::new("synth")
        .with_problem(&problem_arg.problem, &problem)
        .map_err(CliError::domain)?
        .with_input(config_path)
        .map_err(CliError::domain)?
        .with_seed(seed)
        .write_beside(out_submissions)
        .map_err(CliError::domain)?;

    let mut buf = Vec::new();
    io::write_truth_csv(&mut buf, &truth).map_err(CliError::domain)?;
    std::fs::write(out_truth, &buf).map_err(CliError::domain)?;
    RunManifest::new("synth")
        .with_problem(&problem_arg.problem, &problem)
        .map_err(CliError::domain)?
        .with_input(config_path)
        .map_err(CliError::domain)?
        .with_seed(seed)
        .write_beside(out_truth)
        .map_err(CliError::domain)?;

    eprintln!(
        "{}",
        serde_json::json!({
            "submissions": submissions.len(),
            "labeled_examples": truth.len(),
        })
    );
    Ok(())
}
