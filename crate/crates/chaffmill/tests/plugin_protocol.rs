//! Exercises the subprocess plug-in path end to end against the bundled
//! demo plugin: healthy round trips, wheat agreement with the builtin,
//! timeouts, crashes, and protocol violations. Every failure mode must
//! surface as an error verdict, never a pipeline abort.

use chaffmill::harness::assess_source;
use chaffmill::lang::{parse_example, Value};
use chaffmill::problems::{
    builtin_median, Backend, Implementation, Outcome, PluginSpec, ProblemSpec,
};
use chaffmill::Evaluator;
use rand::{Rng, SeedableRng};

fn demo_plugin(mode: &str, timeout_ms: u64) -> PluginSpec {
    PluginSpec {
        cmd: vec![env!("CARGO_BIN_EXE_demo-plugin").to_string(), mode.to_string()],
        timeout_ms,
    }
}

/// The builtin median problem with its wheat swapped for a plugin wheat.
fn plugin_median_problem(mode: &str, timeout_ms: u64) -> ProblemSpec {
    let mut problem = builtin_median();
    problem.wheats = vec![Implementation::wheat(
        "plugin-wheat",
        Backend::Plugin(demo_plugin(mode, timeout_ms)),
    )];
    problem
}

#[test]
fn plugin_wheat_answers_calls() {
    let problem = plugin_median_problem("median", 5_000);
    let eval = Evaluator::new(&problem);
    let wheat = &problem.wheats[0];
    let args = vec![Value::list(vec![Value::int(1), Value::int(2), Value::int(3)])];
    assert_eq!(eval.eval_call(wheat, "median", &args).unwrap(), Value::int(2));
    // Exact rationals cross the wire: even-length average is 3/2.
    let args = vec![Value::list(vec![Value::int(1), Value::int(2)])];
    assert_eq!(eval.eval_call(wheat, "median", &args).unwrap(), Value::ratio(3, 2));
    // Domain errors come back as plugin errors, which become error verdicts.
    let e = parse_example("median([list: ]) is 1").unwrap();
    let v = eval.run_example(wheat, &e);
    assert_eq!(v.outcome, Outcome::Error);
}

#[test]
fn plugin_wheat_agrees_with_builtin_wheat_on_random_inputs() {
    let builtin = builtin_median();
    let plugin = plugin_median_problem("median", 5_000);
    let builtin_eval = Evaluator::new(&builtin);
    let plugin_eval = Evaluator::new(&plugin);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    for _ in 0..60 {
        let len = rng.random_range(1..=7);
        let xs: Vec<Value> = (0..len).map(|_| Value::int(rng.random_range(-9..=9))).collect();
        let args = vec![Value::List(xs)];
        let a = builtin_eval
            .eval_call(&builtin.wheats[0], "median", &args)
            .unwrap();
        let b = plugin_eval
            .eval_call(&plugin.wheats[0], "median", &args)
            .unwrap();
        assert_eq!(a, b, "wheats disagree on {:?}", args);
    }
}

#[test]
fn figure_1b_assessment_works_through_a_plugin_wheat() {
    let problem = plugin_median_problem("median", 5_000);
    let eval = Evaluator::new(&problem);
    let chaffs: Vec<String> = problem.mutant_family.iter().map(|m| m.id.clone()).collect();
    let text = "check:\n  median([list: 1]) is 1\n  median([list: 1, 2, 3]) is 2\n  median([list: 3, 3, 3, 3]) is 3\n  median([list: 1, 1, 3]) is 1\n  median([list: 1, 1, 3, 4, 4]) is 3\nend\n";
    let report = assess_source(&eval, text, &chaffs).unwrap();
    assert!(report.is_valid());
    let outcomes = report.chaffs_caught.unwrap();
    assert_eq!(outcomes.caught.len(), 2);
}

#[test]
fn unresponsive_plugin_times_out() {
    let problem = plugin_median_problem("hang", 300);
    let eval = Evaluator::new(&problem);
    let e = parse_example("median([list: 1]) is 1").unwrap();
    let started = std::time::Instant::now();
    let v = eval.run_example(&problem.wheats[0], &e);
    assert_eq!(v.outcome, Outcome::Error);
    assert!(v.error_detail.unwrap().contains("timed out"));
    // The deadline is enforced, not merely eventual.
    assert!(started.elapsed() < std::time::Duration::from_secs(5));
}

#[test]
fn crashing_plugin_yields_error_verdicts_and_recovers() {
    let problem = plugin_median_problem("crash", 2_000);
    let eval = Evaluator::new(&problem);
    let e = parse_example("median([list: 1]) is 1").unwrap();
    // First call gets an answer before the process exits; afterwards the
    // handle respawns a fresh process per call.
    for _ in 0..3 {
        let v = eval.run_example(&problem.wheats[0], &e);
        assert!(matches!(v.outcome, Outcome::Pass | Outcome::Error));
    }
    let v = eval.run_example(&problem.wheats[0], &e);
    assert!(matches!(v.outcome, Outcome::Pass | Outcome::Error));
}

#[test]
fn mismatched_response_id_is_a_protocol_violation() {
    let problem = plugin_median_problem("bad-id", 2_000);
    let eval = Evaluator::new(&problem);
    let e = parse_example("median([list: 1]) is 1").unwrap();
    let v = eval.run_example(&problem.wheats[0], &e);
    assert_eq!(v.outcome, Outcome::Error);
    assert!(v.error_detail.unwrap().contains("does not match"));
}

#[test]
fn mean_plugin_mutant_behaves_like_builtin_mean() {
    // A full plugin-backed mutant: swap the builtin mean for the demo
    // plugin's mean mode and check a known disagreement with the wheat.
    let mut problem = builtin_median();
    problem.mutant_family[0] = Implementation {
        backend: Backend::Plugin(demo_plugin("median-mean", 5_000)),
        ..problem.mutant_family[0].clone()
    };
    let eval = Evaluator::new(&problem);
    let mean = &problem.mutant_family[0];
    let e = parse_example("median([list: 1, 1, 3]) is 5/3").unwrap();
    assert_eq!(eval.run_example(mean, &e).outcome, Outcome::Pass);
}
