//! Executable problem definitions: wheats, mutant families, characteristics.
//!
//! A problem bundles one or more correct implementations (wheats) with an
//! ordered family of incorrect ones (mutants). The family order is fixed and
//! defines feature-vector bit positions. Two problems ship built in (median
//! and docdiff); external problems run behind a newline-delimited-JSON
//! subprocess protocol.

mod builtin;
mod config;
mod plugin;

pub use builtin::{builtin_docdiff, builtin_median, Builtin};
pub use config::load_problem;
pub use plugin::{plugin_call, value_from_wire, value_to_wire, PluginHandle};

use crate::lang::{value_eq, Example, Value};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::Mutex;
use thiserror::Error;

/// A key requirement of the problem statement from which mutants derive.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Characteristic {
    pub id: String,
    /// Human-readable statement of the requirement; doubles as hint text.
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure_notes: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Wheat,
    Mutant,
}

/// How an implementation is executed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Backend {
    Builtin(Builtin),
    Plugin(PluginSpec),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PluginSpec {
    pub cmd: Vec<String>,
    pub timeout_ms: u64,
}

/// An executable function table for a problem, correct or deliberately wrong.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Implementation {
    pub id: String,
    pub role: Role,
    /// The characteristic this mutant fails; wheats have none.
    pub characteristic_id: Option<String>,
    /// Short description of the mutation; wheats have none.
    pub explanation: Option<String>,
    /// Which part of a multi-part problem this mutant exercises.
    pub subproblem: Option<String>,
    pub backend: Backend,
}

impl Implementation {
    pub fn wheat(id: &str, backend: Backend) -> Implementation {
        Implementation {
            id: id.to_string(),
            role: Role::Wheat,
            characteristic_id: None,
            explanation: None,
            subproblem: None,
            backend,
        }
    }

    pub fn mutant(
        id: &str,
        characteristic: &str,
        explanation: &str,
        subproblem: &str,
        backend: Backend,
    ) -> Implementation {
        Implementation {
            id: id.to_string(),
            role: Role::Mutant,
            characteristic_id: Some(characteristic.to_string()),
            explanation: Some(explanation.to_string()),
            subproblem: Some(subproblem.to_string()),
            backend,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunctionSig {
    pub name: String,
    pub arity: usize,
    pub subproblem: String,
}

/// A registry entry: the full executable definition of one problem.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub name: String,
    pub functions: Vec<FunctionSig>,
    pub wheats: Vec<Implementation>,
    /// Fixed order; defines feature-vector bit positions.
    pub mutant_family: Vec<Implementation>,
    pub characteristics: Vec<Characteristic>,
}

#[derive(Debug, Error)]
pub enum ProblemError {
    #[error("problem `{0}`: no wheat defined")]
    NoWheat(String),
    #[error("problem `{0}`: duplicate implementation id `{1}`")]
    DuplicateImpl(String, String),
    #[error("problem `{0}`: duplicate characteristic id `{1}`")]
    DuplicateCharacteristic(String, String),
    #[error("problem `{0}`: mutant `{1}` references unknown characteristic `{2}`")]
    DanglingCharacteristic(String, String, String),
    #[error("problem `{0}`: wheat `{1}` must not reference a characteristic")]
    WheatWithCharacteristic(String, String),
    #[error("problem `{0}`: mutant `{1}` is missing a characteristic or explanation")]
    IncompleteMutant(String, String),
    #[error("unknown builtin implementation `{0}`")]
    UnknownBuiltin(String),
    #[error("unknown builtin problem `{0}` (available: median, docdiff)")]
    UnknownBuiltinProblem(String),
    #[error("cannot read problem config {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed problem config {path}: {source}")]
    Malformed {
        path: String,
        source: serde_json::Error,
    },
}

impl ProblemSpec {
    /// Checks referential integrity; every loaded problem passes through here.
    pub fn validate(&self) -> Result<(), ProblemError> {
        if self.wheats.is_empty() {
            return Err(ProblemError::NoWheat(self.name.clone()));
        }
        let mut seen = std::collections::HashSet::new();
        for imp in self.wheats.iter().chain(self.mutant_family.iter()) {
            if !seen.insert(imp.id.clone()) {
                return Err(ProblemError::DuplicateImpl(self.name.clone(), imp.id.clone()));
            }
        }
        let mut chars = std::collections::HashSet::new();
        for c in &self.characteristics {
            if !chars.insert(c.id.clone()) {
                return Err(ProblemError::DuplicateCharacteristic(
                    self.name.clone(),
                    c.id.clone(),
                ));
            }
        }
        for w in &self.wheats {
            if w.characteristic_id.is_some() {
                return Err(ProblemError::WheatWithCharacteristic(
                    self.name.clone(),
                    w.id.clone(),
                ));
            }
        }
        for m in &self.mutant_family {
            let c = m
                .characteristic_id
                .as_ref()
                .ok_or_else(|| ProblemError::IncompleteMutant(self.name.clone(), m.id.clone()))?;
            if m.explanation.is_none() {
                return Err(ProblemError::IncompleteMutant(self.name.clone(), m.id.clone()));
            }
            if !chars.contains(c) {
                return Err(ProblemError::DanglingCharacteristic(
                    self.name.clone(),
                    m.id.clone(),
                    c.clone(),
                ));
            }
        }
        Ok(())
    }

    pub fn function(&self, name: &str) -> Option<&FunctionSig> {
        self.functions.iter().find(|f| f.name == name)
    }

    pub fn mutant(&self, id: &str) -> Option<&Implementation> {
        self.mutant_family.iter().find(|m| m.id == id)
    }

    pub fn mutant_index(&self, id: &str) -> Option<usize> {
        self.mutant_family.iter().position(|m| m.id == id)
    }

    pub fn characteristic(&self, id: &str) -> Option<&Characteristic> {
        self.characteristics.iter().find(|c| c.id == id)
    }

    pub fn family_size(&self) -> usize {
        self.mutant_family.len()
    }

    /// Loads a built-in problem (`median` or `docdiff`).
    pub fn builtin(name: &str) -> Result<ProblemSpec, ProblemError> {
        match name {
            "median" => Ok(builtin_median()),
            "docdiff" => Ok(builtin_docdiff()),
            other => Err(ProblemError::UnknownBuiltinProblem(other.to_string())),
        }
    }

    /// Stable fingerprint of the problem's shape. Embedded in derived files
    /// so downstream commands can refuse stale or mismatched inputs.
    pub fn identity_hash(&self) -> String {
        let mut canon = String::new();
        let _ = writeln!(canon, "problem {}", self.name);
        for f in &self.functions {
            let _ = writeln!(canon, "fn {} {} {}", f.name, f.arity, f.subproblem);
        }
        for w in &self.wheats {
            let _ = writeln!(canon, "wheat {}", w.id);
        }
        for m in &self.mutant_family {
            let _ = writeln!(
                canon,
                "mutant {} {}",
                m.id,
                m.characteristic_id.as_deref().unwrap_or("")
            );
        }
        for c in &self.characteristics {
            let _ = writeln!(canon, "char {}", c.id);
        }
        hex::encode(Sha256::digest(canon.as_bytes()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Pass,
    Fail,
    Error,
}

/// Result of running one example against one implementation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub outcome: Outcome,
    /// Present iff the call completed (pass or fail).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub actual: Option<Value>,
    /// Present iff the call errored.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error_detail: Option<String>,
}

impl Verdict {
    pub fn is_pass(&self) -> bool {
        self.outcome == Outcome::Pass
    }
}

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("unknown function `{0}`")]
    UnknownFunction(String),
    #[error("`{function}` expects {expected} argument(s), got {got}")]
    ArityMismatch {
        function: String,
        expected: usize,
        got: usize,
    },
    #[error("{0}")]
    Domain(String),
    #[error("plugin error: {0}")]
    Plugin(String),
    #[error("plugin timed out after {0} ms")]
    Timeout(u64),
}

/// Runs implementations of one problem. Built-ins are pure; plug-in backends
/// each own a subprocess guarded by a mutex, so an `Evaluator` can be shared
/// across threads.
pub struct Evaluator<'p> {
    problem: &'p ProblemSpec,
    plugins: HashMap<String, Mutex<PluginHandle>>,
}

impl<'p> Evaluator<'p> {
    pub fn new(problem: &'p ProblemSpec) -> Evaluator<'p> {
        let mut plugins = HashMap::new();
        for imp in problem.wheats.iter().chain(problem.mutant_family.iter()) {
            if let Backend::Plugin(spec) = &imp.backend {
                plugins.insert(imp.id.clone(), Mutex::new(PluginHandle::new(spec.clone())));
            }
        }
        Evaluator { problem, plugins }
    }

    pub fn problem(&self) -> &'p ProblemSpec {
        self.problem
    }

    /// Calls `function(args)` under `imp`.
    pub fn eval_call(
        &self,
        imp: &Implementation,
        function: &str,
        args: &[Value],
    ) -> Result<Value, EvalError> {
        let sig = self
            .problem
            .function(function)
            .ok_or_else(|| EvalError::UnknownFunction(function.to_string()))?;
        if sig.arity != args.len() {
            return Err(EvalError::ArityMismatch {
                function: function.to_string(),
                expected: sig.arity,
                got: args.len(),
            });
        }
        match &imp.backend {
            Backend::Builtin(b) => b.eval(function, args),
            Backend::Plugin(_) => {
                let handle = self.plugins.get(&imp.id).ok_or_else(|| {
                    EvalError::Plugin(format!(
                        "implementation `{}` is not registered with this evaluator",
                        imp.id
                    ))
                })?;
                let mut guard = handle.lock().unwrap_or_else(|e| e.into_inner());
                guard.call(function, args)
            }
        }
    }

    /// Pass iff the implementation reproduces the expected value exactly.
    pub fn run_example(&self, imp: &Implementation, example: &Example) -> Verdict {
        match self.eval_call(imp, &example.function, &example.args) {
            Ok(actual) => {
                let outcome = if value_eq(&actual, &example.expected) {
                    Outcome::Pass
                } else {
                    Outcome::Fail
                };
                Verdict {
                    outcome,
                    actual: Some(actual),
                    error_detail: None,
                }
            }
            Err(e) => Verdict {
                outcome: Outcome::Error,
                actual: None,
                error_detail: Some(e.to_string()),
            },
        }
    }
}
