//! Problem configs on disk.
//!
//! ```json
//! {
//!   "name": "docdiff",
//!   "functions": [{"name": "overlap", "arity": 2, "subproblem": "overlap"}],
//!   "wheats": [{"id": "w1", "builtin": "docdiff-wheat"}],
//!   "mutants": [
//!     {"id": "m1", "characteristic": "c-case", "explanation": "Case sensitive",
//!      "builtin": "docdiff-case-sensitive"}
//!   ],
//!   "characteristics": [{"id": "c-case", "text": "..."}]
//! }
//! ```
//!
//! A backend is either `"builtin": "<name>"` or
//! `"plugin": {"cmd": ["./impl"], "timeout_ms": 2000}`.

use super::{
    Backend, Builtin, Characteristic, FunctionSig, Implementation, PluginSpec, ProblemError,
    ProblemSpec, Role,
};
use serde::Deserialize;
use std::path::Path;

#[derive(Debug, Deserialize)]
struct ProblemConfig {
    name: String,
    functions: Vec<FunctionSig>,
    wheats: Vec<WheatConfig>,
    #[serde(default)]
    mutants: Vec<MutantConfig>,
    #[serde(default)]
    characteristics: Vec<Characteristic>,
}

#[derive(Debug, Deserialize)]
struct WheatConfig {
    #[serde(default)]
    id: Option<String>,
    #[serde(flatten)]
    backend: BackendConfig,
}

#[derive(Debug, Deserialize)]
struct MutantConfig {
    id: String,
    characteristic: String,
    explanation: String,
    #[serde(default)]
    subproblem: Option<String>,
    #[serde(flatten)]
    backend: BackendConfig,
}

#[derive(Debug, Deserialize)]
struct BackendConfig {
    #[serde(default)]
    builtin: Option<String>,
    #[serde(default)]
    plugin: Option<PluginSpec>,
}

impl BackendConfig {
    fn resolve(&self, owner: &str) -> Result<Backend, ProblemError> {
        match (&self.builtin, &self.plugin) {
            (Some(name), None) => Builtin::from_name(name)
                .map(Backend::Builtin)
                .ok_or_else(|| ProblemError::UnknownBuiltin(name.clone())),
            (None, Some(spec)) => Ok(Backend::Plugin(spec.clone())),
            _ => Err(ProblemError::UnknownBuiltin(format!(
                "{}: exactly one of `builtin` or `plugin` required",
                owner
            ))),
        }
    }
}

/// Loads and validates a problem config; `builtin:median` and
/// `builtin:docdiff` short-circuit to the bundled problems.
pub fn load_problem(path: &str) -> Result<ProblemSpec, ProblemError> {
    if let Some(name) = path.strip_prefix("builtin:") {
        return ProblemSpec::builtin(name);
    }
    let text = std::fs::read_to_string(Path::new(path)).map_err(|source| ProblemError::Io {
        path: path.to_string(),
        source,
    })?;
    let cfg: ProblemConfig =
        serde_json::from_str(&text).map_err(|source| ProblemError::Malformed {
            path: path.to_string(),
            source,
        })?;
    let mut wheats = Vec::new();
    for (i, w) in cfg.wheats.iter().enumerate() {
        let id = w.id.clone().unwrap_or_else(|| format!("wheat-{}", i + 1));
        wheats.push(Implementation {
            id: id.clone(),
            role: Role::Wheat,
            characteristic_id: None,
            explanation: None,
            subproblem: None,
            backend: w.backend.resolve(&id)?,
        });
    }
    let mut mutant_family = Vec::new();
    for m in &cfg.mutants {
        mutant_family.push(Implementation {
            id: m.id.clone(),
            role: Role::Mutant,
            characteristic_id: Some(m.characteristic.clone()),
            explanation: Some(m.explanation.clone()),
            subproblem: m.subproblem.clone(),
            backend: m.backend.resolve(&m.id)?,
        });
    }
    let problem = ProblemSpec {
        name: cfg.name,
        functions: cfg.functions,
        wheats,
        mutant_family,
        characteristics: cfg.characteristics,
    };
    problem.validate()?;
    Ok(problem)
}
