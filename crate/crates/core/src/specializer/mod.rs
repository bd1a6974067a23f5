//! The partial evaluator: forward simplification with polyvariant procedure
//! specialization, followed by variant merging, naming and cleanup.
//!
//! Specialization runs in two phases. The forward walk creates one variant
//! per distinct entry context and refers to callees by variant id. The
//! emit phase merges variants whose residual bodies are identical, keeps
//! only what the main program reaches, and names the survivors: the class
//! holding a unit's context-free variant keeps the unit's name, the others
//! become `NAME_k`. Naming after merging is what makes re-specializing a
//! residual program a no-op.

mod cleanup;
mod emit;
mod engine;
pub mod verify;

#[cfg(test)]
mod tests;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::analysis::{mod_summaries, AbstractEnv, Slot};
use crate::constraints::{resolve_constraints, ConstraintSet, ResolvedConstraints};
use crate::error::{FrontendError, SemanticError, SpecializeError};
use crate::frontend::ast::{Program, ProvId};
use crate::frontend::resolve_symbols;
use crate::report::Report;
use crate::value::Value;

pub use verify::{check_structure, sample_soundness, SoundnessSummary};

pub const DEFAULT_VARIANT_CAP: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PolicyMode {
    ReplaceAll,
    ReplaceNone,
    KeepList(BTreeSet<String>),
}

/// Which Known identifiers may be textually replaced by their values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReplacementPolicy {
    pub mode: PolicyMode,
    /// PARAMETER names are never replaced (keep-list mode only).
    pub parameters_kept: bool,
}

impl ReplacementPolicy {
    pub fn all() -> Self {
        ReplacementPolicy {
            mode: PolicyMode::ReplaceAll,
            parameters_kept: false,
        }
    }

    pub fn none() -> Self {
        ReplacementPolicy {
            mode: PolicyMode::ReplaceNone,
            parameters_kept: true,
        }
    }

    pub fn keep(names: impl IntoIterator<Item = String>) -> Self {
        ReplacementPolicy {
            mode: PolicyMode::KeepList(names.into_iter().map(|n| n.to_ascii_uppercase()).collect()),
            parameters_kept: true,
        }
    }

    pub fn keep_list(&self) -> Option<&BTreeSet<String>> {
        match &self.mode {
            PolicyMode::KeepList(k) => Some(k),
            _ => None,
        }
    }

    /// Whether a known value may replace an occurrence of `name`.
    pub fn permits(&self, name: &str, is_parameter: bool) -> bool {
        match &self.mode {
            PolicyMode::ReplaceAll => !(self.parameters_kept && is_parameter),
            PolicyMode::ReplaceNone => false,
            PolicyMode::KeepList(k) => !k.contains(name) && !(self.parameters_kept && is_parameter),
        }
    }

    pub fn replaces_anything(&self) -> bool {
        self.mode != PolicyMode::ReplaceNone
    }
}

impl fmt::Display for ReplacementPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.mode {
            PolicyMode::ReplaceAll => f.write_str("all"),
            PolicyMode::ReplaceNone => f.write_str("none"),
            PolicyMode::KeepList(k) => {
                write!(f, "keep:{}", k.iter().cloned().collect::<Vec<_>>().join(","))
            }
        }
    }
}

/// Parses a keep-list file: one identifier per line, `#` starts a comment.
pub fn parse_keep_list(text: &str) -> Result<BTreeSet<String>, (u32, String)> {
    let mut out = BTreeSet::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let ok = line.chars().next().is_some_and(|c| c.is_ascii_alphabetic())
            && line.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
        if !ok {
            return Err((i as u32 + 1, format!("`{line}` is not an identifier")));
        }
        out.insert(line.to_ascii_uppercase());
    }
    Ok(out)
}

/// Identity of a specialized variant: the callee plus its Known entry
/// slots and the alias structure among its slots.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SpecKey {
    pub unit: String,
    pub entries: BTreeMap<Slot, Value>,
    pub aliases: BTreeSet<BTreeSet<Slot>>,
}

#[derive(Debug, Clone)]
pub struct SpecializeConfig {
    pub policy: ReplacementPolicy,
    pub variant_cap: usize,
}

impl Default for SpecializeConfig {
    fn default() -> Self {
        SpecializeConfig {
            policy: ReplacementPolicy::all(),
            variant_cap: DEFAULT_VARIANT_CAP,
        }
    }
}

impl SpecializeConfig {
    pub fn with_policy(policy: ReplacementPolicy) -> Self {
        SpecializeConfig {
            policy,
            ..Default::default()
        }
    }
}

/// Everything a specialization run produces.
#[derive(Debug, Clone)]
pub struct Specialization {
    pub program: Program,
    pub report: Report,
    /// Residual unit → statement → abstract state before it. For units
    /// merged from several variants this is the join of their states.
    pub snapshots: BTreeMap<String, BTreeMap<ProvId, AbstractEnv>>,
    /// Residual unit → original unit.
    pub origin: BTreeMap<String, String>,
    pub constraints: ResolvedConstraints,
}

pub fn specialize_program(
    p: &Program,
    cs: &ConstraintSet,
    config: &SpecializeConfig,
) -> Result<Specialization, SpecializeError> {
    let symtab = resolve_symbols(p)?;
    let modsum = mod_summaries(p, &symtab).map_err(|e| semantic(p, e))?;
    let rc = resolve_constraints(cs, p, &symtab)?;
    let mut eng = engine::Engine::new(p, &symtab, &modsum, &rc, config);
    eng.run()?;
    let out = emit::emit(&eng, rc.clone());
    // the residual must stand on its own
    resolve_symbols(&out.program).map_err(|e| SpecializeError::InvalidResidual(e.to_string()))?;
    Ok(out)
}

fn semantic(p: &Program, kind: SemanticError) -> SpecializeError {
    SpecializeError::Frontend(FrontendError::semantic(kind, p.origins.values().next().cloned()))
}
