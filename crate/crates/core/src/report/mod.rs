//! The transformation ledger: what happened to every statement of every
//! emitted unit, which variants exist and what was known where.

mod html;

use std::collections::BTreeMap;
use std::fmt;

use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

use crate::frontend::ast::ProvId;
use crate::value::Value;

pub use html::{render_html, HtmlPage};

pub const SCHEMA: &str = "residua-report/1";

/// The JSON schema the report conforms to.
pub const JSON_SCHEMA: &str = include_str!("../../schema/residua-report-1.schema.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RemovalReason {
    /// Inside the arm of a folded IF that can never run.
    DeadBranch,
    /// The IF itself, after its condition folded.
    BranchFolded,
    ZeroTrip,
    NeverEntered,
    DeadAssignment,
    /// A CONTINUE.
    NoOp,
    /// An IF whose arms both became empty.
    EmptyIf,
}

impl fmt::Display for RemovalReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RemovalReason::DeadBranch => "dead-branch",
            RemovalReason::BranchFolded => "branch-folded",
            RemovalReason::ZeroTrip => "zero-trip",
            RemovalReason::NeverEntered => "never-entered",
            RemovalReason::DeadAssignment => "dead-assignment",
            RemovalReason::NoOp => "no-op",
            RemovalReason::EmptyIf => "empty-if",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "disposition", rename_all = "kebab-case")]
pub enum Disposition {
    Kept,
    Simplified { old: String, new: String },
    Removed { reason: RemovalReason },
}

impl Disposition {
    pub fn removal(&self) -> Option<RemovalReason> {
        match self {
            Disposition::Removed { reason } => Some(*reason),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum UnitStatus {
    /// Emitted from the specializer's forward walk.
    Specialized,
    /// Not reached from the main program; copied unchanged.
    Verbatim,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UnitEntry {
    pub name: String,
    pub original: String,
    pub kind: String,
    pub status: UnitStatus,
    pub file: String,
    pub statements_original: usize,
    pub statements_residual: usize,
    /// Declared locals no longer referenced by the residual body.
    pub unused_declarations: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VariantEntry {
    pub unit: String,
    pub name: String,
    /// Known entry values by slot (`#i` for formals, `/B/#i` for cells).
    pub entries: BTreeMap<String, Value>,
    pub aliases: Vec<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FactFired {
    pub unit: String,
    #[serde(serialize_with = "prov_str")]
    pub stmt: ProvId,
    pub location: String,
    /// The value the location is known to differ from.
    pub differs_from: Value,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Severity {
    Note,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub at: Option<String>,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Note => "note",
            Severity::Warning => "warning",
        };
        match &self.at {
            Some(at) => write!(f, "{at}: {sev}: {}", self.message),
            None => write!(f, "{sev}: {}", self.message),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct Stats {
    pub units_original: usize,
    pub units_residual: usize,
    /// Rows of the variant table.
    pub variants: usize,
    pub cache_hits: usize,
    pub statements_original: usize,
    pub statements_residual: usize,
    pub removed: BTreeMap<String, usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub policy: String,
    pub units: Vec<UnitEntry>,
    pub variants: Vec<VariantEntry>,
    /// Residual unit → statement → disposition.
    #[serde(serialize_with = "nested_prov_map")]
    pub statements: BTreeMap<String, BTreeMap<ProvId, Disposition>>,
    /// Residual unit → Known values at entry.
    pub bindings: BTreeMap<String, BTreeMap<String, Value>>,
    pub facts_fired: Vec<FactFired>,
    pub stats: Stats,
    pub diagnostics: Vec<Diagnostic>,
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn unit(&self, name: &str) -> Option<&UnitEntry> {
        self.units.iter().find(|u| u.name == name)
    }

    /// (original unit, statement) pairs removed for `reason` in any unit.
    pub fn removed_with(&self, reason: RemovalReason) -> std::collections::BTreeSet<(String, ProvId)> {
        let mut out = std::collections::BTreeSet::new();
        for u in &self.units {
            if let Some(stmts) = self.statements.get(&u.name) {
                for (id, d) in stmts {
                    if d.removal() == Some(reason) {
                        out.insert((u.original.clone(), *id));
                    }
                }
            }
        }
        out
    }
}

fn prov_str<S: Serializer>(id: &ProvId, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(id)
}

struct ProvMap<'a>(&'a BTreeMap<ProvId, Disposition>);

impl Serialize for ProvMap<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(self.0.len()))?;
        for (k, v) in self.0 {
            m.serialize_entry(&k.to_string(), v)?;
        }
        m.end()
    }
}

fn nested_prov_map<S: Serializer>(
    map: &BTreeMap<String, BTreeMap<ProvId, Disposition>>,
    s: S,
) -> Result<S::Ok, S::Error> {
    let mut m = s.serialize_map(Some(map.len()))?;
    for (k, v) in map {
        m.serialize_entry(k, &ProvMap(v))?;
    }
    m.end()
}
