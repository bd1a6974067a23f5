//! Storage locations and the two-level constant lattice over them.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Serialize, Serializer};

use crate::value::Value;

/// A storage location. COMMON cells are global: `(block, index)` names the
/// same storage in every unit that declares the block.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Location {
    Local { unit: String, var: String },
    CommonCell { block: String, index: usize },
    ArrayWhole(Box<Location>),
}

impl Location {
    pub fn local(unit: &str, var: &str) -> Location {
        Location::Local {
            unit: unit.to_string(),
            var: var.to_string(),
        }
    }

    pub fn cell(block: &str, index: usize) -> Location {
        Location::CommonCell {
            block: block.to_string(),
            index,
        }
    }

    pub fn is_array(&self) -> bool {
        matches!(self, Location::ArrayWhole(_))
    }

    pub fn is_common(&self) -> bool {
        match self {
            Location::CommonCell { .. } => true,
            Location::ArrayWhole(b) => b.is_common(),
            Location::Local { .. } => false,
        }
    }
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Location::Local { unit, var } => write!(f, "{unit}.{var}"),
            Location::CommonCell { block, index } => write!(f, "/{block}/#{index}"),
            Location::ArrayWhole(base) => write!(f, "{base}(*)"),
        }
    }
}

impl Serialize for Location {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum AbstractValue {
    Known(Value),
    Unknown,
}

impl AbstractValue {
    pub fn join(&self, other: &AbstractValue) -> AbstractValue {
        match (self, other) {
            (AbstractValue::Known(a), AbstractValue::Known(b)) if a == b => self.clone(),
            _ => AbstractValue::Unknown,
        }
    }

    pub fn known(&self) -> Option<&Value> {
        match self {
            AbstractValue::Known(v) => Some(v),
            AbstractValue::Unknown => None,
        }
    }

    pub fn is_known(&self) -> bool {
        self.known().is_some()
    }
}

impl From<Option<Value>> for AbstractValue {
    fn from(v: Option<Value>) -> Self {
        v.map_or(AbstractValue::Unknown, AbstractValue::Known)
    }
}

/// Known bindings plus disequality facts. Absent locations are Unknown.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AbstractEnv {
    bindings: BTreeMap<Location, Value>,
    facts: BTreeSet<(Location, Value)>,
}

impl AbstractEnv {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, loc: &Location) -> AbstractValue {
        self.bindings.get(loc).cloned().into()
    }

    pub fn known(&self, loc: &Location) -> Option<&Value> {
        self.bindings.get(loc)
    }

    /// Binds a location, dropping every fact about it. Arrays are never
    /// Known; binding one is the same as killing it.
    pub fn set(&mut self, loc: Location, v: AbstractValue) {
        self.facts.retain(|(l, _)| *l != loc);
        match v {
            AbstractValue::Known(c) if !loc.is_array() => {
                self.bindings.insert(loc, c);
            }
            _ => {
                self.bindings.remove(&loc);
            }
        }
    }

    pub fn kill(&mut self, loc: &Location) {
        self.set(loc.clone(), AbstractValue::Unknown);
    }

    /// Records `loc ≠ v`. Redundant or contradictory facts (the location is
    /// already Known) are dropped: a contradiction only arises on an
    /// infeasible path.
    pub fn add_fact(&mut self, loc: Location, v: Value) {
        if !self.bindings.contains_key(&loc) && !loc.is_array() {
            self.facts.insert((loc, v));
        }
    }

    pub fn has_fact(&self, loc: &Location, v: &Value) -> bool {
        self.facts.contains(&(loc.clone(), v.clone()))
    }

    pub fn bindings(&self) -> impl Iterator<Item = (&Location, &Value)> {
        self.bindings.iter()
    }

    pub fn facts(&self) -> impl Iterator<Item = &(Location, Value)> {
        self.facts.iter()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty() && self.facts.is_empty()
    }

    pub fn retain(&mut self, mut keep: impl FnMut(&Location) -> bool) {
        self.bindings.retain(|l, _| keep(l));
        self.facts.retain(|(l, _)| keep(l));
    }

    /// Pointwise join; facts are intersected.
    pub fn join(&self, other: &AbstractEnv) -> AbstractEnv {
        let bindings = self
            .bindings
            .iter()
            .filter(|(l, v)| other.bindings.get(*l) == Some(*v))
            .map(|(l, v)| (l.clone(), v.clone()))
            .collect();
        let facts = self.facts.intersection(&other.facts).cloned().collect();
        AbstractEnv { bindings, facts }
    }
}

/// Join that treats `None` as the unreachable state.
pub fn join_opt(a: Option<AbstractEnv>, b: &AbstractEnv) -> AbstractEnv {
    match a {
        Some(a) => a.join(b),
        None => b.clone(),
    }
}
