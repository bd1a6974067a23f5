//! By-reference binding and the may-alias partition it induces.

use std::collections::{BTreeMap, BTreeSet};

use super::domain::{AbstractEnv, AbstractValue, Location};
use super::modsum::actual_location;
use crate::frontend::ast::Expr;
use crate::frontend::symbols::UnitSymbols;

/// May-alias classes over the locations of one unit activation context.
/// Only classes with two or more members are stored.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AliasPartition {
    classes: BTreeSet<BTreeSet<Location>>,
}

impl AliasPartition {
    pub fn trivial() -> Self {
        Self::default()
    }

    /// Merges overlapping groups into classes.
    pub fn from_groups(groups: impl IntoIterator<Item = BTreeSet<Location>>) -> Self {
        let mut classes: Vec<BTreeSet<Location>> = Vec::new();
        for g in groups {
            let mut merged = g;
            classes.retain(|c| {
                if c.is_disjoint(&merged) {
                    true
                } else {
                    merged.extend(c.iter().cloned());
                    false
                }
            });
            classes.push(merged);
        }
        AliasPartition {
            classes: classes.into_iter().filter(|c| c.len() > 1).collect(),
        }
    }

    /// The class containing `loc` (itself when not aliased).
    pub fn class_of(&self, loc: &Location) -> BTreeSet<Location> {
        self.classes
            .iter()
            .find(|c| c.contains(loc))
            .cloned()
            .unwrap_or_else(|| BTreeSet::from([loc.clone()]))
    }

    pub fn is_singleton(&self, loc: &Location) -> bool {
        !self.classes.iter().any(|c| c.contains(loc))
    }

    pub fn classes(&self) -> impl Iterator<Item = &BTreeSet<Location>> {
        self.classes.iter()
    }

    pub fn is_trivial(&self) -> bool {
        self.classes.is_empty()
    }

    /// Closes a write set under aliasing.
    pub fn expand(&self, locs: &BTreeSet<Location>) -> BTreeSet<Location> {
        let mut out = BTreeSet::new();
        for l in locs {
            out.extend(self.class_of(l));
        }
        out
    }
}

/// Writes `v` to `loc`; every other member of its alias class becomes
/// Unknown.
pub fn assign(env: &mut AbstractEnv, aliases: &AliasPartition, loc: &Location, v: AbstractValue) {
    for other in aliases.class_of(loc) {
        if other != *loc {
            env.kill(&other);
        }
    }
    env.set(loc.clone(), v);
}

#[derive(Debug, Clone, PartialEq)]
pub struct CallBinding {
    /// Callee entry environment: formals and the cells of `blocks`.
    pub entry: AbstractEnv,
    pub aliases: AliasPartition,
}

/// Binds actuals to formals by reference.
///
/// `arg_values` are the caller-side abstract values of the actuals (already
/// simplified); `blocks` are the COMMON blocks the callee can reach. Formals
/// whose actuals share caller storage land in one class, together with any
/// COMMON cell in that storage; a class is Known only when all its members
/// agree.
pub fn bind_call(
    caller: &UnitSymbols,
    caller_env: &AbstractEnv,
    caller_aliases: &AliasPartition,
    args: &[Expr],
    arg_values: &[AbstractValue],
    callee: &UnitSymbols,
    blocks: &BTreeSet<String>,
) -> CallBinding {
    let mut values: BTreeMap<Location, AbstractValue> = BTreeMap::new();
    let mut groups: BTreeMap<BTreeSet<Location>, BTreeSet<Location>> = BTreeMap::new();
    for (i, formal) in callee.formals.iter().enumerate() {
        let floc = callee.location(formal).expect("formals are declared");
        let v = if floc.is_array() {
            AbstractValue::Unknown
        } else {
            arg_values.get(i).cloned().unwrap_or(AbstractValue::Unknown)
        };
        values.insert(floc.clone(), v);
        if let Some(aloc) = args.get(i).and_then(|a| actual_location(caller, a)) {
            let storage = caller_aliases.class_of(&aloc);
            let group = groups.entry(storage.clone()).or_default();
            group.insert(floc);
            group.extend(storage.into_iter().filter(|l| l.is_common()));
        }
    }
    let in_blocks = |l: &Location| match l {
        Location::CommonCell { block, .. } => blocks.contains(block),
        Location::ArrayWhole(b) => matches!(&**b, Location::CommonCell { block, .. } if blocks.contains(block)),
        Location::Local { .. } => false,
    };
    for (l, v) in caller_env.bindings() {
        if in_blocks(l) {
            values.insert(l.clone(), AbstractValue::Known(v.clone()));
        }
    }
    let aliases = AliasPartition::from_groups(groups.into_values());
    let mut entry = AbstractEnv::new();
    for (l, v) in &values {
        let class = aliases.class_of(l);
        let value = if class.len() == 1 {
            v.clone()
        } else {
            let first = values.get(l).cloned().unwrap_or(AbstractValue::Unknown);
            class.iter().fold(first, |acc, m| {
                let mv = values
                    .get(m)
                    .cloned()
                    .or_else(|| m.is_common().then(|| caller_env.get(m)))
                    .unwrap_or(AbstractValue::Unknown);
                acc.join(&mv)
            })
        };
        entry.set(l.clone(), value);
    }
    CallBinding { entry, aliases }
}

/// Kills everything a call may write (already translated into the caller's
/// namespace), closed under the caller's aliasing.
pub fn apply_call_effect(
    env: &AbstractEnv,
    writes: &BTreeSet<Location>,
    aliases: &AliasPartition,
) -> AbstractEnv {
    let mut out = env.clone();
    for l in aliases.expand(writes) {
        out.kill(&l);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{parse_program, resolve_symbols, SymbolTable};
    use crate::value::Value;

    fn k(i: i64) -> AbstractValue {
        AbstractValue::Known(Value::Int(i))
    }

    fn table() -> SymbolTable {
        let p = parse_program(&[
            (
                "m.f",
                "PROGRAM M\nINTEGER X, Y, C\nCOMMON /B/ C\nX = 3\nCALL S(X, X)\nEND\n",
            ),
            (
                "s.f",
                "SUBROUTINE S(A, B)\nINTEGER A, B, C\nCOMMON /B/ C\nA = B\nEND\n",
            ),
        ])
        .unwrap();
        resolve_symbols(&p).unwrap()
    }

    #[test]
    fn single_actual_passes_value() {
        let st = table();
        let (m, s) = (st.unit("M"), st.unit("S"));
        let mut env = AbstractEnv::new();
        env.set(m.location("X").unwrap(), k(3));
        let args = [Expr::Var("X".into()), Expr::Var("Y".into())];
        let b = bind_call(m, &env, &AliasPartition::trivial(), &args, &[k(3), AbstractValue::Unknown], s, &BTreeSet::new());
        assert_eq!(b.entry.get(&s.location("A").unwrap()), k(3));
        assert!(b.aliases.is_trivial());
    }

    #[test]
    fn same_actual_twice_aliases_formals() {
        let st = table();
        let (m, s) = (st.unit("M"), st.unit("S"));
        let args = [Expr::Var("X".into()), Expr::Var("X".into())];
        let (a, bl) = (s.location("A").unwrap(), s.location("B").unwrap());
        let b = bind_call(m, &AbstractEnv::new(), &AliasPartition::trivial(), &args, &[k(3), k(3)], s, &BTreeSet::new());
        assert_eq!(b.aliases.class_of(&a), BTreeSet::from([a.clone(), bl.clone()]));
        assert_eq!(b.entry.get(&a), k(3));
        assert_eq!(b.entry.get(&bl), k(3));
        let b = bind_call(m, &AbstractEnv::new(), &AliasPartition::trivial(), &args, &[AbstractValue::Unknown, AbstractValue::Unknown], s, &BTreeSet::new());
        assert_eq!(b.entry.get(&a), AbstractValue::Unknown);
    }

    #[test]
    fn common_actual_aliases_callee_cell() {
        let st = table();
        let (m, s) = (st.unit("M"), st.unit("S"));
        let cell = Location::cell("B", 0);
        let mut env = AbstractEnv::new();
        env.set(cell.clone(), k(5));
        let args = [Expr::Var("C".into()), Expr::Var("Y".into())];
        let blocks = BTreeSet::from(["B".to_string()]);
        let b = bind_call(m, &env, &AliasPartition::trivial(), &args, &[k(5), AbstractValue::Unknown], s, &blocks);
        let a = s.location("A").unwrap();
        assert!(b.aliases.class_of(&a).contains(&cell));
        assert_eq!(b.entry.get(&a), k(5));
        // a write through the formal kills the cell inside the callee
        let mut inner = b.entry.clone();
        assign(&mut inner, &b.aliases, &a, k(9));
        assert_eq!(inner.get(&cell), AbstractValue::Unknown);
    }

    #[test]
    fn call_effect_kills_translated_writes_only() {
        let x = Location::local("M", "X");
        let y = Location::local("M", "Y");
        let mut env = AbstractEnv::new();
        env.set(x.clone(), k(1));
        env.set(y.clone(), k(2));
        let same = apply_call_effect(&env, &BTreeSet::new(), &AliasPartition::trivial());
        assert_eq!(same, env);
        let after = apply_call_effect(&env, &BTreeSet::from([x.clone()]), &AliasPartition::trivial());
        assert_eq!(after.get(&x), AbstractValue::Unknown);
        assert_eq!(after.get(&y), k(2));
    }
}
