//! Scoped equality constraints (`.pec` files) and the entry environments
//! they induce.
//!
//! ```text
//! # application settings
//! GLOBAL:
//!   NDIM = 3
//! UNIT SOLVE: EPS = 1.0E-6
//! ```

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::analysis::{AbstractEnv, AbstractValue, Location};
use crate::error::ConstraintError;
use crate::frontend::ast::{Program, UnitKind};
use crate::frontend::lexer::{tokenize, TokenKind};
use crate::frontend::symbols::{SymbolTable, UnitSymbols, VarInfo, VarKind};
use crate::value::Value;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Scope {
    Global,
    Unit(String),
}

impl fmt::Display for Scope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scope::Global => f.write_str("GLOBAL"),
            Scope::Unit(u) => write!(f, "UNIT {u}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub scope: Scope,
    pub name: String,
    pub value: Value,
    /// 1-based line in the constraint file (0 when built in code).
    pub line: u32,
}

/// Entries are kept sorted by `(scope, name)`, so equal sets compare equal
/// regardless of file order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConstraintSet {
    entries: Vec<Constraint>,
}

impl ConstraintSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn entries(&self) -> &[Constraint] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Adds an entry; identical duplicates are absorbed.
    pub fn insert(&mut self, c: Constraint) -> Result<(), ConstraintError> {
        let key = |e: &Constraint| (e.scope.clone(), e.name.clone());
        match self.entries.binary_search_by(|e| key(e).cmp(&key(&c))) {
            Ok(i) if self.entries[i].value == c.value => Ok(()),
            Ok(_) => Err(ConstraintError::Conflicting {
                line: c.line,
                scope: c.scope.to_string(),
                name: c.name,
            }),
            Err(i) => {
                self.entries.insert(i, c);
                Ok(())
            }
        }
    }

    pub fn get(&self, scope: &Scope, name: &str) -> Option<&Value> {
        self.entries
            .iter()
            .find(|e| e.scope == *scope && e.name == name)
            .map(|e| &e.value)
    }
}

const RELATIONAL: [&str; 12] = [
    "<", ">", "/=", ".LT.", ".LE.", ".GT.", ".GE.", ".NE.", ".EQ.", "<=", ">=", "==",
];

fn strip_comment(line: &str) -> &str {
    let mut in_str = false;
    for (i, c) in line.char_indices() {
        match c {
            '\'' => in_str = !in_str,
            '#' if !in_str => return &line[..i],
            _ => {}
        }
    }
    line
}

pub fn parse_constraints(text: &str) -> Result<ConstraintSet, ConstraintError> {
    let mut set = ConstraintSet::new();
    let mut scope: Option<Scope> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = (i + 1) as u32;
        let err = |message: String| ConstraintError::Parse { line, message };
        let mut rest = strip_comment(raw).trim();
        if rest.is_empty() {
            continue;
        }
        let upper = rest.to_ascii_uppercase();
        if let Some(after) = upper.strip_prefix("GLOBAL") {
            let after = after.trim_start();
            if let Some(tail) = after.strip_prefix(':') {
                scope = Some(Scope::Global);
                rest = rest[rest.len() - tail.len()..].trim();
            }
        } else if upper.starts_with("UNIT")
            && upper[4..].starts_with(|c: char| c.is_whitespace())
        {
            let Some(colon) = rest.find(':') else {
                return Err(err("expected `:` after the unit name".into()));
            };
            let name = rest[4..colon].trim().to_ascii_uppercase();
            let valid = !name.is_empty()
                && name.starts_with(|c: char| c.is_ascii_alphabetic())
                && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
            if !valid {
                return Err(err(format!("invalid unit name `{}`", rest[4..colon].trim())));
            }
            scope = Some(Scope::Unit(name));
            rest = rest[colon + 1..].trim();
        }
        if rest.is_empty() {
            continue;
        }
        let Some(scope) = scope.clone() else {
            return Err(err("binding before any `GLOBAL:` or `UNIT name:` header".into()));
        };
        let (name, value) = parse_binding(rest).map_err(err)?;
        set.insert(Constraint {
            scope,
            name,
            value,
            line,
        })?;
    }
    Ok(set)
}

fn parse_binding(text: &str) -> Result<(String, Value), String> {
    let unquoted: String = text
        .split('\'')
        .step_by(2)
        .collect::<Vec<_>>()
        .join("''")
        .to_ascii_uppercase();
    if let Some(op) = RELATIONAL.iter().find(|op| unquoted.contains(*op)) {
        return Err(format!(
            "relational constraints (`{op}`) are not yet supported; only `name = literal`"
        ));
    }
    let eq = text.find('=');
    let Some(eq) = eq else {
        return Err(format!("expected `name = literal`, found `{text}`"));
    };
    let lhs = text[..eq].trim();
    if lhs.contains('(') {
        return Err(format!("constraints on array elements (`{lhs}`) are not supported"));
    }
    // Leading blank keeps column-1 comment rules out of the way.
    let lhs_toks = tokenize(&format!(" {lhs}")).map_err(|e| e.message)?;
    let name = match lhs_toks.iter().map(|t| &t.kind).collect::<Vec<_>>().as_slice() {
        [TokenKind::Ident(n), rest @ ..]
            if rest.iter().all(|k| matches!(k, TokenKind::Newline | TokenKind::Eof)) =>
        {
            n.clone()
        }
        _ => return Err(format!("expected an identifier, found `{lhs}`")),
    };
    let toks = tokenize(&format!(" {}", text[eq + 1..].trim())).map_err(|e| e.message)?;
    let kinds: Vec<&TokenKind> = toks
        .iter()
        .map(|t| &t.kind)
        .filter(|k| !matches!(k, TokenKind::Newline | TokenKind::Eof))
        .collect();
    let value = match kinds.as_slice() {
        [TokenKind::IntLit(i)] => Value::Int(*i),
        [TokenKind::Minus, TokenKind::IntLit(i)] => Value::Int(i.wrapping_neg()),
        [TokenKind::Plus, TokenKind::IntLit(i)] => Value::Int(*i),
        [TokenKind::RealLit(r)] | [TokenKind::Plus, TokenKind::RealLit(r)] => Value::Real(*r),
        [TokenKind::Minus, TokenKind::RealLit(r)] => Value::Real(-r),
        [TokenKind::LogicalLit(b)] => Value::Logical(*b),
        [TokenKind::StrLit(s)] => Value::Char(s.clone()),
        _ => return Err(format!("expected a literal after `=` in `{text}`")),
    };
    Ok((name, value))
}

/// Constraints bound to storage.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ResolvedConstraints {
    /// Initial values at program start: COMMON cells and main-unit locals.
    pub presets: BTreeMap<Location, Value>,
    /// Per procedure: values assumed at every entry (formals, COMMON cells).
    pub assumptions: BTreeMap<String, BTreeMap<Location, Value>>,
    /// Human-readable notes (e.g. constraints on units not in the program).
    pub notes: Vec<String>,
}

fn unknown(scope: &Scope, name: &str, reason: impl Into<String>) -> ConstraintError {
    ConstraintError::UnknownConstrainedName {
        scope: scope.to_string(),
        name: name.to_string(),
        reason: reason.into(),
    }
}

fn typed(c: &Constraint, info: &VarInfo) -> Result<Value, ConstraintError> {
    let ok = c.value.base_type() == info.base
        || matches!((&c.value, info.base), (Value::Int(_), crate::value::BaseType::Real));
    match c.value.convert_to(info.base) {
        Some(v) if ok => Ok(v),
        _ => Err(ConstraintError::TypeMismatch {
            scope: c.scope.to_string(),
            name: c.name.clone(),
            value: c.value.to_string(),
            declared: info.base.to_string(),
        }),
    }
}

fn scalar_storage<'a>(
    c: &Constraint,
    unit: &'a UnitSymbols,
) -> Result<Option<(&'a VarInfo, Location)>, ConstraintError> {
    let Some(info) = unit.var(&c.name) else {
        return Ok(None);
    };
    if info.is_parameter() {
        return Err(unknown(&c.scope, &c.name, format!("is a PARAMETER of {}", unit.name)));
    }
    if info.is_array() {
        return Err(unknown(&c.scope, &c.name, "arrays cannot be constrained"));
    }
    Ok(Some((info, unit.location(&c.name).expect("scalar variable"))))
}

/// Binds every constraint to storage, checking visibility and types.
pub fn resolve_constraints(
    cs: &ConstraintSet,
    p: &Program,
    symtab: &SymbolTable,
) -> Result<ResolvedConstraints, ConstraintError> {
    let mut out = ResolvedConstraints::default();
    let main = symtab.unit(&p.entry);
    let preset = |out: &mut ResolvedConstraints, c: &Constraint, loc: Location, v: Value| {
        match out.presets.get(&loc) {
            Some(old) if *old != v => Err(ConstraintError::Conflicting {
                line: c.line,
                scope: c.scope.to_string(),
                name: c.name.clone(),
            }),
            _ => {
                out.presets.insert(loc, v);
                Ok(())
            }
        }
    };
    for c in cs.entries() {
        match &c.scope {
            Scope::Global => {
                let mut candidates: Vec<(Location, Value)> = Vec::new();
                if let Some((info, loc)) = scalar_storage(c, main)? {
                    candidates.push((loc, typed(c, info)?));
                }
                for u in symtab.units.values() {
                    if let Some(info) = u.var(&c.name) {
                        if matches!(info.kind, VarKind::Common { .. }) {
                            if let Some((info, loc)) = scalar_storage(c, u)? {
                                candidates.push((loc, typed(c, info)?));
                            }
                        }
                    }
                }
                candidates.sort_by(|a, b| a.0.cmp(&b.0));
                candidates.dedup_by(|a, b| a.0 == b.0);
                match candidates.as_slice() {
                    [] => {
                        return Err(unknown(
                            &c.scope,
                            &c.name,
                            "not a COMMON member or a main-program variable",
                        ))
                    }
                    [(loc, v)] => preset(&mut out, c, loc.clone(), v.clone())?,
                    many => {
                        let locs: Vec<String> = many.iter().map(|(l, _)| l.to_string()).collect();
                        return Err(unknown(
                            &c.scope,
                            &c.name,
                            format!("ambiguous: names {}", locs.join(" and ")),
                        ));
                    }
                }
            }
            Scope::Unit(uname) => {
                let Some(unit) = symtab.units.get(uname) else {
                    out.notes.push(format!(
                        "constraint {} = {} ignored: no unit {uname} in the program",
                        c.name, c.value
                    ));
                    continue;
                };
                let Some((info, loc)) = scalar_storage(c, unit)? else {
                    return Err(unknown(&c.scope, &c.name, format!("not declared in {uname}")));
                };
                let v = typed(c, info)?;
                if unit.kind == UnitKind::Main {
                    preset(&mut out, c, loc, v)?;
                } else if matches!(info.kind, VarKind::Formal(_) | VarKind::Common { .. }) {
                    out.assumptions.entry(uname.clone()).or_default().insert(loc, v);
                } else {
                    return Err(unknown(
                        &c.scope,
                        &c.name,
                        "only formals and COMMON members of a procedure can be constrained",
                    ));
                }
            }
        }
    }
    Ok(out)
}

impl ResolvedConstraints {
    /// Entry environment of `unit`: presets for the main unit, entry
    /// assumptions for procedures.
    pub fn initial_env(&self, unit: &UnitSymbols) -> AbstractEnv {
        let mut env = AbstractEnv::new();
        let bind = |env: &mut AbstractEnv, m: &BTreeMap<Location, Value>| {
            for (l, v) in m {
                env.set(l.clone(), AbstractValue::Known(v.clone()));
            }
        };
        if unit.kind == UnitKind::Main {
            bind(&mut env, &self.presets);
        }
        if let Some(a) = self.assumptions.get(&unit.name) {
            bind(&mut env, a);
        }
        env
    }
}

/// Convenience wrapper: resolve and build the entry environment of one unit.
pub fn initial_env(
    cs: &ConstraintSet,
    p: &Program,
    unit: &str,
    symtab: &SymbolTable,
) -> Result<AbstractEnv, ConstraintError> {
    Ok(resolve_constraints(cs, p, symtab)?.initial_env(symtab.unit(unit)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{parse_program, resolve_symbols};

    #[test]
    fn global_binding() {
        let cs = parse_constraints("GLOBAL: NDIM = 3").unwrap();
        assert_eq!(
            cs.entries(),
            &[Constraint {
                scope: Scope::Global,
                name: "NDIM".into(),
                value: Value::Int(3),
                line: 1
            }]
        );
    }

    #[test]
    fn conflicting_entries_rejected_identical_absorbed() {
        let err = parse_constraints("UNIT SOLVE: MODE = 2\nUNIT SOLVE: MODE = 3").unwrap_err();
        assert!(matches!(err, ConstraintError::Conflicting { line: 2, .. }));
        let cs = parse_constraints("UNIT SOLVE: MODE = 2\nUNIT solve: mode = 2").unwrap();
        assert_eq!(cs.entries().len(), 1);
    }

    #[test]
    fn headers_comments_and_literals() {
        let text = "# settings\nUNIT SOLVE:\n  EPS = 1.0E-6   # tolerance\n  FLAG = .TRUE.\nGLOBAL:\n  TAG = 'a#b'\n  K = -4\n";
        let cs = parse_constraints(text).unwrap();
        let solve = Scope::Unit("SOLVE".into());
        assert_eq!(cs.get(&solve, "EPS"), Some(&Value::Real(1.0e-6)));
        assert_eq!(cs.get(&solve, "FLAG"), Some(&Value::Logical(true)));
        assert_eq!(cs.get(&Scope::Global, "TAG"), Some(&Value::Char("a#b".into())));
        assert_eq!(cs.get(&Scope::Global, "K"), Some(&Value::Int(-4)));
    }

    #[test]
    fn entry_order_does_not_matter() {
        let a = parse_constraints("UNIT SOLVE: EPS = 1.0E-6\nGLOBAL: NDIM = 3").unwrap();
        let b = parse_constraints("GLOBAL: NDIM = 3\nUNIT SOLVE: EPS = 1.0E-6").unwrap();
        assert_eq!(a.entries().len(), 2);
        assert_eq!(a.entries().iter().map(|c| &c.scope).collect::<Vec<_>>(), vec![&Scope::Global, &Scope::Unit("SOLVE".into())]);
        assert_eq!(
            a.entries().iter().map(|c| (&c.name, &c.value)).collect::<Vec<_>>(),
            b.entries().iter().map(|c| (&c.name, &c.value)).collect::<Vec<_>>()
        );
    }

    #[test]
    fn unsupported_forms() {
        for bad in ["GLOBAL: N < 3", "GLOBAL: N .GT. 3", "GLOBAL: A(2) = 1", "N = 3", "GLOBAL: N = X"] {
            assert!(
                matches!(parse_constraints(bad), Err(ConstraintError::Parse { .. })),
                "{bad}"
            );
        }
        let msg = parse_constraints("GLOBAL: N <= 3").unwrap_err().to_string();
        assert!(msg.contains("not yet supported"), "{msg}");
    }

    fn program() -> (Program, SymbolTable) {
        let p = parse_program(&[
            (
                "m.f",
                "PROGRAM M\nINTEGER N, C\nLOGICAL L\nCOMMON /B/ C\nN = 1\nCALL S(N)\nEND\n",
            ),
            (
                "s.f",
                "SUBROUTINE S(K)\nINTEGER K, T, D\nCOMMON /B/ D\nT = K\nEND\n",
            ),
        ])
        .unwrap();
        let st = resolve_symbols(&p).unwrap();
        (p, st)
    }

    #[test]
    fn initial_env_binds_only_constrained_names() {
        let (p, st) = program();
        let cs = parse_constraints("UNIT M: N = 3").unwrap();
        let env = initial_env(&cs, &p, "M", &st).unwrap();
        assert_eq!(env.bindings().count(), 1);
        assert_eq!(env.get(&Location::local("M", "N")), AbstractValue::Known(Value::Int(3)));
    }

    #[test]
    fn type_mismatch_and_visibility() {
        let (p, st) = program();
        let cs = parse_constraints("UNIT M: L = 1").unwrap();
        assert!(matches!(
            resolve_constraints(&cs, &p, &st),
            Err(ConstraintError::TypeMismatch { .. })
        ));
        let cs = parse_constraints("UNIT S: T = 1").unwrap();
        assert!(matches!(
            resolve_constraints(&cs, &p, &st),
            Err(ConstraintError::UnknownConstrainedName { .. })
        ));
        let cs = parse_constraints("GLOBAL: NOPE = 1").unwrap();
        assert!(resolve_constraints(&cs, &p, &st).is_err());
    }

    #[test]
    fn global_common_member_found_through_any_unit() {
        let (p, st) = program();
        let cs = parse_constraints("GLOBAL: D = 7").unwrap();
        let r = resolve_constraints(&cs, &p, &st).unwrap();
        assert_eq!(r.presets.get(&Location::cell("B", 0)), Some(&Value::Int(7)));
        let cs = parse_constraints("UNIT S: K = 2\nUNIT GONE: X = 1").unwrap();
        let r = resolve_constraints(&cs, &p, &st).unwrap();
        assert_eq!(r.assumptions["S"].len(), 1);
        assert_eq!(r.notes.len(), 1);
    }
}
