//! MOD summaries: what each procedure may write, visible to its callers.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Serialize, Serializer};

use super::domain::Location;
use crate::error::SemanticError;
use crate::frontend::ast::*;
use crate::frontend::symbols::{SymbolTable, UnitSymbols, VarKind};

/// A caller-visible storage slot of a procedure.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Slot {
    Formal(usize),
    Cell { block: String, index: usize },
}

impl fmt::Display for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Slot::Formal(i) => write!(f, "#{i}"),
            Slot::Cell { block, index } => write!(f, "/{block}/#{index}"),
        }
    }
}

impl Serialize for Slot {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl Slot {
    /// The slot a unit-local location denotes, if caller-visible.
    pub fn of_location(unit: &UnitSymbols, loc: &Location) -> Option<Slot> {
        match loc {
            Location::ArrayWhole(b) => Slot::of_location(unit, b),
            Location::CommonCell { block, index } => Some(Slot::Cell {
                block: block.clone(),
                index: *index,
            }),
            Location::Local { var, .. } => unit.formal_position(var).map(Slot::Formal),
        }
    }

    /// The location of a slot inside `unit`.
    pub fn location(&self, unit: &UnitSymbols, symtab: &SymbolTable) -> Location {
        match self {
            Slot::Formal(i) => unit
                .location(&unit.formals[*i])
                .expect("formals are declared"),
            Slot::Cell { block, index } => cell_location(symtab, block, *index),
        }
    }
}

/// Location of a COMMON cell, wrapped as a whole array when the cell is one.
pub fn cell_location(symtab: &SymbolTable, block: &str, index: usize) -> Location {
    let base = Location::cell(block, index);
    match symtab.commons.get(block).and_then(|l| l.cells.get(index)) {
        Some(c) if c.len.is_some() => Location::ArrayWhole(Box::new(base)),
        _ => base,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ModSummary {
    pub units: BTreeMap<String, BTreeSet<Slot>>,
}

/// Least fixpoint over the call graph.
pub fn mod_summaries(p: &Program, symtab: &SymbolTable) -> Result<ModSummary, SemanticError> {
    for u in &p.units {
        for callee in crate::frontend::symbols::callees(u) {
            if !symtab.units.contains_key(&callee) {
                return Err(SemanticError::UnresolvedCallee {
                    unit: u.name.clone(),
                    callee,
                });
            }
        }
    }
    let mut summary = ModSummary {
        units: p
            .units
            .iter()
            .map(|u| (u.name.clone(), BTreeSet::new()))
            .collect(),
    };
    loop {
        let mut changed = false;
        for u in &p.units {
            let syms = symtab.unit(&u.name);
            let slots: BTreeSet<Slot> = summary
                .block_writes(symtab, syms, &u.body)
                .iter()
                .filter_map(|l| Slot::of_location(syms, l))
                .collect();
            let entry = summary.units.get_mut(&u.name).expect("every unit has an entry");
            if !slots.is_subset(entry) {
                entry.extend(slots);
                changed = true;
            }
        }
        if !changed {
            return Ok(summary);
        }
    }
}

impl ModSummary {
    pub fn of(&self, unit: &str) -> &BTreeSet<Slot> {
        static EMPTY: BTreeSet<Slot> = BTreeSet::new();
        self.units.get(unit).unwrap_or(&EMPTY)
    }

    /// Locations (in `unit`'s namespace) a block may write, locals included.
    pub fn block_writes(
        &self,
        symtab: &SymbolTable,
        unit: &UnitSymbols,
        block: &[Stmt],
    ) -> BTreeSet<Location> {
        let mut out = BTreeSet::new();
        walk_stmts(block, &mut |s| self.stmt_own_writes(symtab, unit, s, &mut out));
        out
    }

    fn stmt_own_writes(
        &self,
        symtab: &SymbolTable,
        unit: &UnitSymbols,
        s: &Stmt,
        out: &mut BTreeSet<Location>,
    ) {
        let lvalue = |l: &LValue, out: &mut BTreeSet<Location>| {
            if let Some(loc) = unit.location(l.name()) {
                out.insert(loc);
            }
            if let LValue::Elem(_, i) = l {
                out.extend(self.expr_writes(symtab, unit, i));
            }
        };
        match &s.kind {
            StmtKind::Assign { target, value } => {
                lvalue(target, out);
                out.extend(self.expr_writes(symtab, unit, value));
            }
            StmtKind::Read { targets } => {
                for t in targets {
                    lvalue(t, out);
                }
            }
            StmtKind::Do {
                var, lo, hi, step, ..
            } => {
                out.extend(unit.location(var));
                for e in [Some(lo), Some(hi), step.as_ref()].into_iter().flatten() {
                    out.extend(self.expr_writes(symtab, unit, e));
                }
            }
            StmtKind::If { cond, .. } | StmtKind::DoWhile { cond, .. } => {
                out.extend(self.expr_writes(symtab, unit, cond));
            }
            StmtKind::Call { name, args } => {
                for a in args {
                    out.extend(self.expr_writes(symtab, unit, a));
                }
                out.extend(self.call_writes(symtab, unit, name, args));
            }
            StmtKind::Print { args } => {
                for a in args {
                    out.extend(self.expr_writes(symtab, unit, a));
                }
            }
            StmtKind::Return | StmtKind::Stop | StmtKind::Continue => {}
        }
    }

    /// Writes performed by function calls inside an expression.
    pub fn expr_writes(
        &self,
        symtab: &SymbolTable,
        unit: &UnitSymbols,
        e: &Expr,
    ) -> BTreeSet<Location> {
        let mut out = BTreeSet::new();
        e.visit_calls(&mut |name, args| out.extend(self.call_writes(symtab, unit, name, args)));
        out
    }

    /// The callee's summary translated into the caller's namespace: formal
    /// slots become the actual's storage (expression actuals are
    /// temporaries), cells stay cells. Writes inside the actual expressions
    /// are not included.
    pub fn call_writes(
        &self,
        symtab: &SymbolTable,
        caller: &UnitSymbols,
        callee: &str,
        args: &[Expr],
    ) -> BTreeSet<Location> {
        let mut out = BTreeSet::new();
        for slot in self.of(callee) {
            match slot {
                Slot::Formal(i) => {
                    if let Some(loc) = args.get(*i).and_then(|a| actual_location(caller, a)) {
                        out.insert(loc);
                    }
                }
                Slot::Cell { block, index } => {
                    out.insert(cell_location(symtab, block, *index));
                }
            }
        }
        out
    }
}

/// Storage an actual argument is bound to by reference: a variable (not a
/// PARAMETER) or an array element (whose whole array is the location).
pub fn actual_location(caller: &UnitSymbols, actual: &Expr) -> Option<Location> {
    match actual {
        Expr::Var(n) => caller.location(n),
        Expr::Elem(n, _) => caller.location(n),
        _ => None,
    }
}

/// Whether `name` in `unit` is a formal or COMMON member (caller-visible).
pub fn is_visible_outside(unit: &UnitSymbols, name: &str) -> bool {
    matches!(
        unit.var(name).map(|v| &v.kind),
        Some(VarKind::Formal(_)) | Some(VarKind::Common { .. })
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{parse_program, resolve_symbols};

    fn summaries(files: &[(&str, &str)]) -> ModSummary {
        let p = parse_program(files).unwrap();
        let st = resolve_symbols(&p).unwrap();
        mod_summaries(&p, &st).unwrap()
    }

    fn cell(b: &str, i: usize) -> Slot {
        Slot::Cell {
            block: b.into(),
            index: i,
        }
    }

    #[test]
    fn direct_formal_write() {
        let m = summaries(&[
            ("m.f", "PROGRAM M\nINTEGER X\nCALL S(X)\nEND\n"),
            ("s.f", "SUBROUTINE S(A)\nINTEGER A\nA = 1\nEND\n"),
        ]);
        assert_eq!(m.of("S"), &BTreeSet::from([Slot::Formal(0)]));
        assert!(m.of("M").is_empty(), "main's own locals are not caller-visible");
    }

    #[test]
    fn formal_write_through_callee_reaches_common() {
        let m = summaries(&[
            ("m.f", "PROGRAM M\nCALL S\nEND\n"),
            (
                "s.f",
                "SUBROUTINE S\nINTEGER X, Y\nCOMMON /B/ X, Y\nCALL T(X)\nEND\n",
            ),
            ("t.f", "SUBROUTINE T(A)\nINTEGER A\nA = 2\nEND\n"),
        ]);
        assert_eq!(m.of("S"), &BTreeSet::from([cell("B", 0)]));
        assert_eq!(m.of("M"), &BTreeSet::from([cell("B", 0)]));
    }

    #[test]
    fn mutual_recursion_reaches_fixpoint() {
        // Hand-computed: S writes (B,0) and calls T; T writes (B,1) and
        // calls S. Both summaries are {(B,0), (B,1)}.
        let m = summaries(&[
            ("m.f", "PROGRAM M\nCALL S(1)\nEND\n"),
            (
                "s.f",
                "SUBROUTINE S(N)\nINTEGER N, P, Q\nCOMMON /B/ P, Q\nP = N\nIF (N .GT. 0) THEN\nCALL T(N - 1)\nENDIF\nEND\n",
            ),
            (
                "t.f",
                "SUBROUTINE T(N)\nINTEGER N, P, Q\nCOMMON /B/ P, Q\nQ = N\nCALL S(N)\nEND\n",
            ),
        ]);
        let both = BTreeSet::from([cell("B", 0), cell("B", 1)]);
        assert_eq!(m.of("S"), &both);
        assert_eq!(m.of("T"), &both);
    }

    #[test]
    fn array_element_write_is_whole_array() {
        let p = parse_program(&[
            ("m.f", "PROGRAM M\nINTEGER V(3)\nCALL S(V)\nEND\n"),
            ("s.f", "SUBROUTINE S(A)\nINTEGER A(3)\nA(2) = 1\nEND\n"),
        ])
        .unwrap();
        let st = resolve_symbols(&p).unwrap();
        let m = mod_summaries(&p, &st).unwrap();
        assert_eq!(m.of("S"), &BTreeSet::from([Slot::Formal(0)]));
        let writes = m.block_writes(&st, st.unit("M"), &p.main_unit().body);
        assert_eq!(
            writes,
            BTreeSet::from([Location::ArrayWhole(Box::new(Location::local("M", "V")))])
        );
    }
}
