//! Post-walk cleanup: dead assignments to locals, CONTINUEs and IFs left
//! with nothing in either arm.

use std::collections::{BTreeMap, BTreeSet};

use crate::frontend::ast::*;
use crate::frontend::symbols::{SymbolTable, UnitSymbols, VarKind};
use crate::report::RemovalReason;
use crate::value::{BaseType, Value};

type Names = BTreeSet<String>;

pub(super) fn cleanup(
    body: &mut Vec<Stmt>,
    syms: &UnitSymbols,
    symtab: &SymbolTable,
    keep: &BTreeSet<String>,
    removed: &mut BTreeMap<ProvId, RemovalReason>,
) {
    let cands: Names = syms
        .vars
        .values()
        .filter(|v| v.kind == VarKind::Local && !v.is_array() && !keep.contains(&v.name))
        .map(|v| v.name.clone())
        .collect();
    let mut lv = Liveness {
        syms,
        symtab,
        cands: &cands,
        removed,
        changed: false,
    };
    loop {
        lv.changed = false;
        lv.block(body, Names::new(), true);
        lv.tidy(body);
        if !lv.changed {
            return;
        }
    }
}

/// Whether evaluating `e` can neither fault (beyond uninitialized reads)
/// nor have side effects.
pub(super) fn effect_free(e: &Expr, syms: &UnitSymbols, symtab: &SymbolTable) -> bool {
    match e {
        Expr::Lit(_) | Expr::Var(_) => true,
        Expr::Elem(..) | Expr::Call(..) => false,
        Expr::Unary(_, x) => effect_free(x, syms, symtab),
        Expr::Binary(op, l, r) => {
            let ints = syms.type_of(symtab, l) == BaseType::Integer
                && syms.type_of(symtab, r) == BaseType::Integer;
            let op_ok = match op {
                BinOp::Div if ints => matches!(r.as_lit(), Some(Value::Int(d)) if *d != 0),
                BinOp::Pow if ints => {
                    matches!(r.as_lit(), Some(Value::Int(x)) if *x >= 0)
                        || matches!(l.as_lit(), Some(Value::Int(b)) if *b != 0)
                }
                _ => true,
            };
            op_ok && effect_free(l, syms, symtab) && effect_free(r, syms, symtab)
        }
    }
}

/// Literal bounds that make the loop body never run.
fn zero_trip(lo: &Expr, hi: &Expr, step: Option<&Expr>) -> bool {
    let step = match step {
        Some(e) => e.as_lit().cloned(),
        None => Some(Value::Int(1)),
    };
    match (lo.as_lit(), hi.as_lit(), step) {
        (Some(Value::Int(l)), Some(Value::Int(h)), Some(Value::Int(st))) if st != 0 => {
            (*h as i128 - *l as i128 + st as i128) / (st as i128) <= 0
        }
        _ => false,
    }
}

struct Liveness<'a> {
    syms: &'a UnitSymbols,
    symtab: &'a SymbolTable,
    cands: &'a Names,
    removed: &'a mut BTreeMap<ProvId, RemovalReason>,
    changed: bool,
}

impl Liveness<'_> {
    fn uses(&self, e: &Expr, live: &mut Names) {
        live.extend(e.variables().into_iter().filter(|n| self.cands.contains(n)));
    }

    /// Live candidates before `block`, given those live after it. With
    /// `mutate`, dead assignments are removed on the way.
    fn block(&mut self, block: &mut Vec<Stmt>, mut live: Names, mutate: bool) -> Names {
        let mut i = block.len();
        while i > 0 {
            i -= 1;
            if let Some(l) = self.stmt(&mut block[i], &live, mutate) {
                live = l;
            } else if mutate {
                // dead: removing it changes nothing upstream
                let s = block.remove(i);
                let reason = match s.kind {
                    StmtKind::Do { .. } => RemovalReason::ZeroTrip,
                    _ => RemovalReason::DeadAssignment,
                };
                self.removed.insert(s.id, reason);
                self.changed = true;
            }
        }
        live
    }

    /// `None` marks a dead assignment or a zero-trip DO whose index is dead.
    fn stmt(&mut self, s: &mut Stmt, after: &Names, mutate: bool) -> Option<Names> {
        let mut live = after.clone();
        match &mut s.kind {
            StmtKind::Assign { target, value } => match target {
                LValue::Var(t) if self.cands.contains(t.as_str()) => {
                    if !after.contains(t.as_str()) && effect_free(value, self.syms, self.symtab) {
                        return None;
                    }
                    live.remove(t.as_str());
                    self.uses(value, &mut live);
                }
                LValue::Var(_) => self.uses(value, &mut live),
                LValue::Elem(_, i) => {
                    self.uses(i, &mut live);
                    self.uses(value, &mut live);
                }
            },
            StmtKind::If {
                cond,
                then_body,
                else_body,
            } => {
                let t = self.block(then_body, after.clone(), mutate);
                let e = self.block(else_body, after.clone(), mutate);
                live = &t | &e;
                self.uses(cond, &mut live);
            }
            StmtKind::Do {
                var,
                lo,
                hi,
                step,
                body,
            } => {
                if body.is_empty()
                    && self.cands.contains(var.as_str())
                    && !after.contains(var.as_str())
                    && zero_trip(lo, hi, step.as_ref())
                {
                    return None;
                }
                let mut b_in = Names::new();
                let body_out = loop {
                    let mut out = after | &b_in;
                    out.remove(var.as_str());
                    let next = self.block(body, out.clone(), false);
                    if next == b_in {
                        break out;
                    }
                    b_in = next;
                };
                if mutate {
                    self.block(body, body_out.clone(), true);
                }
                live = body_out;
                for e in [Some(&*lo), Some(&*hi), step.as_ref()].into_iter().flatten() {
                    self.uses(e, &mut live);
                }
            }
            StmtKind::DoWhile { cond, body } => {
                let mut head = after.clone();
                self.uses(cond, &mut head);
                loop {
                    let b_in = self.block(body, head.clone(), false);
                    let mut next = &head | &b_in;
                    self.uses(cond, &mut next);
                    if next == head {
                        break;
                    }
                    head = next;
                }
                if mutate {
                    self.block(body, head.clone(), true);
                }
                live = head;
            }
            StmtKind::Call { args, .. } | StmtKind::Print { args } => {
                for a in args.iter() {
                    self.uses(a, &mut live);
                }
            }
            StmtKind::Read { targets } => {
                for t in targets.iter().rev() {
                    match t {
                        LValue::Var(n) => {
                            live.remove(n.as_str());
                        }
                        LValue::Elem(_, i) => self.uses(i, &mut live),
                    }
                }
            }
            StmtKind::Return | StmtKind::Stop => live.clear(),
            StmtKind::Continue => {}
        }
        Some(live)
    }

    /// Drops CONTINUEs and IFs whose arms are both empty and whose
    /// condition is effect-free.
    fn tidy(&mut self, block: &mut Vec<Stmt>) {
        let mut out = Vec::with_capacity(block.len());
        for mut s in block.drain(..) {
            for child in children_mut(&mut s) {
                self.tidy(child);
            }
            let reason = match &s.kind {
                StmtKind::Continue => Some(RemovalReason::NoOp),
                StmtKind::If {
                    cond,
                    then_body,
                    else_body,
                } if then_body.is_empty()
                    && else_body.is_empty()
                    && effect_free(cond, self.syms, self.symtab) =>
                {
                    Some(RemovalReason::EmptyIf)
                }
                _ => None,
            };
            match reason {
                Some(r) => {
                    self.removed.insert(s.id, r);
                    self.changed = true;
                }
                None => out.push(s),
            }
        }
        *block = out;
    }
}

fn children_mut(s: &mut Stmt) -> Vec<&mut Vec<Stmt>> {
    match &mut s.kind {
        StmtKind::If {
            then_body,
            else_body,
            ..
        } => vec![then_body, else_body],
        StmtKind::Do { body, .. } | StmtKind::DoWhile { body, .. } => vec![body],
        _ => Vec::new(),
    }
}
