//! Merging, naming and reporting of forward-walk variants.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::{Path, PathBuf};

use super::engine::{placeholder_id, Engine};
use super::Specialization;
use crate::analysis::{AbstractEnv, Location, Slot};
use crate::constraints::ResolvedConstraints;
use crate::frontend::ast::*;
use crate::frontend::pretty::{block_lines, stmt_header};
use crate::frontend::symbols::{UnitSymbols, VarKind};
use crate::report::{
    Diagnostic, Disposition, FactFired, Report, Severity, Stats, UnitEntry, UnitStatus,
    VariantEntry, SCHEMA,
};
use crate::value::Value;

/// Rewrites every callee name (CALL targets and function references).
pub(super) fn map_callees(block: &mut [Stmt], f: &mut dyn FnMut(&str) -> String) {
    fn expr(e: &mut Expr, f: &mut dyn FnMut(&str) -> String) {
        match e {
            Expr::Call(name, args) => {
                for a in args.iter_mut() {
                    expr(a, f);
                }
                *name = f(name);
            }
            Expr::Lit(_) | Expr::Var(_) => {}
            Expr::Elem(_, i) => expr(i, f),
            Expr::Unary(_, x) => expr(x, f),
            Expr::Binary(_, l, r) => {
                expr(l, f);
                expr(r, f);
            }
        }
    }
    fn lvalue(l: &mut LValue, f: &mut dyn FnMut(&str) -> String) {
        if let LValue::Elem(_, i) = l {
            expr(i, f);
        }
    }
    for s in block {
        match &mut s.kind {
            StmtKind::Assign { target, value } => {
                lvalue(target, f);
                expr(value, f);
            }
            StmtKind::If {
                cond,
                then_body,
                else_body,
            } => {
                expr(cond, f);
                map_callees(then_body, f);
                map_callees(else_body, f);
            }
            StmtKind::Do {
                lo, hi, step, body, ..
            } => {
                expr(lo, f);
                expr(hi, f);
                if let Some(st) = step {
                    expr(st, f);
                }
                map_callees(body, f);
            }
            StmtKind::DoWhile { cond, body } => {
                expr(cond, f);
                map_callees(body, f);
            }
            StmtKind::Call { name, args } => {
                for a in args.iter_mut() {
                    expr(a, f);
                }
                *name = f(name);
            }
            StmtKind::Print { args } => {
                for a in args.iter_mut() {
                    expr(a, f);
                }
            }
            StmtKind::Read { targets } => {
                for t in targets.iter_mut() {
                    lvalue(t, f);
                }
            }
            StmtKind::Return | StmtKind::Stop | StmtKind::Continue => {}
        }
    }
}

fn renamed(body: &[Stmt], f: &mut dyn FnMut(&str) -> String) -> Vec<Stmt> {
    let mut b = body.to_vec();
    map_callees(&mut b, f);
    b
}

/// Callee variant ids in evaluation order.
fn callee_ids(body: &[Stmt]) -> Vec<usize> {
    let mut out = Vec::new();
    renamed(body, &mut |n| {
        out.extend(placeholder_id(n));
        n.to_string()
    });
    out
}

fn body_text(body: &[Stmt]) -> String {
    let mut lines = Vec::new();
    block_lines(&mut lines, body, 0);
    let mut s = String::new();
    for l in lines {
        if let Some(id) = l.id {
            s.push_str(&id.to_string());
        }
        s.push('|');
        s.push_str(&l.render());
        s.push('\n');
    }
    s
}

struct Classes {
    of: Vec<usize>,
    /// Class → member variant ids, ascending.
    members: Vec<Vec<usize>>,
    /// Class → callee classes in call order.
    callees: Vec<Vec<usize>>,
}

/// Coarsest partition of variants with identical residual text whose
/// callees are pairwise in the same class.
fn partition(eng: &Engine) -> Classes {
    let n = eng.variants.len();
    let calls: Vec<Vec<usize>> = (0..n).map(|v| callee_ids(&eng.variant(v).body)).collect();
    let mut sig: HashMap<String, usize> = HashMap::new();
    let mut of: Vec<usize> = (0..n)
        .map(|v| {
            let var = eng.variant(v);
            let body = renamed(&var.body, &mut |c| match placeholder_id(c) {
                Some(id) => eng.variant(id).unit.clone(),
                None => c.to_string(),
            });
            let key = format!("{}\n{}", var.unit, body_text(&body));
            let next = sig.len();
            *sig.entry(key).or_insert(next)
        })
        .collect();
    let mut count = sig.len();
    loop {
        let mut sig: HashMap<(usize, Vec<usize>), usize> = HashMap::new();
        let next_of: Vec<usize> = (0..n)
            .map(|v| {
                let key = (of[v], calls[v].iter().map(|c| of[*c]).collect());
                let next = sig.len();
                *sig.entry(key).or_insert(next)
            })
            .collect();
        of = next_of;
        if sig.len() == count {
            break;
        }
        count = sig.len();
    }
    let mut members = vec![Vec::new(); count];
    for (v, c) in of.iter().enumerate() {
        members[*c].push(v);
    }
    let callees = members.iter().map(|m| calls[m[0]].iter().map(|c| of[*c]).collect()).collect();
    Classes {
        of,
        members,
        callees,
    }
}

struct Naming {
    /// Emitted classes in DFS order with their names.
    order: Vec<(usize, String)>,
    names: HashMap<usize, String>,
    verbatim: Vec<String>,
}

fn name_classes(eng: &Engine, cl: &Classes) -> Naming {
    let originals: BTreeSet<&str> = eng.p.units.iter().map(|u| u.name.as_str()).collect();
    let base_class: HashMap<usize, String> = eng
        .base
        .iter()
        .map(|(u, v)| (cl.of[*v], u.clone()))
        .collect();
    let mut roots = vec![cl.of[0]];
    loop {
        let mut seen = BTreeSet::new();
        let mut order = Vec::new();
        for r in &roots {
            dfs(*r, cl, &mut seen, &mut order);
        }
        let unit_of = |c: usize| &eng.variant(cl.members[c][0]).unit;
        let emitted_units: BTreeSet<&String> = order.iter().map(|c| unit_of(*c)).collect();
        let verbatim: Vec<String> = eng
            .p
            .units
            .iter()
            .filter(|u| !emitted_units.contains(&u.name))
            .map(|u| u.name.clone())
            .collect();
        // a verbatim unit calls its callees by their original names
        let mut forced = Vec::new();
        for v in &verbatim {
            for c in crate::frontend::symbols::callees(eng.p.unit(v).expect("unit")) {
                if let Some(b) = eng.base.get(&c) {
                    let bc = cl.of[*b];
                    if !seen.contains(&bc) && !roots.contains(&bc) && !forced.contains(&bc) {
                        forced.push(bc);
                    }
                }
            }
        }
        if !forced.is_empty() {
            roots.extend(forced);
            continue;
        }
        let mut taken: BTreeSet<String> = originals.iter().map(|s| s.to_string()).collect();
        let mut k: HashMap<String, usize> = HashMap::new();
        let mut names = HashMap::new();
        let mut named = Vec::new();
        for c in order {
            let unit = unit_of(c).clone();
            let name = if base_class.get(&c) == Some(&unit) {
                unit
            } else {
                let k = k.entry(unit.clone()).or_insert(0);
                loop {
                    *k += 1;
                    let cand = format!("{unit}_{k}");
                    if !taken.contains(&cand) {
                        break cand;
                    }
                }
            };
            taken.insert(name.clone());
            names.insert(c, name.clone());
            named.push((c, name));
        }
        return Naming {
            order: named,
            names,
            verbatim,
        };
    }
}

fn dfs(c: usize, cl: &Classes, seen: &mut BTreeSet<usize>, order: &mut Vec<usize>) {
    if !seen.insert(c) {
        return;
    }
    order.push(c);
    for d in &cl.callees[c] {
        dfs(*d, cl, seen, order);
    }
}

fn location_name(syms: &UnitSymbols, loc: &Location) -> String {
    syms.vars
        .iter()
        .find(|(n, _)| syms.location(n).as_ref() == Some(loc))
        .map(|(n, _)| n.clone())
        .unwrap_or_else(|| loc.to_string())
}

fn slot_name(syms: &UnitSymbols, s: &Slot) -> String {
    match s {
        Slot::Formal(i) => syms.formals[*i].clone(),
        Slot::Cell { .. } => s.to_string(),
    }
}

fn index_stmts(block: &[Stmt]) -> HashMap<ProvId, &Stmt> {
    let mut m = HashMap::new();
    walk_stmts(block, &mut |s| {
        m.insert(s.id, s);
    });
    m
}

fn residual_file(p: &Program, original: &str, name: &str) -> PathBuf {
    let orig = p.files.get(original).cloned().unwrap_or_default();
    if name == original {
        return orig;
    }
    let dir = orig.parent().unwrap_or(Path::new(""));
    dir.join(format!("{}.f", name.to_ascii_lowercase()))
}

fn unused_declarations(u: &Unit, syms: &UnitSymbols) -> Vec<String> {
    let mut used = BTreeSet::new();
    walk_stmts(&u.body, &mut |s| s.collect_variables(&mut used));
    syms.vars
        .values()
        .filter(|v| v.kind == VarKind::Local && !used.contains(&v.name))
        .map(|v| v.name.clone())
        .collect()
}

fn join_all<'a>(envs: impl IntoIterator<Item = &'a AbstractEnv>) -> AbstractEnv {
    envs.into_iter()
        .fold(None, |acc: Option<AbstractEnv>, e| {
            Some(match acc {
                None => e.clone(),
                Some(a) => a.join(e),
            })
        })
        .unwrap_or_default()
}

pub(super) fn emit(eng: &Engine, rc: ResolvedConstraints) -> Specialization {
    let p = eng.p;
    let cl = partition(eng);
    let naming = name_classes(eng, &cl);
    let rename = |c: &str| match placeholder_id(c) {
        Some(id) => naming.names[&cl.of[id]].clone(),
        None => c.to_string(),
    };

    // residual units in original order: base class first, then by k
    let mut by_unit: BTreeMap<&str, Vec<(usize, &String)>> = BTreeMap::new();
    for (c, name) in &naming.order {
        let unit = eng.variant(cl.members[*c][0]).unit.as_str();
        by_unit.entry(unit).or_default().push((*c, name));
    }
    let suffix = |n: &str| n.rsplit_once('_').and_then(|(_, k)| k.parse::<usize>().ok()).unwrap_or(0);
    for (unit, list) in by_unit.iter_mut() {
        list.sort_by_key(|(_, n)| (n.as_str() != *unit, suffix(n)));
    }

    let mut units = Vec::new();
    let mut files = BTreeMap::new();
    let mut entries = Vec::new();
    let mut statements = BTreeMap::new();
    let mut bindings = BTreeMap::new();
    let mut snapshots = BTreeMap::new();
    let mut origin = BTreeMap::new();
    let mut variants = Vec::new();
    let mut facts_fired = Vec::new();
    let mut notes: BTreeSet<(ProvId, String)> = BTreeSet::new();
    let mut removed_counts: BTreeMap<String, usize> = BTreeMap::new();

    for u in &p.units {
        let syms = eng.symtab.unit(&u.name);
        if naming.verbatim.contains(&u.name) {
            let file = p.files.get(&u.name).cloned().unwrap_or_default();
            files.insert(u.name.clone(), file.clone());
            origin.insert(u.name.clone(), u.name.clone());
            statements.insert(
                u.name.clone(),
                u.prov_ids().into_iter().map(|id| (id, Disposition::Kept)).collect(),
            );
            entries.push(UnitEntry {
                name: u.name.clone(),
                original: u.name.clone(),
                kind: u.kind.keyword().to_ascii_lowercase(),
                status: UnitStatus::Verbatim,
                file: file.display().to_string(),
                statements_original: u.statement_count(),
                statements_residual: u.statement_count(),
                unused_declarations: unused_declarations(u, syms),
            });
            units.push(u.clone());
            continue;
        }
        for (c, name) in by_unit.get(u.name.as_str()).into_iter().flatten() {
            let members = &cl.members[*c];
            let rep = eng.variant(members[0]);
            let body = renamed(&rep.body, &mut |n| rename(n));
            let residual = Unit {
                name: (*name).clone(),
                body,
                ..u.clone()
            };

            let present = index_stmts(&residual.body);
            let mut disp = BTreeMap::new();
            walk_stmts(&u.body, &mut |s| {
                let d = if let Some(r) = rep.removed.get(&s.id) {
                    *removed_counts.entry(r.to_string()).or_default() += 1;
                    Disposition::Removed { reason: *r }
                } else if let Some(rs) = present.get(&s.id) {
                    let (old, new) = (stmt_header(s), stmt_header(rs));
                    if old == new {
                        Disposition::Kept
                    } else {
                        Disposition::Simplified { old, new }
                    }
                } else {
                    return;
                };
                disp.insert(s.id, d);
            });
            statements.insert((*name).clone(), disp);

            let mut snap: BTreeMap<ProvId, AbstractEnv> = BTreeMap::new();
            for m in members {
                for (id, e) in &eng.variant(*m).snapshots {
                    let joined = match snap.remove(id) {
                        Some(prev) => prev.join(e),
                        None => e.clone(),
                    };
                    snap.insert(*id, joined);
                }
            }
            snapshots.insert((*name).clone(), snap);
            let entry = join_all(members.iter().map(|m| &eng.variant(*m).entry));
            bindings.insert(
                (*name).clone(),
                entry
                    .bindings()
                    .map(|(l, v)| (location_name(syms, l), v.clone()))
                    .collect::<BTreeMap<String, Value>>(),
            );
            for m in members {
                if !eng.requested[*m] {
                    continue;
                }
                let key = &eng.keys[*m];
                variants.push(VariantEntry {
                    unit: u.name.clone(),
                    name: (*name).clone(),
                    entries: key
                        .entries
                        .iter()
                        .map(|(s, v)| (slot_name(syms, s), v.clone()))
                        .collect(),
                    aliases: key
                        .aliases
                        .iter()
                        .map(|c| c.iter().map(|s| slot_name(syms, s)).collect())
                        .collect(),
                });
            }
            for (id, loc, v) in &rep.facts {
                facts_fired.push(FactFired {
                    unit: (*name).clone(),
                    stmt: *id,
                    location: location_name(syms, loc),
                    differs_from: v.clone(),
                });
            }
            for m in members {
                notes.extend(eng.variant(*m).notes.iter().cloned());
            }

            let file = residual_file(p, &u.name, name);
            files.insert((*name).clone(), file.clone());
            origin.insert((*name).clone(), u.name.clone());
            entries.push(UnitEntry {
                name: (*name).clone(),
                original: u.name.clone(),
                kind: u.kind.keyword().to_ascii_lowercase(),
                status: UnitStatus::Specialized,
                file: file.display().to_string(),
                statements_original: u.statement_count(),
                statements_residual: residual.statement_count(),
                unused_declarations: unused_declarations(&residual, syms),
            });
            units.push(residual);
        }
    }

    let program = Program {
        units,
        entry: p.entry.clone(),
        files,
        origins: p.origins.clone(),
    };
    let mut diagnostics: Vec<Diagnostic> = rc
        .notes
        .iter()
        .map(|n| Diagnostic {
            severity: Severity::Note,
            message: n.clone(),
            at: None,
        })
        .collect();
    diagnostics.extend(notes.into_iter().map(|(id, msg)| Diagnostic {
        severity: Severity::Warning,
        message: msg,
        at: p.origins.get(&id).map(|o| o.to_string()),
    }));
    let stats = Stats {
        units_original: p.units.len(),
        units_residual: program.units.len(),
        variants: variants.len(),
        cache_hits: eng.cache_hits,
        statements_original: p.units.iter().map(Unit::statement_count).sum(),
        statements_residual: program.units.iter().map(Unit::statement_count).sum(),
        removed: removed_counts,
    };
    let report = Report {
        schema: SCHEMA,
        policy: eng.policy.to_string(),
        units: entries,
        variants,
        statements,
        bindings,
        facts_fired,
        stats,
        diagnostics,
    };
    Specialization {
        program,
        report,
        snapshots,
        origin,
        constraints: rc,
    }
}
