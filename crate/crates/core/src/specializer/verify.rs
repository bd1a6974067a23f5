//! Checks on a finished specialization: structural well-formedness of the
//! residual and sampled soundness of the recorded abstract states.

use std::collections::{BTreeMap, BTreeSet};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::Specialization;
use crate::analysis::{AbstractEnv, Location};
use crate::error::SpecializeError;
use crate::frontend::ast::*;
use crate::frontend::resolve_symbols;
use crate::frontend::symbols::VarKind;
use crate::interp::diff::{out_of_contract, pinned, Assumptions};
use crate::interp::{
    designated_inputs, generate_input, run_observed, Observer, StorageView, DEFAULT_FUEL,
};
use crate::value::Value;

/// Structural problems of a residual program; empty when well formed.
pub fn check_structure(original: &Program, spec: &Specialization) -> Vec<String> {
    let mut errs = Vec::new();
    let residual = &spec.program;
    let idents = original.variable_identifiers();
    for extra in residual.variable_identifiers().difference(&idents) {
        errs.push(format!("identifier {extra} does not occur in the original"));
    }
    let originals: BTreeSet<&str> = original.units.iter().map(|u| u.name.as_str()).collect();
    for u in &residual.units {
        let Some(orig_name) = spec.origin.get(&u.name) else {
            errs.push(format!("unit {} has no origin", u.name));
            continue;
        };
        let Some(orig) = original.unit(orig_name) else {
            errs.push(format!("unit {} comes from unknown unit {orig_name}", u.name));
            continue;
        };
        let well_named = u.name == *orig_name
            || u.name
                .strip_prefix(orig_name.as_str())
                .and_then(|s| s.strip_prefix('_'))
                .is_some_and(|k| k.parse::<usize>().is_ok_and(|k| k > 0));
        if !well_named || (u.name != *orig_name && originals.contains(u.name.as_str())) {
            errs.push(format!("unit {} is not a valid name for a variant of {orig_name}", u.name));
        }
        if u.kind != orig.kind || u.formals != orig.formals || u.decls != orig.decls {
            errs.push(format!("unit {} changed its interface or declarations", u.name));
        }
        let orig_ids: BTreeSet<ProvId> = orig.prov_ids().into_iter().collect();
        let ids = u.prov_ids();
        let res_ids: BTreeSet<ProvId> = ids.iter().copied().collect();
        if res_ids.len() != ids.len() {
            errs.push(format!("unit {} repeats a statement id", u.name));
        }
        for id in res_ids.difference(&orig_ids) {
            errs.push(format!("unit {} contains {id} from another unit", u.name));
        }
        let disp = spec.report.statements.get(&u.name);
        for id in &orig_ids {
            let present = res_ids.contains(id);
            let removed = disp
                .and_then(|d| d.get(id))
                .is_some_and(|d| d.removal().is_some());
            if present == removed {
                errs.push(format!(
                    "unit {}: {id} is {}",
                    u.name,
                    if present { "both present and removed" } else { "unaccounted for" }
                ));
            }
        }
    }
    errs
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SoundnessSummary {
    /// Inputs on which the residual was run.
    pub runs: usize,
    /// Inputs skipped because the original ran outside the contract.
    pub skipped: usize,
    /// Individual (statement, location) comparisons performed.
    pub checks: usize,
    pub violations: Vec<String>,
}

impl SoundnessSummary {
    pub fn is_sound(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Variables a statement's own expressions read (children excluded).
fn reads(s: &Stmt) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    let lv = |l: &LValue, out: &mut BTreeSet<String>| {
        if let LValue::Elem(_, i) = l {
            i.collect_variables(out);
        }
    };
    match &s.kind {
        StmtKind::Assign { target, value } => {
            lv(target, &mut out);
            value.collect_variables(&mut out);
        }
        StmtKind::If { cond, .. } | StmtKind::DoWhile { cond, .. } => cond.collect_variables(&mut out),
        StmtKind::Do { lo, hi, step, .. } => {
            for e in [Some(lo), Some(hi), step.as_ref()].into_iter().flatten() {
                e.collect_variables(&mut out);
            }
        }
        StmtKind::Call { args, .. } | StmtKind::Print { args } => {
            for a in args {
                a.collect_variables(&mut out);
            }
        }
        StmtKind::Read { targets } => {
            for t in targets {
                lv(t, &mut out);
            }
        }
        StmtKind::Return | StmtKind::Stop | StmtKind::Continue => {}
    }
    out
}

struct Checker<'a> {
    snapshots: &'a BTreeMap<String, BTreeMap<ProvId, AbstractEnv>>,
    /// Residual unit → local variable name → is it caller-visible.
    symbols: BTreeMap<String, BTreeMap<String, bool>>,
    checks: usize,
    violations: Vec<String>,
}

impl Checker<'_> {
    /// Current value of `loc`, or `None` when it must not be checked here.
    fn observe(
        &self,
        unit: &str,
        loc: &Location,
        read: &BTreeSet<String>,
        view: &dyn StorageView,
    ) -> Option<Value> {
        match loc {
            Location::CommonCell { block, index } => view.cell(block, *index),
            Location::Local { var, .. } => {
                let visible = *self.symbols.get(unit)?.get(var)?;
                if visible || read.contains(var) {
                    view.scalar(var)
                } else {
                    None
                }
            }
            Location::ArrayWhole(_) => None,
        }
    }
}

impl Observer for Checker<'_> {
    fn before_stmt(&mut self, unit: &str, stmt: &Stmt, view: &dyn StorageView) -> bool {
        let Some(env) = self.snapshots.get(unit).and_then(|m| m.get(&stmt.id)) else {
            return true;
        };
        let read = reads(stmt);
        for (loc, want) in env.bindings() {
            if let Some(got) = self.observe(unit, loc, &read, view) {
                self.checks += 1;
                if got != *want {
                    self.violations
                        .push(format!("{unit} {}: {loc} is {got}, recorded as {want}", stmt.id));
                }
            }
        }
        for (loc, not) in env.facts() {
            if let Some(got) = self.observe(unit, loc, &read, view) {
                self.checks += 1;
                if got == *not {
                    self.violations
                        .push(format!("{unit} {}: {loc} is {got}, recorded as ≠ {not}", stmt.id));
                }
            }
        }
        true
    }
}

/// Runs the residual on `inputs` generated inputs and compares every
/// recorded Known binding and disequality with the concrete store.
pub fn sample_soundness(
    original: &Program,
    spec: &Specialization,
    inputs: usize,
    seed: u64,
) -> Result<SoundnessSummary, SpecializeError> {
    let st_o = resolve_symbols(original)?;
    let st_r = resolve_symbols(&spec.program)
        .map_err(|e| SpecializeError::InvalidResidual(e.to_string()))?;
    let designated = designated_inputs(original, &st_o);
    let pins = pinned(original, &spec.constraints);
    let symbols = st_r
        .units
        .iter()
        .map(|(n, u)| {
            let vis = u
                .vars
                .iter()
                .map(|(v, info)| (v.clone(), !matches!(info.kind, VarKind::Local | VarKind::Result)))
                .collect();
            (n.clone(), vis)
        })
        .collect();
    let mut checker = Checker {
        snapshots: &spec.snapshots,
        symbols,
        checks: 0,
        violations: Vec::new(),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut summary = SoundnessSummary::default();
    for _ in 0..inputs {
        let input = generate_input(&mut rng, &designated, &pins);
        let mut guard = Assumptions {
            rc: &spec.constraints,
        };
        let o = run_observed(original, &st_o, &input, DEFAULT_FUEL, &mut guard);
        if out_of_contract(&o) {
            summary.skipped += 1;
            continue;
        }
        run_observed(&spec.program, &st_r, &input, DEFAULT_FUEL, &mut checker);
        summary.runs += 1;
    }
    summary.checks = checker.checks;
    summary.violations = checker.violations;
    Ok(summary)
}
