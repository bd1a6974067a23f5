//! Differential testing of a residual program against its original.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{run, run_observed, ConcreteState, ExitKind, FaultKind, InputName, InputVector, Observables, Observer, StorageView, DEFAULT_FUEL};
use crate::analysis::Location;
use crate::constraints::ResolvedConstraints;
use crate::error::SpecializeError;
use crate::frontend::ast::Program;
use crate::frontend::symbols::{SymbolTable, VarKind};
use crate::frontend::resolve_symbols;
use crate::value::{BaseType, Value};

const STREAM_LEN: usize = 32;

#[derive(Debug, Clone)]
pub struct DiffConfig {
    pub trials: usize,
    pub seed: u64,
    pub fuel: u64,
    pub shrink: bool,
}

impl Default for DiffConfig {
    fn default() -> Self {
        DiffConfig {
            trials: 200,
            seed: 0,
            fuel: DEFAULT_FUEL,
            shrink: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Counterexample {
    pub trial: usize,
    pub input: InputVector,
    pub original: Observables,
    pub residual: Observables,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    /// `skipped` trials fell outside the contract (assumption violated,
    /// uninitialized read or timeout in the original).
    Pass { trials: usize, skipped: usize },
    Fail(Box<Counterexample>),
}

impl Verdict {
    pub fn passed(&self) -> bool {
        matches!(self, Verdict::Pass { .. })
    }
}

/// Inputs the harness chooses: scalar main-program variables and scalar
/// COMMON cells.
pub fn designated_inputs(p: &Program, symtab: &SymbolTable) -> Vec<(InputName, BaseType)> {
    let mut out = Vec::new();
    for (name, info) in &symtab.unit(&p.entry).vars {
        if matches!(info.kind, VarKind::Local) && !info.is_array() {
            out.push((InputName::Main(name.clone()), info.base));
        }
    }
    for (block, layout) in &symtab.commons {
        for (index, cell) in layout.cells.iter().enumerate() {
            if cell.len.is_none() {
                out.push((
                    InputName::Cell {
                        block: block.clone(),
                        index,
                    },
                    cell.base,
                ));
            }
        }
    }
    out
}

pub(crate) fn pinned(p: &Program, rc: &ResolvedConstraints) -> BTreeMap<InputName, Value> {
    rc.presets
        .iter()
        .filter_map(|(l, v)| {
            let name = match l {
                Location::Local { unit, var } if *unit == p.entry => InputName::Main(var.clone()),
                Location::CommonCell { block, index } => InputName::Cell {
                    block: block.clone(),
                    index: *index,
                },
                _ => return None,
            };
            Some((name, v.clone()))
        })
        .collect()
}

fn random_value(rng: &mut impl Rng, ty: BaseType) -> Value {
    match ty {
        BaseType::Integer => Value::Int(rng.gen_range(-100..=100)),
        BaseType::Real => Value::Real(rng.gen_range(-800..=800) as f64 / 8.0),
        BaseType::Logical => Value::Logical(rng.gen()),
        BaseType::Character => {
            const WORDS: [&str; 4] = ["A", "B", "XY", "HELLO"];
            Value::Char(WORDS[rng.gen_range(0..WORDS.len())].to_string())
        }
    }
}

/// Random inputs respecting the constraint presets.
pub fn generate_input(
    rng: &mut impl Rng,
    designated: &[(InputName, BaseType)],
    pinned: &BTreeMap<InputName, Value>,
) -> InputVector {
    let mut presets = BTreeMap::new();
    for (name, ty) in designated {
        let v = match pinned.get(name) {
            Some(v) => v.clone(),
            None => random_value(rng, *ty),
        };
        presets.insert(name.clone(), v);
    }
    let mut input = InputVector {
        presets,
        ..Default::default()
    };
    for _ in 0..STREAM_LEN {
        input.ints.push(rng.gen_range(-100..=100));
        input.reals.push(rng.gen_range(-800..=800) as f64 / 8.0);
        input.logicals.push(rng.gen());
        if let Value::Char(s) = random_value(rng, BaseType::Character) {
            input.chars.push(s);
        }
    }
    input
}

/// Aborts the run when a procedure is entered with a constrained formal or
/// cell holding a different value.
pub(crate) struct Assumptions<'a> {
    pub rc: &'a ResolvedConstraints,
}

impl Observer for Assumptions<'_> {
    fn on_entry(&mut self, unit: &str, view: &dyn StorageView) -> bool {
        let Some(m) = self.rc.assumptions.get(unit) else {
            return true;
        };
        m.iter().all(|(loc, want)| {
            let got = match loc {
                Location::Local { var, .. } => view.scalar(var),
                Location::CommonCell { block, index } => view.cell(block, *index),
                Location::ArrayWhole(_) => None,
            };
            got.is_none_or(|g| g == *want)
        })
    }
}

pub(crate) fn out_of_contract(s: &ConcreteState) -> bool {
    s.aborted
        || matches!(
            s.observables.exit,
            ExitKind::Fault(f) if matches!(f.kind, FaultKind::Uninitialized | FaultKind::Timeout)
        )
}

struct Harness<'a> {
    original: &'a Program,
    residual: &'a Program,
    st_o: SymbolTable,
    st_r: SymbolTable,
    rc: &'a ResolvedConstraints,
    fuel: u64,
}

enum Outcome {
    Skip,
    Same,
    Differ(Observables, Observables),
}

impl Harness<'_> {
    fn trial(&self, input: &InputVector) -> Outcome {
        let mut obs = Assumptions { rc: self.rc };
        let o = run_observed(self.original, &self.st_o, input, self.fuel, &mut obs);
        if out_of_contract(&o) {
            return Outcome::Skip;
        }
        let r = run(self.residual, &self.st_r, input, self.fuel);
        if o.observables == r.observables {
            Outcome::Same
        } else {
            Outcome::Differ(o.observables, r.observables)
        }
    }

    /// Greedily moves unpinned entries towards zero (zero, half, one step)
    /// and trims the READ streams while the mismatch persists.
    fn shrink(&self, mut input: InputVector, pinned: &BTreeMap<InputName, Value>) -> InputVector {
        let fails = |cand: &InputVector| matches!(self.trial(cand), Outcome::Differ(..));
        loop {
            let mut changed = false;
            let names: Vec<InputName> = input.presets.keys().cloned().collect();
            for n in names {
                if pinned.contains_key(&n) {
                    continue;
                }
                for v in smaller(&input.presets[&n]) {
                    let mut cand = input.clone();
                    cand.presets.insert(n.clone(), v);
                    if fails(&cand) {
                        input = cand;
                        changed = true;
                        break;
                    }
                }
            }
            macro_rules! shrink_stream {
                ($field:ident, $wrap:expr, $unwrap:pat => $out:expr) => {
                    for i in 0..input.$field.len() {
                        for v in smaller(&$wrap(input.$field[i].clone())) {
                            let $unwrap = v else { continue };
                            let mut cand = input.clone();
                            cand.$field[i] = $out;
                            if fails(&cand) {
                                input = cand;
                                changed = true;
                                break;
                            }
                        }
                    }
                    while !input.$field.is_empty() {
                        let mut cand = input.clone();
                        cand.$field.pop();
                        if !fails(&cand) {
                            break;
                        }
                        input = cand;
                        changed = true;
                    }
                };
            }
            shrink_stream!(ints, Value::Int, Value::Int(x) => x);
            shrink_stream!(reals, Value::Real, Value::Real(x) => x);
            shrink_stream!(logicals, Value::Logical, Value::Logical(x) => x);
            shrink_stream!(chars, Value::Char, Value::Char(x) => x);
            if !changed {
                return input;
            }
        }
    }
}

/// Simpler candidates for `v`, most aggressive first.
fn smaller(v: &Value) -> Vec<Value> {
    match v {
        Value::Int(0) | Value::Logical(false) => Vec::new(),
        Value::Int(x) => {
            let mut out = vec![Value::Int(0), Value::Int(x / 2), Value::Int(x - x.signum())];
            out.dedup();
            out.retain(|c| c != v);
            out
        }
        Value::Real(x) if *x == 0.0 => Vec::new(),
        Value::Real(x) => {
            let mut out = vec![Value::Real(0.0), Value::Real(x.trunc())];
            if x.abs() > 1.0 {
                out.push(Value::Real((x / 2.0).trunc()));
            }
            out.retain(|c| c != v);
            out
        }
        Value::Logical(true) => vec![Value::Logical(false)],
        Value::Char(s) if s.is_empty() => Vec::new(),
        Value::Char(_) => vec![Value::Char(String::new())],
    }
}

pub fn diff_test(
    original: &Program,
    residual: &Program,
    rc: &ResolvedConstraints,
    trials: usize,
    seed: u64,
) -> Result<Verdict, SpecializeError> {
    diff_test_with(
        original,
        residual,
        rc,
        &DiffConfig {
            trials,
            seed,
            ..Default::default()
        },
    )
}

pub fn diff_test_with(
    original: &Program,
    residual: &Program,
    rc: &ResolvedConstraints,
    cfg: &DiffConfig,
) -> Result<Verdict, SpecializeError> {
    let st_o = resolve_symbols(original)?;
    let st_r = resolve_symbols(residual)
        .map_err(|e| SpecializeError::InvalidResidual(e.to_string()))?;
    let designated = designated_inputs(original, &st_o);
    let pinned = pinned(original, rc);
    let h = Harness {
        original,
        residual,
        st_o,
        st_r,
        rc,
        fuel: cfg.fuel,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut skipped = 0;
    for trial in 0..cfg.trials {
        let input = generate_input(&mut rng, &designated, &pinned);
        match h.trial(&input) {
            Outcome::Skip => skipped += 1,
            Outcome::Same => {}
            Outcome::Differ(o, r) => {
                let (input, original, residual) = if cfg.shrink {
                    let small = h.shrink(input, &pinned);
                    match h.trial(&small) {
                        Outcome::Differ(o, r) => (small, o, r),
                        _ => unreachable!("shrinking keeps a failing input"),
                    }
                } else {
                    (input, o, r)
                };
                return Ok(Verdict::Fail(Box::new(Counterexample {
                    trial,
                    input,
                    original,
                    residual,
                })));
            }
        }
    }
    Ok(Verdict::Pass {
        trials: cfg.trials,
        skipped,
    })
}
