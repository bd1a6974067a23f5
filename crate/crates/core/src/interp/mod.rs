//! Reference interpreter: big-step evaluation with by-reference calls.
//!
//! Storage is one arena of optional values (None = uninitialized). COMMON
//! blocks are allocated once at the bottom; every activation allocates its
//! locals and argument temporaries on top and truncates on return.

mod arith;
pub mod diff;

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::Serialize;

use crate::frontend::ast::*;
use crate::frontend::symbols::{SymbolTable, UnitSymbols, VarKind};
use crate::value::{BaseType, Value};

pub use diff::{
    designated_inputs, diff_test, diff_test_with, generate_input, Counterexample, DiffConfig,
    Verdict,
};

pub const DEFAULT_FUEL: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FaultKind {
    DivByZero,
    Uninitialized,
    OutOfBounds,
    Timeout,
    InputExhausted,
    ZeroStep,
}

impl fmt::Display for FaultKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FaultKind::DivByZero => "div-by-zero",
            FaultKind::Uninitialized => "uninitialized",
            FaultKind::OutOfBounds => "out-of-bounds",
            FaultKind::Timeout => "timeout",
            FaultKind::InputExhausted => "input-exhausted",
            FaultKind::ZeroStep => "zero-step",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Fault {
    pub kind: FaultKind,
    pub at: ProvId,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum ExitKind {
    Normal,
    Stopped,
    Fault(Fault),
}

impl fmt::Display for ExitKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExitKind::Normal => f.write_str("normal"),
            ExitKind::Stopped => f.write_str("stop"),
            ExitKind::Fault(x) => write!(f, "fault({}) at {}", x.kind, x.at),
        }
    }
}

/// What a run exposes to the outside world.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Observables {
    pub trace: Vec<String>,
    /// Final COMMON contents per block, array cells flattened.
    pub commons: BTreeMap<String, Vec<Option<Value>>>,
    pub exit: ExitKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConcreteState {
    pub observables: Observables,
    pub steps: u64,
    /// An observer aborted the run (e.g. an entry assumption did not hold).
    pub aborted: bool,
}

/// A designated input: a main-program variable or a COMMON cell.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum InputName {
    Main(String),
    Cell { block: String, index: usize },
}

impl fmt::Display for InputName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InputName::Main(n) => f.write_str(n),
            InputName::Cell { block, index } => write!(f, "/{block}/#{index}"),
        }
    }
}

/// Initial values of designated inputs plus the per-type READ streams.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct InputVector {
    pub presets: BTreeMap<InputName, Value>,
    pub ints: Vec<i64>,
    pub reals: Vec<f64>,
    pub logicals: Vec<bool>,
    pub chars: Vec<String>,
}

/// Read access to the storage of the current activation.
pub trait StorageView {
    /// Current value of a scalar variable of the active unit.
    fn scalar(&self, name: &str) -> Option<Value>;
    fn cell(&self, block: &str, index: usize) -> Option<Value>;
}

/// Hooks for instrumented runs. Returning `false` aborts the run.
pub trait Observer {
    fn on_entry(&mut self, _unit: &str, _view: &dyn StorageView) -> bool {
        true
    }
    fn before_stmt(&mut self, _unit: &str, _stmt: &Stmt, _view: &dyn StorageView) -> bool {
        true
    }
}

struct NoObserver;
impl Observer for NoObserver {}

pub fn run(p: &Program, symtab: &SymbolTable, inputs: &InputVector, fuel: u64) -> ConcreteState {
    run_observed(p, symtab, inputs, fuel, &mut NoObserver)
}

pub fn run_observed(
    p: &Program,
    symtab: &SymbolTable,
    inputs: &InputVector,
    fuel: u64,
    observer: &mut dyn Observer,
) -> ConcreteState {
    let mut m = Machine::new(p, symtab, inputs, fuel, observer);
    let exit = m.run_main();
    let aborted = exit == Err(Halt::Abort);
    let exit = match exit {
        Ok(()) => ExitKind::Normal,
        Err(Halt::Stopped) => ExitKind::Stopped,
        Err(Halt::Fault(f)) => ExitKind::Fault(f),
        Err(Halt::Abort) => ExitKind::Normal,
    };
    let commons = m.commons_snapshot();
    ConcreteState {
        observables: Observables {
            trace: std::mem::take(&mut m.trace),
            commons,
            exit,
        },
        steps: fuel - m.fuel,
        aborted,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Halt {
    Stopped,
    Fault(Fault),
    Abort,
}

impl From<Fault> for Halt {
    fn from(f: Fault) -> Self {
        Halt::Fault(f)
    }
}

enum Flow {
    Next,
    Return,
}

#[derive(Debug, Clone, Copy)]
enum Binding {
    Scalar(usize),
    Array { base: usize, len: usize },
}

struct Frame<'p> {
    syms: &'p UnitSymbols,
    vars: HashMap<&'p str, Binding>,
}

struct Machine<'p, 'o> {
    program: &'p Program,
    symtab: &'p SymbolTable,
    mem: Vec<Option<Value>>,
    /// Block → (base address, per-cell offsets).
    commons: BTreeMap<&'p str, (usize, Vec<usize>)>,
    common_end: usize,
    inputs: &'p InputVector,
    cursor: [usize; 4],
    trace: Vec<String>,
    fuel: u64,
    observer: &'o mut dyn Observer,
}

struct View<'a, 'p> {
    mem: &'a [Option<Value>],
    commons: &'a BTreeMap<&'p str, (usize, Vec<usize>)>,
    frame: &'a Frame<'p>,
}

impl StorageView for View<'_, '_> {
    fn scalar(&self, name: &str) -> Option<Value> {
        if let Some(v) = self.frame.syms.parameter(name) {
            return Some(v.clone());
        }
        match self.frame.vars.get(name)? {
            Binding::Scalar(a) => self.mem[*a].clone(),
            Binding::Array { .. } => None,
        }
    }

    fn cell(&self, block: &str, index: usize) -> Option<Value> {
        let (base, offs) = self.commons.get(block)?;
        self.mem.get(base + offs.get(index)?)?.clone()
    }
}

type Exec<T> = Result<T, Halt>;

impl<'p, 'o> Machine<'p, 'o> {
    fn new(
        program: &'p Program,
        symtab: &'p SymbolTable,
        inputs: &'p InputVector,
        fuel: u64,
        observer: &'o mut dyn Observer,
    ) -> Self {
        let mut commons = BTreeMap::new();
        let mut next = 0;
        for (name, layout) in &symtab.commons {
            let mut offs = Vec::new();
            let base = next;
            for c in &layout.cells {
                offs.push(next - base);
                next += c.len.unwrap_or(1);
            }
            commons.insert(name.as_str(), (base, offs));
        }
        let mut mem = vec![None; next];
        for (name, v) in &inputs.presets {
            if let InputName::Cell { block, index } = name {
                if let Some((base, offs)) = commons.get(block.as_str()) {
                    if let Some(o) = offs.get(*index) {
                        mem[base + o] = Some(v.clone());
                    }
                }
            }
        }
        Machine {
            program,
            symtab,
            mem,
            commons,
            common_end: next,
            inputs,
            cursor: [0; 4],
            trace: Vec::new(),
            fuel,
            observer,
        }
    }

    fn commons_snapshot(&self) -> BTreeMap<String, Vec<Option<Value>>> {
        let mut out = BTreeMap::new();
        let mut ends: Vec<(usize, &str)> = self.commons.iter().map(|(n, (b, _))| (*b, *n)).collect();
        ends.sort();
        for (i, (base, name)) in ends.iter().enumerate() {
            let end = ends.get(i + 1).map_or(self.common_end, |x| x.0);
            out.insert(name.to_string(), self.mem[*base..end].to_vec());
        }
        out
    }

    fn run_main(&mut self) -> Exec<()> {
        let main = self.program.main_unit();
        let syms = self.symtab.unit(&main.name);
        let mut frame = self.frame_for(syms, &[]);
        for (name, v) in &self.inputs.presets {
            if let InputName::Main(n) = name {
                if let Some(Binding::Scalar(a)) = frame.vars.get(n.as_str()) {
                    let ty = syms.var(n).map(|v| v.base).unwrap_or(v.base_type());
                    self.mem[*a] = v.convert_to(ty);
                }
            }
        }
        frame.vars.shrink_to_fit();
        if !self.observer.on_entry(&main.name, &View { mem: &self.mem, commons: &self.commons, frame: &frame }) {
            return Err(Halt::Abort);
        }
        self.exec_block(&frame, &main.body).map(|_| ())
    }

    /// Builds an activation: formals from `actuals`, COMMON members from the
    /// global area, fresh cells for everything else.
    fn frame_for(&mut self, syms: &'p UnitSymbols, actuals: &[Binding]) -> Frame<'p> {
        let mut vars = HashMap::new();
        for (name, info) in &syms.vars {
            let b = match &info.kind {
                VarKind::Parameter(_) => continue,
                VarKind::Formal(i) => match (actuals[*i], info.len) {
                    (Binding::Array { base, len }, Some(flen)) => Binding::Array {
                        base,
                        len: len.min(flen),
                    },
                    (b, _) => b,
                },
                VarKind::Common { block, index } => {
                    let (base, offs) = &self.commons[block.as_str()];
                    let a = base + offs[*index];
                    match info.len {
                        Some(len) => Binding::Array { base: a, len },
                        None => Binding::Scalar(a),
                    }
                }
                VarKind::Local | VarKind::Result => {
                    let a = self.mem.len();
                    let len = info.len.unwrap_or(1);
                    self.mem.resize(a + len, None);
                    match info.len {
                        Some(len) => Binding::Array { base: a, len },
                        None => Binding::Scalar(a),
                    }
                }
            };
            vars.insert(name.as_str(), b);
        }
        Frame { syms, vars }
    }

    fn tick(&mut self, at: ProvId) -> Exec<()> {
        if self.fuel == 0 {
            return Err(Halt::Fault(Fault {
                kind: FaultKind::Timeout,
                at,
            }));
        }
        self.fuel -= 1;
        Ok(())
    }

    fn exec_block(&mut self, frame: &Frame<'p>, block: &'p [Stmt]) -> Exec<Flow> {
        for s in block {
            if let Flow::Return = self.exec(frame, s)? {
                return Ok(Flow::Return);
            }
        }
        Ok(Flow::Next)
    }

    fn exec(&mut self, frame: &Frame<'p>, s: &'p Stmt) -> Exec<Flow> {
        self.tick(s.id)?;
        if !self
            .observer
            .before_stmt(&frame.syms.name, s, &View { mem: &self.mem, commons: &self.commons, frame })
        {
            return Err(Halt::Abort);
        }
        let at = s.id;
        match &s.kind {
            StmtKind::Assign { target, value } => {
                let addr = self.lvalue_addr(frame, target, at)?;
                let v = self.eval(frame, value, at)?;
                self.store(frame, target.name(), addr, v);
            }
            StmtKind::If {
                cond,
                then_body,
                else_body,
            } => {
                let arm = if self.eval_logical(frame, cond, at)? {
                    then_body
                } else {
                    else_body
                };
                return self.exec_block(frame, arm);
            }
            StmtKind::Do {
                var,
                lo,
                hi,
                step,
                body,
            } => {
                let lo = self.eval_int(frame, lo, at)?;
                let hi = self.eval_int(frame, hi, at)?;
                let step = match step {
                    Some(e) => self.eval_int(frame, e, at)?,
                    None => 1,
                };
                if step == 0 {
                    return Err(Fault {
                        kind: FaultKind::ZeroStep,
                        at,
                    }
                    .into());
                }
                let trips = ((hi as i128 - lo as i128 + step as i128) / step as i128).max(0);
                let index = self.scalar_addr(frame, var);
                for k in 0..trips {
                    self.tick(at)?;
                    self.mem[index] = Some(Value::Int(lo.wrapping_add((k as i64).wrapping_mul(step))));
                    if let Flow::Return = self.exec_block(frame, body)? {
                        return Ok(Flow::Return);
                    }
                }
                let last = lo as i128 + trips * step as i128;
                self.mem[index] = Some(Value::Int(last as i64));
            }
            StmtKind::DoWhile { cond, body } => loop {
                self.tick(at)?;
                if !self.eval_logical(frame, cond, at)? {
                    break;
                }
                if let Flow::Return = self.exec_block(frame, body)? {
                    return Ok(Flow::Return);
                }
            },
            StmtKind::Call { name, args } => {
                self.call(frame, name, args, at)?;
            }
            StmtKind::Return => return Ok(Flow::Return),
            StmtKind::Stop => return Err(Halt::Stopped),
            StmtKind::Continue => {}
            StmtKind::Print { args } => {
                let mut parts = Vec::with_capacity(args.len());
                for a in args {
                    parts.push(self.eval(frame, a, at)?.render());
                }
                self.trace.push(parts.join(" "));
            }
            StmtKind::Read { targets } => {
                for t in targets {
                    let addr = self.lvalue_addr(frame, t, at)?;
                    let ty = frame.syms.var(t.name()).map(|v| v.base).unwrap_or(BaseType::Integer);
                    let v = self.next_input(ty).ok_or(Fault {
                        kind: FaultKind::InputExhausted,
                        at,
                    })?;
                    self.store(frame, t.name(), addr, v);
                }
            }
        }
        Ok(Flow::Next)
    }

    fn next_input(&mut self, ty: BaseType) -> Option<Value> {
        let i = ty as usize;
        let pos = self.cursor[i];
        self.cursor[i] += 1;
        match ty {
            BaseType::Integer => self.inputs.ints.get(pos).map(|x| Value::Int(*x)),
            BaseType::Real => self.inputs.reals.get(pos).map(|x| Value::Real(*x)),
            BaseType::Logical => self.inputs.logicals.get(pos).map(|x| Value::Logical(*x)),
            BaseType::Character => self.inputs.chars.get(pos).map(|x| Value::Char(x.clone())),
        }
    }

    fn store(&mut self, frame: &Frame<'p>, name: &str, addr: usize, v: Value) {
        let ty = frame.syms.var(name).map(|i| i.base).unwrap_or(v.base_type());
        self.mem[addr] = v.convert_to(ty);
    }

    fn scalar_addr(&self, frame: &Frame<'p>, name: &str) -> usize {
        match frame.vars[name] {
            Binding::Scalar(a) => a,
            Binding::Array { base, .. } => base,
        }
    }

    fn element_addr(&mut self, frame: &Frame<'p>, name: &str, index: &'p Expr, at: ProvId) -> Exec<usize> {
        let i = self.eval_int(frame, index, at)?;
        match frame.vars[name] {
            Binding::Array { base, len } if i >= 1 && (i as u64) <= len as u64 => {
                Ok(base + (i - 1) as usize)
            }
            _ => Err(Fault {
                kind: FaultKind::OutOfBounds,
                at,
            }
            .into()),
        }
    }

    fn lvalue_addr(&mut self, frame: &Frame<'p>, l: &'p LValue, at: ProvId) -> Exec<usize> {
        match l {
            LValue::Var(n) => Ok(self.scalar_addr(frame, n)),
            LValue::Elem(n, i) => self.element_addr(frame, n, i, at),
        }
    }

    fn call(&mut self, frame: &Frame<'p>, name: &str, args: &'p [Expr], at: ProvId) -> Exec<Option<Value>> {
        let syms = self.symtab.unit(name);
        let unit = self.program.unit(name).expect("resolved callee");
        let mark = self.mem.len();
        let mut actuals = Vec::with_capacity(args.len());
        for (i, a) in args.iter().enumerate() {
            let formal_is_array = syms
                .var(&syms.formals[i])
                .is_some_and(|v| v.is_array());
            let b = match a {
                Expr::Var(n) if frame.syms.parameter(n).is_none() && frame.vars.contains_key(n.as_str()) => {
                    match frame.vars[n.as_str()] {
                        b @ Binding::Array { .. } if formal_is_array => b,
                        b => b,
                    }
                }
                Expr::Elem(n, idx) => Binding::Scalar(self.element_addr(frame, n, idx, at)?),
                e => {
                    let v = self.eval(frame, e, at)?;
                    let a = self.mem.len();
                    self.mem.push(Some(v));
                    Binding::Scalar(a)
                }
            };
            actuals.push(b);
        }
        let callee = self.frame_for(syms, &actuals);
        if !self.observer.on_entry(name, &View { mem: &self.mem, commons: &self.commons, frame: &callee }) {
            return Err(Halt::Abort);
        }
        self.exec_block(&callee, &unit.body)?;
        let result = match (unit.kind, callee.vars.get(name)) {
            (UnitKind::Function, Some(Binding::Scalar(a))) => match &self.mem[*a] {
                Some(v) => Some(v.clone()),
                None => {
                    return Err(Fault {
                        kind: FaultKind::Uninitialized,
                        at,
                    }
                    .into())
                }
            },
            _ => None,
        };
        self.mem.truncate(mark);
        Ok(result)
    }

    fn eval_int(&mut self, frame: &Frame<'p>, e: &'p Expr, at: ProvId) -> Exec<i64> {
        match self.eval(frame, e, at)? {
            Value::Int(i) => Ok(i),
            other => panic!("type checker admitted non-integer {other:?}"),
        }
    }

    fn eval_logical(&mut self, frame: &Frame<'p>, e: &'p Expr, at: ProvId) -> Exec<bool> {
        match self.eval(frame, e, at)? {
            Value::Logical(b) => Ok(b),
            other => panic!("type checker admitted non-logical {other:?}"),
        }
    }

    fn eval(&mut self, frame: &Frame<'p>, e: &'p Expr, at: ProvId) -> Exec<Value> {
        let uninit = Fault {
            kind: FaultKind::Uninitialized,
            at,
        };
        match e {
            Expr::Lit(v) => Ok(v.clone()),
            Expr::Var(n) => {
                if let Some(v) = frame.syms.parameter(n) {
                    return Ok(v.clone());
                }
                let a = self.scalar_addr(frame, n);
                self.mem[a].clone().ok_or(uninit.into())
            }
            Expr::Elem(n, i) => {
                let a = self.element_addr(frame, n, i, at)?;
                self.mem[a].clone().ok_or(uninit.into())
            }
            Expr::Call(name, args) => Ok(self
                .call(frame, name, args, at)?
                .expect("functions return a value")),
            Expr::Unary(op, x) => {
                let v = self.eval(frame, x, at)?;
                Ok(arith::unary(*op, v))
            }
            Expr::Binary(op, l, r) => {
                let a = self.eval(frame, l, at)?;
                let b = self.eval(frame, r, at)?;
                arith::binary(*op, a, b).ok_or(
                    Fault {
                        kind: FaultKind::DivByZero,
                        at,
                    }
                    .into(),
                )
            }
        }
    }
}

#[cfg(test)]
mod tests;
