//! Forward walk: simplification judgments and variant creation.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::cleanup;
use super::{SpecKey, SpecializeConfig};
use crate::analysis::eval::var_value;
use crate::analysis::fold::{fold_binary, fold_unary, Folded};
use crate::analysis::{
    apply_call_effect, assign, bind_call, eval_abstract, AbstractEnv, AbstractValue,
    AliasPartition, Location, ModSummary, Slot,
};
use crate::constraints::ResolvedConstraints;
use crate::error::SpecializeError;
use crate::frontend::ast::*;
use crate::frontend::symbols::{SymbolTable, UnitSymbols};
use crate::report::RemovalReason;
use crate::value::{BaseType, Value};

use super::ReplacementPolicy;

/// Callee names in forward-walk output are variant ids in disguise.
const PLACEHOLDER: &str = "\u{0}V";

pub(super) fn placeholder(id: usize) -> String {
    format!("{PLACEHOLDER}{id}")
}

pub(super) fn placeholder_id(name: &str) -> Option<usize> {
    name.strip_prefix(PLACEHOLDER)?.parse().ok()
}

#[derive(Debug, Clone)]
pub(super) struct Variant {
    pub unit: String,
    pub body: Vec<Stmt>,
    pub entry: AbstractEnv,
    pub removed: BTreeMap<ProvId, RemovalReason>,
    pub snapshots: BTreeMap<ProvId, AbstractEnv>,
    pub facts: Vec<(ProvId, Location, Value)>,
    pub notes: Vec<(ProvId, String)>,
}

pub(super) struct Engine<'p> {
    pub p: &'p Program,
    pub symtab: &'p SymbolTable,
    pub modsum: &'p ModSummary,
    pub rc: &'p ResolvedConstraints,
    pub policy: ReplacementPolicy,
    cap: usize,
    /// Indexed by variant id; `None` while the variant is being built.
    pub variants: Vec<Option<Variant>>,
    pub keys: Vec<SpecKey>,
    /// Whether some call site asked for this variant.
    pub requested: Vec<bool>,
    pub cache: HashMap<SpecKey, usize>,
    pub cache_hits: usize,
    /// Unit → its context-free variant.
    pub base: BTreeMap<String, usize>,
    active: HashMap<String, usize>,
    per_unit: HashMap<String, usize>,
    blocks: HashMap<String, BTreeSet<String>>,
}

/// Per-variant state of the walk.
struct Ctx<'p> {
    syms: &'p UnitSymbols,
    aliases: AliasPartition,
    at: ProvId,
    removed: BTreeMap<ProvId, RemovalReason>,
    snapshots: BTreeMap<ProvId, AbstractEnv>,
    facts: Vec<(ProvId, Location, Value)>,
    notes: Vec<(ProvId, String)>,
}

/// A simplified expression.
struct SExpr {
    expr: Expr,
    val: AbstractValue,
    /// Evaluation has no side effects.
    pure: bool,
    /// Evaluation cannot fault (uninitialized reads aside).
    safe: bool,
}

impl SExpr {
    fn known(&self) -> Option<&Value> {
        self.val.known()
    }
}

type R<T> = Result<T, SpecializeError>;

fn trip_count(lo: i64, hi: i64, step: i64) -> i128 {
    ((hi as i128 - lo as i128 + step as i128) / step as i128).max(0)
}

impl<'p> Engine<'p> {
    pub fn new(
        p: &'p Program,
        symtab: &'p SymbolTable,
        modsum: &'p ModSummary,
        rc: &'p ResolvedConstraints,
        config: &SpecializeConfig,
    ) -> Self {
        Engine {
            p,
            symtab,
            modsum,
            rc,
            policy: config.policy.clone(),
            cap: config.variant_cap,
            variants: Vec::new(),
            keys: Vec::new(),
            requested: Vec::new(),
            cache: HashMap::new(),
            cache_hits: 0,
            base: BTreeMap::new(),
            active: HashMap::new(),
            per_unit: HashMap::new(),
            blocks: HashMap::new(),
        }
    }

    pub fn variant(&self, id: usize) -> &Variant {
        self.variants[id].as_ref().expect("variant finished")
    }

    /// Main first, then the context-free variant of every reached unit
    /// until no new unit turns up.
    pub fn run(&mut self) -> R<()> {
        let main = SpecKey {
            unit: self.p.entry.clone(),
            entries: BTreeMap::new(),
            aliases: BTreeSet::new(),
        };
        self.specialize(main)?;
        self.requested[0] = true;
        self.base.insert(self.p.entry.clone(), 0);
        let mut done = BTreeSet::new();
        loop {
            let reached: BTreeSet<String> = self.keys.iter().map(|k| k.unit.clone()).collect();
            let todo: Vec<String> = reached.difference(&done).cloned().collect();
            if todo.is_empty() {
                return Ok(());
            }
            for u in todo {
                if u != self.p.entry {
                    let key = self.base_key(&u);
                    let id = self.resolve(key, false)?;
                    self.base.insert(u.clone(), id);
                }
                done.insert(u);
            }
        }
    }

    fn unit_blocks(&mut self, unit: &str) -> BTreeSet<String> {
        if let Some(b) = self.blocks.get(unit) {
            return b.clone();
        }
        let b = self.symtab.reachable_blocks(self.p, unit);
        self.blocks.insert(unit.to_string(), b.clone());
        b
    }

    fn assumption_entries(&self, unit: &str) -> BTreeMap<Slot, Value> {
        let syms = self.symtab.unit(unit);
        self.rc
            .assumptions
            .get(unit)
            .into_iter()
            .flatten()
            .filter_map(|(l, v)| Slot::of_location(syms, l).map(|s| (s, v.clone())))
            .collect()
    }

    /// The context-free key of a unit. Functions get one variant only,
    /// analyzed as if every formal and reachable cell could alias.
    pub fn base_key(&mut self, unit: &str) -> SpecKey {
        let mut aliases = BTreeSet::new();
        let u = self.p.unit(unit).expect("known unit");
        if u.kind == UnitKind::Function {
            let mut all: BTreeSet<Slot> = (0..u.formals.len()).map(Slot::Formal).collect();
            for b in self.unit_blocks(unit) {
                for index in 0..self.symtab.commons[&b].cells.len() {
                    all.insert(Slot::Cell {
                        block: b.clone(),
                        index,
                    });
                }
            }
            if all.len() > 1 {
                aliases.insert(all);
            }
        }
        SpecKey {
            unit: unit.to_string(),
            entries: self.assumption_entries(unit),
            aliases,
        }
    }

    /// Finds or builds the variant for `key`. A call reaching a unit that
    /// is already being specialized under another key falls back to the
    /// key without Known entries, which bounds recursion.
    fn resolve(&mut self, key: SpecKey, from_call: bool) -> R<usize> {
        if let Some(&id) = self.cache.get(&key) {
            if from_call {
                self.cache_hits += 1;
                self.requested[id] = true;
            }
            return Ok(id);
        }
        if self.active.get(&key.unit).copied().unwrap_or(0) > 0 {
            let stripped = SpecKey {
                entries: self.assumption_entries(&key.unit),
                ..key.clone()
            };
            if stripped != key {
                return self.resolve(stripped, from_call);
            }
        }
        let id = self.specialize(key)?;
        if from_call {
            self.requested[id] = true;
        }
        Ok(id)
    }

    fn specialize(&mut self, key: SpecKey) -> R<usize> {
        let unit: &'p Unit = self.p.unit(&key.unit).expect("known unit");
        let syms: &'p UnitSymbols = self.symtab.unit(&key.unit);
        let count = self.per_unit.entry(key.unit.clone()).or_default();
        *count += 1;
        if *count > self.cap {
            return Err(SpecializeError::RecursionDepthExceeded {
                unit: key.unit.clone(),
                cap: self.cap,
            });
        }
        let id = self.variants.len();
        self.variants.push(None);
        self.keys.push(key.clone());
        self.requested.push(false);
        self.cache.insert(key.clone(), id);
        *self.active.entry(key.unit.clone()).or_default() += 1;

        let mut env = if unit.kind == UnitKind::Main {
            self.rc.initial_env(syms)
        } else {
            let mut env = AbstractEnv::new();
            for (slot, v) in &key.entries {
                env.set(slot.location(syms, self.symtab), AbstractValue::Known(v.clone()));
            }
            env
        };
        let aliases = AliasPartition::from_groups(key.aliases.iter().map(|class| {
            class
                .iter()
                .map(|s| s.location(syms, self.symtab))
                .collect::<BTreeSet<_>>()
        }));
        let entry = env.clone();
        let mut cx = Ctx {
            syms,
            aliases,
            at: ProvId(0),
            removed: BTreeMap::new(),
            snapshots: BTreeMap::new(),
            facts: Vec::new(),
            notes: Vec::new(),
        };
        let mut body = self.block(&mut cx, &unit.body, &mut env)?;
        let keep = self.policy.keep_list().cloned().unwrap_or_default();
        cleanup::cleanup(&mut body, syms, self.symtab, &keep, &mut cx.removed);

        *self.active.get_mut(&key.unit).expect("active") -= 1;
        self.variants[id] = Some(Variant {
            unit: key.unit.clone(),
            body,
            entry,
            removed: cx.removed,
            snapshots: cx.snapshots,
            facts: cx.facts,
            notes: cx.notes,
        });
        Ok(id)
    }

    // ---- statements ----------------------------------------------------

    fn block(&mut self, cx: &mut Ctx<'p>, block: &'p [Stmt], env: &mut AbstractEnv) -> R<Vec<Stmt>> {
        let mut out = Vec::new();
        for s in block {
            self.stmt(cx, s, env, &mut out)?;
        }
        Ok(out)
    }

    fn stmt(
        &mut self,
        cx: &mut Ctx<'p>,
        s: &'p Stmt,
        env: &mut AbstractEnv,
        out: &mut Vec<Stmt>,
    ) -> R<()> {
        cx.snapshots.insert(s.id, env.clone());
        cx.at = s.id;
        let rebuild = |kind| Stmt {
            id: s.id,
            comments: s.comments.clone(),
            kind,
        };
        match &s.kind {
            StmtKind::Assign { target, value } => {
                let target_r = match target {
                    LValue::Var(n) => LValue::Var(n.clone()),
                    LValue::Elem(n, i) => LValue::Elem(n.clone(), Box::new(self.expr(cx, i, env)?.expr)),
                };
                let v = self.expr(cx, value, env)?;
                let info = cx.syms.var(target.name()).expect("declared target");
                let loc = cx.syms.location(target.name()).expect("assignable");
                let val = match target {
                    LValue::Var(_) => v.known().and_then(|c| c.convert_to(info.base)).into(),
                    LValue::Elem(..) => AbstractValue::Unknown,
                };
                assign(env, &cx.aliases, &loc, val);
                out.push(rebuild(StmtKind::Assign {
                    target: target_r,
                    value: v.expr,
                }));
            }
            StmtKind::If {
                cond,
                then_body,
                else_body,
            } => {
                let c = self.expr(cx, cond, env)?;
                if let Some(Value::Logical(b)) = c.known() {
                    let (live, dead) = if *b {
                        (then_body, else_body)
                    } else {
                        (else_body, then_body)
                    };
                    cx.removed.insert(s.id, RemovalReason::BranchFolded);
                    mark(&mut cx.removed, dead, RemovalReason::DeadBranch);
                    for st in live {
                        self.stmt(cx, st, env, out)?;
                    }
                    return Ok(());
                }
                let mut then_env = env.clone();
                let mut else_env = env.clone();
                self.condition_facts(cx, cond, env, &mut then_env, &mut else_env);
                let t = self.block(cx, then_body, &mut then_env)?;
                let e = self.block(cx, else_body, &mut else_env)?;
                *env = then_env.join(&else_env);
                out.push(rebuild(StmtKind::If {
                    cond: c.expr,
                    then_body: t,
                    else_body: e,
                }));
            }
            StmtKind::Do {
                var,
                lo,
                hi,
                step,
                body,
            } => {
                let lo_s = self.expr(cx, lo, env)?;
                let hi_s = self.expr(cx, hi, env)?;
                let step_s = match step {
                    Some(e) => Some(self.expr(cx, e, env)?),
                    None => None,
                };
                let index = cx.syms.location(var).expect("DO index");
                let step_v = match &step_s {
                    Some(st) => st.known().cloned(),
                    None => Some(Value::Int(1)),
                };
                if let (Some(Value::Int(l)), Some(Value::Int(h)), Some(Value::Int(st))) =
                    (lo_s.known(), hi_s.known(), step_v)
                {
                    if st != 0 && trip_count(*l, *h, st) == 0 {
                        // the loop still sets its index; cleanup drops the
                        // husk once nothing reads it
                        mark(&mut cx.removed, body, RemovalReason::ZeroTrip);
                        assign(env, &cx.aliases, &index, AbstractValue::Known(Value::Int(*l)));
                        out.push(rebuild(StmtKind::Do {
                            var: var.clone(),
                            lo: lo_s.expr,
                            hi: hi_s.expr,
                            step: step_s.map(|s| s.expr),
                            body: Vec::new(),
                        }));
                        return Ok(());
                    }
                }
                let mut writes = self.modsum.block_writes(self.symtab, cx.syms, body);
                writes.insert(index);
                for l in cx.aliases.expand(&writes) {
                    env.kill(&l);
                }
                let mut body_env = env.clone();
                let b = self.block(cx, body, &mut body_env)?;
                *env = env.join(&body_env);
                out.push(rebuild(StmtKind::Do {
                    var: var.clone(),
                    lo: lo_s.expr,
                    hi: hi_s.expr,
                    step: step_s.map(|s| s.expr),
                    body: b,
                }));
            }
            StmtKind::DoWhile { cond, body } => {
                let mut writes = self.modsum.block_writes(self.symtab, cx.syms, body);
                writes.extend(self.modsum.expr_writes(self.symtab, cx.syms, cond));
                let mut killed = env.clone();
                for l in cx.aliases.expand(&writes) {
                    killed.kill(&l);
                }
                let f = AbstractValue::Known(Value::Logical(false));
                if eval_abstract(cond, &killed, cx.syms) == f
                    && eval_abstract(cond, env, cx.syms) == f
                {
                    cx.removed.insert(s.id, RemovalReason::NeverEntered);
                    mark(&mut cx.removed, body, RemovalReason::NeverEntered);
                    return Ok(());
                }
                let c = self.expr(cx, cond, &mut killed)?;
                let mut body_env = killed.clone();
                let b = self.block(cx, body, &mut body_env)?;
                *env = killed;
                out.push(rebuild(StmtKind::DoWhile {
                    cond: c.expr,
                    body: b,
                }));
            }
            StmtKind::Call { name, args } => {
                let (callee, args_r) = self.call(cx, name, args, env, false)?;
                out.push(rebuild(StmtKind::Call {
                    name: callee,
                    args: args_r,
                }));
            }
            StmtKind::Print { args } => {
                let mut r = Vec::with_capacity(args.len());
                for a in args {
                    r.push(self.expr(cx, a, env)?.expr);
                }
                out.push(rebuild(StmtKind::Print { args: r }));
            }
            StmtKind::Read { targets } => {
                let mut r = Vec::with_capacity(targets.len());
                for t in targets {
                    let t_r = match t {
                        LValue::Var(n) => LValue::Var(n.clone()),
                        LValue::Elem(n, i) => {
                            LValue::Elem(n.clone(), Box::new(self.expr(cx, i, env)?.expr))
                        }
                    };
                    let loc = cx.syms.location(t.name()).expect("READ target");
                    assign(env, &cx.aliases, &loc, AbstractValue::Unknown);
                    r.push(t_r);
                }
                out.push(rebuild(StmtKind::Read { targets: r }));
            }
            StmtKind::Return | StmtKind::Stop | StmtKind::Continue => out.push(s.clone()),
        }
        Ok(())
    }

    /// Branch-derived knowledge for an IF whose condition stayed Unknown:
    /// `v .EQ. c` binds `v` in the THEN arm and records `v ≠ c` in the ELSE
    /// arm; `v .NE. c` records `v ≠ c` in the THEN arm.
    fn condition_facts(
        &self,
        cx: &Ctx<'p>,
        cond: &Expr,
        env: &AbstractEnv,
        then_env: &mut AbstractEnv,
        else_env: &mut AbstractEnv,
    ) {
        let Expr::Binary(op @ (BinOp::Eq | BinOp::Ne), l, r) = cond else {
            return;
        };
        let Some((loc, c, base)) = self.var_vs_known(cx, l, r, env) else {
            return;
        };
        match op {
            BinOp::Eq => {
                if base != BaseType::Real {
                    assign(then_env, &cx.aliases, &loc, AbstractValue::Known(c.clone()));
                }
                else_env.add_fact(loc, c);
            }
            _ => then_env.add_fact(loc, c),
        }
    }

    /// Matches `v op e` or `e op v` where `v` is a scalar variable and `e`
    /// has a Known value of `v`'s type.
    fn var_vs_known(
        &self,
        cx: &Ctx<'p>,
        l: &Expr,
        r: &Expr,
        env: &AbstractEnv,
    ) -> Option<(Location, Value, BaseType)> {
        let (name, other) = match (l, r) {
            (Expr::Var(n), o) if cx.syms.location(n).is_some() => (n, o),
            (o, Expr::Var(n)) if cx.syms.location(n).is_some() => (n, o),
            _ => return None,
        };
        let loc = cx.syms.location(name)?;
        let base = cx.syms.var(name)?.base;
        if loc.is_array() {
            return None;
        }
        match eval_abstract(other, env, cx.syms) {
            AbstractValue::Known(c) if c.base_type() == base => Some((loc, c, base)),
            _ => None,
        }
    }

    /// Handles a call statement or function reference: simplifies the
    /// actuals, picks the variant, substitutes read-only scalar actuals and
    /// applies the call's effect. Returns the placeholder callee name.
    fn call(
        &mut self,
        cx: &mut Ctx<'p>,
        name: &str,
        args: &'p [Expr],
        env: &mut AbstractEnv,
        is_function: bool,
    ) -> R<(String, Vec<Expr>)> {
        let callee: &'p UnitSymbols = self.symtab.unit(name);
        let mut args_r = Vec::with_capacity(args.len());
        let mut temps: Vec<Option<AbstractValue>> = Vec::with_capacity(args.len());
        for a in args {
            match a {
                Expr::Var(n) if cx.syms.location(n).is_some() => {
                    args_r.push(a.clone());
                    temps.push(None);
                }
                Expr::Elem(n, i) => {
                    let i_s = self.expr(cx, i, env)?;
                    args_r.push(Expr::Elem(n.clone(), Box::new(i_s.expr)));
                    temps.push(Some(AbstractValue::Unknown));
                }
                _ => {
                    // an expression actual must stay an expression: a bare
                    // variable would be passed by reference
                    let se = self.expr_shaped(cx, a, env, true)?;
                    args_r.push(se.expr);
                    temps.push(Some(se.val));
                }
            }
        }
        // by-reference actuals are seen with their value after all actuals
        // were evaluated
        let values: Vec<AbstractValue> = args
            .iter()
            .zip(temps)
            .map(|(a, t)| match (a, t) {
                (_, Some(v)) => v,
                (Expr::Var(n), None) => var_value(n, env, cx.syms),
                _ => AbstractValue::Unknown,
            })
            .collect();
        let key = if is_function {
            self.base_key(name)
        } else {
            let blocks = self.unit_blocks(name);
            let b = bind_call(cx.syms, env, &cx.aliases, args, &values, callee, &blocks);
            let mut entry = b.entry;
            if let Some(assumed) = self.rc.assumptions.get(name) {
                for (l, v) in assumed {
                    entry.set(l.clone(), AbstractValue::Known(v.clone()));
                }
            }
            SpecKey {
                unit: name.to_string(),
                entries: entry
                    .bindings()
                    .filter_map(|(l, v)| Slot::of_location(callee, l).map(|s| (s, v.clone())))
                    .collect(),
                aliases: b
                    .aliases
                    .classes()
                    .map(|c| c.iter().filter_map(|l| Slot::of_location(callee, l)).collect::<BTreeSet<_>>())
                    .filter(|c| c.len() > 1)
                    .collect(),
            }
        };
        let id = self.resolve(key, true)?;
        let writes = self.modsum.call_writes(self.symtab, cx.syms, name, args);
        let written = cx.aliases.expand(&writes);
        for (i, a) in args.iter().enumerate() {
            let Expr::Var(n) = a else { continue };
            let Some(loc) = cx.syms.location(n) else { continue };
            let formal_scalar = callee
                .formals
                .get(i)
                .and_then(|f| callee.var(f))
                .is_some_and(|v| !v.is_array());
            if let AbstractValue::Known(c) = &values[i] {
                if formal_scalar
                    && !loc.is_array()
                    && !written.contains(&loc)
                    && self.policy.permits(n, false)
                {
                    args_r[i] = Expr::Lit(c.clone());
                }
            }
        }
        *env = apply_call_effect(env, &writes, &cx.aliases);
        Ok((placeholder(id), args_r))
    }

    // ---- expressions ---------------------------------------------------

    fn permits_all(&self, cx: &Ctx<'p>, e: &Expr) -> bool {
        if !self.policy.replaces_anything() {
            return false;
        }
        e.variables()
            .iter()
            .all(|n| self.policy.permits(n, cx.syms.parameter(n).is_some()))
    }

    fn expr(&mut self, cx: &mut Ctx<'p>, e: &'p Expr, env: &mut AbstractEnv) -> R<SExpr> {
        self.expr_shaped(cx, e, env, false)
    }

    /// With `keep_node`, the root is never replaced by one of its operands.
    fn expr_shaped(
        &mut self,
        cx: &mut Ctx<'p>,
        e: &'p Expr,
        env: &mut AbstractEnv,
        keep_node: bool,
    ) -> R<SExpr> {
        let mut r = match e {
            Expr::Lit(v) => SExpr {
                expr: e.clone(),
                val: AbstractValue::Known(v.clone()),
                pure: true,
                safe: true,
            },
            Expr::Var(n) => SExpr {
                expr: e.clone(),
                val: var_value(n, env, cx.syms),
                pure: true,
                safe: true,
            },
            Expr::Elem(n, i) => {
                let i_s = self.expr(cx, i, env)?;
                SExpr {
                    expr: Expr::Elem(n.clone(), Box::new(i_s.expr)),
                    val: AbstractValue::Unknown,
                    pure: i_s.pure,
                    safe: false,
                }
            }
            Expr::Call(name, args) => {
                let (callee, args_r) = self.call(cx, name, args, env, true)?;
                SExpr {
                    expr: Expr::Call(callee, args_r),
                    val: AbstractValue::Unknown,
                    pure: false,
                    safe: false,
                }
            }
            Expr::Unary(op, x) => {
                let x_s = self.expr(cx, x, env)?;
                let val = match x_s.known() {
                    Some(v) => folded(fold_unary(*op, v)),
                    None => AbstractValue::Unknown,
                };
                SExpr {
                    expr: Expr::Unary(*op, Box::new(x_s.expr)),
                    val,
                    pure: x_s.pure,
                    safe: x_s.safe,
                }
            }
            Expr::Binary(op, l, r) => {
                let l_s = self.expr(cx, l, env)?;
                let r_s = self.expr(cx, r, env)?;
                self.binary(cx, *op, l, r, l_s, r_s, env, keep_node)
            }
        };
        if let AbstractValue::Known(v) = &r.val {
            if !matches!(r.expr, Expr::Lit(_)) && self.permits_all(cx, e) {
                r.expr = Expr::Lit(v.clone());
            }
        }
        Ok(r)
    }

    #[allow(clippy::too_many_arguments)]
    fn binary(
        &mut self,
        cx: &mut Ctx<'p>,
        op: BinOp,
        l: &Expr,
        r: &Expr,
        l_s: SExpr,
        r_s: SExpr,
        env: &AbstractEnv,
        keep_node: bool,
    ) -> SExpr {
        let lt = cx.syms.type_of(self.symtab, l);
        let rt = cx.syms.type_of(self.symtab, r);
        let ints = lt == BaseType::Integer && rt == BaseType::Integer;
        let pure = l_s.pure && r_s.pure;
        let op_safe = match op {
            BinOp::Div if ints => matches!(r_s.known(), Some(Value::Int(d)) if *d != 0),
            BinOp::Pow if ints => {
                matches!(r_s.known(), Some(Value::Int(x)) if *x >= 0)
                    || matches!(l_s.known(), Some(Value::Int(b)) if *b != 0)
            }
            _ => true,
        };
        let safe = l_s.safe && r_s.safe && op_safe;

        if let (Some(a), Some(b)) = (l_s.known(), r_s.known()) {
            let f = fold_binary(op, a, b);
            if f == Folded::Fault && op == BinOp::Div {
                cx.notes.push((cx.at, "integer division by a constant zero will fault at run time".into()));
            }
            let val = folded(f);
            let known = val.is_known();
            return SExpr {
                expr: Expr::binary(op, l_s.expr, r_s.expr),
                val,
                pure: pure || known,
                safe: safe || known,
            };
        }

        // a disequality fact decides `v .EQ. c` / `v .NE. c`
        if matches!(op, BinOp::Eq | BinOp::Ne) {
            if let Some((loc, c, _)) = self.var_vs_known(cx, l, r, env) {
                if env.has_fact(&loc, &c) && l_s.safe && r_s.safe && pure {
                    cx.facts.push((cx.at, loc, c));
                    return SExpr {
                        expr: Expr::binary(op, l_s.expr, r_s.expr),
                        val: AbstractValue::Known(Value::Logical(op == BinOp::Ne)),
                        pure: true,
                        safe: true,
                    };
                }
            }
        }

        let lit = |v: Value| SExpr {
            val: AbstractValue::Known(v.clone()),
            expr: Expr::Lit(v),
            pure: true,
            safe: true,
        };
        let is = |s: &SExpr, v: &Value| s.known() == Some(v);
        let effect_free = |s: &SExpr| s.pure && s.safe;
        let zero = Value::Int(0);
        match op {
            BinOp::Mul if ints && is(&l_s, &zero) && effect_free(&r_s) => return lit(zero),
            BinOp::Mul if ints && is(&r_s, &zero) && effect_free(&l_s) => return lit(zero),
            BinOp::And if is(&l_s, &Value::Logical(false)) && effect_free(&r_s) => {
                return lit(Value::Logical(false))
            }
            BinOp::And if is(&r_s, &Value::Logical(false)) && effect_free(&l_s) => {
                return lit(Value::Logical(false))
            }
            BinOp::Or if is(&l_s, &Value::Logical(true)) && effect_free(&r_s) => {
                return lit(Value::Logical(true))
            }
            BinOp::Or if is(&r_s, &Value::Logical(true)) && effect_free(&l_s) => {
                return lit(Value::Logical(true))
            }
            _ => {}
        }

        // neutral elements: drop the Known operand
        if keep_node {
            return SExpr {
                expr: Expr::binary(op, l_s.expr, r_s.expr),
                val: AbstractValue::Unknown,
                pure,
                safe,
            };
        }
        let one = |s: &SExpr| matches!(s.known(), Some(Value::Int(1))) || matches!(s.known(), Some(Value::Real(x)) if *x == 1.0);
        let result_ty = if lt == BaseType::Real || rt == BaseType::Real {
            BaseType::Real
        } else {
            lt
        };
        match op {
            BinOp::Add if ints && is(&l_s, &zero) => return r_s,
            BinOp::Add | BinOp::Sub if ints && is(&r_s, &zero) => return l_s,
            BinOp::Mul if one(&l_s) && rt == result_ty => return r_s,
            BinOp::Mul if one(&r_s) && lt == result_ty => return l_s,
            BinOp::And if is(&l_s, &Value::Logical(true)) => return r_s,
            BinOp::And if is(&r_s, &Value::Logical(true)) => return l_s,
            BinOp::Or if is(&l_s, &Value::Logical(false)) => return r_s,
            BinOp::Or if is(&r_s, &Value::Logical(false)) => return l_s,
            _ => {}
        }
        SExpr {
            expr: Expr::binary(op, l_s.expr, r_s.expr),
            val: AbstractValue::Unknown,
            pure,
            safe,
        }
    }
}

fn folded(f: Folded) -> AbstractValue {
    crate::analysis::eval::folded(f)
}

fn mark(removed: &mut BTreeMap<ProvId, RemovalReason>, block: &[Stmt], reason: RemovalReason) {
    walk_stmts(block, &mut |s| {
        removed.entry(s.id).or_insert(reason);
    });
}
