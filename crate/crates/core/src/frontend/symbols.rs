//! Symbol resolution: per-unit variable tables, COMMON layouts, PARAMETER
//! values, and the static type check that every later phase relies on.

use std::collections::{BTreeMap, BTreeSet};

use super::ast::*;
use crate::analysis::Location;
use crate::error::{FrontendError, SemanticError};
use crate::value::{BaseType, Value};

#[derive(Debug, Clone, PartialEq)]
pub enum VarKind {
    Local,
    Formal(usize),
    Common { block: String, index: usize },
    Parameter(Value),
    /// A function's result variable (the function's own name).
    Result,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VarInfo {
    pub name: String,
    pub base: BaseType,
    /// Resolved array length; `None` for scalars.
    pub len: Option<usize>,
    pub kind: VarKind,
}

impl VarInfo {
    pub fn is_array(&self) -> bool {
        self.len.is_some()
    }

    pub fn is_parameter(&self) -> bool {
        matches!(self.kind, VarKind::Parameter(_))
    }
}

/// Type of one COMMON cell: a scalar or a whole array.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CellType {
    pub base: BaseType,
    pub len: Option<usize>,
}

impl std::fmt::Display for CellType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.len {
            Some(n) => write!(f, "{}({n})", self.base),
            None => write!(f, "{}", self.base),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CommonLayout {
    pub cells: Vec<CellType>,
    /// Units declaring the block, in program order.
    pub units: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnitSymbols {
    pub name: String,
    pub kind: UnitKind,
    pub formals: Vec<String>,
    pub vars: BTreeMap<String, VarInfo>,
    /// Blocks declared by this unit.
    pub commons: Vec<String>,
}

impl UnitSymbols {
    pub fn var(&self, name: &str) -> Option<&VarInfo> {
        self.vars.get(name)
    }

    /// Storage location of a variable (`None` for PARAMETERs and unknown
    /// names). Arrays map to their whole-array location.
    pub fn location(&self, name: &str) -> Option<Location> {
        let info = self.vars.get(name)?;
        let base = match &info.kind {
            VarKind::Parameter(_) => return None,
            VarKind::Common { block, index } => Location::CommonCell {
                block: block.clone(),
                index: *index,
            },
            VarKind::Local | VarKind::Formal(_) | VarKind::Result => Location::Local {
                unit: self.name.clone(),
                var: name.to_string(),
            },
        };
        Some(if info.is_array() {
            Location::ArrayWhole(Box::new(base))
        } else {
            base
        })
    }

    pub fn formal_position(&self, name: &str) -> Option<usize> {
        match self.vars.get(name)?.kind {
            VarKind::Formal(i) => Some(i),
            _ => None,
        }
    }

    pub fn parameter(&self, name: &str) -> Option<&Value> {
        match &self.vars.get(name)?.kind {
            VarKind::Parameter(v) => Some(v),
            _ => None,
        }
    }

    /// Declared type of an expression; assumes the unit type-checked.
    pub fn type_of(&self, symtab: &SymbolTable, e: &Expr) -> BaseType {
        Checker {
            symtab,
            unit: self,
            program: None,
        }
        .expr_type(e)
        .unwrap_or(BaseType::Integer)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymbolTable {
    pub entry: String,
    pub units: BTreeMap<String, UnitSymbols>,
    pub commons: BTreeMap<String, CommonLayout>,
    /// Function name → result type.
    pub functions: BTreeMap<String, BaseType>,
}

impl SymbolTable {
    pub fn unit(&self, name: &str) -> &UnitSymbols {
        &self.units[name]
    }

    /// Blocks whose cells a unit can reach, directly or through callees.
    pub fn reachable_blocks(&self, p: &Program, unit: &str) -> BTreeSet<String> {
        let mut seen = BTreeSet::new();
        let mut stack = vec![unit.to_string()];
        let mut blocks = BTreeSet::new();
        while let Some(u) = stack.pop() {
            if !seen.insert(u.clone()) {
                continue;
            }
            if let Some(syms) = self.units.get(&u) {
                blocks.extend(syms.commons.iter().cloned());
            }
            if let Some(unit) = p.unit(&u) {
                stack.extend(callees(unit));
            }
        }
        blocks
    }
}

/// Names of every procedure a unit calls, in first-occurrence order.
pub fn callees(u: &Unit) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    let mut add = |n: &str| {
        if !out.iter().any(|x| x == n) {
            out.push(n.to_string());
        }
    };
    walk_stmts(&u.body, &mut |s| {
        let mut exprs: Vec<&Expr> = Vec::new();
        match &s.kind {
            StmtKind::Assign { target, value } => {
                if let LValue::Elem(_, i) = target {
                    exprs.push(i);
                }
                exprs.push(value);
            }
            StmtKind::If { cond, .. } | StmtKind::DoWhile { cond, .. } => exprs.push(cond),
            StmtKind::Do { lo, hi, step, .. } => {
                exprs.push(lo);
                exprs.push(hi);
                exprs.extend(step.iter());
            }
            StmtKind::Call { args, .. } | StmtKind::Print { args } => exprs.extend(args.iter()),
            StmtKind::Read { targets } => {
                for t in targets {
                    if let LValue::Elem(_, i) = t {
                        exprs.push(i);
                    }
                }
            }
            _ => {}
        }
        for e in exprs {
            e.visit_calls(&mut |n, _| add(n));
        }
        if let StmtKind::Call { name, .. } = &s.kind {
            add(name);
        }
    });
    out
}

/// Resolves and type-checks a parsed program.
pub fn resolve_symbols(p: &Program) -> Result<SymbolTable, FrontendError> {
    let mut units = BTreeMap::new();
    let mut functions = BTreeMap::new();
    for u in &p.units {
        if u.kind == UnitKind::Function {
            let ty = u.result_type.as_ref().map(|t| t.base).unwrap_or(BaseType::Integer);
            functions.insert(u.name.clone(), ty);
        }
    }
    for u in &p.units {
        let syms = unit_symbols(u).map_err(|k| FrontendError::semantic(k, None))?;
        units.insert(u.name.clone(), syms);
    }

    let mut commons: BTreeMap<String, CommonLayout> = BTreeMap::new();
    for u in &p.units {
        for d in &u.decls {
            let DeclKind::Common { block, members } = &d.kind else {
                continue;
            };
            let syms = &units[&u.name];
            let cells: Vec<CellType> = members
                .iter()
                .map(|m| {
                    let v = &syms.vars[m];
                    CellType {
                        base: v.base,
                        len: v.len,
                    }
                })
                .collect();
            match commons.get_mut(block) {
                None => {
                    commons.insert(
                        block.clone(),
                        CommonLayout {
                            cells,
                            units: vec![u.name.clone()],
                        },
                    );
                }
                Some(layout) => {
                    if layout.cells != cells {
                        let show = |c: &[CellType]| {
                            c.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
                        };
                        return Err(FrontendError::semantic(
                            SemanticError::CommonLayoutMismatch {
                                block: block.clone(),
                                unit: u.name.clone(),
                                first_unit: layout.units[0].clone(),
                                expected: show(&layout.cells),
                                found: show(&cells),
                            },
                            None,
                        ));
                    }
                    layout.units.push(u.name.clone());
                }
            }
        }
    }

    let symtab = SymbolTable {
        entry: p.entry.clone(),
        units,
        commons,
        functions,
    };
    for u in &p.units {
        let checker = Checker {
            symtab: &symtab,
            unit: &symtab.units[&u.name],
            program: Some(p),
        };
        checker.block(&u.body, &mut Vec::new())?;
    }
    Ok(symtab)
}

fn decl_err(unit: &Unit, message: impl Into<String>) -> SemanticError {
    SemanticError::Declaration {
        unit: unit.name.clone(),
        message: message.into(),
    }
}

fn unit_symbols(u: &Unit) -> Result<UnitSymbols, SemanticError> {
    let mut vars: BTreeMap<String, VarInfo> = BTreeMap::new();
    let mut params: BTreeMap<String, Value> = BTreeMap::new();
    let mut typed: BTreeMap<String, VarType> = BTreeMap::new();
    let mut common_of: BTreeMap<String, (String, usize)> = BTreeMap::new();
    let mut commons = Vec::new();

    for (i, f) in u.formals.iter().enumerate() {
        if u.formals[..i].contains(f) {
            return Err(decl_err(u, format!("formal {f} appears twice")));
        }
    }

    for d in &u.decls {
        match &d.kind {
            DeclKind::Type { name, ty } => {
                if typed.contains_key(name) {
                    return Err(decl_err(u, format!("{name} is declared twice")));
                }
                if params.contains_key(name) {
                    return Err(SemanticError::ParameterRedefinition {
                        unit: u.name.clone(),
                        name: name.clone(),
                    });
                }
                if u.kind == UnitKind::Function && *name == u.name {
                    return Err(decl_err(u, format!("{name} is the function result and is typed by the header")));
                }
                if let Some(Dim::Param(p)) = &ty.dim {
                    match params.get(p) {
                        Some(Value::Int(n)) if *n > 0 => {}
                        Some(_) => {
                            return Err(decl_err(
                                u,
                                format!("dimension {p} of {name} must be a positive INTEGER"),
                            ))
                        }
                        None => {
                            return Err(decl_err(
                                u,
                                format!("dimension {p} of {name} is not a previously declared PARAMETER"),
                            ))
                        }
                    }
                }
                typed.insert(name.clone(), ty.clone());
            }
            DeclKind::Parameter { name, value } => {
                if params.contains_key(name) || u.formals.contains(name) {
                    return Err(SemanticError::ParameterRedefinition {
                        unit: u.name.clone(),
                        name: name.clone(),
                    });
                }
                let value = match typed.get(name) {
                    Some(ty) if ty.is_array() => {
                        return Err(decl_err(u, format!("PARAMETER {name} cannot be an array")))
                    }
                    Some(ty) => match (value, ty.base) {
                        (v, b) if v.base_type() == b => v.clone(),
                        (Value::Int(i), BaseType::Real) => Value::Real(*i as f64),
                        _ => {
                            return Err(SemanticError::Type {
                                unit: u.name.clone(),
                                message: format!(
                                    "PARAMETER {name} is declared {} but given {value}",
                                    ty.base
                                ),
                            })
                        }
                    },
                    None => value.clone(),
                };
                params.insert(name.clone(), value);
            }
            DeclKind::Common { block, members } => {
                if commons.contains(block) {
                    return Err(decl_err(u, format!("COMMON /{block}/ is declared twice")));
                }
                commons.push(block.clone());
                for (i, m) in members.iter().enumerate() {
                    if let Some((other, _)) = common_of.get(m) {
                        return Err(decl_err(
                            u,
                            format!("{m} appears in COMMON /{other}/ and /{block}/"),
                        ));
                    }
                    if u.formals.contains(m) {
                        return Err(decl_err(u, format!("formal {m} cannot be in COMMON")));
                    }
                    common_of.insert(m.clone(), (block.clone(), i));
                }
            }
        }
    }

    for (name, ty) in &typed {
        let len = match &ty.dim {
            None => None,
            Some(Dim::Lit(n)) => Some(*n as usize),
            Some(Dim::Param(p)) => match &params[p] {
                Value::Int(n) => Some(*n as usize),
                _ => unreachable!("checked above"),
            },
        };
        let kind = if let Some(pos) = u.formals.iter().position(|f| f == name) {
            VarKind::Formal(pos)
        } else if let Some((block, index)) = common_of.get(name) {
            VarKind::Common {
                block: block.clone(),
                index: *index,
            }
        } else if let Some(v) = params.get(name) {
            VarKind::Parameter(v.clone())
        } else {
            VarKind::Local
        };
        if matches!(kind, VarKind::Parameter(_)) && common_of.contains_key(name) {
            return Err(decl_err(u, format!("PARAMETER {name} cannot be in COMMON")));
        }
        vars.insert(
            name.clone(),
            VarInfo {
                name: name.clone(),
                base: ty.base,
                len,
                kind,
            },
        );
    }
    for (name, v) in &params {
        vars.entry(name.clone()).or_insert_with(|| VarInfo {
            name: name.clone(),
            base: v.base_type(),
            len: None,
            kind: VarKind::Parameter(v.clone()),
        });
    }
    for f in &u.formals {
        if !vars.contains_key(f) {
            return Err(SemanticError::UndeclaredVariable {
                unit: u.name.clone(),
                name: f.clone(),
            });
        }
    }
    for m in common_of.keys() {
        if !vars.contains_key(m) {
            return Err(SemanticError::UndeclaredVariable {
                unit: u.name.clone(),
                name: m.clone(),
            });
        }
    }
    if u.kind == UnitKind::Function {
        let base = u.result_type.as_ref().map(|t| t.base).unwrap_or(BaseType::Integer);
        vars.insert(
            u.name.clone(),
            VarInfo {
                name: u.name.clone(),
                base,
                len: None,
                kind: VarKind::Result,
            },
        );
    }
    Ok(UnitSymbols {
        name: u.name.clone(),
        kind: u.kind,
        formals: u.formals.clone(),
        vars,
        commons,
    })
}

struct Checker<'a> {
    symtab: &'a SymbolTable,
    unit: &'a UnitSymbols,
    program: Option<&'a Program>,
}

type CResult<T> = Result<T, SemanticError>;

impl Checker<'_> {
    fn type_err(&self, message: impl Into<String>) -> SemanticError {
        SemanticError::Type {
            unit: self.unit.name.clone(),
            message: message.into(),
        }
    }

    fn var(&self, name: &str) -> CResult<&VarInfo> {
        self.unit
            .vars
            .get(name)
            .ok_or_else(|| SemanticError::UndeclaredVariable {
                unit: self.unit.name.clone(),
                name: name.to_string(),
            })
    }

    fn at(&self, s: &Stmt, kind: SemanticError) -> FrontendError {
        let pos = self.program.and_then(|p| p.origins.get(&s.id).cloned());
        FrontendError::semantic(kind, pos)
    }

    fn block(&self, block: &[Stmt], active: &mut Vec<String>) -> Result<(), FrontendError> {
        for s in block {
            self.stmt(s, active)?;
        }
        Ok(())
    }

    fn stmt(&self, s: &Stmt, active: &mut Vec<String>) -> Result<(), FrontendError> {
        self.stmt_own(s, active).map_err(|k| self.at(s, k))?;
        match &s.kind {
            StmtKind::If {
                then_body,
                else_body,
                ..
            } => {
                self.block(then_body, active)?;
                self.block(else_body, active)?;
            }
            StmtKind::Do { var, body, .. } => {
                active.push(var.clone());
                self.block(body, active)?;
                active.pop();
            }
            StmtKind::DoWhile { body, .. } => self.block(body, active)?,
            _ => {}
        }
        Ok(())
    }

    fn writable(&self, l: &LValue, active: &[String]) -> CResult<BaseType> {
        let v = self.var(l.name())?;
        if v.is_parameter() {
            return Err(SemanticError::ParameterRedefinition {
                unit: self.unit.name.clone(),
                name: v.name.clone(),
            });
        }
        if active.iter().any(|a| a == l.name()) {
            return Err(self.type_err(format!("active DO index {} is modified", l.name())));
        }
        match l {
            LValue::Var(n) if v.is_array() => {
                Err(self.type_err(format!("cannot assign to whole array {n}")))
            }
            LValue::Var(_) => Ok(v.base),
            LValue::Elem(n, i) => {
                if !v.is_array() {
                    return Err(self.type_err(format!("{n} is not an array")));
                }
                self.expect_type(i, BaseType::Integer, "array subscript")?;
                Ok(v.base)
            }
        }
    }

    fn expect_type(&self, e: &Expr, ty: BaseType, what: &str) -> CResult<()> {
        let found = self.expr_type(e)?;
        if found != ty {
            return Err(self.type_err(format!("{what} must be {ty}, found {found}")));
        }
        Ok(())
    }

    fn stmt_own(&self, s: &Stmt, active: &[String]) -> CResult<()> {
        match &s.kind {
            StmtKind::Assign { target, value } => {
                let tt = self.writable(target, active)?;
                let vt = self.expr_type(value)?;
                let ok = tt == vt || (tt.is_numeric() && vt.is_numeric());
                if !ok {
                    return Err(self.type_err(format!(
                        "cannot assign {vt} to {} of type {tt}",
                        target.name()
                    )));
                }
                Ok(())
            }
            StmtKind::If { cond, .. } => self.expect_type(cond, BaseType::Logical, "IF condition"),
            StmtKind::DoWhile { cond, .. } => {
                self.expect_type(cond, BaseType::Logical, "DO WHILE condition")
            }
            StmtKind::Do {
                var, lo, hi, step, ..
            } => {
                let t = self.writable(&LValue::Var(var.clone()), active)?;
                if t != BaseType::Integer {
                    return Err(self.type_err(format!("DO index {var} must be INTEGER")));
                }
                self.expect_type(lo, BaseType::Integer, "DO bound")?;
                self.expect_type(hi, BaseType::Integer, "DO bound")?;
                if let Some(st) = step {
                    self.expect_type(st, BaseType::Integer, "DO step")?;
                }
                Ok(())
            }
            StmtKind::Call { name, args } => {
                let callee = self.callee(name)?;
                if callee.kind != UnitKind::Subroutine {
                    return Err(self.type_err(format!("{name} is not a SUBROUTINE")));
                }
                self.check_args(callee, args, active)
            }
            StmtKind::Print { args } => {
                for a in args {
                    self.expr_type(a)?;
                }
                Ok(())
            }
            StmtKind::Read { targets } => {
                for t in targets {
                    self.writable(t, active)?;
                }
                Ok(())
            }
            StmtKind::Return | StmtKind::Stop | StmtKind::Continue => Ok(()),
        }
    }

    fn callee(&self, name: &str) -> CResult<&UnitSymbols> {
        self.symtab
            .units
            .get(name)
            .ok_or_else(|| SemanticError::UnresolvedCallee {
                unit: self.unit.name.clone(),
                callee: name.to_string(),
            })
    }

    fn check_args(&self, callee: &UnitSymbols, args: &[Expr], active: &[String]) -> CResult<()> {
        if args.len() != callee.formals.len() {
            return Err(SemanticError::ArityMismatch {
                unit: self.unit.name.clone(),
                callee: callee.name.clone(),
                expected: callee.formals.len(),
                found: args.len(),
            });
        }
        for (i, (a, f)) in args.iter().zip(&callee.formals).enumerate() {
            let formal = &callee.vars[f];
            let mismatch = |message: String| SemanticError::ArgumentTypeMismatch {
                unit: self.unit.name.clone(),
                callee: callee.name.clone(),
                position: i + 1,
                message,
            };
            if formal.is_array() {
                match a {
                    Expr::Var(n) => {
                        let v = self.var(n)?;
                        if !v.is_array() || v.base != formal.base {
                            return Err(mismatch(format!(
                                "expected a {} array, found {n}",
                                formal.base
                            )));
                        }
                    }
                    _ => return Err(mismatch(format!("expected a {} array", formal.base))),
                }
            } else {
                if let Expr::Var(n) = a {
                    if active.iter().any(|x| x == n) {
                        // passing an active DO index by reference is allowed
                        // only when the callee never writes it; checked
                        // conservatively by forbidding it outright
                        return Err(mismatch(format!("active DO index {n} passed by reference")));
                    }
                }
                let t = self.expr_type(a)?;
                if t != formal.base {
                    return Err(mismatch(format!("expected {}, found {t}", formal.base)));
                }
            }
        }
        Ok(())
    }

    fn expr_type(&self, e: &Expr) -> CResult<BaseType> {
        match e {
            Expr::Lit(v) => Ok(v.base_type()),
            Expr::Var(n) => {
                let v = self.var(n)?;
                if v.is_array() {
                    return Err(self.type_err(format!("array {n} used without a subscript")));
                }
                Ok(v.base)
            }
            Expr::Elem(n, i) => {
                let v = self.var(n)?;
                if !v.is_array() {
                    return Err(self.type_err(format!("{n} is not an array")));
                }
                self.expect_type(i, BaseType::Integer, "array subscript")?;
                Ok(v.base)
            }
            Expr::Call(name, args) => {
                let callee = self.callee(name)?;
                if callee.kind != UnitKind::Function {
                    return Err(self.type_err(format!("{name} is not a FUNCTION")));
                }
                self.check_args(callee, args, &[])?;
                Ok(self.symtab.functions[name])
            }
            Expr::Unary(UnOp::Neg, inner) => {
                let t = self.expr_type(inner)?;
                if !t.is_numeric() {
                    return Err(self.type_err(format!("cannot negate {t}")));
                }
                Ok(t)
            }
            Expr::Unary(UnOp::Not, inner) => {
                self.expect_type(inner, BaseType::Logical, ".NOT. operand")?;
                Ok(BaseType::Logical)
            }
            Expr::Binary(op, l, r) => {
                let lt = self.expr_type(l)?;
                let rt = self.expr_type(r)?;
                if op.is_logical() {
                    if lt != BaseType::Logical || rt != BaseType::Logical {
                        return Err(self.type_err(format!("{} needs LOGICAL operands", op.symbol())));
                    }
                    Ok(BaseType::Logical)
                } else if op.is_relational() {
                    let ok = (lt.is_numeric() && rt.is_numeric())
                        || (lt == BaseType::Character && rt == BaseType::Character);
                    if !ok {
                        return Err(self.type_err(format!(
                            "cannot compare {lt} with {rt} using {}",
                            op.symbol()
                        )));
                    }
                    Ok(BaseType::Logical)
                } else {
                    if !lt.is_numeric() || !rt.is_numeric() {
                        return Err(self.type_err(format!(
                            "{} needs numeric operands, found {lt} and {rt}",
                            op.symbol()
                        )));
                    }
                    Ok(if lt == BaseType::Real || rt == BaseType::Real {
                        BaseType::Real
                    } else {
                        BaseType::Integer
                    })
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parser::parse_program;

    fn resolve(files: &[(&str, &str)]) -> Result<SymbolTable, FrontendError> {
        resolve_symbols(&parse_program(files).unwrap())
    }

    const MAIN: &str = "PROGRAM M\nINTEGER X, Y\nCOMMON /B/ X, Y\nX = 1\nY = 2\nCALL S\nEND\n";

    #[test]
    fn common_cells_are_shared_by_position() {
        let st = resolve(&[
            ("m.f", MAIN),
            ("s.f", "SUBROUTINE S\nINTEGER P, Q\nCOMMON /B/ P, Q\nP = Q\nEND\n"),
        ])
        .unwrap();
        let cell = |u: &str, v: &str| st.unit(u).location(v).unwrap();
        assert_eq!(
            cell("M", "X"),
            Location::CommonCell {
                block: "B".into(),
                index: 0
            }
        );
        assert_eq!(cell("M", "X"), cell("S", "P"));
        assert_eq!(cell("M", "Y"), cell("S", "Q"));
        assert_eq!(st.commons["B"].units, vec!["M".to_string(), "S".to_string()]);
    }

    #[test]
    fn common_length_mismatch_rejected() {
        let err = resolve(&[
            ("m.f", MAIN),
            ("s.f", "SUBROUTINE S\nINTEGER P, Q, R\nCOMMON /B/ P, Q, R\nEND\n"),
        ])
        .unwrap_err();
        assert!(matches!(
            err,
            FrontendError::Semantic {
                kind: SemanticError::CommonLayoutMismatch { .. },
                ..
            }
        ));
    }

    #[test]
    fn common_cell_type_mismatch_rejected() {
        let err = resolve(&[
            ("m.f", MAIN),
            ("s.f", "SUBROUTINE S\nINTEGER P\nREAL Q\nCOMMON /B/ P, Q\nEND\n"),
        ])
        .unwrap_err();
        assert!(err.to_string().contains("INTEGER, INTEGER"));
    }

    #[test]
    fn parameter_binds_constant() {
        let st = resolve(&[(
            "m.f",
            "PROGRAM M\nREAL R\nPARAMETER (PI = 1.61803)\nR = 2.0*PI\nEND\n",
        )])
        .unwrap();
        let pi = st.unit("M").var("PI").unwrap();
        assert_eq!(pi.kind, VarKind::Parameter(Value::Real(1.61803)));
        assert_eq!(st.unit("M").location("PI"), None);
    }

    #[test]
    fn parameter_assignment_and_redefinition_rejected() {
        let err = resolve(&[("m.f", "PROGRAM M\nPARAMETER (N = 3)\nN = 4\nEND\n")]).unwrap_err();
        assert!(matches!(
            err,
            FrontendError::Semantic {
                kind: SemanticError::ParameterRedefinition { .. },
                pos: Some(_)
            }
        ));
        let err = resolve(&[("m.f", "PROGRAM M\nPARAMETER (N = 3, N = 4)\nEND\n")]).unwrap_err();
        assert!(matches!(
            err,
            FrontendError::Semantic {
                kind: SemanticError::ParameterRedefinition { .. },
                ..
            }
        ));
    }

    #[test]
    fn undeclared_variable_rejected_with_position() {
        let err = resolve(&[("m.f", "PROGRAM M\nINTEGER X\nX = Y + 1\nEND\n")]).unwrap_err();
        assert_eq!(err.to_string(), "m.f:3:1: M: undeclared variable Y");
    }

    #[test]
    fn argument_checks() {
        let s = "SUBROUTINE S(A)\nINTEGER A\nA = 1\nEND\n";
        let err = resolve(&[("m.f", "PROGRAM M\nINTEGER X\nCALL S(X, X)\nEND\n"), ("s.f", s)])
            .unwrap_err();
        assert!(err.to_string().contains("expects 1 arguments"));
        let err = resolve(&[("m.f", "PROGRAM M\nREAL X\nCALL S(X)\nEND\n"), ("s.f", s)])
            .unwrap_err();
        assert!(matches!(
            err,
            FrontendError::Semantic {
                kind: SemanticError::ArgumentTypeMismatch { .. },
                ..
            }
        ));
        let err = resolve(&[("m.f", "PROGRAM M\nCALL T\nEND\n")]).unwrap_err();
        assert!(matches!(
            err,
            FrontendError::Semantic {
                kind: SemanticError::UnresolvedCallee { .. },
                ..
            }
        ));
    }

    #[test]
    fn type_rules() {
        let bad = [
            "PROGRAM M\nLOGICAL L\nL = 1\nEND\n",
            "PROGRAM M\nINTEGER I\nIF (I) THEN\nENDIF\nEND\n",
            "PROGRAM M\nINTEGER I\nDO I = 1, 3\nI = 2\nENDDO\nEND\n",
            "PROGRAM M\nREAL R\nDO R = 1, 3\nENDDO\nEND\n",
            "PROGRAM M\nINTEGER A(3)\nA = 1\nEND\n",
        ];
        for src in bad {
            assert!(resolve(&[("m.f", src)]).is_err(), "{src}");
        }
        let good = "PROGRAM M\nINTEGER I\nREAL R\nI = 2\nR = I / 2 + 1.5\nI = R\nEND\n";
        resolve(&[("m.f", good)]).unwrap();
    }

    #[test]
    fn function_result_variable() {
        let st = resolve(&[
            ("m.f", "PROGRAM M\nINTEGER X\nX = F(2)\nEND\n"),
            ("f.f", "INTEGER FUNCTION F(N)\nINTEGER N\nF = N + 1\nEND\n"),
        ])
        .unwrap();
        assert_eq!(st.unit("F").var("F").unwrap().kind, VarKind::Result);
        assert_eq!(st.functions["F"], BaseType::Integer);
    }
}
