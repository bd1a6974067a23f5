//! Abstract syntax of MiniF77.
//!
//! Every statement carries a [`ProvId`] assigned once at parse time. The
//! specializer never mints new ids, so a residual statement's id always
//! names the original statement it came from.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::PathBuf;

use serde::Serialize;

use crate::value::{BaseType, Value};

/// Stable statement identity, unique across a whole [`Program`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct ProvId(pub u32);

impl fmt::Display for ProvId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "s{}", self.0)
    }
}

/// Where a statement came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourcePos {
    pub file: PathBuf,
    pub line: u32,
    pub col: u32,
}

impl fmt::Display for SourcePos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file.display(), self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Program {
    pub units: Vec<Unit>,
    /// Name of the main program unit.
    pub entry: String,
    /// Unit name → source file it was read from.
    pub files: BTreeMap<String, PathBuf>,
    /// Statement positions; not part of structural equality.
    pub origins: BTreeMap<ProvId, SourcePos>,
}

impl Program {
    pub fn unit(&self, name: &str) -> Option<&Unit> {
        self.units.iter().find(|u| u.name == name)
    }

    pub fn main_unit(&self) -> &Unit {
        self.unit(&self.entry).expect("program has a main unit")
    }

    /// All statements in source order, depth first.
    pub fn statements(&self) -> Vec<&Stmt> {
        let mut out = Vec::new();
        for u in &self.units {
            walk_stmts(&u.body, &mut |s| out.push(s));
        }
        out
    }

    /// Structural equality ignoring statement ids and source positions.
    pub fn same_structure(&self, other: &Program) -> bool {
        self.entry == other.entry
            && self.units.len() == other.units.len()
            && self
                .units
                .iter()
                .zip(&other.units)
                .all(|(a, b)| a.same_structure(b))
    }

    /// Identifiers naming variables or parameters anywhere in the program.
    pub fn variable_identifiers(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for u in &self.units {
            u.collect_variable_identifiers(&mut out);
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum UnitKind {
    Main,
    Subroutine,
    Function,
}

impl UnitKind {
    pub fn keyword(self) -> &'static str {
        match self {
            UnitKind::Main => "PROGRAM",
            UnitKind::Subroutine => "SUBROUTINE",
            UnitKind::Function => "FUNCTION",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Unit {
    pub kind: UnitKind,
    pub name: String,
    pub formals: Vec<String>,
    pub decls: Vec<Decl>,
    pub body: Vec<Stmt>,
    /// Functions only.
    pub result_type: Option<VarType>,
    /// Comment lines preceding the unit header.
    pub comments: Vec<String>,
    /// Comment lines between the last statement and `END`.
    pub trailing_comments: Vec<String>,
}

impl Unit {
    pub fn same_structure(&self, other: &Unit) -> bool {
        self.kind == other.kind
            && self.name == other.name
            && self.formals == other.formals
            && self.decls == other.decls
            && self.result_type == other.result_type
            && self.comments == other.comments
            && self.trailing_comments == other.trailing_comments
            && same_block(&self.body, &other.body)
    }

    pub fn statement_count(&self) -> usize {
        let mut n = 0;
        walk_stmts(&self.body, &mut |_| n += 1);
        n
    }

    pub fn prov_ids(&self) -> Vec<ProvId> {
        let mut out = Vec::new();
        walk_stmts(&self.body, &mut |s| out.push(s.id));
        out
    }

    fn collect_variable_identifiers(&self, out: &mut BTreeSet<String>) {
        out.extend(self.formals.iter().cloned());
        for d in &self.decls {
            match &d.kind {
                DeclKind::Type { name, .. } | DeclKind::Parameter { name, .. } => {
                    out.insert(name.clone());
                }
                DeclKind::Common { members, .. } => out.extend(members.iter().cloned()),
            }
        }
        if self.kind == UnitKind::Function {
            out.insert(self.name.clone());
        }
        walk_stmts(&self.body, &mut |s| s.collect_variables(out));
    }
}

/// Array extent, either a literal or a previously declared PARAMETER.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Dim {
    Lit(u32),
    Param(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct VarType {
    pub base: BaseType,
    /// `CHARACTER*n`; printed back but otherwise ignored.
    pub char_len: Option<u32>,
    /// One-dimensional arrays only.
    pub dim: Option<Dim>,
}

impl VarType {
    pub fn scalar(base: BaseType) -> Self {
        VarType {
            base,
            char_len: None,
            dim: None,
        }
    }

    pub fn is_array(&self) -> bool {
        self.dim.is_some()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decl {
    pub kind: DeclKind,
    pub comments: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DeclKind {
    Type { name: String, ty: VarType },
    Parameter { name: String, value: Value },
    Common { block: String, members: Vec<String> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stmt {
    pub id: ProvId,
    pub comments: Vec<String>,
    pub kind: StmtKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StmtKind {
    Assign {
        target: LValue,
        value: Expr,
    },
    If {
        cond: Expr,
        then_body: Vec<Stmt>,
        else_body: Vec<Stmt>,
    },
    Do {
        var: String,
        lo: Expr,
        hi: Expr,
        step: Option<Expr>,
        body: Vec<Stmt>,
    },
    DoWhile {
        cond: Expr,
        body: Vec<Stmt>,
    },
    Call {
        name: String,
        args: Vec<Expr>,
    },
    Return,
    Stop,
    Continue,
    Print {
        args: Vec<Expr>,
    },
    Read {
        targets: Vec<LValue>,
    },
}

impl Stmt {
    pub fn children(&self) -> Vec<&Vec<Stmt>> {
        match &self.kind {
            StmtKind::If {
                then_body,
                else_body,
                ..
            } => vec![then_body, else_body],
            StmtKind::Do { body, .. } | StmtKind::DoWhile { body, .. } => vec![body],
            _ => Vec::new(),
        }
    }

    fn same_structure(&self, other: &Stmt) -> bool {
        if self.comments != other.comments {
            return false;
        }
        use StmtKind::*;
        match (&self.kind, &other.kind) {
            (
                If {
                    cond: c1,
                    then_body: t1,
                    else_body: e1,
                },
                If {
                    cond: c2,
                    then_body: t2,
                    else_body: e2,
                },
            ) => c1 == c2 && same_block(t1, t2) && same_block(e1, e2),
            (
                Do {
                    var: v1,
                    lo: l1,
                    hi: h1,
                    step: s1,
                    body: b1,
                },
                Do {
                    var: v2,
                    lo: l2,
                    hi: h2,
                    step: s2,
                    body: b2,
                },
            ) => v1 == v2 && l1 == l2 && h1 == h2 && s1 == s2 && same_block(b1, b2),
            (DoWhile { cond: c1, body: b1 }, DoWhile { cond: c2, body: b2 }) => {
                c1 == c2 && same_block(b1, b2)
            }
            (a, b) => a == b,
        }
    }

    pub fn collect_variables(&self, out: &mut BTreeSet<String>) {
        let mut add = |e: &Expr| e.collect_variables(out);
        match &self.kind {
            StmtKind::Assign { target, value } => {
                add(value);
                target.collect_variables(out);
            }
            StmtKind::If { cond, .. } | StmtKind::DoWhile { cond, .. } => add(cond),
            StmtKind::Do {
                var, lo, hi, step, ..
            } => {
                add(lo);
                add(hi);
                if let Some(s) = step {
                    add(s);
                }
                out.insert(var.clone());
            }
            StmtKind::Call { args, .. } | StmtKind::Print { args } => {
                for a in args {
                    add(a);
                }
            }
            StmtKind::Read { targets } => {
                for t in targets {
                    t.collect_variables(out);
                }
            }
            StmtKind::Return | StmtKind::Stop | StmtKind::Continue => {}
        }
    }
}

fn same_block(a: &[Stmt], b: &[Stmt]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.same_structure(y))
}

/// Pre-order walk over a statement block.
pub fn walk_stmts<'a>(block: &'a [Stmt], f: &mut dyn FnMut(&'a Stmt)) {
    for s in block {
        f(s);
        for child in s.children() {
            walk_stmts(child, f);
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LValue {
    Var(String),
    Elem(String, Box<Expr>),
}

impl LValue {
    pub fn name(&self) -> &str {
        match self {
            LValue::Var(n) | LValue::Elem(n, _) => n,
        }
    }

    fn collect_variables(&self, out: &mut BTreeSet<String>) {
        out.insert(self.name().to_string());
        if let LValue::Elem(_, idx) = self {
            idx.collect_variables(out);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnOp {
    Neg,
    Not,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Pow => "**",
            BinOp::Eq => ".EQ.",
            BinOp::Ne => ".NE.",
            BinOp::Lt => ".LT.",
            BinOp::Le => ".LE.",
            BinOp::Gt => ".GT.",
            BinOp::Ge => ".GE.",
            BinOp::And => ".AND.",
            BinOp::Or => ".OR.",
        }
    }

    /// Binding strength; higher binds tighter.
    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Or => 1,
            BinOp::And => 2,
            BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 4,
            BinOp::Add | BinOp::Sub => 5,
            BinOp::Mul | BinOp::Div => 6,
            BinOp::Pow => 8,
        }
    }

    pub fn is_relational(self) -> bool {
        matches!(
            self,
            BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge
        )
    }

    pub fn is_logical(self) -> bool {
        matches!(self, BinOp::And | BinOp::Or)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Lit(Value),
    Var(String),
    /// Array element `A(i)`.
    Elem(String, Box<Expr>),
    /// Function call `F(args)`.
    Call(String, Vec<Expr>),
    Unary(UnOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn binary(op: BinOp, l: Expr, r: Expr) -> Expr {
        Expr::Binary(op, Box::new(l), Box::new(r))
    }

    pub fn as_lit(&self) -> Option<&Value> {
        match self {
            Expr::Lit(v) => Some(v),
            _ => None,
        }
    }

    /// Names of variables and parameters read by this expression (array
    /// names included, function names excluded).
    pub fn variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_variables(&mut out);
        out
    }

    pub fn collect_variables(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Lit(_) => {}
            Expr::Var(n) => {
                out.insert(n.clone());
            }
            Expr::Elem(n, idx) => {
                out.insert(n.clone());
                idx.collect_variables(out);
            }
            Expr::Call(_, args) => {
                for a in args {
                    a.collect_variables(out);
                }
            }
            Expr::Unary(_, e) => e.collect_variables(out),
            Expr::Binary(_, l, r) => {
                l.collect_variables(out);
                r.collect_variables(out);
            }
        }
    }

    pub fn contains_call(&self) -> bool {
        match self {
            Expr::Call(..) => true,
            Expr::Lit(_) | Expr::Var(_) => false,
            Expr::Elem(_, i) => i.contains_call(),
            Expr::Unary(_, e) => e.contains_call(),
            Expr::Binary(_, l, r) => l.contains_call() || r.contains_call(),
        }
    }

    /// Visits every function call in evaluation order.
    pub fn visit_calls<'a>(&'a self, f: &mut dyn FnMut(&'a str, &'a [Expr])) {
        match self {
            Expr::Call(name, args) => {
                for a in args {
                    a.visit_calls(f);
                }
                f(name, args);
            }
            Expr::Lit(_) | Expr::Var(_) => {}
            Expr::Elem(_, i) => i.visit_calls(f),
            Expr::Unary(_, e) => e.visit_calls(f),
            Expr::Binary(_, l, r) => {
                l.visit_calls(f);
                r.visit_calls(f);
            }
        }
    }
}
