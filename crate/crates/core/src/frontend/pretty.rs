//! Canonical free-form printer. Output reparses to the same tree (up to
//! statement ids); parentheses are inserted only where precedence needs
//! them.

use std::path::PathBuf;

use super::ast::*;
use crate::value::Value;

const INDENT: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LineKind {
    Header,
    Decl,
    Comment,
    /// First line of a statement (the one carrying its id).
    Stmt,
    /// `ELSE`, `ENDIF`, `ENDDO` and the unit's `END`.
    Closer,
}

/// One printed line, with the statement it belongs to when there is one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Line {
    pub indent: usize,
    pub text: String,
    pub id: Option<ProvId>,
    pub kind: LineKind,
}

impl Line {
    pub fn render(&self) -> String {
        format!("{}{}", " ".repeat(self.indent), self.text)
    }
}

/// Prints every unit to its source file path.
pub fn pretty_print(p: &Program) -> Vec<(PathBuf, String)> {
    p.units
        .iter()
        .map(|u| {
            let path = p
                .files
                .get(&u.name)
                .cloned()
                .unwrap_or_else(|| PathBuf::from(format!("{}.f", u.name.to_ascii_lowercase())));
            (path, unit_text(u))
        })
        .collect()
}

pub fn unit_text(u: &Unit) -> String {
    let mut out = String::new();
    for l in unit_lines(u) {
        out.push_str(&l.render());
        out.push('\n');
    }
    out
}

pub fn unit_lines(u: &Unit) -> Vec<Line> {
    let mut lines = Vec::new();
    push_comments(&mut lines, &u.comments, 0);
    lines.push(Line {
        indent: 0,
        text: unit_header(u),
        id: None,
        kind: LineKind::Header,
    });
    for d in &u.decls {
        push_comments(&mut lines, &d.comments, INDENT);
        lines.push(Line {
            indent: INDENT,
            text: decl_text(&d.kind),
            id: None,
            kind: LineKind::Decl,
        });
    }
    block_lines(&mut lines, &u.body, INDENT);
    push_comments(&mut lines, &u.trailing_comments, INDENT);
    lines.push(Line {
        indent: 0,
        text: "END".into(),
        id: None,
        kind: LineKind::Closer,
    });
    lines
}

pub fn unit_header(u: &Unit) -> String {
    let formals = format!("({})", u.formals.join(", "));
    match u.kind {
        UnitKind::Main => format!("PROGRAM {}", u.name),
        UnitKind::Subroutine if u.formals.is_empty() => format!("SUBROUTINE {}", u.name),
        UnitKind::Subroutine => format!("SUBROUTINE {}{formals}", u.name),
        UnitKind::Function => {
            let ty = u
                .result_type
                .as_ref()
                .map(type_prefix)
                .unwrap_or_else(|| "INTEGER".into());
            format!("{ty} FUNCTION {}{formals}", u.name)
        }
    }
}

fn type_prefix(ty: &VarType) -> String {
    match ty.char_len {
        Some(n) => format!("{}*{n}", ty.base.keyword()),
        None => ty.base.keyword().to_string(),
    }
}

pub fn decl_text(d: &DeclKind) -> String {
    match d {
        DeclKind::Type { name, ty } => {
            let dim = match &ty.dim {
                None => String::new(),
                Some(Dim::Lit(n)) => format!("({n})"),
                Some(Dim::Param(p)) => format!("({p})"),
            };
            format!("{} {name}{dim}", type_prefix(ty))
        }
        DeclKind::Parameter { name, value } => format!("PARAMETER ({name} = {value})"),
        DeclKind::Common { block, members } => format!("COMMON /{block}/ {}", members.join(", ")),
    }
}

fn push_comments(lines: &mut Vec<Line>, comments: &[String], indent: usize) {
    for c in comments {
        lines.push(Line {
            indent,
            text: if c.is_empty() {
                "!".to_string()
            } else {
                format!("! {c}")
            },
            id: None,
            kind: LineKind::Comment,
        });
    }
}

pub fn block_lines(lines: &mut Vec<Line>, block: &[Stmt], indent: usize) {
    for s in block {
        stmt_lines(lines, s, indent);
    }
}

fn closer(lines: &mut Vec<Line>, indent: usize, text: &str) {
    lines.push(Line {
        indent,
        text: text.into(),
        id: None,
        kind: LineKind::Closer,
    });
}

fn stmt_lines(lines: &mut Vec<Line>, s: &Stmt, indent: usize) {
    push_comments(lines, &s.comments, indent);
    lines.push(Line {
        indent,
        text: stmt_header(s),
        id: Some(s.id),
        kind: LineKind::Stmt,
    });
    match &s.kind {
        StmtKind::If {
            then_body,
            else_body,
            ..
        } => {
            block_lines(lines, then_body, indent + INDENT);
            let mut else_body = else_body;
            loop {
                match else_body.as_slice() {
                    [] => break,
                    [nested] if nested.comments.is_empty() && is_if(nested) => {
                        let StmtKind::If {
                            cond,
                            then_body,
                            else_body: rest,
                        } = &nested.kind
                        else {
                            unreachable!()
                        };
                        lines.push(Line {
                            indent,
                            text: format!("ELSE IF ({}) THEN", expr_text(cond)),
                            id: Some(nested.id),
                            kind: LineKind::Stmt,
                        });
                        block_lines(lines, then_body, indent + INDENT);
                        else_body = rest;
                    }
                    body => {
                        closer(lines, indent, "ELSE");
                        block_lines(lines, body, indent + INDENT);
                        break;
                    }
                }
            }
            closer(lines, indent, "ENDIF");
        }
        StmtKind::Do { body, .. } | StmtKind::DoWhile { body, .. } => {
            block_lines(lines, body, indent + INDENT);
            closer(lines, indent, "ENDDO");
        }
        _ => {}
    }
}

fn is_if(s: &Stmt) -> bool {
    matches!(s.kind, StmtKind::If { .. })
}

/// The single-line rendering of a statement's own text (its header for
/// compound statements).
pub fn stmt_header(s: &Stmt) -> String {
    match &s.kind {
        StmtKind::Assign { target, value } => {
            format!("{} = {}", lvalue_text(target), expr_text(value))
        }
        StmtKind::If { cond, .. } => format!("IF ({}) THEN", expr_text(cond)),
        StmtKind::Do {
            var, lo, hi, step, ..
        } => match step {
            Some(st) => format!(
                "DO {var} = {}, {}, {}",
                expr_text(lo),
                expr_text(hi),
                expr_text(st)
            ),
            None => format!("DO {var} = {}, {}", expr_text(lo), expr_text(hi)),
        },
        StmtKind::DoWhile { cond, .. } => format!("DO WHILE ({})", expr_text(cond)),
        StmtKind::Call { name, args } if args.is_empty() => format!("CALL {name}"),
        StmtKind::Call { name, args } => format!("CALL {name}({})", args_text(args)),
        StmtKind::Return => "RETURN".into(),
        StmtKind::Stop => "STOP".into(),
        StmtKind::Continue => "CONTINUE".into(),
        StmtKind::Print { args } if args.is_empty() => "PRINT *".into(),
        StmtKind::Print { args } => format!("PRINT *, {}", args_text(args)),
        StmtKind::Read { targets } => format!(
            "READ *, {}",
            targets.iter().map(lvalue_text).collect::<Vec<_>>().join(", ")
        ),
    }
}

pub fn lvalue_text(l: &LValue) -> String {
    match l {
        LValue::Var(n) => n.clone(),
        LValue::Elem(n, i) => format!("{n}({})", expr_text(i)),
    }
}

fn args_text(args: &[Expr]) -> String {
    args.iter().map(expr_text).collect::<Vec<_>>().join(", ")
}

const NEG_PREC: u8 = 5;
const NOT_PREC: u8 = 3;
const ATOM_PREC: u8 = 10;

fn expr_prec(e: &Expr) -> u8 {
    match e {
        Expr::Lit(v) if v.is_negative() => NEG_PREC,
        Expr::Lit(_) | Expr::Var(_) | Expr::Elem(..) | Expr::Call(..) => ATOM_PREC,
        Expr::Unary(UnOp::Neg, _) => NEG_PREC,
        Expr::Unary(UnOp::Not, _) => NOT_PREC,
        Expr::Binary(op, ..) => op.precedence(),
    }
}

pub fn expr_text(e: &Expr) -> String {
    let mut s = String::new();
    write_expr(&mut s, e, 0);
    s
}

fn write_expr(out: &mut String, e: &Expr, min_prec: u8) {
    let paren = expr_prec(e) < min_prec;
    if paren {
        out.push('(');
    }
    match e {
        Expr::Lit(v) => out.push_str(&literal_text(v)),
        Expr::Var(n) => out.push_str(n),
        Expr::Elem(n, i) => {
            out.push_str(n);
            out.push('(');
            write_expr(out, i, 0);
            out.push(')');
        }
        Expr::Call(n, args) => {
            out.push_str(n);
            out.push('(');
            out.push_str(&args_text(args));
            out.push(')');
        }
        Expr::Unary(UnOp::Neg, inner) => {
            out.push('-');
            write_expr(out, inner, 6);
        }
        Expr::Unary(UnOp::Not, inner) => {
            out.push_str(".NOT. ");
            write_expr(out, inner, NOT_PREC);
        }
        Expr::Binary(op, l, r) => {
            let p = op.precedence();
            let (lp, rp) = match op {
                BinOp::Pow => (p + 1, p),
                _ if op.is_relational() => (p + 1, p + 1),
                _ => (p, p + 1),
            };
            write_expr(out, l, lp);
            match op {
                BinOp::Pow => out.push_str("**"),
                BinOp::Mul | BinOp::Div => out.push_str(op.symbol()),
                _ => {
                    out.push(' ');
                    out.push_str(op.symbol());
                    out.push(' ');
                }
            }
            write_expr(out, r, rp);
        }
    }
    if paren {
        out.push(')');
    }
}

fn literal_text(v: &Value) -> String {
    v.to_string()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parser::{parse_expr, parse_program};

    fn roundtrip_expr(src: &str) {
        let e = parse_expr(src, &["A"]).unwrap();
        let printed = expr_text(&e);
        let again = parse_expr(&printed, &["A"]).unwrap();
        assert_eq!(e, again, "{src} printed as {printed}");
    }

    #[test]
    fn expressions_roundtrip() {
        for src in [
            "-A(1)**2 + B*C",
            "(X + Y)*Z",
            "X - (Y - Z)",
            "X/(Y*Z)",
            "(2**3)**2",
            "2**3**2",
            ".NOT. (L .AND. M) .OR. N",
            "X .EQ. -3",
            "X*(-3)",
            "-3 + X",
            "(X .LT. Y) .EQV. 1",
        ]
        .into_iter()
        .filter(|s| !s.contains("EQV"))
        {
            roundtrip_expr(src);
        }
        assert_eq!(expr_text(&parse_expr("X * (-3)", &[]).unwrap()), "X*(-3)");
        assert_eq!(expr_text(&parse_expr("((X))+1", &[]).unwrap()), "X + 1");
    }

    #[test]
    fn nested_if_inside_do_indents_by_four() {
        let src = "PROGRAM P\nINTEGER I\nDO I = 1, 3\nIF (I .GT. 1) THEN\nPRINT *, I\nENDIF\nENDDO\nEND\n";
        let p = parse_program(&[("p.f", src)]).unwrap();
        let text = unit_text(&p.units[0]);
        assert_eq!(
            text,
            "PROGRAM P\n  INTEGER I\n  DO I = 1, 3\n    IF (I .GT. 1) THEN\n      PRINT *, I\n    ENDIF\n  ENDDO\nEND\n"
        );
    }

    #[test]
    fn comments_print_on_their_own_lines() {
        let src = "C header\nPROGRAM P\nINTEGER X\n! first\n! second\nX = 1 ! tail\nPRINT *, X\n! closing\nEND\n";
        let p = parse_program(&[("p.f", src)]).unwrap();
        let golden = "! header\nPROGRAM P\n  INTEGER X\n  ! first\n  ! second\n  X = 1\n  ! tail\n  PRINT *, X\n  ! closing\nEND\n";
        assert_eq!(unit_text(&p.units[0]), golden);
        let again = parse_program(&[("p.f", golden)]).unwrap();
        assert!(again.same_structure(&p));
    }

    #[test]
    fn else_if_prints_flat() {
        let src = "PROGRAM P\nINTEGER K\nREAD *, K\nIF (K .EQ. 1) THEN\nK = 2\nELSE IF (K .EQ. 2) THEN\nK = 3\nELSE\nK = 4\nENDIF\nEND\n";
        let p = parse_program(&[("p.f", src)]).unwrap();
        let text = unit_text(&p.units[0]);
        assert!(text.contains("  ELSE IF (K .EQ. 2) THEN\n"));
        assert_eq!(text.matches("ENDIF").count(), 1);
    }
}
