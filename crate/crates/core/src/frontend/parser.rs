//! Recursive-descent parser. One file holds exactly one program unit;
//! statement ids are handed out in source order across the file list.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use super::ast::*;
use super::lexer::{tokenize, Token, TokenKind};
use crate::error::FrontendError;
use crate::value::{BaseType, Value};

/// Parses a multi-file program.
pub fn parse_program<P: AsRef<Path>, S: AsRef<str>>(
    files: &[(P, S)],
) -> Result<Program, FrontendError> {
    let mut next_id = 0u32;
    let mut units: Vec<Unit> = Vec::new();
    let mut unit_files: BTreeMap<String, PathBuf> = BTreeMap::new();
    let mut origins = BTreeMap::new();
    for (path, text) in files {
        let path = path.as_ref().to_path_buf();
        let unit = parse_unit_file(&path, text.as_ref(), &mut next_id, &mut origins)?;
        if let Some(first) = unit_files.get(&unit.name) {
            return Err(FrontendError::DuplicateUnit {
                name: unit.name.clone(),
                file: path,
                first: first.clone(),
            });
        }
        unit_files.insert(unit.name.clone(), path);
        units.push(unit);
    }
    let mains: Vec<&Unit> = units.iter().filter(|u| u.kind == UnitKind::Main).collect();
    let entry = match mains.as_slice() {
        [] => return Err(FrontendError::MissingMain),
        [m] => m.name.clone(),
        [a, b, ..] => return Err(FrontendError::MultipleMain(a.name.clone(), b.name.clone())),
    };
    Ok(Program {
        units,
        entry,
        files: unit_files,
        origins,
    })
}

/// Parses raw bytes, rejecting invalid UTF-8 with a positioned error.
pub fn decode_source(path: &Path, bytes: &[u8]) -> Result<String, FrontendError> {
    String::from_utf8(bytes.to_vec()).map_err(|_| FrontendError::InvalidUtf8 {
        file: path.to_path_buf(),
    })
}

fn parse_unit_file(
    path: &Path,
    text: &str,
    next_id: &mut u32,
    origins: &mut BTreeMap<ProvId, SourcePos>,
) -> Result<Unit, FrontendError> {
    let tokens = tokenize(text).map_err(|err| FrontendError::Lex {
        file: path.to_path_buf(),
        err,
    })?;
    let mut p = Parser {
        tokens,
        pos: 0,
        file: path,
        pending_comments: Vec::new(),
        next_id,
        origins,
        arrays: BTreeSet::new(),
    };
    p.unit()
}

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    file: &'a Path,
    pending_comments: Vec<String>,
    next_id: &'a mut u32,
    origins: &'a mut BTreeMap<ProvId, SourcePos>,
    /// Names declared with a dimension in the current unit.
    arrays: BTreeSet<String>,
}

type PResult<T> = Result<T, FrontendError>;

impl Parser<'_> {
    fn skip_comments(&mut self) {
        while let Some(Token {
            kind: TokenKind::Comment(text),
            ..
        }) = self.tokens.get(self.pos)
        {
            self.pending_comments.push(text.clone());
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> &TokenKind {
        self.skip_comments();
        &self.tokens[self.pos.min(self.tokens.len() - 1)].kind
    }

    fn peek_token(&mut self) -> Token {
        self.skip_comments();
        self.tokens[self.pos.min(self.tokens.len() - 1)].clone()
    }

    fn peek_second(&mut self) -> TokenKind {
        self.skip_comments();
        let mut i = self.pos + 1;
        while let Some(Token {
            kind: TokenKind::Comment(_),
            ..
        }) = self.tokens.get(i)
        {
            i += 1;
        }
        self.tokens
            .get(i)
            .map(|t| t.kind.clone())
            .unwrap_or(TokenKind::Eof)
    }

    fn advance(&mut self) -> Token {
        let t = self.peek_token();
        if self.pos < self.tokens.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn at(&mut self, kind: &TokenKind) -> bool {
        self.peek() == kind
    }

    fn eat(&mut self, kind: &TokenKind) -> bool {
        if self.at(kind) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn error_at(&self, tok: &Token, message: impl Into<String>) -> FrontendError {
        FrontendError::Parse {
            file: self.file.to_path_buf(),
            line: tok.line,
            col: tok.col,
            message: message.into(),
        }
    }

    fn expect(&mut self, kind: &TokenKind, what: &str) -> PResult<Token> {
        let tok = self.peek_token();
        if &tok.kind == kind {
            Ok(self.advance())
        } else {
            Err(self.error_at(&tok, format!("expected {what}, found {}", tok.kind)))
        }
    }

    fn ident(&mut self, what: &str) -> PResult<String> {
        let tok = self.peek_token();
        match tok.kind.clone() {
            TokenKind::Ident(name) => {
                self.advance();
                Ok(name)
            }
            other => Err(self.error_at(&tok, format!("expected {what}, found {other}"))),
        }
    }

    fn end_of_line(&mut self) -> PResult<()> {
        let tok = self.peek_token();
        match tok.kind.clone() {
            TokenKind::Newline => {
                self.advance();
                Ok(())
            }
            TokenKind::Eof => Ok(()),
            other => Err(self.error_at(&tok, format!("expected end of line, found {other}"))),
        }
    }

    fn skip_blank_lines(&mut self) {
        while self.eat(&TokenKind::Newline) {}
    }

    fn take_comments(&mut self) -> Vec<String> {
        std::mem::take(&mut self.pending_comments)
    }

    fn fresh_id(&mut self, at: &Token) -> ProvId {
        let id = ProvId(*self.next_id);
        *self.next_id += 1;
        self.origins.insert(
            id,
            SourcePos {
                file: self.file.to_path_buf(),
                line: at.line,
                col: at.col,
            },
        );
        id
    }

    // ---- units -----------------------------------------------------------

    fn unit(&mut self) -> PResult<Unit> {
        self.skip_blank_lines();
        let comments = self.take_comments();
        let head = self.peek_token();
        let (kind, name, formals, result_type) = match head.kind.clone() {
            TokenKind::Program => {
                self.advance();
                (UnitKind::Main, self.ident("program name")?, Vec::new(), None)
            }
            TokenKind::Subroutine => {
                self.advance();
                let name = self.ident("subroutine name")?;
                let formals = if self.at(&TokenKind::LParen) {
                    self.formal_list()?
                } else {
                    Vec::new()
                };
                (UnitKind::Subroutine, name, formals, None)
            }
            TokenKind::Integer | TokenKind::Real | TokenKind::Logical | TokenKind::Character => {
                let ty = self.type_spec()?;
                self.expect(&TokenKind::Function, "FUNCTION")?;
                let name = self.ident("function name")?;
                let formals = self.formal_list()?;
                (UnitKind::Function, name, formals, Some(ty))
            }
            other => {
                return Err(self.error_at(
                    &head,
                    format!("expected PROGRAM, SUBROUTINE or typed FUNCTION, found {other}"),
                ))
            }
        };
        self.end_of_line()?;

        let decls = self.declarations()?;
        let body = self.block(&[BlockEnd::End])?;
        // `END [PROGRAM|SUBROUTINE|FUNCTION [name]]`
        let trailing_comments = self.take_comments();
        self.expect(&TokenKind::End, "END")?;
        if matches!(
            self.peek(),
            TokenKind::Program | TokenKind::Subroutine | TokenKind::Function
        ) {
            self.advance();
            if let TokenKind::Ident(_) = self.peek() {
                self.advance();
            }
        }
        self.end_of_line()?;
        self.skip_blank_lines();
        let tail = self.peek_token();
        if tail.kind != TokenKind::Eof {
            return Err(self.error_at(&tail, "only one program unit is allowed per file"));
        }
        let mut trailing_comments = trailing_comments;
        trailing_comments.extend(self.take_comments());
        Ok(Unit {
            kind,
            name,
            formals,
            decls,
            body,
            result_type,
            comments,
            trailing_comments,
        })
    }

    fn formal_list(&mut self) -> PResult<Vec<String>> {
        self.expect(&TokenKind::LParen, "`(`")?;
        let mut out = Vec::new();
        if !self.eat(&TokenKind::RParen) {
            loop {
                out.push(self.ident("formal argument")?);
                if !self.eat(&TokenKind::Comma) {
                    break;
                }
            }
            self.expect(&TokenKind::RParen, "`)`")?;
        }
        Ok(out)
    }

    fn type_spec(&mut self) -> PResult<VarType> {
        let tok = self.advance();
        let base = match tok.kind.clone() {
            TokenKind::Integer => BaseType::Integer,
            TokenKind::Real => BaseType::Real,
            TokenKind::Logical => BaseType::Logical,
            TokenKind::Character => BaseType::Character,
            other => return Err(self.error_at(&tok, format!("expected a type, found {other}"))),
        };
        let mut ty = VarType::scalar(base);
        if base == BaseType::Character && self.eat(&TokenKind::Star) {
            let t = self.advance();
            match t.kind {
                TokenKind::IntLit(n) if n > 0 && n <= u32::MAX as i64 => {
                    ty.char_len = Some(n as u32)
                }
                _ => return Err(self.error_at(&t, "expected a positive character length")),
            }
        }
        Ok(ty)
    }

    fn declarations(&mut self) -> PResult<Vec<Decl>> {
        let mut decls = Vec::new();
        loop {
            self.skip_blank_lines();
            match self.peek().clone() {
                TokenKind::Integer | TokenKind::Real | TokenKind::Logical | TokenKind::Character => {
                    let mut comments = self.take_comments();
                    let ty = self.type_spec()?;
                    loop {
                        let name = self.ident("variable name")?;
                        let mut vty = ty.clone();
                        if self.eat(&TokenKind::LParen) {
                            let t = self.advance();
                            vty.dim = Some(match t.kind {
                                TokenKind::IntLit(n) if n > 0 && n <= u32::MAX as i64 => {
                                    Dim::Lit(n as u32)
                                }
                                TokenKind::Ident(p) => Dim::Param(p),
                                _ => {
                                    return Err(self.error_at(
                                        &t,
                                        "array dimension must be a positive integer or a PARAMETER",
                                    ))
                                }
                            });
                            self.expect(&TokenKind::RParen, "`)`")?;
                            self.arrays.insert(name.clone());
                        }
                        decls.push(Decl {
                            kind: DeclKind::Type { name, ty: vty },
                            comments: std::mem::take(&mut comments),
                        });
                        if !self.eat(&TokenKind::Comma) {
                            break;
                        }
                    }
                    self.end_of_line()?;
                }
                TokenKind::Parameter => {
                    let mut comments = self.take_comments();
                    self.advance();
                    self.expect(&TokenKind::LParen, "`(`")?;
                    loop {
                        let name = self.ident("parameter name")?;
                        self.expect(&TokenKind::Assign, "`=`")?;
                        let value = self.signed_literal()?;
                        decls.push(Decl {
                            kind: DeclKind::Parameter { name, value },
                            comments: std::mem::take(&mut comments),
                        });
                        if !self.eat(&TokenKind::Comma) {
                            break;
                        }
                    }
                    self.expect(&TokenKind::RParen, "`)`")?;
                    self.end_of_line()?;
                }
                TokenKind::Common => {
                    let comments = self.take_comments();
                    self.advance();
                    self.expect(&TokenKind::Slash, "`/`")?;
                    let block = self.ident("COMMON block name")?;
                    self.expect(&TokenKind::Slash, "`/`")?;
                    let mut members = vec![self.ident("COMMON member")?];
                    while self.eat(&TokenKind::Comma) {
                        members.push(self.ident("COMMON member")?);
                    }
                    self.end_of_line()?;
                    decls.push(Decl {
                        kind: DeclKind::Common { block, members },
                        comments,
                    });
                }
                _ => return Ok(decls),
            }
        }
    }

    /// Literal with an optional leading sign (PARAMETER values).
    fn signed_literal(&mut self) -> PResult<Value> {
        let negative = if self.eat(&TokenKind::Minus) {
            true
        } else {
            self.eat(&TokenKind::Plus);
            false
        };
        let tok = self.advance();
        let v = match tok.kind.clone() {
            TokenKind::IntLit(i) => Value::Int(i),
            TokenKind::RealLit(r) => Value::Real(r),
            TokenKind::LogicalLit(b) if !negative => Value::Logical(b),
            TokenKind::StrLit(s) if !negative => Value::Char(s),
            other => return Err(self.error_at(&tok, format!("expected a literal, found {other}"))),
        };
        Ok(if negative { negate(v) } else { v })
    }

    // ---- statements ------------------------------------------------------

    fn block(&mut self, ends: &[BlockEnd]) -> PResult<Vec<Stmt>> {
        let mut out = Vec::new();
        loop {
            self.skip_blank_lines();
            if self.at_block_end(ends) {
                return Ok(out);
            }
            let tok = self.peek_token();
            match tok.kind {
                TokenKind::Eof => return Err(self.error_at(&tok, "unexpected end of file")),
                TokenKind::Integer
                | TokenKind::Real
                | TokenKind::Logical
                | TokenKind::Character
                | TokenKind::Parameter
                | TokenKind::Common => {
                    return Err(
                        self.error_at(&tok, "declarations must precede executable statements")
                    )
                }
                TokenKind::Else | TokenKind::ElseIf | TokenKind::EndIf | TokenKind::EndDo => {
                    return Err(self.error_at(&tok, format!("unexpected {}", tok.kind)))
                }
                _ => {}
            }
            out.push(self.statement()?);
        }
    }

    fn at_block_end(&mut self, ends: &[BlockEnd]) -> bool {
        let kind = self.peek().clone();
        let second = self.peek_second();
        ends.iter().any(|e| match e {
            BlockEnd::End => {
                kind == TokenKind::End
                    && !matches!(second, TokenKind::If | TokenKind::Do)
            }
            BlockEnd::EndIf => {
                kind == TokenKind::EndIf || (kind == TokenKind::End && second == TokenKind::If)
            }
            BlockEnd::Else => kind == TokenKind::Else || kind == TokenKind::ElseIf,
            BlockEnd::EndDo => {
                kind == TokenKind::EndDo || (kind == TokenKind::End && second == TokenKind::Do)
            }
        })
    }

    fn statement(&mut self) -> PResult<Stmt> {
        let comments = self.take_comments();
        let tok = self.peek_token();
        let id = self.fresh_id(&tok);
        let kind = match tok.kind.clone() {
            TokenKind::If => return self.if_statement(id, comments),
            TokenKind::Do => {
                self.advance();
                if self.eat(&TokenKind::While) {
                    self.expect(&TokenKind::LParen, "`(`")?;
                    let cond = self.expr()?;
                    self.expect(&TokenKind::RParen, "`)`")?;
                    self.end_of_line()?;
                    let body = self.block(&[BlockEnd::EndDo])?;
                    self.end_do()?;
                    StmtKind::DoWhile { cond, body }
                } else {
                    let var = self.ident("DO index")?;
                    self.expect(&TokenKind::Assign, "`=`")?;
                    let lo = self.expr()?;
                    self.expect(&TokenKind::Comma, "`,`")?;
                    let hi = self.expr()?;
                    let step = if self.eat(&TokenKind::Comma) {
                        Some(self.expr()?)
                    } else {
                        None
                    };
                    self.end_of_line()?;
                    let body = self.block(&[BlockEnd::EndDo])?;
                    self.end_do()?;
                    StmtKind::Do {
                        var,
                        lo,
                        hi,
                        step,
                        body,
                    }
                }
            }
            _ => {
                let kind = self.simple_statement()?;
                self.end_of_line()?;
                kind
            }
        };
        Ok(Stmt { id, comments, kind })
    }

    fn end_do(&mut self) -> PResult<()> {
        if !self.eat(&TokenKind::EndDo) {
            self.expect(&TokenKind::End, "ENDDO")?;
            self.expect(&TokenKind::Do, "DO")?;
        }
        self.end_of_line()
    }

    fn end_if(&mut self) -> PResult<()> {
        if !self.eat(&TokenKind::EndIf) {
            self.expect(&TokenKind::End, "ENDIF")?;
            self.expect(&TokenKind::If, "IF")?;
        }
        self.end_of_line()
    }

    /// Statements allowed as the target of a logical IF.
    fn simple_statement(&mut self) -> PResult<StmtKind> {
        let tok = self.peek_token();
        Ok(match tok.kind.clone() {
            TokenKind::Ident(name) => {
                self.advance();
                let target = if self.eat(&TokenKind::LParen) {
                    if !self.arrays.contains(&name) {
                        return Err(
                            self.error_at(&tok, format!("{name} is not an array (statement functions are not supported)"))
                        );
                    }
                    let idx = self.expr()?;
                    self.expect(&TokenKind::RParen, "`)`")?;
                    LValue::Elem(name, Box::new(idx))
                } else {
                    LValue::Var(name)
                };
                self.expect(&TokenKind::Assign, "`=`")?;
                let value = self.expr()?;
                StmtKind::Assign { target, value }
            }
            TokenKind::Call => {
                self.advance();
                let name = self.ident("subroutine name")?;
                let args = if self.eat(&TokenKind::LParen) {
                    self.args()?
                } else {
                    Vec::new()
                };
                StmtKind::Call { name, args }
            }
            TokenKind::Return => {
                self.advance();
                StmtKind::Return
            }
            TokenKind::Stop => {
                self.advance();
                StmtKind::Stop
            }
            TokenKind::Continue => {
                self.advance();
                StmtKind::Continue
            }
            TokenKind::Print => {
                self.advance();
                self.expect(&TokenKind::Star, "`*`")?;
                let mut args = Vec::new();
                while self.eat(&TokenKind::Comma) {
                    args.push(self.expr()?);
                }
                StmtKind::Print { args }
            }
            TokenKind::Read => {
                self.advance();
                self.expect(&TokenKind::Star, "`*`")?;
                let mut targets = Vec::new();
                while self.eat(&TokenKind::Comma) {
                    let t = self.peek_token();
                    let name = self.ident("READ target")?;
                    if self.eat(&TokenKind::LParen) {
                        if !self.arrays.contains(&name) {
                            return Err(self.error_at(&t, format!("{name} is not an array")));
                        }
                        let idx = self.expr()?;
                        self.expect(&TokenKind::RParen, "`)`")?;
                        targets.push(LValue::Elem(name, Box::new(idx)));
                    } else {
                        targets.push(LValue::Var(name));
                    }
                }
                if targets.is_empty() {
                    return Err(self.error_at(&tok, "READ needs at least one target"));
                }
                StmtKind::Read { targets }
            }
            other => return Err(self.error_at(&tok, format!("expected a statement, found {other}"))),
        })
    }

    fn if_statement(&mut self, id: ProvId, comments: Vec<String>) -> PResult<Stmt> {
        self.expect(&TokenKind::If, "IF")?;
        self.expect(&TokenKind::LParen, "`(`")?;
        let cond = self.expr()?;
        self.expect(&TokenKind::RParen, "`)`")?;
        if !self.eat(&TokenKind::Then) {
            // logical IF
            let inner_tok = self.peek_token();
            if matches!(inner_tok.kind, TokenKind::If | TokenKind::Do) {
                return Err(self.error_at(&inner_tok, "logical IF cannot contain a block statement"));
            }
            let inner_id = self.fresh_id(&inner_tok);
            let kind = self.simple_statement()?;
            self.end_of_line()?;
            return Ok(Stmt {
                id,
                comments,
                kind: StmtKind::If {
                    cond,
                    then_body: vec![Stmt {
                        id: inner_id,
                        comments: Vec::new(),
                        kind,
                    }],
                    else_body: Vec::new(),
                },
            });
        }
        self.end_of_line()?;
        let then_body = self.block(&[BlockEnd::Else, BlockEnd::EndIf])?;
        let else_body = self.else_chain()?;
        Ok(Stmt {
            id,
            comments,
            kind: StmtKind::If {
                cond,
                then_body,
                else_body,
            },
        })
    }

    /// Parses what follows a THEN block, through the closing ENDIF.
    fn else_chain(&mut self) -> PResult<Vec<Stmt>> {
        let tok = self.peek_token();
        let else_if = match tok.kind {
            TokenKind::ElseIf => {
                self.advance();
                true
            }
            TokenKind::Else => {
                self.advance();
                self.at(&TokenKind::If)
            }
            _ => {
                self.end_if()?;
                return Ok(Vec::new());
            }
        };
        if else_if {
            let comments = self.take_comments();
            let at = self.peek_token();
            let id = self.fresh_id(&at);
            self.eat(&TokenKind::If);
            self.expect(&TokenKind::LParen, "`(`")?;
            let cond = self.expr()?;
            self.expect(&TokenKind::RParen, "`)`")?;
            self.expect(&TokenKind::Then, "THEN")?;
            self.end_of_line()?;
            let then_body = self.block(&[BlockEnd::Else, BlockEnd::EndIf])?;
            let else_body = self.else_chain()?;
            Ok(vec![Stmt {
                id,
                comments,
                kind: StmtKind::If {
                    cond,
                    then_body,
                    else_body,
                },
            }])
        } else {
            self.end_of_line()?;
            let body = self.block(&[BlockEnd::EndIf])?;
            self.end_if()?;
            Ok(body)
        }
    }

    // ---- expressions -----------------------------------------------------

    fn args(&mut self) -> PResult<Vec<Expr>> {
        let mut out = Vec::new();
        if self.eat(&TokenKind::RParen) {
            return Ok(out);
        }
        loop {
            out.push(self.expr()?);
            if !self.eat(&TokenKind::Comma) {
                break;
            }
        }
        self.expect(&TokenKind::RParen, "`)`")?;
        Ok(out)
    }

    pub(crate) fn expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.and_expr()?;
        while self.eat(&TokenKind::OpOr) {
            let rhs = self.and_expr()?;
            lhs = Expr::binary(BinOp::Or, lhs, rhs);
        }
        Ok(lhs)
    }

    fn and_expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.not_expr()?;
        while self.eat(&TokenKind::OpAnd) {
            let rhs = self.not_expr()?;
            lhs = Expr::binary(BinOp::And, lhs, rhs);
        }
        Ok(lhs)
    }

    fn not_expr(&mut self) -> PResult<Expr> {
        if self.eat(&TokenKind::OpNot) {
            let inner = self.not_expr()?;
            return Ok(Expr::Unary(UnOp::Not, Box::new(inner)));
        }
        self.rel_expr()
    }

    fn rel_expr(&mut self) -> PResult<Expr> {
        let lhs = self.add_expr()?;
        let op = match self.peek() {
            TokenKind::OpEq => BinOp::Eq,
            TokenKind::OpNe => BinOp::Ne,
            TokenKind::OpLt => BinOp::Lt,
            TokenKind::OpLe => BinOp::Le,
            TokenKind::OpGt => BinOp::Gt,
            TokenKind::OpGe => BinOp::Ge,
            _ => return Ok(lhs),
        };
        self.advance();
        let rhs = self.add_expr()?;
        Ok(Expr::binary(op, lhs, rhs))
    }

    fn add_expr(&mut self) -> PResult<Expr> {
        let mut lhs = if self.eat(&TokenKind::Minus) {
            negate_expr(self.mul_expr()?)
        } else {
            self.eat(&TokenKind::Plus);
            self.mul_expr()?
        };
        loop {
            let op = match self.peek() {
                TokenKind::Plus => BinOp::Add,
                TokenKind::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.advance();
            let rhs = self.mul_expr()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    fn mul_expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.pow_expr()?;
        loop {
            let op = match self.peek() {
                TokenKind::Star => BinOp::Mul,
                TokenKind::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.advance();
            let rhs = self.pow_expr()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    fn pow_expr(&mut self) -> PResult<Expr> {
        let base = self.primary()?;
        if self.eat(&TokenKind::Power) {
            let exp = self.pow_expr()?;
            return Ok(Expr::binary(BinOp::Pow, base, exp));
        }
        Ok(base)
    }

    fn primary(&mut self) -> PResult<Expr> {
        let tok = self.advance();
        Ok(match tok.kind.clone() {
            TokenKind::IntLit(i) => Expr::Lit(Value::Int(i)),
            TokenKind::RealLit(r) => Expr::Lit(Value::Real(r)),
            TokenKind::LogicalLit(b) => Expr::Lit(Value::Logical(b)),
            TokenKind::StrLit(s) => Expr::Lit(Value::Char(s)),
            TokenKind::LParen => {
                let e = self.expr()?;
                self.expect(&TokenKind::RParen, "`)`")?;
                e
            }
            TokenKind::Ident(name) => {
                if self.eat(&TokenKind::LParen) {
                    let args = self.args()?;
                    if self.arrays.contains(&name) {
                        if args.len() != 1 {
                            return Err(self.error_at(
                                &tok,
                                format!("array {name} takes exactly one subscript"),
                            ));
                        }
                        Expr::Elem(name, Box::new(args.into_iter().next().unwrap()))
                    } else {
                        Expr::Call(name, args)
                    }
                } else {
                    Expr::Var(name)
                }
            }
            other => {
                return Err(self.error_at(&tok, format!("expected an expression, found {other}")))
            }
        })
    }
}

#[derive(Clone, Copy)]
enum BlockEnd {
    End,
    EndIf,
    Else,
    EndDo,
}

fn negate(v: Value) -> Value {
    match v {
        Value::Int(i) => Value::Int(i.wrapping_neg()),
        Value::Real(r) => Value::Real(-r),
        other => other,
    }
}

/// Unary minus; a literal operand folds into a negative literal so that
/// printed negative literals reparse to the same tree.
pub fn negate_expr(e: Expr) -> Expr {
    match e {
        Expr::Lit(v @ (Value::Int(_) | Value::Real(_))) if !v.is_negative() => Expr::Lit(negate(v)),
        other => Expr::Unary(UnOp::Neg, Box::new(other)),
    }
}

/// Parses a standalone expression (tests and tooling). `arrays` lists names
/// to treat as array references.
pub fn parse_expr(text: &str, arrays: &[&str]) -> Result<Expr, FrontendError> {
    let tokens = tokenize(text).map_err(|err| FrontendError::Lex {
        file: PathBuf::from("<expr>"),
        err,
    })?;
    let mut next_id = 0;
    let mut origins = BTreeMap::new();
    let mut p = Parser {
        tokens,
        pos: 0,
        file: Path::new("<expr>"),
        pending_comments: Vec::new(),
        next_id: &mut next_id,
        origins: &mut origins,
        arrays: arrays.iter().map(|s| s.to_ascii_uppercase()).collect(),
    };
    let e = p.expr()?;
    p.end_of_line()?;
    let tok = p.peek_token();
    if tok.kind != TokenKind::Eof {
        return Err(p.error_at(&tok, "trailing input after expression"));
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one(src: &str) -> Program {
        parse_program(&[("p.f", src)]).unwrap()
    }

    #[test]
    fn single_main_with_one_assignment() {
        let p = one("PROGRAM P\nX=1\nEND");
        assert_eq!(p.units.len(), 1);
        assert_eq!(p.entry, "P");
        let u = &p.units[0];
        assert_eq!(u.kind, UnitKind::Main);
        assert_eq!(
            u.body,
            vec![Stmt {
                id: ProvId(0),
                comments: vec![],
                kind: StmtKind::Assign {
                    target: LValue::Var("X".into()),
                    value: Expr::Lit(Value::Int(1)),
                },
            }]
        );
    }

    #[test]
    fn duplicate_subroutine_rejected() {
        let s = "SUBROUTINE S\nRETURN\nEND\n";
        let err = parse_program(&[("m.f", "PROGRAM M\nEND\n"), ("a.f", s), ("b.f", s)]).unwrap_err();
        assert!(matches!(err, FrontendError::DuplicateUnit { ref name, .. } if name == "S"));
    }

    #[test]
    fn missing_main_rejected() {
        let err = parse_program(&[("a.f", "SUBROUTINE S\nEND\n")]).unwrap_err();
        assert_eq!(err, FrontendError::MissingMain);
    }

    #[test]
    fn two_units_in_one_file_rejected() {
        let err = parse_program(&[("a.f", "PROGRAM M\nEND\nSUBROUTINE S\nEND\n")]).unwrap_err();
        assert!(matches!(err, FrontendError::Parse { line: 3, .. }));
    }

    #[test]
    fn precedence_and_negative_literals() {
        let e = parse_expr("-A**2 + B*C", &[]).unwrap();
        let expected = Expr::binary(
            BinOp::Add,
            Expr::Unary(
                UnOp::Neg,
                Box::new(Expr::binary(
                    BinOp::Pow,
                    Expr::Var("A".into()),
                    Expr::Lit(Value::Int(2)),
                )),
            ),
            Expr::binary(BinOp::Mul, Expr::Var("B".into()), Expr::Var("C".into())),
        );
        assert_eq!(e, expected);
        assert_eq!(parse_expr("-3", &[]).unwrap(), Expr::Lit(Value::Int(-3)));
        assert_eq!(
            parse_expr("2**3**2", &[]).unwrap(),
            Expr::binary(
                BinOp::Pow,
                Expr::Lit(Value::Int(2)),
                Expr::binary(BinOp::Pow, Expr::Lit(Value::Int(3)), Expr::Lit(Value::Int(2)))
            )
        );
    }

    #[test]
    fn array_reference_vs_function_call() {
        assert!(matches!(parse_expr("A(1)", &["A"]).unwrap(), Expr::Elem(..)));
        assert!(matches!(parse_expr("F(1)", &[]).unwrap(), Expr::Call(..)));
    }

    #[test]
    fn else_if_chain_nests() {
        let p = one(
            "PROGRAM P\nINTEGER K\nK = 1\nIF (K .EQ. 1) THEN\nK = 2\nELSE IF (K .EQ. 2) THEN\nK = 3\nELSE\nK = 4\nEND IF\nEND\n",
        );
        let body = &p.units[0].body;
        let StmtKind::If { else_body, .. } = &body[1].kind else {
            panic!()
        };
        assert_eq!(else_body.len(), 1);
        assert!(matches!(else_body[0].kind, StmtKind::If { .. }));
        assert_eq!(p.units[0].statement_count(), 6);
    }

    #[test]
    fn logical_if_becomes_block_if() {
        let p = one("PROGRAM P\nINTEGER K\nK = 1\nIF (K .GT. 0) PRINT *, K\nEND\n");
        let StmtKind::If { then_body, .. } = &p.units[0].body[1].kind else {
            panic!()
        };
        assert!(matches!(then_body[0].kind, StmtKind::Print { .. }));
    }

    #[test]
    fn comments_attach_to_following_statement() {
        let p = one("PROGRAM P\nINTEGER X\n! set it\nX = 1 ! trailing\nPRINT *, X\nEND\n");
        let body = &p.units[0].body;
        assert_eq!(body[0].comments, vec!["set it".to_string()]);
        assert_eq!(body[1].comments, vec!["trailing".to_string()]);
    }

    #[test]
    fn declarations_after_statements_rejected() {
        let err = parse_program(&[("p.f", "PROGRAM P\nX = 1\nINTEGER X\nEND\n")]).unwrap_err();
        assert!(matches!(err, FrontendError::Parse { line: 3, .. }));
    }

    #[test]
    fn prov_ids_follow_file_order() {
        let p = parse_program(&[
            ("m.f", "PROGRAM M\nCALL S\nCALL S\nEND\n"),
            ("s.f", "SUBROUTINE S\nRETURN\nEND\n"),
        ])
        .unwrap();
        let ids: Vec<u32> = p.statements().iter().map(|s| s.id.0).collect();
        assert_eq!(ids, vec![0, 1, 2]);
        assert_eq!(p.origins[&ProvId(2)].line, 2);
    }
}
