//! Free-form MiniF77 tokenizer.
//!
//! Lines are statements: a [`TokenKind::Newline`] separates them, and a
//! trailing `&` joins a line with the next. Comment lines (first non-blank
//! `!`, or `C`/`*` in column 1 followed by a blank) and trailing `!`
//! comments become [`TokenKind::Comment`] tokens.

use std::fmt;

use crate::error::LexError;

#[derive(Debug, Clone, PartialEq)]
pub enum TokenKind {
    Ident(String),
    IntLit(i64),
    RealLit(f64),
    StrLit(String),
    LogicalLit(bool),
    Comment(String),

    // keywords
    Program,
    Subroutine,
    Function,
    End,
    Integer,
    Real,
    Logical,
    Character,
    Parameter,
    Common,
    If,
    Then,
    Else,
    ElseIf,
    EndIf,
    Do,
    While,
    EndDo,
    Call,
    Return,
    Stop,
    Continue,
    Print,
    Read,

    // punctuation and operators
    LParen,
    RParen,
    Comma,
    Assign,
    Plus,
    Minus,
    Star,
    Slash,
    Power,
    OpEq,
    OpNe,
    OpLt,
    OpLe,
    OpGt,
    OpGe,
    OpAnd,
    OpOr,
    OpNot,

    Newline,
    Eof,
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TokenKind::Ident(s) => write!(f, "identifier `{s}`"),
            TokenKind::IntLit(i) => write!(f, "integer `{i}`"),
            TokenKind::RealLit(r) => write!(f, "real `{r}`"),
            TokenKind::StrLit(s) => write!(f, "string '{s}'"),
            TokenKind::LogicalLit(b) => write!(f, "logical `{b}`"),
            TokenKind::Comment(_) => f.write_str("comment"),
            TokenKind::Newline => f.write_str("end of line"),
            TokenKind::Eof => f.write_str("end of file"),
            other => write!(f, "`{}`", other.spelling()),
        }
    }
}

impl TokenKind {
    fn spelling(&self) -> &'static str {
        use TokenKind::*;
        match self {
            Program => "PROGRAM",
            Subroutine => "SUBROUTINE",
            Function => "FUNCTION",
            End => "END",
            Integer => "INTEGER",
            Real => "REAL",
            Logical => "LOGICAL",
            Character => "CHARACTER",
            Parameter => "PARAMETER",
            Common => "COMMON",
            If => "IF",
            Then => "THEN",
            Else => "ELSE",
            ElseIf => "ELSEIF",
            EndIf => "ENDIF",
            Do => "DO",
            While => "WHILE",
            EndDo => "ENDDO",
            Call => "CALL",
            Return => "RETURN",
            Stop => "STOP",
            Continue => "CONTINUE",
            Print => "PRINT",
            Read => "READ",
            LParen => "(",
            RParen => ")",
            Comma => ",",
            Assign => "=",
            Plus => "+",
            Minus => "-",
            Star => "*",
            Slash => "/",
            Power => "**",
            OpEq => ".EQ.",
            OpNe => ".NE.",
            OpLt => ".LT.",
            OpLe => ".LE.",
            OpGt => ".GT.",
            OpGe => ".GE.",
            OpAnd => ".AND.",
            OpOr => ".OR.",
            OpNot => ".NOT.",
            _ => "?",
        }
    }
}

fn keyword(word: &str) -> Option<TokenKind> {
    use TokenKind::*;
    Some(match word {
        "PROGRAM" => Program,
        "SUBROUTINE" => Subroutine,
        "FUNCTION" => Function,
        "END" => End,
        "INTEGER" => Integer,
        "REAL" => Real,
        "LOGICAL" => Logical,
        "CHARACTER" => Character,
        "PARAMETER" => Parameter,
        "COMMON" => Common,
        "IF" => If,
        "THEN" => Then,
        "ELSE" => Else,
        "ELSEIF" => ElseIf,
        "ENDIF" => EndIf,
        "DO" => Do,
        "WHILE" => While,
        "ENDDO" => EndDo,
        "CALL" => Call,
        "RETURN" => Return,
        "STOP" => Stop,
        "CONTINUE" => Continue,
        "PRINT" => Print,
        "READ" => Read,
        _ => return None,
    })
}

fn dot_word(word: &str) -> Option<TokenKind> {
    use TokenKind::*;
    Some(match word {
        "EQ" => OpEq,
        "NE" => OpNe,
        "LT" => OpLt,
        "LE" => OpLe,
        "GT" => OpGt,
        "GE" => OpGe,
        "AND" => OpAnd,
        "OR" => OpOr,
        "NOT" => OpNot,
        "TRUE" => LogicalLit(true),
        "FALSE" => LogicalLit(false),
        _ => return None,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    pub line: u32,
    pub col: u32,
}

struct Lexer<'a> {
    chars: Vec<char>,
    pos: usize,
    line: u32,
    col: u32,
    out: Vec<Token>,
    _src: &'a str,
}

/// Tokenizes one source file.
pub fn tokenize(source: &str) -> Result<Vec<Token>, LexError> {
    let mut lx = Lexer {
        chars: source.chars().collect(),
        pos: 0,
        line: 1,
        col: 1,
        out: Vec::new(),
        _src: source,
    };
    lx.run()?;
    Ok(lx.out)
}

impl Lexer<'_> {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn peek_at(&self, n: usize) -> Option<char> {
        self.chars.get(self.pos + n).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.get(self.pos).copied()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn push(&mut self, kind: TokenKind, line: u32, col: u32) {
        self.out.push(Token { kind, line, col });
    }

    fn err(&self, line: u32, col: u32, message: impl Into<String>) -> LexError {
        LexError {
            line,
            col,
            message: message.into(),
        }
    }

    fn newline(&mut self, line: u32, col: u32) {
        if !matches!(
            self.out.last().map(|t| &t.kind),
            None | Some(TokenKind::Newline)
        ) {
            self.push(TokenKind::Newline, line, col);
        }
    }

    fn rest_of_line(&mut self) -> String {
        let mut s = String::new();
        while let Some(c) = self.peek() {
            if c == '\n' {
                break;
            }
            s.push(c);
            self.bump();
        }
        s.trim_end_matches('\r').trim().to_string()
    }

    fn run(&mut self) -> Result<(), LexError> {
        while self.pos < self.chars.len() {
            if self.col == 1 && self.fixed_comment_line() {
                let (line, col) = (self.line, self.col);
                self.bump();
                let text = self.rest_of_line();
                self.push(TokenKind::Comment(text), line, col);
                continue;
            }
            let (line, col) = (self.line, self.col);
            let c = self.peek().unwrap();
            match c {
                '\n' => {
                    self.bump();
                    self.newline(line, col);
                }
                ' ' | '\t' | '\r' => {
                    self.bump();
                }
                '!' => {
                    self.bump();
                    let text = self.rest_of_line();
                    self.push(TokenKind::Comment(text), line, col);
                }
                '&' => {
                    self.bump();
                    while matches!(self.peek(), Some(' ' | '\t' | '\r')) {
                        self.bump();
                    }
                    match self.peek() {
                        Some('\n') => {
                            self.bump();
                        }
                        None => {}
                        Some('!') => {
                            self.bump();
                            let text = self.rest_of_line();
                            self.push(TokenKind::Comment(text), line, col);
                            self.bump();
                        }
                        Some(_) => {
                            return Err(self.err(line, col, "`&` must end the line"));
                        }
                    }
                }
                '(' => self.single(TokenKind::LParen),
                ')' => self.single(TokenKind::RParen),
                ',' => self.single(TokenKind::Comma),
                '=' => self.single(TokenKind::Assign),
                '+' => self.single(TokenKind::Plus),
                '-' => self.single(TokenKind::Minus),
                '/' => self.single(TokenKind::Slash),
                '*' => {
                    self.bump();
                    if self.peek() == Some('*') {
                        self.bump();
                        self.push(TokenKind::Power, line, col);
                    } else {
                        self.push(TokenKind::Star, line, col);
                    }
                }
                '\'' | '"' => self.string(c)?,
                '.' => {
                    if self.peek_at(1).is_some_and(|d| d.is_ascii_digit()) {
                        self.number()?;
                    } else {
                        self.dot_operator()?;
                    }
                }
                c if c.is_ascii_digit() => self.number()?,
                c if c.is_ascii_alphabetic() => self.word(),
                other => {
                    return Err(self.err(line, col, format!("illegal character {other:?}")));
                }
            }
        }
        let (line, col) = (self.line, self.col);
        self.newline(line, col);
        self.push(TokenKind::Eof, line, col);
        Ok(())
    }

    fn fixed_comment_line(&self) -> bool {
        match self.peek() {
            Some('*') => true,
            Some('C' | 'c') => matches!(self.peek_at(1), None | Some(' ' | '\t' | '\n' | '\r')),
            _ => false,
        }
    }

    fn single(&mut self, kind: TokenKind) {
        let (line, col) = (self.line, self.col);
        self.bump();
        self.push(kind, line, col);
    }

    fn word(&mut self) {
        let (line, col) = (self.line, self.col);
        let mut w = String::new();
        while let Some(c) = self.peek() {
            if c.is_ascii_alphanumeric() || c == '_' {
                w.push(c.to_ascii_uppercase());
                self.bump();
            } else {
                break;
            }
        }
        let kind = keyword(&w).unwrap_or(TokenKind::Ident(w));
        self.push(kind, line, col);
    }

    /// Letters following a `.` at the current position, if they form a
    /// complete `.WORD.` operator.
    fn dot_word_ahead(&self) -> Option<(TokenKind, usize)> {
        let mut i = self.pos + 1;
        let mut w = String::new();
        while let Some(c) = self.chars.get(i) {
            if c.is_ascii_alphabetic() {
                w.push(c.to_ascii_uppercase());
                i += 1;
            } else {
                break;
            }
        }
        if self.chars.get(i) == Some(&'.') {
            dot_word(&w).map(|k| (k, i + 1 - self.pos))
        } else {
            None
        }
    }

    fn dot_operator(&mut self) -> Result<(), LexError> {
        let (line, col) = (self.line, self.col);
        match self.dot_word_ahead() {
            Some((kind, len)) => {
                for _ in 0..len {
                    self.bump();
                }
                self.push(kind, line, col);
                Ok(())
            }
            None => Err(self.err(line, col, "malformed dot operator")),
        }
    }

    fn number(&mut self) -> Result<(), LexError> {
        let (line, col) = (self.line, self.col);
        let mut text = String::new();
        let mut is_real = false;
        while let Some(c) = self.peek().filter(|c| c.is_ascii_digit()) {
            text.push(c);
            self.bump();
        }
        if self.peek() == Some('.') && self.dot_word_ahead().is_none() {
            is_real = true;
            text.push('.');
            self.bump();
            while let Some(c) = self.peek().filter(|c| c.is_ascii_digit()) {
                text.push(c);
                self.bump();
            }
        }
        if matches!(self.peek(), Some('E' | 'e' | 'D' | 'd')) {
            let next = self.peek_at(1);
            let after = self.peek_at(2);
            let exponent_follows = next.is_some_and(|c| c.is_ascii_digit())
                || (matches!(next, Some('+' | '-')) && after.is_some_and(|c| c.is_ascii_digit()));
            if exponent_follows {
                is_real = true;
                self.bump();
                text.push('e');
                if let Some(sign @ ('+' | '-')) = self.peek() {
                    text.push(sign);
                    self.bump();
                }
                while let Some(c) = self.peek().filter(|c| c.is_ascii_digit()) {
                    text.push(c);
                    self.bump();
                }
            } else if is_real || next.is_none_or(|c| !c.is_ascii_alphanumeric()) {
                return Err(self.err(line, col, "malformed exponent in real literal"));
            }
        }
        if self.peek().is_some_and(|c| c.is_ascii_alphabetic() || c == '_') {
            return Err(self.err(line, col, "malformed numeric literal"));
        }
        let kind = if is_real {
            let v: f64 = text
                .parse()
                .map_err(|_| self.err(line, col, format!("malformed real literal `{text}`")))?;
            TokenKind::RealLit(v)
        } else {
            let v: i64 = text
                .parse()
                .map_err(|_| self.err(line, col, format!("integer literal `{text}` out of range")))?;
            TokenKind::IntLit(v)
        };
        self.push(kind, line, col);
        Ok(())
    }

    fn string(&mut self, quote: char) -> Result<(), LexError> {
        let (line, col) = (self.line, self.col);
        self.bump();
        let mut s = String::new();
        loop {
            match self.bump() {
                None | Some('\n') => return Err(self.err(line, col, "unterminated string")),
                Some(c) if c == quote => {
                    if self.peek() == Some(quote) {
                        self.bump();
                        s.push(quote);
                    } else {
                        break;
                    }
                }
                Some(c) => s.push(c),
            }
        }
        self.push(TokenKind::StrLit(s), line, col);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use TokenKind::*;

    fn kinds(src: &str) -> Vec<TokenKind> {
        tokenize(src)
            .unwrap()
            .into_iter()
            .map(|t| t.kind)
            .filter(|k| !matches!(k, Newline | Eof))
            .collect()
    }

    #[test]
    fn minimal_assignment() {
        assert_eq!(kinds("X = 1"), vec![Ident("X".into()), Assign, IntLit(1)]);
    }

    #[test]
    fn keywords_are_case_insensitive() {
        assert_eq!(
            kinds("if (a .eq. 2) then"),
            vec![If, LParen, Ident("A".into()), OpEq, IntLit(2), RParen, Then]
        );
        assert_eq!(
            kinds("IF (A .EQ. 2) THEN"),
            vec![If, LParen, Ident("A".into()), OpEq, IntLit(2), RParen, Then]
        );
    }

    #[test]
    fn real_with_exponent() {
        assert_eq!(
            kinds("X = 1.0E-6"),
            vec![Ident("X".into()), Assign, RealLit(1.0e-6)]
        );
        assert_eq!(kinds("1.5D2"), vec![RealLit(150.0)]);
        assert_eq!(kinds(".5"), vec![RealLit(0.5)]);
    }

    #[test]
    fn integer_followed_by_dot_operator() {
        assert_eq!(kinds("1.EQ.2"), vec![IntLit(1), OpEq, IntLit(2)]);
        assert_eq!(kinds("1..AND."), vec![RealLit(1.0), OpAnd]);
    }

    #[test]
    fn comment_lines_and_trailing_comments() {
        let toks = kinds("C a fixed comment\n! free\nX = 1 ! trailing\n* star\nCALL S");
        assert_eq!(
            toks,
            vec![
                Comment("a fixed comment".into()),
                Comment("free".into()),
                Ident("X".into()),
                Assign,
                IntLit(1),
                Comment("trailing".into()),
                Comment("star".into()),
                Call,
                Ident("S".into()),
            ]
        );
    }

    #[test]
    fn continuation_joins_lines() {
        let toks: Vec<_> = tokenize("X = 1 + &\n  2\n").unwrap();
        let newlines = toks.iter().filter(|t| t.kind == Newline).count();
        assert_eq!(newlines, 1);
    }

    #[test]
    fn string_with_doubled_quote() {
        assert_eq!(kinds("'it''s'"), vec![StrLit("it's".into())]);
    }

    #[test]
    fn positions_are_one_based() {
        let toks = tokenize("\n  X = 1").unwrap();
        let x = toks.iter().find(|t| t.kind == Ident("X".into())).unwrap();
        assert_eq!((x.line, x.col), (2, 3));
    }

    #[test]
    fn errors_carry_position() {
        let e = tokenize("X = 1\nY = @").unwrap_err();
        assert_eq!((e.line, e.col), (2, 5));
        assert!(tokenize("X = 'abc").is_err());
        assert!(tokenize("X = 1.0E").is_err());
        assert!(tokenize("X = A .FOO. B").is_err());
        assert!(tokenize("X = 12AB").is_err());
    }

    proptest::proptest! {
        #[test]
        fn tokenizer_is_total(s in "\\PC*") {
            let _ = tokenize(&s);
        }

        #[test]
        fn tokenizer_is_total_on_fortranish_text(s in "[A-Za-z0-9 .()=+*/'!&\n-]{0,60}") {
            match tokenize(&s) {
                Ok(toks) => proptest::prop_assert_eq!(&toks.last().unwrap().kind, &Eof),
                Err(e) => proptest::prop_assert!(e.line >= 1 && e.col >= 1),
            }
        }
    }
}
