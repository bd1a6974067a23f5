//! Lexing, parsing, symbol resolution and printing of MiniF77.

pub mod ast;
pub mod lexer;
pub mod parser;
pub mod pretty;
pub mod symbols;

pub use ast::*;
pub use lexer::{tokenize, Token, TokenKind};
pub use parser::{decode_source, parse_expr, parse_program};
pub use pretty::{expr_text, pretty_print, unit_text};
pub use symbols::{resolve_symbols, SymbolTable, UnitSymbols, VarInfo, VarKind};
