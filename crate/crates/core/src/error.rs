use std::path::PathBuf;

use thiserror::Error;

use crate::frontend::ast::SourcePos;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{col}: {message}")]
pub struct LexError {
    pub line: u32,
    pub col: u32,
    pub message: String,
}

/// Errors from reading, parsing and resolving MiniF77 sources.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum FrontendError {
    #[error("{}:{}", file.display(), err)]
    Lex { file: PathBuf, err: LexError },
    #[error("{}:{line}:{col}: {message}", file.display())]
    Parse {
        file: PathBuf,
        line: u32,
        col: u32,
        message: String,
    },
    #[error("{}: source is not valid UTF-8", file.display())]
    InvalidUtf8 { file: PathBuf },
    #[error("{}: unit {name} is defined more than once (first in {})", file.display(), first.display())]
    DuplicateUnit {
        name: String,
        file: PathBuf,
        first: PathBuf,
    },
    #[error("program has no PROGRAM unit")]
    MissingMain,
    #[error("program has more than one PROGRAM unit ({0} and {1})")]
    MultipleMain(String, String),
    #[error("{}{kind}", at_prefix(.pos))]
    Semantic {
        pos: Option<SourcePos>,
        kind: SemanticError,
    },
}

fn at_prefix(pos: &Option<SourcePos>) -> String {
    pos.as_ref().map(|p| format!("{p}: ")).unwrap_or_default()
}

impl FrontendError {
    pub fn semantic(kind: SemanticError, pos: Option<SourcePos>) -> Self {
        FrontendError::Semantic { pos, kind }
    }
}

/// Symbol-resolution and type errors.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SemanticError {
    #[error("COMMON /{block}/ layout in {unit} ({found}) differs from {first_unit} ({expected})")]
    CommonLayoutMismatch {
        block: String,
        unit: String,
        first_unit: String,
        expected: String,
        found: String,
    },
    #[error("{unit}: undeclared variable {name}")]
    UndeclaredVariable { unit: String, name: String },
    #[error("{unit}: {name} is redefined or assigned but is a PARAMETER")]
    ParameterRedefinition { unit: String, name: String },
    #[error("{unit}: {message}")]
    Declaration { unit: String, message: String },
    #[error("{unit}: type error: {message}")]
    Type { unit: String, message: String },
    #[error("{unit}: call to undefined procedure {callee}")]
    UnresolvedCallee { unit: String, callee: String },
    #[error("{unit}: {callee} expects {expected} arguments, got {found}")]
    ArityMismatch {
        unit: String,
        callee: String,
        expected: usize,
        found: usize,
    },
    #[error("{unit}: argument {position} of {callee}: {message}")]
    ArgumentTypeMismatch {
        unit: String,
        callee: String,
        position: usize,
        message: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConstraintError {
    #[error("line {line}: {message}")]
    Parse { line: u32, message: String },
    #[error("line {line}: conflicting constraint for {name} in {scope}")]
    Conflicting {
        line: u32,
        scope: String,
        name: String,
    },
    #[error("constraint on {name} in {scope}: {reason}")]
    UnknownConstrainedName {
        scope: String,
        name: String,
        reason: String,
    },
    #[error("constraint {name} = {value} in {scope}: {name} is {declared}")]
    TypeMismatch {
        scope: String,
        name: String,
        value: String,
        declared: String,
    },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecializeError {
    #[error(transparent)]
    Frontend(#[from] FrontendError),
    #[error(transparent)]
    Constraint(#[from] ConstraintError),
    #[error("{unit}: more than {cap} specialized variants requested")]
    RecursionDepthExceeded { unit: String, cap: usize },
    #[error("internal error: residual program is invalid: {0}")]
    InvalidResidual(String),
}
