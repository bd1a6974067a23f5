//! Typed scalar values shared by literals, the abstract domain and the
//! interpreter.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};

use serde::{Serialize, Serializer};

/// Scalar base types of MiniF77.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum BaseType {
    Integer,
    Real,
    Logical,
    Character,
}

impl BaseType {
    pub fn keyword(self) -> &'static str {
        match self {
            BaseType::Integer => "INTEGER",
            BaseType::Real => "REAL",
            BaseType::Logical => "LOGICAL",
            BaseType::Character => "CHARACTER",
        }
    }

    pub fn is_numeric(self) -> bool {
        matches!(self, BaseType::Integer | BaseType::Real)
    }
}

impl fmt::Display for BaseType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

/// A typed constant.
///
/// Reals compare by bit pattern so that `-0.0 != 0.0` and `NaN == NaN`;
/// folding must never change floating behavior, and equality here is the
/// equality the differential tester uses.
#[derive(Debug, Clone)]
pub enum Value {
    Int(i64),
    Real(f64),
    Logical(bool),
    Char(String),
}

impl Value {
    pub fn base_type(&self) -> BaseType {
        match self {
            Value::Int(_) => BaseType::Integer,
            Value::Real(_) => BaseType::Real,
            Value::Logical(_) => BaseType::Logical,
            Value::Char(_) => BaseType::Character,
        }
    }

    fn rank(&self) -> u8 {
        match self {
            Value::Int(_) => 0,
            Value::Real(_) => 1,
            Value::Logical(_) => 2,
            Value::Char(_) => 3,
        }
    }

    /// Assignment conversion into a variable of type `ty`.
    ///
    /// Integer to real widens, real to integer truncates toward zero
    /// (saturating). Non-numeric conversions return `None`.
    pub fn convert_to(&self, ty: BaseType) -> Option<Value> {
        match (self, ty) {
            (Value::Int(i), BaseType::Integer) => Some(Value::Int(*i)),
            (Value::Int(i), BaseType::Real) => Some(Value::Real(*i as f64)),
            (Value::Real(r), BaseType::Real) => Some(Value::Real(*r)),
            (Value::Real(r), BaseType::Integer) => Some(Value::Int(r.trunc() as i64)),
            (Value::Logical(b), BaseType::Logical) => Some(Value::Logical(*b)),
            (Value::Char(s), BaseType::Character) => Some(Value::Char(s.clone())),
            _ => None,
        }
    }

    /// The additive zero of a numeric type, or the "false" of a logical.
    pub fn zero_of(ty: BaseType) -> Value {
        match ty {
            BaseType::Integer => Value::Int(0),
            BaseType::Real => Value::Real(0.0),
            BaseType::Logical => Value::Logical(false),
            BaseType::Character => Value::Char(String::new()),
        }
    }

    pub fn is_negative(&self) -> bool {
        match self {
            Value::Int(i) => *i < 0,
            Value::Real(r) => r.is_sign_negative(),
            _ => false,
        }
    }

    /// Rendering used by PRINT. Reals use the shortest round-trip form so
    /// that distinct bit patterns print distinctly.
    pub fn render(&self) -> String {
        match self {
            Value::Int(i) => i.to_string(),
            Value::Real(r) => format_real(*r),
            Value::Logical(true) => "T".to_string(),
            Value::Logical(false) => "F".to_string(),
            Value::Char(s) => s.clone(),
        }
    }
}

impl PartialEq for Value {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Value::Int(a), Value::Int(b)) => a == b,
            (Value::Real(a), Value::Real(b)) => a.to_bits() == b.to_bits(),
            (Value::Logical(a), Value::Logical(b)) => a == b,
            (Value::Char(a), Value::Char(b)) => a == b,
            _ => false,
        }
    }
}

impl Eq for Value {}

impl Hash for Value {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.rank().hash(state);
        match self {
            Value::Int(i) => i.hash(state),
            Value::Real(r) => r.to_bits().hash(state),
            Value::Logical(b) => b.hash(state),
            Value::Char(s) => s.hash(state),
        }
    }
}

impl PartialOrd for Value {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Value {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Value::Int(a), Value::Int(b)) => a.cmp(b),
            (Value::Real(a), Value::Real(b)) => a.total_cmp(b),
            (Value::Logical(a), Value::Logical(b)) => a.cmp(b),
            (Value::Char(a), Value::Char(b)) => a.cmp(b),
            _ => self.rank().cmp(&other.rank()),
        }
    }
}

/// Source-literal form (`3`, `-1.5`, `1.0E-6`, `.TRUE.`, `'it''s'`).
impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(i) => write!(f, "{i}"),
            Value::Real(r) => f.write_str(&format_real(*r)),
            Value::Logical(true) => f.write_str(".TRUE."),
            Value::Logical(false) => f.write_str(".FALSE."),
            Value::Char(s) => write!(f, "'{}'", s.replace('\'', "''")),
        }
    }
}

impl Serialize for Value {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

/// Formats a real so that it re-lexes as a real literal with the same bits:
/// always a decimal point, exponent marker `E`.
pub fn format_real(x: f64) -> String {
    if x.is_nan() {
        return "NAN".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "INF" } else { "-INF" }.to_string();
    }
    let s = format!("{x:?}");
    match s.split_once('e') {
        Some((mantissa, exp)) => {
            let mantissa = if mantissa.contains('.') {
                mantissa.to_string()
            } else {
                format!("{mantissa}.0")
            };
            format!("{mantissa}E{exp}")
        }
        None => s,
    }
}
