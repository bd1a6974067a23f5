//! Compile-time folding of operators on Known operands.
//!
//! The interpreter has its own implementation of the same arithmetic; the
//! two are cross-checked by property tests rather than sharing code.

use crate::frontend::ast::{BinOp, UnOp};
use crate::value::Value;

#[derive(Debug, Clone, PartialEq)]
pub enum Folded {
    Value(Value),
    /// Evaluation would fault at run time; the residual must keep it.
    Fault,
    /// Not representable as a literal (non-finite real).
    Opaque,
}

fn real(v: Value) -> Folded {
    match v {
        Value::Real(r) if !r.is_finite() => Folded::Opaque,
        v => Folded::Value(v),
    }
}

pub fn fold_unary(op: UnOp, v: &Value) -> Folded {
    match (op, v) {
        (UnOp::Neg, Value::Int(i)) => Folded::Value(Value::Int(i.wrapping_neg())),
        (UnOp::Neg, Value::Real(r)) => real(Value::Real(-r)),
        (UnOp::Not, Value::Logical(b)) => Folded::Value(Value::Logical(!b)),
        _ => Folded::Opaque,
    }
}

fn as_f64(v: &Value) -> Option<f64> {
    match v {
        Value::Int(i) => Some(*i as f64),
        Value::Real(r) => Some(*r),
        _ => None,
    }
}

/// `base ** exp` on integers: exponentiation by squaring, which agrees with
/// repeated wrapping multiplication.
fn int_pow(base: i64, exp: i64) -> Option<i64> {
    if exp < 0 {
        return match base {
            0 => None,
            1 => Some(1),
            -1 => Some(if exp % 2 == 0 { 1 } else { -1 }),
            _ => Some(0),
        };
    }
    let (mut acc, mut b, mut e) = (1i64, base, exp as u64);
    while e > 0 {
        if e & 1 == 1 {
            acc = acc.wrapping_mul(b);
        }
        b = b.wrapping_mul(b);
        e >>= 1;
    }
    Some(acc)
}

/// `x ** n` for a real base and integer exponent, by repeated
/// multiplication. Stops early once the product is stuck.
fn real_powi(x: f64, n: i64) -> f64 {
    if x == 1.0 || x.is_nan() {
        return if n == 0 { 1.0 } else { x };
    }
    if x == -1.0 {
        return if n % 2 == 0 { 1.0 } else { -1.0 };
    }
    let mut acc = 1.0f64;
    let mut k = n.unsigned_abs();
    while k > 0 {
        acc *= x;
        k -= 1;
        if acc == 0.0 || acc.is_infinite() {
            if k % 2 == 1 && x < 0.0 {
                acc = -acc;
            }
            break;
        }
    }
    if n < 0 {
        1.0 / acc
    } else {
        acc
    }
}

pub fn fold_binary(op: BinOp, a: &Value, b: &Value) -> Folded {
    use Value::*;
    match op {
        BinOp::And | BinOp::Or => match (a, b) {
            (Logical(x), Logical(y)) => Folded::Value(Logical(if op == BinOp::And {
                *x && *y
            } else {
                *x || *y
            })),
            _ => Folded::Opaque,
        },
        _ if op.is_relational() => {
            let r = match (a, b) {
                (Int(x), Int(y)) => cmp_op(op, x, y),
                (Char(x), Char(y)) => cmp_op(op, x, y),
                _ => match (as_f64(a), as_f64(b)) {
                    (Some(x), Some(y)) => cmp_f64(op, x, y),
                    _ => return Folded::Opaque,
                },
            };
            Folded::Value(Logical(r))
        }
        _ => match (a, b) {
            (Int(x), Int(y)) => match op {
                BinOp::Add => Folded::Value(Int(x.wrapping_add(*y))),
                BinOp::Sub => Folded::Value(Int(x.wrapping_sub(*y))),
                BinOp::Mul => Folded::Value(Int(x.wrapping_mul(*y))),
                BinOp::Div if *y == 0 => Folded::Fault,
                BinOp::Div => Folded::Value(Int(x.wrapping_div(*y))),
                BinOp::Pow => int_pow(*x, *y).map_or(Folded::Fault, |v| Folded::Value(Int(v))),
                _ => Folded::Opaque,
            },
            (Real(x), Int(n)) if op == BinOp::Pow => real(Real(real_powi(*x, *n))),
            _ => match (as_f64(a), as_f64(b)) {
                (Some(x), Some(y)) => real(Real(match op {
                    BinOp::Add => x + y,
                    BinOp::Sub => x - y,
                    BinOp::Mul => x * y,
                    BinOp::Div => x / y,
                    BinOp::Pow => x.powf(y),
                    _ => return Folded::Opaque,
                })),
                _ => Folded::Opaque,
            },
        },
    }
}

fn cmp_op<T: PartialOrd>(op: BinOp, x: T, y: T) -> bool {
    match op {
        BinOp::Eq => x == y,
        BinOp::Ne => x != y,
        BinOp::Lt => x < y,
        BinOp::Le => x <= y,
        BinOp::Gt => x > y,
        BinOp::Ge => x >= y,
        _ => unreachable!("not relational"),
    }
}

fn cmp_f64(op: BinOp, x: f64, y: f64) -> bool {
    cmp_op(op, x, y)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: Folded) -> Value {
        match x {
            Folded::Value(v) => v,
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn integer_division_truncates_toward_zero() {
        assert_eq!(v(fold_binary(BinOp::Div, &Value::Int(7), &Value::Int(2))), Value::Int(3));
        assert_eq!(v(fold_binary(BinOp::Div, &Value::Int(-7), &Value::Int(2))), Value::Int(-3));
        assert_eq!(fold_binary(BinOp::Div, &Value::Int(1), &Value::Int(0)), Folded::Fault);
    }

    #[test]
    fn real_division_by_zero_is_not_folded() {
        assert_eq!(fold_binary(BinOp::Div, &Value::Real(1.0), &Value::Int(0)), Folded::Opaque);
    }

    #[test]
    fn integer_powers() {
        let p = |a, b| fold_binary(BinOp::Pow, &Value::Int(a), &Value::Int(b));
        assert_eq!(v(p(2, 10)), Value::Int(1024));
        assert_eq!(v(p(2, -1)), Value::Int(0));
        assert_eq!(v(p(-1, -3)), Value::Int(-1));
        assert_eq!(p(0, -1), Folded::Fault);
        // repeated multiplication wraps
        assert_eq!(v(p(3, 41)), Value::Int((0..41).fold(1i64, |a, _| a.wrapping_mul(3))));
    }

    #[test]
    fn real_integer_power_is_repeated_multiplication() {
        let got = v(fold_binary(BinOp::Pow, &Value::Real(1.1), &Value::Int(3)));
        assert_eq!(got, Value::Real(1.1 * 1.1 * 1.1));
        let inv = v(fold_binary(BinOp::Pow, &Value::Real(2.0), &Value::Int(-2)));
        assert_eq!(inv, Value::Real(0.25));
    }

    #[test]
    fn mixed_arithmetic_promotes() {
        assert_eq!(v(fold_binary(BinOp::Add, &Value::Int(1), &Value::Real(0.5))), Value::Real(1.5));
        assert_eq!(
            v(fold_binary(BinOp::Lt, &Value::Int(1), &Value::Real(1.5))),
            Value::Logical(true)
        );
    }
}
