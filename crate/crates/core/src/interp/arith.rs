//! Run-time operator semantics. `None` means the operation faults.

use crate::frontend::ast::{BinOp, UnOp};
use crate::value::Value;

pub(super) fn unary(op: UnOp, v: Value) -> Value {
    match (op, v) {
        (UnOp::Neg, Value::Int(i)) => Value::Int(0i64.wrapping_sub(i)),
        (UnOp::Neg, Value::Real(r)) => Value::Real(-r),
        (UnOp::Not, Value::Logical(b)) => Value::Logical(!b),
        (_, v) => panic!("ill-typed unary operand {v:?}"),
    }
}

fn ipow(base: i64, exp: i64) -> Option<i64> {
    match (base, exp) {
        (0, e) if e < 0 => None,
        (1, _) => Some(1),
        (-1, e) => Some(if e.rem_euclid(2) == 0 { 1 } else { -1 }),
        (_, e) if e < 0 => Some(0),
        (b, e) => {
            // square-and-multiply from the most significant bit
            let mut r: i64 = 1;
            for bit in (0..64).rev() {
                r = r.wrapping_mul(r);
                if (e >> bit) & 1 == 1 {
                    r = r.wrapping_mul(b);
                }
            }
            Some(r)
        }
    }
}

fn rpowi(x: f64, n: i64) -> f64 {
    let mut p = 1.0f64;
    let mut left = n.unsigned_abs();
    if x.is_nan() || x == 1.0 {
        p = if n == 0 { 1.0 } else { x };
        left = 0;
    } else if x == -1.0 {
        p = if left.is_multiple_of(2) { 1.0 } else { -1.0 };
        left = 0;
    }
    while left > 0 {
        p *= x;
        left -= 1;
        if p == 0.0 || p.is_infinite() {
            // further factors only flip the sign
            if x < 0.0 && left % 2 == 1 {
                p = -p;
            }
            left = 0;
        }
    }
    if n < 0 {
        1.0 / p
    } else {
        p
    }
}

fn real_of(v: &Value) -> f64 {
    match v {
        Value::Int(i) => *i as f64,
        Value::Real(r) => *r,
        other => panic!("ill-typed numeric operand {other:?}"),
    }
}

fn relate<T: PartialOrd>(op: BinOp, a: T, b: T) -> bool {
    match op {
        BinOp::Eq => a == b,
        BinOp::Ne => a != b,
        BinOp::Lt => a < b,
        BinOp::Le => a <= b,
        BinOp::Gt => a > b,
        BinOp::Ge => a >= b,
        _ => unreachable!(),
    }
}

pub(super) fn binary(op: BinOp, a: Value, b: Value) -> Option<Value> {
    use Value::*;
    if op.is_logical() {
        let (Logical(x), Logical(y)) = (&a, &b) else {
            panic!("ill-typed logical operands");
        };
        return Some(Logical(if op == BinOp::And { *x & *y } else { *x | *y }));
    }
    if op.is_relational() {
        return Some(Logical(match (&a, &b) {
            (Int(x), Int(y)) => relate(op, x, y),
            (Char(x), Char(y)) => relate(op, x, y),
            _ => relate(op, real_of(&a), real_of(&b)),
        }));
    }
    match (&a, &b) {
        (Int(x), Int(y)) => Some(Int(match op {
            BinOp::Add => x.wrapping_add(*y),
            BinOp::Sub => x.wrapping_sub(*y),
            BinOp::Mul => x.wrapping_mul(*y),
            BinOp::Div => {
                if *y == 0 {
                    return None;
                }
                x.wrapping_div(*y)
            }
            BinOp::Pow => ipow(*x, *y)?,
            _ => unreachable!(),
        })),
        (Real(x), Int(n)) if op == BinOp::Pow => Some(Real(rpowi(*x, *n))),
        _ => {
            let (x, y) = (real_of(&a), real_of(&b));
            Some(Real(match op {
                BinOp::Add => x + y,
                BinOp::Sub => x - y,
                BinOp::Mul => x * y,
                BinOp::Div => x / y,
                BinOp::Pow => x.powf(y),
                _ => unreachable!(),
            }))
        }
    }
}
