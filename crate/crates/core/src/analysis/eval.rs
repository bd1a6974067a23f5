//! Abstract evaluation of expressions.

use super::domain::{AbstractEnv, AbstractValue};
use super::fold::{fold_binary, fold_unary, Folded};
use crate::frontend::ast::{BinOp, Expr};
use crate::frontend::symbols::UnitSymbols;
use crate::value::Value;

/// Value of a scalar name: PARAMETERs are always Known, arrays never.
pub fn var_value(name: &str, env: &AbstractEnv, unit: &UnitSymbols) -> AbstractValue {
    if let Some(v) = unit.parameter(name) {
        return AbstractValue::Known(v.clone());
    }
    match unit.location(name) {
        Some(loc) => env.get(&loc),
        None => AbstractValue::Unknown,
    }
}

/// Decides `v relop lit` (either operand order) from a disequality fact.
pub fn fact_decides(
    op: BinOp,
    l: &Expr,
    r: &Expr,
    env: &AbstractEnv,
    unit: &UnitSymbols,
) -> Option<bool> {
    let (name, lit) = match (l, r) {
        (Expr::Var(n), Expr::Lit(v)) | (Expr::Lit(v), Expr::Var(n)) => (n, v),
        _ => return None,
    };
    let loc = unit.location(name)?;
    if unit.var(name)?.base != lit.base_type() || !env.has_fact(&loc, lit) {
        return None;
    }
    match op {
        BinOp::Eq => Some(false),
        BinOp::Ne => Some(true),
        _ => None,
    }
}

/// Known iff every leaf needed is Known. Function calls are Unknown;
/// faulting or non-finite folds are Unknown.
pub fn eval_abstract(
    e: &Expr,
    env: &AbstractEnv,
    unit: &UnitSymbols,
) -> AbstractValue {
    match e {
        Expr::Lit(v) => AbstractValue::Known(v.clone()),
        Expr::Var(n) => var_value(n, env, unit),
        Expr::Elem(..) | Expr::Call(..) => AbstractValue::Unknown,
        Expr::Unary(op, x) => match eval_abstract(x, env, unit) {
            AbstractValue::Known(v) => folded(fold_unary(*op, &v)),
            AbstractValue::Unknown => AbstractValue::Unknown,
        },
        Expr::Binary(op, l, r) => {
            let a = eval_abstract(l, env, unit);
            let b = eval_abstract(r, env, unit);
            match (&a, &b) {
                (AbstractValue::Known(x), AbstractValue::Known(y)) => {
                    folded(fold_binary(*op, x, y))
                }
                _ => match fact_decides(*op, l, r, env, unit) {
                    Some(b) => AbstractValue::Known(Value::Logical(b)),
                    None => AbstractValue::Unknown,
                },
            }
        }
    }
}

pub fn folded(f: Folded) -> AbstractValue {
    match f {
        Folded::Value(v) => AbstractValue::Known(v),
        Folded::Fault | Folded::Opaque => AbstractValue::Unknown,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{parse_expr, parse_program, resolve_symbols, SymbolTable};

    fn setup() -> SymbolTable {
        let p = parse_program(&[(
            "m.f",
            "PROGRAM M\nINTEGER X, K\nREAL R\nPARAMETER (N = 4)\nX = 1\nEND\n",
        )])
        .unwrap();
        resolve_symbols(&p).unwrap()
    }

    fn eval(st: &SymbolTable, env: &AbstractEnv, text: &str) -> AbstractValue {
        eval_abstract(&parse_expr(text, &[]).unwrap(), env, st.unit("M"))
    }

    #[test]
    fn literal_arithmetic() {
        let st = setup();
        let env = AbstractEnv::new();
        assert_eq!(eval(&st, &env, "2 + 3"), AbstractValue::Known(Value::Int(5)));
        assert_eq!(eval(&st, &env, "7 / 2"), AbstractValue::Known(Value::Int(3)));
        assert_eq!(eval(&st, &env, "N * 2"), AbstractValue::Known(Value::Int(8)));
        assert_eq!(eval(&st, &env, "X + 1"), AbstractValue::Unknown);
        assert_eq!(eval(&st, &env, "1 / 0"), AbstractValue::Unknown);
    }

    #[test]
    fn disequality_fact_decides_comparison() {
        let st = setup();
        let mut env = AbstractEnv::new();
        env.add_fact(st.unit("M").location("X").unwrap(), Value::Int(4));
        assert_eq!(eval(&st, &env, "X .EQ. 4"), AbstractValue::Known(Value::Logical(false)));
        assert_eq!(eval(&st, &env, "4 .NE. X"), AbstractValue::Known(Value::Logical(true)));
        assert_eq!(eval(&st, &env, "X .EQ. 5"), AbstractValue::Unknown);
        assert_eq!(eval(&st, &env, "X .LT. 4"), AbstractValue::Unknown);
    }
}
