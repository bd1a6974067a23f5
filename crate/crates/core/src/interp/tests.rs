use super::*;
use crate::frontend::{parse_program, resolve_symbols};

fn exec(files: &[(&str, &str)], input: &InputVector) -> ConcreteState {
    let p = parse_program(files).unwrap();
    let st = resolve_symbols(&p).unwrap();
    run(&p, &st, input, DEFAULT_FUEL)
}

fn trace(src: &str) -> (Vec<String>, ExitKind) {
    let s = exec(&[("m.f", src)], &InputVector::default());
    (s.observables.trace, s.observables.exit)
}

#[test]
fn arithmetic_and_print() {
    let (t, e) = trace("PROGRAM M\nINTEGER I\nREAL X\nI = 7 / 2\nX = 1.5 * 2\nPRINT *, I, X, I .GT. 2\nEND\n");
    assert_eq!(t, vec!["3 3.0 T"]);
    assert_eq!(e, ExitKind::Normal);
}

#[test]
fn do_loop_index_after_exit() {
    // trips = (10 - 1 + 3) / 3 = 4 → index ends at 1 + 4*3 = 13
    let (t, _) = trace("PROGRAM M\nINTEGER I, S\nS = 0\nDO I = 1, 10, 3\nS = S + I\nENDDO\nPRINT *, I, S\nEND\n");
    assert_eq!(t, vec!["13 22"]);
    let (t, _) = trace("PROGRAM M\nINTEGER I\nDO I = 5, 1\nPRINT *, I\nENDDO\nPRINT *, I\nEND\n");
    assert_eq!(t, vec!["5"]);
}

#[test]
fn faults_carry_statement_ids() {
    let (_, e) = trace("PROGRAM M\nINTEGER I, J\nJ = 0\nI = 1 / J\nEND\n");
    assert!(matches!(e, ExitKind::Fault(Fault { kind: FaultKind::DivByZero, .. })));
    let (_, e) = trace("PROGRAM M\nINTEGER I, J\nI = J\nEND\n");
    assert!(matches!(e, ExitKind::Fault(Fault { kind: FaultKind::Uninitialized, at: ProvId(0) })));
    let (_, e) = trace("PROGRAM M\nINTEGER I\nDO WHILE (.TRUE.)\nI = 1\nENDDO\nEND\n");
    assert!(matches!(e, ExitKind::Fault(Fault { kind: FaultKind::Timeout, .. })));
    let (_, e) = trace("PROGRAM M\nINTEGER A(3)\nA(4) = 1\nEND\n");
    assert!(matches!(e, ExitKind::Fault(Fault { kind: FaultKind::OutOfBounds, .. })));
}

#[test]
fn by_reference_and_aliasing() {
    let s = exec(
        &[
            ("m.f", "PROGRAM M\nINTEGER X, A(2)\nX = 1\nA(2) = 5\nCALL S(X, X)\nCALL S(A(2), X)\nPRINT *, X, A(2)\nEND\n"),
            ("s.f", "SUBROUTINE S(P, Q)\nINTEGER P, Q\nP = P + 1\nQ = Q * 10\nEND\n"),
        ],
        &InputVector::default(),
    );
    // S(X,X): X = 2 then X = 20; S(A(2),X): A(2) = 6, X = 200
    assert_eq!(s.observables.trace, vec!["200 6"]);
}

#[test]
fn expression_actual_is_a_temporary() {
    let s = exec(
        &[
            ("m.f", "PROGRAM M\nINTEGER X\nX = 1\nCALL S(X + 0)\nPRINT *, X\nEND\n"),
            ("s.f", "SUBROUTINE S(P)\nINTEGER P\nP = 9\nEND\n"),
        ],
        &InputVector::default(),
    );
    assert_eq!(s.observables.trace, vec!["1"]);
}

#[test]
fn common_state_and_functions() {
    let s = exec(
        &[
            ("m.f", "PROGRAM M\nINTEGER N\nCOMMON /C/ N\nN = 4\nPRINT *, SQ(N)\nEND\n"),
            ("sq.f", "INTEGER FUNCTION SQ(K)\nINTEGER K, N\nCOMMON /C/ N\nSQ = K * K\nN = N + 1\nEND\n"),
        ],
        &InputVector::default(),
    );
    assert_eq!(s.observables.trace, vec!["16"]);
    assert_eq!(s.observables.commons["C"], vec![Some(Value::Int(5))]);
}

#[test]
fn read_streams_and_presets() {
    let mut input = InputVector {
        ints: vec![3, 4],
        ..Default::default()
    };
    input.presets.insert(InputName::Main("K".into()), Value::Int(10));
    let s = exec(&[("m.f", "PROGRAM M\nINTEGER I, J, K\nREAD *, I, J\nPRINT *, I * J + K\nREAD *, I\nEND\n")], &input);
    assert_eq!(s.observables.trace, vec!["22"]);
    assert!(matches!(s.observables.exit, ExitKind::Fault(Fault { kind: FaultKind::InputExhausted, .. })));
}

#[test]
fn stop_inside_callee() {
    let s = exec(
        &[
            ("m.f", "PROGRAM M\nCALL S\nPRINT *, 1\nEND\n"),
            ("s.f", "SUBROUTINE S\nSTOP\nEND\n"),
        ],
        &InputVector::default(),
    );
    assert!(s.observables.trace.is_empty());
    assert_eq!(s.observables.exit, ExitKind::Stopped);
}
