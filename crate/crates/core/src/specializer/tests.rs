use super::*;
use crate::constraints::parse_constraints;
use crate::frontend::{parse_program, unit_text};
use crate::interp::diff_test;
use crate::report::{Disposition, RemovalReason};

fn program(files: &[(&str, &str)]) -> Program {
    parse_program(files).unwrap()
}

fn run(files: &[(&str, &str)], pec: &str, policy: ReplacementPolicy) -> (Program, Specialization) {
    let p = program(files);
    let cs = parse_constraints(pec).unwrap();
    let s = specialize_program(&p, &cs, &SpecializeConfig::with_policy(policy)).unwrap();
    (p, s)
}

const DECLS: [&str; 7] = ["INTEGER ", "REAL ", "LOGICAL ", "CHARACTER", "PARAMETER", "COMMON", "DIMENSION"];

fn body(s: &Specialization, unit: &str) -> String {
    let text = unit_text(s.program.unit(unit).expect("unit emitted"));
    text.lines()
        .filter(|l| l.starts_with("  "))
        .map(|l| l.trim())
        .filter(|l| !DECLS.iter().any(|d| l.starts_with(d)))
        .collect::<Vec<_>>()
        .join("\n")
}

fn assert_equivalent(p: &Program, s: &Specialization) {
    let v = diff_test(p, &s.program, &s.constraints, 100, 7).unwrap();
    assert!(v.passed(), "{v:?}");
}

#[test]
fn known_operand_folds() {
    let (p, s) = run(
        &[("m.f", "PROGRAM M\nINTEGER N, X\nX = N + 1\nPRINT *, X\nEND\n")],
        "GLOBAL: N = 3",
        ReplacementPolicy::all(),
    );
    assert_eq!(body(&s, "M"), "PRINT *, 4");
    assert_equivalent(&p, &s);
}

#[test]
fn parameters_survive_keep_policy() {
    let src = "PROGRAM M\nREAL R, A, PI\nPARAMETER (PI = 3.14159)\nA = 2.0*PI*R\nPRINT *, A\nEND\n";
    let (_, s) = run(&[("m.f", src)], "", ReplacementPolicy::keep(Vec::new()));
    assert!(body(&s, "M").contains("A = 2.0*PI*R"));
    let (_, s) = run(&[("m.f", src)], "", ReplacementPolicy::all());
    assert!(body(&s, "M").contains("A = 6.28318*R"), "{}", body(&s, "M"));
}

#[test]
fn times_zero_needs_an_effect_free_operand() {
    let files = [
        (
            "m.f",
            "PROGRAM M\nINTEGER X, Y, Z, C\nCOMMON /K/ C\nC = 0\nY = X*0\nZ = F(X)*0\nPRINT *, Y, Z, C\nEND\n",
        ),
        ("f.f", "INTEGER FUNCTION F(A)\nINTEGER A, C\nCOMMON /K/ C\nC = C + 1\nF = A\nEND\n"),
    ];
    let (p, s) = run(&files, "", ReplacementPolicy::all());
    let b = body(&s, "M");
    assert!(b.contains("Z = F(X)*0"), "{b}");
    assert!(b.contains("PRINT *, 0, Z, C"), "{b}");
    assert_equivalent(&p, &s);
}

#[test]
fn dead_branch_removed_with_reasons() {
    let src = "PROGRAM M\nINTEGER MODE, X\nIF (MODE .EQ. 2) THEN\nX = 1\nELSE\nX = 2\nPRINT *, 'B'\nENDIF\nPRINT *, X\nEND\n";
    let (p, s) = run(&[("m.f", src)], "GLOBAL: MODE = 2", ReplacementPolicy::none());
    let d = &s.report.statements["M"];
    assert_eq!(d[&ProvId(0)].removal(), Some(RemovalReason::BranchFolded));
    assert_eq!(d[&ProvId(2)].removal(), Some(RemovalReason::DeadBranch));
    assert_eq!(d[&ProvId(3)].removal(), Some(RemovalReason::DeadBranch));
    assert_eq!(d[&ProvId(1)], Disposition::Kept);
    assert_eq!(body(&s, "M"), "X = 1\nPRINT *, X");
    assert_equivalent(&p, &s);
}

#[test]
fn dead_temporary_removed_but_kept_when_listed() {
    let src = "PROGRAM M\nINTEGER T, X\nT = 5\nX = T + 1\nPRINT *, X\nEND\n";
    let (_, s) = run(&[("m.f", src)], "", ReplacementPolicy::all());
    assert_eq!(body(&s, "M"), "PRINT *, 6");
    assert_eq!(
        s.report.statements["M"][&ProvId(0)].removal(),
        Some(RemovalReason::DeadAssignment)
    );
    let (_, s) = run(&[("m.f", src)], "", ReplacementPolicy::keep(["T".to_string()]));
    // T stays, but X mentions no kept name and still folds
    assert_eq!(body(&s, "M"), "T = 5\nPRINT *, 6");
}

#[test]
fn effectful_right_hand_side_is_kept() {
    let files = [
        ("m.f", "PROGRAM M\nINTEGER T, Y, C\nCOMMON /K/ C\nC = 0\nY = 1\nT = F(Y)\nPRINT *, C\nEND\n"),
        ("f.f", "INTEGER FUNCTION F(A)\nINTEGER A, C\nCOMMON /K/ C\nC = C + A\nF = C\nEND\n"),
    ];
    let (p, s) = run(&files, "", ReplacementPolicy::all());
    assert!(body(&s, "M").contains("T = F(1)"));
    assert_equivalent(&p, &s);
}

#[test]
fn expression_actual_stays_an_expression() {
    let files = [
        ("m.f", "PROGRAM M\nINTEGER K\nDO K = 1, 2\nCALL S(K + 0)\nENDDO\nEND\n"),
        ("s.f", "SUBROUTINE S(A)\nINTEGER A\nA = A + 1\nPRINT *, A\nEND\n"),
    ];
    let (p, s) = run(&files, "", ReplacementPolicy::all());
    assert!(body(&s, "M").contains("CALL S(K + 0)"), "{}", body(&s, "M"));
    assert_equivalent(&p, &s);
}

#[test]
fn zero_trip_loop_keeps_its_index_when_read() {
    let src = "PROGRAM M\nINTEGER N, I\nDO I = 5, N\nPRINT *, I\nENDDO\nPRINT *, I\nEND\n";
    let (p, s) = run(&[("m.f", src)], "GLOBAL: N = 0", ReplacementPolicy::none());
    assert_eq!(body(&s, "M"), "DO I = 5, N\nENDDO\nPRINT *, I");
    assert_equivalent(&p, &s);
    let (p, s) = run(&[("m.f", src)], "GLOBAL: N = 0", ReplacementPolicy::all());
    assert_eq!(body(&s, "M"), "PRINT *, 5");
    assert_eq!(
        s.report.statements["M"][&ProvId(0)].removal(),
        Some(RemovalReason::ZeroTrip)
    );
    assert_equivalent(&p, &s);
}

#[test]
fn constant_free_program_is_all_kept() {
    let files = [
        ("m.f", "PROGRAM M\nINTEGER X, Y\nREAD *, X\nCALL S(X, Y)\nPRINT *, Y\nEND\n"),
        ("s.f", "SUBROUTINE S(A, B)\nINTEGER A, B\nB = A * A\nEND\n"),
    ];
    let (p, s) = run(&files, "", ReplacementPolicy::all());
    assert!(p.same_structure(&s.program));
    for stmts in s.report.statements.values() {
        assert!(stmts.values().all(|d| *d == Disposition::Kept));
    }
}

#[test]
fn two_keys_two_variants_and_a_cache_hit() {
    let files = [
        (
            "m.f",
            "PROGRAM M\nINTEGER R\nCALL S(1, R)\nCALL S(2, R)\nCALL S(1, R)\nPRINT *, R\nEND\n",
        ),
        (
            "s.f",
            "SUBROUTINE S(K, R)\nINTEGER K, R\nIF (K .EQ. 1) THEN\nR = 10\nELSE\nR = 20\nENDIF\nEND\n",
        ),
    ];
    let (p, s) = run(&files, "", ReplacementPolicy::all());
    let names: Vec<&str> = s.report.variants.iter().filter(|v| v.unit == "S").map(|v| v.name.as_str()).collect();
    assert_eq!(names, ["S_1", "S_2"]);
    assert_eq!(s.report.stats.cache_hits, 1);
    assert_eq!(body(&s, "S_1"), "R = 10");
    assert_eq!(body(&s, "S_2"), "R = 20");
    assert_equivalent(&p, &s);
}

#[test]
fn aliased_actuals_are_not_folded_through() {
    let files = [
        ("m.f", "PROGRAM M\nINTEGER X\nX = 2\nCALL S(X, X)\nPRINT *, X\nEND\n"),
        ("s.f", "SUBROUTINE S(A, B)\nINTEGER A, B\nB = 7\nPRINT *, A\nEND\n"),
    ];
    let (p, s) = run(&files, "", ReplacementPolicy::all());
    let v = s.report.variants.iter().find(|v| v.unit == "S").unwrap();
    assert_eq!(v.aliases, vec![vec!["A".to_string(), "B".to_string()]]);
    assert!(body(&s, &v.name).contains("PRINT *, A"));
    assert_equivalent(&p, &s);
}

#[test]
fn disequality_fact_fires_and_is_reported() {
    let src = "PROGRAM M\nINTEGER K\nIF (K .EQ. 3) THEN\nPRINT *, 'A'\nELSE\nIF (K .EQ. 3) PRINT *, 'B'\nENDIF\nEND\n";
    let (p, s) = run(&[("m.f", src)], "", ReplacementPolicy::all());
    assert_eq!(s.report.facts_fired.len(), 1);
    assert_eq!(s.report.facts_fired[0].location, "K");
    assert!(!body(&s, "M").contains("'B'"));
    assert_equivalent(&p, &s);
}

#[test]
fn unreachable_units_are_copied_verbatim() {
    let files = [
        ("m.f", "PROGRAM M\nINTEGER MODE\nIF (MODE .EQ. 1) CALL A\nEND\n"),
        ("a.f", "SUBROUTINE A\nCALL B\nEND\n"),
        ("b.f", "SUBROUTINE B\nPRINT *, 'B'\nEND\n"),
    ];
    let (p, s) = run(&files, "GLOBAL: MODE = 2", ReplacementPolicy::all());
    for name in ["A", "B"] {
        let u = s.report.unit(name).unwrap();
        assert_eq!(u.status, crate::report::UnitStatus::Verbatim);
        assert_eq!(s.program.unit(name), p.unit(name));
    }
    assert!(check_structure(&p, &s).is_empty());
}

#[test]
fn recursion_with_changing_keys_terminates() {
    let files = [
        ("m.f", "PROGRAM M\nINTEGER R\nR = 0\nCALL S(3, R)\nPRINT *, R\nEND\n"),
        ("s.f", "SUBROUTINE S(N, R)\nINTEGER N, R\nIF (N .GT. 0) THEN\nR = R + N\nCALL S(N - 1, R)\nENDIF\nEND\n"),
    ];
    let p = program(&files);
    let s = specialize_program(&p, &ConstraintSet::new(), &SpecializeConfig::default()).unwrap();
    assert!(check_structure(&p, &s).is_empty());
    assert_equivalent(&p, &s);
}

#[test]
fn keep_list_parsing() {
    let k = parse_keep_list("# names\nPi\n\n  nstep # trailing\n").unwrap();
    assert_eq!(k.into_iter().collect::<Vec<_>>(), ["NSTEP", "PI"]);
    assert_eq!(parse_keep_list("A\n1X\n").unwrap_err().0, 2);
}

#[test]
fn policy_display() {
    assert_eq!(ReplacementPolicy::all().to_string(), "all");
    assert_eq!(ReplacementPolicy::none().to_string(), "none");
    assert_eq!(ReplacementPolicy::keep(["b".into(), "A".into()]).to_string(), "keep:A,B");
}
