use std::ffi::{c_char, CStr, CString};
use std::ptr;

use residua_ffi::*;

fn cstr(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    let p = residua_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

unsafe fn take(p: *mut c_char) -> String {
    let s = CStr::from_ptr(p).to_string_lossy().into_owned();
    residua_string_free(p);
    s
}

const MAIN: &str = "PROGRAM M\n  INTEGER MODE, X\n  READ *, X\n  IF (MODE .EQ. 2) THEN\n    CALL SHOW(X)\n  ELSE\n    PRINT *, 'OTHER'\n  ENDIF\nEND\n";
const SHOW: &str = "SUBROUTINE SHOW(V)\n  INTEGER V\n  PRINT *, V * 2\nEND\n";

unsafe fn program() -> *mut ResiduaProgram {
    let names = [cstr("m.f"), cstr("show.f")];
    let texts = [cstr(MAIN), cstr(SHOW)];
    let np: Vec<*const c_char> = names.iter().map(|s| s.as_ptr()).collect();
    let tp: Vec<*const c_char> = texts.iter().map(|s| s.as_ptr()).collect();
    let mut p = ptr::null_mut();
    assert_eq!(residua_program_parse(np.as_ptr(), tp.as_ptr(), 2, &mut p), ResiduaStatus::Ok);
    assert!(residua_last_error().is_null());
    p
}

#[test]
fn specialize_round_trip() {
    unsafe {
        let p = program();
        let mut c = ptr::null_mut();
        let pec = cstr("GLOBAL:\n  MODE = 2\n");
        assert_eq!(residua_constraints_parse(pec.as_ptr(), &mut c), ResiduaStatus::Ok);
        let mut s = ptr::null_mut();
        assert_eq!(residua_specialize(p, c, ptr::null(), 0, &mut s), ResiduaStatus::Ok);

        let mut out = ptr::null_mut();
        assert_eq!(residua_specialization_source(s, &mut out), ResiduaStatus::Ok);
        let src = take(out);
        assert!(src.contains("CALL SHOW(X)"), "{src}");
        assert!(!src.contains("OTHER"));

        assert_eq!(residua_specialization_report_json(s, &mut out), ResiduaStatus::Ok);
        let json = take(out);
        assert!(json.starts_with('{') && json.contains("\"dead-branch\""), "{json}");

        assert_eq!(residua_specialization_verify(s, 50, 1), ResiduaStatus::Ok);

        let dir = tempfile::tempdir().unwrap();
        let d = cstr(dir.path().to_str().unwrap());
        let what = RESIDUA_EMIT_PROGRAM | RESIDUA_EMIT_JSON;
        assert_eq!(residua_specialization_write(s, d.as_ptr(), what), ResiduaStatus::Ok);
        assert!(dir.path().join("report.json").exists());
        assert!(dir.path().join("m.f").exists());
        assert!(!dir.path().join("report.html").exists());

        residua_specialization_free(s);
        residua_constraints_free(c);
        residua_program_free(p);
    }
}

#[test]
fn errors_carry_status_and_message() {
    unsafe {
        let mut p = ptr::null_mut();
        let names = [cstr("bad.f")];
        let texts = [cstr("PROGRAM M\n  X = = 1\nEND\n")];
        let np = [names[0].as_ptr()];
        let tp = [texts[0].as_ptr()];
        assert_eq!(residua_program_parse(np.as_ptr(), tp.as_ptr(), 1, &mut p), ResiduaStatus::Syntax);
        assert!(p.is_null());
        assert!(last_error().starts_with("bad.f:2:"), "{}", last_error());

        let mut c = ptr::null_mut();
        let bad = cstr("GLOBAL:\n  = 3\n");
        assert_eq!(residua_constraints_parse(bad.as_ptr(), &mut c), ResiduaStatus::Constraint);
        let missing = cstr("/nonexistent/app.pec");
        assert_eq!(residua_constraints_load(missing.as_ptr(), &mut c), ResiduaStatus::Io);
        assert!(last_error().contains("/nonexistent/app.pec"));

        let prog = program();
        let mut s = ptr::null_mut();
        let policy = cstr("sometimes");
        assert_eq!(residua_specialize(prog, ptr::null(), policy.as_ptr(), 0, &mut s), ResiduaStatus::Policy);
        assert_eq!(residua_specialize(ptr::null(), ptr::null(), ptr::null(), 0, &mut s), ResiduaStatus::NullArgument);
        assert_eq!(residua_specialize(prog, ptr::null(), ptr::null(), 0, ptr::null_mut()), ResiduaStatus::NullArgument);
        let invalid = [0xffu8, 0];
        assert_eq!(
            residua_specialize(prog, ptr::null(), invalid.as_ptr().cast(), 0, &mut s),
            ResiduaStatus::InvalidUtf8
        );
        residua_program_free(prog);
        residua_program_free(ptr::null_mut());
        residua_string_free(ptr::null_mut());
    }
}

#[test]
fn errors_are_per_thread() {
    unsafe {
        let mut c = ptr::null_mut();
        let bad = cstr("nonsense");
        assert_ne!(residua_constraints_parse(bad.as_ptr(), &mut c), ResiduaStatus::Ok);
    }
    let other = std::thread::spawn(|| residua_last_error().is_null()).join().unwrap();
    assert!(other);
    assert!(!residua_last_error().is_null());
}

#[test]
fn version_matches_the_crate() {
    let v = unsafe { CStr::from_ptr(residua_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}
