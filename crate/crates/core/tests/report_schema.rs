use std::path::PathBuf;

use residua::driver;
use residua::report::JSON_SCHEMA;
use residua::specializer::{specialize_program, ReplacementPolicy, SpecializeConfig};

#[test]
fn every_fixture_report_matches_the_schema() {
    let schema: serde_json::Value = serde_json::from_str(JSON_SCHEMA).unwrap();
    let validator = jsonschema::validator_for(&schema).expect("schema compiles");
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let mut seen = 0;
    for entry in std::fs::read_dir(root).unwrap() {
        let dir = entry.unwrap().path();
        let program = driver::load_program(std::slice::from_ref(&dir)).unwrap();
        let cs = driver::load_constraints(&dir.join("app.pec")).unwrap();
        for policy in [ReplacementPolicy::all(), ReplacementPolicy::none(), ReplacementPolicy::keep(["PI".into()])] {
            let s = specialize_program(&program, &cs, &SpecializeConfig::with_policy(policy)).unwrap();
            let report: serde_json::Value = serde_json::from_str(&s.report.to_json()).unwrap();
            let errors: Vec<String> = validator.iter_errors(&report).map(|e| e.to_string()).collect();
            assert!(errors.is_empty(), "{}: {errors:?}", dir.display());
            seen += 1;
        }
    }
    assert!(seen >= 36);
}

#[test]
fn schema_rejects_unknown_reasons() {
    let schema: serde_json::Value = serde_json::from_str(JSON_SCHEMA).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/dead_branch");
    let program = driver::load_program(std::slice::from_ref(&dir)).unwrap();
    let cs = driver::load_constraints(&dir.join("app.pec")).unwrap();
    let s = specialize_program(&program, &cs, &SpecializeConfig::default()).unwrap();
    let text = s.report.to_json().replace("\"dead-branch\"", "\"vanished\"");
    let report: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert!(!validator.is_valid(&report));
}
