//! File-level plumbing shared by the command-line tool, the C interface and
//! tests: loading sources, constraints and keep-lists, and rendering the
//! residual program and report to files.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::constraints::{parse_constraints, ConstraintSet};
use crate::error::{ConstraintError, FrontendError};
use crate::frontend::ast::Program;
use crate::frontend::{decode_source, parse_program, pretty_print};
use crate::report::render_html;
use crate::specializer::{parse_keep_list, ReplacementPolicy, Specialization};

#[derive(Debug, Error)]
pub enum DriverError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{}: no .f sources found", .0.display())]
    NoSources(PathBuf),
    #[error(transparent)]
    Frontend(#[from] FrontendError),
    #[error("{}:{}", path.display(), constraint_suffix(err))]
    Constraint { path: PathBuf, err: ConstraintError },
    #[error("{}:{line}:1: {message}", path.display())]
    KeepList {
        path: PathBuf,
        line: u32,
        message: String,
    },
    #[error("invalid policy `{0}` (expected all, none or keep:<file>)")]
    Policy(String),
}

fn constraint_suffix(e: &ConstraintError) -> String {
    match e {
        ConstraintError::Parse { line, message } => format!("{line}:1: {message}"),
        ConstraintError::Conflicting { line, .. } => format!("{line}:1: {e}"),
        other => format!(" {other}"),
    }
}

fn read(path: &Path) -> Result<Vec<u8>, DriverError> {
    fs::read(path).map_err(|source| DriverError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn read_text(path: &Path) -> Result<String, DriverError> {
    let bytes = read(path)?;
    Ok(decode_source(path, &bytes)?)
}

/// Expands directories to their `.f` files (sorted by name).
pub fn source_files(paths: &[PathBuf]) -> Result<Vec<PathBuf>, DriverError> {
    let mut out = Vec::new();
    for p in paths {
        if p.is_dir() {
            let entries = fs::read_dir(p).map_err(|source| DriverError::Io {
                path: p.clone(),
                source,
            })?;
            let mut files: Vec<PathBuf> = entries
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| f.is_file() && f.extension().is_some_and(|x| x.eq_ignore_ascii_case("f")))
                .collect();
            if files.is_empty() {
                return Err(DriverError::NoSources(p.clone()));
            }
            files.sort();
            out.extend(files);
        } else {
            out.push(p.clone());
        }
    }
    Ok(out)
}

pub fn load_program(paths: &[PathBuf]) -> Result<Program, DriverError> {
    let files = source_files(paths)?;
    let mut texts = Vec::with_capacity(files.len());
    for f in &files {
        texts.push((f.clone(), read_text(f)?));
    }
    Ok(parse_program(&texts)?)
}

pub fn load_constraints(path: &Path) -> Result<ConstraintSet, DriverError> {
    let text = read_text(path)?;
    parse_constraints(&text).map_err(|err| DriverError::Constraint {
        path: path.to_path_buf(),
        err,
    })
}

/// Parses `all`, `none` or `keep:<file>`.
pub fn load_policy(spec: &str) -> Result<ReplacementPolicy, DriverError> {
    match spec {
        "all" => Ok(ReplacementPolicy::all()),
        "none" => Ok(ReplacementPolicy::none()),
        _ => {
            let Some(file) = spec.strip_prefix("keep:").filter(|f| !f.is_empty()) else {
                return Err(DriverError::Policy(spec.to_string()));
            };
            let path = PathBuf::from(file);
            let text = read_text(&path)?;
            let names = parse_keep_list(&text).map_err(|(line, message)| DriverError::KeepList {
                path: path.clone(),
                line,
                message,
            })?;
            Ok(ReplacementPolicy::keep(names))
        }
    }
}

/// Residual sources keyed by bare file name.
pub fn residual_sources(spec: &Specialization) -> BTreeMap<String, String> {
    let mut out: BTreeMap<String, String> = BTreeMap::new();
    for (path, text) in pretty_print(&spec.program) {
        let name = path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| "unit.f".into());
        out.entry(name).or_default().push_str(&text);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Outputs {
    pub program: bool,
    pub json: bool,
    pub html: bool,
}

/// Every output file as (relative path, contents), in a fixed order.
pub fn render_outputs(original: &Program, spec: &Specialization, what: Outputs) -> Vec<(PathBuf, String)> {
    let mut files = Vec::new();
    if what.program {
        files.extend(residual_sources(spec).into_iter().map(|(n, t)| (PathBuf::from(n), t)));
    }
    if what.json {
        files.push(("report.json".into(), spec.report.to_json()));
    }
    if what.html {
        files.extend(
            render_html(&spec.report, original, &spec.program)
                .into_iter()
                .map(|p| (PathBuf::from(p.path), p.content)),
        );
    }
    files
}

pub fn write_outputs(dir: &Path, files: &[(PathBuf, String)]) -> Result<(), DriverError> {
    for (rel, text) in files {
        let path = dir.join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|source| DriverError::Io {
                path: parent.to_path_buf(),
                source,
            })?;
        }
        fs::write(&path, text).map_err(|source| DriverError::Io { path, source })?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specializer::{specialize_program, SpecializeConfig};

    fn fixtures() -> Vec<PathBuf> {
        let mut dirs: Vec<PathBuf> = fs::read_dir(Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures"))
            .unwrap()
            .map(|e| e.unwrap().path())
            .collect();
        dirs.sort();
        dirs
    }

    #[test]
    fn emitted_sources_reparse() {
        for dir in fixtures() {
            let p = load_program(std::slice::from_ref(&dir)).unwrap();
            let cs = load_constraints(&dir.join("app.pec")).unwrap();
            for policy in ["all", "none"] {
                let config = SpecializeConfig::with_policy(load_policy(policy).unwrap());
                let s = specialize_program(&p, &cs, &config).unwrap();
                let texts: Vec<(PathBuf, String)> =
                    residual_sources(&s).into_iter().map(|(n, t)| (PathBuf::from(n), t)).collect();
                let back = parse_program(&texts).unwrap_or_else(|e| panic!("{}: {e}", dir.display()));
                assert!(back.same_structure(&s.program), "{}", dir.display());
            }
        }
    }

    #[test]
    fn policy_strings() {
        assert!(matches!(load_policy("keep:"), Err(DriverError::Policy(_))));
        assert!(matches!(load_policy("every"), Err(DriverError::Policy(_))));
        let dir = tempfile::tempdir().unwrap();
        let f = dir.path().join("k.txt");
        fs::write(&f, "PI\n2BAD\n").unwrap();
        let e = load_policy(&format!("keep:{}", f.display())).unwrap_err();
        assert!(e.to_string().contains("k.txt:2:1:"), "{e}");
    }

    #[test]
    fn directories_expand_to_sorted_sources() {
        let dir = tempfile::tempdir().unwrap();
        for n in ["b.f", "a.F", "notes.txt"] {
            fs::write(dir.path().join(n), "").unwrap();
        }
        let files = source_files(&[dir.path().to_path_buf()]).unwrap();
        let names: Vec<_> = files.iter().map(|f| f.file_name().unwrap().to_str().unwrap()).collect();
        assert_eq!(names, ["a.F", "b.f"]);
        let empty = tempfile::tempdir().unwrap();
        assert!(matches!(source_files(&[empty.path().to_path_buf()]), Err(DriverError::NoSources(_))));
    }
}
