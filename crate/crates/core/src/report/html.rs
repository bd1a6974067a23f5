//! Static HTML rendering of a report: an index page plus one side-by-side
//! page per residual unit.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;

use super::{Disposition, Report};
use crate::frontend::ast::{Program, ProvId};
use crate::frontend::pretty::{unit_lines, Line};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HtmlPage {
    /// Relative to the output directory.
    pub path: String,
    pub content: String,
}

const STYLE: &str = "body{font-family:sans-serif;margin:1.5em}\
table{border-collapse:collapse}td,th{border:1px solid #ccc;padding:2px 6px;vertical-align:top}\
pre{margin:0}.code td{font-family:monospace;white-space:pre;border:none}\
.removed{background:#fde8e8}.simplified{background:#fff6d6}\
.reason{color:#a00;font-size:smaller;margin-left:1em}.id{color:#888}";

fn esc(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '&' => out.push_str("&amp;"),
            '"' => out.push_str("&quot;"),
            c => out.push(c),
        }
    }
    out
}

fn page(title: &str, body: &str) -> String {
    format!(
        "<!DOCTYPE html>\n<html><head><meta charset=\"utf-8\"><title>{}</title>\
         <style>{STYLE}</style></head>\n<body>\n{body}</body></html>\n",
        esc(title)
    )
}

fn file_name(unit: &str) -> String {
    format!("{}.html", unit.to_ascii_lowercase())
}

/// Escapes `text` and links every reference to a residual unit.
fn linked(text: &str, units: &BTreeSet<String>, prefix: &str) -> String {
    let mut out = String::new();
    let bytes: Vec<char> = text.chars().collect();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_alphabetic() && (i == 0 || !is_ident(bytes[i - 1])) {
            let start = i;
            while i < bytes.len() && is_ident(bytes[i]) {
                i += 1;
            }
            let word: String = bytes[start..i].iter().collect();
            let is_call = bytes.get(i) == Some(&'(')
                || text[..text.char_indices().nth(start).map_or(0, |(b, _)| b)].ends_with("CALL ");
            if is_call && units.contains(&word) {
                let _ = write!(out, "<a href=\"{prefix}{}\">{word}</a>", file_name(&word));
            } else {
                out.push_str(&esc(&word));
            }
            continue;
        }
        out.push_str(&esc(&c.to_string()));
        i += 1;
    }
    out
}

fn is_ident(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

/// Renders `report.html` and `units/<name>.html` for every residual unit.
pub fn render_html(report: &Report, original: &Program, residual: &Program) -> Vec<HtmlPage> {
    let names: BTreeSet<String> = residual.units.iter().map(|u| u.name.clone()).collect();
    let mut pages = vec![HtmlPage {
        path: "report.html".into(),
        content: index(report, &names),
    }];
    for u in &residual.units {
        let Some(entry) = report.unit(&u.name) else { continue };
        let Some(orig) = original.unit(&entry.original) else { continue };
        let disp = report.statements.get(&u.name).cloned().unwrap_or_default();
        let mut body = String::new();
        let _ = writeln!(
            body,
            "<p><a href=\"../report.html\">report</a></p>\n<h1>{} <small>from {}</small></h1>",
            esc(&u.name),
            esc(&entry.original)
        );
        if let Some(b) = report.bindings.get(&u.name).filter(|b| !b.is_empty()) {
            body.push_str("<p>Known at entry: ");
            let parts: Vec<String> = b.iter().map(|(k, v)| format!("{} = {}", esc(k), esc(&v.render()))).collect();
            body.push_str(&parts.join(", "));
            body.push_str("</p>\n");
        }
        body.push_str("<table><tr><th>original</th><th>residual</th></tr><tr><td>\n");
        body.push_str(&pane(&unit_lines(orig), &disp, None));
        body.push_str("</td><td>\n");
        body.push_str(&pane(&unit_lines(u), &BTreeMap::new(), Some(&names)));
        body.push_str("</td></tr></table>\n");
        pages.push(HtmlPage {
            path: format!("units/{}", file_name(&u.name)),
            content: page(&u.name, &body),
        });
    }
    pages
}

fn pane(lines: &[Line], disp: &BTreeMap<ProvId, Disposition>, links: Option<&BTreeSet<String>>) -> String {
    let mut out = String::from("<table class=\"code\">\n");
    for l in lines {
        let text = " ".repeat(l.indent) + &l.text;
        let (class, note) = match l.id.and_then(|id| disp.get(&id)) {
            Some(Disposition::Removed { reason }) => (
                " class=\"removed\"",
                format!("<span class=\"reason\">{reason}</span>"),
            ),
            Some(Disposition::Simplified { .. }) => (" class=\"simplified\"", String::new()),
            _ => ("", String::new()),
        };
        let code = match links {
            Some(units) => linked(&text, units, ""),
            None => esc(&text),
        };
        let code = if note.is_empty() { code } else { format!("<del>{code}</del>{note}") };
        match l.id {
            // residual statements point back at the original's anchors
            Some(id) if links.is_some() => {
                let _ = writeln!(
                    out,
                    "<tr><td class=\"id\"><a href=\"#{id}\">{id}</a></td><td>{code}</td></tr>"
                );
            }
            Some(id) => {
                let _ = writeln!(
                    out,
                    "<tr id=\"{id}\"{class}><td class=\"id\">{id}</td><td>{code}</td></tr>"
                );
            }
            None => {
                let _ = writeln!(out, "<tr><td></td><td>{code}</td></tr>");
            }
        }
    }
    out.push_str("</table>\n");
    out
}

fn index(report: &Report, names: &BTreeSet<String>) -> String {
    let mut b = String::new();
    let s = &report.stats;
    let _ = writeln!(b, "<h1>Specialization report</h1>\n<p>policy: <code>{}</code></p>", esc(&report.policy));
    let _ = writeln!(
        b,
        "<p>units {} → {}, statements {} → {}, variants {}, cache hits {}</p>",
        s.units_original, s.units_residual, s.statements_original, s.statements_residual, s.variants, s.cache_hits
    );
    if !s.removed.is_empty() {
        b.push_str("<p>removed: ");
        let parts: Vec<String> = s.removed.iter().map(|(r, n)| format!("{r} {n}")).collect();
        b.push_str(&parts.join(", "));
        b.push_str("</p>\n");
    }
    b.push_str("<h2>Units</h2>\n<table><tr><th>unit</th><th>from</th><th>status</th><th>statements</th><th>unused</th></tr>\n");
    for u in &report.units {
        let link = if names.contains(&u.name) {
            format!("<a href=\"units/{}\">{}</a>", file_name(&u.name), esc(&u.name))
        } else {
            esc(&u.name)
        };
        let status = match u.status {
            super::UnitStatus::Specialized => "specialized",
            super::UnitStatus::Verbatim => "verbatim",
        };
        let _ = writeln!(
            b,
            "<tr><td>{link}</td><td>{}</td><td>{status}</td><td>{} → {}</td><td>{}</td></tr>",
            esc(&u.original),
            u.statements_original,
            u.statements_residual,
            esc(&u.unused_declarations.join(", "))
        );
    }
    b.push_str("</table>\n<h2>Variants</h2>\n<table><tr><th>variant</th><th>of</th><th>entry values</th><th>aliases</th></tr>\n");
    for v in &report.variants {
        let entries: Vec<String> = v.entries.iter().map(|(k, x)| format!("{} = {}", esc(k), esc(&x.render()))).collect();
        let aliases: Vec<String> = v.aliases.iter().map(|c| format!("{{{}}}", esc(&c.join(", ")))).collect();
        let _ = writeln!(
            b,
            "<tr><td><a href=\"units/{}\">{}</a></td><td>{}</td><td>{}</td><td>{}</td></tr>",
            file_name(&v.name),
            esc(&v.name),
            esc(&v.unit),
            entries.join(", "),
            aliases.join(" ")
        );
    }
    b.push_str("</table>\n");
    if !report.diagnostics.is_empty() {
        b.push_str("<h2>Diagnostics</h2>\n<ul>\n");
        for d in &report.diagnostics {
            let _ = writeln!(b, "<li>{}</li>", esc(&d.to_string()));
        }
        b.push_str("</ul>\n");
    }
    page("Specialization report", &b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraints::parse_constraints;
    use crate::frontend::parse_program;
    use crate::specializer::{specialize_program, SpecializeConfig};

    fn pages(src: &str, pec: &str) -> Vec<HtmlPage> {
        let p = parse_program(&[("m.f", src)]).unwrap();
        let s = specialize_program(&p, &parse_constraints(pec).unwrap(), &SpecializeConfig::default()).unwrap();
        render_html(&s.report, &p, &s.program)
    }

    fn panes(page: &str) -> (String, String) {
        let strip = |pane: &str| -> String {
            pane.lines()
                .filter_map(|l| l.rsplit_once("<td>").map(|(_, code)| code.trim_end_matches("</td></tr>").to_string()))
                .collect::<Vec<_>>()
                .join("\n")
        };
        let (_, rest) = page.split_once("<tr><td>\n").unwrap();
        let (orig, res) = rest.split_once("</td><td>\n").unwrap();
        (strip(orig), strip(res))
    }

    #[test]
    fn all_kept_panes_are_identical() {
        let src = "PROGRAM M\nINTEGER X\nREAD *, X\nIF (X .GT. 1) PRINT *, X\nEND\n";
        let ps = pages(src, "");
        let unit = ps.iter().find(|p| p.path == "units/m.html").unwrap();
        assert!(!unit.content.contains("<del>"));
        let (o, r) = panes(&unit.content);
        assert_eq!(o, r);
    }

    #[test]
    fn dead_branch_is_struck_through_with_its_reason() {
        let src = "PROGRAM M\nINTEGER MODE\nIF (MODE .EQ. 1) THEN\nPRINT *, 'A'\nELSE\nPRINT *, 'B'\nENDIF\nEND\n";
        let ps = pages(src, "GLOBAL: MODE = 1");
        let unit = &ps.iter().find(|p| p.path == "units/m.html").unwrap().content;
        assert!(unit.contains("<del>    PRINT *, 'B'</del><span class=\"reason\">dead-branch</span>"), "{unit}");
        assert!(unit.contains("<tr id=\"s1\">"));
        assert!(unit.contains("href=\"#s1\""));
    }

    #[test]
    fn calls_link_to_variant_pages() {
        let p = parse_program(&[
            ("m.f", "PROGRAM M\nCALL S(1)\nCALL S(2)\nEND\n"),
            ("s.f", "SUBROUTINE S(K)\nINTEGER K\nPRINT *, K\nEND\n"),
        ])
        .unwrap();
        let s = specialize_program(&p, &Default::default(), &SpecializeConfig::default()).unwrap();
        let ps = render_html(&s.report, &p, &s.program);
        let main = &ps.iter().find(|p| p.path == "units/m.html").unwrap().content;
        assert!(main.contains("CALL <a href=\"s_1.html\">S_1</a>(1)"), "{main}");
        assert!(ps.iter().any(|p| p.path == "units/s_2.html"));
        assert!(esc("<a&\"b>") == "&lt;a&amp;&quot;b&gt;");
    }
}
