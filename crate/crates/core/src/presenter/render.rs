use std::fmt::Write;

use super::{Frame, LinkKind, ResultDocument};
use crate::value::SqlValue;

/// Pretty-printed JSON; field order is fixed by the document types.
pub fn render_json<T: serde::Serialize + ?Sized>(doc: &T) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("documents always serialize");
    s.push('\n');
    s
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&#39;"),
            _ => out.push(c),
        }
    }
    out
}

const STYLE: &str = "body{font-family:sans-serif;margin:1.5em}\
table{border-collapse:collapse;margin-bottom:1.5em}\
th,td{border:1px solid #bbb;padding:.25em .6em;text-align:left}\
th{background:#eee}\
.null{color:#999;font-style:italic}\
tr.drill td{border-top:none;font-size:.9em;padding-left:2em}\
.interp{color:#444}\
.diag{color:#a60}";

fn html_link(base_url: &str, href: &str) -> String {
    let sep = if href.contains('?') { '&' } else { '?' };
    format!("{}{href}{sep}_format=html", base_url.trim_end_matches('/'))
}

fn cell_html(v: &SqlValue) -> String {
    match v.display_text() {
        None => "<span class=\"null\">NULL</span>".to_owned(),
        Some(t) => escape(&t),
    }
}

fn frame_html(out: &mut String, frame: &Frame, base_url: &str) {
    let ranked = frame.rank_counts.is_some();
    let width = frame.columns.len() + usize::from(ranked);
    let _ = writeln!(out, "<section class=\"frame\">\n<h2>{}</h2>", escape(&frame.caption));
    let _ = writeln!(
        out,
        "<p class=\"count\">{} of {} rows</p>",
        frame.rows.len(),
        frame.total_rows
    );
    out.push_str("<table>\n<thead><tr>");
    for c in &frame.columns {
        let _ = write!(out, "<th>{}</th>", escape(&c.caption));
    }
    if ranked {
        out.push_str("<th>Related</th>");
    }
    out.push_str("</tr></thead>\n<tbody>\n");
    for (i, row) in frame.rows.iter().enumerate() {
        out.push_str("<tr>");
        for (j, v) in row.iter().enumerate() {
            let link = frame.links.iter().find(|l| {
                l.kind == LinkKind::FkCell
                    && l.row == i
                    && l.column_name.as_deref() == Some(frame.columns[j].name.as_str())
            });
            match link {
                Some(l) => {
                    let _ = write!(
                        out,
                        "<td><a href=\"{}\">{}</a></td>",
                        escape(&html_link(base_url, &l.href)),
                        cell_html(v)
                    );
                }
                None => {
                    let _ = write!(out, "<td>{}</td>", cell_html(v));
                }
            }
        }
        if let Some(counts) = &frame.rank_counts {
            let _ = write!(out, "<td>{}</td>", counts[i]);
        }
        out.push_str("</tr>\n");
        for l in frame
            .links
            .iter()
            .filter(|l| l.kind == LinkKind::DrillLine && l.row == i)
        {
            let _ = writeln!(
                out,
                "<tr class=\"drill\"><td colspan=\"{width}\"><a href=\"{}\">{}</a></td></tr>",
                escape(&html_link(base_url, &l.href)),
                escape(&l.label)
            );
        }
    }
    out.push_str("</tbody>\n</table>\n</section>\n");
}

fn document_html(out: &mut String, doc: &ResultDocument, base_url: &str) {
    if let Some(i) = &doc.interpretation {
        let _ = writeln!(out, "<p class=\"interp\">Interpretation: {}</p>", escape(&i.text));
        if let Some(p) = &i.join_path {
            let _ = writeln!(out, "<p class=\"interp\">Related through: {}</p>", escape(p));
        }
    }
    for d in &doc.diagnostics {
        let _ = writeln!(out, "<p class=\"diag\">{}</p>", escape(d));
    }
    if doc.frames.is_empty() {
        out.push_str("<p>No results.</p>\n");
    }
    for f in &doc.frames {
        frame_html(out, f, base_url);
    }
}

fn page(query: &str, body: &str) -> String {
    format!(
        "<!DOCTYPE html>\n<html>\n<head>\n<meta charset=\"utf-8\">\n<title>Search: {q}</title>\n<style>{STYLE}</style>\n</head>\n<body>\n<h1>Search: {q}</h1>\n{body}</body>\n</html>\n",
        q = escape(query)
    )
}

/// Self-contained HTML page. Links point at the drill endpoints under
/// `base_url` and ask for HTML back.
pub fn render_html(doc: &ResultDocument, base_url: &str) -> String {
    let mut body = String::new();
    document_html(&mut body, doc, base_url);
    page(&doc.query, &body)
}

/// One page with a section per interpretation.
pub fn render_html_groups(query: &str, docs: &[ResultDocument], base_url: &str) -> String {
    let mut body = String::new();
    for (i, d) in docs.iter().enumerate() {
        let _ = writeln!(body, "<div class=\"group\">\n<h2>Reading {}</h2>", i + 1);
        document_html(&mut body, d, base_url);
        body.push_str("</div>\n");
    }
    if docs.is_empty() {
        body.push_str("<p>No results.</p>\n");
    }
    page(query, &body)
}

fn text_cell(v: &SqlValue) -> String {
    v.display_text().unwrap_or_else(|| "NULL".to_owned())
}

/// Plain-text tables; links become numbered footnotes.
pub fn render_text(doc: &ResultDocument) -> String {
    let mut out = String::new();
    if let Some(i) = &doc.interpretation {
        let _ = writeln!(out, "Interpretation: {}", i.text);
        if let Some(p) = &i.join_path {
            let _ = writeln!(out, "Related through: {p}");
        }
    }
    for d in &doc.diagnostics {
        let _ = writeln!(out, "Note: {d}");
    }
    let mut notes: Vec<String> = Vec::new();
    for f in &doc.frames {
        let _ = writeln!(out, "\n{} ({} of {} rows)", f.caption, f.rows.len(), f.total_rows);
        let mut header: Vec<String> = f.columns.iter().map(|c| c.caption.clone()).collect();
        if f.rank_counts.is_some() {
            header.push("Related".into());
        }
        let mut lines: Vec<(Vec<String>, Vec<String>)> = Vec::new();
        for (i, row) in f.rows.iter().enumerate() {
            let mut cells = Vec::with_capacity(row.len() + 1);
            for (j, v) in row.iter().enumerate() {
                let mut cell = text_cell(v);
                for l in f.links.iter().filter(|l| {
                    l.kind == LinkKind::FkCell
                        && l.row == i
                        && l.column_name.as_deref() == Some(f.columns[j].name.as_str())
                }) {
                    notes.push(format!("{} -> {}", l.target_table, l.href));
                    let _ = write!(cell, " [{}]", notes.len());
                }
                cells.push(cell);
            }
            if let Some(c) = &f.rank_counts {
                cells.push(c[i].to_string());
            }
            let mut drills = Vec::new();
            for l in f.links.iter().filter(|l| l.kind == LinkKind::DrillLine && l.row == i) {
                notes.push(format!("{} -> {}", l.label, l.href));
                drills.push(format!("  {} [{}]", l.label, notes.len()));
            }
            lines.push((cells, drills));
        }
        let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
        for (cells, _) in &lines {
            for (w, c) in widths.iter_mut().zip(cells) {
                *w = (*w).max(c.chars().count());
            }
        }
        let rule = widths.iter().map(|w| "-".repeat(w + 2)).collect::<Vec<_>>().join("+");
        let fmt_row = |cells: &[String]| {
            cells
                .iter()
                .zip(&widths)
                .map(|(c, w)| format!(" {c:<w$} "))
                .collect::<Vec<_>>()
                .join("|")
        };
        let _ = writeln!(out, "+{rule}+");
        let _ = writeln!(out, "|{}|", fmt_row(&header));
        let _ = writeln!(out, "+{rule}+");
        for (cells, drills) in &lines {
            let _ = writeln!(out, "|{}|", fmt_row(cells));
            for d in drills {
                let _ = writeln!(out, "{d}");
            }
        }
        let _ = writeln!(out, "+{rule}+");
    }
    if doc.frames.is_empty() {
        out.push_str("No results.\n");
    }
    if !notes.is_empty() {
        out.push('\n');
        for (i, n) in notes.iter().enumerate() {
            let _ = writeln!(out, "[{}] {n}", i + 1);
        }
    }
    out
}
