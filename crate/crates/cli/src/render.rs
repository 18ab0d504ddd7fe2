//! Plain-text histograms for terminal output.

use binsmith_core::engine::{BinResponse, Comparison, Panel};
use binsmith_core::{BinCounts, BinScheme, Provenance};

pub const BAR_WIDTH: usize = 60;
const GUTTER: &str = "    ";

fn provenance(p: &Provenance) -> String {
    match p.reference() {
        "" => p.kind().to_string(),
        r => format!("{}({r})", p.kind()),
    }
}

fn bar(count: u64, max: u64) -> String {
    if max == 0 || count == 0 {
        return String::new();
    }
    let len = ((count as f64 / max as f64) * BAR_WIDTH as f64).round() as usize;
    "#".repeat(len.max(1))
}

/// One row per bin: label, a bar scaled to the largest count, and the
/// right-aligned count. Values outside a closed scheme get their own rows.
pub fn histogram(scheme: &BinScheme, counts: &BinCounts) -> Vec<String> {
    let mut rows: Vec<(String, u64)> = scheme
        .labels
        .iter()
        .cloned()
        .zip(counts.counts.iter().copied())
        .collect();
    if counts.below > 0 {
        rows.insert(0, ("below range".into(), counts.below));
    }
    if counts.above > 0 {
        rows.push(("above range".into(), counts.above));
    }
    let label_width = rows.iter().map(|(l, _)| l.chars().count()).max().unwrap_or(0);
    let count_width = rows.iter().map(|(_, c)| c.to_string().len()).max().unwrap_or(1);
    let max = rows.iter().map(|(_, c)| *c).max().unwrap_or(0);
    rows.iter()
        .map(|(label, c)| {
            format!(
                "{label:<label_width$} |{:<BAR_WIDTH$}| {c:>count_width$}",
                bar(*c, max)
            )
        })
        .collect()
}

pub fn render_bin(r: &BinResponse) -> String {
    let mut out = format!(
        "{}: {}, {} bins, n={} missing={}\n",
        r.field,
        provenance(&r.scheme.provenance),
        r.scheme.bin_count(),
        r.profile.n,
        r.profile.missing
    );
    if let Some(note) = &r.note {
        out.push_str(&format!("note: {note}\n"));
    }
    if !r.violations.is_empty() {
        out.push_str(&format!("violations: {}\n", r.violations.join(", ")));
    }
    for line in histogram(&r.scheme, &r.counts) {
        out.push_str(&line);
        out.push('\n');
    }
    out
}

fn panel_lines(title: &str, panel: &Panel) -> Vec<String> {
    let mut lines = vec![
        title.to_string(),
        format!("{}, {} bins", provenance(&panel.scheme.provenance), panel.scheme.bin_count()),
    ];
    lines.extend(histogram(&panel.scheme, &panel.counts));
    lines
}

/// Semantic panel on the left, default on the right. When nothing matched
/// the default fills both panels and a note says so.
pub fn render_compare(c: &Comparison) -> String {
    let mut out = format!("{}\n", c.field);
    let left = match &c.semantic {
        Some(p) => panel_lines("semantic", p),
        None => {
            let reason = c.note.as_deref().unwrap_or("no semantic bins");
            out.push_str(&format!("note: {reason}; default shown in both panels\n"));
            panel_lines("semantic", &c.default)
        }
    };
    let right = panel_lines("default", &c.default);
    let width = left.iter().map(|l| l.chars().count()).max().unwrap_or(0);
    for i in 0..left.len().max(right.len()) {
        let l = left.get(i).map(String::as_str).unwrap_or("");
        let line = match right.get(i) {
            Some(r) => {
                let pad = width - l.chars().count();
                format!("{l}{}{GUTTER}{r}", " ".repeat(pad))
            }
            None => l.to_string(),
        };
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out
}
