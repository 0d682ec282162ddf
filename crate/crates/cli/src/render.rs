//! Plain-text tables. Money is shown with one decimal place.

use gaspower_core::export::GameRow;
use gaspower_core::flow::FlowTraceRow;
use gaspower_core::solvers::{PowerMethod, PowerReport};

pub fn money(v: f64) -> String {
    let s = format!("{v:.1}");
    if s == "-0.0" {
        "0.0".into()
    } else {
        s
    }
}

fn opt_money(v: Option<f64>) -> String {
    v.map(money).unwrap_or_else(|| "-".into())
}

/// Left-aligns the first `text_cols` columns and right-aligns the rest.
fn layout(header: &[&str], rows: &[Vec<String>], text_cols: usize) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: Vec<&str>| {
        let parts: Vec<String> = cells
            .iter()
            .enumerate()
            .map(|(i, c)| {
                if i < text_cols {
                    format!("{c:<w$}", w = widths[i])
                } else {
                    format!("{c:>w$}", w = widths[i])
                }
            })
            .collect();
        parts.join("  ").trim_end().to_string()
    };
    let mut out = line(header.to_vec());
    out.push('\n');
    for row in rows {
        out.push_str(&line(row.iter().map(String::as_str).collect()));
        out.push('\n');
    }
    out
}

pub fn game_table(rows: &[GameRow]) -> String {
    let cells: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.partition.clone(),
                r.coalition.clone(),
                money(r.value),
                opt_money(r.phi),
                opt_money(r.internal_profit),
                opt_money(r.external_profit),
            ]
        })
        .collect();
    layout(&["partition", "coalition", "value", "phi", "internal", "external"], &cells, 2)
}

pub fn minimal_claim_table(rows: &[GameRow], report: &PowerReport) -> String {
    let entries = report.stable_partitions.as_deref().unwrap_or_default();
    let cells: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            let stable = entries
                .iter()
                .find(|e| e.coalition == r.coalition)
                .map(|e| {
                    let mut s = e.stable_residual_partitions.join(" | ");
                    if e.fallback {
                        s.push_str(" (fallback)");
                    }
                    s
                })
                .unwrap_or_default();
            vec![r.coalition.clone(), stable, money(r.value)]
        })
        .collect();
    layout(&["coalition", "stable residual partitions", "value"], &cells, 2)
}

fn method_label(m: PowerMethod) -> &'static str {
    match m {
        PowerMethod::CffShapley => "Shapley values based on CFF",
        PowerMethod::PffMinimalClaimShapley => "Shapley values based on PFF",
        PowerMethod::PffExtendedShapley => "Extended Shapley values (PFF)",
    }
}

pub fn reports_table(reports: &[PowerReport]) -> String {
    let mut cells = Vec::new();
    for r in reports {
        for (p, v) in r.players.iter().zip(&r.shapley) {
            cells.push(vec![method_label(r.method).to_string(), p.clone(), money(*v)]);
        }
    }
    layout(&["method", "player", "value"], &cells, 2)
}

/// One row per method, one column per player.
pub fn comparison_table(reports: &[PowerReport]) -> String {
    let Some(first) = reports.first() else {
        return String::new();
    };
    let mut header = vec![""];
    header.extend(first.players.iter().map(String::as_str));
    let cells: Vec<Vec<String>> = reports
        .iter()
        .map(|r| {
            let mut row = vec![method_label(r.method).to_string()];
            row.extend(r.shapley.iter().map(|v| money(*v)));
            row
        })
        .collect();
    layout(&header, &cells, 1)
}

pub fn trace_table(rows: &[FlowTraceRow]) -> String {
    let cells: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.partition.clone(),
                r.coalition.clone(),
                r.member.clone(),
                r.edge_or_source.clone(),
                r.direction.clone(),
                format!("{}", r.quantity),
                money(r.cost),
                r.fee_paid_to.clone(),
            ]
        })
        .collect();
    let mut out = layout(
        &["partition", "coalition", "member", "edge/source", "dir", "quantity", "cost", "fees"],
        &cells,
        5,
    );
    // The fee column is text; keep it from being padded on the right.
    out = out.lines().map(|l| format!("{}\n", l.trim_end())).collect();
    out
}
