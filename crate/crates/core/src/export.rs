//! CSV and JSON renderings of games, power reports and flow traces.

use serde::Serialize;

use crate::coalition::Coalition;
use crate::error::{Error, Result};
use crate::flow::FlowTraceRow;
use crate::game::{CharacteristicFunction, PartitionFunction};
use crate::solvers::PowerReport;

/// One row of a game export. Characteristic-function rows carry `-` as
/// their partition.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GameRow {
    pub partition: String,
    pub coalition: String,
    pub value: f64,
    pub phi: Option<f64>,
    pub internal_profit: Option<f64>,
    pub external_profit: Option<f64>,
}

pub fn cff_rows(v: &CharacteristicFunction, ids: &[String]) -> Vec<GameRow> {
    v.grand()
        .subsets()
        .map(|c: Coalition| {
            let rec = v.records.as_ref().map(|r| r[c.bits() as usize]);
            GameRow {
                partition: "-".into(),
                coalition: c.label(ids),
                value: v.value(c),
                phi: rec.map(|r| r.phi),
                internal_profit: rec.map(|r| r.profit.internal),
                external_profit: rec.map(|r| r.profit.external),
            }
        })
        .collect()
}

pub fn pff_rows(pf: &PartitionFunction, ids: &[String]) -> Vec<GameRow> {
    let mut rows = Vec::new();
    for (p, recs) in pf.partitions.iter().zip(&pf.records) {
        let label = p.label(ids);
        for (c, r) in p.blocks().iter().zip(recs) {
            rows.push(GameRow {
                partition: label.clone(),
                coalition: c.label(ids),
                value: r.value,
                phi: Some(r.phi),
                internal_profit: Some(r.profit.internal),
                external_profit: Some(r.profit.external),
            });
        }
    }
    rows
}

fn csv_string<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| Error::Export(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Export(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Export(e.to_string()))
}

fn csv_with_header<T: Serialize>(header: &[&str], rows: &[T]) -> Result<String> {
    if rows.is_empty() {
        return Ok(format!("{}\n", header.join(",")));
    }
    csv_string(rows)
}

pub const GAME_HEADER: [&str; 6] = ["partition", "coalition", "value", "phi", "internal_profit", "external_profit"];
pub const TRACE_HEADER: [&str; 8] = [
    "partition",
    "coalition",
    "member",
    "edge_or_source",
    "direction",
    "quantity",
    "cost",
    "fee_paid_to",
];

pub fn game_csv(rows: &[GameRow]) -> Result<String> {
    csv_with_header(&GAME_HEADER, rows)
}

pub fn game_json(rows: &[GameRow]) -> Result<String> {
    serde_json::to_string_pretty(rows).map_err(|e| Error::Export(e.to_string()))
}

pub fn trace_csv(rows: &[FlowTraceRow]) -> Result<String> {
    csv_with_header(&TRACE_HEADER, rows)
}

#[derive(Serialize)]
struct ReportRow<'a> {
    method: &'a str,
    player: &'a str,
    value: f64,
}

/// Long-format CSV: `method,player,value`, one row per player and method.
pub fn reports_csv(reports: &[PowerReport]) -> Result<String> {
    let rows: Vec<ReportRow> = reports
        .iter()
        .flat_map(|r| {
            r.players.iter().zip(&r.shapley).map(move |(p, v)| ReportRow {
                method: r.method.tag(),
                player: p,
                value: *v,
            })
        })
        .collect();
    csv_with_header(&["method", "player", "value"], &rows)
}

#[derive(Serialize)]
struct StableRow<'a> {
    coalition: &'a str,
    stable_residual_partition: &'a str,
    fallback: bool,
}

/// `coalition,stable_residual_partition,fallback` rows of a minimal-claim
/// report.
pub fn stable_csv(report: &PowerReport) -> Result<String> {
    let rows: Vec<StableRow> = report
        .stable_partitions
        .iter()
        .flatten()
        .flat_map(|e| {
            e.stable_residual_partitions.iter().map(move |p| StableRow {
                coalition: &e.coalition,
                stable_residual_partition: p,
                fallback: e.fallback,
            })
        })
        .collect();
    csv_with_header(&["coalition", "stable_residual_partition", "fallback"], &rows)
}

pub fn reports_json(reports: &[PowerReport]) -> Result<String> {
    serde_json::to_string_pretty(reports).map_err(|e| Error::Export(e.to_string()))
}
