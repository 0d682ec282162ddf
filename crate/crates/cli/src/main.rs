//! `gaspower`: run power-index analyses on a scenario file.
//!
//! Exit codes: 0 success, 1 validation errors, 2 unservable demand,
//! 3 unreadable file, 4 schema error, 5 usage error, 6 other failure.

mod render;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use gaspower_core::analysis::analyze;
use gaspower_core::export::{self, GameRow};
use gaspower_core::flow::{trace_rows, FlowTraceRow};
use gaspower_core::game::{build_pff_with_flows, isolated_flows};
use gaspower_core::solvers::{minimal_claim_with, PowerReport};
use gaspower_core::{
    allocate_partition_flows, build_cff, validate, CoalitionOrder, Error, FlowError, GameError,
    LpError, MemberGranularity, Partition, PayoffDivision, Scenario, ScenarioError,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Mode {
    Validate,
    Flows,
    Cff,
    Pff,
    MinimalClaim,
    Shapley,
    ExtendedShapley,
    Report,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Granularity {
    Player,
    Node,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Game {
    Cff,
    MinimalClaim,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Division {
    Core,
    EqualSplit,
}

#[derive(Debug, Parser)]
#[command(name = "gaspower", version, about = "Bargaining power in gas pipeline networks")]
struct Cli {
    /// What to compute.
    #[arg(value_enum)]
    mode: Mode,
    /// Scenario JSON file.
    scenario: PathBuf,
    #[arg(long, value_enum, default_value = "table")]
    format: Format,
    /// Coalition evaluation order: `demand`, or `explicit:A+B,C` to put the
    /// listed coalitions first.
    #[arg(long)]
    order: Option<String>,
    #[arg(long, value_enum)]
    granularity: Option<Granularity>,
    /// Write the main output here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write a CSV trace of every member flow.
    #[arg(long, value_name = "PATH")]
    trace_flows: Option<PathBuf>,
    /// Game the `shapley` mode works on.
    #[arg(long, value_enum, default_value = "cff")]
    game: Game,
    /// Restrict `flows` to one partition, e.g. `A+B,C`.
    #[arg(long)]
    partition: Option<String>,
    /// Fail instead of falling back when a residual game has no stable
    /// partition.
    #[arg(long)]
    no_fallback: bool,
    /// Payoff division used when testing stability of residual partitions.
    #[arg(long, value_enum)]
    division: Option<Division>,
}

#[derive(Debug)]
enum Failure {
    Validation(String),
    Infeasible(String),
    Unreadable(String),
    Schema(String),
    Usage(String),
    Other(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Validation(_) => 1,
            Failure::Infeasible(_) => 2,
            Failure::Unreadable(_) => 3,
            Failure::Schema(_) => 4,
            Failure::Usage(_) => 5,
            Failure::Other(_) => 6,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Validation(m)
            | Failure::Infeasible(m)
            | Failure::Unreadable(m)
            | Failure::Schema(m)
            | Failure::Usage(m)
            | Failure::Other(m) => m,
        }
    }
}

fn flow_failure(e: &FlowError) -> Failure {
    match e {
        FlowError::UnservableDemand { .. } | FlowError::Lp(LpError::Infeasible) => Failure::Infeasible(e.to_string()),
        _ => Failure::Other(e.to_string()),
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match &e {
            Error::Scenario(ScenarioError::Validation(_)) => Failure::Validation(e.to_string()),
            Error::Scenario(_) => Failure::Schema(e.to_string()),
            Error::Flow(f) | Error::Game(GameError::Flow(f)) => flow_failure(f),
            _ => Failure::Other(e.to_string()),
        }
    }
}

impl From<GameError> for Failure {
    fn from(e: GameError) -> Self {
        Error::from(e).into()
    }
}

impl From<FlowError> for Failure {
    fn from(e: FlowError) -> Self {
        Error::from(e).into()
    }
}

type Outcome<T> = Result<T, Failure>;

fn load(cli: &Cli) -> Outcome<Scenario> {
    let text = fs::read_to_string(&cli.scenario)
        .map_err(|e| Failure::Unreadable(format!("cannot read {}: {e}", cli.scenario.display())))?;
    let mut sc = gaspower_core::parse_scenario(&text).map_err(|e| Failure::from(Error::from(e)))?;
    if let Some(order) = &cli.order {
        sc.config.coalition_order_policy = parse_order(order, &sc)?;
    }
    match cli.granularity {
        Some(Granularity::Player) => sc.config.member_granularity = MemberGranularity::PerPlayer,
        Some(Granularity::Node) => sc.config.member_granularity = MemberGranularity::PerNode,
        None => {}
    }
    if cli.no_fallback {
        sc.config.pessimistic_fallback = false;
    }
    match cli.division {
        Some(Division::Core) => sc.config.payoff_division = PayoffDivision::CoreImputation,
        Some(Division::EqualSplit) => sc.config.payoff_division = PayoffDivision::EqualSplit,
        None => {}
    }
    Ok(sc)
}

fn parse_order(text: &str, sc: &Scenario) -> Outcome<CoalitionOrder> {
    if text == "demand" {
        return Ok(CoalitionOrder::ByTotalDemandDesc);
    }
    let list = text
        .strip_prefix("explicit:")
        .ok_or_else(|| Failure::Usage(format!("--order expects `demand` or `explicit:<list>`, got `{text}`")))?;
    let mut out = Vec::new();
    for item in list.split(',').filter(|s| !s.trim().is_empty()) {
        let c = sc.network.parse_coalition(item).map_err(|e| Failure::Usage(e.to_string()))?;
        out.push(c.members().map(|i| sc.network.player_ids[i].clone()).collect());
    }
    Ok(CoalitionOrder::ExplicitList(out))
}

fn parse_partition(text: &str, sc: &Scenario) -> Outcome<Partition> {
    let blocks = text
        .split(',')
        .map(|b| sc.network.parse_coalition(b).map_err(|e| Failure::Usage(e.to_string())))
        .collect::<Outcome<Vec<_>>>()?;
    Partition::new(blocks).ok_or_else(|| Failure::Usage(format!("`{text}` is not a partition: blocks overlap")))
}

fn export_err(e: Error) -> Failure {
    Failure::Other(e.to_string())
}

/// Rejects networks with structural errors; warnings go to stderr.
fn require_valid(sc: &Scenario) -> Outcome<()> {
    let diags = validate(&sc.network);
    let errors: Vec<String> = diags.iter().filter(|d| d.is_error()).map(|d| d.to_string()).collect();
    for d in diags.iter().filter(|d| !d.is_error()) {
        eprintln!("{d}");
    }
    if errors.is_empty() {
        Ok(())
    } else {
        Err(Failure::Validation(errors.join("\n")))
    }
}

fn game_output(rows: &[GameRow], format: Format) -> Outcome<String> {
    match format {
        Format::Table => Ok(render::game_table(rows)),
        Format::Csv => export::game_csv(rows).map_err(export_err),
        Format::Json => export::game_json(rows).map_err(export_err),
    }
}

fn reports_output(reports: &[PowerReport], format: Format) -> Outcome<String> {
    match format {
        Format::Table => Ok(render::reports_table(reports)),
        Format::Csv => export::reports_csv(reports).map_err(export_err),
        Format::Json => export::reports_json(reports).map_err(export_err),
    }
}

fn trace_output(rows: &[FlowTraceRow], format: Format) -> Outcome<String> {
    match format {
        Format::Table => Ok(render::trace_table(rows)),
        Format::Csv => export::trace_csv(rows).map_err(export_err),
        Format::Json => serde_json::to_string_pretty(rows).map_err(|e| Failure::Other(e.to_string())),
    }
}

fn partition_traces(sc: &Scenario) -> Outcome<Vec<FlowTraceRow>> {
    let build = build_pff_with_flows(&sc.network, &sc.config)?;
    Ok(build.flows.iter().flat_map(|f| trace_rows(&sc.network, f)).collect())
}

fn isolated_traces(sc: &Scenario) -> Outcome<Vec<FlowTraceRow>> {
    let mut rows = Vec::new();
    for c in sc.network.grand_coalition().subsets() {
        let flows = isolated_flows(&sc.network, c, &sc.config)?;
        rows.extend(trace_rows(&sc.network, &flows));
    }
    Ok(rows)
}

fn warn_all(warnings: &[String]) {
    for w in warnings {
        eprintln!("warning: {w}");
    }
}

/// Main output and, when requested, the flow trace rows.
fn execute(cli: &Cli, sc: &Scenario) -> Outcome<(String, Option<Vec<FlowTraceRow>>)> {
    let net = &sc.network;
    let ids = &net.player_ids;
    let want_trace = cli.trace_flows.is_some();
    let (text, trace) = match cli.mode {
        Mode::Validate => unreachable!("handled before execution"),
        Mode::Flows => {
            let rows = match &cli.partition {
                Some(text) => {
                    let p = parse_partition(text, sc)?;
                    trace_rows(net, &allocate_partition_flows(net, &p, &sc.config)?)
                }
                None => partition_traces(sc)?,
            };
            (trace_output(&rows, cli.format)?, want_trace.then_some(rows))
        }
        Mode::Cff => {
            let v = build_cff(net, &sc.config)?;
            let trace = if want_trace { Some(isolated_traces(sc)?) } else { None };
            (game_output(&export::cff_rows(&v, ids), cli.format)?, trace)
        }
        Mode::Pff => {
            let build = build_pff_with_flows(net, &sc.config)?;
            let trace = want_trace.then(|| build.flows.iter().flat_map(|f| trace_rows(net, f)).collect());
            (game_output(&export::pff_rows(&build.game, ids), cli.format)?, trace)
        }
        Mode::MinimalClaim => {
            let build = build_pff_with_flows(net, &sc.config)?;
            let mc = minimal_claim_with(&build.game, sc.config.pessimistic_fallback, sc.config.payoff_division)?;
            warn_all(&mc.warnings);
            let report = PowerReport::minimal_claim(ids, &mc);
            let rows = export::cff_rows(&mc.game, ids);
            let text = match cli.format {
                Format::Table => render::minimal_claim_table(&rows, &report),
                Format::Csv => export::game_csv(&rows).map_err(export_err)?,
                Format::Json => serde_json::to_string_pretty(&serde_json::json!({
                    "values": rows,
                    "stable_partitions": report.stable_partitions,
                    "warnings": report.warnings,
                }))
                .map_err(|e| Failure::Other(e.to_string()))?,
            };
            let trace = want_trace.then(|| build.flows.iter().flat_map(|f| trace_rows(net, f)).collect());
            (text, trace)
        }
        Mode::Shapley => match cli.game {
            Game::Cff => {
                let v = build_cff(net, &sc.config)?;
                let trace = if want_trace { Some(isolated_traces(sc)?) } else { None };
                (reports_output(&[PowerReport::cff(ids, &v)], cli.format)?, trace)
            }
            Game::MinimalClaim => {
                let build = build_pff_with_flows(net, &sc.config)?;
                let mc = minimal_claim_with(&build.game, sc.config.pessimistic_fallback, sc.config.payoff_division)?;
                warn_all(&mc.warnings);
                let trace = want_trace.then(|| build.flows.iter().flat_map(|f| trace_rows(net, f)).collect());
                (reports_output(&[PowerReport::minimal_claim(ids, &mc)], cli.format)?, trace)
            }
        },
        Mode::ExtendedShapley => {
            let build = build_pff_with_flows(net, &sc.config)?;
            let trace = want_trace.then(|| build.flows.iter().flat_map(|f| trace_rows(net, f)).collect());
            (reports_output(&[PowerReport::extended(ids, &build.game)], cli.format)?, trace)
        }
        Mode::Report => {
            let a = analyze(sc)?;
            warn_all(&a.minimal_claim.warnings);
            let reports: Vec<PowerReport> = a.reports().into_iter().cloned().collect();
            let text = match cli.format {
                Format::Table => render::comparison_table(&reports),
                _ => reports_output(&reports, cli.format)?,
            };
            let trace = want_trace.then(|| a.pff_flows.iter().flat_map(|f| trace_rows(net, f)).collect());
            (text, trace)
        }
    };
    Ok((text, trace))
}

fn emit(path: Option<&PathBuf>, mut text: String) -> Outcome<()> {
    if !text.ends_with('\n') {
        text.push('\n');
    }
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Other(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: &Cli) -> Outcome<()> {
    let sc = load(cli)?;
    if cli.mode == Mode::Validate {
        let diags = validate(&sc.network);
        let text = match cli.format {
            Format::Table => diags.iter().map(|d| format!("{d}\n")).collect(),
            Format::Csv => {
                let mut s = String::from("severity,message\n");
                for d in &diags {
                    let sev = if d.is_error() { "error" } else { "warning" };
                    s.push_str(&format!("{sev},\"{}\"\n", d.message.replace('"', "\"\"")));
                }
                s
            }
            Format::Json => serde_json::to_string_pretty(&diags).map_err(|e| Failure::Other(e.to_string()))?,
        };
        if !text.is_empty() {
            emit(cli.out.as_ref(), text)?;
        }
        let errors = diags.iter().filter(|d| d.is_error()).count();
        if errors > 0 {
            return Err(Failure::Validation(format!("{errors} validation error(s)")));
        }
        return Ok(());
    }
    require_valid(&sc)?;
    let (text, trace) = execute(cli, &sc)?;
    if let (Some(path), Some(rows)) = (&cli.trace_flows, trace) {
        let csv = export::trace_csv(&rows).map_err(export_err)?;
        fs::write(path, csv).map_err(|e| Failure::Other(format!("cannot write {}: {e}", path.display())))?;
    }
    emit(cli.out.as_ref(), text)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 5 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
