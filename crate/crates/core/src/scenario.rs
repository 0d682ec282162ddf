//! Network scenario: the typed model of a pipeline system, its JSON
//! document form, and validation.
//!
//! The document never stores matrices. The incidence matrix, node-player
//! map, cost/fee matrices and source matrix are derived when a document is
//! parsed, and re-flattened when a [`Network`] is serialized.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::coalition::{Coalition, MAX_PLAYERS};
use crate::error::ScenarioError;
use crate::solvers::PayoffDivision;

/// Dense row-major matrix of `f64`.
#[derive(Clone, PartialEq, Default)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut m = Matrix::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c, "ragged matrix rows");
            m.data[i * c..(i + 1) * c].copy_from_slice(row);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<f64> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.to_rows()).finish()
    }
}

/// A validated-or-not pipeline network. All indices are 0-based; labels
/// carry the document identifiers for display.
#[derive(Clone, Debug, PartialEq)]
pub struct Network {
    pub player_ids: Vec<String>,
    pub player_names: Vec<String>,
    pub node_ids: Vec<String>,
    pub edge_ids: Vec<String>,
    pub source_ids: Vec<String>,
    /// Node-branch incidence, l x m: -1 at the tail, +1 at the head.
    pub incidence: Matrix,
    /// Node-player map, l x n.
    pub node_owner: Matrix,
    pub capacity: Vec<f64>,
    /// Per-unit operational transport cost borne by each player, n x m.
    pub transport_cost: Matrix,
    /// Per-unit regulated fee each player is entitled to, n x m.
    pub transport_fee: Matrix,
    pub demand: Vec<f64>,
    /// Unit production cost of source r at its host node, l x p.
    pub source_cost: Matrix,
    pub production_cap: Vec<f64>,
    pub tpa: Vec<bool>,
}

impl Network {
    pub fn node_count(&self) -> usize {
        self.node_ids.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_ids.len()
    }

    pub fn player_count(&self) -> usize {
        self.player_ids.len()
    }

    pub fn source_count(&self) -> usize {
        self.source_ids.len()
    }

    pub fn grand_coalition(&self) -> Coalition {
        Coalition::grand(self.player_count())
    }

    /// `(tail, head)` of edge `k`, read from the incidence column.
    pub fn edge_endpoints(&self, k: usize) -> Option<(usize, usize)> {
        let mut tail = None;
        let mut head = None;
        for j in 0..self.node_count() {
            let a = self.incidence.get(j, k);
            if a == -1.0 {
                tail = Some(j);
            } else if a == 1.0 {
                head = Some(j);
            }
        }
        tail.zip(head)
    }

    /// Owning player of node `j` (first nonzero column of its Λ row).
    pub fn owner_of(&self, node: usize) -> Option<usize> {
        (0..self.player_count()).find(|&i| self.node_owner.get(node, i) != 0.0)
    }

    /// Host node of source `r`.
    pub fn source_node(&self, r: usize) -> Option<usize> {
        (0..self.node_count()).find(|&j| self.source_cost.get(j, r) > 0.0)
    }

    /// Unit production cost of source `r` (column sum of S).
    pub fn source_unit_cost(&self, r: usize) -> f64 {
        self.source_cost.column(r).iter().sum()
    }

    pub fn nodes_of(&self, player: usize) -> Vec<usize> {
        (0..self.node_count())
            .filter(|&j| self.owner_of(j) == Some(player))
            .collect()
    }

    pub fn player_demand(&self, player: usize) -> f64 {
        self.nodes_of(player).iter().map(|&j| self.demand[j]).sum()
    }

    pub fn coalition_demand(&self, c: Coalition) -> f64 {
        c.members().map(|i| self.player_demand(i)).sum()
    }

    pub fn player_index(&self, id: &str) -> Option<usize> {
        self.player_ids.iter().position(|p| p == id)
    }

    /// Parses `A+B` style coalition labels against player ids.
    pub fn parse_coalition(&self, text: &str) -> Result<Coalition, ScenarioError> {
        let mut c = Coalition::EMPTY;
        for id in text.split('+').map(str::trim).filter(|s| !s.is_empty()) {
            let i = self
                .player_index(id)
                .ok_or_else(|| ScenarioError::schema("coalition", format!("unknown player `{id}`")))?;
            c = c.with(i);
        }
        if c.is_empty() {
            return Err(ScenarioError::schema("coalition", "empty coalition"));
        }
        Ok(c)
    }

    /// Returns a copy with the TPA flag of every edge set from `flags`.
    pub fn with_tpa(&self, flags: &[bool]) -> Network {
        let mut net = self.clone();
        net.tpa = flags.to_vec();
        net
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoalitionOrder {
    #[default]
    ByTotalDemandDesc,
    /// Coalitions listed here are evaluated first, in list order; any other
    /// coalition follows in decreasing-demand order. Each entry lists player
    /// ids.
    ExplicitList(Vec<Vec<String>>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MemberGranularity {
    #[default]
    PerPlayer,
    PerNode,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub coalition_order_policy: CoalitionOrder,
    pub member_granularity: MemberGranularity,
    pub lp_tolerance: f64,
    pub pessimistic_fallback: bool,
    pub payoff_division: PayoffDivision,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            coalition_order_policy: CoalitionOrder::ByTotalDemandDesc,
            member_granularity: MemberGranularity::PerPlayer,
            lp_tolerance: 1e-9,
            pessimistic_fallback: true,
            payoff_division: PayoffDivision::CoreImputation,
        }
    }
}

impl ScenarioConfig {
    pub fn check(&self) -> Result<(), ScenarioError> {
        if !(self.lp_tolerance > 0.0 && self.lp_tolerance.is_finite()) {
            return Err(ScenarioError::schema(
                "config.lp_tolerance",
                "tolerance must be positive and finite",
            ));
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Document schema

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlayerDoc {
    pub id: String,
    #[serde(default)]
    pub name: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeDoc {
    pub id: String,
    pub owner: String,
    #[serde(default)]
    pub demand: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tariff {
    #[serde(default)]
    pub cost: f64,
    #[serde(default)]
    pub fee: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeDoc {
    pub id: String,
    pub from: String,
    pub to: String,
    pub capacity: f64,
    #[serde(default)]
    pub tpa: bool,
    /// Per-player cost and fee, keyed by player id.
    #[serde(default)]
    pub owners: BTreeMap<String, Tariff>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceDoc {
    pub id: String,
    pub node: String,
    pub unit_cost: f64,
    pub capacity: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDocument {
    pub players: Vec<PlayerDoc>,
    pub nodes: Vec<NodeDoc>,
    #[serde(default)]
    pub edges: Vec<EdgeDoc>,
    #[serde(default)]
    pub sources: Vec<SourceDoc>,
    #[serde(default)]
    pub config: ScenarioConfig,
}

/// A parsed scenario: the network plus its run configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub network: Network,
    pub config: ScenarioConfig,
}

fn index_of(ids: &HashMap<&str, usize>, id: &str, field: String) -> Result<usize, ScenarioError> {
    ids.get(id)
        .copied()
        .ok_or_else(|| ScenarioError::schema(field, format!("unknown reference `{id}`")))
}

fn check_quantity(v: f64, field: String) -> Result<f64, ScenarioError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(ScenarioError::schema(field, "value must be finite"))
    }
}

fn unique_ids<'a, I: Iterator<Item = &'a str>>(
    ids: I,
    field: &str,
) -> Result<HashMap<&'a str, usize>, ScenarioError> {
    let mut map = HashMap::new();
    for (i, id) in ids.enumerate() {
        if map.insert(id, i).is_some() {
            return Err(ScenarioError::schema(field, format!("duplicate id `{id}`")));
        }
    }
    Ok(map)
}

impl ScenarioDocument {
    pub fn into_scenario(self) -> Result<Scenario, ScenarioError> {
        let players = unique_ids(self.players.iter().map(|p| p.id.as_str()), "players")?;
        let nodes = unique_ids(self.nodes.iter().map(|n| n.id.as_str()), "nodes")?;
        unique_ids(self.edges.iter().map(|e| e.id.as_str()), "edges")?;
        unique_ids(self.sources.iter().map(|s| s.id.as_str()), "sources")?;

        let n = self.players.len();
        let l = self.nodes.len();
        let m = self.edges.len();
        let p = self.sources.len();
        if n == 0 {
            return Err(ScenarioError::schema("players", "at least one player is required"));
        }
        if n > MAX_PLAYERS {
            return Err(ScenarioError::schema(
                "players",
                format!("{n} players exceeds the supported maximum of {MAX_PLAYERS}"),
            ));
        }
        self.config.check()?;

        let mut node_owner = Matrix::zeros(l, n);
        let mut demand = Vec::with_capacity(l);
        for (j, node) in self.nodes.iter().enumerate() {
            let i = index_of(&players, &node.owner, format!("nodes[{j}].owner"))?;
            node_owner.set(j, i, 1.0);
            demand.push(check_quantity(node.demand, format!("nodes[{j}].demand"))?);
        }

        let mut incidence = Matrix::zeros(l, m);
        let mut transport_cost = Matrix::zeros(n, m);
        let mut transport_fee = Matrix::zeros(n, m);
        let mut capacity = Vec::with_capacity(m);
        let mut tpa = Vec::with_capacity(m);
        for (k, edge) in self.edges.iter().enumerate() {
            let from = index_of(&nodes, &edge.from, format!("edges[{k}].from"))?;
            let to = index_of(&nodes, &edge.to, format!("edges[{k}].to"))?;
            if from == to {
                return Err(ScenarioError::schema(
                    format!("edges[{k}]"),
                    "edge must connect two distinct nodes",
                ));
            }
            incidence.set(from, k, -1.0);
            incidence.set(to, k, 1.0);
            capacity.push(check_quantity(edge.capacity, format!("edges[{k}].capacity"))?);
            tpa.push(edge.tpa);
            for (owner, tariff) in &edge.owners {
                let i = index_of(&players, owner, format!("edges[{k}].owners"))?;
                transport_cost.set(i, k, check_quantity(tariff.cost, format!("edges[{k}].owners.{owner}.cost"))?);
                transport_fee.set(i, k, check_quantity(tariff.fee, format!("edges[{k}].owners.{owner}.fee"))?);
            }
        }

        let mut source_cost = Matrix::zeros(l, p);
        let mut production_cap = Vec::with_capacity(p);
        for (r, src) in self.sources.iter().enumerate() {
            let j = index_of(&nodes, &src.node, format!("sources[{r}].node"))?;
            let cost = check_quantity(src.unit_cost, format!("sources[{r}].unit_cost"))?;
            if cost <= 0.0 {
                // S marks a source's location by its nonzero entry.
                return Err(ScenarioError::schema(
                    format!("sources[{r}].unit_cost"),
                    "unit cost must be positive",
                ));
            }
            source_cost.set(j, r, cost);
            production_cap.push(check_quantity(src.capacity, format!("sources[{r}].capacity"))?);
        }

        if let CoalitionOrder::ExplicitList(list) = &self.config.coalition_order_policy {
            for (e, entry) in list.iter().enumerate() {
                for id in entry {
                    index_of(&players, id, format!("config.coalition_order_policy[{e}]"))?;
                }
            }
        }

        let network = Network {
            player_ids: self.players.iter().map(|p| p.id.clone()).collect(),
            player_names: self
                .players
                .iter()
                .map(|p| if p.name.is_empty() { p.id.clone() } else { p.name.clone() })
                .collect(),
            node_ids: self.nodes.iter().map(|x| x.id.clone()).collect(),
            edge_ids: self.edges.iter().map(|x| x.id.clone()).collect(),
            source_ids: self.sources.iter().map(|x| x.id.clone()).collect(),
            incidence,
            node_owner,
            capacity,
            transport_cost,
            transport_fee,
            demand,
            source_cost,
            production_cap,
            tpa,
        };
        Ok(Scenario {
            network,
            config: self.config,
        })
    }

    /// Flattens a network back into document form. Fails when the matrices
    /// cannot be expressed in the document (e.g. an edge column without a
    /// head and a tail).
    pub fn from_network(net: &Network, config: &ScenarioConfig) -> Result<Self, ScenarioError> {
        let players = net
            .player_ids
            .iter()
            .zip(&net.player_names)
            .map(|(id, name)| PlayerDoc {
                id: id.clone(),
                name: name.clone(),
            })
            .collect();
        let mut nodes = Vec::with_capacity(net.node_count());
        for j in 0..net.node_count() {
            let owner = net.owner_of(j).ok_or_else(|| {
                ScenarioError::Validation(format!("node {} has no owner", net.node_ids[j]))
            })?;
            nodes.push(NodeDoc {
                id: net.node_ids[j].clone(),
                owner: net.player_ids[owner].clone(),
                demand: net.demand[j],
            });
        }
        let mut edges = Vec::with_capacity(net.edge_count());
        for k in 0..net.edge_count() {
            let (tail, head) = net.edge_endpoints(k).ok_or_else(|| {
                ScenarioError::Validation(format!("edge {} has malformed incidence", net.edge_ids[k]))
            })?;
            let owners = (0..net.player_count())
                .filter(|&i| net.transport_cost.get(i, k) != 0.0 || net.transport_fee.get(i, k) != 0.0)
                .map(|i| {
                    (
                        net.player_ids[i].clone(),
                        Tariff {
                            cost: net.transport_cost.get(i, k),
                            fee: net.transport_fee.get(i, k),
                        },
                    )
                })
                .collect();
            edges.push(EdgeDoc {
                id: net.edge_ids[k].clone(),
                from: net.node_ids[tail].clone(),
                to: net.node_ids[head].clone(),
                capacity: net.capacity[k],
                tpa: net.tpa[k],
                owners,
            });
        }
        let mut sources = Vec::with_capacity(net.source_count());
        for r in 0..net.source_count() {
            let j = net.source_node(r).ok_or_else(|| {
                ScenarioError::Validation(format!("source {} has no host node", net.source_ids[r]))
            })?;
            sources.push(SourceDoc {
                id: net.source_ids[r].clone(),
                node: net.node_ids[j].clone(),
                unit_cost: net.source_cost.get(j, r),
                capacity: net.production_cap[r],
            });
        }
        Ok(ScenarioDocument {
            players,
            nodes,
            edges,
            sources,
            config: config.clone(),
        })
    }
}

/// Parses a JSON scenario document.
pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let doc: ScenarioDocument = serde_json::from_str(text)?;
    doc.into_scenario()
}

pub fn serialize_scenario(scenario: &Scenario) -> Result<String, ScenarioError> {
    let doc = ScenarioDocument::from_network(&scenario.network, &scenario.config)?;
    Ok(serde_json::to_string_pretty(&doc)?)
}

// ---------------------------------------------------------------------------
// Validation

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub message: String,
}

impl Diagnostic {
    fn error(message: String) -> Self {
        Diagnostic {
            severity: Severity::Error,
            message,
        }
    }

    fn warning(message: String) -> Self {
        Diagnostic {
            severity: Severity::Warning,
            message,
        }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{tag}: {}", self.message)
    }
}

fn fmt_qty(v: f64) -> String {
    format!("{v}")
}

/// Checks every structural invariant of the network. Errors mark
/// violations; warnings flag demand nodes without a local source, since
/// feasibility is then not guaranteed.
pub fn validate(net: &Network) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let (l, m, n, p) = (
        net.node_count(),
        net.edge_count(),
        net.player_count(),
        net.source_count(),
    );

    let dims = [
        ("incidence", net.incidence.rows(), net.incidence.cols(), l, m),
        ("node_owner", net.node_owner.rows(), net.node_owner.cols(), l, n),
        ("transport_cost", net.transport_cost.rows(), net.transport_cost.cols(), n, m),
        ("transport_fee", net.transport_fee.rows(), net.transport_fee.cols(), n, m),
        ("source_cost", net.source_cost.rows(), net.source_cost.cols(), l, p),
    ];
    let mut dims_ok = true;
    for (name, r, c, er, ec) in dims {
        if (r, c) != (er, ec) {
            out.push(Diagnostic::error(format!(
                "{name} is {r}x{c}, expected {er}x{ec}"
            )));
            dims_ok = false;
        }
    }
    for (name, len, expected) in [
        ("capacity", net.capacity.len(), m),
        ("demand", net.demand.len(), l),
        ("production_cap", net.production_cap.len(), p),
        ("tpa", net.tpa.len(), m),
        ("player_names", net.player_names.len(), n),
    ] {
        if len != expected {
            out.push(Diagnostic::error(format!(
                "{name} has length {len}, expected {expected}"
            )));
            dims_ok = false;
        }
    }
    if !dims_ok {
        return out;
    }

    for k in 0..m {
        let col = net.incidence.column(k);
        let plus = col.iter().filter(|&&a| a == 1.0).count();
        let minus = col.iter().filter(|&&a| a == -1.0).count();
        let zero = col.iter().filter(|&&a| a == 0.0).count();
        if plus != 1 || minus != 1 || plus + minus + zero != l {
            out.push(Diagnostic::error(format!(
                "incidence column of edge {} must hold exactly one +1 and one -1",
                net.edge_ids[k]
            )));
        }
    }

    for j in 0..l {
        let row = net.node_owner.row(j);
        let sum: f64 = row.iter().sum();
        if row.iter().any(|&x| x != 0.0 && x != 1.0) || sum != 1.0 {
            out.push(Diagnostic::error(format!(
                "node {} must be owned by exactly one player",
                net.node_ids[j]
            )));
        }
    }

    for (k, &q) in net.capacity.iter().enumerate() {
        if !(q >= 0.0) {
            out.push(Diagnostic::error(format!(
                "negative capacity on edge {}",
                net.edge_ids[k]
            )));
        }
    }
    for (j, &d) in net.demand.iter().enumerate() {
        if !(d >= 0.0) {
            out.push(Diagnostic::error(format!(
                "negative demand at node {}",
                net.node_ids[j]
            )));
        }
    }
    for (r, &cap) in net.production_cap.iter().enumerate() {
        if !(cap >= 0.0) {
            out.push(Diagnostic::error(format!(
                "negative production capacity at source {}",
                net.source_ids[r]
            )));
        }
    }

    for i in 0..n {
        for k in 0..m {
            let t = net.transport_cost.get(i, k);
            let f = net.transport_fee.get(i, k);
            if !(t >= 0.0) {
                out.push(Diagnostic::error(format!(
                    "negative transport cost at ({},{})",
                    i + 1,
                    k + 1
                )));
            }
            if !(f >= 0.0) {
                out.push(Diagnostic::error(format!(
                    "negative transport fee at ({},{})",
                    i + 1,
                    k + 1
                )));
            }
            if f < t {
                out.push(Diagnostic::error(format!(
                    "fee below cost at ({},{})",
                    i + 1,
                    k + 1
                )));
            }
        }
    }

    for k in 0..m {
        let Some((tail, head)) = net.edge_endpoints(k) else {
            continue;
        };
        let owners = [net.owner_of(tail), net.owner_of(head)];
        for i in 0..n {
            let used = net.transport_cost.get(i, k) != 0.0 || net.transport_fee.get(i, k) != 0.0;
            if used && !owners.contains(&Some(i)) {
                out.push(Diagnostic::error(format!(
                    "player {} has a tariff on edge {} but owns neither endpoint",
                    net.player_ids[i], net.edge_ids[k]
                )));
            }
        }
    }

    for r in 0..p {
        let col = net.source_cost.column(r);
        let nonzero = col.iter().filter(|&&s| s != 0.0).count();
        if nonzero != 1 || col.iter().any(|&s| s < 0.0) {
            out.push(Diagnostic::error(format!(
                "source {} must sit at exactly one node with a positive unit cost",
                net.source_ids[r]
            )));
        }
    }

    for j in 0..l {
        if net.demand[j] > 0.0 {
            let local = (0..p).any(|r| net.source_cost.get(j, r) > 0.0);
            if !local {
                out.push(Diagnostic::warning(format!(
                    "node {} demand {} has no local backstop",
                    net.node_ids[j],
                    fmt_qty(net.demand[j])
                )));
            }
        }
    }

    out
}
