//! Iterative flow allocation.
//!
//! Each member of a coalition solves its own min-cost LP over the resources
//! the coalition can reach, paying its own transport cost plus the fees of
//! every other tariff holder on the edges it uses. Committed flows reduce a
//! shared per-direction residual capacity, so later members (and, inside a
//! partition, later coalitions) see what is left.

use serde::Serialize;

use crate::coalition::{Coalition, Partition};
use crate::error::{FlowError, LpError};
use crate::lp::{BoundedSimplex, LinearProgram, LpSolver};
use crate::scenario::{CoalitionOrder, Matrix, MemberGranularity, Network, ScenarioConfig};
use crate::subnetwork::AccessSet;

/// Flows and cost of one LP solve (one player, or one node of a player).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PlayerFlow {
    pub player: usize,
    /// Demand nodes this solve served.
    pub nodes: Vec<usize>,
    pub f_plus: Vec<f64>,
    pub f_minus: Vec<f64>,
    pub production: Vec<f64>,
    pub cost: f64,
}

impl PlayerFlow {
    pub fn zero(net: &Network, player: usize) -> Self {
        PlayerFlow {
            player,
            nodes: Vec::new(),
            f_plus: vec![0.0; net.edge_count()],
            f_minus: vec![0.0; net.edge_count()],
            production: vec![0.0; net.source_count()],
            cost: 0.0,
        }
    }

    /// Residual of the conservation equations against `demand`.
    pub fn conservation_residual(&self, net: &Network, demand: &[f64]) -> f64 {
        (0..net.node_count())
            .map(|j| {
                let edges: f64 = (0..net.edge_count())
                    .map(|k| net.incidence.get(j, k) * (self.f_plus[k] - self.f_minus[k]))
                    .sum();
                let prod: f64 = (0..net.source_count())
                    .filter(|&r| net.source_cost.get(j, r) > 0.0)
                    .map(|r| self.production[r])
                    .sum();
                (edges + prod - demand[j]).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Nominal (per-direction) usage of edge `k`.
    pub fn nominal(&self, k: usize) -> f64 {
        self.f_plus[k] + self.f_minus[k]
    }
}

/// Remaining per-direction edge capacity (forward block then backward
/// block) and remaining production capacity.
#[derive(Clone, Debug, PartialEq)]
pub struct ResidualState {
    pub q_mod: Vec<f64>,
    pub l_mod: Vec<f64>,
}

impl ResidualState {
    pub fn fresh(net: &Network) -> Self {
        let mut q_mod = net.capacity.clone();
        q_mod.extend_from_slice(&net.capacity);
        ResidualState {
            q_mod,
            l_mod: net.production_cap.clone(),
        }
    }

    pub fn commit(&mut self, flow: &PlayerFlow) {
        let m = flow.f_plus.len();
        for k in 0..m {
            self.q_mod[k] = (self.q_mod[k] - flow.f_plus[k]).max(0.0);
            self.q_mod[m + k] = (self.q_mod[m + k] - flow.f_minus[k]).max(0.0);
        }
        for (l, used) in self.l_mod.iter_mut().zip(&flow.production) {
            *l = (*l - used).max(0.0);
        }
    }
}

/// `q(i, j)`: transport cost imposed by player j on player i.
/// `r(i, j)`: fee paid by player j to player i.
#[derive(Clone, Debug, PartialEq)]
pub struct TransferMatrices {
    pub q: Matrix,
    pub r: Matrix,
}

impl TransferMatrices {
    pub fn zeros(n: usize) -> Self {
        TransferMatrices {
            q: Matrix::zeros(n, n),
            r: Matrix::zeros(n, n),
        }
    }

    /// Adds the columns `[T T 0] x_j` and `[F^{j0} F^{j0} 0] x_j` for the
    /// payer of `flow`.
    pub fn add_flow(&mut self, net: &Network, flow: &PlayerFlow) {
        let j = flow.player;
        for i in 0..net.player_count() {
            let mut cost = 0.0;
            let mut fee = 0.0;
            for k in 0..net.edge_count() {
                let nominal = flow.nominal(k);
                if nominal == 0.0 {
                    continue;
                }
                cost += net.transport_cost.get(i, k) * nominal;
                if i != j {
                    fee += net.transport_fee.get(i, k) * nominal;
                }
            }
            self.q.set(i, j, self.q.get(i, j) + cost);
            self.r.set(i, j, self.r.get(i, j) + fee);
        }
    }

    pub fn from_flows<'a, I: IntoIterator<Item = &'a PlayerFlow>>(net: &Network, flows: I) -> Self {
        let mut tm = TransferMatrices::zeros(net.player_count());
        for f in flows {
            tm.add_flow(net, f);
        }
        tm
    }
}

/// Objective row for `payer`: own cost plus every other holder's fee on
/// both directions of each edge, then unit production costs.
pub fn member_objective(net: &Network, payer: usize) -> Vec<f64> {
    let m = net.edge_count();
    let mut c = Vec::with_capacity(2 * m + net.source_count());
    let edge_cost: Vec<f64> = (0..m)
        .map(|k| {
            let fees: f64 = (0..net.player_count())
                .filter(|&i| i != payer)
                .map(|i| net.transport_fee.get(i, k))
                .sum();
            net.transport_cost.get(payer, k) + fees
        })
        .collect();
    c.extend_from_slice(&edge_cost);
    c.extend_from_slice(&edge_cost);
    c.extend((0..net.source_count()).map(|r| net.source_unit_cost(r)));
    c
}

/// Builds the member LP: conservation rows `[A -A S>0] x = d`, and bounds
/// from the residual state restricted to the accessible resources.
pub fn member_program(
    net: &Network,
    access: &AccessSet,
    member_demand: &[f64],
    payer: usize,
    state: &ResidualState,
) -> LinearProgram {
    let (l, m, p) = (net.node_count(), net.edge_count(), net.source_count());
    let mut eq = Matrix::zeros(l, 2 * m + p);
    for j in 0..l {
        for k in 0..m {
            let a = net.incidence.get(j, k);
            eq.set(j, k, a);
            eq.set(j, m + k, -a);
        }
        for r in 0..p {
            if net.source_cost.get(j, r) > 0.0 {
                eq.set(j, 2 * m + r, 1.0);
            }
        }
    }
    let mut upper = vec![0.0; 2 * m + p];
    for &k in &access.usable_edges {
        upper[k] = state.q_mod[k];
        upper[m + k] = state.q_mod[m + k];
    }
    for &r in &access.usable_sources {
        upper[2 * m + r] = state.l_mod[r];
    }
    LinearProgram {
        costs: member_objective(net, payer),
        equalities: eq,
        rhs: member_demand.to_vec(),
        upper,
    }
}

pub fn solve_member_flow(
    net: &Network,
    access: &AccessSet,
    member_demand: &[f64],
    payer: usize,
    state: &ResidualState,
    tolerance: f64,
) -> Result<PlayerFlow, FlowError> {
    solve_member_flow_with(&BoundedSimplex::default(), net, access, member_demand, payer, state, tolerance)
}

pub fn solve_member_flow_with(
    solver: &dyn LpSolver,
    net: &Network,
    access: &AccessSet,
    member_demand: &[f64],
    payer: usize,
    state: &ResidualState,
    tolerance: f64,
) -> Result<PlayerFlow, FlowError> {
    let nodes: Vec<usize> = (0..net.node_count()).filter(|&j| member_demand[j] > 0.0).collect();
    if nodes.is_empty() {
        let mut zero = PlayerFlow::zero(net, payer);
        zero.nodes = nodes;
        return Ok(zero);
    }
    let lp = member_program(net, access, member_demand, payer, state);
    let sol = solver.solve(&lp, tolerance).map_err(|e| match e {
        LpError::Infeasible => FlowError::UnservableDemand {
            player: net.player_ids[payer].clone(),
            nodes: nodes.iter().map(|&j| net.node_ids[j].clone()).collect(),
        },
        other => FlowError::Lp(other),
    })?;
    let m = net.edge_count();
    Ok(PlayerFlow {
        player: payer,
        nodes,
        f_plus: sol.x[..m].to_vec(),
        f_minus: sol.x[m..2 * m].to_vec(),
        production: sol.x[2 * m..].to_vec(),
        cost: sol.objective,
    })
}

/// One LP job: a payer and the demand nodes it serves.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MemberUnit {
    pub player: usize,
    pub nodes: Vec<usize>,
}

fn by_demand_desc(net: &Network, players: impl Iterator<Item = usize>) -> Vec<usize> {
    let mut v: Vec<usize> = players.collect();
    // Stable sort keeps lower index first on equal demand.
    v.sort_by(|a, b| net.player_demand(*b).total_cmp(&net.player_demand(*a)));
    v
}

/// Member evaluation order for a coalition: players by decreasing total
/// demand (lower index first on ties), split per demand node under
/// [`MemberGranularity::PerNode`].
pub fn member_units(net: &Network, c: Coalition, granularity: MemberGranularity) -> Vec<MemberUnit> {
    units_for_order(net, &by_demand_desc(net, c.members()), granularity)
}

pub fn units_for_order(net: &Network, players: &[usize], granularity: MemberGranularity) -> Vec<MemberUnit> {
    let mut out = Vec::new();
    for &i in players {
        let mut nodes: Vec<usize> = net.nodes_of(i).into_iter().filter(|&j| net.demand[j] > 0.0).collect();
        match granularity {
            MemberGranularity::PerPlayer => out.push(MemberUnit { player: i, nodes }),
            MemberGranularity::PerNode => {
                nodes.sort_by(|a, b| net.demand[*b].total_cmp(&net.demand[*a]));
                if nodes.is_empty() {
                    out.push(MemberUnit { player: i, nodes });
                } else {
                    out.extend(nodes.into_iter().map(|j| MemberUnit { player: i, nodes: vec![j] }));
                }
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoalitionFlows {
    pub coalition: Coalition,
    pub flows: Vec<PlayerFlow>,
    /// Sum of member costs.
    pub cost: f64,
}

pub fn allocate_coalition_flows(
    net: &Network,
    c: Coalition,
    state: &mut ResidualState,
    config: &ScenarioConfig,
) -> Result<CoalitionFlows, FlowError> {
    let units = member_units(net, c, config.member_granularity);
    allocate_units_with(&BoundedSimplex::default(), net, c, &units, state, config.lp_tolerance)
}

/// Runs the member LPs of `c` in the given unit order, committing each
/// result to `state`.
pub fn allocate_units_with(
    solver: &dyn LpSolver,
    net: &Network,
    c: Coalition,
    units: &[MemberUnit],
    state: &mut ResidualState,
    tolerance: f64,
) -> Result<CoalitionFlows, FlowError> {
    let access = AccessSet::for_coalition(net, c);
    let mut flows = Vec::with_capacity(units.len());
    let mut cost = 0.0;
    for unit in units {
        let mut demand = vec![0.0; net.node_count()];
        for &j in &unit.nodes {
            demand[j] = net.demand[j];
        }
        let flow = solve_member_flow_with(solver, net, &access, &demand, unit.player, state, tolerance)?;
        state.commit(&flow);
        cost += flow.cost;
        flows.push(flow);
    }
    Ok(CoalitionFlows {
        coalition: c,
        flows,
        cost,
    })
}

/// Result of evaluating a set of disjoint coalitions on one shared
/// residual state.
#[derive(Clone, Debug, PartialEq)]
pub struct PartitionFlows {
    pub blocks: Vec<Coalition>,
    /// Indices into `blocks`, in evaluation order.
    pub evaluation_order: Vec<usize>,
    /// Per-block cost, aligned with `blocks`.
    pub coalition_costs: Vec<f64>,
    /// Per-block member flows, aligned with `blocks`.
    pub coalition_flows: Vec<Vec<PlayerFlow>>,
    pub transfers: TransferMatrices,
    pub final_state: ResidualState,
}

impl PartitionFlows {
    pub fn cost_of(&self, c: Coalition) -> Option<f64> {
        self.blocks.iter().position(|b| *b == c).map(|i| self.coalition_costs[i])
    }

    pub fn all_flows(&self) -> impl Iterator<Item = &PlayerFlow> {
        self.coalition_flows.iter().flatten()
    }
}

/// Coalition evaluation order under `policy`: explicitly listed coalitions
/// first in list order, then the rest by decreasing total demand with the
/// smallest lowest-member index first on ties.
pub fn coalition_order(net: &Network, blocks: &[Coalition], policy: &CoalitionOrder) -> Vec<usize> {
    let listed: Vec<Coalition> = match policy {
        CoalitionOrder::ByTotalDemandDesc => Vec::new(),
        CoalitionOrder::ExplicitList(list) => list
            .iter()
            .filter_map(|ids| {
                let idx: Option<Vec<usize>> = ids.iter().map(|id| net.player_index(id)).collect();
                idx.map(Coalition::from_members)
            })
            .collect(),
    };
    let mut order: Vec<usize> = (0..blocks.len()).collect();
    order.sort_by(|&a, &b| {
        let pa = listed.iter().position(|c| *c == blocks[a]).unwrap_or(usize::MAX);
        let pb = listed.iter().position(|c| *c == blocks[b]).unwrap_or(usize::MAX);
        pa.cmp(&pb)
            .then_with(|| net.coalition_demand(blocks[b]).total_cmp(&net.coalition_demand(blocks[a])))
            .then_with(|| blocks[a].first().cmp(&blocks[b].first()))
    });
    order
}

pub fn allocate_partition_flows(
    net: &Network,
    partition: &Partition,
    config: &ScenarioConfig,
) -> Result<PartitionFlows, FlowError> {
    if partition.support() != net.grand_coalition() {
        return Err(FlowError::InvalidPartition(format!(
            "{} does not cover all players",
            partition.label(&net.player_ids)
        )));
    }
    evaluate_coalitions_with(&BoundedSimplex::default(), net, partition.blocks(), config)
}

/// Evaluates disjoint coalitions (not necessarily covering every player)
/// in the configured order on a fresh residual state.
pub fn evaluate_coalitions_with(
    solver: &dyn LpSolver,
    net: &Network,
    blocks: &[Coalition],
    config: &ScenarioConfig,
) -> Result<PartitionFlows, FlowError> {
    let mut seen = Coalition::EMPTY;
    for b in blocks {
        if b.is_empty() || !b.is_disjoint(seen) || !b.is_subset(net.grand_coalition()) {
            return Err(FlowError::InvalidPartition(format!(
                "coalitions must be nonempty, disjoint and within the player set: {blocks:?}"
            )));
        }
        seen = seen.union(*b);
    }
    let order = coalition_order(net, blocks, &config.coalition_order_policy);
    let mut state = ResidualState::fresh(net);
    let mut costs = vec![0.0; blocks.len()];
    let mut per_block = vec![Vec::new(); blocks.len()];
    let mut transfers = TransferMatrices::zeros(net.player_count());
    for &b in &order {
        let units = member_units(net, blocks[b], config.member_granularity);
        let cf = allocate_units_with(solver, net, blocks[b], &units, &mut state, config.lp_tolerance)?;
        for f in &cf.flows {
            transfers.add_flow(net, f);
        }
        costs[b] = cf.cost;
        per_block[b] = cf.flows;
    }
    Ok(PartitionFlows {
        blocks: blocks.to_vec(),
        evaluation_order: order,
        coalition_costs: costs,
        coalition_flows: per_block,
        transfers,
        final_state: state,
    })
}

/// One row of the optional flow trace.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FlowTraceRow {
    pub partition: String,
    pub coalition: String,
    pub member: String,
    pub edge_or_source: String,
    pub direction: String,
    pub quantity: f64,
    pub cost: f64,
    pub fee_paid_to: String,
}

pub fn trace_rows(net: &Network, flows: &PartitionFlows) -> Vec<FlowTraceRow> {
    let ids = &net.player_ids;
    let partition = Partition::new(flows.blocks.clone())
        .map(|p| p.label(ids))
        .unwrap_or_default();
    let mut rows = Vec::new();
    for &b in &flows.evaluation_order {
        let coalition = flows.blocks[b].label(ids);
        for f in &flows.coalition_flows[b] {
            let member = match f.nodes.as_slice() {
                [single] if net.nodes_of(f.player).len() > 1 => {
                    format!("{}@{}", ids[f.player], net.node_ids[*single])
                }
                _ => ids[f.player].clone(),
            };
            let objective = member_objective(net, f.player);
            for k in 0..net.edge_count() {
                for (dir, qty) in [("+", f.f_plus[k]), ("-", f.f_minus[k])] {
                    if qty == 0.0 {
                        continue;
                    }
                    let fees: Vec<String> = (0..net.player_count())
                        .filter(|&i| i != f.player && net.transport_fee.get(i, k) != 0.0)
                        .map(|i| format!("{}={}", ids[i], net.transport_fee.get(i, k) * qty))
                        .collect();
                    rows.push(FlowTraceRow {
                        partition: partition.clone(),
                        coalition: coalition.clone(),
                        member: member.clone(),
                        edge_or_source: net.edge_ids[k].clone(),
                        direction: dir.to_string(),
                        quantity: qty,
                        cost: objective[k] * qty,
                        fee_paid_to: fees.join(";"),
                    });
                }
            }
            for r in 0..net.source_count() {
                let qty = f.production[r];
                if qty == 0.0 {
                    continue;
                }
                rows.push(FlowTraceRow {
                    partition: partition.clone(),
                    coalition: coalition.clone(),
                    member: member.clone(),
                    edge_or_source: net.source_ids[r].clone(),
                    direction: "production".to_string(),
                    quantity: qty,
                    cost: net.source_unit_cost(r) * qty,
                    fee_paid_to: String::new(),
                });
            }
        }
    }
    rows
}
