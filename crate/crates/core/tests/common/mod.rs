//! Test-only oracles and generators. Nothing here calls into the simplex.
#![allow(dead_code)]

use std::collections::BTreeMap;

use gaspower_core::coalition::Coalition;
use gaspower_core::flow::ResidualState;
use gaspower_core::game::CharacteristicFunction;
use gaspower_core::lp::{LinearProgram, LpSolution, LpSolver};
use gaspower_core::scenario::{
    EdgeDoc, NodeDoc, PlayerDoc, ScenarioConfig, ScenarioDocument, SourceDoc, Tariff,
};
use gaspower_core::{LpError, Network, Scenario};
use rand::Rng;

// ---------------------------------------------------------------------------
// LP oracle: enumerate every vertex of {Ax = b, 0 <= x <= u}.

/// Solves `M y = rhs` (rows x k) by Gaussian elimination; `None` when the
/// columns are dependent or the system is inconsistent.
fn solve_dense(mut m: Vec<Vec<f64>>, mut rhs: Vec<f64>, k: usize) -> Option<Vec<f64>> {
    let rows = m.len();
    let mut pivot_row = 0;
    let mut pivots = Vec::with_capacity(k);
    for col in 0..k {
        let best = (pivot_row..rows).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))?;
        if m[best][col].abs() < 1e-10 {
            return None;
        }
        m.swap(pivot_row, best);
        rhs.swap(pivot_row, best);
        for r in 0..rows {
            if r != pivot_row {
                let f = m[r][col] / m[pivot_row][col];
                if f != 0.0 {
                    for c in col..k {
                        m[r][c] -= f * m[pivot_row][c];
                    }
                    rhs[r] -= f * rhs[pivot_row];
                }
            }
        }
        pivots.push(pivot_row);
        pivot_row += 1;
    }
    for r in pivot_row..rows {
        if rhs[r].abs() > 1e-8 {
            return None;
        }
    }
    Some((0..k).map(|c| rhs[pivots[c]] / m[pivots[c]][c]).collect())
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

pub struct VertexEnumeration;

impl LpSolver for VertexEnumeration {
    fn solve(&self, lp: &LinearProgram, tol: f64) -> Result<LpSolution, LpError> {
        let n = lp.var_count();
        let rows = lp.equalities.rows();
        // Variables boxed at zero never move.
        let movable: Vec<usize> = (0..n).filter(|&j| lp.upper[j] > 0.0).collect();
        let mut best: Option<LpSolution> = None;
        for size in 0..=rows.min(movable.len()) {
            for basis in combinations(movable.len(), size) {
                let basis: Vec<usize> = basis.iter().map(|&i| movable[i]).collect();
                let nonbasic: Vec<usize> = movable.iter().copied().filter(|j| !basis.contains(j)).collect();
                for mask in 0u64..(1u64 << nonbasic.len()) {
                    let mut x = vec![0.0; n];
                    for (t, &j) in nonbasic.iter().enumerate() {
                        if mask & (1 << t) != 0 {
                            x[j] = lp.upper[j];
                        }
                    }
                    let rhs: Vec<f64> = (0..rows)
                        .map(|i| {
                            lp.rhs[i]
                                - (0..n).map(|j| lp.equalities.get(i, j) * x[j]).sum::<f64>()
                        })
                        .collect();
                    let m: Vec<Vec<f64>> = (0..rows)
                        .map(|i| basis.iter().map(|&j| lp.equalities.get(i, j)).collect())
                        .collect();
                    let Some(xb) = solve_dense(m, rhs, basis.len()) else {
                        continue;
                    };
                    if basis
                        .iter()
                        .zip(&xb)
                        .any(|(&j, &v)| v < -1e-9 || v > lp.upper[j] + 1e-9)
                    {
                        continue;
                    }
                    for (&j, &v) in basis.iter().zip(&xb) {
                        x[j] = v.clamp(0.0, lp.upper[j]);
                    }
                    if lp.residual(&x) > 1e-7 {
                        continue;
                    }
                    let obj = lp.objective(&x);
                    if best.as_ref().map_or(true, |b| obj < b.objective - tol) {
                        best = Some(LpSolution { x, objective: obj });
                    }
                }
            }
        }
        best.ok_or(LpError::Infeasible)
    }
}

// ---------------------------------------------------------------------------
// Flow oracle: enumerate integer amounts along simple source-to-sink paths.

/// A directed step along edge `k`; `forward` follows the incidence
/// orientation.
#[derive(Clone, Copy, Debug)]
struct Step {
    edge: usize,
    forward: bool,
}

fn simple_paths(net: &Network, usable: &[bool], from: usize, to: usize) -> Vec<Vec<Step>> {
    fn dfs(
        net: &Network,
        usable: &[bool],
        at: usize,
        to: usize,
        seen: &mut Vec<usize>,
        path: &mut Vec<Step>,
        out: &mut Vec<Vec<Step>>,
    ) {
        if at == to {
            out.push(path.clone());
            return;
        }
        for k in 0..net.edge_count() {
            if !usable[k] {
                continue;
            }
            let (tail, head) = net.edge_endpoints(k).unwrap();
            let step = if tail == at {
                Some((head, true))
            } else if head == at {
                Some((tail, false))
            } else {
                None
            };
            if let Some((next, forward)) = step {
                if seen.contains(&next) {
                    continue;
                }
                seen.push(next);
                path.push(Step { edge: k, forward });
                dfs(net, usable, next, to, seen, path, out);
                path.pop();
                seen.pop();
            }
        }
    }
    let mut out = Vec::new();
    dfs(net, usable, from, to, &mut vec![from], &mut Vec::new(), &mut out);
    out
}

/// Min cost of serving `demand` (integer units at each node) for `payer`
/// by integer path flows, plus the residual after committing them.
/// Integer data makes integer path flows optimal.
pub fn path_enumeration_cost(
    net: &Network,
    coalition: Coalition,
    payer: usize,
    demand: &[f64],
    state: &ResidualState,
) -> Option<(f64, ResidualState)> {
    let m = net.edge_count();
    let access = gaspower_core::AccessSet::for_coalition(net, coalition);
    let usable: Vec<bool> = (0..m).map(|k| access.usable_edges.contains(&k)).collect();
    let edge_cost: Vec<f64> = (0..m)
        .map(|k| {
            net.transport_cost.get(payer, k)
                + (0..net.player_count())
                    .filter(|&i| i != payer)
                    .map(|i| net.transport_fee.get(i, k))
                    .sum::<f64>()
        })
        .collect();

    // Options: (source, sink node, path, unit cost).
    let sinks: Vec<usize> = (0..net.node_count()).filter(|&j| demand[j] > 0.0).collect();
    let mut options = Vec::new();
    for &r in &access.usable_sources {
        let host = net.source_node(r).unwrap();
        for &sink in &sinks {
            for path in simple_paths(net, &usable, host, sink) {
                let unit = net.source_unit_cost(r) + path.iter().map(|s| edge_cost[s.edge]).sum::<f64>();
                options.push((r, sink, path, unit));
            }
        }
    }

    struct Search<'a> {
        options: &'a [(usize, usize, Vec<Step>, f64)],
        best: Option<(f64, ResidualState)>,
        m: usize,
    }
    fn rec(s: &mut Search, idx: usize, remaining: &mut Vec<f64>, st: &mut ResidualState, cost: f64) {
        if remaining.iter().all(|&d| d == 0.0) {
            if s.best.as_ref().map_or(true, |(b, _)| cost < *b - 1e-9) {
                s.best = Some((cost, st.clone()));
            }
            return;
        }
        if idx == s.options.len() {
            return;
        }
        let (r, sink, ref path, unit) = s.options[idx];
        let mut max = remaining[sink].min(st.l_mod[r]);
        for step in path {
            let slot = if step.forward { step.edge } else { s.m + step.edge };
            max = max.min(st.q_mod[slot]);
        }
        let max = max.floor() as i64;
        for amount in (0..=max).rev() {
            let a = amount as f64;
            remaining[sink] -= a;
            st.l_mod[r] -= a;
            for step in path {
                let slot = if step.forward { step.edge } else { s.m + step.edge };
                st.q_mod[slot] -= a;
            }
            rec(s, idx + 1, remaining, st, cost + a * unit);
            remaining[sink] += a;
            st.l_mod[r] += a;
            for step in path {
                let slot = if step.forward { step.edge } else { s.m + step.edge };
                st.q_mod[slot] += a;
            }
        }
    }
    let mut search = Search {
        options: &options,
        best: None,
        m,
    };
    let mut remaining = demand.to_vec();
    let mut st = state.clone();
    rec(&mut search, 0, &mut remaining, &mut st, 0.0);
    search.best
}

// ---------------------------------------------------------------------------
// Shapley oracle: average marginal contributions over all orders.

pub fn shapley_by_permutations(v: &CharacteristicFunction) -> Vec<f64> {
    let n = v.player_count;
    let mut perm: Vec<usize> = (0..n).collect();
    let mut totals = vec![0.0; n];
    let mut count = 0usize;
    loop {
        let mut c = Coalition::EMPTY;
        for &i in &perm {
            let next = c.with(i);
            totals[i] += v.value(next) - v.value(c);
            c = next;
        }
        count += 1;
        // Next lexicographic permutation.
        let Some(i) = (0..n.saturating_sub(1)).rev().find(|&i| perm[i] < perm[i + 1]) else {
            break;
        };
        let j = (i + 1..n).rev().find(|&j| perm[j] > perm[i]).unwrap();
        perm.swap(i, j);
        perm[i + 1..].reverse();
    }
    totals.iter().map(|t| t / count as f64).collect()
}

pub fn random_game<R: Rng>(rng: &mut R, n: usize) -> CharacteristicFunction {
    let mut values: Vec<f64> = (0..1usize << n).map(|_| rng.gen_range(-50i32..=100) as f64).collect();
    values[0] = 0.0;
    CharacteristicFunction::from_values(n, values).unwrap()
}

// ---------------------------------------------------------------------------
// Scenario generators and hand-built fixtures.

fn tariff(cost: f64, fee: f64) -> Tariff {
    Tariff { cost, fee }
}

/// Random feasible scenario on `nodes` nodes: every demand node has a
/// local backstop large enough to cover it. With `ample`, no capacity or
/// production limit can bind.
pub fn random_scenario<R: Rng>(rng: &mut R, nodes: usize, ample: bool) -> Scenario {
    let players = rng.gen_range(2..=nodes);
    let player_docs: Vec<PlayerDoc> = (0..players)
        .map(|i| PlayerDoc {
            id: format!("P{i}"),
            name: String::new(),
        })
        .collect();
    // First `players` nodes give every player at least one node.
    let owners: Vec<usize> = (0..nodes)
        .map(|j| if j < players { j } else { rng.gen_range(0..players) })
        .collect();
    let demand: Vec<f64> = (0..nodes)
        .map(|_| if rng.gen_bool(0.7) { rng.gen_range(1..=10) as f64 } else { 0.0 })
        .collect();
    let total_demand: f64 = demand.iter().sum();
    let node_docs = (0..nodes)
        .map(|j| NodeDoc {
            id: format!("n{j}"),
            owner: format!("P{}", owners[j]),
            demand: demand[j],
        })
        .collect();

    let mut edges = Vec::new();
    for a in 0..nodes {
        for b in a + 1..nodes {
            if !rng.gen_bool(0.6) {
                continue;
            }
            let (from, to) = if rng.gen_bool(0.5) { (a, b) } else { (b, a) };
            let mut owners_map = BTreeMap::new();
            for j in [from, to] {
                let cost = rng.gen_range(0..=4) as f64;
                let fee = cost + rng.gen_range(0..=3) as f64;
                owners_map.insert(format!("P{}", owners[j]), tariff(cost, fee));
            }
            let capacity = if ample { total_demand + 1.0 } else { rng.gen_range(0..=8) as f64 };
            edges.push(EdgeDoc {
                id: format!("e{}", edges.len()),
                from: format!("n{from}"),
                to: format!("n{to}"),
                capacity,
                tpa: rng.gen_bool(0.5),
                owners: owners_map,
            });
        }
    }

    let mut sources = Vec::new();
    for j in 0..nodes {
        if demand[j] > 0.0 {
            sources.push(SourceDoc {
                id: format!("b{j}"),
                node: format!("n{j}"),
                unit_cost: rng.gen_range(30..=60) as f64,
                capacity: if ample { total_demand + 1.0 } else { demand[j] },
            });
        }
        if rng.gen_bool(0.4) {
            sources.push(SourceDoc {
                id: format!("s{j}"),
                node: format!("n{j}"),
                unit_cost: rng.gen_range(1..=10) as f64,
                capacity: if ample { total_demand + 1.0 } else { rng.gen_range(0..=12) as f64 },
            });
        }
    }

    ScenarioDocument {
        players: player_docs,
        nodes: node_docs,
        edges,
        sources,
        config: ScenarioConfig::default(),
    }
    .into_scenario()
    .unwrap()
}

/// Six players A..F on a two-corridor network: A and C feed hub E, hub F
/// feeds B and D, and a single TPA link E-F of capacity 6 carries all
/// long-distance gas. No transport costs or fees.
pub fn two_corridor() -> Scenario {
    let ids = ["A", "B", "C", "D", "E", "F"];
    let players = ids
        .iter()
        .map(|id| PlayerDoc {
            id: id.to_string(),
            name: String::new(),
        })
        .collect();
    let demand = [0.0, 4.0, 0.0, 6.0, 0.0, 0.0];
    let nodes = ids
        .iter()
        .zip(demand)
        .map(|(id, d)| NodeDoc {
            id: id.to_string(),
            owner: id.to_string(),
            demand: d,
        })
        .collect();
    let edge = |id: &str, from: &str, to: &str, cap: f64| EdgeDoc {
        id: id.into(),
        from: from.into(),
        to: to.into(),
        capacity: cap,
        tpa: true,
        owners: BTreeMap::new(),
    };
    let edges = vec![
        edge("AE", "A", "E", 10.0),
        edge("CE", "C", "E", 10.0),
        edge("EF", "E", "F", 6.0),
        edge("FB", "F", "B", 10.0),
        edge("FD", "F", "D", 10.0),
    ];
    let src = |id: &str, node: &str, cost: f64, cap: f64| SourceDoc {
        id: id.into(),
        node: node.into(),
        unit_cost: cost,
        capacity: cap,
    };
    let sources = vec![
        src("gA", "A", 1.0, 10.0),
        src("gC", "C", 1.0, 10.0),
        src("bB", "B", 10.0, 4.0),
        src("bD", "D", 10.0, 6.0),
    ];
    ScenarioDocument {
        players,
        nodes,
        edges,
        sources,
        config: ScenarioConfig::default(),
    }
    .into_scenario()
    .unwrap()
}

/// Chain A-B-C-D-E. B and D hold cheap limited sources, D also a dearer
/// one, A and E expensive backstops; the two middle links through C are TPA with capacity 1 per
/// direction and pay C a fee of 2 over a cost of 1 per unit.
pub fn nominal_chain() -> Scenario {
    let ids = ["A", "B", "C", "D", "E"];
    let players = ids
        .iter()
        .map(|id| PlayerDoc {
            id: id.to_string(),
            name: String::new(),
        })
        .collect();
    let demand = [5.0, 0.0, 0.0, 0.0, 6.0];
    let nodes = ids
        .iter()
        .zip(demand)
        .map(|(id, d)| NodeDoc {
            id: id.to_string(),
            owner: id.to_string(),
            demand: d,
        })
        .collect();
    let c_tariff: BTreeMap<String, Tariff> = [("C".to_string(), tariff(1.0, 2.0))].into();
    let edge = |id: &str, from: &str, to: &str, cap: f64, tpa: bool, owners: BTreeMap<String, Tariff>| EdgeDoc {
        id: id.into(),
        from: from.into(),
        to: to.into(),
        capacity: cap,
        tpa,
        owners,
    };
    let edges = vec![
        edge("AB", "A", "B", 10.0, false, BTreeMap::new()),
        edge("BC", "B", "C", 1.0, true, c_tariff.clone()),
        edge("CD", "C", "D", 1.0, true, c_tariff),
        edge("DE", "D", "E", 10.0, false, BTreeMap::new()),
    ];
    let src = |id: &str, node: &str, cost: f64, cap: f64| SourceDoc {
        id: id.into(),
        node: node.into(),
        unit_cost: cost,
        capacity: cap,
    };
    let sources = vec![
        src("gB", "B", 1.0, 5.0),
        src("gD", "D", 1.0, 5.0),
        src("hD", "D", 8.0, 5.0),
        src("bA", "A", 100.0, 5.0),
        src("bE", "E", 100.0, 6.0),
    ];
    ScenarioDocument {
        players,
        nodes,
        edges,
        sources,
        config: ScenarioConfig::default(),
    }
    .into_scenario()
    .unwrap()
}
