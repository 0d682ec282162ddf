//! Coalition values from flow costs and transfer matrices.
//!
//! A coalition's value is the cost saving against its members' singleton
//! reference costs plus the transport profit it keeps: fees received minus
//! costs borne for transports of other players. In characteristic function
//! form only transports between members count; embedded in a partition,
//! profits earned from outsiders' transports count too.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::coalition::{enumerate_partitions, Coalition, Partition, MAX_PLAYERS};
use crate::error::GameError;
use crate::flow::{evaluate_coalitions_with, PartitionFlows, TransferMatrices};
use crate::lp::BoundedSimplex;
use crate::scenario::{Network, ScenarioConfig};

#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize)]
pub struct ProfitBreakdown {
    pub internal: f64,
    pub external: f64,
}

impl ProfitBreakdown {
    pub fn total(&self) -> f64 {
        self.internal + self.external
    }
}

/// Value of one (possibly embedded) coalition together with the pieces it
/// was assembled from.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize)]
pub struct ValueRecord {
    pub value: f64,
    /// Coalition cost: sum of its members' LP optima.
    pub phi: f64,
    pub profit: ProfitBreakdown,
}

/// Fees members receive from other members minus transport costs members
/// bear for other members' transports. A player's own transport cost is
/// already part of its LP cost and is not counted again.
pub fn internal_profit(tm: &TransferMatrices, c: Coalition) -> f64 {
    let mut total = 0.0;
    for i in c.members() {
        for j in c.members().filter(|&j| j != i) {
            total += tm.r.get(i, j) - tm.q.get(i, j);
        }
    }
    total
}

/// Net fee-over-cost income that transports of `from` generate for `to`.
pub fn externality(tm: &TransferMatrices, from: Coalition, to: Coalition) -> f64 {
    let mut total = 0.0;
    for i in to.members() {
        for j in from.members() {
            total += tm.r.get(i, j) - tm.q.get(i, j);
        }
    }
    total
}

/// Game in characteristic function form, indexed by coalition bit mask.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CharacteristicFunction {
    pub player_count: usize,
    /// `values[mask]`; index 0 (the empty coalition) is always 0.
    pub values: Vec<f64>,
    /// Singleton reference costs used to build the values, when known.
    pub reference_costs: Vec<f64>,
    /// Per-coalition breakdown, when the game came from flows.
    pub records: Option<Vec<ValueRecord>>,
}

impl CharacteristicFunction {
    pub fn from_values(player_count: usize, values: Vec<f64>) -> Result<Self, GameError> {
        if player_count == 0 || player_count > MAX_PLAYERS {
            return Err(GameError::PlayerCount(player_count));
        }
        assert_eq!(values.len(), 1 << player_count, "one value per coalition mask");
        Ok(CharacteristicFunction {
            player_count,
            values,
            reference_costs: Vec::new(),
            records: None,
        })
    }

    /// Builds a game from `(coalition, value)` pairs; unlisted coalitions
    /// (including singletons) are worth 0.
    pub fn from_pairs<I: IntoIterator<Item = (Coalition, f64)>>(player_count: usize, pairs: I) -> Result<Self, GameError> {
        if player_count == 0 || player_count > MAX_PLAYERS {
            return Err(GameError::PlayerCount(player_count));
        }
        let mut values = vec![0.0; 1 << player_count];
        for (c, v) in pairs {
            values[c.bits() as usize] = v;
        }
        values[0] = 0.0;
        Self::from_values(player_count, values)
    }

    pub fn value(&self, c: Coalition) -> f64 {
        self.values[c.bits() as usize]
    }

    pub fn grand(&self) -> Coalition {
        Coalition::grand(self.player_count)
    }
}

/// Game in partition function form over all partitions of the player set.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PartitionFunction {
    pub player_count: usize,
    pub partitions: Vec<Partition>,
    /// `records[p][b]` belongs to block `b` of partition `p`.
    pub records: Vec<Vec<ValueRecord>>,
    pub reference_costs: Vec<f64>,
    #[serde(skip)]
    index: HashMap<Partition, usize>,
}

impl PartitionFunction {
    fn assemble(player_count: usize, partitions: Vec<Partition>, records: Vec<Vec<ValueRecord>>, reference_costs: Vec<f64>) -> Self {
        let index = partitions.iter().cloned().enumerate().map(|(i, p)| (p, i)).collect();
        PartitionFunction {
            player_count,
            partitions,
            records,
            reference_costs,
            index,
        }
    }

    /// Builds a partition function from explicit values, e.g. a table.
    /// Every block of every partition must be covered.
    pub fn from_values<I>(player_count: usize, entries: I) -> Result<Self, GameError>
    where
        I: IntoIterator<Item = (Partition, Vec<f64>)>,
    {
        let partitions = enumerate_partitions(player_count)?;
        let given: HashMap<Partition, Vec<f64>> = entries.into_iter().collect();
        let mut records = Vec::with_capacity(partitions.len());
        for p in &partitions {
            let vals = given.get(p).filter(|v| v.len() == p.len()).ok_or_else(|| GameError::MissingValue {
                coalition: "*".into(),
                partition: format!("{p:?}"),
            })?;
            records.push(
                vals.iter()
                    .map(|&value| ValueRecord {
                        value,
                        ..Default::default()
                    })
                    .collect(),
            );
        }
        Ok(Self::assemble(player_count, partitions, records, Vec::new()))
    }

    pub fn partition_index(&self, p: &Partition) -> Option<usize> {
        self.index.get(p).copied()
    }

    pub fn record(&self, c: Coalition, p: &Partition) -> Option<&ValueRecord> {
        let pi = self.partition_index(p)?;
        let b = p.position(c)?;
        self.records[pi].get(b)
    }

    /// `v_P(C)`; `None` when `C` is not a block of `P`.
    pub fn value(&self, c: Coalition, p: &Partition) -> Option<f64> {
        self.record(c, p).map(|r| r.value)
    }

    pub fn grand(&self) -> Coalition {
        Coalition::grand(self.player_count)
    }

    /// Values of blocks of the partition with index `pi`, aligned with its
    /// blocks.
    pub fn values_of(&self, pi: usize) -> Vec<f64> {
        self.records[pi].iter().map(|r| r.value).collect()
    }
}

/// Value of `c` from its flows: reference costs minus its cost plus the
/// profit split into internal and external parts.
fn embedded_record(reference: &[f64], c: Coalition, phi: f64, tm: &TransferMatrices, others: Coalition) -> ValueRecord {
    let reference_sum: f64 = c.members().map(|i| reference[i]).sum();
    let profit = ProfitBreakdown {
        internal: internal_profit(tm, c),
        external: externality(tm, others, c),
    };
    ValueRecord {
        value: reference_sum - phi + profit.total(),
        phi,
        profit,
    }
}

fn check_players(net: &Network) -> Result<usize, GameError> {
    let n = net.player_count();
    if n == 0 || n > MAX_PLAYERS {
        return Err(GameError::PlayerCount(n));
    }
    Ok(n)
}

/// Evaluates a coalition alone on an empty network.
pub fn isolated_flows(net: &Network, c: Coalition, config: &ScenarioConfig) -> Result<PartitionFlows, GameError> {
    Ok(evaluate_coalitions_with(&BoundedSimplex::default(), net, &[c], config)?)
}

/// Characteristic function: every nonempty coalition evaluated alone, with
/// singleton costs as reference and only internal transport profit kept.
/// Fees paid to outsiders stay a cost and are credited to no one.
pub fn build_cff(net: &Network, config: &ScenarioConfig) -> Result<CharacteristicFunction, GameError> {
    let n = check_players(net)?;
    let masks: Vec<u32> = (1..(1u32 << n)).collect();
    let evaluated: Vec<(f64, TransferMatrices)> = masks
        .par_iter()
        .map(|&mask| {
            let c = Coalition::from_bits(mask);
            isolated_flows(net, c, config).map(|pf| (pf.coalition_costs[0], pf.transfers))
        })
        .collect::<Result<_, _>>()?;

    let reference: Vec<f64> = (0..n).map(|i| evaluated[(1usize << i) - 1].0).collect();
    let mut values = vec![0.0; 1 << n];
    let mut records = vec![ValueRecord::default(); 1 << n];
    for (&mask, (phi, tm)) in masks.iter().zip(&evaluated) {
        let c = Coalition::from_bits(mask);
        let rec = embedded_record(&reference, c, *phi, tm, Coalition::EMPTY);
        values[mask as usize] = rec.value;
        records[mask as usize] = rec;
    }
    Ok(CharacteristicFunction {
        player_count: n,
        values,
        reference_costs: reference,
        records: Some(records),
    })
}

/// Partition function plus the flow evaluations behind it.
#[derive(Clone, Debug)]
pub struct PffBuild {
    pub game: PartitionFunction,
    pub flows: Vec<PartitionFlows>,
}

/// Partition function: every partition evaluated with a shared residual
/// state, reference costs taken from the all-singleton partition.
pub fn build_pff(net: &Network, config: &ScenarioConfig) -> Result<PartitionFunction, GameError> {
    build_pff_with_flows(net, config).map(|b| b.game)
}

pub fn build_pff_with_flows(net: &Network, config: &ScenarioConfig) -> Result<PffBuild, GameError> {
    let n = check_players(net)?;
    let partitions = enumerate_partitions(n)?;
    let flows: Vec<PartitionFlows> = partitions
        .par_iter()
        .map(|p| evaluate_coalitions_with(&BoundedSimplex::default(), net, p.blocks(), config))
        .collect::<Result<_, _>>()?;

    // Restricted-growth order puts the all-singleton partition last.
    let singletons = flows.last().expect("at least one partition");
    let reference: Vec<f64> = (0..n)
        .map(|i| singletons.cost_of(Coalition::singleton(i)).expect("singleton block"))
        .collect();

    let grand = Coalition::grand(n);
    let records = partitions
        .iter()
        .zip(&flows)
        .map(|(p, pf)| {
            p.blocks()
                .iter()
                .zip(&pf.coalition_costs)
                .map(|(&c, &phi)| embedded_record(&reference, c, phi, &pf.transfers, grand.difference(c)))
                .collect()
        })
        .collect();
    Ok(PffBuild {
        game: PartitionFunction::assemble(n, partitions, records, reference),
        flows,
    })
}
