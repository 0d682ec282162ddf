//! End-to-end analysis of one scenario.

use crate::error::Result;
use crate::flow::PartitionFlows;
use crate::game::{build_cff, build_pff_with_flows, CharacteristicFunction, PartitionFunction};
use crate::scenario::Scenario;
use crate::solvers::{minimal_claim_with, MinimalClaim, PowerReport};

#[derive(Clone, Debug)]
pub struct Analysis {
    pub cff: CharacteristicFunction,
    pub pff: PartitionFunction,
    pub pff_flows: Vec<PartitionFlows>,
    pub minimal_claim: MinimalClaim,
    pub cff_shapley: PowerReport,
    pub minimal_claim_shapley: PowerReport,
    pub extended_shapley: PowerReport,
}

impl Analysis {
    pub fn reports(&self) -> [&PowerReport; 3] {
        [&self.cff_shapley, &self.minimal_claim_shapley, &self.extended_shapley]
    }
}

/// CFF, PFF, minimal claim and all three power indices.
pub fn analyze(scenario: &Scenario) -> Result<Analysis> {
    let net = &scenario.network;
    let ids = &net.player_ids;
    let cff = build_cff(net, &scenario.config)?;
    let pff_build = build_pff_with_flows(net, &scenario.config)?;
    let mc = minimal_claim_with(
        &pff_build.game,
        scenario.config.pessimistic_fallback,
        scenario.config.payoff_division,
    )?;
    Ok(Analysis {
        cff_shapley: PowerReport::cff(ids, &cff),
        minimal_claim_shapley: PowerReport::minimal_claim(ids, &mc),
        extended_shapley: PowerReport::extended(ids, &pff_build.game),
        cff,
        pff: pff_build.game,
        pff_flows: pff_build.flows,
        minimal_claim: mc,
    })
}
