//! Bargaining power of players in a gas pipeline network where some
//! pipelines fall under regulated third-party access (TPA).
//!
//! The pipeline runs in four stages:
//!
//! 1. [`scenario`]: parse and validate a network document.
//! 2. [`flow`]: for every coalition (alone, or embedded in a partition of
//!    all players) allocate gas flows member by member with min-cost LPs,
//!    recording who pays whom.
//! 3. [`game`]: turn costs and fee transfers into a characteristic
//!    function and a partition function.
//! 4. [`solvers`]: reduce the partition function to its minimal claim
//!    function via the recursive core and compute Shapley values.
//!
//! [`analysis::analyze`] chains everything.

pub mod analysis;
pub mod coalition;
pub mod error;
pub mod export;
pub mod fixtures;
pub mod flow;
pub mod game;
pub mod lp;
pub mod scenario;
pub mod solvers;
pub mod subnetwork;

pub use coalition::{bell_number, enumerate_partitions, Coalition, Partition};
pub use error::{Error, FlowError, GameError, LpError, Result, ScenarioError};
pub use flow::{
    allocate_coalition_flows, allocate_partition_flows, solve_member_flow, PlayerFlow, ResidualState,
    TransferMatrices,
};
pub use game::{build_cff, build_pff, externality, internal_profit, CharacteristicFunction, PartitionFunction, ProfitBreakdown};
pub use lp::{BoundedSimplex, LinearProgram, LpSolution, LpSolver};
pub use scenario::{
    parse_scenario, serialize_scenario, validate, CoalitionOrder, Diagnostic, MemberGranularity, Network, Scenario,
    ScenarioConfig, Severity,
};
pub use solvers::{extended_shapley, minimal_claim, minimal_claim_with, recursive_core_stable_partitions, PayoffDivision, shapley, PowerMethod, PowerReport};
pub use subnetwork::{accessible_edges, accessible_sources, AccessSet};
