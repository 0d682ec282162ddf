//! Bundled scenarios: the 3-node illustration network (with its TPA and
//! raised-fee variants) and the 6-node Central-Eastern-Europe transit case.

use crate::scenario::{parse_scenario, Scenario};

pub const EXAMPLE1: &str = include_str!("../fixtures/example1.json");
pub const EXAMPLE1_TPA: &str = include_str!("../fixtures/example1_tpa.json");
pub const EXAMPLE1_FEE_PRIME: &str = include_str!("../fixtures/example1_fee_prime.json");
pub const EXAMPLE2: &str = include_str!("../fixtures/example2.json");

/// 3-node network, no TPA.
pub fn example1() -> Scenario {
    parse_scenario(EXAMPLE1).expect("bundled fixture parses")
}

/// 3-node network with edges 2 and 3 under TPA.
pub fn example1_tpa() -> Scenario {
    parse_scenario(EXAMPLE1_TPA).expect("bundled fixture parses")
}

/// 3-node network with A's fee on edge 1 raised from 4 to 5.
pub fn example1_fee_prime() -> Scenario {
    parse_scenario(EXAMPLE1_FEE_PRIME).expect("bundled fixture parses")
}

/// Po / Au / CzSk / Ua / Ru transit network, all edges TPA.
pub fn example2() -> Scenario {
    parse_scenario(EXAMPLE2).expect("bundled fixture parses")
}
