//! Resources a coalition may use: edges with both endpoints inside the
//! coalition plus every TPA edge, and sources hosted on member nodes.

use std::collections::BTreeSet;

use crate::coalition::Coalition;
use crate::scenario::Network;

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct AccessSet {
    pub usable_edges: BTreeSet<usize>,
    pub usable_sources: BTreeSet<usize>,
}

impl AccessSet {
    pub fn for_coalition(net: &Network, c: Coalition) -> Self {
        AccessSet {
            usable_edges: accessible_edges(net, c),
            usable_sources: accessible_sources(net, c),
        }
    }
}

fn node_in(net: &Network, node: usize, c: Coalition) -> bool {
    net.owner_of(node).is_some_and(|i| c.contains(i))
}

pub fn accessible_edges(net: &Network, c: Coalition) -> BTreeSet<usize> {
    (0..net.edge_count())
        .filter(|&k| {
            net.tpa[k]
                || net
                    .edge_endpoints(k)
                    .is_some_and(|(a, b)| node_in(net, a, c) && node_in(net, b, c))
        })
        .collect()
}

pub fn accessible_sources(net: &Network, c: Coalition) -> BTreeSet<usize> {
    (0..net.source_count())
        .filter(|&r| net.source_node(r).is_some_and(|j| node_in(net, j, c)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn set(v: &[usize]) -> BTreeSet<usize> {
        v.iter().copied().collect()
    }

    #[test]
    fn example1_edges() {
        let net = fixtures::example1().network;
        let ab = Coalition::from_members([0, 1]);
        assert_eq!(accessible_edges(&net, ab), set(&[0]));
        assert_eq!(accessible_edges(&net, Coalition::grand(3)), set(&[0, 1, 2]));
        let tpa = fixtures::example1_tpa().network;
        assert_eq!(accessible_edges(&tpa, ab), set(&[0, 1, 2]));
        // TPA edges are open to singletons too.
        assert_eq!(accessible_edges(&tpa, Coalition::singleton(1)), set(&[1, 2]));
    }

    #[test]
    fn example_sources() {
        let net = fixtures::example1().network;
        assert_eq!(accessible_sources(&net, Coalition::singleton(1)), set(&[1]));
        assert_eq!(accessible_sources(&net, Coalition::grand(3)), set(&[0, 1, 2]));
        let net2 = fixtures::example2().network;
        assert_eq!(accessible_sources(&net2, Coalition::singleton(3)), set(&[4]));
        // CzSk holds two nodes and both backstops.
        assert_eq!(accessible_sources(&net2, Coalition::singleton(2)), set(&[2, 3]));
    }

    #[test]
    fn monotone_in_coalition() {
        let net = fixtures::example2().network.with_tpa(&[false; 8]);
        let grand = net.grand_coalition();
        for c in grand.subsets() {
            for d in grand.subsets().filter(|d| c.is_subset(*d)) {
                assert!(accessible_edges(&net, c).is_subset(&accessible_edges(&net, d)));
                assert!(accessible_sources(&net, c).is_subset(&accessible_sources(&net, d)));
            }
        }
        assert_eq!(accessible_edges(&net, grand).len(), 8);
        let all = net.with_tpa(&[true; 8]);
        for c in grand.subsets() {
            assert_eq!(accessible_edges(&all, c).len(), 8);
        }
    }
}
