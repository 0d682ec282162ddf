//! Workloads shared by the criterion benches.

use gaspower_core::fixtures;
use gaspower_core::Scenario;

/// Bundled scenarios by name, smallest first.
pub fn workloads() -> Vec<(&'static str, Scenario)> {
    vec![
        ("example1", fixtures::example1()),
        ("example1_tpa", fixtures::example1_tpa()),
        ("example2", fixtures::example2()),
    ]
}
