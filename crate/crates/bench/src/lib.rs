//! Fixtures shared by the benchmarks.

use pseudofsr::simgen::{simulate_dataset, SimData};
use pseudofsr::{Family, Scenario};

/// One dataset from the base simulation setting at the given size.
pub fn dataset(family: Family, n: usize, p: usize) -> SimData {
    let sc = Scenario { n, p, ..Scenario::base(family) };
    simulate_dataset(&sc, 0, 0).expect("base scenario is valid")
}
