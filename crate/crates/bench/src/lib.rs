//! Graph fixtures shared by the benchmarks.

use qcp_core::{QuantumGraph, QuantumSpace};

pub fn fixtures() -> Vec<(&'static str, QuantumGraph)> {
    let tracial = |sizes: &[usize]| QuantumSpace::tracial(sizes.to_vec()).expect("tracial state");
    vec![
        ("main_n1", QuantumGraph::main_example(1).expect("main example")),
        ("main_n2", QuantumGraph::main_example(2).expect("main example")),
        ("complete_m2", QuantumGraph::complete(tracial(&[2])).expect("complete graph")),
        ("trivial_c3", QuantumGraph::trivial(tracial(&[1, 1, 1])).expect("trivial graph")),
    ]
}
