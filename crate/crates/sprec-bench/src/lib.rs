//! Benchmark-only crate; see `benches/engines.rs`.
//!
//! Shared fixtures for the benchmarks live here so the bench target stays
//! a thin harness.

use sprec_core::Distribution;

/// Exponential chain with the given rates, named T1..Tn.
pub fn exponential_chain(rates: &[f64]) -> Vec<Distribution> {
    rates
        .iter()
        .enumerate()
        .map(|(i, &r)| Distribution::exponential(r).unwrap().with_name(format!("T{}", i + 1)))
        .collect()
}

/// The classic non-transitive discrete triple.
pub fn blyth_triple() -> Vec<Distribution> {
    vec![
        Distribution::discrete(vec![(3.0, 1.0)]).unwrap().with_name("T1"),
        Distribution::discrete(vec![(1.0, 0.4), (4.0, 0.6)]).unwrap().with_name("T2"),
        Distribution::discrete(vec![(2.0, 0.6), (5.0, 0.4)]).unwrap().with_name("T3"),
    ]
}
