//! Criterion benchmarks for `fama-core`; see `benches/`.
