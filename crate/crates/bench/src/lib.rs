//! Criterion benchmarks for the Ceresa pipeline live under `benches/`.
