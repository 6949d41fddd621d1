//! Criterion benchmarks for phscale live in `benches/`.
