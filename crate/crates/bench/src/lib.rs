//! Criterion benchmarks for the analysis engine; see `benches/engine.rs`.
