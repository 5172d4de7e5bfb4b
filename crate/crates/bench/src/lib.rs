//! Criterion benchmarks for `mallows-core`; see `benches/`.
