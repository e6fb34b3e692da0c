//! Criterion benchmarks for refinery-core live in `benches/`.
