//! Criterion benchmarks for the frob-core kernels live under `benches/`.
