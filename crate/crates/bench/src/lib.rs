//! Criterion benchmarks for the netinf kernels live under `benches/`.
