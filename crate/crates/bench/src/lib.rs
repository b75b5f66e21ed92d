//! Criterion benchmarks for the polykit kernels; see `benches/`.
