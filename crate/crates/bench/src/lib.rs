//! Criterion benchmarks for the numerical kernels of `hopf-core`; see `benches/kernels.rs`.
