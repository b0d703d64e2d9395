//! Criterion benchmarks for the search kernels; see `benches/search.rs`.
