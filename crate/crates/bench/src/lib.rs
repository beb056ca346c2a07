//! Criterion benchmarks for the `buffon` crate live in `benches/`.
