//! Benchmarks for the core operators live in `benches/`.
