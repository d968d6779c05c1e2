//! Benchmark-only crate; see `benches/fitting.rs`.
