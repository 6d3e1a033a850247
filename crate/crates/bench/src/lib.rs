//! Benchmark-only crate; see `benches/monodromy.rs`.
