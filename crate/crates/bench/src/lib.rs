//! Criterion benchmarks for rastershape; see `benches/retrieval.rs`.
