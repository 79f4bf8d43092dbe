//! Criterion benchmarks for `groundgame`; see `benches/`.
