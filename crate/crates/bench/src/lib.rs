//! Criterion benchmarks for the flight and thermal integrators; see `benches/`.
