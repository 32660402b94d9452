//! Criterion benchmarks for the qskyrm pipeline; run `cargo bench -p qskyrm-bench`.
