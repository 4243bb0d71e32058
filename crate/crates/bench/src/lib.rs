//! Criterion benchmarks for the permanent, determinant and suppression-law
//! kernels. Run with `cargo bench -p multiport-bench`.
