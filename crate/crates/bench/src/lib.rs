//! Benchmarks for the ceeat kernels; see benches/.
