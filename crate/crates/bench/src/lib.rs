//! Criterion benchmarks for the corner search, set construction and radius selection.
