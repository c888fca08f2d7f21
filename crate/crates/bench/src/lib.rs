//! Benchmark harness: scenario families, the multi-seed suite runner, and
//! snapshot plotting.

pub mod scenarios;
pub mod suite;
pub mod svg;
