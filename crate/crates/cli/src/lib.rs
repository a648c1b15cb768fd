//! Library surface of the `opalg` experiment harness: configuration
//! loading, report schema, and experiment execution. The binary in
//! `main.rs` is a thin wrapper over [`run::prepare`] and [`run::run_to_json`].

pub mod config;
pub mod report;
pub mod run;
