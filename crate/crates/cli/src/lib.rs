//! Experiment harness: configuration parsing, seed sweeps, certificate
//! generation, and report emission for the phase retrieval pipeline.

pub mod commands;
pub mod config;
pub mod report;
