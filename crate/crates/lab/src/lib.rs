//! Experiment runner for the random connection model: configuration files,
//! run manifests, tabular outputs and SVG rendering on top of `rcm-core`.

pub mod table;

pub mod commands;
pub mod config;
pub mod error;
pub mod fixtures;
pub mod manifest;
pub mod render;

pub use rcm_core;
