//! Command implementations behind the `emoddm` binary.

pub mod commands;
pub mod config;
pub mod defaults;
pub mod svg;
