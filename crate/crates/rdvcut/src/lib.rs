//! Text formats, JSON certificates, random protocol generation and the
//! command line for the `rdvcut-core` cut-off analyser.

pub mod cli;
pub mod format;
pub mod json;
pub mod random;

pub use rdvcut_core as core;
