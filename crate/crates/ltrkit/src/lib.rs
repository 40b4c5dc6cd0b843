//! File formats, corpus manifests and the `ltrkit` command-line tool built on
//! [`ltrkit_core`].

pub mod cli;
pub mod container;
pub mod dataset;
pub mod manifest;
pub mod trn;
pub mod wav;

pub use ltrkit_core as core;
