//! Command-line front end for `tripod-vortex`: configuration and presets,
//! deterministic CSV emission, and the validation suite.

pub mod config;
pub mod measure;
pub mod output;
pub mod run;
pub mod validate;
