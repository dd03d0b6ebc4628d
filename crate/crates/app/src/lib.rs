//! Command-line extraction and the exploration HTTP service.

pub mod cli;
pub mod service;
pub mod store;
