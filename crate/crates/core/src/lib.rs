//! Hierarchical table model, block enumeration, fact extraction and
//! exploration state for multi-level tables.

pub mod blocks;
pub mod error;
pub mod facts;
pub mod ingest;
pub mod table_model;
pub mod charts;
pub mod config;
pub mod layout;
pub mod pipeline;
pub mod explore;
pub mod synth;
