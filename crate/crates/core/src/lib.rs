//! Table-aware retrieval and question answering over benefits documents.

pub mod build;
pub mod eval;
pub mod fixtures;
pub mod index;
pub mod ingest;
pub mod linearize;
pub mod qa;
pub mod tablemodel;
pub(crate) mod text;
