//! Block-level version history for Markdown Q&A posts.
//!
//! Post bodies are split into text and code blocks ([`extraction`]), blocks of
//! adjacent versions are linked into lineages ([`history`]), reconstructions
//! are scored against ground truth ([`evaluation`]) and code blocks are grouped
//! into cross-thread clones ([`clones`]). [`corpus_io`] reads post history
//! events and writes the result tables.

pub mod clones;
pub mod corpus_io;
pub mod evaluation;
pub mod extraction;
pub mod history;
pub mod model;
pub mod synth;

pub use model::{BlockRef, BlockType, LocalId, Post, PostBlock, PostBlockVersion, PostHistoryId, PostId, PostVersion};
