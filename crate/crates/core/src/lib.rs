//! Compressed inverted index for conjunctive Boolean retrieval, with query
//! strategies that replace part of the postings data by a term-document
//! membership model, and estimators for the storage that replacement saves.
//!
//! Pipeline: [`corpus::Corpus`] → [`index::InvertedIndex`] →
//! [`partition::TieredIndex`] / [`partition::BlockIndex`] → [`engine`]
//! strategies driven by a [`membership::MembershipModel`]. The [`analysis`]
//! module estimates gains and guarantee rates; [`format`] persists indexes.

pub mod analysis;
pub mod cli;
pub mod corpus;
pub mod engine;
pub mod format;
pub mod index;
pub mod membership;
pub mod partition;
pub mod selftest;
pub mod synth;

pub type DocId = u32;
pub type TermId = u32;

pub use corpus::{tokenize, Corpus, Query, Vocabulary};
pub use engine::{query_block, query_exhaustive, query_oracle, query_tiered, QueryResult};
pub use index::{intersect, CompressedPostings, InvertedIndex, PostingsList};
pub use membership::{BloomModel, ExactModel, MembershipModel, Scope};
pub use partition::{BlockIndex, TieredIndex};
