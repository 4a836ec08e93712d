//! Bilingual word embeddings from multilingual wordnets and text.
//!
//! The crate covers the whole toolchain:
//!
//! * [`kb`] loads a concept graph and per-language lexicalizations,
//! * [`walker`] turns the graph into monolingual or bilingual synthetic
//!   corpora with damped random walks,
//! * [`corpus`] merges, truncates and balances natural and synthetic text,
//! * [`constraints`] mines synonym and translation pairs from the lexicon,
//! * [`embed`] trains skipgram with negative sampling plus an L2 pull between
//!   constrained word pairs,
//! * [`mapping`] fits the orthogonal cross-space map used as a baseline,
//! * [`eval`] scores similarity datasets with Spearman correlation,
//! * [`pipeline`] wires the stages into the txt / kb / hyb experiments.

pub mod constraints;
pub mod corpus;
pub mod embed;
pub mod error;
pub mod eval;
pub mod kb;
pub mod mapping;
pub mod pipeline;
pub mod rng;
pub mod walker;

pub use error::{Error, Result};
