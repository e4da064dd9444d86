//! Toolkit for working with Chinese character decomposition in machine
//! translation pipelines.
//!
//! The crate is organized around a small processing chain:
//!
//! * [`ids`] parses an IDS (Ideographic Description Sequence) dictionary into
//!   expression trees and picks one expression per character by region
//!   preference.
//! * [`decompose`] turns the selected expressions into an immutable lookup
//!   table and produces flat piece sequences at a configurable depth, up to
//!   the stroke-level fixpoint.
//! * [`corpus`] streams word-segmented parallel corpora through the
//!   decomposer while preserving word boundaries.
//! * [`mwe`] extracts multiword-expression candidates from PoS-tagged text,
//!   pairs and scores them bilingually, and injects glossaries into training
//!   corpora.
//! * [`metrics`] implements corpus BLEU, vocabulary reports, Direct
//!   Assessment aggregation, and rank-sum based system clustering.

pub mod corpus;
pub mod decompose;
pub mod ids;
pub mod metrics;
pub mod mwe;
