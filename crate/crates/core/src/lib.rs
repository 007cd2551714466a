//! Toolkit for measuring gender-agreement behaviour of machine translation
//! systems on literary-style dialogue.
//!
//! The pipeline has five stages, each usable on its own:
//!
//! 1. [`vocab`] loads the annotated adjective/adverb/occupation sets.
//! 2. [`templgen`] expands the dialogue template families into a deterministic
//!    test suite of English source passages with per-slot metadata.
//! 3. [`extract`] aligns each adjective slot with a token in a system's
//!    translation, and [`gendertag`] labels that token's grammatical gender
//!    using dictionary evidence ([`dictclient`]) with a morphological
//!    fallback.
//! 4. [`metrics`] computes balanced proportion/accuracy reports and delta
//!    effect statistics.
//! 5. [`regress`] fits the logistic-regression models that rank the factors
//!    driving a system's gender choices.
//!
//! [`pipeline`] ties the stages together behind a single config and writes
//! reproducible JSON-lines artifacts between them.

pub mod dictclient;
pub mod extract;
pub mod gendertag;
pub mod metrics;
pub mod pipeline;
pub mod regress;
pub mod templgen;
pub mod vocab;

mod types;

pub use types::{BinaryGender, GenderLabel, Language};

use sha2::{Digest, Sha256};

/// Hex-encoded SHA-256 of a byte string; the digest used for every artifact
/// and manifest entry.
pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    hex::encode(hasher.finalize())
}
