//! Paraphrase generation controlled by a sentential syntactic exemplar.
//!
//! The model is a sequence VAE with two latent variables: a von Mises-Fisher
//! variable on the unit sphere for semantics and a diagonal Gaussian for
//! syntax. Multi-task objectives (paraphrase reconstruction, word position
//! prediction), POS-based word noising, and a latent-code embedding
//! bottleneck push the two variables apart. The crate also ships the data
//! pipeline (corpus loading, BLEU pair filtering, exemplar mining) and the
//! evaluation suite (BLEU, ROUGE, simplified METEOR, syntactic tree edit
//! distance, encoder probes).

pub mod data;
pub mod distributions;
pub mod latent_codes;
pub mod metrics;
pub mod model;
pub mod objectives;
pub mod parallel;
pub(crate) mod tape;
pub mod train;

pub use tape::{ParamId, ParamSet, SlotMeta};
