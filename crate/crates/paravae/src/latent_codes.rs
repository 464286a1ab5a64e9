//! Latent-code (LC) bottleneck embeddings for the syntactic encoder, their
//! marginalization, and cluster inspection tooling.
//!
//! Each word's shared base embedding feeds `num_codes` small feedforward
//! networks, each producing a softmax over `classes_per_code` cluster vectors.
//! The word embedding is the concatenation of the per-code expected cluster
//! vectors; the expectation (not a hard sample) is used at both training and
//! test time.

use crate::model::{Model, ModelError, Result};
use crate::tape::Tape;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct CodeEmbeddingConfig {
    pub num_codes: usize,
    pub classes_per_code: usize,
    /// Shared base-embedding dimension feeding the per-code networks.
    pub base_dim: usize,
}

impl Default for CodeEmbeddingConfig {
    fn default() -> Self {
        CodeEmbeddingConfig { num_codes: 10, classes_per_code: 2, base_dim: 100 }
    }
}

impl CodeEmbeddingConfig {
    pub fn validate(&self, total_embedding_dim: usize) -> std::result::Result<(), String> {
        if self.num_codes == 0 {
            return Err("latent_code.num_codes must be positive".into());
        }
        if self.classes_per_code < 2 {
            return Err("latent_code.classes_per_code must be at least 2".into());
        }
        if self.base_dim == 0 {
            return Err("latent_code.base_dim must be positive".into());
        }
        if total_embedding_dim % self.num_codes != 0 {
            return Err(format!(
                "embedding_dim {total_embedding_dim} is not divisible by num_codes {}",
                self.num_codes
            ));
        }
        Ok(())
    }

    pub fn per_code_dim(&self, total_embedding_dim: usize) -> usize {
        total_embedding_dim / self.num_codes
    }

    /// Number of distinct cluster ids this configuration can produce.
    pub fn cluster_capacity(&self) -> usize {
        self.classes_per_code.pow(self.num_codes as u32)
    }
}

fn lc_net(model: &Model) -> Result<&crate::model::net::LatentCodeNet> {
    model
        .net()
        .latent_code_net()
        .ok_or(ModelError::LatentCodesDisabled)
}

fn check_word(model: &Model, word: usize) -> Result<()> {
    if word >= model.vocab().size() {
        return Err(ModelError::TokenOutOfRange { id: word, vocab: model.vocab().size() });
    }
    Ok(())
}

/// Per-code softmax distributions for one word type.
pub fn code_distributions(model: &Model, word: usize) -> Result<Vec<Vec<f64>>> {
    check_word(model, word)?;
    let lc = lc_net(model)?;
    let mut tape = Tape::new(model.params());
    Ok(lc
        .distribution_nodes(&mut tape, word)
        .into_iter()
        .map(|n| tape.value(n).to_vec())
        .collect())
}

/// Marginalized embedding: concat over codes of the expected cluster vector.
pub fn code_embed(model: &Model, word: usize) -> Result<Vec<f64>> {
    check_word(model, word)?;
    let lc = lc_net(model)?;
    let mut tape = Tape::new(model.params());
    let node = lc.embed_node(&mut tape, word);
    Ok(tape.value(node).to_vec())
}

/// Per-code argmax indices, ties broken toward the lowest class index.
pub fn cluster_assign(model: &Model, word: usize) -> Result<Vec<usize>> {
    let dists = code_distributions(model, word)?;
    Ok(dists
        .iter()
        .map(|d| {
            let mut best = 0usize;
            for (i, v) in d.iter().enumerate() {
                if *v > d[best] {
                    best = i;
                }
            }
            best
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterEntry {
    pub id: Vec<usize>,
    pub size: usize,
    pub samples: Vec<String>,
}

/// Cluster membership over the non-reserved vocabulary, sorted by descending
/// member count (then by cluster id). Counts partition the vocabulary.
pub fn cluster_report(model: &Model, max_samples: usize) -> Result<Vec<ClusterEntry>> {
    lc_net(model)?;
    let mut groups: std::collections::BTreeMap<Vec<usize>, Vec<usize>> =
        std::collections::BTreeMap::new();
    for word in model.vocab().word_ids() {
        let id = cluster_assign(model, word)?;
        groups.entry(id).or_default().push(word);
    }
    let mut entries: Vec<ClusterEntry> = groups
        .into_iter()
        .map(|(id, members)| ClusterEntry {
            id,
            size: members.len(),
            samples: members
                .iter()
                .take(max_samples)
                .map(|&w| model.vocab().token(w).to_string())
                .collect(),
        })
        .collect();
    entries.sort_by(|a, b| b.size.cmp(&a.size).then_with(|| a.id.cmp(&b.id)));
    Ok(entries)
}

/// Tab-separated lines: cluster-id, size, space-joined samples.
pub fn render_cluster_report(entries: &[ClusterEntry]) -> String {
    let mut out = String::new();
    for e in entries {
        let id: Vec<String> = e.id.iter().map(|v| v.to_string()).collect();
        out.push_str(&format!("{}\t{}\t{}\n", id.join("-"), e.size, e.samples.join(" ")));
    }
    out
}
