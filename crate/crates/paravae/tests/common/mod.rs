//! Shared helpers for the integration suites: tiny model factories, a
//! finite-difference harness, brute-force oracles, and temp-file plumbing.

#![allow(dead_code)]

pub mod oracles;
pub mod synth;

use paravae::latent_codes::CodeEmbeddingConfig;
use paravae::model::{Model, ModelConfig, Vocabulary};
use paravae::objectives::{WplConfig, WplPlacement};
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};

static TEMP_COUNTER: AtomicU64 = AtomicU64::new(0);

/// A unique temp directory for one test.
pub fn temp_dir(tag: &str) -> PathBuf {
    let n = TEMP_COUNTER.fetch_add(1, Ordering::Relaxed);
    let dir = std::env::temp_dir().join(format!(
        "paravae-test-{}-{tag}-{n}",
        std::process::id()
    ));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

pub fn write_file(dir: &std::path::Path, name: &str, content: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, content).unwrap();
    path
}

/// Vocabulary of `n` distinct words w0..w(n-1).
pub fn tiny_vocab(n: usize) -> Vocabulary {
    Vocabulary::from_tokens((0..n).map(|i| format!("w{i}"))).unwrap()
}

/// A configuration small enough for finite-difference sweeps.
pub fn tiny_config() -> ModelConfig {
    ModelConfig {
        embedding_dim: 6,
        semantic_dim: 4,
        syntactic_dim: 3,
        encoder_hidden: 5,
        decoder_hidden: 6,
        ffn_depth: 3,
        decoder_variant: paravae::model::DecoderVariant::Standard,
        latent_code: None,
        wpl: WplConfig { placement: WplPlacement::None, max_position: 8, head_depth: 2 },
        max_decode_len: 10,
        beam_size: 4,
    }
}

pub fn tiny_lc_config() -> CodeEmbeddingConfig {
    CodeEmbeddingConfig { num_codes: 2, classes_per_code: 2, base_dim: 4 }
}

pub fn tiny_model(vocab_words: usize, config: ModelConfig, seed: u64) -> Model {
    Model::new(config, tiny_vocab(vocab_words), seed).unwrap()
}

/// Central finite differences of `f` over every parameter, compared against
/// `analytic`. `f` must be deterministic (re-seed any rng inside).
pub fn assert_grad_matches_fd<F: FnMut(&mut Model) -> f64>(
    model: &mut Model,
    analytic: &[f64],
    mut f: F,
    tolerance: f64,
    label: &str,
) {
    let h = 1e-5;
    let n = model.params().len();
    assert_eq!(analytic.len(), n);
    let mut worst_rel: f64 = 0.0;
    let mut worst_idx = 0usize;
    for i in 0..n {
        let orig = model.params().data()[i];
        model.params_mut().data_mut()[i] = orig + h;
        let fp = f(model);
        model.params_mut().data_mut()[i] = orig - h;
        let fm = f(model);
        model.params_mut().data_mut()[i] = orig;
        let fd = (fp - fm) / (2.0 * h);
        let ad = analytic[i];
        let abs = (fd - ad).abs();
        if abs <= 2e-7 {
            continue;
        }
        let rel = abs / ad.abs().max(fd.abs()).max(1e-8);
        if rel > worst_rel {
            worst_rel = rel;
            worst_idx = i;
        }
    }
    assert!(
        worst_rel < tolerance,
        "{label}: worst relative gradient error {worst_rel:.3e} at parameter {worst_idx} \
         (tolerance {tolerance:.1e})"
    );
}

/// Positional token accuracy of generated ids against references.
pub fn token_accuracy(outputs: &[Vec<usize>], references: &[Vec<usize>]) -> f64 {
    let mut matches = 0usize;
    let mut total = 0usize;
    for (out, reference) in outputs.iter().zip(references.iter()) {
        total += reference.len();
        matches += out
            .iter()
            .zip(reference.iter())
            .filter(|(a, b)| a == b)
            .count();
        // length mismatches simply fail to match the tail
    }
    if total == 0 {
        return 0.0;
    }
    matches as f64 / total as f64
}
