//! Encoder analysis probes: cosine-similarity correlation against gold
//! scores, and 1-nearest-neighbor constituency / tagging transfer.

use super::parse::{labeled_brackets, parse_bracketed, strip_tokens};
use super::stats::{cosine, pearson};
use super::{MetricsError, Result};
use crate::model::Model;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;

/// Which posterior-mean vector a probe reads.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EncoderVariable {
    Semantic,
    Syntactic,
}

#[derive(Debug, Clone)]
pub struct ScoredPair {
    pub a: Vec<String>,
    pub b: Vec<String>,
    pub score: f64,
}

fn mean_vector(model: &Model, words: &[String], which: EncoderVariable) -> Result<Vec<f64>> {
    let seq = model.sequence_from_words(words)?;
    Ok(match which {
        EncoderVariable::Semantic => model.encode_semantic(&seq)?.mu().to_vec(),
        EncoderVariable::Syntactic => model.encode_syntactic(&seq)?.mu().to_vec(),
    })
}

/// 100 x Pearson correlation between per-pair posterior-mean cosines and the
/// gold scores.
pub fn encoder_similarity_eval(
    model: &Model,
    pairs: &[ScoredPair],
    which: EncoderVariable,
) -> Result<f64> {
    let predictions = crate::parallel::try_map(pairs, |p| {
        let va = mean_vector(model, &p.a, which)?;
        let vb = mean_vector(model, &p.b, which)?;
        Ok::<f64, MetricsError>(cosine(&va, &vb))
    })?;
    let gold: Vec<f64> = pairs.iter().map(|p| p.score).collect();
    Ok(100.0 * pearson(&predictions, &gold)?)
}

/// A sentence with its gold POS tags and bracketed parse.
#[derive(Debug, Clone)]
pub struct AnnotatedSentence {
    pub tokens: Vec<String>,
    pub tags: Vec<String>,
    pub parse: String,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NnEvalResult {
    /// Labeled bracket F1 (%) of retrieved parses against gold parses,
    /// micro-averaged over the test set, spans over stripped-tree leaves.
    pub labeled_f1: f64,
    /// Position-wise tag accuracy (%) over min(len) positions, pooled.
    pub tag_accuracy: f64,
}

fn bracket_counts(parse: &str) -> Result<HashMap<(String, usize, usize), usize>> {
    let tree = strip_tokens(&parse_bracketed(parse)?);
    let mut counts = HashMap::new();
    for b in labeled_brackets(&tree) {
        *counts.entry(b).or_insert(0) += 1;
    }
    Ok(counts)
}

fn score_retrieval(
    test: &[AnnotatedSentence],
    retrieved: &[usize],
    pool: &[AnnotatedSentence],
) -> Result<NnEvalResult> {
    let mut matched = 0usize;
    let mut predicted_total = 0usize;
    let mut gold_total = 0usize;
    let mut tag_matches = 0usize;
    let mut tag_positions = 0usize;
    for (t, &r) in test.iter().zip(retrieved.iter()) {
        let predicted = bracket_counts(&pool[r].parse)?;
        let gold = bracket_counts(&t.parse)?;
        predicted_total += predicted.values().sum::<usize>();
        gold_total += gold.values().sum::<usize>();
        for (b, c) in &predicted {
            matched += (*c).min(gold.get(b).copied().unwrap_or(0));
        }
        let min_len = t.tags.len().min(pool[r].tags.len());
        tag_positions += min_len;
        tag_matches += t.tags[..min_len]
            .iter()
            .zip(&pool[r].tags[..min_len])
            .filter(|(a, b)| a == b)
            .count();
    }
    let f1 = if predicted_total == 0 || gold_total == 0 || matched == 0 {
        0.0
    } else {
        let p = matched as f64 / predicted_total as f64;
        let r = matched as f64 / gold_total as f64;
        100.0 * 2.0 * p * r / (p + r)
    };
    let acc = if tag_positions == 0 {
        0.0
    } else {
        100.0 * tag_matches as f64 / tag_positions as f64
    };
    Ok(NnEvalResult { labeled_f1: f1, tag_accuracy: acc })
}

/// For each test sentence, retrieve the pool sentence with the highest cosine
/// under the chosen variable and predict its parse and tags.
pub fn nn_syntactic_eval(
    model: &Model,
    test: &[AnnotatedSentence],
    pool: &[AnnotatedSentence],
    which: EncoderVariable,
) -> Result<NnEvalResult> {
    assert!(!pool.is_empty(), "retrieval pool must be nonempty");
    let pool_vecs = crate::parallel::try_map(pool, |s| mean_vector(model, &s.tokens, which))?;
    let retrieved = crate::parallel::try_map(test, |t| {
        let v = mean_vector(model, &t.tokens, which)?;
        let mut best = 0usize;
        let mut best_sim = f64::NEG_INFINITY;
        for (i, pv) in pool_vecs.iter().enumerate() {
            let sim = cosine(&v, pv);
            if sim > best_sim {
                best_sim = sim;
                best = i;
            }
        }
        Ok::<usize, MetricsError>(best)
    })?;
    score_retrieval(test, &retrieved, pool)
}

/// Seeded random-retrieval baseline, reported alongside the probe.
pub fn nn_random_baseline(
    test: &[AnnotatedSentence],
    pool: &[AnnotatedSentence],
    seed: u64,
) -> Result<NnEvalResult> {
    assert!(!pool.is_empty(), "retrieval pool must be nonempty");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let retrieved: Vec<usize> = (0..test.len()).map(|_| rng.random_range(0..pool.len())).collect();
    score_retrieval(test, &retrieved, pool)
}
