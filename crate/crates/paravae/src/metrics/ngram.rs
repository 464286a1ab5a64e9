//! BLEU and ROUGE over pre-tokenized sentences. No re-tokenization happens
//! here; scores are only comparable across systems sharing a tokenizer.

use std::collections::HashMap;

const MAX_ORDER: usize = 4;

fn ngram_counts<'a>(tokens: &'a [String], n: usize) -> HashMap<&'a [String], usize> {
    let mut map = HashMap::new();
    if tokens.len() >= n {
        for w in tokens.windows(n) {
            *map.entry(w).or_insert(0) += 1;
        }
    }
    map
}

fn clipped_matches(cand: &[String], reference: &[String], n: usize) -> (usize, usize) {
    let total = cand.len().saturating_sub(n - 1);
    if total == 0 {
        return (0, 0);
    }
    let cand_counts = ngram_counts(cand, n);
    let ref_counts = ngram_counts(reference, n);
    let matches = cand_counts
        .iter()
        .map(|(g, c)| (*c).min(ref_counts.get(g).copied().unwrap_or(0)))
        .sum();
    (matches, total)
}

/// Corpus-level BLEU-4 with brevity penalty, in [0, 100].
///
/// Counts pool over the corpus before the geometric mean, so the score is
/// independent of pair order. Orders that produce no n-grams anywhere in the
/// corpus (everything shorter than n) are dropped from the mean; a zero match
/// count on a used order gives 0.
pub fn bleu_corpus(candidates: &[Vec<String>], references: &[Vec<String>]) -> f64 {
    assert_eq!(candidates.len(), references.len(), "aligned corpora required");
    let mut matches = [0usize; MAX_ORDER];
    let mut totals = [0usize; MAX_ORDER];
    let mut cand_len = 0usize;
    let mut ref_len = 0usize;
    for (c, r) in candidates.iter().zip(references.iter()) {
        cand_len += c.len();
        ref_len += r.len();
        for n in 1..=MAX_ORDER {
            let (m, t) = clipped_matches(c, r, n);
            matches[n - 1] += m;
            totals[n - 1] += t;
        }
    }
    if cand_len == 0 {
        return 0.0;
    }
    let mut log_sum = 0.0;
    let mut used = 0usize;
    for n in 0..MAX_ORDER {
        if totals[n] == 0 {
            continue;
        }
        if matches[n] == 0 {
            return 0.0;
        }
        log_sum += (matches[n] as f64 / totals[n] as f64).ln();
        used += 1;
    }
    if used == 0 {
        return 0.0;
    }
    let bp = if cand_len >= ref_len {
        1.0
    } else {
        (1.0 - ref_len as f64 / cand_len as f64).exp()
    };
    100.0 * bp * (log_sum / used as f64).exp()
}

/// Sentence-level BLEU-4 with add-one smoothing on orders >= 2, in [0, 100].
/// Used by pair filtering and exemplar mining.
pub fn sentence_bleu(candidate: &[String], reference: &[String]) -> f64 {
    if candidate.is_empty() {
        return 0.0;
    }
    let mut log_sum = 0.0;
    for n in 1..=MAX_ORDER {
        let (m, t) = clipped_matches(candidate, reference, n);
        let p = if n == 1 {
            if t == 0 {
                return 0.0;
            }
            m as f64 / t as f64
        } else {
            (m + 1) as f64 / (t + 1) as f64
        };
        if p == 0.0 {
            return 0.0;
        }
        log_sum += p.ln();
    }
    let bp = if candidate.len() >= reference.len() {
        1.0
    } else {
        (1.0 - reference.len() as f64 / candidate.len() as f64).exp()
    };
    100.0 * bp * (log_sum / MAX_ORDER as f64).exp()
}

/// ROUGE-N F1 for one pair, in [0, 100].
pub fn rouge_n(candidate: &[String], reference: &[String], n: usize) -> f64 {
    assert!(n >= 1 && n <= 2, "only ROUGE-1 and ROUGE-2 are reported");
    let (m, cand_total) = clipped_matches(candidate, reference, n);
    let ref_total = reference.len().saturating_sub(n - 1);
    f1_from_counts(m, cand_total, ref_total)
}

/// ROUGE-L F1 (longest common subsequence) for one pair, in [0, 100].
pub fn rouge_l(candidate: &[String], reference: &[String]) -> f64 {
    let lcs = lcs_len(candidate, reference);
    f1_from_counts(lcs, candidate.len(), reference.len())
}

fn f1_from_counts(matched: usize, cand_total: usize, ref_total: usize) -> f64 {
    if matched == 0 || cand_total == 0 || ref_total == 0 {
        return 0.0;
    }
    let p = matched as f64 / cand_total as f64;
    let r = matched as f64 / ref_total as f64;
    100.0 * 2.0 * p * r / (p + r)
}

fn lcs_len(a: &[String], b: &[String]) -> usize {
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    for av in a {
        for (j, bv) in b.iter().enumerate() {
            cur[j + 1] = if av == bv {
                prev[j] + 1
            } else {
                prev[j + 1].max(cur[j])
            };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}
