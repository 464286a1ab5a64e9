//! Corpus ingestion, BLEU-based pair filtering, vocabulary construction,
//! POS-group word noising, and automatic mining of syntactic-exemplar
//! candidates.
//!
//! File formats:
//! - paraphrase TSV: two tab-separated pre-tokenized sentences per line;
//! - tagged corpus: `word_TAG` tokens, one sentence per line (tags from an
//!   external tagger, split on the last underscore);
//! - eval triples TSV: semantic input, syntactic input, reference;
//! - parse files: one bracketed tree per line, aligned with sentence files.

use crate::metrics::sentence_bleu;
use crate::model::Vocabulary;
use rand::Rng;
use std::collections::HashMap;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DataError {
    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("line {line}: {message}")]
    Format { line: usize, message: String },

    #[error("BLEU threshold must lie in [0, 100], got {0}")]
    BadThreshold(f64),

    #[error("noise probability must lie in [0, 1], got {0}")]
    BadNoiseProb(f64),

    #[error(transparent)]
    Model(#[from] crate::model::ModelError),
}

pub type Result<T> = std::result::Result<T, DataError>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParaphrasePair {
    pub a: Vec<String>,
    pub b: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaggedSentence {
    pub tokens: Vec<String>,
    pub tags: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvalTriple {
    pub semantic: Vec<String>,
    pub syntactic: Vec<String>,
    pub reference: Vec<String>,
}

#[derive(Debug)]
pub struct LoadedPairs {
    pub pairs: Vec<ParaphrasePair>,
    /// Lines skipped because one side was empty.
    pub skipped: usize,
}

fn split_tokens(text: &str, lowercase: bool) -> Vec<String> {
    text.split_whitespace()
        .map(|w| if lowercase { w.to_lowercase() } else { w.to_string() })
        .collect()
}

/// One pair per line, two tab-separated sentences, whitespace tokens,
/// lowercased by default. A wrong field count is an error; an empty side
/// skips the line and counts a warning.
pub fn load_paraphrase_corpus(path: &Path, lowercase: bool) -> Result<LoadedPairs> {
    let text = std::fs::read_to_string(path)?;
    let mut pairs = Vec::new();
    let mut skipped = 0usize;
    for (i, line) in text.lines().enumerate() {
        if line.is_empty() {
            skipped += 1;
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 2 {
            return Err(DataError::Format {
                line: i + 1,
                message: format!("expected 2 tab-separated sentences, found {}", fields.len()),
            });
        }
        let a = split_tokens(fields[0], lowercase);
        let b = split_tokens(fields[1], lowercase);
        if a.is_empty() || b.is_empty() {
            skipped += 1;
            continue;
        }
        pairs.push(ParaphrasePair { a, b });
    }
    Ok(LoadedPairs { pairs, skipped })
}

/// Keep pairs whose sentence-level smoothed BLEU (b against a as reference)
/// stays below `max_bleu`. Order-preserving subset of the input.
pub fn filter_by_bleu(pairs: Vec<ParaphrasePair>, max_bleu: f64) -> Result<Vec<ParaphrasePair>> {
    if !(0.0..=100.0).contains(&max_bleu) {
        return Err(DataError::BadThreshold(max_bleu));
    }
    Ok(pairs
        .into_iter()
        .filter(|p| sentence_bleu(&p.b, &p.a) < max_bleu)
        .collect())
}

/// Frequency-thresholded vocabulary with deterministic id order: frequency
/// descending, then lexicographic.
pub fn build_vocabulary(corpus: &[ParaphrasePair], min_count: usize) -> Result<Vocabulary> {
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for pair in corpus {
        for tok in pair.a.iter().chain(pair.b.iter()) {
            *counts.entry(tok.as_str()).or_insert(0) += 1;
        }
    }
    let mut items: Vec<(&str, usize)> = counts
        .into_iter()
        .filter(|(_, c)| *c >= min_count.max(1))
        .collect();
    items.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    Ok(Vocabulary::from_tokens(items.into_iter().map(|(t, _)| t.to_string()))?)
}

/// `word_TAG` token format, one sentence per line; the split is on the last
/// underscore so words may contain underscores.
pub fn load_tagged_corpus(path: &Path, lowercase: bool) -> Result<Vec<TaggedSentence>> {
    let text = std::fs::read_to_string(path)?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut tokens = Vec::new();
        let mut tags = Vec::new();
        for unit in line.split_whitespace() {
            let Some(split_at) = unit.rfind('_') else {
                return Err(DataError::Format {
                    line: i + 1,
                    message: format!("token '{unit}' has no _TAG suffix"),
                });
            };
            let (word, tag) = unit.split_at(split_at);
            if word.is_empty() || tag.len() <= 1 {
                return Err(DataError::Format {
                    line: i + 1,
                    message: format!("token '{unit}' has an empty word or tag"),
                });
            }
            tokens.push(if lowercase { word.to_lowercase() } else { word.to_string() });
            tags.push(tag[1..].to_string());
        }
        out.push(TaggedSentence { tokens, tags });
    }
    Ok(out)
}

/// Three tab-separated sentences per line: semantic input, syntactic input,
/// reference.
pub fn load_eval_triples(path: &Path, lowercase: bool) -> Result<Vec<EvalTriple>> {
    let text = std::fs::read_to_string(path)?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(DataError::Format {
                line: i + 1,
                message: format!("expected 3 tab-separated sentences, found {}", fields.len()),
            });
        }
        let triple = EvalTriple {
            semantic: split_tokens(fields[0], lowercase),
            syntactic: split_tokens(fields[1], lowercase),
            reference: split_tokens(fields[2], lowercase),
        };
        if triple.semantic.is_empty() || triple.syntactic.is_empty() || triple.reference.is_empty()
        {
            return Err(DataError::Format {
                line: i + 1,
                message: "all three sentences must be nonempty".into(),
            });
        }
        out.push(triple);
    }
    Ok(out)
}

/// One line per aligned sentence (used for bracketed parse files).
pub fn load_lines(path: &Path) -> Result<Vec<String>> {
    let text = std::fs::read_to_string(path)?;
    Ok(text.lines().map(String::from).collect())
}

/// Scored sentence pairs for the similarity probe: two tab-separated
/// sentences and a real score per line.
pub fn load_scored_pairs(path: &Path, lowercase: bool) -> Result<Vec<crate::metrics::ScoredPair>> {
    let text = std::fs::read_to_string(path)?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(DataError::Format {
                line: i + 1,
                message: format!("expected 'sentence<TAB>sentence<TAB>score', found {} fields", fields.len()),
            });
        }
        let score: f64 = fields[2].trim().parse().map_err(|e| DataError::Format {
            line: i + 1,
            message: format!("bad score '{}': {e}", fields[2]),
        })?;
        out.push(crate::metrics::ScoredPair {
            a: split_tokens(fields[0], lowercase),
            b: split_tokens(fields[1], lowercase),
            score,
        });
    }
    Ok(out)
}

/// Zip a tagged corpus with an aligned parse file into probe-ready sentences.
pub fn load_annotated(
    tagged_path: &Path,
    parse_path: &Path,
    lowercase: bool,
) -> Result<Vec<crate::metrics::AnnotatedSentence>> {
    let tagged = load_tagged_corpus(tagged_path, lowercase)?;
    let parses = load_lines(parse_path)?;
    if tagged.len() != parses.len() {
        return Err(DataError::Format {
            line: tagged.len().min(parses.len()) + 1,
            message: format!(
                "tagged corpus has {} sentences but parse file has {} lines",
                tagged.len(),
                parses.len()
            ),
        });
    }
    Ok(tagged
        .into_iter()
        .zip(parses)
        .map(|(t, parse)| crate::metrics::AnnotatedSentence {
            tokens: t.tokens,
            tags: t.tags,
            parse,
        })
        .collect())
}

/// Word -> top-two POS tags, tag -> word types, and the per-token replacement
/// probability.
#[derive(Debug, Clone)]
pub struct NoiseModel {
    word_tags: HashMap<String, Vec<String>>,
    tag_words: HashMap<String, Vec<String>>,
    pub p: f64,
}

impl NoiseModel {
    pub fn tags_of(&self, word: &str) -> Option<&[String]> {
        self.word_tags.get(word).map(|v| v.as_slice())
    }

    pub fn words_of(&self, tag: &str) -> Option<&[String]> {
        self.tag_words.get(tag).map(|v| v.as_slice())
    }

    pub fn word_count(&self) -> usize {
        self.word_tags.len()
    }
}

/// Group word types by their top two most frequent tags (count descending,
/// ties broken lexicographically), and invert into tag -> word lists.
pub fn build_pos_groups(tagged: &[TaggedSentence], p: f64) -> Result<NoiseModel> {
    if !(0.0..=1.0).contains(&p) {
        return Err(DataError::BadNoiseProb(p));
    }
    let mut tag_counts: HashMap<&str, HashMap<&str, usize>> = HashMap::new();
    for sent in tagged {
        debug_assert_eq!(sent.tokens.len(), sent.tags.len());
        for (tok, tag) in sent.tokens.iter().zip(sent.tags.iter()) {
            *tag_counts.entry(tok.as_str()).or_default().entry(tag.as_str()).or_insert(0) += 1;
        }
    }
    let mut word_tags: HashMap<String, Vec<String>> = HashMap::new();
    let mut tag_words: HashMap<String, Vec<String>> = HashMap::new();
    for (word, counts) in tag_counts {
        let mut tags: Vec<(&str, usize)> = counts.into_iter().collect();
        tags.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        tags.truncate(2);
        let kept: Vec<String> = tags.into_iter().map(|(t, _)| t.to_string()).collect();
        for tag in &kept {
            tag_words.entry(tag.clone()).or_default().push(word.to_string());
        }
        word_tags.insert(word.to_string(), kept);
    }
    for words in tag_words.values_mut() {
        words.sort();
    }
    Ok(NoiseModel { word_tags, tag_words, p })
}

/// Independently per token, with probability p, replace the token by a
/// uniformly chosen word type sharing one of its tags (tag picked uniformly
/// from the token's top-two set). Untagged words are never replaced; length
/// is always preserved.
pub fn noise_sentence<R: Rng + ?Sized>(
    tokens: &[String],
    model: &NoiseModel,
    rng: &mut R,
) -> Vec<String> {
    tokens
        .iter()
        .map(|tok| {
            let Some(tags) = model.tags_of(tok) else {
                return tok.clone();
            };
            if model.p == 0.0 || rng.random_range(0.0..1.0) >= model.p {
                return tok.clone();
            }
            let tag = &tags[rng.random_range(0..tags.len())];
            let words = model.words_of(tag).expect("inverted index covers every kept tag");
            words[rng.random_range(0..words.len())].clone()
        })
        .collect()
}

/// Unit-cost Levenshtein distance over tag symbols.
pub fn pos_sequence_edit_distance(a: &[String], b: &[String]) -> usize {
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0usize; b.len() + 1];
    for (i, av) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, bv) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(av != bv);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Candidate score for exemplar mining: length-normalized POS edit distance
/// to the query minus lambda times sentence BLEU (on a [0, 1] scale). Exact
/// token duplicates of the query rank strictly last.
pub fn exemplar_score(query: &TaggedSentence, candidate: &TaggedSentence, lambda: f64) -> f64 {
    if candidate.tokens == query.tokens {
        return f64::NEG_INFINITY;
    }
    let dist = pos_sequence_edit_distance(&query.tags, &candidate.tags) as f64;
    let norm = query.tags.len().max(candidate.tags.len()).max(1) as f64;
    dist / norm - lambda * sentence_bleu(&candidate.tokens, &query.tokens) / 100.0
}

/// Top-k pool sentences by exemplar score (index, score), highest first; ties
/// keep pool order.
pub fn mine_syntactic_exemplars(
    query: &TaggedSentence,
    pool: &[TaggedSentence],
    k: usize,
    lambda: f64,
) -> Vec<(usize, f64)> {
    let scores = crate::parallel::map(pool, |cand| exemplar_score(query, cand, lambda));
    let mut ranked: Vec<(usize, f64)> = scores.into_iter().enumerate().collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    ranked.truncate(k);
    ranked
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::io::Write;

    fn write_temp(name: &str, content: &str) -> std::path::PathBuf {
        let path = std::env::temp_dir().join(format!("paravae-data-test-{}-{name}", std::process::id()));
        let mut f = std::fs::File::create(&path).unwrap();
        f.write_all(content.as_bytes()).unwrap();
        path
    }

    #[test]
    fn pair_loading_and_format_errors() {
        let path = write_temp("pairs-good", "a B\tc d\nx y\tz w\n");
        let loaded = load_paraphrase_corpus(&path, true).unwrap();
        assert_eq!(loaded.pairs.len(), 2);
        assert_eq!(loaded.skipped, 0);
        assert_eq!(loaded.pairs[0].a, vec!["a", "b"]);
        assert_eq!(loaded.pairs[0].b, vec!["c", "d"]);

        let path = write_temp("pairs-empty", "");
        let loaded = load_paraphrase_corpus(&path, true).unwrap();
        assert!(loaded.pairs.is_empty());

        let path = write_temp("pairs-3tabs", "a\tb\tc\td\n");
        match load_paraphrase_corpus(&path, true) {
            Err(DataError::Format { line, .. }) => assert_eq!(line, 1),
            other => panic!("expected format error, got {other:?}"),
        }

        let path = write_temp("pairs-empty-side", "a b\t\nc d\te f\n");
        let loaded = load_paraphrase_corpus(&path, true).unwrap();
        assert_eq!(loaded.pairs.len(), 1);
        assert_eq!(loaded.skipped, 1);
    }

    fn s(words: &str) -> Vec<String> {
        words.split_whitespace().map(String::from).collect()
    }

    #[test]
    fn bleu_filter_drops_identical_keeps_disjoint() {
        let pairs = vec![
            ParaphrasePair { a: s("the cat sat down"), b: s("the cat sat down") },
            ParaphrasePair { a: s("the cat sat down"), b: s("a feline rested quietly") },
        ];
        let kept = filter_by_bleu(pairs, 99.0).unwrap();
        assert_eq!(kept.len(), 1);
        assert_eq!(kept[0].b, s("a feline rested quietly"));
        assert!(filter_by_bleu(vec![], 101.0).is_err());
    }

    #[test]
    fn bleu_filter_matches_hand_filtering() {
        // Hand-computed smoothed sentence BLEU for each pair decides
        // membership against a threshold of 40.
        let pairs = vec![
            // identical -> 100, dropped
            ParaphrasePair { a: s("w x y z"), b: s("w x y z") },
            // disjoint -> 0, kept
            ParaphrasePair { a: s("w x y z"), b: s("p q r t") },
            // b = "w x y q": p1 = 3/4; bigrams of b: wx, xy, yq -> 2 matches,
            // p2 = (2+1)/(3+1); trigrams: wxy matches, p3 = (1+1)/(2+1);
            // 4-grams: wxyq no, p4 = (0+1)/(1+1); BP = 1 (equal length).
            // score = 100 * (3/4 * 3/4 * 2/3 * 1/2)^(1/4) = 100*(0.1875)^0.25
            //       = 65.8, dropped at 40.
            ParaphrasePair { a: s("w x y z"), b: s("w x y q") },
            // b = "w p q r": p1 = 1/4, p2 = 1/4, p3 = 1/3, p4 = 1/2 ->
            // score = 100 * (1/4 * 1/4 * 1/3 * 1/2)^(1/4) = 100*(1/96)^0.25
            //       = 31.9, kept at 40.
            ParaphrasePair { a: s("w x y z"), b: s("w p q r") },
        ];
        let kept = filter_by_bleu(pairs, 40.0).unwrap();
        let kept_bs: Vec<_> = kept.iter().map(|p| p.b.clone()).collect();
        assert_eq!(kept_bs, vec![s("p q r t"), s("w p q r")]);

        let hand = 100.0 * (0.1875f64).powf(0.25);
        assert!((sentence_bleu(&s("w x y q"), &s("w x y z")) - hand).abs() < 1e-9);
    }

    #[test]
    fn vocabulary_thresholding_and_determinism() {
        let pairs = vec![
            ParaphrasePair { a: s("b b a"), b: s("a c") },
            ParaphrasePair { a: s("a"), b: s("b") },
        ];
        // counts: a=3, b=3, c=1
        let v = build_vocabulary(&pairs, 1).unwrap();
        assert_eq!(v.size(), 4 + 3);
        // frequency desc then lexicographic: a, b, c
        assert_eq!(v.token(4), "a");
        assert_eq!(v.token(5), "b");
        assert_eq!(v.token(6), "c");

        let v2 = build_vocabulary(&pairs, 2).unwrap();
        assert_eq!(v2.size(), 4 + 2);
        assert_eq!(v2.id("c"), None);
        assert_eq!(v2.id_or_unk("c"), crate::model::UNK);

        let again = build_vocabulary(&pairs, 1).unwrap();
        assert_eq!(v, again);
    }

    #[test]
    fn tagged_corpus_parsing() {
        let path = write_temp("tagged", "The_DT cat_NN sat_VBD\nbig_JJ dogs_NNS bark_VBP\n");
        let sents = load_tagged_corpus(&path, true).unwrap();
        assert_eq!(sents.len(), 2);
        assert_eq!(sents[0].tokens, s("the cat sat"));
        assert_eq!(sents[0].tags, s("DT NN VBD"));

        let bad = write_temp("tagged-bad", "word-without-tag\n");
        assert!(matches!(
            load_tagged_corpus(&bad, true),
            Err(DataError::Format { line: 1, .. })
        ));
    }

    fn tagged(tokens: &str, tags: &str) -> TaggedSentence {
        TaggedSentence { tokens: s(tokens), tags: s(tags) }
    }

    #[test]
    fn pos_groups_top_two_with_ties() {
        // "run" seen 5x VB, 3x NN, 1x JJ -> {VB, NN}
        let mut sents = Vec::new();
        for _ in 0..5 {
            sents.push(tagged("run", "VB"));
        }
        for _ in 0..3 {
            sents.push(tagged("run", "NN"));
        }
        sents.push(tagged("run", "JJ"));
        // "cat" seen once as NN only
        sents.push(tagged("cat", "NN"));
        // tie case: "tie" 2x XA, 2x XB, lexicographic keeps XA first
        sents.push(tagged("tie tie", "XA XB"));
        sents.push(tagged("tie tie", "XB XA"));

        let model = build_pos_groups(&sents, 0.5).unwrap();
        assert_eq!(model.tags_of("run").unwrap(), &["VB", "NN"]);
        assert_eq!(model.tags_of("cat").unwrap(), &["NN"]);
        assert_eq!(model.tags_of("tie").unwrap(), &["XA", "XB"]);

        // Every word appears in the list of each of its tags.
        for word in ["run", "cat", "tie"] {
            for tag in model.tags_of(word).unwrap() {
                assert!(model.words_of(tag).unwrap().contains(&word.to_string()));
            }
        }
        assert!(build_pos_groups(&sents, 1.5).is_err());
    }

    #[test]
    fn pos_groups_deterministic() {
        let sents = vec![
            tagged("a b c", "X Y X"),
            tagged("c b a", "Y Y X"),
            tagged("b b", "Z X"),
        ];
        let m1 = build_pos_groups(&sents, 0.3).unwrap();
        let m2 = build_pos_groups(&sents, 0.3).unwrap();
        assert_eq!(m1.word_tags, m2.word_tags);
        assert_eq!(m1.tag_words, m2.tag_words);
    }

    #[test]
    fn noising_identity_and_degenerate_group() {
        let sents = vec![tagged("solo", "XX")];
        let mut rng = ChaCha8Rng::seed_from_u64(1);

        let p0 = build_pos_groups(&sents, 0.0).unwrap();
        let toks = s("solo solo unknown");
        assert_eq!(noise_sentence(&toks, &p0, &mut rng), toks);

        // group of size 1: replacement is the word itself
        let p1 = build_pos_groups(&sents, 1.0).unwrap();
        assert_eq!(noise_sentence(&toks, &p1, &mut rng), toks);
    }

    #[test]
    fn noising_preserves_length_and_hits_rate() {
        let mut sents = Vec::new();
        for w in ["a", "b", "c", "d", "e", "f", "g", "h"] {
            sents.push(tagged(w, "NN"));
        }
        let model = build_pos_groups(&sents, 0.3).unwrap();
        let sentence = s("a b c d e f g h a b");
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut replaced = 0usize;
        let trials = 100_000usize;
        for _ in 0..trials {
            let noised = noise_sentence(&sentence, &model, &mut rng);
            assert_eq!(noised.len(), sentence.len());
            replaced += noised
                .iter()
                .zip(sentence.iter())
                .filter(|(n, o)| n != o)
                .count();
        }
        // A "replacement" may draw the original word (group size 8), so the
        // observable rate is p * 7/8.
        let rate = replaced as f64 / (trials * sentence.len()) as f64;
        let expected = 0.3 * 7.0 / 8.0;
        assert!(
            (rate - expected).abs() < 0.01,
            "replacement rate {rate} vs expected {expected}"
        );
    }

    #[test]
    fn levenshtein_cases() {
        assert_eq!(pos_sequence_edit_distance(&s("NN VB"), &s("NN VB")), 0);
        assert_eq!(pos_sequence_edit_distance(&s("NN VB"), &s("NN")), 1);
        assert_eq!(pos_sequence_edit_distance(&s(""), &s("NN VB DT")), 3);
        assert_eq!(pos_sequence_edit_distance(&s("NN VB DT"), &s("VB NN DT")), 2);
    }

    #[test]
    fn mining_orders_and_excludes_duplicates() {
        let query = tagged("the cat sat", "DT NN VBD");
        let pool = vec![
            // exact duplicate of the query: must rank last
            tagged("the cat sat", "DT NN VBD"),
            // same tags, disjoint words
            tagged("a dog ran", "DT NN VBD"),
            // different tags, disjoint words: should rank first
            tagged("run fast now", "VB RB RB"),
        ];
        let ranked = mine_syntactic_exemplars(&query, &pool, 3, 1.0);
        assert_eq!(ranked[0].0, 2, "distinct tags + disjoint words wins");
        assert_eq!(ranked[1].0, 1);
        assert_eq!(ranked[2].0, 0, "query duplicate is last");
        assert_eq!(ranked[2].1, f64::NEG_INFINITY);

        let top2 = mine_syntactic_exemplars(&query, &pool, 2, 1.0);
        assert!(top2.iter().all(|(i, _)| *i != 0), "duplicate never returned at k < pool");
    }

    #[test]
    fn mining_hand_scored_pool() {
        // Query tags DT NN; lambda 1. Hand scores:
        //   cand0 "x y" tags NN DT:  dist 2/2 = 1.0, BLEU 0   -> 1.0
        //   cand1 "the cat" tags DT NN: dist 0, BLEU 100      -> -1.0
        //   cand2 "a dog today" tags DT NN RB: dist 1/3, BLEU 0 -> 0.333
        //   cand3 "x y z" tags VB VB VB: dist 3/3 = 1, BLEU 0 -> 1.0 (tie with 0, pool order)
        let query = tagged("the cat", "DT NN");
        let pool = vec![
            tagged("x y", "NN DT"),
            tagged("the cat", "DT NN"),
            tagged("a dog today", "DT NN RB"),
            tagged("x y z", "VB VB VB"),
        ];
        let ranked = mine_syntactic_exemplars(&query, &pool, 4, 1.0);
        let order: Vec<usize> = ranked.iter().map(|(i, _)| *i).collect();
        assert_eq!(order, vec![0, 3, 2, 1]);
        assert!((ranked[0].1 - 1.0).abs() < 1e-12);
        assert!((ranked[2].1 - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn triples_loading() {
        let path = write_temp("triples", "a b\tc d\te f\n");
        let triples = load_eval_triples(&path, true).unwrap();
        assert_eq!(triples.len(), 1);
        assert_eq!(triples[0].syntactic, s("c d"));

        let bad = write_temp("triples-bad", "a\tb\n");
        assert!(matches!(
            load_eval_triples(&bad, true),
            Err(DataError::Format { line: 1, .. })
        ));
    }
}
