//! Evaluation: BLEU, ROUGE-1/2/L, simplified METEOR, the syntactic
//! tree-edit-distance metric (ST), and the encoder analysis probes.

mod meteor;
mod ngram;
mod parse;
mod probes;
mod stats;
mod ted;

pub use meteor::meteor_simplified;
pub use ngram::{bleu_corpus, rouge_l, rouge_n, sentence_bleu};
pub use parse::{labeled_brackets, parse_bracketed, strip_tokens, ParseTree};
pub use probes::{
    encoder_similarity_eval, nn_random_baseline, nn_syntactic_eval, AnnotatedSentence,
    EncoderVariable, NnEvalResult, ScoredPair,
};
pub use stats::pearson;
pub use ted::{st_score, tree_edit_distance};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("parse error at offset {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("parse failure on line {line}: {source}")]
    ParseLine {
        line: usize,
        #[source]
        source: Box<MetricsError>,
    },

    #[error("aligned lists have different lengths: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("undefined correlation: {side} values have zero variance")]
    ZeroVariance { side: &'static str },

    #[error("need at least two points for correlation, got {n}")]
    TooFewPoints { n: usize },

    #[error(transparent)]
    Model(#[from] crate::model::ModelError),
}

pub type Result<T> = std::result::Result<T, MetricsError>;

/// Corpus-level scores in the layout of the evaluation table. `st` is absent
/// when no parse files were supplied.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricReport {
    pub bleu: f64,
    pub rouge_1: f64,
    pub rouge_2: f64,
    pub rouge_l: f64,
    pub meteor_simplified: f64,
    pub st: Option<f64>,
    /// Methodological notes carried with every report.
    pub metadata: Vec<String>,
}

impl MetricReport {
    pub fn standard_metadata() -> Vec<String> {
        vec![
            "ROUGE scores are the F1 variant".to_string(),
            "METEOR-simplified: exact-match unigram alignment only, no stem or synonym stages"
                .to_string(),
            "inputs are assumed pre-tokenized; no re-tokenization is performed".to_string(),
        ]
    }

    /// Aligned-column text, one row of scores.
    pub fn render_text(&self) -> String {
        let st = self
            .st
            .map(|v| format!("{v:8.2}"))
            .unwrap_or_else(|| format!("{:>8}", "-"));
        let mut out = String::new();
        out.push_str(&format!(
            "{:>8} {:>8} {:>8} {:>8} {:>10} {:>8}\n",
            "BLEU", "ROUGE-1", "ROUGE-2", "ROUGE-L", "METEOR-s", "ST"
        ));
        out.push_str(&format!(
            "{:8.2} {:8.2} {:8.2} {:8.2} {:10.2} {}\n",
            self.bleu, self.rouge_1, self.rouge_2, self.rouge_l, self.meteor_simplified, st
        ));
        for note in &self.metadata {
            out.push_str(&format!("# {note}\n"));
        }
        out
    }

    /// Machine-readable key-value lines.
    pub fn render_kv(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("bleu={}\n", self.bleu));
        out.push_str(&format!("rouge_1={}\n", self.rouge_1));
        out.push_str(&format!("rouge_2={}\n", self.rouge_2));
        out.push_str(&format!("rouge_l={}\n", self.rouge_l));
        out.push_str(&format!("meteor_simplified={}\n", self.meteor_simplified));
        match self.st {
            Some(v) => out.push_str(&format!("st={v}\n")),
            None => out.push_str("st=absent\n"),
        }
        for (i, note) in self.metadata.iter().enumerate() {
            out.push_str(&format!("note_{i}={note}\n"));
        }
        out
    }
}
