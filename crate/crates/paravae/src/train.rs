//! Training with Adam, early stopping on dev BLEU, checkpointing, loss-curve
//! logging, and the file-level commands the CLI wraps.

use crate::data::{self, DataError, NoiseModel};
use crate::metrics::{self, MetricReport, MetricsError};
use crate::model::{GenMode, Model, ModelConfig, ModelError, TokenSequence};
use crate::objectives::{self, LossBreakdown, LossWeights, SentenceView};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TrainError {
    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Data(#[from] DataError),

    #[error(transparent)]
    Model(#[from] ModelError),

    #[error(transparent)]
    Metrics(#[from] MetricsError),

    #[error("invalid training configuration: {0}")]
    BadConfig(String),

    #[error("non-finite loss at step {step}; offending batch:\n{dump}")]
    NonFiniteLoss { step: usize, dump: String },

    #[error("aligned files differ in length: {left} vs {right}")]
    Misaligned { left: usize, right: usize },
}

pub type Result<T> = std::result::Result<T, TrainError>;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub train_pairs: PathBuf,
    pub dev_triples: PathBuf,
    /// `word_TAG` corpus used to build the noising groups; noising is off
    /// when absent or when `noise_prob` is 0.
    pub tagged_corpus: Option<PathBuf>,
    pub pretrained_embeddings: Option<PathBuf>,
    pub model: ModelConfig,
    pub weights: LossWeights,
    pub noise_prob: f64,
    /// Only "adam" is implemented.
    pub optimizer: String,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub max_steps: usize,
    pub eval_interval: usize,
    /// Eval intervals without dev-BLEU improvement before stopping.
    pub patience: usize,
    pub min_count: usize,
    /// Drop training pairs at or above this sentence BLEU, when set.
    pub bleu_filter: Option<f64>,
    pub lowercase: bool,
    /// Fixes every random draw: init, batch sampling, latent samples, noising.
    pub seed: u64,
    pub out_dir: PathBuf,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            train_pairs: PathBuf::new(),
            dev_triples: PathBuf::new(),
            tagged_corpus: None,
            pretrained_embeddings: None,
            model: ModelConfig::default(),
            weights: LossWeights::default(),
            noise_prob: 0.0,
            optimizer: "adam".into(),
            learning_rate: 1e-3,
            batch_size: 32,
            max_steps: 2000,
            eval_interval: 500,
            patience: 5,
            min_count: 1,
            bleu_filter: Some(50.0),
            lowercase: true,
            seed: 1,
            out_dir: PathBuf::from("runs/default"),
        }
    }
}

impl TrainConfig {
    /// Parse the flat `key = value` configuration format. Unknown keys are
    /// errors; omitted keys keep defaults. `#` starts a comment line.
    pub fn from_flat_text(text: &str) -> Result<TrainConfig> {
        use crate::latent_codes::CodeEmbeddingConfig;
        use crate::model::DecoderVariant;
        use crate::objectives::WplPlacement;

        let mut c = TrainConfig::default();
        let mut lc: Option<CodeEmbeddingConfig> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(TrainError::BadConfig(format!(
                    "config line {}: expected 'key = value', got '{raw}'",
                    i + 1
                )));
            };
            let key = key.trim();
            let value = value.trim();
            let bad = |what: &str| {
                TrainError::BadConfig(format!("config line {}: bad {what} '{value}'", i + 1))
            };
            macro_rules! parse {
                ($what:expr) => {
                    value.parse().map_err(|_| bad($what))?
                };
            }
            match key {
                "train_pairs" => c.train_pairs = PathBuf::from(value),
                "dev_triples" => c.dev_triples = PathBuf::from(value),
                "tagged_corpus" => c.tagged_corpus = Some(PathBuf::from(value)),
                "pretrained_embeddings" => {
                    c.pretrained_embeddings = Some(PathBuf::from(value))
                }
                "embedding_dim" => c.model.embedding_dim = parse!("integer"),
                "semantic_dim" => c.model.semantic_dim = parse!("integer"),
                "syntactic_dim" => c.model.syntactic_dim = parse!("integer"),
                "encoder_hidden" => c.model.encoder_hidden = parse!("integer"),
                "decoder_hidden" => c.model.decoder_hidden = parse!("integer"),
                "ffn_depth" => c.model.ffn_depth = parse!("integer"),
                "decoder_variant" => {
                    c.model.decoder_variant = match value {
                        "standard" => DecoderVariant::Standard,
                        "init" => DecoderVariant::Init,
                        "concat" => DecoderVariant::Concat,
                        "swap" => DecoderVariant::Swap,
                        _ => return Err(bad("decoder variant")),
                    }
                }
                "lc_enabled" => {
                    let on: bool = parse!("bool");
                    if on {
                        lc.get_or_insert_with(CodeEmbeddingConfig::default);
                    } else {
                        lc = None;
                    }
                }
                "lc_num_codes" => {
                    lc.get_or_insert_with(CodeEmbeddingConfig::default).num_codes =
                        parse!("integer")
                }
                "lc_classes_per_code" => {
                    lc.get_or_insert_with(CodeEmbeddingConfig::default).classes_per_code =
                        parse!("integer")
                }
                "lc_base_dim" => {
                    lc.get_or_insert_with(CodeEmbeddingConfig::default).base_dim =
                        parse!("integer")
                }
                "wpl_placement" => {
                    c.model.wpl.placement = match value {
                        "none" => WplPlacement::None,
                        "dec_hidden" => WplPlacement::DecHidden,
                        "enc_emb" => WplPlacement::EncEmb,
                        "dec_emb" => WplPlacement::DecEmb,
                        "both_emb" => WplPlacement::BothEmb,
                        _ => return Err(bad("wpl placement")),
                    }
                }
                "wpl_max_position" => c.model.wpl.max_position = parse!("integer"),
                "wpl_head_depth" => c.model.wpl.head_depth = parse!("integer"),
                "max_decode_len" => c.model.max_decode_len = parse!("integer"),
                "beam_size" => c.model.beam_size = parse!("integer"),
                "w_kl_y" => c.weights.kl_y = parse!("number"),
                "w_kl_z" => c.weights.kl_z = parse!("number"),
                "w_prl" => c.weights.prl = parse!("number"),
                "w_wpl" => c.weights.wpl = parse!("number"),
                "noise_prob" => c.noise_prob = parse!("number"),
                "optimizer" => c.optimizer = value.to_string(),
                "learning_rate" => c.learning_rate = parse!("number"),
                "batch_size" => c.batch_size = parse!("integer"),
                "max_steps" => c.max_steps = parse!("integer"),
                "eval_interval" => c.eval_interval = parse!("integer"),
                "patience" => c.patience = parse!("integer"),
                "min_count" => c.min_count = parse!("integer"),
                "bleu_filter" => {
                    c.bleu_filter = if value == "off" { None } else { Some(parse!("number")) }
                }
                "lowercase" => c.lowercase = parse!("bool"),
                "seed" => c.seed = parse!("integer"),
                "out_dir" => c.out_dir = PathBuf::from(value),
                _ => {
                    return Err(TrainError::BadConfig(format!(
                        "config line {}: unknown key '{key}'",
                        i + 1
                    )))
                }
            }
        }
        c.model.latent_code = lc;
        Ok(c)
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub checkpoint: PathBuf,
    pub best_dev_bleu: Option<f64>,
    pub steps_run: usize,
    pub final_loss: Option<LossBreakdown>,
}

fn mix_seed(a: u64, b: u64, c: u64) -> u64 {
    let mut x = a
        .wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(b.wrapping_mul(0xBF58_476D_1CE4_E5B9))
        .wrapping_add(c.wrapping_mul(0x94D0_49BB_1331_11EB));
    x ^= x >> 30;
    x = x.wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x ^= x >> 27;
    x = x.wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^= x >> 31;
    x
}

struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
    lr: f64,
}

impl Adam {
    fn new(n: usize, lr: f64) -> Self {
        Adam { m: vec![0.0; n], v: vec![0.0; n], t: 0, lr }
    }

    fn step(&mut self, params: &mut [f64], grad: &[f64]) {
        const B1: f64 = 0.9;
        const B2: f64 = 0.999;
        const EPS: f64 = 1e-8;
        self.t += 1;
        let bc1 = 1.0 - B1.powi(self.t as i32);
        let bc2 = 1.0 - B2.powi(self.t as i32);
        for i in 0..params.len() {
            self.m[i] = B1 * self.m[i] + (1.0 - B1) * grad[i];
            self.v[i] = B2 * self.v[i] + (1.0 - B2) * grad[i] * grad[i];
            let mhat = self.m[i] / bc1;
            let vhat = self.v[i] / bc2;
            params[i] -= self.lr * mhat / (vhat.sqrt() + EPS);
        }
    }
}

struct PreparedPair {
    a_words: Vec<String>,
    b_words: Vec<String>,
    a_clean: TokenSequence,
    b_clean: TokenSequence,
}

fn greedy_dev_bleu(model: &Model, dev: &[data::EvalTriple]) -> Result<f64> {
    let generated = crate::parallel::try_map(dev, |t| {
        let x = model.sequence_from_words(&t.semantic)?;
        let y_mean = model.encode_semantic(&x)?.mu().to_vec();
        let ysyn = model.sequence_from_words(&t.syntactic)?;
        let z_mean = model.encode_syntactic(&ysyn)?.mu().to_vec();
        let ids = model.generate(&y_mean, &z_mean, GenMode::Greedy, model.config().max_decode_len)?;
        Ok::<Vec<String>, ModelError>(model.vocab().decode_ids(&ids))
    })?;
    let refs: Vec<Vec<String>> = dev.iter().map(|t| t.reference.clone()).collect();
    Ok(metrics::bleu_corpus(&generated, &refs))
}

fn dump_batch(pairs: &[&PreparedPair]) -> String {
    let mut out = String::new();
    for p in pairs {
        out.push_str(&format!("{}\t{}\n", p.a_words.join(" "), p.b_words.join(" ")));
    }
    out
}

/// Train per the configuration and return the best-dev-BLEU checkpoint path.
pub fn train(config: &TrainConfig) -> Result<TrainOutcome> {
    if config.optimizer != "adam" {
        return Err(TrainError::BadConfig(format!(
            "unsupported optimizer '{}': only 'adam' is implemented",
            config.optimizer
        )));
    }
    if config.batch_size == 0 || config.eval_interval == 0 || config.patience == 0 {
        return Err(TrainError::BadConfig(
            "batch_size, eval_interval and patience must be positive".into(),
        ));
    }
    if !(0.0..=1.0).contains(&config.noise_prob) {
        return Err(TrainError::BadConfig(format!(
            "noise_prob must lie in [0, 1], got {}",
            config.noise_prob
        )));
    }
    config.model.validate()?;
    config.weights.validate()?;

    let loaded = data::load_paraphrase_corpus(&config.train_pairs, config.lowercase)?;
    if loaded.skipped > 0 {
        eprintln!("warning: skipped {} empty-sided training lines", loaded.skipped);
    }
    let mut pairs = loaded.pairs;
    if let Some(threshold) = config.bleu_filter {
        pairs = data::filter_by_bleu(pairs, threshold)?;
    }
    if pairs.is_empty() {
        return Err(TrainError::BadConfig("no training pairs after loading/filtering".into()));
    }
    let dev = data::load_eval_triples(&config.dev_triples, config.lowercase)?;
    if dev.is_empty() {
        return Err(TrainError::BadConfig("dev triples file is empty".into()));
    }

    let vocab = data::build_vocabulary(&pairs, config.min_count)?;
    let mut model = Model::new(config.model.clone(), vocab, config.seed)?;
    if let Some(path) = &config.pretrained_embeddings {
        model.load_pretrained_embeddings(path)?;
    }

    let longest = pairs.iter().map(|p| p.a.len().max(p.b.len())).max().unwrap_or(0);
    if longest > config.model.wpl.max_position {
        return Err(TrainError::BadConfig(format!(
            "wpl.max_position {} is below the longest training sentence {longest}",
            config.model.wpl.max_position
        )));
    }

    let noiser: Option<NoiseModel> = match (&config.tagged_corpus, config.noise_prob) {
        (Some(path), p) if p > 0.0 => {
            let tagged = data::load_tagged_corpus(path, config.lowercase)?;
            Some(data::build_pos_groups(&tagged, p)?)
        }
        _ => None,
    };

    let prepared: Vec<PreparedPair> = pairs
        .iter()
        .map(|p| {
            Ok(PreparedPair {
                a_clean: model.sequence_from_words(&p.a)?,
                b_clean: model.sequence_from_words(&p.b)?,
                a_words: p.a.clone(),
                b_words: p.b.clone(),
            })
        })
        .collect::<Result<_>>()?;

    std::fs::create_dir_all(&config.out_dir)?;
    let best_path = config.out_dir.join("best.json");
    let mut csv = std::fs::File::create(config.out_dir.join("loss.csv"))?;
    writeln!(
        csv,
        "step,reconstruction,kl_y,kl_z,prl,wpl,w_kl_y,w_kl_z,w_prl,w_wpl,total"
    )?;

    if config.max_steps == 0 {
        model.save_checkpoint(&best_path)?;
        return Ok(TrainOutcome {
            checkpoint: best_path,
            best_dev_bleu: None,
            steps_run: 0,
            final_loss: None,
        });
    }

    let mut adam = Adam::new(model.params().len(), config.learning_rate);
    let mut best_bleu: Option<f64> = None;
    let mut intervals_without_improvement = 0usize;
    let mut last_breakdown: Option<LossBreakdown> = None;
    let mut steps_run = 0usize;

    'training: for step in 0..config.max_steps {
        let mut batch_rng = ChaCha8Rng::seed_from_u64(mix_seed(config.seed, 0xBA7C, step as u64));
        let batch: Vec<&PreparedPair> = (0..config.batch_size)
            .map(|_| &prepared[batch_rng.random_range(0..prepared.len())])
            .collect();

        let items: Vec<(usize, &PreparedPair)> = batch.iter().cloned().enumerate().collect();
        let results = crate::parallel::try_map(&items, |(slot, pair)| {
            let mut rng =
                ChaCha8Rng::seed_from_u64(mix_seed(config.seed, step as u64, *slot as u64));
            let (a_syn, b_syn) = match &noiser {
                Some(nm) => (
                    model.sequence_from_words(&noise_words(&pair.a_words, nm, &mut rng))?,
                    model.sequence_from_words(&noise_words(&pair.b_words, nm, &mut rng))?,
                ),
                None => (pair.a_clean.clone(), pair.b_clean.clone()),
            };
            objectives::noised_loss_grad(
                &model,
                SentenceView { clean: pair.a_clean.ids(), syntactic: a_syn.ids() },
                SentenceView { clean: pair.b_clean.ids(), syntactic: b_syn.ids() },
                &config.weights,
                &mut rng,
            )
            .map_err(TrainError::from)
        })?;

        let scale = 1.0 / results.len() as f64;
        let mut grad = vec![0.0; model.params().len()];
        let mut mean = LossBreakdown {
            reconstruction: 0.0,
            kl_y: 0.0,
            kl_z: 0.0,
            prl: 0.0,
            wpl: 0.0,
            weights: config.weights,
            total: 0.0,
        };
        for (breakdown, g) in &results {
            if !breakdown.total.is_finite() {
                return Err(TrainError::NonFiniteLoss { step, dump: dump_batch(&batch) });
            }
            for (acc, gv) in grad.iter_mut().zip(g.iter()) {
                *acc += gv * scale;
            }
            mean.reconstruction += breakdown.reconstruction * scale;
            mean.kl_y += breakdown.kl_y * scale;
            mean.kl_z += breakdown.kl_z * scale;
            mean.prl += breakdown.prl * scale;
            mean.wpl += breakdown.wpl * scale;
            mean.total += breakdown.total * scale;
        }

        adam.step(model.params_mut().data_mut(), &grad);
        writeln!(
            csv,
            "{},{},{},{},{},{},{},{},{},{},{}",
            step,
            mean.reconstruction,
            mean.kl_y,
            mean.kl_z,
            mean.prl,
            mean.wpl,
            mean.weights.kl_y,
            mean.weights.kl_z,
            mean.weights.prl,
            mean.weights.wpl,
            mean.total
        )?;
        last_breakdown = Some(mean);
        steps_run = step + 1;

        let is_eval_step =
            (step + 1) % config.eval_interval == 0 || step + 1 == config.max_steps;
        if is_eval_step {
            let bleu = greedy_dev_bleu(&model, &dev)?;
            let improved = best_bleu.map_or(true, |b| bleu > b);
            if improved {
                best_bleu = Some(bleu);
                intervals_without_improvement = 0;
                model.save_checkpoint(&best_path)?;
            } else {
                intervals_without_improvement += 1;
                if intervals_without_improvement >= config.patience {
                    break 'training;
                }
            }
        }
    }

    if best_bleu.is_none() {
        model.save_checkpoint(&best_path)?;
    }
    Ok(TrainOutcome {
        checkpoint: best_path,
        best_dev_bleu: best_bleu,
        steps_run,
        final_loss: last_breakdown,
    })
}

fn noise_words<R: Rng + ?Sized>(words: &[String], nm: &NoiseModel, rng: &mut R) -> Vec<String> {
    data::noise_sentence(words, nm, rng)
}

// ----- file-level commands ------------------------------------------------

/// Per aligned line (X from the semantic file, Y from the syntactic file):
/// decode from the posterior means, one output sentence per line.
pub fn generate_cmd(
    checkpoint: &Path,
    semantic_path: &Path,
    syntactic_path: &Path,
    mode: GenMode,
    output_path: &Path,
    lowercase: bool,
) -> Result<()> {
    let model = Model::load_checkpoint(checkpoint)?;
    let sem_lines = data::load_lines(semantic_path)?;
    let syn_lines = data::load_lines(syntactic_path)?;
    if sem_lines.len() != syn_lines.len() {
        return Err(TrainError::Misaligned { left: sem_lines.len(), right: syn_lines.len() });
    }
    let inputs: Vec<(String, String)> =
        sem_lines.into_iter().zip(syn_lines.into_iter()).collect();
    let outputs = crate::parallel::try_map(&inputs, |(sem, syn)| {
        let sem_words: Vec<String> = split_words(sem, lowercase);
        let syn_words: Vec<String> = split_words(syn, lowercase);
        let x = model.sequence_from_words(&sem_words)?;
        let yx = model.sequence_from_words(&syn_words)?;
        let y = model.encode_semantic(&x)?.mu().to_vec();
        let z = model.encode_syntactic(&yx)?.mu().to_vec();
        let ids = model.generate(&y, &z, mode, model.config().max_decode_len)?;
        Ok::<String, ModelError>(model.vocab().decode_ids(&ids).join(" "))
    })?;
    let mut f = std::fs::File::create(output_path)?;
    for line in outputs {
        writeln!(f, "{line}")?;
    }
    Ok(())
}

fn split_words(line: &str, lowercase: bool) -> Vec<String> {
    line.split_whitespace()
        .map(|w| if lowercase { w.to_lowercase() } else { w.to_string() })
        .collect()
}

/// Compute the full metric table for an output file against eval triples.
/// ST needs both parse files; without them it is omitted with a note.
pub fn evaluate_cmd(
    output_path: &Path,
    triples_path: &Path,
    output_parses: Option<&Path>,
    reference_parses: Option<&Path>,
    lowercase: bool,
) -> Result<MetricReport> {
    let outputs: Vec<Vec<String>> = data::load_lines(output_path)?
        .iter()
        .map(|l| split_words(l, lowercase))
        .collect();
    let triples = data::load_eval_triples(triples_path, lowercase)?;
    if outputs.len() != triples.len() {
        return Err(TrainError::Misaligned { left: outputs.len(), right: triples.len() });
    }
    let references: Vec<Vec<String>> = triples.iter().map(|t| t.reference.clone()).collect();

    let bleu = metrics::bleu_corpus(&outputs, &references);
    let pairs: Vec<(Vec<String>, Vec<String>)> =
        outputs.iter().cloned().zip(references.iter().cloned()).collect();
    let per_pair = crate::parallel::map(&pairs, |(o, r)| {
        (
            metrics::rouge_n(o, r, 1),
            metrics::rouge_n(o, r, 2),
            metrics::rouge_l(o, r),
            metrics::meteor_simplified(o, r),
        )
    });
    let n = per_pair.len().max(1) as f64;
    let rouge_1 = per_pair.iter().map(|v| v.0).sum::<f64>() / n;
    let rouge_2 = per_pair.iter().map(|v| v.1).sum::<f64>() / n;
    let rouge_l = per_pair.iter().map(|v| v.2).sum::<f64>() / n;
    let meteor = per_pair.iter().map(|v| v.3).sum::<f64>() / n;

    let mut metadata = MetricReport::standard_metadata();
    let st = match (output_parses, reference_parses) {
        (Some(op), Some(rp)) => {
            let out_parses = data::load_lines(op)?;
            let ref_parses = data::load_lines(rp)?;
            if out_parses.len() != outputs.len() || ref_parses.len() != outputs.len() {
                return Err(TrainError::Misaligned {
                    left: out_parses.len(),
                    right: ref_parses.len(),
                });
            }
            Some(metrics::st_score(&out_parses, &ref_parses)?)
        }
        _ => {
            eprintln!("warning: ST omitted (parse files absent)");
            metadata.push("ST omitted: parse files absent".to_string());
            None
        }
    };

    Ok(MetricReport {
        bleu,
        rouge_1,
        rouge_2,
        rouge_l,
        meteor_simplified: meteor,
        st,
        metadata,
    })
}

/// Emit the latent-code cluster report for a checkpoint trained with LC.
pub fn inspect_clusters_cmd(checkpoint: &Path, out_path: &Path, max_samples: usize) -> Result<()> {
    let model = Model::load_checkpoint(checkpoint)?;
    let entries = crate::latent_codes::cluster_report(&model, max_samples)?;
    std::fs::write(out_path, crate::latent_codes::render_cluster_report(&entries))?;
    Ok(())
}

/// Rank exemplar candidates for every query sentence; tab-separated output
/// lines "query-index candidate-index score candidate-sentence".
pub fn mine_cmd(
    query_tagged: &Path,
    pool_tagged: &Path,
    k: usize,
    lambda: f64,
    lowercase: bool,
) -> Result<String> {
    let queries = data::load_tagged_corpus(query_tagged, lowercase)?;
    let pool = data::load_tagged_corpus(pool_tagged, lowercase)?;
    let mut out = String::new();
    for (qi, q) in queries.iter().enumerate() {
        for (ci, score) in data::mine_syntactic_exemplars(q, &pool, k, lambda) {
            out.push_str(&format!(
                "{qi}\t{ci}\t{score:.6}\t{}\n",
                pool[ci].tokens.join(" ")
            ));
        }
    }
    Ok(out)
}

/// Show noised variants of input sentences under a tagged corpus's groups.
pub fn noise_preview_cmd(
    tagged_path: &Path,
    input_path: &Path,
    p: f64,
    seed: u64,
    lowercase: bool,
) -> Result<String> {
    let tagged = data::load_tagged_corpus(tagged_path, lowercase)?;
    let nm = data::build_pos_groups(&tagged, p)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = String::new();
    for line in data::load_lines(input_path)? {
        let words = split_words(&line, lowercase);
        out.push_str(&data::noise_sentence(&words, &nm, &mut rng).join(" "));
        out.push('\n');
    }
    Ok(out)
}
