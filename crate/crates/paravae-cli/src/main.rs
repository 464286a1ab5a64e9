//! Command-line surface: training, generation, evaluation, exemplar mining,
//! cluster inspection, encoder probes, and noising previews.

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use paravae::data;
use paravae::metrics::{self, EncoderVariable};
use paravae::model::{GenMode, Model};
use paravae::train::{self, TrainConfig};
use std::path::PathBuf;

/// Seed override honored by every subcommand that draws random numbers.
const SEED_ENV: &str = "PARAVAE_SEED";

#[derive(Parser)]
#[command(name = "paravae", version, about = "Syntactic-exemplar paraphrase generation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a model from a paraphrase-pair TSV.
    Train(TrainArgs),
    /// Decode outputs for aligned semantic/syntactic input files.
    Generate(GenerateArgs),
    /// Score an output file against eval triples.
    Evaluate(EvaluateArgs),
    /// Rank syntactic-exemplar candidates for query sentences.
    MineExemplars(MineArgs),
    /// Dump the latent-code word clusters of a checkpoint.
    InspectClusters(InspectArgs),
    /// Run the encoder probes (similarity correlation, 1-NN syntax).
    EncoderEval(EncoderEvalArgs),
    /// Preview POS-group word noising on input sentences.
    NoisePreview(NoiseArgs),
}

#[derive(Args)]
struct TrainArgs {
    /// Flat key = value configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    train_pairs: Option<PathBuf>,
    #[arg(long)]
    dev_triples: Option<PathBuf>,
    #[arg(long)]
    tagged_corpus: Option<PathBuf>,
    #[arg(long)]
    pretrained_embeddings: Option<PathBuf>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    max_steps: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long)]
    eval_interval: Option<usize>,
    #[arg(long)]
    patience: Option<usize>,
    #[arg(long)]
    noise_prob: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Greedy,
    Beam,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    checkpoint: PathBuf,
    /// One semantic input sentence per line.
    #[arg(long)]
    semantic: PathBuf,
    /// One syntactic exemplar per line, aligned with --semantic.
    #[arg(long)]
    syntactic: PathBuf,
    #[arg(long, value_enum, default_value = "beam")]
    mode: Mode,
    #[arg(long)]
    output: PathBuf,
    #[arg(long, default_value_t = true)]
    lowercase: bool,
}

#[derive(Args)]
struct EvaluateArgs {
    /// System output, one sentence per line.
    #[arg(long)]
    output: PathBuf,
    /// Eval triples TSV (semantic, syntactic, reference).
    #[arg(long)]
    triples: PathBuf,
    /// Bracketed parses of the output lines (enables ST).
    #[arg(long)]
    output_parses: Option<PathBuf>,
    /// Bracketed parses of the references (enables ST).
    #[arg(long)]
    reference_parses: Option<PathBuf>,
    /// Also write the machine-readable key=value report here.
    #[arg(long)]
    kv_out: Option<PathBuf>,
    #[arg(long, default_value_t = true)]
    lowercase: bool,
}

#[derive(Args)]
struct MineArgs {
    #[arg(long)]
    query_tagged: PathBuf,
    #[arg(long)]
    pool_tagged: PathBuf,
    #[arg(short, default_value_t = 10)]
    k: usize,
    /// Weight of the BLEU dissimilarity term in the mining score.
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    /// Output file; stdout when absent.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, default_value_t = true)]
    lowercase: bool,
}

#[derive(Args)]
struct InspectArgs {
    #[arg(long)]
    checkpoint: PathBuf,
    #[arg(long)]
    output: PathBuf,
    /// Sample word types listed per cluster.
    #[arg(long, default_value_t = 10)]
    samples: usize,
}

#[derive(Args)]
struct EncoderEvalArgs {
    #[arg(long)]
    checkpoint: PathBuf,
    /// Scored sentence pairs TSV for the similarity probe.
    #[arg(long)]
    similarity: Option<PathBuf>,
    /// Test sentences (word_TAG) for the 1-NN probe.
    #[arg(long)]
    test_tagged: Option<PathBuf>,
    /// Bracketed parses aligned with --test-tagged.
    #[arg(long)]
    test_parses: Option<PathBuf>,
    /// Candidate pool sentences (word_TAG).
    #[arg(long)]
    pool_tagged: Option<PathBuf>,
    /// Bracketed parses aligned with --pool-tagged.
    #[arg(long)]
    pool_parses: Option<PathBuf>,
    /// Seed for the reported random-retrieval baseline.
    #[arg(long, default_value_t = 1)]
    baseline_seed: u64,
    #[arg(long, default_value_t = true)]
    lowercase: bool,
}

#[derive(Args)]
struct NoiseArgs {
    #[arg(long)]
    tagged: PathBuf,
    #[arg(long)]
    input: PathBuf,
    #[arg(short, default_value_t = 0.3)]
    p: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = true)]
    lowercase: bool,
}

fn env_seed() -> Result<Option<u64>> {
    match std::env::var(SEED_ENV) {
        Ok(v) => Ok(Some(v.parse().with_context(|| format!("bad {SEED_ENV} value '{v}'"))?)),
        Err(_) => Ok(None),
    }
}

fn run_train(args: TrainArgs) -> Result<()> {
    let mut config = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading config {}", path.display()))?;
            TrainConfig::from_flat_text(&text)?
        }
        None => TrainConfig::default(),
    };
    if let Some(v) = args.train_pairs {
        config.train_pairs = v;
    }
    if let Some(v) = args.dev_triples {
        config.dev_triples = v;
    }
    if let Some(v) = args.tagged_corpus {
        config.tagged_corpus = Some(v);
    }
    if let Some(v) = args.pretrained_embeddings {
        config.pretrained_embeddings = Some(v);
    }
    if let Some(v) = args.out_dir {
        config.out_dir = v;
    }
    if let Some(v) = args.max_steps {
        config.max_steps = v;
    }
    if let Some(v) = args.batch_size {
        config.batch_size = v;
    }
    if let Some(v) = args.learning_rate {
        config.learning_rate = v;
    }
    if let Some(v) = args.eval_interval {
        config.eval_interval = v;
    }
    if let Some(v) = args.patience {
        config.patience = v;
    }
    if let Some(v) = args.noise_prob {
        config.noise_prob = v;
    }
    if let Some(v) = args.seed {
        config.seed = v;
    }
    if let Some(v) = env_seed()? {
        config.seed = v;
    }
    if config.train_pairs.as_os_str().is_empty() || config.dev_triples.as_os_str().is_empty() {
        bail!("train_pairs and dev_triples are required (config file or flags)");
    }

    let outcome = train::train(&config)?;
    println!("steps run: {}", outcome.steps_run);
    if let Some(b) = outcome.best_dev_bleu {
        println!("best dev BLEU: {b:.2}");
    }
    println!("checkpoint: {}", outcome.checkpoint.display());
    Ok(())
}

fn run_generate(args: GenerateArgs) -> Result<()> {
    let mode = match args.mode {
        Mode::Greedy => GenMode::Greedy,
        Mode::Beam => GenMode::Beam,
    };
    train::generate_cmd(
        &args.checkpoint,
        &args.semantic,
        &args.syntactic,
        mode,
        &args.output,
        args.lowercase,
    )?;
    println!("wrote {}", args.output.display());
    Ok(())
}

fn run_evaluate(args: EvaluateArgs) -> Result<()> {
    let report = train::evaluate_cmd(
        &args.output,
        &args.triples,
        args.output_parses.as_deref(),
        args.reference_parses.as_deref(),
        args.lowercase,
    )?;
    print!("{}", report.render_text());
    if let Some(kv) = args.kv_out {
        std::fs::write(&kv, report.render_kv())?;
        println!("# key-value report: {}", kv.display());
    }
    Ok(())
}

fn run_mine(args: MineArgs) -> Result<()> {
    let out = train::mine_cmd(
        &args.query_tagged,
        &args.pool_tagged,
        args.k,
        args.lambda,
        args.lowercase,
    )?;
    match args.output {
        Some(path) => std::fs::write(path, out)?,
        None => print!("{out}"),
    }
    Ok(())
}

fn run_inspect(args: InspectArgs) -> Result<()> {
    train::inspect_clusters_cmd(&args.checkpoint, &args.output, args.samples)?;
    println!("wrote {}", args.output.display());
    Ok(())
}

fn run_encoder_eval(args: EncoderEvalArgs) -> Result<()> {
    let model = Model::load_checkpoint(&args.checkpoint)?;
    let mut ran_any = false;
    if let Some(path) = &args.similarity {
        let pairs = data::load_scored_pairs(path, args.lowercase)?;
        let sem = metrics::encoder_similarity_eval(&model, &pairs, EncoderVariable::Semantic)?;
        let syn = metrics::encoder_similarity_eval(&model, &pairs, EncoderVariable::Syntactic)?;
        println!("similarity Pearson (%):  semantic {sem:.1}  syntactic {syn:.1}");
        ran_any = true;
    }
    if let (Some(tt), Some(tp), Some(pt), Some(pp)) = (
        &args.test_tagged,
        &args.test_parses,
        &args.pool_tagged,
        &args.pool_parses,
    ) {
        let test = data::load_annotated(tt, tp, args.lowercase)?;
        let pool = data::load_annotated(pt, pp, args.lowercase)?;
        let sem = metrics::nn_syntactic_eval(&model, &test, &pool, EncoderVariable::Semantic)?;
        let syn = metrics::nn_syntactic_eval(&model, &test, &pool, EncoderVariable::Syntactic)?;
        let baseline = metrics::nn_random_baseline(&test, &pool, args.baseline_seed)?;
        println!(
            "1-NN labeled F1 (%):     semantic {:.1}  syntactic {:.1}  random {:.1}",
            sem.labeled_f1, syn.labeled_f1, baseline.labeled_f1
        );
        println!(
            "1-NN tagging acc (%):    semantic {:.1}  syntactic {:.1}  random {:.1}",
            sem.tag_accuracy, syn.tag_accuracy, baseline.tag_accuracy
        );
        ran_any = true;
    }
    if !ran_any {
        bail!(
            "nothing to evaluate: pass --similarity and/or all four of \
             --test-tagged --test-parses --pool-tagged --pool-parses"
        );
    }
    Ok(())
}

fn run_noise_preview(args: NoiseArgs) -> Result<()> {
    let seed = env_seed()?.unwrap_or(args.seed);
    let out = train::noise_preview_cmd(&args.tagged, &args.input, args.p, seed, args.lowercase)?;
    print!("{out}");
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Train(args) => run_train(args),
        Command::Generate(args) => run_generate(args),
        Command::Evaluate(args) => run_evaluate(args),
        Command::MineExemplars(args) => run_mine(args),
        Command::InspectClusters(args) => run_inspect(args),
        Command::EncoderEval(args) => run_encoder_eval(args),
        Command::NoisePreview(args) => run_noise_preview(args),
    }
}
