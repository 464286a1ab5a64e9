//! Multi-task losses: the weighted two-latent ELBO, the paraphrase
//! reconstruction loss (PRL) that swaps the semantic variables of a
//! paraphrase pair, and the word position loss (WPL).

use crate::model::{Model, ModelError, Result, TokenSequence};
use crate::tape::{NodeId, Tape};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Where the position head is attached.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WplPlacement {
    None,
    DecHidden,
    EncEmb,
    DecEmb,
    BothEmb,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct WplConfig {
    pub placement: WplPlacement,
    /// P: number of predictable positions; must cover the longest training
    /// sentence.
    pub max_position: usize,
    pub head_depth: usize,
}

impl Default for WplConfig {
    fn default() -> Self {
        WplConfig { placement: WplPlacement::BothEmb, max_position: 64, head_depth: 3 }
    }
}

impl WplPlacement {
    /// Input width of the position head, or None when WPL is off.
    pub(crate) fn head_input_dim(
        &self,
        emb_dim: usize,
        dec_hidden: usize,
        z_dim: usize,
    ) -> Option<usize> {
        match self {
            WplPlacement::None => None,
            WplPlacement::DecHidden => Some(dec_hidden + z_dim),
            WplPlacement::EncEmb | WplPlacement::DecEmb | WplPlacement::BothEmb => {
                Some(emb_dim + z_dim)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default)]
pub struct LossWeights {
    pub kl_y: f64,
    pub kl_z: f64,
    /// PRL replaces the self-reconstruction term whenever this is > 0.
    pub prl: f64,
    pub wpl: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        LossWeights { kl_y: 1e-4, kl_z: 1e-3, prl: 1.0, wpl: 1.0 }
    }
}

impl LossWeights {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("kl_y", self.kl_y),
            ("kl_z", self.kl_z),
            ("prl", self.prl),
            ("wpl", self.wpl),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(ModelError::BadConfig(format!(
                    "loss weight {name} must be a nonnegative finite number, got {v}"
                )));
            }
        }
        Ok(())
    }

    pub fn prl_enabled(&self) -> bool {
        self.prl > 0.0
    }
}

/// Per-term training loss record. Every term is reported whether or not its
/// weight is zero; `total` only contains the weighted terms actually in play.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LossBreakdown {
    /// Reconstruction NLL included in the total: the self-reconstruction term
    /// when PRL is disabled, the crossed-pair term (== `prl`) otherwise.
    pub reconstruction: f64,
    pub kl_y: f64,
    pub kl_z: f64,
    /// Crossed-pair reconstruction NLL; 0 when PRL is disabled.
    pub prl: f64,
    pub wpl: f64,
    pub weights: LossWeights,
    pub total: f64,
}

impl LossBreakdown {
    /// Recompute the total from the recorded fields; matches `total` to
    /// floating-point noise. When PRL is enabled it replaces (is) the
    /// reconstruction term and enters scaled by its weight.
    pub fn recompute_total(&self) -> f64 {
        let recon_term = if self.weights.prl_enabled() {
            self.weights.prl * self.prl
        } else {
            self.reconstruction
        };
        recon_term
            + self.weights.kl_y * self.kl_y
            + self.weights.kl_z * self.kl_z
            + self.weights.wpl * self.wpl
    }
}

/// Summed position cross-entropy given precomputed per-position logits:
/// -Σ_t log softmax(logits_t)[t].
pub fn position_nll(logits_per_position: &[Vec<f64>]) -> f64 {
    let mut total = 0.0;
    for (t, logits) in logits_per_position.iter().enumerate() {
        let m = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lse = m + logits.iter().map(|v| (v - m).exp()).sum::<f64>().ln();
        total += lse - logits[t];
    }
    total
}

/// One sentence's view for loss assembly: the clean ids are the decoder
/// target and semantic-encoder input; the (possibly noised) syntactic ids
/// feed the syntactic encoder only.
#[derive(Debug, Clone, Copy)]
pub(crate) struct SentenceView<'a> {
    pub clean: &'a [usize],
    pub syntactic: &'a [usize],
}

impl<'a> SentenceView<'a> {
    pub(crate) fn plain(x: &'a TokenSequence) -> Self {
        SentenceView { clean: x.ids(), syntactic: x.ids() }
    }
}

struct SentenceNodes {
    kl_y: NodeId,
    kl_z: NodeId,
    y: NodeId,
    z: NodeId,
    enc_embs: Vec<NodeId>,
}

fn encode_and_sample<R: Rng + ?Sized>(
    model: &Model,
    tape: &mut Tape,
    view: SentenceView,
    rng: &mut R,
) -> SentenceNodes {
    let sem = model.sem_head_nodes(tape, view.clean);
    let syn = model.syn_head_nodes(tape, view.syntactic);
    let y = model.sample_vmf_node(tape, &sem, rng);
    let z = model.sample_gaussian_node(tape, &syn, rng);
    let kl_y = model.kl_y_node(tape, &sem);
    let kl_z = model.kl_z_node(tape, &syn);
    SentenceNodes { kl_y, kl_z, y, z, enc_embs: syn.token_embs }
}

fn wpl_over(
    model: &Model,
    tape: &mut Tape,
    embs: &[NodeId],
    z: NodeId,
) -> Result<Vec<NodeId>> {
    let head = model.wpl_head().ok_or(ModelError::WplDisabled)?;
    let p = model.config().wpl.max_position;
    if embs.len() > p {
        return Err(ModelError::SequenceTooLong { len: embs.len(), max: p });
    }
    let mut terms = Vec::with_capacity(embs.len());
    for (t, emb) in embs.iter().enumerate() {
        let input = tape.concat(&[*emb, z]);
        let logits = head.apply(tape, input);
        terms.push(tape.log_softmax_nll(logits, t));
    }
    Ok(terms)
}

/// Tape-level assembly of the full pair loss. Returns the scalar total node
/// and the value-level breakdown.
pub(crate) fn build_pair_loss<R: Rng + ?Sized>(
    model: &Model,
    tape: &mut Tape,
    a: SentenceView,
    b: SentenceView,
    weights: &LossWeights,
    rng: &mut R,
) -> Result<(NodeId, LossBreakdown)> {
    weights.validate()?;
    let variant = model.config().decoder_variant;
    let sa = encode_and_sample(model, tape, a, rng);
    let sb = encode_and_sample(model, tape, b, rng);

    // Reconstruction: self, or crossed when PRL is enabled (semantic
    // variables swapped, syntactic kept with their own sentence).
    let (ya, yb) = if weights.prl_enabled() {
        (sb.y, sa.y)
    } else {
        (sa.y, sb.y)
    };
    let ra = model.recon_nodes(tape, a.clean, ya, sa.z, variant);
    let rb = model.recon_nodes(tape, b.clean, yb, sb.z, variant);
    let recon = tape.add(ra.nll, rb.nll);

    let kl_y = tape.add(sa.kl_y, sb.kl_y);
    let kl_z = tape.add(sa.kl_z, sb.kl_z);

    let placement = model.config().wpl.placement;
    let mut wpl_terms: Vec<NodeId> = Vec::new();
    match placement {
        WplPlacement::None => {}
        WplPlacement::EncEmb => {
            wpl_terms.extend(wpl_over(model, tape, &sa.enc_embs, sa.z)?);
            wpl_terms.extend(wpl_over(model, tape, &sb.enc_embs, sb.z)?);
        }
        WplPlacement::DecEmb => {
            wpl_terms.extend(wpl_over(model, tape, &ra.dec_embs, sa.z)?);
            wpl_terms.extend(wpl_over(model, tape, &rb.dec_embs, sb.z)?);
        }
        WplPlacement::BothEmb => {
            wpl_terms.extend(wpl_over(model, tape, &sa.enc_embs, sa.z)?);
            wpl_terms.extend(wpl_over(model, tape, &sb.enc_embs, sb.z)?);
            wpl_terms.extend(wpl_over(model, tape, &ra.dec_embs, sa.z)?);
            wpl_terms.extend(wpl_over(model, tape, &rb.dec_embs, sb.z)?);
        }
        WplPlacement::DecHidden => {
            wpl_terms.extend(wpl_over(model, tape, &ra.hiddens, sa.z)?);
            wpl_terms.extend(wpl_over(model, tape, &rb.hiddens, sb.z)?);
        }
    }
    let wpl = if wpl_terms.is_empty() {
        tape.constant_scalar(0.0)
    } else {
        tape.sum_vecs(&wpl_terms)
    };

    // total = recon term (weighted by prl weight when crossed) + weighted KLs
    //         + weighted WPL
    let recon_term = if weights.prl_enabled() {
        tape.scale(recon, weights.prl)
    } else {
        recon
    };
    let kl_y_term = tape.scale(kl_y, weights.kl_y);
    let kl_z_term = tape.scale(kl_z, weights.kl_z);
    let wpl_term = tape.scale(wpl, weights.wpl);
    let partial = tape.add(recon_term, kl_y_term);
    let partial = tape.add(partial, kl_z_term);
    let total = tape.add(partial, wpl_term);

    let recon_val = tape.scalar(recon);
    let breakdown = LossBreakdown {
        reconstruction: recon_val,
        kl_y: tape.scalar(kl_y),
        kl_z: tape.scalar(kl_z),
        prl: if weights.prl_enabled() { recon_val } else { 0.0 },
        wpl: tape.scalar(wpl),
        weights: *weights,
        total: tape.scalar(total),
    };
    Ok((total, breakdown))
}

/// Pair loss values only.
pub fn total_loss<R: Rng + ?Sized>(
    model: &Model,
    x1: &TokenSequence,
    x2: &TokenSequence,
    weights: &LossWeights,
    rng: &mut R,
) -> Result<LossBreakdown> {
    let mut tape = Tape::new(model.params());
    let (_, breakdown) = build_pair_loss(
        model,
        &mut tape,
        SentenceView::plain(x1),
        SentenceView::plain(x2),
        weights,
        rng,
    )?;
    Ok(breakdown)
}

/// Pair loss plus the gradient of the total with respect to every parameter.
pub fn total_loss_grad<R: Rng + ?Sized>(
    model: &Model,
    x1: &TokenSequence,
    x2: &TokenSequence,
    weights: &LossWeights,
    rng: &mut R,
) -> Result<(LossBreakdown, Vec<f64>)> {
    let mut tape = Tape::new(model.params());
    let (total, breakdown) = build_pair_loss(
        model,
        &mut tape,
        SentenceView::plain(x1),
        SentenceView::plain(x2),
        weights,
        rng,
    )?;
    let grad = tape.backward(total);
    Ok((breakdown, grad))
}

/// As [`total_loss_grad`] with separately noised syntactic-encoder inputs.
pub(crate) fn noised_loss_grad<R: Rng + ?Sized>(
    model: &Model,
    a: SentenceView,
    b: SentenceView,
    weights: &LossWeights,
    rng: &mut R,
) -> Result<(LossBreakdown, Vec<f64>)> {
    let mut tape = Tape::new(model.params());
    let (total, breakdown) = build_pair_loss(model, &mut tape, a, b, weights, rng)?;
    let grad = tape.backward(total);
    Ok((breakdown, grad))
}

/// PRL with freshly sampled latents:
/// -[log p(x1 | y2, z1) + log p(x2 | y1, z2)], y_i ~ q(y|x_i), z_i ~ q(z|x_i).
pub fn paraphrase_reconstruction_loss<R: Rng + ?Sized>(
    model: &Model,
    x1: &TokenSequence,
    x2: &TokenSequence,
    rng: &mut R,
) -> Result<f64> {
    let mut tape = Tape::new(model.params());
    let variant = model.config().decoder_variant;
    let sa = encode_and_sample(model, &mut tape, SentenceView::plain(x1), rng);
    let sb = encode_and_sample(model, &mut tape, SentenceView::plain(x2), rng);
    let ra = model.recon_nodes(&mut tape, x1.ids(), sb.y, sa.z, variant);
    let rb = model.recon_nodes(&mut tape, x2.ids(), sa.y, sb.z, variant);
    Ok(tape.scalar(ra.nll) + tape.scalar(rb.nll))
}

/// PRL at caller-frozen latent samples; the mirrored-assignment symmetry and
/// identical-pair reductions are exact at this level.
pub fn paraphrase_reconstruction_loss_with_latents(
    model: &Model,
    x1: &TokenSequence,
    x2: &TokenSequence,
    y1: &[f64],
    z1: &[f64],
    y2: &[f64],
    z2: &[f64],
) -> Result<f64> {
    let lp1 = model.reconstruction_log_prob(x1, y2, z1)?;
    let lp2 = model.reconstruction_log_prob(x2, y1, z2)?;
    Ok(-(lp1 + lp2))
}

/// Position loss for externally supplied embedding vectors and a fixed z,
/// through the model's position head.
pub fn word_position_loss(model: &Model, token_embeddings: &[Vec<f64>], z: &[f64]) -> Result<f64> {
    let head = model.wpl_head().ok_or(ModelError::WplDisabled)?;
    let p = model.config().wpl.max_position;
    if token_embeddings.len() > p {
        return Err(ModelError::SequenceTooLong { len: token_embeddings.len(), max: p });
    }
    let mut tape = Tape::new(model.params());
    let z_node = tape.constant(z.to_vec());
    let mut logits = Vec::with_capacity(token_embeddings.len());
    for emb in token_embeddings {
        let e = tape.constant(emb.clone());
        let input = tape.concat(&[e, z_node]);
        let out = head.apply(&mut tape, input);
        logits.push(tape.value(out).to_vec());
    }
    Ok(position_nll(&logits))
}
