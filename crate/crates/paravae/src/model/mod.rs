//! The two-latent sequence VAE: a word-averaging semantic encoder with a vMF
//! posterior, a biLSTM syntactic encoder with a Gaussian posterior, and an
//! LSTM decoder with four latent-wiring variants.

mod checkpoint;
mod config;
pub(crate) mod net;
mod vocab;

pub use config::{DecoderVariant, ModelConfig};
pub use vocab::{TokenSequence, Vocabulary, BOS, EOS, PAD, RESERVED, UNK};

use crate::distributions::{self, GaussianParams, VmfParams};
use crate::objectives::{LossBreakdown, LossWeights};
use crate::tape::{NodeId, ParamSet, Tape};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("token sequence must be nonempty")]
    EmptySequence,

    #[error("sequence length {len} exceeds the configured maximum {max}")]
    SequenceTooLong { len: usize, max: usize },

    #[error("token id {id} out of range for vocabulary of size {vocab}")]
    TokenOutOfRange { id: usize, vocab: usize },

    #[error("duplicate token in vocabulary: {token}")]
    DuplicateToken { token: String },

    #[error("decoder variant {requested:?} is not wiring-compatible with the configured {configured:?}")]
    VariantMismatch { configured: DecoderVariant, requested: DecoderVariant },

    #[error("dimension mismatch for {what}: expected {expected}, got {got}")]
    DimensionMismatch { what: &'static str, expected: usize, got: usize },

    #[error("invalid configuration: {0}")]
    BadConfig(String),

    #[error("latent codes are disabled in this model")]
    LatentCodesDisabled,

    #[error("word position loss is disabled in this model (placement = none)")]
    WplDisabled,

    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Dist(#[from] crate::distributions::DistError),
}

pub type Result<T> = std::result::Result<T, ModelError>;

/// Recurrent decoder state (hidden, cell).
#[derive(Debug, Clone, PartialEq)]
pub struct DecoderState {
    pub h: Vec<f64>,
    pub c: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GenMode {
    Greedy,
    /// Beam search at the configured beam size.
    Beam,
}

pub struct Model {
    config: ModelConfig,
    vocab: Vocabulary,
    params: ParamSet,
    net: net::Net,
}

pub(crate) struct SemHead {
    pub mu: NodeId,
    pub kappa: NodeId,
}

pub(crate) struct SynHead {
    pub mu: NodeId,
    pub log_scale: NodeId,
    pub sigma: NodeId,
    /// Embedding nodes of the (possibly noised) input tokens, in order.
    pub token_embs: Vec<NodeId>,
}

pub(crate) struct ReconNodes {
    /// Summed teacher-forced NLL including the EOS step.
    pub nll: NodeId,
    /// Decoder input embeddings of the real tokens x_1..x_T.
    pub dec_embs: Vec<NodeId>,
    /// Decoder hidden states paired with positions 0..T-1.
    pub hiddens: Vec<NodeId>,
}

impl Model {
    pub fn new(config: ModelConfig, vocab: Vocabulary, seed: u64) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (net, params) = net::Net::build(&config, vocab.size(), &mut rng);
        Ok(Model { config, vocab, params, net })
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn params(&self) -> &ParamSet {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut ParamSet {
        &mut self.params
    }

    pub(crate) fn net(&self) -> &net::Net {
        &self.net
    }

    pub(crate) fn wpl_head(&self) -> Option<&net::Ffn> {
        self.net.wpl_head.as_ref()
    }

    pub fn sequence(&self, ids: Vec<usize>) -> Result<TokenSequence> {
        TokenSequence::new(ids, self.vocab.size(), self.config.wpl.max_position)
    }

    /// Encode words (with OOV mapped to UNK) into a bounded sequence.
    pub fn sequence_from_words(&self, words: &[String]) -> Result<TokenSequence> {
        self.sequence(self.vocab.encode_words(words))
    }

    // ----- tape-level graph builders -------------------------------------

    /// Word-averaging semantic encoder head. Token embeddings are summed in
    /// sorted-id order, so the result is exactly order-invariant.
    pub(crate) fn sem_head_nodes(&self, t: &mut Tape, ids: &[usize]) -> SemHead {
        debug_assert!(!ids.is_empty());
        let mut sorted = ids.to_vec();
        sorted.sort_unstable();
        let rows: Vec<NodeId> = sorted.iter().map(|&w| t.row(self.net.sem_emb, w)).collect();
        let sum = t.sum_vecs(&rows);
        let avg = t.scale(sum, 1.0 / ids.len() as f64);
        let out = self.net.sem_head.apply(t, avg);
        let m = self.config.semantic_dim;
        let mu_raw = t.slice(out, 0, m);
        let kappa_raw = t.slice(out, m, 1);
        let mu = t.normalize(mu_raw);
        let sp = t.softplus(kappa_raw);
        // softplus floor keeps kappa away from the zero-gradient singularity
        let kappa = t.offset(sp, 1e-4);
        SemHead { mu, kappa }
    }

    /// biLSTM syntactic encoder head over (possibly code-marginalized)
    /// embeddings; per-position forward/backward concat, averaged.
    pub(crate) fn syn_head_nodes(&self, t: &mut Tape, ids: &[usize]) -> SynHead {
        debug_assert!(!ids.is_empty());
        let embs: Vec<NodeId> = ids.iter().map(|&w| self.net.syn_embed_node(t, w)).collect();
        let mut fwd = Vec::with_capacity(embs.len());
        let mut state = self.net.syn_fwd.zero_state(t);
        for e in &embs {
            state = self.net.syn_fwd.step(t, *e, state);
            fwd.push(state.0);
        }
        let mut bwd_rev = Vec::with_capacity(embs.len());
        let mut state = self.net.syn_bwd.zero_state(t);
        for e in embs.iter().rev() {
            state = self.net.syn_bwd.step(t, *e, state);
            bwd_rev.push(state.0);
        }
        bwd_rev.reverse();
        let per_pos: Vec<NodeId> = fwd
            .iter()
            .zip(bwd_rev.iter())
            .map(|(f, b)| t.concat(&[*f, *b]))
            .collect();
        let sum = t.sum_vecs(&per_pos);
        let avg = t.scale(sum, 1.0 / ids.len() as f64);
        let out = self.net.syn_head.apply(t, avg);
        let d = self.config.syntactic_dim;
        let mu = t.slice(out, 0, d);
        let log_scale_raw = t.slice(out, d, d);
        let log_scale = t.clamp(log_scale_raw, -8.0, 8.0);
        let sigma = t.exp(log_scale);
        SynHead { mu, log_scale, sigma, token_embs: embs }
    }

    /// Reparameterized vMF sample: the accepted rejection-sampler draws are
    /// constants; the sample stays differentiable in kappa through the
    /// proposal map and in mu through the Householder reflection. The
    /// acceptance-density correction term is omitted (pathwise-only
    /// gradient).
    pub(crate) fn sample_vmf_node<R: Rng + ?Sized>(
        &self,
        t: &mut Tape,
        head: &SemHead,
        rng: &mut R,
    ) -> NodeId {
        let m = t.len(head.mu);
        let kappa_val = t.scalar(head.kappa);
        let draw = distributions::vmf_draw(m, kappa_val, rng);
        let mf = m as f64;

        // b(kappa) = (-2k + sqrt(4k^2 + (m-1)^2)) / (m-1)
        let k2 = t.mul(head.kappa, head.kappa);
        let k2_4 = t.scale(k2, 4.0);
        let inside = t.offset(k2_4, (mf - 1.0) * (mf - 1.0));
        let root = t.sqrt(inside);
        let neg2k = t.scale(head.kappa, -2.0);
        let num = t.add(neg2k, root);
        let b = t.scale(num, 1.0 / (mf - 1.0));

        // w = (1 - (1+b) psi) / (1 - (1-b) psi)
        let psi = draw.psi;
        let b_psi_neg = t.scale(b, -psi);
        let w_num = t.offset(b_psi_neg, 1.0 - psi);
        let b_psi = t.scale(b, psi);
        let w_den = t.offset(b_psi, 1.0 - psi);
        let w = t.div(w_num, w_den);

        // tangent scale sqrt(1 - w^2)
        let w2 = t.mul(w, w);
        let w2n = t.scale(w2, -1.0);
        let one_minus = t.offset(w2n, 1.0);
        let one_minus = t.clamp(one_minus, 0.0, 1.0);
        let tang_scale = t.sqrt(one_minus);
        let tangent = t.constant(draw.tangent);
        let tang = t.mul_scalar(tangent, tang_scale);
        let north = t.concat(&[w, tang]);

        // Householder reflection taking e1 to mu.
        let mu_val = t.value(head.mu).to_vec();
        let mut diff_norm2 = (1.0 - mu_val[0]) * (1.0 - mu_val[0]);
        for v in &mu_val[1..] {
            diff_norm2 += v * v;
        }
        if diff_norm2.sqrt() < 1e-12 {
            // mu is numerically the north pole; no reflection needed
            return north;
        }
        let mut e1 = vec![0.0; m];
        e1[0] = 1.0;
        let e1 = t.constant(e1);
        let diff = t.sub(e1, head.mu);
        let u = t.normalize(diff);
        let d = t.dot(u, north);
        let ud = t.mul_scalar(u, d);
        let ud2 = t.scale(ud, 2.0);
        t.sub(north, ud2)
    }

    pub(crate) fn sample_gaussian_node<R: Rng + ?Sized>(
        &self,
        t: &mut Tape,
        head: &SynHead,
        rng: &mut R,
    ) -> NodeId {
        let d = t.len(head.mu);
        let eps: Vec<f64> =
            (0..d).map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal)).collect();
        let eps = t.constant(eps);
        let se = t.mul(head.sigma, eps);
        t.add(head.mu, se)
    }

    pub(crate) fn kl_y_node(&self, t: &mut Tape, head: &SemHead) -> NodeId {
        t.vmf_kl(head.kappa, self.config.semantic_dim)
    }

    /// 0.5 (|mu|^2 + Σ sigma^2 - d - 2 Σ log sigma)
    pub(crate) fn kl_z_node(&self, t: &mut Tape, head: &SynHead) -> NodeId {
        let d = self.config.syntactic_dim as f64;
        let mu2 = t.dot(head.mu, head.mu);
        let sig2 = t.mul(head.sigma, head.sigma);
        let s_sig2 = t.sum(sig2);
        let s_log = t.sum(head.log_scale);
        let a = t.add(mu2, s_sig2);
        let b = t.offset(a, -d);
        let c = t.scale(s_log, -2.0);
        let e = t.add(b, c);
        t.scale(e, 0.5)
    }

    pub(crate) fn init_state_nodes(
        &self,
        t: &mut Tape,
        y: NodeId,
        z: NodeId,
        variant: DecoderVariant,
    ) -> (NodeId, NodeId) {
        match variant {
            DecoderVariant::Init => {
                let (w, b) = self.net.dec_init.expect("init variant allocates the state head");
                let yz = t.concat(&[y, z]);
                let pre = t.linear(w, Some(b), yz);
                let act = t.tanh(pre);
                let hdim = self.config.decoder_hidden;
                let h = t.slice(act, 0, hdim);
                let c = t.slice(act, hdim, hdim);
                (h, c)
            }
            _ => self.net.dec_lstm.zero_state(t),
        }
    }

    pub(crate) fn decode_step_nodes(
        &self,
        t: &mut Tape,
        prev_token: usize,
        y: NodeId,
        z: NodeId,
        state: (NodeId, NodeId),
        variant: DecoderVariant,
    ) -> (NodeId, (NodeId, NodeId), NodeId) {
        let emb = t.row(self.net.dec_emb, prev_token);
        let input = match variant {
            DecoderVariant::Standard => t.concat(&[emb, z]),
            DecoderVariant::Init => emb,
            DecoderVariant::Concat => t.concat(&[emb, y, z]),
            DecoderVariant::Swap => t.concat(&[emb, y]),
        };
        let next = self.net.dec_lstm.step(t, input, state);
        let head_in = match variant {
            DecoderVariant::Standard => t.concat(&[next.0, y]),
            DecoderVariant::Init | DecoderVariant::Concat => next.0,
            DecoderVariant::Swap => t.concat(&[next.0, z]),
        };
        let logits = t.linear(self.net.dec_head_w, Some(self.net.dec_head_b), head_in);
        (logits, next, emb)
    }

    /// Teacher-forced reconstruction: BOS-prefixed input, EOS-terminated
    /// targets.
    pub(crate) fn recon_nodes(
        &self,
        t: &mut Tape,
        target_ids: &[usize],
        y: NodeId,
        z: NodeId,
        variant: DecoderVariant,
    ) -> ReconNodes {
        let mut state = self.init_state_nodes(t, y, z, variant);
        let mut prev = BOS;
        let mut nlls = Vec::with_capacity(target_ids.len() + 1);
        let mut dec_embs = Vec::with_capacity(target_ids.len());
        let mut hiddens = Vec::with_capacity(target_ids.len());
        for i in 0..=target_ids.len() {
            let target = if i < target_ids.len() { target_ids[i] } else { EOS };
            let (logits, next, emb) = self.decode_step_nodes(t, prev, y, z, state, variant);
            if i > 0 {
                dec_embs.push(emb);
            }
            if i < target_ids.len() {
                hiddens.push(next.0);
            }
            nlls.push(t.log_softmax_nll(logits, target));
            state = next;
            prev = target;
        }
        let nll = t.sum_vecs(&nlls);
        ReconNodes { nll, dec_embs, hiddens }
    }

    // ----- public value-level operations ----------------------------------

    pub fn encode_semantic(&self, x: &TokenSequence) -> Result<VmfParams> {
        self.check_ids(x.ids())?;
        let mut tape = Tape::new(&self.params);
        let head = self.sem_head_nodes(&mut tape, x.ids());
        let mu = tape.value(head.mu).to_vec();
        let kappa = tape.scalar(head.kappa);
        Ok(VmfParams::new(mu, kappa)?)
    }

    pub fn encode_syntactic(&self, x: &TokenSequence) -> Result<GaussianParams> {
        self.check_ids(x.ids())?;
        let mut tape = Tape::new(&self.params);
        let head = self.syn_head_nodes(&mut tape, x.ids());
        let mu = tape.value(head.mu).to_vec();
        let sigma = tape.value(head.sigma).to_vec();
        Ok(GaussianParams::new(mu, sigma)?)
    }

    fn check_ids(&self, ids: &[usize]) -> Result<()> {
        if ids.is_empty() {
            return Err(ModelError::EmptySequence);
        }
        for &id in ids {
            if id >= self.vocab.size() {
                return Err(ModelError::TokenOutOfRange { id, vocab: self.vocab.size() });
            }
        }
        Ok(())
    }

    fn check_latents(&self, y: &[f64], z: &[f64]) -> Result<()> {
        if y.len() != self.config.semantic_dim {
            return Err(ModelError::DimensionMismatch {
                what: "semantic latent y",
                expected: self.config.semantic_dim,
                got: y.len(),
            });
        }
        if z.len() != self.config.syntactic_dim {
            return Err(ModelError::DimensionMismatch {
                what: "syntactic latent z",
                expected: self.config.syntactic_dim,
                got: z.len(),
            });
        }
        Ok(())
    }

    fn check_variant(&self, variant: DecoderVariant) -> Result<()> {
        if !self.config.variant_compatible(variant) {
            return Err(ModelError::VariantMismatch {
                configured: self.config.decoder_variant,
                requested: variant,
            });
        }
        Ok(())
    }

    pub fn init_decoder_state(
        &self,
        y: &[f64],
        z: &[f64],
        variant: DecoderVariant,
    ) -> Result<DecoderState> {
        self.check_latents(y, z)?;
        self.check_variant(variant)?;
        let mut tape = Tape::new(&self.params);
        let yn = tape.constant(y.to_vec());
        let zn = tape.constant(z.to_vec());
        let (h, c) = self.init_state_nodes(&mut tape, yn, zn, variant);
        Ok(DecoderState { h: tape.value(h).to_vec(), c: tape.value(c).to_vec() })
    }

    pub fn decode_step(
        &self,
        prev_token: usize,
        y: &[f64],
        z: &[f64],
        state: &DecoderState,
        variant: DecoderVariant,
    ) -> Result<(Vec<f64>, DecoderState)> {
        self.check_latents(y, z)?;
        self.check_variant(variant)?;
        if prev_token >= self.vocab.size() {
            return Err(ModelError::TokenOutOfRange { id: prev_token, vocab: self.vocab.size() });
        }
        let mut tape = Tape::new(&self.params);
        let yn = tape.constant(y.to_vec());
        let zn = tape.constant(z.to_vec());
        let h = tape.constant(state.h.clone());
        let c = tape.constant(state.c.clone());
        let (logits, next, _) = self.decode_step_nodes(&mut tape, prev_token, yn, zn, (h, c), variant);
        Ok((
            tape.value(logits).to_vec(),
            DecoderState { h: tape.value(next.0).to_vec(), c: tape.value(next.1).to_vec() },
        ))
    }

    /// Teacher-forced log p(x | y, z), EOS step included. Always <= 0.
    pub fn reconstruction_log_prob(&self, x: &TokenSequence, y: &[f64], z: &[f64]) -> Result<f64> {
        self.check_ids(x.ids())?;
        self.check_latents(y, z)?;
        let mut tape = Tape::new(&self.params);
        let yn = tape.constant(y.to_vec());
        let zn = tape.constant(z.to_vec());
        let rec = self.recon_nodes(&mut tape, x.ids(), yn, zn, self.config.decoder_variant);
        Ok(-tape.scalar(rec.nll))
    }

    /// Single-sentence weighted ELBO loss with one latent sample per term.
    pub fn elbo_loss<R: Rng + ?Sized>(
        &self,
        x: &TokenSequence,
        kl_weight_y: f64,
        kl_weight_z: f64,
        rng: &mut R,
    ) -> Result<LossBreakdown> {
        self.check_ids(x.ids())?;
        let weights = LossWeights { kl_y: kl_weight_y, kl_z: kl_weight_z, prl: 0.0, wpl: 0.0 };
        weights.validate()?;
        let mut tape = Tape::new(&self.params);
        let sem = self.sem_head_nodes(&mut tape, x.ids());
        let syn = self.syn_head_nodes(&mut tape, x.ids());
        let y = self.sample_vmf_node(&mut tape, &sem, rng);
        let z = self.sample_gaussian_node(&mut tape, &syn, rng);
        let rec = self.recon_nodes(&mut tape, x.ids(), y, z, self.config.decoder_variant);
        let kl_y = self.kl_y_node(&mut tape, &sem);
        let kl_z = self.kl_z_node(&mut tape, &syn);
        let kl_y_term = tape.scale(kl_y, kl_weight_y);
        let kl_z_term = tape.scale(kl_z, kl_weight_z);
        let partial = tape.add(rec.nll, kl_y_term);
        let total = tape.add(partial, kl_z_term);
        Ok(LossBreakdown {
            reconstruction: tape.scalar(rec.nll),
            kl_y: tape.scalar(kl_y),
            kl_z: tape.scalar(kl_z),
            prl: 0.0,
            wpl: 0.0,
            weights,
            total: tape.scalar(total),
        })
    }

    /// Deterministic decoding from fixed latents. Tokens exclude BOS/EOS; an
    /// output truncated at `max_len` is valid.
    pub fn generate(&self, y: &[f64], z: &[f64], mode: GenMode, max_len: usize) -> Result<Vec<usize>> {
        let width = match mode {
            GenMode::Greedy => 1,
            GenMode::Beam => self.config.beam_size,
        };
        self.generate_beam_width(y, z, width, max_len)
    }

    /// Beam search by summed log-probability without length normalization.
    /// Width 1 reduces exactly to greedy decoding.
    pub fn generate_beam_width(
        &self,
        y: &[f64],
        z: &[f64],
        width: usize,
        max_len: usize,
    ) -> Result<Vec<usize>> {
        self.check_latents(y, z)?;
        if width == 0 || max_len == 0 {
            return Err(ModelError::BadConfig("beam width and max_len must be positive".into()));
        }
        let variant = self.config.decoder_variant;
        let mut tape = Tape::new(&self.params);
        let yn = tape.constant(y.to_vec());
        let zn = tape.constant(z.to_vec());
        let init = self.init_state_nodes(&mut tape, yn, zn, variant);

        struct Hyp {
            tokens: Vec<usize>,
            score: f64,
            state: (NodeId, NodeId),
        }
        let mut active = vec![Hyp { tokens: Vec::new(), score: 0.0, state: init }];
        let mut done: Vec<(Vec<usize>, f64)> = Vec::new();

        for _ in 0..max_len {
            let mut candidates: Vec<(usize, usize, f64)> = Vec::new();
            let mut next_states = Vec::with_capacity(active.len());
            for (hi, hyp) in active.iter().enumerate() {
                let prev = *hyp.tokens.last().unwrap_or(&BOS);
                let (logits, next, _) =
                    self.decode_step_nodes(&mut tape, prev, yn, zn, hyp.state, variant);
                next_states.push(next);
                let logp = log_softmax_values(tape.value(logits));
                for (tok, lp) in logp.iter().enumerate() {
                    candidates.push((hi, tok, hyp.score + lp));
                }
            }
            candidates.sort_by(|a, b| b.2.total_cmp(&a.2));
            let mut next_active = Vec::with_capacity(width);
            let mut taken = 0usize;
            for &(hi, tok, score) in candidates.iter() {
                if taken >= width {
                    break;
                }
                let mut tokens = active[hi].tokens.clone();
                if tok == EOS {
                    done.push((tokens, score));
                } else {
                    tokens.push(tok);
                    next_active.push(Hyp { tokens, score, state: next_states[hi] });
                }
                taken += 1;
            }
            active = next_active;
            if active.is_empty() || done.len() >= width {
                break;
            }
        }

        if let Some(best) = done
            .iter()
            .max_by(|a, b| a.1.total_cmp(&b.1))
        {
            return Ok(best.0.clone());
        }
        let best = active
            .into_iter()
            .max_by(|a, b| a.score.total_cmp(&b.score))
            .expect("at least one hypothesis survives");
        Ok(best.tokens)
    }

    /// Initialize embedding rows from a "token v1 .. vk" text file. Rows hit
    /// tables whose width matches the file's vector length (the two plain
    /// word tables and the decoder table at embedding_dim, the latent-code
    /// base table at base_dim). Returns the number of (token, table)
    /// assignments applied; absent tokens keep their random initialization.
    pub fn load_pretrained_embeddings(&mut self, path: &std::path::Path) -> Result<usize> {
        let text = std::fs::read_to_string(path)?;
        let mut applied = 0usize;
        for line in text.lines() {
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let token = match parts.next() {
                Some(t) => t,
                None => continue,
            };
            let values: std::result::Result<Vec<f64>, _> =
                parts.map(|v| v.parse::<f64>()).collect();
            let values = values.map_err(|e| {
                ModelError::Checkpoint(format!("bad embedding value for '{token}': {e}"))
            })?;
            let Some(word) = self.vocab.id(token) else { continue };
            let mut tables = vec![self.net.sem_emb, self.net.dec_emb];
            match &self.net.syn_emb {
                net::SynEmbedding::Plain(t) => tables.push(*t),
                net::SynEmbedding::Latent(lc) => tables.push(lc.base),
            }
            for table in tables {
                if self.params.slot_meta(table).cols == values.len() {
                    self.params.row_mut(table, word).copy_from_slice(&values);
                    applied += 1;
                }
            }
        }
        Ok(applied)
    }
}

pub(crate) fn log_softmax_values(logits: &[f64]) -> Vec<f64> {
    let m = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lse = m + logits.iter().map(|v| (v - m).exp()).sum::<f64>().ln();
    logits.iter().map(|v| v - lse).collect()
}
