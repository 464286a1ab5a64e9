//! Parameter registry and tape-level building blocks: feedforward stacks,
//! LSTM cells, and the two syntactic embedding backends (plain table or
//! latent-code bottleneck).

use crate::latent_codes::CodeEmbeddingConfig;
use crate::tape::{NodeId, ParamId, ParamSet, Tape};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy)]
enum InitKind {
    /// Uniform in [-0.1, 0.1] (embedding-like tables).
    Embedding,
    /// Xavier-uniform scaled by fan-in + fan-out.
    Xavier,
    Zero,
    /// Zeros with the forget-gate quarter set to 1.
    LstmBias,
}

pub(crate) struct NetBuilder {
    params: ParamSet,
    inits: Vec<InitKind>,
}

impl NetBuilder {
    fn new() -> Self {
        NetBuilder { params: ParamSet::new(), inits: Vec::new() }
    }

    fn add(&mut self, name: &str, rows: usize, cols: usize, kind: InitKind) -> ParamId {
        let id = self.params.add_slot(name, rows, cols);
        self.inits.push(kind);
        id
    }

    fn finish(mut self, rng: &mut ChaCha8Rng) -> ParamSet {
        for (i, kind) in self.inits.iter().enumerate() {
            let meta = self.params.slots()[i].clone();
            let slot = self.params.slot_mut(crate::tape::ParamId(i));
            match kind {
                InitKind::Embedding => {
                    for v in slot.iter_mut() {
                        *v = rng.random_range(-0.1..0.1);
                    }
                }
                InitKind::Xavier => {
                    let bound = (6.0 / (meta.rows + meta.cols) as f64).sqrt();
                    for v in slot.iter_mut() {
                        *v = rng.random_range(-bound..bound);
                    }
                }
                InitKind::Zero => {
                    for v in slot.iter_mut() {
                        *v = 0.0;
                    }
                }
                InitKind::LstmBias => {
                    let quarter = meta.rows / 4;
                    for (j, v) in slot.iter_mut().enumerate() {
                        *v = if j >= quarter && j < 2 * quarter { 1.0 } else { 0.0 };
                    }
                }
            }
        }
        self.params
    }
}

/// A stack of affine layers with tanh between them (linear final layer).
#[derive(Debug, Clone)]
pub(crate) struct Ffn {
    layers: Vec<(ParamId, ParamId)>,
}

impl Ffn {
    fn build(b: &mut NetBuilder, name: &str, dims: &[usize]) -> Self {
        let mut layers = Vec::new();
        for i in 0..dims.len() - 1 {
            let w = b.add(&format!("{name}.w{i}"), dims[i + 1], dims[i], InitKind::Xavier);
            let bias = b.add(&format!("{name}.b{i}"), dims[i + 1], 1, InitKind::Zero);
            layers.push((w, bias));
        }
        Ffn { layers }
    }

    pub(crate) fn apply(&self, t: &mut Tape, mut x: NodeId) -> NodeId {
        for (i, (w, bias)) in self.layers.iter().enumerate() {
            x = t.linear(*w, Some(*bias), x);
            if i + 1 < self.layers.len() {
                x = t.tanh(x);
            }
        }
        x
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Lstm {
    wx: ParamId,
    wh: ParamId,
    b: ParamId,
    pub hidden: usize,
}

impl Lstm {
    fn build(b: &mut NetBuilder, name: &str, input: usize, hidden: usize) -> Self {
        let wx = b.add(&format!("{name}.wx"), 4 * hidden, input, InitKind::Xavier);
        let wh = b.add(&format!("{name}.wh"), 4 * hidden, hidden, InitKind::Xavier);
        let bias = b.add(&format!("{name}.b"), 4 * hidden, 1, InitKind::LstmBias);
        Lstm { wx, wh, b: bias, hidden }
    }

    pub(crate) fn zero_state(&self, t: &mut Tape) -> (NodeId, NodeId) {
        let h = t.constant(vec![0.0; self.hidden]);
        let c = t.constant(vec![0.0; self.hidden]);
        (h, c)
    }

    /// Gate order in the stacked preactivation: input, forget, cell, output.
    pub(crate) fn step(
        &self,
        t: &mut Tape,
        x: NodeId,
        state: (NodeId, NodeId),
    ) -> (NodeId, NodeId) {
        let (h, c) = state;
        let zx = t.linear(self.wx, Some(self.b), x);
        let zh = t.linear(self.wh, None, h);
        let z = t.add(zx, zh);
        let hdim = self.hidden;
        let i_pre = t.slice(z, 0, hdim);
        let f_pre = t.slice(z, hdim, hdim);
        let g_pre = t.slice(z, 2 * hdim, hdim);
        let o_pre = t.slice(z, 3 * hdim, hdim);
        let i = t.sigmoid(i_pre);
        let f = t.sigmoid(f_pre);
        let g = t.tanh(g_pre);
        let o = t.sigmoid(o_pre);
        let fc = t.mul(f, c);
        let ig = t.mul(i, g);
        let c2 = t.add(fc, ig);
        let tc = t.tanh(c2);
        let h2 = t.mul(o, tc);
        (h2, c2)
    }
}

/// Latent-code embedding: per word, `num_codes` softmax distributions over
/// cluster vectors, marginalized and concatenated.
#[derive(Debug, Clone)]
pub(crate) struct LatentCodeNet {
    pub base: ParamId,
    code_ffns: Vec<Ffn>,
    clusters: Vec<ParamId>,
}

impl LatentCodeNet {
    fn build(b: &mut NetBuilder, cfg: &CodeEmbeddingConfig, vocab: usize, emb_dim: usize) -> Self {
        let base = b.add("lc.base", vocab, cfg.base_dim, InitKind::Embedding);
        let per_code = emb_dim / cfg.num_codes;
        let mut code_ffns = Vec::new();
        let mut clusters = Vec::new();
        for c in 0..cfg.num_codes {
            code_ffns.push(Ffn::build(
                b,
                &format!("lc.code{c}"),
                &[cfg.base_dim, cfg.base_dim, cfg.classes_per_code],
            ));
            clusters.push(b.add(
                &format!("lc.clusters{c}"),
                per_code,
                cfg.classes_per_code,
                InitKind::Embedding,
            ));
        }
        LatentCodeNet { base, code_ffns, clusters }
    }

    /// Softmax distribution nodes, one per code.
    pub(crate) fn distribution_nodes(&self, t: &mut Tape, word: usize) -> Vec<NodeId> {
        let base = t.row(self.base, word);
        self.code_ffns
            .iter()
            .map(|ffn| {
                let logits = ffn.apply(t, base);
                t.softmax(logits)
            })
            .collect()
    }

    /// Marginalized embedding: concat over codes of clusters_c @ p_c.
    pub(crate) fn embed_node(&self, t: &mut Tape, word: usize) -> NodeId {
        let probs = self.distribution_nodes(t, word);
        let parts: Vec<NodeId> = probs
            .iter()
            .zip(self.clusters.iter())
            .map(|(p, cl)| t.linear(*cl, None, *p))
            .collect();
        t.concat(&parts)
    }
}

#[derive(Debug, Clone)]
pub(crate) enum SynEmbedding {
    Plain(ParamId),
    Latent(LatentCodeNet),
}

/// All parameter ids of the model, in canonical registration order.
#[derive(Debug, Clone)]
pub(crate) struct Net {
    pub sem_emb: ParamId,
    pub sem_head: Ffn,
    pub syn_emb: SynEmbedding,
    pub syn_fwd: Lstm,
    pub syn_bwd: Lstm,
    pub syn_head: Ffn,
    pub dec_emb: ParamId,
    pub dec_lstm: Lstm,
    pub dec_head_w: ParamId,
    pub dec_head_b: ParamId,
    pub dec_init: Option<(ParamId, ParamId)>,
    pub wpl_head: Option<Ffn>,
}

impl Net {
    /// Register every slot and initialize values. The registration order is
    /// the checkpoint layout and must stay stable.
    pub(crate) fn build(
        cfg: &super::ModelConfig,
        vocab_size: usize,
        rng: &mut ChaCha8Rng,
    ) -> (Net, ParamSet) {
        use super::DecoderVariant;
        let mut b = NetBuilder::new();
        let e = cfg.embedding_dim;
        let m = cfg.semantic_dim;
        let d = cfg.syntactic_dim;

        let sem_emb = b.add("sem_emb", vocab_size, e, InitKind::Embedding);
        let head_dims = |input: usize, out: usize, depth: usize| -> Vec<usize> {
            let mut dims = vec![input; depth];
            dims.push(out);
            dims
        };
        let sem_head = Ffn::build(&mut b, "sem_head", &head_dims(e, m + 1, cfg.ffn_depth));

        let syn_emb = match &cfg.latent_code {
            None => SynEmbedding::Plain(b.add("syn_emb", vocab_size, e, InitKind::Embedding)),
            Some(lc) => SynEmbedding::Latent(LatentCodeNet::build(&mut b, lc, vocab_size, e)),
        };
        let syn_fwd = Lstm::build(&mut b, "syn_fwd", e, cfg.encoder_hidden);
        let syn_bwd = Lstm::build(&mut b, "syn_bwd", e, cfg.encoder_hidden);
        let syn_head = Ffn::build(
            &mut b,
            "syn_head",
            &head_dims(2 * cfg.encoder_hidden, 2 * d, cfg.ffn_depth),
        );

        let dec_emb = b.add("dec_emb", vocab_size, e, InitKind::Embedding);
        let dec_lstm = Lstm::build(
            &mut b,
            "dec_lstm",
            cfg.decoder_input_dim(cfg.decoder_variant),
            cfg.decoder_hidden,
        );
        let dec_head_w = b.add(
            "dec_head.w",
            vocab_size,
            cfg.head_input_dim(cfg.decoder_variant),
            InitKind::Xavier,
        );
        let dec_head_b = b.add("dec_head.b", vocab_size, 1, InitKind::Zero);
        let dec_init = if cfg.decoder_variant == DecoderVariant::Init {
            let w = b.add("dec_init.w", 2 * cfg.decoder_hidden, m + d, InitKind::Xavier);
            let bias = b.add("dec_init.b", 2 * cfg.decoder_hidden, 1, InitKind::Zero);
            Some((w, bias))
        } else {
            None
        };

        let wpl_head = cfg.wpl.placement.head_input_dim(e, cfg.decoder_hidden, d).map(|input| {
            Ffn::build(
                &mut b,
                "wpl_head",
                &head_dims(input, cfg.wpl.max_position, cfg.wpl.head_depth),
            )
        });

        let net = Net {
            sem_emb,
            sem_head,
            syn_emb,
            syn_fwd,
            syn_bwd,
            syn_head,
            dec_emb,
            dec_lstm,
            dec_head_w,
            dec_head_b,
            dec_init,
            wpl_head,
        };
        (net, b.finish(rng))
    }

    pub(crate) fn syn_embed_node(&self, t: &mut Tape, word: usize) -> NodeId {
        match &self.syn_emb {
            SynEmbedding::Plain(table) => t.row(*table, word),
            SynEmbedding::Latent(lc) => lc.embed_node(t, word),
        }
    }

    pub(crate) fn latent_code_net(&self) -> Option<&LatentCodeNet> {
        match &self.syn_emb {
            SynEmbedding::Plain(_) => None,
            SynEmbedding::Latent(lc) => Some(lc),
        }
    }
}
