//! Model hyperparameters and decoder wiring variants.

use super::{ModelError, Result};
use crate::latent_codes::CodeEmbeddingConfig;
use crate::objectives::WplConfig;
use serde::{Deserialize, Serialize};

/// How the two latent variables enter the decoder.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecoderVariant {
    /// Input [embedding; z], output head on [hidden; y]. Zero initial state.
    #[default]
    Standard,
    /// Input embedding only; latents enter through the initial state.
    Init,
    /// Input [embedding; y; z], head on hidden alone. Zero initial state.
    Concat,
    /// Input [embedding; y], head on [hidden; z]. Zero initial state.
    Swap,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelConfig {
    /// Word embedding dimension for all three embedding tables.
    pub embedding_dim: usize,
    /// Semantic (vMF) latent dimension m.
    pub semantic_dim: usize,
    /// Syntactic (Gaussian) latent dimension d. May be 0 as a degenerate
    /// testing configuration; every other dimension must be positive.
    pub syntactic_dim: usize,
    /// biLSTM hidden size per direction in the syntactic encoder.
    pub encoder_hidden: usize,
    /// Decoder LSTM hidden size.
    pub decoder_hidden: usize,
    /// Affine layer count in the posterior heads.
    pub ffn_depth: usize,
    pub decoder_variant: DecoderVariant,
    /// Latent-code bottleneck for the syntactic encoder embeddings; plain
    /// embeddings when absent.
    pub latent_code: Option<CodeEmbeddingConfig>,
    pub wpl: WplConfig,
    pub max_decode_len: usize,
    pub beam_size: usize,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            embedding_dim: 100,
            semantic_dim: 100,
            syntactic_dim: 100,
            encoder_hidden: 100,
            decoder_hidden: 100,
            ffn_depth: 3,
            decoder_variant: DecoderVariant::Standard,
            latent_code: None,
            wpl: WplConfig::default(),
            max_decode_len: 30,
            beam_size: 10,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("embedding_dim", self.embedding_dim),
            ("semantic_dim", self.semantic_dim),
            ("encoder_hidden", self.encoder_hidden),
            ("decoder_hidden", self.decoder_hidden),
            ("ffn_depth", self.ffn_depth),
            ("max_decode_len", self.max_decode_len),
            ("beam_size", self.beam_size),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(ModelError::BadConfig(format!("{name} must be positive")));
            }
        }
        if self.semantic_dim < 2 {
            return Err(ModelError::BadConfig(
                "semantic_dim must be at least 2 for the vMF latent".into(),
            ));
        }
        if let Some(lc) = &self.latent_code {
            lc.validate(self.embedding_dim)
                .map_err(ModelError::BadConfig)?;
        }
        if self.wpl.max_position == 0 {
            return Err(ModelError::BadConfig("wpl.max_position must be positive".into()));
        }
        if self.wpl.head_depth == 0 {
            return Err(ModelError::BadConfig("wpl.head_depth must be positive".into()));
        }
        Ok(())
    }

    /// Decoder LSTM input width under a wiring variant.
    pub(crate) fn decoder_input_dim(&self, variant: DecoderVariant) -> usize {
        let e = self.embedding_dim;
        let m = self.semantic_dim;
        let d = self.syntactic_dim;
        match variant {
            DecoderVariant::Standard => e + d,
            DecoderVariant::Init => e,
            DecoderVariant::Concat => e + m + d,
            DecoderVariant::Swap => e + m,
        }
    }

    /// Softmax head input width under a wiring variant.
    pub(crate) fn head_input_dim(&self, variant: DecoderVariant) -> usize {
        let h = self.decoder_hidden;
        match variant {
            DecoderVariant::Standard => h + self.semantic_dim,
            DecoderVariant::Init => h,
            DecoderVariant::Concat => h,
            DecoderVariant::Swap => h + self.syntactic_dim,
        }
    }

    /// A requested variant is usable on this model iff its wiring dimensions
    /// coincide with the configured one (always true for the configured
    /// variant itself; also true for e.g. concat vs swap when d = 0).
    pub(crate) fn variant_compatible(&self, variant: DecoderVariant) -> bool {
        self.decoder_input_dim(variant) == self.decoder_input_dim(self.decoder_variant)
            && self.head_input_dim(variant) == self.head_input_dim(self.decoder_variant)
            && (variant == DecoderVariant::Init) == (self.decoder_variant == DecoderVariant::Init)
    }
}
