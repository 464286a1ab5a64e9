//! Versioned checkpoint files: configuration, vocabulary, and all parameters
//! in the canonical slot layout. Loading validates the layout against the
//! configuration before accepting values.

use super::{net, Model, ModelConfig, ModelError, Result, Vocabulary};
use crate::tape::SlotMeta;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::path::Path;

pub const FORMAT_TAG: &str = "paravae-checkpoint-v1";

#[derive(Serialize, Deserialize)]
struct CheckpointFile {
    format: String,
    config: ModelConfig,
    vocab: Vec<String>,
    slots: Vec<SlotMeta>,
    data: Vec<f64>,
}

impl Model {
    pub fn save_checkpoint(&self, path: &Path) -> Result<()> {
        let file = CheckpointFile {
            format: FORMAT_TAG.to_string(),
            config: self.config.clone(),
            vocab: self.vocab.all_tokens().to_vec(),
            slots: self.params.slots().to_vec(),
            data: self.params.data().to_vec(),
        };
        let text = serde_json::to_string(&file)?;
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn load_checkpoint(path: &Path) -> Result<Model> {
        let text = std::fs::read_to_string(path)?;
        let file: CheckpointFile = serde_json::from_str(&text)?;
        if file.format != FORMAT_TAG {
            return Err(ModelError::Checkpoint(format!(
                "unknown checkpoint format '{}', expected '{FORMAT_TAG}'",
                file.format
            )));
        }
        file.config.validate()?;
        let vocab = Vocabulary::from_full_list(file.vocab)?;
        // Rebuild the canonical layout for this config and demand an exact
        // match before accepting parameter values.
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (net, mut params) = net::Net::build(&file.config, vocab.size(), &mut rng);
        if params.slots().len() != file.slots.len() {
            return Err(ModelError::Checkpoint(format!(
                "slot count mismatch: config implies {}, file has {}",
                params.slots().len(),
                file.slots.len()
            )));
        }
        for (expected, got) in params.slots().iter().zip(file.slots.iter()) {
            if expected.name != got.name
                || expected.rows != got.rows
                || expected.cols != got.cols
                || expected.offset != got.offset
            {
                return Err(ModelError::Checkpoint(format!(
                    "slot '{}' has shape {}x{} at offset {}, expected '{}' {}x{} at {}",
                    got.name,
                    got.rows,
                    got.cols,
                    got.offset,
                    expected.name,
                    expected.rows,
                    expected.cols,
                    expected.offset
                )));
            }
        }
        if params.len() != file.data.len() {
            return Err(ModelError::Checkpoint(format!(
                "parameter count mismatch: config implies {}, file has {}",
                params.len(),
                file.data.len()
            )));
        }
        params.data_mut().copy_from_slice(&file.data);
        Ok(Model { config: file.config, vocab, params, net })
    }
}
