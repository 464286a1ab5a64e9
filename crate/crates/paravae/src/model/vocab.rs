//! Token vocabulary with fixed reserved ids, and bounded token sequences.

use super::{ModelError, Result};
use std::collections::HashMap;

pub const PAD: usize = 0;
pub const BOS: usize = 1;
pub const EOS: usize = 2;
pub const UNK: usize = 3;
pub const RESERVED: [&str; 4] = ["<pad>", "<bos>", "<eos>", "<unk>"];

/// Bidirectional token <-> id map. Ids 0..=3 are reserved and fixed at
/// construction; the rest is a bijection over the supplied token list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: HashMap<String, usize>,
}

impl Vocabulary {
    /// Build from non-reserved tokens in their final id order.
    pub fn from_tokens<I: IntoIterator<Item = String>>(tokens: I) -> Result<Self> {
        let mut all: Vec<String> = RESERVED.iter().map(|s| s.to_string()).collect();
        for t in tokens {
            all.push(t);
        }
        let mut index = HashMap::with_capacity(all.len());
        for (i, t) in all.iter().enumerate() {
            if index.insert(t.clone(), i).is_some() {
                return Err(ModelError::DuplicateToken { token: t.clone() });
            }
        }
        Ok(Vocabulary { tokens: all, index })
    }

    pub fn size(&self) -> usize {
        self.tokens.len()
    }

    pub fn id(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn id_or_unk(&self, token: &str) -> usize {
        self.index.get(token).copied().unwrap_or(UNK)
    }

    pub fn token(&self, id: usize) -> &str {
        &self.tokens[id]
    }

    pub fn is_reserved(&self, id: usize) -> bool {
        id < RESERVED.len()
    }

    /// Ids of the non-reserved word types.
    pub fn word_ids(&self) -> impl Iterator<Item = usize> {
        RESERVED.len()..self.size()
    }

    pub fn encode_words(&self, words: &[String]) -> Vec<usize> {
        words.iter().map(|w| self.id_or_unk(w)).collect()
    }

    pub fn decode_ids(&self, ids: &[usize]) -> Vec<String> {
        ids.iter().map(|&i| self.tokens[i].clone()).collect()
    }

    pub fn all_tokens(&self) -> &[String] {
        &self.tokens
    }

    /// Rebuild from a checkpointed full token list (reserved entries first).
    pub fn from_full_list(tokens: Vec<String>) -> Result<Self> {
        if tokens.len() < RESERVED.len()
            || tokens[..RESERVED.len()] != RESERVED.map(String::from)
        {
            return Err(ModelError::Checkpoint(
                "vocabulary must start with the reserved tokens".into(),
            ));
        }
        Self::from_tokens(tokens.into_iter().skip(RESERVED.len()))
    }
}

/// Token ids of one sentence, without BOS/EOS framing. Nonempty, bounded, and
/// all ids in range.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenSequence {
    ids: Vec<usize>,
}

impl TokenSequence {
    pub fn new(ids: Vec<usize>, vocab_size: usize, max_len: usize) -> Result<Self> {
        if ids.is_empty() {
            return Err(ModelError::EmptySequence);
        }
        if ids.len() > max_len {
            return Err(ModelError::SequenceTooLong { len: ids.len(), max: max_len });
        }
        for &id in &ids {
            if id >= vocab_size {
                return Err(ModelError::TokenOutOfRange { id, vocab: vocab_size });
            }
        }
        Ok(TokenSequence { ids })
    }

    pub fn ids(&self) -> &[usize] {
        &self.ids
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}
