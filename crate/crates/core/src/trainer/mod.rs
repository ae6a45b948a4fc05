//! Joint time-conditioned skip-gram with negative sampling.
//!
//! A word's vector in slot `t` is `main[w] + delta_t[w]`. Every slot-specific
//! matrix starts at zero, so a word never seen in a slot keeps exactly its
//! main vector there. The context matrix is shared by all slots.

mod io;
pub mod objective;
mod sgd;

use serde::{Deserialize, Serialize};

pub use io::{load_model, read_model, save_model, write_model, MODEL_MAGIC, MODEL_VERSION};
pub use sgd::{train, SlotCorpus, TrainReport};

use crate::corpus::{TimeSlotTable, Vocabulary};
use crate::error::{Error, Result};
use crate::linalg::{cossim, dot, norm};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub dim: usize,
    pub context_window: usize,
    pub negatives: usize,
    pub epochs: usize,
    pub initial_lr: f64,
    pub final_lr: f64,
    /// Frequent-word subsampling threshold; `0` disables subsampling.
    pub subsample_threshold: f64,
    pub seed: u64,
    pub workers: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            dim: 100,
            context_window: 5,
            negatives: 5,
            epochs: 5,
            initial_lr: 0.025,
            final_lr: 1e-4,
            subsample_threshold: 1e-4,
            seed: 1,
            workers: 1,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if self.dim < 2 {
            return bad("dim must be >= 2");
        }
        if self.context_window < 1 {
            return bad("context_window must be >= 1");
        }
        if self.negatives < 1 {
            return bad("negatives must be >= 1");
        }
        if self.epochs < 1 {
            return bad("epochs must be >= 1");
        }
        if !(self.initial_lr > self.final_lr && self.final_lr > 0.0) {
            return bad("need initial_lr > final_lr > 0");
        }
        if self.subsample_threshold.is_nan() || self.subsample_threshold < 0.0 {
            return bad("subsample_threshold must be >= 0");
        }
        if self.workers < 1 {
            return bad("workers must be >= 1");
        }
        Ok(())
    }
}

/// Row-major `f32` matrix of embedding rows.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    rows: usize,
    dim: usize,
    data: Vec<f32>,
}

impl EmbeddingMatrix {
    pub fn zeros(rows: usize, dim: usize) -> Self {
        EmbeddingMatrix {
            rows,
            dim,
            data: vec![0.0; rows * dim],
        }
    }

    pub fn from_vec(rows: usize, dim: usize, data: Vec<f32>) -> Result<Self> {
        if data.len() != rows * dim {
            return Err(Error::DimensionMismatch(format!(
                "{} values for a {rows}x{dim} matrix",
                data.len()
            )));
        }
        Ok(EmbeddingMatrix { rows, dim, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f32] {
        &mut self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn as_slice(&self) -> &[f32] {
        &self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JointEmbeddingModel {
    pub vocab: Vocabulary,
    pub slots: TimeSlotTable,
    pub main: EmbeddingMatrix,
    pub deltas: Vec<EmbeddingMatrix>,
    pub context: EmbeddingMatrix,
}

impl JointEmbeddingModel {
    pub fn new(
        vocab: Vocabulary,
        slots: TimeSlotTable,
        main: EmbeddingMatrix,
        deltas: Vec<EmbeddingMatrix>,
        context: EmbeddingMatrix,
    ) -> Result<Self> {
        let (v, d) = (vocab.len(), main.dim());
        let shapes_ok = main.rows() == v
            && context.rows() == v
            && context.dim() == d
            && deltas.iter().all(|m| m.rows() == v && m.dim() == d);
        if !shapes_ok {
            return Err(Error::DimensionMismatch(
                "model matrices disagree with vocabulary".into(),
            ));
        }
        if deltas.len() != slots.len() || vocab.num_slots() != slots.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} delta matrices / {} count rows for {} slots",
                deltas.len(),
                vocab.num_slots(),
                slots.len()
            )));
        }
        Ok(JointEmbeddingModel {
            vocab,
            slots,
            main,
            deltas,
            context,
        })
    }

    pub fn dim(&self) -> usize {
        self.main.dim()
    }

    pub fn num_slots(&self) -> usize {
        self.slots.len()
    }

    pub fn is_finite(&self) -> bool {
        self.main.is_finite() && self.context.is_finite() && self.deltas.iter().all(EmbeddingMatrix::is_finite)
    }

    fn check_slot(&self, slot: usize) -> Result<()> {
        if slot >= self.num_slots() {
            return Err(Error::UnknownSlot {
                slot,
                slots: self.num_slots(),
            });
        }
        Ok(())
    }

    /// `main[w] + delta_slot[w]` for a vocabulary index.
    pub fn vector(&self, index: usize, slot: usize) -> Vec<f64> {
        self.main
            .row(index)
            .iter()
            .zip(self.deltas[slot].row(index))
            .map(|(&m, &t)| m as f64 + t as f64)
            .collect()
    }

    pub fn embedding_of(&self, word: &str, slot: usize) -> Result<Vec<f64>> {
        let index = self
            .vocab
            .index_of(word)
            .ok_or_else(|| Error::UnknownWord(word.to_string()))?;
        self.check_slot(slot)?;
        Ok(self.vector(index, slot))
    }

    /// Cosine of a word's vectors in two slots.
    pub fn self_similarity(&self, index: usize, a: usize, b: usize) -> Result<f64> {
        cossim(&self.vector(index, a), &self.vector(index, b))
    }

    /// Cosine of two words within one slot.
    pub fn pair_similarity(&self, x: usize, y: usize, slot: usize) -> Result<f64> {
        cossim(&self.vector(x, slot), &self.vector(y, slot))
    }

    /// Top-`k` words by cosine to `word` in `slot`, excluding the word itself.
    /// Ties resolve to the lower vocabulary index; zero vectors are skipped.
    pub fn nearest_neighbors(&self, word: &str, slot: usize, k: usize) -> Result<Vec<(String, f64)>> {
        let query = self.embedding_of(word, slot)?;
        let q = self.vocab.index_of(word).unwrap();
        if k == 0 {
            return Ok(Vec::new());
        }
        let qn = norm(&query);
        if qn == 0.0 {
            return Err(Error::ZeroNorm);
        }
        let mut scored: Vec<(usize, f64)> = (0..self.vocab.len())
            .filter(|&i| i != q)
            .filter_map(|i| {
                let v = self.vector(i, slot);
                let n = norm(&v);
                (n > 0.0).then(|| (i, (dot(&query, &v) / (qn * n)).clamp(-1.0, 1.0)))
            })
            .collect();
        scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        scored.truncate(k);
        Ok(scored
            .into_iter()
            .map(|(i, c)| (self.vocab.word(i).to_string(), c))
            .collect())
    }
}

#[cfg(test)]
pub(crate) mod test_support {
    use super::*;
    use crate::corpus::build_slots;

    /// Two-slot model over the given words with explicit main and delta rows.
    pub fn tiny_model(words: &[&str], main: &[&[f32]], deltas: [&[&[f32]]; 2]) -> JointEmbeddingModel {
        let d = main[0].len();
        let n = words.len();
        let vocab = Vocabulary::from_parts(
            words.iter().map(|w| w.to_string()).collect(),
            vec![10; n],
            vec![vec![5; n]; 2],
        )
        .unwrap();
        let rows = |r: &[&[f32]]| EmbeddingMatrix::from_vec(n, d, r.concat()).unwrap();
        JointEmbeddingModel::new(
            vocab,
            build_slots(1600, 1700, 50, 50, false).unwrap(),
            rows(main),
            vec![rows(deltas[0]), rows(deltas[1])],
            EmbeddingMatrix::zeros(n, d),
        )
        .unwrap()
    }
}
