use std::sync::atomic::{AtomicU32, AtomicU64, Ordering::Relaxed};

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::objective::pair_term;
use super::{EmbeddingMatrix, JointEmbeddingModel, TrainConfig};
use crate::corpus::{assign, build_vocab, SlotAssignment, Stanza, TimeSlotTable, Vocabulary};
use crate::error::{Error, Result};

/// Encoded documents per slot, ready for training.
#[derive(Debug, Clone)]
pub struct SlotCorpus {
    pub vocab: Vocabulary,
    pub slots: TimeSlotTable,
    /// `[slot][document]` token indices; out-of-vocabulary tokens removed.
    pub docs: Vec<Vec<Vec<u32>>>,
}

impl SlotCorpus {
    pub fn from_stanzas(
        stanzas: &[Stanza],
        assignment: &SlotAssignment,
        vocab: Vocabulary,
        slots: TimeSlotTable,
    ) -> Result<Self> {
        if assignment.per_slot.len() != slots.len() {
            return Err(Error::DimensionMismatch(
                "assignment and slot table differ in slot count".into(),
            ));
        }
        let docs = assignment
            .per_slot
            .iter()
            .map(|ids| {
                ids.iter()
                    .map(|&i| vocab.encode(&stanzas[i].tokens))
                    .filter(|d| !d.is_empty())
                    .collect()
            })
            .collect();
        Ok(SlotCorpus { vocab, slots, docs })
    }

    /// Assigns normalized stanzas to `slots`, builds the vocabulary and encodes documents.
    pub fn build(stanzas: &[Stanza], slots: TimeSlotTable, min_count: u64) -> Result<Self> {
        let assignment = assign(stanzas, &slots);
        let vocab = build_vocab(stanzas, &assignment, min_count)?;
        Self::from_stanzas(stanzas, &assignment, vocab, slots)
    }

    pub fn total_tokens(&self) -> u64 {
        self.docs.iter().flatten().map(|d| d.len() as u64).sum()
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainReport {
    /// Mean loss per positive pair, one entry per epoch.
    pub epoch_losses: Vec<f64>,
    pub positive_pairs: u64,
    pub empty_slots: Vec<usize>,
}

/// Matrix storage shared by workers. Relaxed atomics make unsynchronized
/// (lossy) concurrent updates well-defined; single-worker runs see plain
/// sequential semantics.
struct SharedMatrix {
    dim: usize,
    cells: Vec<AtomicU32>,
}

impl SharedMatrix {
    fn from(m: &EmbeddingMatrix) -> Self {
        SharedMatrix {
            dim: m.dim(),
            cells: m.as_slice().iter().map(|v| AtomicU32::new(v.to_bits())).collect(),
        }
    }

    #[inline]
    fn get(&self, row: usize, j: usize) -> f32 {
        f32::from_bits(self.cells[row * self.dim + j].load(Relaxed))
    }

    #[inline]
    fn add(&self, row: usize, j: usize, delta: f64) {
        let cell = &self.cells[row * self.dim + j];
        let v = f32::from_bits(cell.load(Relaxed)) as f64 + delta;
        cell.store((v as f32).to_bits(), Relaxed);
    }

    fn into_matrix(self) -> EmbeddingMatrix {
        let rows = self.cells.len() / self.dim;
        let data = self.cells.into_iter().map(|c| f32::from_bits(c.into_inner())).collect();
        EmbeddingMatrix::from_vec(rows, self.dim, data).expect("shape preserved")
    }

    fn is_finite(&self) -> bool {
        self.cells.iter().all(|c| f32::from_bits(c.load(Relaxed)).is_finite())
    }
}

struct SharedParams {
    main: SharedMatrix,
    deltas: Vec<SharedMatrix>,
    context: SharedMatrix,
}

impl SharedParams {
    fn is_finite(&self) -> bool {
        self.main.is_finite() && self.context.is_finite() && self.deltas.iter().all(SharedMatrix::is_finite)
    }
}

struct Schedule<'a> {
    corpus: &'a SlotCorpus,
    config: &'a TrainConfig,
    negatives: WeightedIndex<f64>,
    keep_prob: Vec<f64>,
    progress: AtomicU64,
    total: u64,
}

impl Schedule<'_> {
    fn learning_rate(&self) -> f64 {
        let done = (self.progress.load(Relaxed) as f64 / self.total as f64).min(1.0);
        self.config.initial_lr - (self.config.initial_lr - self.config.final_lr) * done
    }
}

struct Scratch {
    u: Vec<f64>,
    grad_u: Vec<f64>,
    kept: Vec<u32>,
}

/// One SGD step on the pair `(word, context)` in `slot` plus `negatives`.
/// Returns the pair's loss before the step.
fn step(
    params: &SharedParams,
    word: usize,
    slot: usize,
    context: usize,
    negatives: &[usize],
    lr: f64,
    scratch: &mut Scratch,
) -> f64 {
    let d = params.main.dim;
    let delta = &params.deltas[slot];
    for j in 0..d {
        scratch.u[j] = params.main.get(word, j) as f64 + delta.get(word, j) as f64;
        scratch.grad_u[j] = 0.0;
    }
    let mut loss = 0.0;
    let terms = std::iter::once((context, true)).chain(negatives.iter().map(|&n| (n, false)));
    for (c, positive) in terms {
        let score: f64 = (0..d).map(|j| scratch.u[j] * params.context.get(c, j) as f64).sum();
        let (l, coeff) = pair_term(score, positive);
        loss += l;
        for j in 0..d {
            scratch.grad_u[j] += coeff * params.context.get(c, j) as f64;
            params.context.add(c, j, lr * coeff * scratch.u[j]);
        }
    }
    for j in 0..d {
        let g = lr * scratch.grad_u[j];
        params.main.add(word, j, g);
        delta.add(word, j, g);
    }
    loss
}

fn run_worker(params: &SharedParams, schedule: &Schedule, work: &[(usize, usize)], rng: &mut ChaCha8Rng) -> (f64, u64) {
    let cfg = schedule.config;
    let d = params.main.dim;
    let mut scratch = Scratch {
        u: vec![0.0; d],
        grad_u: vec![0.0; d],
        kept: Vec::new(),
    };
    let mut negs = Vec::with_capacity(cfg.negatives);
    let (mut loss, mut pairs) = (0.0, 0u64);

    for &(slot, doc_idx) in work {
        let doc = &schedule.corpus.docs[slot][doc_idx];
        let lr = schedule.learning_rate();
        scratch.kept.clear();
        for &t in doc {
            let p = schedule.keep_prob[t as usize];
            if p >= 1.0 || rng.gen::<f64>() < p {
                scratch.kept.push(t);
            }
        }
        let kept = std::mem::take(&mut scratch.kept);
        for (pos, &w) in kept.iter().enumerate() {
            let lo = pos.saturating_sub(cfg.context_window);
            let hi = (pos + cfg.context_window + 1).min(kept.len());
            for (cpos, &c) in kept.iter().enumerate().take(hi).skip(lo) {
                if cpos == pos {
                    continue;
                }
                negs.clear();
                for _ in 0..cfg.negatives {
                    let n = schedule.negatives.sample(rng);
                    if n != c as usize {
                        negs.push(n);
                    }
                }
                loss += step(params, w as usize, slot, c as usize, &negs, lr, &mut scratch);
                pairs += 1;
            }
        }
        scratch.kept = kept;
        schedule.progress.fetch_add(doc.len() as u64, Relaxed);
    }
    (loss, pairs)
}

/// Trains the joint model. With `workers == 1` the result is a pure function
/// of the corpus and the configuration (including the seed).
pub fn train(corpus: &SlotCorpus, config: &TrainConfig) -> Result<(JointEmbeddingModel, TrainReport)> {
    config.validate()?;
    let num_slots = corpus.slots.len();
    if num_slots < 2 || corpus.docs.len() != num_slots {
        return Err(Error::InvalidConfig(format!(
            "training needs >= 2 slots with documents per slot, got {num_slots}"
        )));
    }
    let vocab = &corpus.vocab;
    let (v, d) = (vocab.len(), config.dim);
    let mut report = TrainReport {
        empty_slots: (0..num_slots).filter(|&s| corpus.docs[s].is_empty()).collect(),
        ..Default::default()
    };
    for &s in &report.empty_slots {
        log::warn!(
            "slot {} has no documents; its delta matrix stays zero",
            corpus.slots.slots[s].label
        );
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let bound = 0.5 / d as f32;
    let mut main = EmbeddingMatrix::zeros(v, d);
    for x in main.data.iter_mut() {
        *x = rng.gen_range(-bound..=bound);
    }
    let params = SharedParams {
        main: SharedMatrix::from(&main),
        deltas: (0..num_slots)
            .map(|_| SharedMatrix::from(&EmbeddingMatrix::zeros(v, d)))
            .collect(),
        context: SharedMatrix::from(&EmbeddingMatrix::zeros(v, d)),
    };

    let weights: Vec<f64> = vocab.global_counts().iter().map(|&c| (c as f64).powf(0.75)).collect();
    let negatives =
        WeightedIndex::new(&weights).map_err(|e| Error::InvalidConfig(format!("negative-sampling table: {e}")))?;
    let total_count: u64 = vocab.global_counts().iter().sum();
    let keep_prob = vocab
        .global_counts()
        .iter()
        .map(|&c| {
            if config.subsample_threshold <= 0.0 {
                return 1.0;
            }
            let f = c as f64 / total_count as f64;
            let s = config.subsample_threshold;
            ((f / s).sqrt() + 1.0) * s / f
        })
        .collect();
    let total = (corpus.total_tokens() * config.epochs as u64).max(1);
    let schedule = Schedule {
        corpus,
        config,
        negatives,
        keep_prob,
        progress: AtomicU64::new(0),
        total,
    };

    for epoch in 0..config.epochs {
        let mut orders: Vec<Vec<usize>> = corpus.docs.iter().map(|docs| (0..docs.len()).collect()).collect();
        for order in &mut orders {
            order.shuffle(&mut rng);
        }
        let longest = orders.iter().map(Vec::len).max().unwrap_or(0);
        let work: Vec<(usize, usize)> = (0..longest)
            .flat_map(|i| {
                orders
                    .iter()
                    .enumerate()
                    .filter_map(move |(s, o)| o.get(i).map(|&doc| (s, doc)))
            })
            .collect();

        let workers = config.workers.min(work.len().max(1));
        let seeds: Vec<u64> = (0..workers).map(|_| rng.gen()).collect();
        let (loss, pairs) = if workers == 1 {
            let mut wrng = ChaCha8Rng::seed_from_u64(seeds[0]);
            run_worker(&params, &schedule, &work, &mut wrng)
        } else {
            let chunk = work.len().div_ceil(workers);
            std::thread::scope(|scope| {
                let handles: Vec<_> = work
                    .chunks(chunk)
                    .zip(&seeds)
                    .map(|(part, &seed)| {
                        let (params, schedule) = (&params, &schedule);
                        scope.spawn(move || {
                            let mut wrng = ChaCha8Rng::seed_from_u64(seed);
                            run_worker(params, schedule, part, &mut wrng)
                        })
                    })
                    .collect();
                handles
                    .into_iter()
                    .map(|h| h.join().expect("training worker panicked"))
                    .fold((0.0, 0), |acc, x| (acc.0 + x.0, acc.1 + x.1))
            })
        };

        if !params.is_finite() {
            return Err(Error::NonFinite(format!("parameters after epoch {}", epoch + 1)));
        }
        let mean = if pairs > 0 { loss / pairs as f64 } else { 0.0 };
        log::info!("epoch {}: mean pair loss {mean:.6} over {pairs} pairs", epoch + 1);
        report.epoch_losses.push(mean);
        report.positive_pairs += pairs;
    }

    let SharedParams { main, deltas, context } = params;
    let model = JointEmbeddingModel::new(
        vocab.clone(),
        corpus.slots.clone(),
        main.into_matrix(),
        deltas.into_iter().map(SharedMatrix::into_matrix).collect(),
        context.into_matrix(),
    )?;
    Ok((model, report))
}
