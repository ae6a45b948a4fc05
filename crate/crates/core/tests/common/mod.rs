//! Fixtures and independent oracles shared by the integration tests.
#![allow(dead_code)]

use lyrik::corpus::{dedup_first_line, normalize, LemmaMap, Stanza};
use lyrik::linalg::Matrix;
use lyrik::synthgen::{generate, PlantKind, PlantedWord, SynthSpec};
use lyrik::trainer::{train, JointEmbeddingModel, SlotCorpus, TrainConfig, TrainReport};
use lyrik::tropes::SimilarityTrajectory;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

pub const SLOTS: usize = 6;
pub const TOKENS_PER_SLOT: usize = 50_000;

fn spec(clusters: usize, planted: Vec<PlantedWord>, seed: u64) -> SynthSpec {
    SynthSpec {
        slots: SLOTS,
        start_year: 1575,
        slot_years: 50,
        tokens_per_slot: TOKENS_PER_SLOT,
        stanza_len: 10,
        clusters,
        cluster_size: 10,
        planted,
        seed,
    }
}

/// 60 words that jump to a different context cluster at slot index `slot`.
/// Planted words occur 80 times per slot; fillers about 36 times.
pub fn shift_spec(slot: usize, seed: u64) -> SynthSpec {
    let planted = (0..60)
        .map(|i| PlantedWord {
            word: format!("shift{i}"),
            kind: PlantKind::AbruptShift { slot },
            before: i,
            after: i + 60,
            per_slot: 80,
        })
        .collect();
    spec(120, planted, seed)
}

/// 60 words drifting linearly from one cluster to another.
pub fn drift_spec(seed: u64) -> SynthSpec {
    let planted = (0..60)
        .map(|i| PlantedWord {
            word: format!("drift{i}"),
            kind: PlantKind::LinearDrift { rate: 0.2 },
            before: i,
            after: i + 60,
            per_slot: 80,
        })
        .collect();
    spec(120, planted, seed)
}

/// Frequent words with contexts spread over several clusters, plus rarer
/// stable words.
pub fn band_spec(seed: u64) -> SynthSpec {
    let mut planted: Vec<PlantedWord> = (0..20)
        .map(|i| PlantedWord {
            word: format!("wide{i}"),
            kind: PlantKind::Wide { spread: 3 },
            before: 0,
            after: 0,
            per_slot: 150,
        })
        .collect();
    planted.extend((0..20).map(|i| PlantedWord {
        word: format!("calm{i}"),
        kind: PlantKind::Stable,
        before: i,
        after: i,
        per_slot: 60,
    }));
    spec(300, planted, seed)
}

pub fn stable_spec(seed: u64) -> SynthSpec {
    let planted = (0..60)
        .map(|i| PlantedWord {
            word: format!("steady{i}"),
            kind: PlantKind::Stable,
            before: i,
            after: i,
            per_slot: 80,
        })
        .collect();
    spec(120, planted, seed)
}

pub fn synth_config(seed: u64) -> TrainConfig {
    TrainConfig {
        dim: 32,
        context_window: 3,
        negatives: 5,
        epochs: 3,
        subsample_threshold: 0.0,
        seed,
        workers: 1,
        ..TrainConfig::default()
    }
}

pub fn prepared(spec: &SynthSpec) -> Vec<Stanza> {
    let stanzas = generate(spec).expect("valid synth spec");
    normalize(dedup_first_line(stanzas), &LemmaMap::new()).stanzas
}

pub fn train_synth(spec: &SynthSpec, config: &TrainConfig) -> (JointEmbeddingModel, TrainReport) {
    let stanzas = prepared(spec);
    let corpus = SlotCorpus::build(&stanzas, spec.slot_table().unwrap(), 5).unwrap();
    train(&corpus, config).unwrap()
}

type Shape = (&'static str, fn(f64) -> f64);

/// Trajectories of four planted shapes over six slots plus Gaussian noise.
/// Candidates are named `high{i}`, `low{i}`, `rising{i}`, `falling{i}`.
pub fn trope_fixture(per_class: usize, sigma: f64, seed: u64) -> Vec<SimilarityTrajectory> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, sigma).unwrap();
    let shapes: [Shape; 4] = [
        ("high", |_| 0.8),
        ("low", |_| 0.1),
        ("rising", |x| 0.2 + 0.5 * x),
        ("falling", |x| 0.7 - 0.5 * x),
    ];
    let mut out = Vec::new();
    for i in 0..per_class {
        for (name, f) in shapes {
            let values: Vec<f64> = (0..6).map(|s| f(s as f64 / 5.0) + noise.sample(&mut rng)).collect();
            out.push(SimilarityTrajectory {
                target: "liebe".into(),
                candidate: format!("{name}{i}"),
                candidate_index: out.len(),
                imputed: vec![false; values.len()],
                values,
            });
        }
    }
    out
}

/// Sample covariance (divisor n - 1) computed directly.
pub fn covariance(x: &Matrix) -> Vec<Vec<f64>> {
    let (n, p) = (x.rows(), x.cols());
    let mean: Vec<f64> = (0..p)
        .map(|j| (0..n).map(|i| x[(i, j)]).sum::<f64>() / n as f64)
        .collect();
    let mut cov = vec![vec![0.0; p]; p];
    for i in 0..n {
        for a in 0..p {
            for b in 0..p {
                cov[a][b] += (x[(i, a)] - mean[a]) * (x[(i, b)] - mean[b]);
            }
        }
    }
    cov.iter_mut().flatten().for_each(|v| *v /= (n - 1) as f64);
    cov
}

/// Number of eigenvalues of symmetric `a` below `lambda`: the count of sign
/// changes in the sequence of leading principal minors of `a - lambda I`,
/// obtained as the signs of the elimination pivots.
pub fn eigenvalues_below(a: &[Vec<f64>], lambda: f64) -> usize {
    let p = a.len();
    let mut m: Vec<Vec<f64>> = a.to_vec();
    for (i, row) in m.iter_mut().enumerate() {
        row[i] -= lambda;
    }
    let mut negative = 0;
    for k in 0..p {
        let mut pivot = m[k][k];
        if pivot == 0.0 {
            pivot = -f64::EPSILON * (1.0 + lambda.abs());
        }
        if pivot < 0.0 {
            negative += 1;
        }
        let (head, tail) = m.split_at_mut(k + 1);
        let pivot_row = &head[k];
        for row in tail {
            let f = row[k] / pivot;
            for (v, p) in row[k + 1..].iter_mut().zip(&pivot_row[k + 1..]) {
                *v -= f * p;
            }
        }
    }
    negative
}

/// All eigenvalues of symmetric `a`, descending, by bisection on the
/// characteristic polynomial's sign structure.
pub fn bisection_eigenvalues(a: &[Vec<f64>]) -> Vec<f64> {
    let p = a.len();
    // Gershgorin bound
    let r = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            row[i].abs()
                + row
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != i)
                    .map(|(_, v)| v.abs())
                    .sum::<f64>()
        })
        .fold(0.0, f64::max)
        + 1.0;
    let mut out: Vec<f64> = (0..p)
        .map(|k| {
            // k-th smallest: smallest x with count(x) > k
            let (mut lo, mut hi) = (-r, r);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if eigenvalues_below(a, mid) > k {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            0.5 * (lo + hi)
        })
        .collect();
    out.reverse();
    out
}
