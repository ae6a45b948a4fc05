//! Self-similarity studies over a trained joint model.
//!
//! Pairwise self-similarity compares each frequent word with itself in
//! adjacent slots; total self-similarity compares every unordered slot pair
//! and buckets by the distance in years between slot starts.

use rayon::prelude::*;
use serde::Serialize;

use crate::corpus::Stopwords;
use crate::error::{Error, Result};
use crate::trainer::JointEmbeddingModel;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DistributionSummary {
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    /// 5th percentile.
    pub whisker_lo: f64,
    /// 95th percentile.
    pub whisker_hi: f64,
    pub mean: f64,
    pub n: usize,
}

/// Linear-interpolation percentile of sorted data, `p` in `[0, 100]`.
fn percentile(sorted: &[f64], p: f64) -> f64 {
    let rank = p / 100.0 * (sorted.len() - 1) as f64;
    let (lo, hi) = (rank.floor() as usize, rank.ceil() as usize);
    sorted[lo] + (sorted[hi] - sorted[lo]) * (rank - lo as f64)
}

impl DistributionSummary {
    pub fn from_values(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InsufficientData("summary of an empty sample".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("summary input".into()));
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        Ok(DistributionSummary {
            median: percentile(&sorted, 50.0),
            q1: percentile(&sorted, 25.0),
            q3: percentile(&sorted, 75.0),
            whisker_lo: percentile(&sorted, 5.0),
            whisker_hi: percentile(&sorted, 95.0),
            mean: values.iter().sum::<f64>() / values.len() as f64,
            n: values.len(),
        })
    }
}

/// How the "most frequent" words of a slot pair are picked.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum FrequencyRanking {
    /// Global corpus frequency.
    #[default]
    Global,
    /// Combined count in the two slots of the pair.
    PerSlot,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlotPairSimilarity {
    pub first: usize,
    pub second: usize,
    pub first_start: i32,
    pub second_start: i32,
    pub summary: DistributionSummary,
    /// `(vocabulary index, cosine)` in vocabulary order.
    pub cosines: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelfSimSeries {
    pub pairs: Vec<SlotPairSimilarity>,
}

impl SelfSimSeries {
    pub fn medians(&self) -> Vec<f64> {
        self.pairs.iter().map(|p| p.summary.median).collect()
    }
}

fn top_by<F: Fn(usize) -> u64>(len: usize, top_n: usize, count: F) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..len).collect();
    idx.sort_by(|&a, &b| count(b).cmp(&count(a)).then(a.cmp(&b)));
    idx.truncate(top_n);
    idx.sort_unstable();
    idx
}

fn adjacent_pair(model: &JointEmbeddingModel, first: usize, words: &[usize]) -> Result<SlotPairSimilarity> {
    let second = first + 1;
    let vocab = &model.vocab;
    let cosines: Vec<(usize, f64)> = words
        .par_iter()
        .filter(|&&w| vocab.slot_count(first, w) > 0 && vocab.slot_count(second, w) > 0)
        .map(|&w| model.self_similarity(w, first, second).map(|c| (w, c)))
        .collect::<Result<_>>()?;
    let values: Vec<f64> = cosines.iter().map(|c| c.1).collect();
    let (a, b) = (&model.slots.slots[first], &model.slots.slots[second]);
    let summary = DistributionSummary::from_values(&values)
        .map_err(|_| Error::InsufficientData(format!("no word present in both {} and {}", a.label, b.label)))?;
    Ok(SlotPairSimilarity {
        first,
        second,
        first_start: a.start,
        second_start: b.start,
        summary,
        cosines,
    })
}

/// Adjacent-slot self-similarity of the `top_n` most frequent words.
/// Words absent from either slot of a pair are skipped for that pair.
pub fn pairwise_selfsim(model: &JointEmbeddingModel, top_n: usize, ranking: FrequencyRanking) -> Result<SelfSimSeries> {
    let vocab = &model.vocab;
    if model.num_slots() < 2 {
        return Err(Error::InsufficientData("need at least 2 slots".into()));
    }
    if top_n > vocab.len() {
        return Err(Error::InsufficientData(format!(
            "top_n = {top_n} exceeds vocabulary size {}",
            vocab.len()
        )));
    }
    let global = top_by(vocab.len(), top_n, |i| vocab.global_count(i));
    let pairs = (0..model.num_slots() - 1)
        .map(|first| {
            let words = match ranking {
                FrequencyRanking::Global => global.clone(),
                FrequencyRanking::PerSlot => top_by(vocab.len(), top_n, |i| {
                    vocab.slot_count(first, i) + vocab.slot_count(first + 1, i)
                }),
            };
            adjacent_pair(model, first, &words)
        })
        .collect::<Result<_>>()?;
    Ok(SelfSimSeries { pairs })
}

/// Adjacent-slot self-similarity over an explicit word set.
pub fn pairwise_selfsim_for(model: &JointEmbeddingModel, words: &[usize]) -> Result<SelfSimSeries> {
    let mut words = words.to_vec();
    words.sort_unstable();
    words.dedup();
    let pairs = (0..model.num_slots().saturating_sub(1))
        .map(|first| adjacent_pair(model, first, &words))
        .collect::<Result<_>>()?;
    Ok(SelfSimSeries { pairs })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChangePoint {
    pub pair_index: usize,
    /// Start year of the later slot of the pair.
    pub year: i32,
    /// Mean of the neighbouring medians minus this pair's median.
    pub depth: f64,
}

/// Strict interior local minima of `values` as `(index, depth)`.
pub fn local_minima(values: &[f64]) -> Vec<(usize, f64)> {
    (1..values.len().saturating_sub(1))
        .filter(|&i| values[i] < values[i - 1] && values[i] < values[i + 1])
        .map(|i| (i, (values[i - 1] + values[i + 1]) / 2.0 - values[i]))
        .collect()
}

/// The `k` deepest local minima of the per-pair medians, deepest first.
pub fn detect_change_points(series: &SelfSimSeries, k: usize) -> Result<Vec<ChangePoint>> {
    if series.pairs.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "change points need at least 3 slot pairs, got {}",
            series.pairs.len()
        )));
    }
    let mut points: Vec<ChangePoint> = local_minima(&series.medians())
        .into_iter()
        .map(|(i, depth)| ChangePoint {
            pair_index: i,
            year: series.pairs[i].second_start,
            depth,
        })
        .collect();
    points.sort_by(|a, b| b.depth.total_cmp(&a.depth).then(a.year.cmp(&b.year)));
    points.truncate(k);
    Ok(points)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Band {
    Low,
    High,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TotalSelfSim {
    /// Distinct slot-start distances in years, ascending.
    pub distances: Vec<i32>,
    pub summaries: Vec<DistributionSummary>,
    /// Eligible vocabulary indices, ascending.
    pub words: Vec<usize>,
    pub global_counts: Vec<u64>,
    /// `[word][distance]` mean cosine.
    pub per_word: Vec<Vec<f64>>,
    pub bands: Vec<Band>,
}

/// Sorted by `(count, index)`: lower half low, upper half high; an odd middle word goes low.
pub fn assign_bands(counts: &[u64], indices: &[usize]) -> Vec<Band> {
    let mut order: Vec<usize> = (0..counts.len()).collect();
    order.sort_by(|&a, &b| counts[a].cmp(&counts[b]).then(indices[a].cmp(&indices[b])));
    let low = counts.len().div_ceil(2);
    let mut bands = vec![Band::High; counts.len()];
    for &i in &order[..low] {
        bands[i] = Band::Low;
    }
    bands
}

/// Self-similarity over all unordered slot pairs, averaged per word and distance.
///
/// Eligible words are non-stopwords with at least `min_per_slot` occurrences in every slot.
pub fn total_selfsim(model: &JointEmbeddingModel, min_per_slot: u64, stopwords: &Stopwords) -> Result<TotalSelfSim> {
    let vocab = &model.vocab;
    let words: Vec<usize> = vocab
        .all_slot_words(min_per_slot)
        .into_iter()
        .filter(|&i| !stopwords.contains(vocab.word(i)))
        .collect();
    if words.is_empty() {
        return Err(Error::InsufficientData(format!(
            "no non-stopword occurs at least {min_per_slot} times in every slot"
        )));
    }
    let starts = model.slots.starts();
    let mut distances: Vec<i32> = Vec::new();
    let mut pairs_at: Vec<Vec<(usize, usize)>> = Vec::new();
    for i in 0..starts.len() {
        for j in i + 1..starts.len() {
            let dist = (starts[j] - starts[i]).abs();
            match distances.binary_search(&dist) {
                Ok(k) => pairs_at[k].push((i, j)),
                Err(k) => {
                    distances.insert(k, dist);
                    pairs_at.insert(k, vec![(i, j)]);
                }
            }
        }
    }

    let per_word: Vec<Vec<f64>> = words
        .par_iter()
        .map(|&w| {
            pairs_at
                .iter()
                .map(|pairs| {
                    let sum = pairs
                        .iter()
                        .map(|&(a, b)| model.self_similarity(w, a, b))
                        .sum::<Result<f64>>()?;
                    Ok(sum / pairs.len() as f64)
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;

    let summaries = (0..distances.len())
        .map(|k| DistributionSummary::from_values(&per_word.iter().map(|r| r[k]).collect::<Vec<_>>()))
        .collect::<Result<_>>()?;
    let global_counts: Vec<u64> = words.iter().map(|&w| vocab.global_count(w)).collect();
    let bands = assign_bands(&global_counts, &words);
    Ok(TotalSelfSim {
        distances,
        summaries,
        words,
        global_counts,
        per_word,
        bands,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BandedSelfSim {
    pub low_words: Vec<usize>,
    pub high_words: Vec<usize>,
    /// Per distance, aligned with `TotalSelfSim::distances`.
    pub low: Vec<DistributionSummary>,
    pub high: Vec<DistributionSummary>,
}

pub fn frequency_bands(total: &TotalSelfSim) -> Result<BandedSelfSim> {
    if total.words.len() < 2 {
        return Err(Error::InsufficientData("frequency bands need at least 2 words".into()));
    }
    let members = |band: Band| -> Vec<usize> { (0..total.words.len()).filter(|&i| total.bands[i] == band).collect() };
    let (low, high) = (members(Band::Low), members(Band::High));
    let summarize = |rows: &[usize]| -> Result<Vec<DistributionSummary>> {
        (0..total.distances.len())
            .map(|k| DistributionSummary::from_values(&rows.iter().map(|&r| total.per_word[r][k]).collect::<Vec<_>>()))
            .collect()
    };
    Ok(BandedSelfSim {
        low: summarize(&low)?,
        high: summarize(&high)?,
        low_words: low.iter().map(|&r| total.words[r]).collect(),
        high_words: high.iter().map(|&r| total.words[r]).collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Ordinary least squares; `r_squared` is 0 when `y` has no variance.
pub fn fit_line(xs: &[f64], ys: &[f64]) -> Result<LinearFit> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::InsufficientData("need at least 2 paired points".into()));
    }
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientData("x values have no spread".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 {
        0.0
    } else {
        let ss_res: f64 = xs
            .iter()
            .zip(ys)
            .map(|(x, y)| (y - intercept - slope * x).powi(2))
            .sum();
        (1.0 - ss_res / syy).max(0.0)
    };
    Ok(LinearFit {
        slope,
        intercept,
        r_squared,
    })
}

/// OLS of per-distance mean cosine against distance in years.
pub fn linearity_fit(total: &TotalSelfSim) -> Result<LinearFit> {
    if total.distances.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "linearity fit needs at least 3 distances, got {}",
            total.distances.len()
        )));
    }
    let xs: Vec<f64> = total.distances.iter().map(|&d| d as f64).collect();
    let ys: Vec<f64> = total.summaries.iter().map(|s| s.mean).collect();
    fit_line(&xs, &ys)
}
