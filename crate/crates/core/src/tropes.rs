//! Word-pair similarity trajectories and their principal components.
//!
//! A trajectory is the per-slot cosine between a target word and one
//! candidate. PCA over all trajectories of a target separates stable
//! high/low association (first component) from rising/falling association
//! (second component); the candidates at each component extreme are the
//! reported tropes.

use rayon::prelude::*;
use serde::Serialize;

use crate::analysis::fit_line;
use crate::error::{Error, Result};
use crate::linalg::{pca, Matrix, PcaResult};
use crate::trainer::JointEmbeddingModel;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimilarityTrajectory {
    pub target: String,
    pub candidate: String,
    pub candidate_index: usize,
    /// Per-slot cosine; imputed where `imputed[t]` is set.
    pub values: Vec<f64>,
    pub imputed: Vec<bool>,
}

impl SimilarityTrajectory {
    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Least-squares slope against slot index.
    pub fn slope(&self) -> f64 {
        let xs: Vec<f64> = (0..self.values.len()).map(|i| i as f64).collect();
        fit_line(&xs, &self.values).map_or(0.0, |f| f.slope)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrajectoryOptions {
    pub min_global: u64,
    /// A slot with fewer occurrences counts as missing.
    pub min_per_slot: u64,
    pub max_missing: usize,
}

impl Default for TrajectoryOptions {
    fn default() -> Self {
        TrajectoryOptions {
            min_global: 30,
            min_per_slot: 2,
            max_missing: 1,
        }
    }
}

/// Fills `None` entries by linear interpolation between the nearest present
/// neighbours, or the nearest present value at the boundaries. Present values
/// are copied unchanged. Returns `None` when nothing is present.
pub fn impute_missing(raw: &[Option<f64>]) -> Option<(Vec<f64>, Vec<bool>)> {
    let present: Vec<usize> = (0..raw.len()).filter(|&i| raw[i].is_some()).collect();
    if present.is_empty() {
        return None;
    }
    let values = (0..raw.len())
        .map(|i| {
            if let Some(v) = raw[i] {
                return v;
            }
            let next = present.iter().position(|&p| p > i);
            match next {
                None => raw[*present.last().unwrap()].unwrap(),
                Some(0) => raw[present[0]].unwrap(),
                Some(k) => {
                    let (l, r) = (present[k - 1], present[k]);
                    let (vl, vr) = (raw[l].unwrap(), raw[r].unwrap());
                    vl + (vr - vl) * (i - l) as f64 / (r - l) as f64
                }
            }
        })
        .collect();
    Some((values, raw.iter().map(Option::is_none).collect()))
}

/// Cosine trajectories of `target` against every qualifying candidate, in vocabulary order.
pub fn build_trajectories(
    model: &JointEmbeddingModel,
    target: &str,
    options: TrajectoryOptions,
) -> Result<Vec<SimilarityTrajectory>> {
    let vocab = &model.vocab;
    let t = vocab
        .index_of(target)
        .ok_or_else(|| Error::UnknownWord(target.to_string()))?;
    let slots = model.num_slots();
    if let Some(missing) = (0..slots).find(|&s| vocab.slot_count(s, t) == 0) {
        return Err(Error::InsufficientData(format!(
            "target {target:?} does not occur in slot {}",
            model.slots.slots[missing].label
        )));
    }
    let candidates: Vec<usize> = (0..vocab.len())
        .filter(|&c| c != t && vocab.global_count(c) >= options.min_global)
        .filter(|&c| {
            (0..slots)
                .filter(|&s| vocab.slot_count(s, c) < options.min_per_slot)
                .count()
                <= options.max_missing
        })
        .collect();

    let trajectories: Vec<SimilarityTrajectory> = candidates
        .par_iter()
        .map(|&c| {
            let raw = (0..slots)
                .map(|s| {
                    if vocab.slot_count(s, c) < options.min_per_slot {
                        Ok(None)
                    } else {
                        model.pair_similarity(t, c, s).map(Some)
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            let (values, imputed) = impute_missing(&raw)
                .ok_or_else(|| Error::InsufficientData(format!("candidate {} has no present slot", vocab.word(c))))?;
            Ok(SimilarityTrajectory {
                target: target.to_string(),
                candidate: vocab.word(c).to_string(),
                candidate_index: c,
                values,
                imputed,
            })
        })
        .collect::<Result<_>>()?;
    if trajectories.is_empty() {
        return Err(Error::InsufficientData(format!(
            "no candidate qualifies for target {target:?}"
        )));
    }
    Ok(trajectories)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtremeEntry {
    pub candidate: String,
    pub candidate_index: usize,
    pub projection: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComponentExtremes {
    /// Largest positive projections, descending.
    pub positive: Vec<ExtremeEntry>,
    /// Most negative projections, ascending.
    pub negative: Vec<ExtremeEntry>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    /// Not yet calibrated: PCA's own sign convention.
    Raw,
    Determined,
    /// The two extremes could not be told apart.
    Undetermined,
}

#[derive(Debug, Clone)]
pub struct TropeReport {
    pub trajectories: Vec<SimilarityTrajectory>,
    pub pca: PcaResult,
    pub top_k: usize,
    pub extremes: Vec<ComponentExtremes>,
    /// Orientation state of components 1 and 2.
    pub orientation: [Orientation; 2],
}

impl TropeReport {
    fn rebuild_extremes(&mut self) {
        self.extremes = (0..self.pca.num_components())
            .map(|k| extremes_for(&self.trajectories, &self.pca, k, self.top_k))
            .collect();
    }
}

fn extremes_for(trajectories: &[SimilarityTrajectory], pca: &PcaResult, k: usize, top_k: usize) -> ComponentExtremes {
    if pca.degenerate {
        return ComponentExtremes {
            positive: vec![],
            negative: vec![],
        };
    }
    let entry = |i: usize| ExtremeEntry {
        candidate: trajectories[i].candidate.clone(),
        candidate_index: trajectories[i].candidate_index,
        projection: pca.projections[(i, k)],
    };
    let mut pos: Vec<ExtremeEntry> = (0..trajectories.len())
        .map(entry)
        .filter(|e| e.projection > 0.0)
        .collect();
    let mut neg: Vec<ExtremeEntry> = (0..trajectories.len())
        .map(entry)
        .filter(|e| e.projection < 0.0)
        .collect();
    pos.sort_by(|a, b| {
        b.projection
            .total_cmp(&a.projection)
            .then(a.candidate_index.cmp(&b.candidate_index))
    });
    neg.sort_by(|a, b| {
        a.projection
            .total_cmp(&b.projection)
            .then(a.candidate_index.cmp(&b.candidate_index))
    });
    pos.truncate(top_k);
    neg.truncate(top_k);
    ComponentExtremes {
        positive: pos,
        negative: neg,
    }
}

/// PCA over the trajectory matrix (one row per candidate) and the `top_k`
/// candidates at both ends of every component. Each end only holds candidates
/// whose projection has that end's sign, so the two lists never overlap.
pub fn trope_pca(trajectories: &[SimilarityTrajectory], q: usize, top_k: usize) -> Result<TropeReport> {
    if trajectories.len() < q + 1 {
        return Err(Error::InvalidPca(format!(
            "{} trajectories for {q} components; need at least {}",
            trajectories.len(),
            q + 1
        )));
    }
    let rows: Vec<Vec<f64>> = trajectories.iter().map(|t| t.values.clone()).collect();
    let result = pca(&Matrix::from_rows(&rows)?, q)?;
    let mut report = TropeReport {
        trajectories: trajectories.to_vec(),
        pca: result,
        top_k,
        extremes: Vec::new(),
        orientation: [Orientation::Raw; 2],
    };
    report.rebuild_extremes();
    Ok(report)
}

fn members_mean(
    report: &TropeReport,
    entries: &[ExtremeEntry],
    stat: impl Fn(&SimilarityTrajectory) -> f64,
) -> Option<f64> {
    if entries.is_empty() {
        return None;
    }
    let by_index = |idx: usize| report.trajectories.iter().find(|t| t.candidate_index == idx);
    let sum: f64 = entries
        .iter()
        .filter_map(|e| by_index(e.candidate_index))
        .map(&stat)
        .sum();
    Some(sum / entries.len() as f64)
}

const ORIENTATION_EPS: f64 = 1e-12;

/// Calibrates component signs from the data: the `+` end of component 1 is the
/// one whose members have the higher mean similarity ("high"), the `+` end of
/// component 2 the one whose members have the higher mean slope ("rising").
pub fn orient_components(mut report: TropeReport) -> TropeReport {
    let stats: [fn(&SimilarityTrajectory) -> f64; 2] = [SimilarityTrajectory::mean, SimilarityTrajectory::slope];
    for (k, stat) in stats.into_iter().enumerate() {
        if k >= report.extremes.len() {
            report.orientation[k] = Orientation::Undetermined;
            continue;
        }
        let plus = members_mean(&report, &report.extremes[k].positive, stat);
        let minus = members_mean(&report, &report.extremes[k].negative, stat);
        report.orientation[k] = match (plus, minus) {
            (Some(p), Some(m)) if (p - m).abs() > ORIENTATION_EPS => {
                if m > p {
                    report.pca.flip_component(k);
                    report.rebuild_extremes();
                }
                Orientation::Determined
            }
            _ => Orientation::Undetermined,
        };
    }
    report
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TropeClass {
    High,
    Low,
    Rising,
    Falling,
    Mixed,
}

/// Classes of a candidate from its membership in the component 1/2 extreme
/// lists. Membership in several lists yields several labels; none yields `Mixed`.
pub fn classify_trajectory(report: &TropeReport, candidate: &str) -> Result<Vec<TropeClass>> {
    if !report.trajectories.iter().any(|t| t.candidate == candidate) {
        return Err(Error::UnknownWord(candidate.to_string()));
    }
    let contains = |list: &[ExtremeEntry]| list.iter().any(|e| e.candidate == candidate);
    let labels = [
        (0, true, TropeClass::High),
        (0, false, TropeClass::Low),
        (1, true, TropeClass::Rising),
        (1, false, TropeClass::Falling),
    ];
    let mut classes: Vec<TropeClass> = labels
        .iter()
        .filter(|(k, _, _)| *k < report.extremes.len())
        .filter(|(k, positive, _)| {
            let ext = &report.extremes[*k];
            contains(if *positive { &ext.positive } else { &ext.negative })
        })
        .map(|(_, _, c)| *c)
        .collect();
    if classes.is_empty() {
        classes.push(TropeClass::Mixed);
    }
    Ok(classes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn traj(name: &str, idx: usize, values: Vec<f64>) -> SimilarityTrajectory {
        SimilarityTrajectory {
            target: "liebe".into(),
            candidate: name.into(),
            candidate_index: idx,
            imputed: vec![false; values.len()],
            values,
        }
    }

    type Shape = (&'static str, fn(f64) -> f64);

    /// 4 planted classes × `per_class`, 6 slots, Gaussian noise.
    pub(crate) fn fixture(per_class: usize, sigma: f64, seed: u64) -> Vec<SimilarityTrajectory> {
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
                let values = (0..6).map(|s| f(s as f64 / 5.0) + noise.sample(&mut rng)).collect();
                out.push(traj(&format!("{name}{i}"), out.len(), values));
            }
        }
        out
    }

    fn model(counts: &[[u64; 6]]) -> JointEmbeddingModel {
        use crate::corpus::{build_slots, Vocabulary};
        use crate::trainer::EmbeddingMatrix;
        let n = counts.len();
        let words: Vec<String> = (0..n).map(|i| format!("w{i}")).collect();
        let slot_counts = (0..6).map(|s| counts.iter().map(|c| c[s]).collect()).collect();
        let global = counts.iter().map(|c| c.iter().sum()).collect();
        let vocab = Vocabulary::from_parts(words, global, slot_counts).unwrap();
        // w0 and w1 share a main row; the rest differ
        let main: Vec<f32> = (0..n)
            .flat_map(|i| if i <= 1 { [1.0, 0.5, 0.0] } else { [0.0, i as f32, 1.0] })
            .collect();
        let deltas = (0..6)
            .map(|s| {
                let data = (0..n)
                    .flat_map(|i| if i >= 2 { [s as f32 * 0.3, 0.0, 0.0] } else { [0.0; 3] })
                    .collect();
                EmbeddingMatrix::from_vec(n, 3, data).unwrap()
            })
            .collect();
        JointEmbeddingModel::new(
            vocab,
            build_slots(1575, 1875, 50, 50, false).unwrap(),
            EmbeddingMatrix::from_vec(n, 3, main).unwrap(),
            deltas,
            EmbeddingMatrix::zeros(n, 3),
        )
        .unwrap()
    }

    #[test]
    fn trajectory_candidates_and_imputation() {
        let m = model(&[
            [10; 6],
            [6; 6],
            [5, 5, 0, 5, 5, 5],
            [5, 0, 5, 0, 5, 5],
            [1, 1, 1, 1, 1, 1],
        ]);
        let opts = TrajectoryOptions {
            min_global: 5,
            ..Default::default()
        };
        let trajs = build_trajectories(&m, "w0", opts).unwrap();
        let names: Vec<_> = trajs.iter().map(|t| t.candidate.as_str()).collect();
        assert_eq!(names, vec!["w1", "w2"]);
        assert!(trajs[0].values.iter().all(|v| (v - 1.0).abs() < 1e-12));
        let w2 = &trajs[1];
        assert_eq!(w2.imputed, vec![false, false, true, false, false, false]);
        assert_eq!(w2.values[2], (w2.values[1] + w2.values[3]) / 2.0);
        // present values are the raw cosines, untouched
        assert_eq!(w2.values[4], m.pair_similarity(0, 2, 4).unwrap());

        let stricter = build_trajectories(&m, "w0", TrajectoryOptions { min_global: 31, ..opts }).unwrap();
        assert_eq!(stricter.len(), 1);
        assert!(matches!(
            build_trajectories(&m, "w2", opts),
            Err(Error::InsufficientData(_))
        ));
        assert!(matches!(build_trajectories(&m, "zz", opts), Err(Error::UnknownWord(_))));
        assert!(build_trajectories(
            &m,
            "w0",
            TrajectoryOptions {
                min_global: 1000,
                ..opts
            }
        )
        .is_err());
    }

    #[test]
    fn imputation_rules() {
        let (v, m) = impute_missing(&[Some(0.5), Some(0.5), None, Some(0.7), Some(0.5), Some(0.5)]).unwrap();
        assert!((v[2] - 0.6).abs() < 1e-15);
        assert_eq!(m, vec![false, false, true, false, false, false]);
        let (v, _) = impute_missing(&[None, Some(0.3), Some(0.9), None]).unwrap();
        assert_eq!(v, vec![0.3, 0.3, 0.9, 0.9]);
        assert!(impute_missing(&[None, None]).is_none());
    }

    #[test]
    fn orientation_and_classification_on_fixture() {
        let set = fixture(25, 0.02, 4);
        let report = orient_components(trope_pca(&set, 4, 25).unwrap());
        assert_eq!(report.orientation, [Orientation::Determined; 2]);
        assert_eq!(
            classify_trajectory(&report, "rising3").unwrap(),
            vec![TropeClass::Rising]
        );
        assert_eq!(classify_trajectory(&report, "high0").unwrap(), vec![TropeClass::High]);
        assert!(classify_trajectory(&report, "nope").is_err());
    }

    #[test]
    fn flipping_before_orientation_changes_nothing() {
        let set = fixture(10, 0.02, 8);
        let base = orient_components(trope_pca(&set, 3, 10).unwrap());
        let mut flipped = trope_pca(&set, 3, 10).unwrap();
        for k in 0..3 {
            flipped.pca.flip_component(k);
        }
        flipped.rebuild_extremes();
        let flipped = orient_components(flipped);
        assert_eq!(base.extremes[..2], flipped.extremes[..2]);
        assert_eq!(base.orientation, flipped.orientation);
    }

    #[test]
    fn noise_near_mean_is_mixed() {
        let mut set = fixture(5, 0.0, 1);
        let mean: Vec<f64> = (0..6)
            .map(|s| set.iter().map(|t| t.values[s]).sum::<f64>() / set.len() as f64)
            .collect();
        set.push(traj("center", 99, mean));
        let report = orient_components(trope_pca(&set, 2, 5).unwrap());
        assert_eq!(classify_trajectory(&report, "center").unwrap(), vec![TropeClass::Mixed]);
    }

    #[test]
    fn identical_trajectories_are_degenerate() {
        let set: Vec<_> = (0..6).map(|i| traj(&format!("w{i}"), i, vec![0.4; 6])).collect();
        let report = orient_components(trope_pca(&set, 4, 3).unwrap());
        assert!(report.pca.degenerate);
        assert!(report.pca.explained_variance_ratio.iter().all(|&r| r == 0.0));
        assert_eq!(report.orientation, [Orientation::Undetermined; 2]);
        assert!(trope_pca(&set[..4], 4, 3).is_err());
    }

    #[test]
    fn flat_second_component_is_undetermined() {
        // only levels differ: comp2 extremes have equal (zero) slopes
        let set: Vec<_> = (0..8)
            .map(|i| {
                let level = 0.1 * i as f64;
                let bump = if i % 2 == 0 { 0.05 } else { -0.05 };
                traj(
                    &format!("w{i}"),
                    i,
                    vec![level + bump, level - bump, level - bump, level + bump],
                )
            })
            .collect();
        let report = orient_components(trope_pca(&set, 2, 4).unwrap());
        assert_eq!(report.orientation[0], Orientation::Determined);
        assert_eq!(report.orientation[1], Orientation::Undetermined);
    }

    proptest! {
        #[test]
        fn extremes_disjoint(seed in 0u64..50, top_k in 1usize..30) {
            let report = orient_components(trope_pca(&fixture(6, 0.05, seed), 4, top_k).unwrap());
            for ext in &report.extremes {
                for e in &ext.positive {
                    prop_assert!(ext.negative.iter().all(|n| n.candidate_index != e.candidate_index));
                }
            }
        }

        #[test]
        fn reordering_candidates_keeps_extremes(seed in 0u64..50) {
            let set = fixture(6, 0.05, seed);
            let mut rev = set.clone();
            rev.reverse();
            let a = orient_components(trope_pca(&set, 2, 6).unwrap());
            let b = orient_components(trope_pca(&rev, 2, 6).unwrap());
            for k in 0..2 {
                let ids = |l: &[ExtremeEntry]| l.iter().map(|e| e.candidate_index).collect::<Vec<_>>();
                prop_assert_eq!(ids(&a.extremes[k].positive), ids(&b.extremes[k].positive));
                prop_assert_eq!(ids(&a.extremes[k].negative), ids(&b.extremes[k].negative));
            }
        }
    }
}
