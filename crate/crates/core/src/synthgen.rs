//! Synthetic diachronic corpora with known ground truth.
//!
//! Filler vocabulary is organised in context clusters of `cluster_size`
//! words each. Background stanzas draw all their tokens from one random
//! cluster. Every planted word gets exactly `per_slot` stanzas per slot; the
//! rest of such a stanza is drawn from the cluster(s) its kind selects for
//! that slot.

use std::collections::HashSet;
use std::path::Path;

use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{build_slots, tokenize, Stanza, TimeSlotTable};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlantKind {
    /// Context cluster never changes.
    Stable,
    /// Switches from `before` to `after` at `slot`.
    AbruptShift { slot: usize },
    /// Each context token comes from `after` with probability `min(1, rate · t)`.
    LinearDrift { rate: f64 },
    /// Contexts spread over `spread` clusters re-drawn in every slot.
    Wide { spread: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedWord {
    pub word: String,
    pub kind: PlantKind,
    pub before: usize,
    #[serde(default)]
    pub after: usize,
    pub per_slot: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub slots: usize,
    #[serde(default = "default_start_year")]
    pub start_year: i32,
    #[serde(default = "default_slot_years")]
    pub slot_years: i32,
    pub tokens_per_slot: usize,
    #[serde(default = "default_stanza_len")]
    pub stanza_len: usize,
    pub clusters: usize,
    #[serde(default = "default_cluster_size")]
    pub cluster_size: usize,
    #[serde(default)]
    pub planted: Vec<PlantedWord>,
    #[serde(default)]
    pub seed: u64,
}

fn default_start_year() -> i32 {
    1575
}
fn default_slot_years() -> i32 {
    50
}
fn default_stanza_len() -> usize {
    10
}
fn default_cluster_size() -> usize {
    10
}

impl SynthSpec {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::InvalidSynthSpec(e.to_string()))
    }

    pub fn stanzas_per_slot(&self) -> usize {
        self.tokens_per_slot / self.stanza_len
    }

    pub fn vocab_size(&self) -> usize {
        self.clusters * self.cluster_size
    }

    pub fn filler_word(cluster: usize, member: usize) -> String {
        format!("c{cluster}w{member}")
    }

    /// Fixed slot table matching the generated years.
    pub fn slot_table(&self) -> Result<TimeSlotTable> {
        let end = self.start_year + self.slots as i32 * self.slot_years;
        build_slots(self.start_year, end, self.slot_years, self.slot_years, false)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidSynthSpec(m));
        if self.slots < 2 {
            return bad(format!("need at least 2 slots, got {}", self.slots));
        }
        if self.slot_years <= 0 {
            return bad("slot_years must be positive".into());
        }
        if self.stanza_len < 2 {
            return bad("stanza_len must be >= 2".into());
        }
        if self.clusters == 0 || self.cluster_size == 0 {
            return bad("need at least one cluster with at least one word".into());
        }
        let mut seen = HashSet::new();
        for p in &self.planted {
            let tokens: Vec<String> = tokenize(&p.word).collect();
            if tokens != [p.word.clone()] {
                return bad(format!("planted word {:?} is not a normalized token", p.word));
            }
            if !seen.insert(p.word.as_str()) {
                return bad(format!("planted word {:?} listed twice", p.word));
            }
            let clash = p
                .word
                .strip_prefix('c')
                .and_then(|r| r.split_once('w'))
                .is_some_and(|(c, w)| c.parse::<usize>().is_ok() && w.parse::<usize>().is_ok());
            if clash {
                return bad(format!("planted word {:?} collides with filler naming", p.word));
            }
            if p.before >= self.clusters || p.after >= self.clusters {
                return bad(format!("planted word {:?} references a missing cluster", p.word));
            }
            match p.kind {
                PlantKind::AbruptShift { slot } if slot == 0 || slot >= self.slots => {
                    return bad(format!("shift slot {slot} outside 1..{}", self.slots));
                }
                PlantKind::LinearDrift { rate } if !rate.is_finite() || rate < 0.0 => {
                    return bad(format!("drift rate {rate} must be >= 0"));
                }
                PlantKind::Wide { spread } if spread == 0 || spread > self.clusters => {
                    return bad(format!("spread {spread} outside 1..={}", self.clusters));
                }
                _ => {}
            }
        }
        let planted: usize = self.planted.iter().map(|p| p.per_slot).sum();
        if planted > self.stanzas_per_slot() {
            return bad(format!(
                "{planted} planted stanzas per slot exceed the {} stanzas that {} tokens allow",
                self.stanzas_per_slot(),
                self.tokens_per_slot
            ));
        }
        Ok(())
    }
}

struct Generator<'a> {
    spec: &'a SynthSpec,
    rng: ChaCha8Rng,
}

impl Generator<'_> {
    fn filler(&mut self, cluster: usize) -> String {
        let member = self.rng.gen_range(0..self.spec.cluster_size);
        SynthSpec::filler_word(cluster, member)
    }

    fn stanza_tokens(&mut self, planted: Option<&str>, mut cluster_for: impl FnMut(&mut Self) -> usize) -> Vec<String> {
        let len = self.spec.stanza_len;
        let slot_of_planted = planted.map(|_| self.rng.gen_range(0..len));
        (0..len)
            .map(|i| match (slot_of_planted, planted) {
                (Some(p), Some(w)) if p == i => w.to_string(),
                _ => {
                    let c = cluster_for(self);
                    self.filler(c)
                }
            })
            .collect()
    }
}

/// Generates the corpus; identical specs (including seed) give identical output.
pub fn generate(spec: &SynthSpec) -> Result<Vec<Stanza>> {
    spec.validate()?;
    let mut g = Generator {
        spec,
        rng: ChaCha8Rng::seed_from_u64(spec.seed),
    };
    let per_slot = spec.stanzas_per_slot();
    let mut out = Vec::with_capacity(per_slot * spec.slots);

    for t in 0..spec.slots {
        let mut slot_stanzas: Vec<Vec<String>> = Vec::with_capacity(per_slot);
        for p in &spec.planted {
            let wide: Vec<usize> = match p.kind {
                PlantKind::Wide { spread } => index::sample(&mut g.rng, spec.clusters, spread).into_vec(),
                _ => Vec::new(),
            };
            for _ in 0..p.per_slot {
                let tokens = g.stanza_tokens(Some(&p.word), |g| match p.kind {
                    PlantKind::Stable => p.before,
                    PlantKind::AbruptShift { slot } => {
                        if t < slot {
                            p.before
                        } else {
                            p.after
                        }
                    }
                    PlantKind::LinearDrift { rate } => {
                        let alpha = (rate * t as f64).min(1.0);
                        if g.rng.gen::<f64>() < alpha {
                            p.after
                        } else {
                            p.before
                        }
                    }
                    PlantKind::Wide { .. } => *wide.choose(&mut g.rng).expect("spread >= 1"),
                });
                slot_stanzas.push(tokens);
            }
        }
        while slot_stanzas.len() < per_slot {
            let cluster = g.rng.gen_range(0..spec.clusters);
            slot_stanzas.push(g.stanza_tokens(None, |_| cluster));
        }
        slot_stanzas.shuffle(&mut g.rng);

        let start = spec.start_year + t as i32 * spec.slot_years;
        for (n, tokens) in slot_stanzas.into_iter().enumerate() {
            let year = g.rng.gen_range(start..start + spec.slot_years);
            out.push(Stanza {
                id: format!("synth-{t:02}-{n:06}"),
                poem_id: format!("synth-{t:02}-p{:05}", n / 4),
                author: format!("author-{t:02}"),
                year,
                lines: vec![tokens.join(" ")],
                tokens: Vec::new(),
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{ingest_reader, normalize, write_jsonl, IngestOptions, LemmaMap};

    fn spec() -> SynthSpec {
        SynthSpec {
            slots: 3,
            start_year: 1600,
            slot_years: 50,
            tokens_per_slot: 2000,
            stanza_len: 10,
            clusters: 4,
            cluster_size: 10,
            planted: vec![
                PlantedWord {
                    word: "herz".into(),
                    kind: PlantKind::AbruptShift { slot: 1 },
                    before: 0,
                    after: 1,
                    per_slot: 20,
                },
                PlantedWord {
                    word: "mond".into(),
                    kind: PlantKind::Stable,
                    before: 2,
                    after: 2,
                    per_slot: 15,
                },
                PlantedWord {
                    word: "wind".into(),
                    kind: PlantKind::LinearDrift { rate: 0.5 },
                    before: 0,
                    after: 3,
                    per_slot: 10,
                },
                PlantedWord {
                    word: "see".into(),
                    kind: PlantKind::Wide { spread: 2 },
                    before: 0,
                    after: 0,
                    per_slot: 12,
                },
            ],
            seed: 9,
        }
    }

    #[test]
    fn same_seed_gives_identical_corpus() {
        let dir = tempfile::tempdir().unwrap();
        let (a, b) = (dir.path().join("a.jsonl"), dir.path().join("b.jsonl"));
        write_jsonl(&a, &generate(&spec()).unwrap()).unwrap();
        write_jsonl(&b, &generate(&spec()).unwrap()).unwrap();
        assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
        let other = SynthSpec { seed: 10, ..spec() };
        assert_ne!(generate(&other).unwrap(), generate(&spec()).unwrap());
    }

    #[test]
    fn planted_counts_exact_and_schema_valid() {
        let s = spec();
        let stanzas = generate(&s).unwrap();
        assert_eq!(stanzas.len(), 3 * 200);
        let mut buf = Vec::new();
        for st in &stanzas {
            buf.extend(serde_json::to_vec(st).unwrap());
            buf.push(b'\n');
        }
        let report = ingest_reader(buf.as_slice(), IngestOptions { strict: true }).unwrap();
        assert_eq!(report.dropped(), 0);
        let norm = normalize(report.stanzas, &LemmaMap::new()).stanzas;
        let table = s.slot_table().unwrap();
        for p in &s.planted {
            for t in 0..s.slots {
                let n = norm
                    .iter()
                    .filter(|st| table.slots[t].contains(st.year))
                    .flat_map(|st| &st.tokens)
                    .filter(|tok| **tok == p.word)
                    .count();
                assert_eq!(n, p.per_slot, "{} in slot {t}", p.word);
            }
        }
    }

    #[test]
    fn abrupt_shift_switches_cluster() {
        let stanzas = generate(&spec()).unwrap();
        let table = spec().slot_table().unwrap();
        for st in stanzas.iter().filter(|s| s.lines[0].split(' ').any(|w| w == "herz")) {
            let cluster = if table.slots[0].contains(st.year) { "c0w" } else { "c1w" };
            assert!(st.lines[0]
                .split(' ')
                .filter(|w| *w != "herz")
                .all(|w| w.starts_with(cluster)));
        }
    }

    #[test]
    fn too_few_tokens_is_an_error() {
        let s = SynthSpec {
            tokens_per_slot: 300,
            ..spec()
        };
        assert!(matches!(generate(&s), Err(Error::InvalidSynthSpec(_))));
        let clash = SynthSpec {
            planted: vec![PlantedWord {
                word: "c1w2".into(),
                kind: PlantKind::Stable,
                before: 0,
                after: 0,
                per_slot: 1,
            }],
            ..spec()
        };
        assert!(clash.validate().is_err());
        let bad_slot = SynthSpec {
            planted: vec![PlantedWord {
                word: "x".into(),
                kind: PlantKind::AbruptShift { slot: 3 },
                before: 0,
                after: 1,
                per_slot: 1,
            }],
            ..spec()
        };
        assert!(bad_slot.validate().is_err());
    }

    #[test]
    fn spec_json_round_trip() {
        let json = serde_json::to_string(&spec()).unwrap();
        assert!(json.contains("\"abrupt_shift\":{\"slot\":1}"));
        let back: SynthSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(back, spec());
        let minimal: SynthSpec = serde_json::from_str(
            r#"{"slots":6,"tokens_per_slot":1000,"clusters":3,"planted":[{"word":"x","kind":"stable","before":1,"per_slot":5}]}"#,
        )
        .unwrap();
        assert_eq!(minimal.start_year, 1575);
        assert_eq!(minimal.stanza_len, 10);
    }
}
