use std::collections::HashMap;

use super::{SlotAssignment, Stanza};
use crate::error::{Error, Result};

/// Per-slot count a word needs in every slot to be considered an "all-slot" word.
pub const ALL_SLOT_MIN_COUNT: u64 = 50;

/// Word index with global and per-slot frequencies.
///
/// Indices are assigned by descending global count (ties: lexicographic), so
/// index order doubles as frequency rank.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    words: Vec<String>,
    index: HashMap<String, usize>,
    global_count: Vec<u64>,
    /// `[slot][word]`
    slot_count: Vec<Vec<u64>>,
    slot_tokens: Vec<u64>,
}

impl Vocabulary {
    pub fn from_parts(words: Vec<String>, global_count: Vec<u64>, slot_count: Vec<Vec<u64>>) -> Result<Self> {
        if words.len() != global_count.len() || slot_count.iter().any(|c| c.len() != words.len()) {
            return Err(Error::DimensionMismatch("vocabulary parts disagree in length".into()));
        }
        let mut index = HashMap::with_capacity(words.len());
        for (i, w) in words.iter().enumerate() {
            if index.insert(w.clone(), i).is_some() {
                return Err(Error::CorruptModel(format!("duplicate vocabulary word {w:?}")));
            }
        }
        let slot_tokens = slot_count.iter().map(|c| c.iter().sum()).collect();
        Ok(Vocabulary {
            words,
            index,
            global_count,
            slot_count,
            slot_tokens,
        })
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn num_slots(&self) -> usize {
        self.slot_count.len()
    }

    pub fn index_of(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn word(&self, index: usize) -> &str {
        &self.words[index]
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn global_count(&self, index: usize) -> u64 {
        self.global_count[index]
    }

    pub fn global_counts(&self) -> &[u64] {
        &self.global_count
    }

    pub fn slot_count(&self, slot: usize, index: usize) -> u64 {
        self.slot_count[slot][index]
    }

    pub fn slot_counts(&self) -> &[Vec<u64>] {
        &self.slot_count
    }

    /// In-vocabulary tokens per slot.
    pub fn slot_tokens(&self) -> &[u64] {
        &self.slot_tokens
    }

    /// Counts of one word across all slots.
    pub fn counts_across_slots(&self, index: usize) -> Vec<u64> {
        self.slot_count.iter().map(|c| c[index]).collect()
    }

    pub fn is_all_slot(&self, index: usize, min_per_slot: u64) -> bool {
        self.slot_count.iter().all(|c| c[index] >= min_per_slot)
    }

    pub fn all_slot_words(&self, min_per_slot: u64) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.is_all_slot(i, min_per_slot)).collect()
    }

    /// Maps tokens to indices, dropping out-of-vocabulary tokens.
    pub fn encode(&self, tokens: &[String]) -> Vec<u32> {
        tokens
            .iter()
            .filter_map(|t| self.index_of(t).map(|i| i as u32))
            .collect()
    }
}

/// Counts tokens of assigned stanzas and keeps words with `global_count >= min_count`.
///
/// Global counts see every assigned stanza once; per-slot counts see it once per
/// slot it belongs to, so with sliding slots they can sum past the global count.
pub fn build_vocab(stanzas: &[Stanza], assignment: &SlotAssignment, min_count: u64) -> Result<Vocabulary> {
    let mut global: HashMap<&str, u64> = HashMap::new();
    for i in assignment.assigned_stanzas() {
        for t in &stanzas[i].tokens {
            *global.entry(t.as_str()).or_default() += 1;
        }
    }
    let mut kept: Vec<(&str, u64)> = global.into_iter().filter(|&(_, c)| c >= min_count).collect();
    if kept.is_empty() {
        return Err(Error::EmptyVocabulary { min_count });
    }
    kept.sort_unstable_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));

    let words: Vec<String> = kept.iter().map(|(w, _)| w.to_string()).collect();
    let global_count: Vec<u64> = kept.iter().map(|&(_, c)| c).collect();
    let index: HashMap<&str, usize> = kept.iter().enumerate().map(|(i, (w, _))| (*w, i)).collect();

    let slot_count = assignment
        .per_slot
        .iter()
        .map(|docs| {
            let mut counts = vec![0u64; words.len()];
            for &d in docs {
                for t in &stanzas[d].tokens {
                    if let Some(&i) = index.get(t.as_str()) {
                        counts[i] += 1;
                    }
                }
            }
            counts
        })
        .collect();
    Vocabulary::from_parts(words, global_count, slot_count)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{assign, build_slots};

    fn doc(id: &str, year: i32, text: &str) -> Stanza {
        Stanza {
            id: id.into(),
            poem_id: String::new(),
            author: "a".into(),
            year,
            lines: vec![text.into()],
            tokens: text.split_whitespace().map(String::from).collect(),
        }
    }

    #[test]
    fn min_count_filters_words() {
        let table = build_slots(1600, 1700, 50, 50, false).unwrap();
        let stanzas = vec![doc("1", 1610, "a a b"), doc("2", 1660, "a")];
        let a = assign(&stanzas, &table);
        let v = build_vocab(&stanzas, &a, 2).unwrap();
        assert_eq!(v.words(), &["a".to_string()]);
        let v1 = build_vocab(&stanzas, &a, 1).unwrap();
        assert_eq!(v1.len(), 2);
        assert_eq!(v1.counts_across_slots(0), vec![2, 1]);
        assert!(matches!(
            build_vocab(&stanzas, &a, 10),
            Err(Error::EmptyVocabulary { .. })
        ));
    }

    #[test]
    fn fixed_mode_slot_counts_sum_to_global() {
        let table = build_slots(1600, 1750, 50, 50, false).unwrap();
        let stanzas = vec![
            doc("1", 1610, "x y x"),
            doc("2", 1660, "y z"),
            doc("3", 1720, "x z z"),
            doc("4", 1800, "x x x x"),
        ];
        let a = assign(&stanzas, &table);
        let v = build_vocab(&stanzas, &a, 1).unwrap();
        for i in 0..v.len() {
            assert_eq!(v.counts_across_slots(i).iter().sum::<u64>(), v.global_count(i));
        }
        // out-of-range stanza not counted
        assert_eq!(v.global_count(v.index_of("x").unwrap()), 3);
        for (i, w) in v.words().iter().enumerate() {
            assert_eq!(v.index_of(w), Some(i));
        }
    }

    #[test]
    fn sliding_mode_counts_overlap() {
        let table = build_slots(1600, 1700, 50, 25, false).unwrap();
        let stanzas = vec![doc("1", 1630, "w")];
        let a = assign(&stanzas, &table);
        let v = build_vocab(&stanzas, &a, 1).unwrap();
        assert_eq!(v.global_count(0), 1);
        assert_eq!(v.counts_across_slots(0).iter().sum::<u64>(), 2);
    }

    #[test]
    fn all_slot_flag() {
        let table = build_slots(1600, 1700, 50, 50, false).unwrap();
        let many = vec!["h"; 50].join(" ");
        let stanzas = vec![doc("1", 1610, &many), doc("2", 1660, &format!("{many} r"))];
        let a = assign(&stanzas, &table);
        let v = build_vocab(&stanzas, &a, 1).unwrap();
        assert_eq!(v.all_slot_words(ALL_SLOT_MIN_COUNT), vec![v.index_of("h").unwrap()]);
    }
}
