//! Corpus ingestion and preparation.
//!
//! Stanzas are the document unit: every stanza is read from a JSON Lines
//! record, deduplicated on its first line, tokenized and lemmatized, then
//! assigned to one or more time slots before a vocabulary is built.

mod ingest;
mod slots;
mod text;
mod vocab;

use serde::{Deserialize, Serialize};

pub use ingest::{ingest, ingest_reader, write_jsonl, IngestOptions, IngestReport};
pub use slots::{assign, build_slots, SlotAssignment, TimeSlot, TimeSlotTable};
pub use text::{
    dedup_first_line, first_line_key, load_lemma_map, load_stopwords, normalize, parse_lemma_map, parse_stopwords,
    tokenize, LemmaMap, NormalizeReport, Stopwords,
};
pub use vocab::{build_vocab, Vocabulary, ALL_SLOT_MIN_COUNT};

pub const MIN_YEAR: i32 = 1000;
pub const MAX_YEAR: i32 = 2100;

/// One document unit of the corpus.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stanza {
    pub id: String,
    #[serde(default)]
    pub poem_id: String,
    pub author: String,
    pub year: i32,
    pub lines: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tokens: Vec<String>,
}

/// Size figures for a stanza collection.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct CorpusStats {
    pub tokens: usize,
    pub lines: usize,
    pub stanzas: usize,
    pub poems: usize,
    pub authors: usize,
}

impl CorpusStats {
    pub fn of(stanzas: &[Stanza]) -> Self {
        use std::collections::HashSet;
        let poems: HashSet<&str> = stanzas
            .iter()
            .map(|s| {
                if s.poem_id.is_empty() {
                    s.id.as_str()
                } else {
                    s.poem_id.as_str()
                }
            })
            .collect();
        let authors: HashSet<&str> = stanzas.iter().map(|s| s.author.as_str()).collect();
        CorpusStats {
            tokens: stanzas.iter().map(|s| s.tokens.len()).sum(),
            lines: stanzas.iter().map(|s| s.lines.len()).sum(),
            stanzas: stanzas.len(),
            poems: poems.len(),
            authors: authors.len(),
        }
    }
}
