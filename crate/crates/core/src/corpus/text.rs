use std::collections::{HashMap, HashSet};
use std::path::Path;

use super::Stanza;
use crate::error::{Error, Result};

pub type LemmaMap = HashMap<String, String>;
pub type Stopwords = HashSet<String>;

/// Splits on Unicode whitespace, strips leading/trailing punctuation and lowercases.
pub fn tokenize(line: &str) -> impl Iterator<Item = String> + '_ {
    line.split_whitespace().filter_map(|raw| {
        let trimmed = raw.trim_matches(|c: char| !c.is_alphanumeric());
        (!trimmed.is_empty()).then(|| trimmed.to_lowercase())
    })
}

/// Dedup key of a line: casefolded, punctuation removed, whitespace collapsed.
pub fn first_line_key(line: &str) -> String {
    let cleaned: String = line
        .to_lowercase()
        .chars()
        .filter(|c| c.is_alphanumeric() || c.is_whitespace())
        .collect();
    cleaned.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Keeps, for every normalized first line, only the earliest stanza (smallest id on equal years).
///
/// Retained stanzas keep their input order. Stanzas without lines are never merged.
pub fn dedup_first_line(stanzas: Vec<Stanza>) -> Vec<Stanza> {
    let mut winner: HashMap<String, usize> = HashMap::new();
    for (i, s) in stanzas.iter().enumerate() {
        let Some(first) = s.lines.first() else { continue };
        winner
            .entry(first_line_key(first))
            .and_modify(|w| {
                let cur = &stanzas[*w];
                if (s.year, &s.id) < (cur.year, &cur.id) {
                    *w = i;
                }
            })
            .or_insert(i);
    }
    let keep: HashSet<usize> = winner.into_values().collect();
    stanzas
        .into_iter()
        .enumerate()
        .filter(|(i, s)| s.lines.is_empty() || keep.contains(i))
        .map(|(_, s)| s)
        .collect()
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NormalizeReport {
    pub stanzas: Vec<Stanza>,
    pub dropped_empty: usize,
}

/// Fills `tokens` for every stanza and drops stanzas left without tokens.
/// Stopwords are kept; they are filtered at analysis time.
pub fn normalize(stanzas: Vec<Stanza>, lemma_map: &LemmaMap) -> NormalizeReport {
    use rayon::prelude::*;

    let normalized: Vec<Stanza> = stanzas
        .into_par_iter()
        .map(|mut s| {
            s.tokens = s
                .lines
                .iter()
                .flat_map(|l| tokenize(l))
                .map(|t| lemma_map.get(&t).cloned().unwrap_or(t))
                .collect();
            s
        })
        .collect();
    let mut report = NormalizeReport::default();
    for s in normalized {
        if s.tokens.is_empty() {
            log::debug!("dropping stanza {:?}: no tokens after normalization", s.id);
            report.dropped_empty += 1;
        } else {
            report.stanzas.push(s);
        }
    }
    report
}

/// Parses `token<TAB>lemma` lines; later duplicates override earlier ones.
/// Keys and values are lowercased to match the tokenizer's output.
pub fn parse_lemma_map(text: &str) -> LemmaMap {
    let mut map = LemmaMap::new();
    for line in text.lines() {
        let Some((token, lemma)) = line.split_once('\t') else {
            continue;
        };
        let (token, lemma) = (token.trim(), lemma.trim());
        if token.is_empty() || lemma.is_empty() {
            continue;
        }
        map.insert(token.to_lowercase(), lemma.to_lowercase());
    }
    map
}

pub fn load_lemma_map(path: &Path) -> Result<LemmaMap> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(parse_lemma_map(&text))
}

/// One word per line; `#` starts a comment line.
pub fn parse_stopwords(text: &str) -> Stopwords {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_lowercase)
        .collect()
}

pub fn load_stopwords(path: &Path) -> Result<Stopwords> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(parse_stopwords(&text))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn stanza(id: &str, year: i32, first: &str) -> Stanza {
        Stanza {
            id: id.into(),
            poem_id: String::new(),
            author: "a".into(),
            year,
            lines: vec![first.into(), "zweite zeile".into()],
            tokens: vec![],
        }
    }

    #[test]
    fn tokenizer_strips_and_lowercases() {
        let toks: Vec<_> = tokenize("  Die Liebe, blüht! — «Herz»  ").collect();
        assert_eq!(toks, vec!["die", "liebe", "blüht", "herz"]);
    }

    #[test]
    fn normalize_applies_lemma_map() {
        let map = parse_lemma_map("blüht\tblühen\n");
        let mut s = stanza("a", 1700, "Die Liebe blüht.");
        s.lines = vec!["Die Liebe blüht.".into(), "".into()];
        let out = normalize(vec![s], &map);
        assert_eq!(out.stanzas[0].tokens, vec!["die", "liebe", "blühen"]);
    }

    #[test]
    fn unmapped_token_passes_through_and_empty_stanza_dropped() {
        let map = LemmaMap::new();
        let mut empty = stanza("e", 1700, "");
        empty.lines = vec!["".into(), " ... ".into()];
        let out = normalize(vec![stanza("a", 1700, "Herz"), empty], &map);
        assert_eq!(out.stanzas.len(), 1);
        assert_eq!(out.stanzas[0].tokens, vec!["herz", "zweite", "zeile"]);
        assert_eq!(out.dropped_empty, 1);
    }

    #[test]
    fn lemma_map_later_duplicates_override() {
        let map = parse_lemma_map("Herzen\therz\nherzen\tHERZE\nbroken line\n");
        assert_eq!(map.len(), 1);
        assert_eq!(map["herzen"], "herze");
    }

    #[test]
    fn stopword_comments_ignored() {
        let sw = parse_stopwords("# german\nder\nDie\n\n");
        assert_eq!(sw.len(), 2);
        assert!(sw.contains("die"));
    }

    #[test]
    fn dedup_keeps_earliest() {
        let out = dedup_first_line(vec![
            stanza("b", 1800, "Ich liebe dich"),
            stanza("a", 1700, "Ich liebe dich"),
        ]);
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].year, 1700);
    }

    #[test]
    fn dedup_ties_break_on_smallest_id_and_ignores_orthography() {
        let out = dedup_first_line(vec![
            stanza("z", 1700, "Ich  liebe Dich!"),
            stanza("m", 1700, "ich liebe dich"),
            stanza("q", 1600, "Anders"),
        ]);
        let ids: Vec<_> = out.iter().map(|s| s.id.as_str()).collect();
        assert_eq!(ids, vec!["m", "q"]);
    }

    #[test]
    fn dedup_distinct_first_lines_unchanged() {
        let input = vec![stanza("a", 1700, "eins"), stanza("b", 1600, "zwei")];
        assert_eq!(dedup_first_line(input.clone()), input);
    }

    proptest! {
        #[test]
        fn dedup_is_idempotent(
            rows in prop::collection::vec((0u8..6, 1600i32..1610, 0u8..4), 0..40)
        ) {
            let stanzas: Vec<Stanza> = rows
                .iter()
                .enumerate()
                .map(|(i, (line, year, case))| {
                    let text = if *case == 0 { format!("Zeile {line}!") } else { format!("zeile {line}") };
                    stanza(&format!("s{i:02}"), *year, &text)
                })
                .collect();
            let once = dedup_first_line(stanzas);
            let twice = dedup_first_line(once.clone());
            prop_assert_eq!(once, twice);
        }
    }
}
