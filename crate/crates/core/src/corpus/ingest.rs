use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::Deserialize;

use super::{Stanza, MAX_YEAR, MIN_YEAR};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default)]
pub struct IngestOptions {
    /// Abort on the first malformed line instead of skipping it.
    pub strict: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IngestReport {
    pub stanzas: Vec<Stanza>,
    pub missing_year: usize,
    pub invalid_year: usize,
    pub malformed: usize,
}

impl IngestReport {
    pub fn dropped(&self) -> usize {
        self.missing_year + self.invalid_year + self.malformed
    }
}

// Unknown keys are ignored by serde's default behaviour.
#[derive(Deserialize)]
struct RawRecord {
    id: String,
    #[serde(default)]
    poem_id: Option<String>,
    author: String,
    #[serde(default)]
    year: Option<i64>,
    lines: Vec<String>,
    #[serde(default)]
    tokens: Vec<String>,
}

pub fn ingest(path: &Path, options: IngestOptions) -> Result<IngestReport> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    ingest_reader(BufReader::new(file), options)
}

pub fn ingest_reader<R: BufRead>(reader: R, options: IngestOptions) -> Result<IngestReport> {
    let mut report = IngestReport::default();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: RawRecord = match serde_json::from_str(&line) {
            Ok(r) => r,
            Err(e) => {
                if options.strict {
                    return Err(Error::MalformedRecord {
                        line: line_no,
                        message: e.to_string(),
                    });
                }
                log::warn!("skipping malformed record at line {line_no}: {e}");
                report.malformed += 1;
                continue;
            }
        };
        let Some(year) = record.year else {
            log::debug!("dropping record {:?}: no year", record.id);
            report.missing_year += 1;
            continue;
        };
        if !(MIN_YEAR as i64..=MAX_YEAR as i64).contains(&year) {
            log::debug!("dropping record {:?}: year {year} out of range", record.id);
            report.invalid_year += 1;
            continue;
        }
        report.stanzas.push(Stanza {
            id: record.id,
            poem_id: record.poem_id.unwrap_or_default(),
            author: record.author,
            year: year as i32,
            lines: record.lines,
            tokens: record.tokens,
        });
    }
    Ok(report)
}

/// Writes stanzas as JSON Lines, one record per stanza (tokens included when present).
pub fn write_jsonl(path: &Path, stanzas: &[Stanza]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    for stanza in stanzas {
        serde_json::to_writer(&mut out, stanza).map_err(|e| Error::Stream(e.into()))?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}
