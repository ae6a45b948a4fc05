//! Binary model file, little-endian:
//!
//! ```text
//! "DLKV" | version u32 | d u32 | |V| u32 | slots u32
//! slots × (start i32, end i32)
//! |V| × (byte length u32, UTF-8 word, global count u64)   -- index order
//! W_main, W_t for each slot, C                            -- row-major f32
//! slots × |V| × u64 per-slot counts
//! ```

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{EmbeddingMatrix, JointEmbeddingModel};
use crate::corpus::{TimeSlotTable, Vocabulary};
use crate::error::{Error, Result};

pub const MODEL_MAGIC: &[u8; 4] = b"DLKV";
pub const MODEL_VERSION: u32 = 1;

pub fn write_model<W: Write>(model: &JointEmbeddingModel, out: &mut W) -> Result<()> {
    let vocab = &model.vocab;
    out.write_all(MODEL_MAGIC)?;
    for v in [
        MODEL_VERSION,
        model.dim() as u32,
        vocab.len() as u32,
        model.num_slots() as u32,
    ] {
        out.write_all(&v.to_le_bytes())?;
    }
    for slot in &model.slots.slots {
        out.write_all(&slot.start.to_le_bytes())?;
        out.write_all(&slot.end.to_le_bytes())?;
    }
    for (i, word) in vocab.words().iter().enumerate() {
        out.write_all(&(word.len() as u32).to_le_bytes())?;
        out.write_all(word.as_bytes())?;
        out.write_all(&vocab.global_count(i).to_le_bytes())?;
    }
    let matrices = std::iter::once(&model.main)
        .chain(&model.deltas)
        .chain(std::iter::once(&model.context));
    for m in matrices {
        for x in m.as_slice() {
            out.write_all(&x.to_le_bytes())?;
        }
    }
    for counts in vocab.slot_counts() {
        for c in counts {
            out.write_all(&c.to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn save_model(model: &JointEmbeddingModel, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    write_model(model, &mut out)?;
    out.flush()?;
    Ok(())
}

struct Reader<R> {
    inner: R,
}

impl<R: Read> Reader<R> {
    fn bytes<const N: usize>(&mut self, what: &str) -> Result<[u8; N]> {
        let mut buf = [0u8; N];
        self.inner.read_exact(&mut buf).map_err(|e| truncated(e, what))?;
        Ok(buf)
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        self.bytes::<4>(what).map(u32::from_le_bytes)
    }

    fn i32(&mut self, what: &str) -> Result<i32> {
        self.bytes::<4>(what).map(i32::from_le_bytes)
    }

    fn u64(&mut self, what: &str) -> Result<u64> {
        self.bytes::<8>(what).map(u64::from_le_bytes)
    }

    fn matrix(&mut self, rows: usize, dim: usize, what: &str) -> Result<EmbeddingMatrix> {
        let mut raw = vec![0u8; rows * dim * 4];
        self.inner.read_exact(&mut raw).map_err(|e| truncated(e, what))?;
        let data = raw
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
            .collect();
        EmbeddingMatrix::from_vec(rows, dim, data)
    }
}

fn truncated(e: std::io::Error, what: &str) -> Error {
    if e.kind() == std::io::ErrorKind::UnexpectedEof {
        Error::CorruptModel(format!("file truncated while reading {what}"))
    } else {
        Error::Stream(e)
    }
}

// Guards allocation sizes read from a corrupt header.
const MAX_WORD_BYTES: u32 = 1 << 16;

pub fn read_model<R: Read>(input: R) -> Result<JointEmbeddingModel> {
    let mut r = Reader { inner: input };
    let magic = r.bytes::<4>("magic").map_err(|_| Error::NotAModelFile)?;
    if &magic != MODEL_MAGIC {
        return Err(Error::NotAModelFile);
    }
    let version = r.u32("version")?;
    if version != MODEL_VERSION {
        return Err(Error::UnsupportedVersion(version));
    }
    let dim = r.u32("dimension")? as usize;
    let vocab_len = r.u32("vocabulary size")? as usize;
    let num_slots = r.u32("slot count")? as usize;
    if dim == 0 {
        return Err(Error::CorruptModel("zero embedding dimension".into()));
    }

    let mut bounds = Vec::with_capacity(num_slots.min(1 << 12));
    for _ in 0..num_slots {
        bounds.push((r.i32("slot start")?, r.i32("slot end")?));
    }
    let slots = TimeSlotTable::from_bounds(&bounds).map_err(|e| Error::CorruptModel(e.to_string()))?;

    let mut words = Vec::with_capacity(vocab_len.min(1 << 20));
    let mut global = Vec::with_capacity(vocab_len.min(1 << 20));
    for _ in 0..vocab_len {
        let len = r.u32("word length")?;
        if len > MAX_WORD_BYTES {
            return Err(Error::CorruptModel(format!("word length {len}")));
        }
        let mut raw = vec![0u8; len as usize];
        r.inner.read_exact(&mut raw).map_err(|e| truncated(e, "word"))?;
        let word = String::from_utf8(raw).map_err(|_| Error::CorruptModel("word is not UTF-8".into()))?;
        words.push(word);
        global.push(r.u64("global count")?);
    }

    let main = r.matrix(vocab_len, dim, "main matrix")?;
    let deltas = (0..num_slots)
        .map(|_| r.matrix(vocab_len, dim, "slot matrix"))
        .collect::<Result<Vec<_>>>()?;
    let context = r.matrix(vocab_len, dim, "context matrix")?;
    let mut slot_counts = vec![vec![0u64; vocab_len]; num_slots];
    for counts in &mut slot_counts {
        for c in counts.iter_mut() {
            *c = r.u64("per-slot counts")?;
        }
    }
    let mut trailing = [0u8; 1];
    if r.inner.read(&mut trailing)? != 0 {
        return Err(Error::CorruptModel("trailing bytes after model".into()));
    }

    let vocab = Vocabulary::from_parts(words, global, slot_counts)?;
    JointEmbeddingModel::new(vocab, slots, main, deltas, context)
}

pub fn load_model(path: &Path) -> Result<JointEmbeddingModel> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_model(BufReader::new(file))
}

#[cfg(test)]
mod tests {
    use super::super::test_support::tiny_model;
    use super::*;

    fn model() -> JointEmbeddingModel {
        tiny_model(
            &["liebe", "herz", "größe"],
            &[&[1.0, -0.5], &[0.25, 3.0], &[f32::MIN_POSITIVE, -0.0]],
            [
                &[&[0.1, 0.2], &[0.0, 0.0], &[1e-7, 5.0]],
                &[&[0.0, 0.0], &[-2.0, 0.5], &[0.0, 0.0]],
            ],
        )
    }

    #[test]
    fn round_trip_is_byte_exact() {
        let m = model();
        let mut bytes = Vec::new();
        write_model(&m, &mut bytes).unwrap();
        let back = read_model(bytes.as_slice()).unwrap();
        assert_eq!(back, m);
        let mut again = Vec::new();
        write_model(&back, &mut again).unwrap();
        assert_eq!(bytes, again);
        assert_eq!(&bytes[..4], b"DLKV");
    }

    #[test]
    fn truncated_file_is_an_error() {
        let mut bytes = Vec::new();
        write_model(&model(), &mut bytes).unwrap();
        for cut in [3, 10, 30, bytes.len() / 2, bytes.len() - 1] {
            let err = read_model(&bytes[..cut]).unwrap_err();
            assert!(
                matches!(err, Error::CorruptModel(_) | Error::NotAModelFile),
                "cut {cut}: {err}"
            );
        }
    }

    #[test]
    fn wrong_magic_and_version() {
        let mut bytes = Vec::new();
        write_model(&model(), &mut bytes).unwrap();
        let mut bad = bytes.clone();
        bad[0] = b'X';
        let err = read_model(bad.as_slice()).unwrap_err();
        assert!(matches!(err, Error::NotAModelFile));
        assert_eq!(err.to_string(), "not a model file (bad magic)");
        let mut v2 = bytes;
        v2[4] = 2;
        assert!(matches!(read_model(v2.as_slice()), Err(Error::UnsupportedVersion(2))));
    }
}
