//! Single-file index format.
//!
//! ```text
//! "DONUTIDX" u32:version
//! section*            tag:[u8;4] u64:length payload
//! sha256 of everything before it
//! ```
//!
//! Sections appear once each, in the order HEAD, DOCS, NORM, POST, VOCB.
//! Integers are little-endian; strings are u32 length plus UTF-8 bytes. The
//! output depends only on snapshot content, so equal snapshots give equal
//! files.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use sha2::{Digest, Sha256};

use super::{DocPositions, FieldIndex, FieldPrefix, IndexError, IndexSnapshot, PostingList};
use crate::bib::BibEntry;

pub const FORMAT_VERSION: u32 = 1;
const MAGIC: &[u8; 8] = b"DONUTIDX";
const SECTIONS: [&[u8; 4]; 5] = [b"HEAD", b"DOCS", b"NORM", b"POST", b"VOCB"];
const CHECKSUM_LEN: usize = 32;

#[derive(Default)]
struct Buf(Vec<u8>);

impl Buf {
    fn u32(&mut self, v: u32) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }

    fn u64(&mut self, v: u64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }

    fn str(&mut self, s: &str) {
        self.u32(s.len() as u32);
        self.0.extend_from_slice(s.as_bytes());
    }
}

struct Reader<'a> {
    data: &'a [u8],
    pos: usize,
}

fn corrupt(msg: impl Into<String>) -> IndexError {
    IndexError::Corrupt(msg.into())
}

impl<'a> Reader<'a> {
    fn new(data: &'a [u8]) -> Self {
        Reader { data, pos: 0 }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8], IndexError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.data.len()).ok_or_else(|| corrupt("truncated"))?;
        let out = &self.data[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn u32(&mut self) -> Result<u32, IndexError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> Result<u64, IndexError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn count(&mut self) -> Result<usize, IndexError> {
        let n = self.u32()? as usize;
        // every counted item takes at least one byte
        if n > self.data.len() - self.pos {
            return Err(corrupt("count exceeds remaining data"));
        }
        Ok(n)
    }

    fn str(&mut self) -> Result<&'a str, IndexError> {
        let n = self.u32()? as usize;
        std::str::from_utf8(self.take(n)?).map_err(|_| corrupt("string is not UTF-8"))
    }

    fn done(&self) -> bool {
        self.pos == self.data.len()
    }
}

impl IndexSnapshot {
    /// Serializes the snapshot in the on-disk format.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Buf::default();
        out.0.extend_from_slice(MAGIC);
        out.u32(FORMAT_VERSION);

        let mut head = Buf::default();
        head.u64(self.generation);
        head.u64(self.docs.len() as u64);

        let mut docs = Buf::default();
        for e in &self.docs {
            docs.str(&serde_json::to_string(e).expect("entries always serialize"));
        }

        let mut norm = Buf::default();
        let mut post = Buf::default();
        let mut vocb = Buf::default();
        for field in &self.fields {
            norm.u32(field.lengths.len() as u32);
            for &l in &field.lengths {
                norm.u32(l);
            }
            post.u32(field.terms.len() as u32);
            vocb.u32(field.terms.len() as u32);
            for (term, list) in &field.terms {
                post.str(term);
                post.u32(list.doc_freq() as u32);
                for d in list.iter() {
                    post.u32(d.doc);
                    post.u32(d.positions.len() as u32);
                    for &p in &d.positions {
                        post.u32(p);
                    }
                }
                vocb.str(term);
                vocb.u32(list.doc_freq() as u32);
            }
        }
        vocb.u32(self.lexicon.len() as u32);
        for (word, df) in &self.lexicon {
            vocb.str(word);
            vocb.u32(*df);
        }

        for (tag, payload) in SECTIONS.iter().zip([head, docs, norm, post, vocb]) {
            out.0.extend_from_slice(*tag);
            out.u64(payload.0.len() as u64);
            out.0.extend_from_slice(&payload.0);
        }
        let digest = Sha256::digest(&out.0);
        out.0.extend_from_slice(&digest);
        out.0
    }

    /// Parses and verifies bytes produced by [`IndexSnapshot::to_bytes`].
    pub fn from_bytes(bytes: &[u8]) -> Result<Self, IndexError> {
        if bytes.len() < MAGIC.len() + 4 + CHECKSUM_LEN {
            return Err(corrupt("file too short"));
        }
        let (body, checksum) = bytes.split_at(bytes.len() - CHECKSUM_LEN);
        if Sha256::digest(body).as_slice() != checksum {
            return Err(corrupt("checksum mismatch"));
        }
        let mut r = Reader::new(body);
        if r.take(MAGIC.len())? != MAGIC {
            return Err(corrupt("bad magic"));
        }
        let version = r.u32()?;
        if version != FORMAT_VERSION {
            return Err(IndexError::UnsupportedVersion(version));
        }
        let mut payloads = Vec::with_capacity(SECTIONS.len());
        for tag in SECTIONS {
            if r.take(4)? != tag {
                return Err(corrupt(format!("expected section {}", String::from_utf8_lossy(tag))));
            }
            let len = usize::try_from(r.u64()?).map_err(|_| corrupt("section too large"))?;
            payloads.push(r.take(len)?);
        }
        if !r.done() {
            return Err(corrupt("trailing data after sections"));
        }

        let mut head = Reader::new(payloads[0]);
        let generation = head.u64()?;
        let doc_count = usize::try_from(head.u64()?).map_err(|_| corrupt("doc count too large"))?;

        let mut docs_r = Reader::new(payloads[1]);
        let mut docs = Vec::with_capacity(doc_count.min(payloads[1].len()));
        for _ in 0..doc_count {
            let e: BibEntry = serde_json::from_str(docs_r.str()?).map_err(|e| corrupt(format!("bad entry: {e}")))?;
            docs.push(e);
        }

        let mut norm = Reader::new(payloads[2]);
        let mut post = Reader::new(payloads[3]);
        let mut vocb = Reader::new(payloads[4]);
        let mut fields = Vec::with_capacity(FieldPrefix::ALL.len());
        for prefix in FieldPrefix::ALL {
            let n = norm.count()?;
            if n != doc_count {
                return Err(corrupt(format!("{prefix}: {n} lengths for {doc_count} documents")));
            }
            let lengths = (0..n).map(|_| norm.u32()).collect::<Result<Vec<_>, _>>()?;

            let term_count = post.count()?;
            if vocb.count()? != term_count {
                return Err(corrupt(format!("{prefix}: vocabulary and postings disagree on term count")));
            }
            let mut terms = BTreeMap::new();
            for _ in 0..term_count {
                let term = post.str()?.to_string();
                let df = post.count()?;
                let mut entries = Vec::with_capacity(df);
                for _ in 0..df {
                    let doc = post.u32()?;
                    if doc as usize >= doc_count || entries.last().is_some_and(|p: &DocPositions| p.doc >= doc) {
                        return Err(corrupt(format!("{prefix}:{term}: bad document id {doc}")));
                    }
                    let np = post.count()?;
                    let positions = (0..np).map(|_| post.u32()).collect::<Result<Vec<_>, _>>()?;
                    if positions.is_empty() || positions.windows(2).any(|w| w[0] >= w[1]) {
                        return Err(corrupt(format!("{prefix}:{term}: positions not strictly increasing")));
                    }
                    entries.push(DocPositions { doc, positions });
                }
                let vterm = vocb.str()?;
                let vdf = vocb.u32()? as usize;
                if vterm != term || vdf != df {
                    return Err(corrupt(format!("{prefix}:{term}: vocabulary frequency does not match postings")));
                }
                if terms.insert(term, PostingList { entries }).is_some() {
                    return Err(corrupt(format!("{prefix}: duplicate term")));
                }
            }
            fields.push(FieldIndex { terms, lengths });
        }
        let mut lexicon = BTreeMap::new();
        for _ in 0..vocb.count()? {
            let word = vocb.str()?.to_string();
            lexicon.insert(word, vocb.u32()?);
        }
        if !(docs_r.done() && norm.done() && post.done() && vocb.done() && head.done()) {
            return Err(corrupt("section has trailing bytes"));
        }
        Ok(IndexSnapshot::assemble(generation, docs, fields, lexicon))
    }
}

/// Writes the index atomically: a temporary sibling file is renamed over
/// `path`.
pub fn write_index_file(path: &Path, snapshot: &IndexSnapshot) -> Result<(), IndexError> {
    let bytes = snapshot.to_bytes();
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_else(|| "index".into());
    let tmp = dir.join(format!(".{name}.tmp"));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(&bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn read_index_file(path: &Path) -> Result<IndexSnapshot, IndexError> {
    IndexSnapshot::from_bytes(&fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index::build_index;

    fn sample() -> IndexSnapshot {
        let e = BibEntry::new("article", "k")
            .with_field("title", "Persistent homology of high-dimensional data")
            .with_field("author", "Dłotko, Paweł")
            .with_field("year", "2019")
            .with_tag("area:medicine")
            .with_tag("tool:persistent homology")
            .with_tag("input:point cloud");
        build_index(&[e]).unwrap()
    }

    #[test]
    fn round_trip() {
        let s = sample();
        let bytes = s.to_bytes();
        assert_eq!(&bytes[..8], b"DONUTIDX");
        assert_eq!(IndexSnapshot::from_bytes(&bytes).unwrap(), s);
        assert_eq!(IndexSnapshot::from_bytes(&IndexSnapshot::empty().to_bytes()).unwrap(), IndexSnapshot::empty());
    }

    #[test]
    fn every_flipped_byte_is_detected() {
        let bytes = sample().to_bytes();
        for i in (0..bytes.len()).step_by(7) {
            let mut b = bytes.clone();
            b[i] ^= 0x40;
            assert!(IndexSnapshot::from_bytes(&b).is_err(), "flip at {i} accepted");
        }
        assert!(IndexSnapshot::from_bytes(&bytes[..bytes.len() - 1]).is_err());
    }

    #[test]
    fn version_is_checked() {
        let mut bytes = sample().to_bytes();
        bytes[8] = 2;
        let body = bytes.len() - CHECKSUM_LEN;
        let digest = Sha256::digest(&bytes[..body]);
        bytes[body..].copy_from_slice(&digest);
        assert!(matches!(IndexSnapshot::from_bytes(&bytes), Err(IndexError::UnsupportedVersion(2))));
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("donut.idx");
        write_index_file(&path, &sample()).unwrap();
        assert_eq!(read_index_file(&path).unwrap(), sample());
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
