//! Index file container.
//!
//! ```text
//! header   "TBIX" | version u32 | doc_count u32 | term_count u32
//! postings term_count x ( df u32 | byte_len u32 | vbyte bytes )
//! sections ( tag [4]u8 | payload_len u64 | payload )*
//! ```
//!
//! All integers are little-endian. Known section tags:
//!
//! - `VOCB`: term_count x ( byte_len u32 | UTF-8 token ), in TermId order.
//! - `TIER`: k u32, then per term a tier-1 record and a tier-2 record, each
//!   laid out like a postings record.
//! - `BLOK`: beta u32 | hybrid_threshold u32, then per term a block-id record
//!   (laid out like a postings record) and a `u8` flag; flag 1 is followed by
//!   the term's exact postings record.
//!
//! Readers skip sections with unknown tags.

use std::io::Write;

use crate::corpus::Vocabulary;
use crate::index::{
    decode_postings, encode_postings, CompressedPostings, DecodeError, InvertedIndex, PostingsList,
};
use crate::partition::{BlockIndex, TieredIndex};

pub const MAGIC: [u8; 4] = *b"TBIX";
pub const VERSION: u32 = 1;
pub const TAG_VOCAB: [u8; 4] = *b"VOCB";
pub const TAG_TIER: [u8; 4] = *b"TIER";
pub const TAG_BLOCKS: [u8; 4] = *b"BLOK";

#[derive(thiserror::Error, Debug)]
pub enum FormatError {
    #[error("bad magic at offset 0")]
    BadMagic,
    #[error("unsupported format version {0}")]
    UnsupportedVersion(u32),
    #[error("unexpected end of file at offset {offset}")]
    UnexpectedEof { offset: u64 },
    #[error("corrupt record at offset {offset}: {source}")]
    Record { offset: u64, source: DecodeError },
    #[error("invalid UTF-8 token at offset {offset}")]
    BadToken { offset: u64 },
    #[error("inconsistent {what} at offset {offset}")]
    Inconsistent { offset: u64, what: &'static str },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl FormatError {
    pub fn offset(&self) -> Option<u64> {
        match self {
            FormatError::BadMagic => Some(0),
            FormatError::UnexpectedEof { offset }
            | FormatError::Record { offset, .. }
            | FormatError::BadToken { offset }
            | FormatError::Inconsistent { offset, .. } => Some(*offset),
            FormatError::UnsupportedVersion(_) => Some(4),
            FormatError::Io(_) => None,
        }
    }
}

/// Everything stored in one index file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexFile {
    pub index: InvertedIndex,
    pub vocab: Option<Vocabulary>,
    pub tiered: Option<TieredIndex>,
    pub blocks: Option<BlockIndex>,
}

impl IndexFile {
    pub fn new(index: InvertedIndex, vocab: Option<Vocabulary>) -> Self {
        Self {
            index,
            vocab,
            tiered: None,
            blocks: None,
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(&MAGIC);
        put_u32(&mut out, VERSION);
        put_u32(&mut out, self.index.doc_count() as u32);
        put_u32(&mut out, self.index.term_count() as u32);
        for c in self.index.compressed_lists() {
            put_record(&mut out, c);
        }
        if let Some(vocab) = &self.vocab {
            let mut payload = Vec::new();
            for term in vocab.terms() {
                put_u32(&mut payload, term.len() as u32);
                payload.extend_from_slice(term.as_bytes());
            }
            put_section(&mut out, TAG_VOCAB, &payload);
        }
        if let Some(tiered) = &self.tiered {
            let mut payload = Vec::new();
            put_u32(&mut payload, tiered.k());
            for t in 0..tiered.term_count() as u32 {
                put_record(&mut payload, &encode_postings(tiered.tier1(t)));
                put_record(&mut payload, &encode_postings(tiered.tier2(t)));
            }
            put_section(&mut out, TAG_TIER, &payload);
        }
        if let Some(blocks) = &self.blocks {
            let mut payload = Vec::new();
            put_u32(&mut payload, blocks.beta());
            put_u32(&mut payload, blocks.hybrid_threshold());
            for t in 0..blocks.term_count() as u32 {
                let ids = PostingsList::new(blocks.block_list(t).to_vec())
                    .expect("block lists are strictly increasing");
                put_record(&mut payload, &encode_postings(&ids));
                match blocks.hybrid_list(t) {
                    Some(list) => {
                        payload.push(1);
                        put_record(&mut payload, &encode_postings(list));
                    }
                    None => payload.push(0),
                }
            }
            put_section(&mut out, TAG_BLOCKS, &payload);
        }
        out
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        w.write_all(&self.to_bytes())
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, FormatError> {
        let mut r = Reader { buf: bytes, pos: 0 };
        if bytes.len() < 4 || bytes[..4] != MAGIC {
            return Err(FormatError::BadMagic);
        }
        r.pos = 4;
        let version = r.u32()?;
        if version != VERSION {
            return Err(FormatError::UnsupportedVersion(version));
        }
        let doc_count = r.u32()? as usize;
        let term_count = r.u32()? as usize;
        let mut lists = Vec::with_capacity(term_count.min(1 << 20));
        for _ in 0..term_count {
            let at = r.pos as u64;
            let c = r.record()?;
            let list =
                decode_postings(&c).map_err(|source| FormatError::Record { offset: at, source })?;
            if list.last().is_some_and(|&d| d as usize >= doc_count) {
                return Err(FormatError::Inconsistent {
                    offset: at,
                    what: "doc id beyond doc_count",
                });
            }
            lists.push(c);
        }
        let mut file = IndexFile::new(InvertedIndex::from_parts(lists, doc_count), None);

        while r.pos < bytes.len() {
            let tag_at = r.pos as u64;
            let tag: [u8; 4] = r.take(4)?.try_into().expect("4 bytes");
            let len = r.u64()?;
            let start = r.pos;
            let payload = r.take(
                usize::try_from(len).map_err(|_| FormatError::UnexpectedEof { offset: tag_at })?,
            )?;
            let mut sub = Reader {
                buf: &bytes[..start + payload.len()],
                pos: start,
            };
            match tag {
                TAG_VOCAB => file.vocab = Some(read_vocab(&mut sub, term_count)?),
                TAG_TIER => file.tiered = Some(read_tier(&mut sub, &file.index)?),
                TAG_BLOCKS => file.blocks = Some(read_blocks(&mut sub, &file.index)?),
                _ => continue,
            }
            if sub.pos != sub.buf.len() {
                return Err(FormatError::Inconsistent {
                    offset: sub.pos as u64,
                    what: "section length",
                });
            }
        }
        Ok(file)
    }
}

fn read_vocab(r: &mut Reader<'_>, term_count: usize) -> Result<Vocabulary, FormatError> {
    let mut terms = Vec::with_capacity(term_count.min(1 << 20));
    for _ in 0..term_count {
        let len = r.u32()? as usize;
        let at = r.pos as u64;
        let raw = r.take(len)?;
        let s = std::str::from_utf8(raw).map_err(|_| FormatError::BadToken { offset: at })?;
        if terms.last().is_some_and(|prev: &String| prev.as_str() >= s) {
            return Err(FormatError::Inconsistent {
                offset: at,
                what: "vocabulary order",
            });
        }
        terms.push(s.to_owned());
    }
    Ok(Vocabulary::new(terms))
}

fn read_tier(r: &mut Reader<'_>, index: &InvertedIndex) -> Result<TieredIndex, FormatError> {
    let k_at = r.pos as u64;
    let k = r.u32()?;
    let mut tier1 = Vec::with_capacity(index.term_count());
    let mut tier2 = Vec::with_capacity(index.term_count());
    for t in 0..index.term_count() as u32 {
        let at = r.pos as u64;
        let head = r.postings()?;
        let rest = r.postings()?;
        let df = index.df(t) as usize;
        if head.len() != df.min(k as usize) || head.len() + rest.len() != df {
            return Err(FormatError::Inconsistent {
                offset: at,
                what: "tier lengths",
            });
        }
        tier1.push(head);
        tier2.push(rest);
    }
    TieredIndex::from_parts(k, index.doc_count(), tier1, tier2).map_err(|_| {
        FormatError::Inconsistent {
            offset: k_at,
            what: "truncation length",
        }
    })
}

fn read_blocks(r: &mut Reader<'_>, index: &InvertedIndex) -> Result<BlockIndex, FormatError> {
    let beta_at = r.pos as u64;
    let beta = r.u32()?;
    let hybrid_threshold = r.u32()?;
    let mut block_lists = Vec::with_capacity(index.term_count());
    let mut hybrid = Vec::with_capacity(index.term_count());
    for _ in 0..index.term_count() {
        block_lists.push(r.postings()?.into_vec());
        let flag_at = r.pos as u64;
        match r.take(1)?[0] {
            0 => hybrid.push(None),
            1 => hybrid.push(Some(r.postings()?)),
            _ => {
                return Err(FormatError::Inconsistent {
                    offset: flag_at,
                    what: "hybrid flag",
                })
            }
        }
    }
    BlockIndex::from_parts(
        beta,
        index.doc_count(),
        hybrid_threshold,
        block_lists,
        hybrid,
    )
    .map_err(|_| FormatError::Inconsistent {
        offset: beta_at,
        what: "block width",
    })
}

fn put_u32(out: &mut Vec<u8>, v: u32) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn put_record(out: &mut Vec<u8>, c: &CompressedPostings) {
    put_u32(out, c.df());
    put_u32(out, c.bytes().len() as u32);
    out.extend_from_slice(c.bytes());
}

fn put_section(out: &mut Vec<u8>, tag: [u8; 4], payload: &[u8]) {
    out.extend_from_slice(&tag);
    out.extend_from_slice(&(payload.len() as u64).to_le_bytes());
    out.extend_from_slice(payload);
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], FormatError> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.buf.len())
            .ok_or(FormatError::UnexpectedEof {
                offset: self.pos as u64,
            })?;
        let out = &self.buf[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn u32(&mut self) -> Result<u32, FormatError> {
        Ok(u32::from_le_bytes(
            self.take(4)?.try_into().expect("4 bytes"),
        ))
    }

    fn u64(&mut self) -> Result<u64, FormatError> {
        Ok(u64::from_le_bytes(
            self.take(8)?.try_into().expect("8 bytes"),
        ))
    }

    fn record(&mut self) -> Result<CompressedPostings, FormatError> {
        let df = self.u32()?;
        let len = self.u32()? as usize;
        Ok(CompressedPostings::from_parts(self.take(len)?.to_vec(), df))
    }

    fn postings(&mut self) -> Result<PostingsList, FormatError> {
        let at = self.pos as u64;
        let c = self.record()?;
        decode_postings(&c).map_err(|source| FormatError::Record { offset: at, source })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Corpus;

    fn fixture_file() -> IndexFile {
        let corpus = Corpus::from_texts(["the cat sat", "the dog sat", "a cat ran"]).unwrap();
        let index = InvertedIndex::build(&corpus);
        IndexFile::new(index, Some(corpus.vocabulary()))
    }

    #[test]
    fn header_layout() {
        let bytes = IndexFile::new(fixture_file().index, None).to_bytes();
        assert_eq!(&bytes[..4], b"TBIX");
        assert_eq!(&bytes[4..16], [1, 0, 0, 0, 3, 0, 0, 0, 6, 0, 0, 0]);
        // term 0 "a": df 1, one byte, gap 2
        assert_eq!(&bytes[16..25], [1, 0, 0, 0, 1, 0, 0, 0, 2]);
        // 16 header + 6 terms x 8 bytes of framing + 9 codec bytes
        assert_eq!(bytes.len(), 16 + 48 + 9);
    }

    #[test]
    fn roundtrip_with_sections() {
        let mut file = fixture_file();
        file.tiered = Some(TieredIndex::build(&file.index, 1).unwrap());
        file.blocks = Some(BlockIndex::build(&file.index, 2, 1).unwrap());
        let back = IndexFile::from_bytes(&file.to_bytes()).unwrap();
        assert_eq!(back, file);
    }

    #[test]
    fn unknown_sections_are_skipped() {
        let file = fixture_file();
        let mut bytes = file.to_bytes();
        put_section(&mut bytes, *b"XTRA", &[1, 2, 3]);
        assert_eq!(IndexFile::from_bytes(&bytes).unwrap(), file);
    }

    #[test]
    fn corrupt_inputs_report_offsets() {
        let bytes = fixture_file().to_bytes();
        assert!(matches!(
            IndexFile::from_bytes(b"NOPE"),
            Err(FormatError::BadMagic)
        ));

        let mut v2 = bytes.clone();
        v2[4] = 2;
        assert!(matches!(
            IndexFile::from_bytes(&v2),
            Err(FormatError::UnsupportedVersion(2))
        ));

        let err = IndexFile::from_bytes(&bytes[..20]).unwrap_err();
        assert_eq!(err.offset(), Some(20));

        // dangling continuation bit in the first record's codec byte
        let mut bad = bytes.clone();
        bad[24] = 0x80;
        let err = IndexFile::from_bytes(&bad).unwrap_err();
        assert!(
            matches!(err, FormatError::Record { offset: 16, .. }),
            "{err}"
        );

        // doc id past doc_count
        let mut far = bytes.clone();
        far[24] = 9;
        assert!(matches!(
            IndexFile::from_bytes(&far),
            Err(FormatError::Inconsistent { offset: 16, .. })
        ));
    }
}
