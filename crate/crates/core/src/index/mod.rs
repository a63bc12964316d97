//! The full inverted index: one compressed postings list per vocabulary term.

pub mod codec;
mod intersect;

pub use codec::{CodecError, PostingsCodec, VByte};
pub use intersect::{intersect, intersect_sorted, IntersectError};

use crate::corpus::Corpus;
use crate::{DocId, TermId};

/// Strictly increasing document ids of one term.
#[derive(Debug, Clone, PartialEq, Eq, Default, Hash)]
pub struct PostingsList(Vec<DocId>);

impl PostingsList {
    pub fn new(ids: Vec<DocId>) -> Result<Self, CodecError> {
        if let Some(position) = ids.windows(2).position(|w| w[0] >= w[1]) {
            return Err(CodecError::NotIncreasing {
                position: position + 1,
            });
        }
        Ok(Self(ids))
    }

    /// Caller guarantees strict increase.
    pub(crate) fn from_sorted(ids: Vec<DocId>) -> Self {
        debug_assert!(ids.windows(2).all(|w| w[0] < w[1]));
        Self(ids)
    }

    pub fn as_slice(&self) -> &[DocId] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<DocId> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, doc: DocId) -> bool {
        self.0.binary_search(&doc).is_ok()
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = DocId> + '_ {
        self.0.iter().copied()
    }
}

impl std::ops::Deref for PostingsList {
    type Target = [DocId];

    fn deref(&self) -> &[DocId] {
        &self.0
    }
}

/// Encoded postings with their document frequency.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompressedPostings {
    bytes: Vec<u8>,
    df: u32,
}

impl CompressedPostings {
    pub fn from_parts(bytes: Vec<u8>, df: u32) -> Self {
        Self { bytes, df }
    }

    pub fn bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn df(&self) -> u32 {
        self.df
    }

    pub fn size_bits(&self) -> u64 {
        8 * self.bytes.len() as u64
    }
}

pub fn encode_postings(list: &PostingsList) -> CompressedPostings {
    let bytes = VByte
        .encode(list.as_slice())
        .expect("PostingsList is strictly increasing");
    CompressedPostings::from_parts(bytes, list.len() as u32)
}

/// Decodes and checks that the decoded length agrees with the stored df.
pub fn decode_postings(c: &CompressedPostings) -> Result<PostingsList, DecodeError> {
    let ids = VByte.decode(c.bytes())?;
    if ids.len() != c.df() as usize {
        return Err(DecodeError::DfMismatch {
            expected: c.df(),
            found: ids.len(),
        });
    }
    Ok(PostingsList::from_sorted(ids))
}

#[derive(thiserror::Error, Debug, Clone, PartialEq, Eq)]
pub enum DecodeError {
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error("stored df {expected} but decoded {found} ids")]
    DfMismatch { expected: u32, found: usize },
    #[error("doc id {doc} out of range for {doc_count} documents")]
    DocOutOfRange { doc: DocId, doc_count: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InvertedIndex {
    postings: Vec<CompressedPostings>,
    doc_count: usize,
}

impl InvertedIndex {
    pub fn build(corpus: &Corpus) -> Self {
        let mut lists: Vec<Vec<DocId>> = vec![Vec::new(); corpus.term_count()];
        for (doc, terms) in corpus.docs().enumerate() {
            for &t in terms {
                let list = &mut lists[t as usize];
                // docs are visited in order, so a repeat can only be the tail
                if list.last() != Some(&(doc as DocId)) {
                    list.push(doc as DocId);
                }
            }
        }
        let postings = lists
            .into_iter()
            .map(|ids| encode_postings(&PostingsList::from_sorted(ids)))
            .collect();
        Self {
            postings,
            doc_count: corpus.doc_count(),
        }
    }

    pub fn from_parts(postings: Vec<CompressedPostings>, doc_count: usize) -> Self {
        Self {
            postings,
            doc_count,
        }
    }

    pub fn doc_count(&self) -> usize {
        self.doc_count
    }

    pub fn term_count(&self) -> usize {
        self.postings.len()
    }

    pub fn compressed(&self, term: TermId) -> &CompressedPostings {
        &self.postings[term as usize]
    }

    pub fn compressed_lists(&self) -> &[CompressedPostings] {
        &self.postings
    }

    pub fn df(&self, term: TermId) -> u32 {
        self.postings[term as usize].df()
    }

    pub fn max_df(&self) -> u32 {
        self.postings
            .iter()
            .map(CompressedPostings::df)
            .max()
            .unwrap_or(0)
    }

    /// Decodes the postings of `term`. Lists built in memory always decode.
    pub fn postings(&self, term: TermId) -> PostingsList {
        decode_postings(&self.postings[term as usize]).expect("index lists are well formed")
    }

    pub fn total_bits(&self) -> u64 {
        self.postings
            .iter()
            .map(CompressedPostings::size_bits)
            .sum()
    }

    /// Checks every list decodes and agrees with `doc_count`.
    pub fn validate(&self) -> Result<(), (TermId, DecodeError)> {
        for (t, c) in self.postings.iter().enumerate() {
            let list = decode_postings(c).map_err(|e| (t as TermId, e))?;
            if let Some(&last) = list.last() {
                if last as usize >= self.doc_count {
                    return Err((
                        t as TermId,
                        DecodeError::DocOutOfRange {
                            doc: last,
                            doc_count: self.doc_count,
                        },
                    ));
                }
            }
        }
        Ok(())
    }
}
