//! Two-tiered and block-based views over a full inverted index.

use std::collections::BTreeSet;
use std::ops::Range;

use crate::index::{InvertedIndex, PostingsList};
use crate::{DocId, TermId};

#[derive(thiserror::Error, Debug, Clone, PartialEq, Eq)]
pub enum PartitionError {
    #[error("truncation length k must be at least 1")]
    ZeroK,
    #[error("block width must be at least 1")]
    ZeroBeta,
}

/// Which k postings of a long list stay in the first tier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TruncationPolicy {
    /// The k smallest doc ids.
    #[default]
    LowestDocIds,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TieredIndex {
    k: u32,
    doc_count: usize,
    tier1: Vec<PostingsList>,
    tier2: Vec<PostingsList>,
}

impl TieredIndex {
    pub fn build(index: &InvertedIndex, k: u32) -> Result<Self, PartitionError> {
        Self::build_with_policy(index, k, TruncationPolicy::default())
    }

    pub fn build_with_policy(
        index: &InvertedIndex,
        k: u32,
        policy: TruncationPolicy,
    ) -> Result<Self, PartitionError> {
        if k == 0 {
            return Err(PartitionError::ZeroK);
        }
        let mut tier1 = Vec::with_capacity(index.term_count());
        let mut tier2 = Vec::with_capacity(index.term_count());
        for t in 0..index.term_count() as TermId {
            let mut full = index.postings(t).into_vec();
            match policy {
                TruncationPolicy::LowestDocIds => {
                    let rest = full.split_off(full.len().min(k as usize));
                    tier1.push(PostingsList::from_sorted(full));
                    tier2.push(PostingsList::from_sorted(rest));
                }
            }
        }
        Ok(Self {
            k,
            doc_count: index.doc_count(),
            tier1,
            tier2,
        })
    }

    /// Reassembles a tiered index from stored tiers, checking the length rule.
    pub fn from_parts(
        k: u32,
        doc_count: usize,
        tier1: Vec<PostingsList>,
        tier2: Vec<PostingsList>,
    ) -> Result<Self, PartitionError> {
        if k == 0 {
            return Err(PartitionError::ZeroK);
        }
        debug_assert_eq!(tier1.len(), tier2.len());
        Ok(Self {
            k,
            doc_count,
            tier1,
            tier2,
        })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn doc_count(&self) -> usize {
        self.doc_count
    }

    pub fn term_count(&self) -> usize {
        self.tier1.len()
    }

    pub fn tier1(&self, term: TermId) -> &PostingsList {
        &self.tier1[term as usize]
    }

    pub fn tier2(&self, term: TermId) -> &PostingsList {
        &self.tier2[term as usize]
    }

    pub fn df(&self, term: TermId) -> u32 {
        (self.tier1[term as usize].len() + self.tier2[term as usize].len()) as u32
    }

    /// Whether the first-tier list of `term` is truncated (df > k).
    pub fn is_replaced(&self, term: TermId) -> bool {
        !self.tier2[term as usize].is_empty()
    }

    /// R: every term whose list was truncated.
    pub fn replaced_set(&self) -> BTreeSet<TermId> {
        (0..self.term_count() as TermId)
            .filter(|&t| self.is_replaced(t))
            .collect()
    }

    /// One replaced-flag bit per vocabulary term.
    pub fn flag_bits(&self) -> u64 {
        self.term_count() as u64
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockIndex {
    beta: u32,
    doc_count: usize,
    hybrid_threshold: u32,
    block_lists: Vec<Vec<u32>>,
    hybrid_exact: Vec<Option<PostingsList>>,
}

impl BlockIndex {
    /// `hybrid_threshold` of 0 disables exact lists.
    pub fn build(
        index: &InvertedIndex,
        beta: u32,
        hybrid_threshold: u32,
    ) -> Result<Self, PartitionError> {
        if beta == 0 {
            return Err(PartitionError::ZeroBeta);
        }
        let mut block_lists = Vec::with_capacity(index.term_count());
        let mut hybrid_exact = Vec::with_capacity(index.term_count());
        for t in 0..index.term_count() as TermId {
            let list = index.postings(t);
            let mut blocks: Vec<u32> = list.iter().map(|d| d / beta).collect();
            blocks.dedup();
            block_lists.push(blocks);
            hybrid_exact.push((list.len() as u32 <= hybrid_threshold).then_some(list));
        }
        Ok(Self {
            beta,
            doc_count: index.doc_count(),
            hybrid_threshold,
            block_lists,
            hybrid_exact,
        })
    }

    pub fn from_parts(
        beta: u32,
        doc_count: usize,
        hybrid_threshold: u32,
        block_lists: Vec<Vec<u32>>,
        hybrid_exact: Vec<Option<PostingsList>>,
    ) -> Result<Self, PartitionError> {
        if beta == 0 {
            return Err(PartitionError::ZeroBeta);
        }
        Ok(Self {
            beta,
            doc_count,
            hybrid_threshold,
            block_lists,
            hybrid_exact,
        })
    }

    pub fn beta(&self) -> u32 {
        self.beta
    }

    pub fn doc_count(&self) -> usize {
        self.doc_count
    }

    pub fn hybrid_threshold(&self) -> u32 {
        self.hybrid_threshold
    }

    pub fn term_count(&self) -> usize {
        self.block_lists.len()
    }

    pub fn block_count(&self) -> u32 {
        (self.doc_count as u64).div_ceil(u64::from(self.beta)) as u32
    }

    pub fn block_list(&self, term: TermId) -> &[u32] {
        &self.block_lists[term as usize]
    }

    pub fn hybrid_list(&self, term: TermId) -> Option<&PostingsList> {
        self.hybrid_exact[term as usize].as_ref()
    }

    pub fn block_of(&self, doc: DocId) -> u32 {
        doc / self.beta
    }

    /// Documents covered by block `b`; the final block is clipped at |D|.
    pub fn document_range_of_block(&self, block: u32) -> Range<DocId> {
        let start = u64::from(block) * u64::from(self.beta);
        let end = (start + u64::from(self.beta)).min(self.doc_count as u64);
        start.min(end) as DocId..end as DocId
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Corpus;

    fn corpus_a_index() -> InvertedIndex {
        InvertedIndex::build(
            &Corpus::from_texts(["the cat sat", "the dog sat", "a cat ran"]).unwrap(),
        )
    }

    #[test]
    fn tiered_k1_fixture() {
        let idx = corpus_a_index();
        let tiers = TieredIndex::build(&idx, 1).unwrap();
        let t1: Vec<&[DocId]> = (0..6).map(|t| tiers.tier1(t).as_slice()).collect();
        let t2: Vec<&[DocId]> = (0..6).map(|t| tiers.tier2(t).as_slice()).collect();
        assert_eq!(t1, [&[2][..], &[0], &[1], &[2], &[0], &[0]]);
        assert_eq!(t2, [&[][..], &[2], &[], &[], &[1], &[1]]);
        assert_eq!(tiers.replaced_set(), BTreeSet::from([1, 4, 5]));
        assert_eq!(tiers.flag_bits(), 6);
    }

    #[test]
    fn tiered_no_truncation() {
        let idx = corpus_a_index();
        let tiers = TieredIndex::build(&idx, 2).unwrap();
        assert!(tiers.replaced_set().is_empty());
        assert!((0..6).all(|t| tiers.tier2(t).is_empty()));
        let single = InvertedIndex::build(&Corpus::from_texts(["a b c"]).unwrap());
        assert!(TieredIndex::build(&single, 1)
            .unwrap()
            .replaced_set()
            .is_empty());
    }

    #[test]
    fn tiered_rejects_zero_k() {
        assert_eq!(
            TieredIndex::build(&corpus_a_index(), 0),
            Err(PartitionError::ZeroK)
        );
    }

    #[test]
    fn tier_reconstruction() {
        let texts: Vec<String> = (0..60)
            .map(|i| format!("x{} y{} z{} all", i % 3, i % 11, i % 29))
            .collect();
        let idx = InvertedIndex::build(&Corpus::from_texts(&texts).unwrap());
        let mut prev_r = usize::MAX;
        for k in [1, 2, 3, 5, 8, 20, 60] {
            let tiers = TieredIndex::build(&idx, k).unwrap();
            for t in 0..idx.term_count() as TermId {
                let mut joined = tiers.tier1(t).to_vec();
                joined.extend(tiers.tier2(t).iter());
                joined.sort_unstable();
                assert_eq!(joined, idx.postings(t).as_slice());
                assert_eq!(tiers.tier1(t).len(), idx.df(t).min(k) as usize);
                assert_eq!(tiers.is_replaced(t), idx.df(t) > k);
            }
            let r = tiers.replaced_set().len();
            assert!(r <= prev_r);
            prev_r = r;
        }
    }

    #[test]
    fn blocks_fixture() {
        let idx = corpus_a_index();
        let b = BlockIndex::build(&idx, 2, 0).unwrap();
        let lists: Vec<&[u32]> = (0..6).map(|t| b.block_list(t)).collect();
        assert_eq!(lists, [&[1][..], &[0, 1], &[0], &[1], &[0], &[0]]);
        assert_eq!(b.document_range_of_block(0), 0..2);
        assert_eq!(b.document_range_of_block(1), 2..3);
        assert_eq!(b.block_count(), 2);
        assert!((0..6).all(|t| b.hybrid_list(t).is_none()));
    }

    #[test]
    fn blocks_identity_and_single() {
        let idx = corpus_a_index();
        let b1 = BlockIndex::build(&idx, 1, 0).unwrap();
        for t in 0..6 {
            assert_eq!(b1.block_list(t), idx.postings(t).as_slice());
        }
        let wide = BlockIndex::build(&idx, 3, 0).unwrap();
        assert!((0..6).all(|t| wide.block_list(t) == [0]));
        let wider = BlockIndex::build(&idx, 100, 0).unwrap();
        assert_eq!(wider.document_range_of_block(0), 0..3);
        assert_eq!(BlockIndex::build(&idx, 0, 0), Err(PartitionError::ZeroBeta));
    }

    #[test]
    fn hybrid_lists_for_rare_terms() {
        let idx = corpus_a_index();
        let b = BlockIndex::build(&idx, 2, 1).unwrap();
        assert_eq!(b.hybrid_list(0).unwrap().as_slice(), [2]);
        assert!(b.hybrid_list(1).is_none());
    }

    #[test]
    fn block_soundness() {
        let texts: Vec<String> = (0..97).map(|i| format!("p{} q{}", i % 13, i % 4)).collect();
        let idx = InvertedIndex::build(&Corpus::from_texts(&texts).unwrap());
        for beta in [1, 2, 5, 16, 97, 200] {
            let b = BlockIndex::build(&idx, beta, 0).unwrap();
            for t in 0..idx.term_count() as TermId {
                let list = b.block_list(t);
                assert!(list.windows(2).all(|w| w[0] < w[1]));
                for d in idx.postings(t).iter() {
                    assert!(list.contains(&(d / beta)));
                    assert!(b.document_range_of_block(d / beta).contains(&d));
                }
            }
        }
    }
}
