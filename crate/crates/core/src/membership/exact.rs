use crate::index::InvertedIndex;
use crate::membership::{MembershipModel, Scope};
use crate::{DocId, TermId};

// Lists at least this dense (df * 32 >= |D|) are stored as bitmaps.
const DENSE_RATIO: usize = 32;

#[derive(Debug, Clone)]
enum TermDocs {
    Dense(Vec<u64>),
    Sparse(Vec<DocId>),
}

impl TermDocs {
    fn contains(&self, doc: DocId) -> bool {
        match self {
            TermDocs::Dense(words) => words
                .get(doc as usize / 64)
                .is_some_and(|w| w & (1u64 << (doc % 64)) != 0),
            TermDocs::Sparse(ids) => ids.binary_search(&doc).is_ok(),
        }
    }
}

/// Exact term-document oracle: answers with no errors for every term in scope.
#[derive(Debug, Clone)]
pub struct ExactModel {
    terms: Vec<Option<TermDocs>>,
}

impl ExactModel {
    pub fn build(index: &InvertedIndex, scope: &Scope) -> Self {
        let doc_count = index.doc_count();
        let mut terms = vec![None; index.term_count()];
        for t in scope.term_ids(index.term_count()) {
            let list = index.postings(t);
            let docs = if list.len() * DENSE_RATIO >= doc_count {
                let mut words = vec![0u64; doc_count.div_ceil(64)];
                for d in list.iter() {
                    words[d as usize / 64] |= 1u64 << (d % 64);
                }
                TermDocs::Dense(words)
            } else {
                TermDocs::Sparse(list.into_vec())
            };
            terms[t as usize] = Some(docs);
        }
        Self { terms }
    }
}

impl MembershipModel for ExactModel {
    fn contains(&self, term: TermId, doc: DocId) -> bool {
        match self.terms.get(term as usize) {
            Some(Some(docs)) => docs.contains(doc),
            _ => false,
        }
    }

    fn is_exact(&self) -> bool {
        true
    }

    fn covers(&self, term: TermId) -> bool {
        matches!(self.terms.get(term as usize), Some(Some(_)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Corpus;

    #[test]
    fn fixture_lookups() {
        let corpus = Corpus::from_texts(["the cat sat", "the dog sat", "a cat ran"]).unwrap();
        let idx = InvertedIndex::build(&corpus);
        let m = ExactModel::build(&idx, &Scope::All);
        let cat = corpus.term_id("cat").unwrap();
        let dog = corpus.term_id("dog").unwrap();
        assert!(m.contains(cat, 0));
        assert!(!m.contains(dog, 0));
        assert!(m.contains(cat, 2));
        assert!(m.is_exact());
    }

    #[test]
    fn agrees_with_corpus_scan() {
        // mix of dense and sparse terms
        let texts: Vec<String> = (0..200)
            .map(|i| {
                let mut s = String::from("common");
                if i % 7 == 0 {
                    s.push_str(" seventh");
                }
                if i == 150 {
                    s.push_str(" rare");
                }
                s
            })
            .collect();
        let corpus = Corpus::from_texts(&texts).unwrap();
        let idx = InvertedIndex::build(&corpus);
        let m = ExactModel::build(&idx, &Scope::All);
        for t in 0..corpus.term_count() as TermId {
            for d in 0..corpus.doc_count() as DocId {
                assert_eq!(m.contains(t, d), corpus.doc(d).contains(&t), "t={t} d={d}");
            }
        }
    }

    #[test]
    fn scope_limits_coverage() {
        let corpus = Corpus::from_texts(["a b", "b"]).unwrap();
        let idx = InvertedIndex::build(&corpus);
        let m = ExactModel::build(&idx, &[1].into_iter().collect());
        assert!(m.covers(1));
        assert!(!m.covers(0));
        assert!(!m.covers(7));
    }
}
