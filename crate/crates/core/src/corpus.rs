//! Document ingestion, tokenization and dense id assignment.
//!
//! Input is line-oriented: every line with at least one non-whitespace
//! character is a document, and its `DocId` is its index among such lines.
//! Term ids are assigned after ingestion, in ascending lexicographic order of
//! the token text, so they do not depend on the order documents arrive in.

use std::collections::{BTreeSet, HashMap};
use std::io::BufRead;

use crate::{DocId, TermId};

#[derive(thiserror::Error, Debug)]
pub enum CorpusError {
    #[error("corpus contains no documents")]
    Empty,
    #[error("invalid UTF-8 on line {line} at byte offset {offset}")]
    InvalidUtf8 { line: usize, offset: u64 },
    #[error("i/o error while reading corpus: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(thiserror::Error, Debug, Clone, PartialEq, Eq)]
pub enum QueryError {
    #[error("empty query")]
    Empty,
    #[error("no query term occurs in the collection: {}", .0.join(", "))]
    UnknownTerms(Vec<String>),
}

/// Lowercases `text` and splits it on maximal runs of non-alphanumeric
/// characters. Nothing is filtered out; stopwords and repeats are kept.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|tok| !tok.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// A finalized, immutable document collection.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    docs: Vec<Vec<TermId>>,
    terms: Vec<String>,
    lookup: HashMap<String, TermId>,
}

impl Corpus {
    /// Reads one document per non-blank line.
    pub fn ingest<R: BufRead>(mut source: R) -> Result<Self, CorpusError> {
        let mut raw_docs = Vec::new();
        let mut buf = Vec::new();
        let mut offset = 0u64;
        let mut line_no = 0usize;
        loop {
            buf.clear();
            let n = source.read_until(b'\n', &mut buf)?;
            if n == 0 {
                break;
            }
            line_no += 1;
            let text = std::str::from_utf8(&buf).map_err(|e| CorpusError::InvalidUtf8 {
                line: line_no,
                offset: offset + e.valid_up_to() as u64,
            })?;
            offset += n as u64;
            if !text.trim().is_empty() {
                raw_docs.push(tokenize(text));
            }
        }
        Self::from_token_docs(raw_docs)
    }

    /// Builds a corpus from in-memory document texts.
    pub fn from_texts<I, S>(texts: I) -> Result<Self, CorpusError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let docs = texts
            .into_iter()
            .filter(|t| !t.as_ref().trim().is_empty())
            .map(|t| tokenize(t.as_ref()))
            .collect();
        Self::from_token_docs(docs)
    }

    fn from_token_docs(raw_docs: Vec<Vec<String>>) -> Result<Self, CorpusError> {
        if raw_docs.is_empty() {
            return Err(CorpusError::Empty);
        }
        let vocab: BTreeSet<&str> = raw_docs.iter().flatten().map(String::as_str).collect();
        let terms: Vec<String> = vocab.into_iter().map(str::to_owned).collect();
        let lookup: HashMap<String, TermId> = terms
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as TermId))
            .collect();
        let docs = raw_docs
            .iter()
            .map(|doc| doc.iter().map(|tok| lookup[tok.as_str()]).collect())
            .collect();
        Ok(Self {
            docs,
            terms,
            lookup,
        })
    }

    pub fn doc_count(&self) -> usize {
        self.docs.len()
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    /// Token sequence of document `doc`, as term ids in original order.
    pub fn doc(&self, doc: DocId) -> &[TermId] {
        &self.docs[doc as usize]
    }

    pub fn docs(&self) -> impl ExactSizeIterator<Item = &[TermId]> {
        self.docs.iter().map(Vec::as_slice)
    }

    pub fn term_id(&self, token: &str) -> Option<TermId> {
        self.lookup.get(token).copied()
    }

    pub fn term(&self, id: TermId) -> &str {
        &self.terms[id as usize]
    }

    /// Vocabulary in `TermId` order.
    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn vocabulary(&self) -> Vocabulary {
        Vocabulary::new(self.terms.clone())
    }

    pub fn parse_query(&self, text: &str) -> Result<Query, QueryError> {
        parse_query_with(text, |tok| self.term_id(tok))
    }
}

/// Token to id mapping without the documents, as persisted in index files.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    terms: Vec<String>,
    lookup: HashMap<String, TermId>,
}

impl Vocabulary {
    pub fn new(terms: Vec<String>) -> Self {
        let lookup = terms
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as TermId))
            .collect();
        Self { terms, lookup }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn term_id(&self, token: &str) -> Option<TermId> {
        self.lookup.get(token).copied()
    }

    pub fn term(&self, id: TermId) -> &str {
        &self.terms[id as usize]
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn parse_query(&self, text: &str) -> Result<Query, QueryError> {
        parse_query_with(text, |tok| self.term_id(tok))
    }
}

/// A conjunctive query: deduplicated term ids plus any tokens that are not in
/// the vocabulary. A non-empty `unknown` list means the conjunction is empty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Query {
    pub terms: Vec<TermId>,
    pub unknown: Vec<String>,
}

impl Query {
    /// Query over known terms only; duplicates are dropped, first occurrence wins.
    pub fn from_terms<I: IntoIterator<Item = TermId>>(terms: I) -> Self {
        let mut out = Vec::new();
        for t in terms {
            if !out.contains(&t) {
                out.push(t);
            }
        }
        Self {
            terms: out,
            unknown: Vec::new(),
        }
    }

    pub fn has_unknown(&self) -> bool {
        !self.unknown.is_empty()
    }
}

fn parse_query_with(
    text: &str,
    lookup: impl Fn(&str) -> Option<TermId>,
) -> Result<Query, QueryError> {
    let tokens = tokenize(text);
    if tokens.is_empty() {
        return Err(QueryError::Empty);
    }
    let mut terms = Vec::new();
    let mut unknown: Vec<String> = Vec::new();
    for tok in tokens {
        match lookup(&tok) {
            Some(id) if !terms.contains(&id) => terms.push(id),
            Some(_) => {}
            None if !unknown.contains(&tok) => unknown.push(tok),
            None => {}
        }
    }
    if terms.is_empty() {
        return Err(QueryError::UnknownTerms(unknown));
    }
    Ok(Query { terms, unknown })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn corpus_a() -> Corpus {
        Corpus::ingest("the cat sat\nthe dog sat\na cat ran\n".as_bytes()).unwrap()
    }

    #[test]
    fn tokenize_casefolds_and_splits() {
        assert_eq!(tokenize("The CAT, sat."), ["the", "cat", "sat"]);
        assert!(tokenize("").is_empty());
        assert_eq!(tokenize("a\u{2014}b  c"), ["a", "b", "c"]);
        assert_eq!(
            tokenize("to be or not to be"),
            ["to", "be", "or", "not", "to", "be"]
        );
    }

    #[test]
    fn ingest_fixture() {
        let c = corpus_a();
        assert_eq!(c.doc_count(), 3);
        assert_eq!(c.term_count(), 6);
        assert_eq!(c.terms(), ["a", "cat", "dog", "ran", "sat", "the"]);
        assert_eq!(c.doc(0), [5, 1, 4]);
        assert_eq!(c.doc(2), [0, 1, 3]);
    }

    #[test]
    fn ingest_small_cases() {
        let c = Corpus::ingest("x".as_bytes()).unwrap();
        assert_eq!((c.doc_count(), c.term_count()), (1, 1));

        let c = Corpus::ingest("a b\na b\n".as_bytes()).unwrap();
        assert_eq!((c.doc_count(), c.term_count()), (2, 2));
        assert_eq!(c.doc(0), c.doc(1));
    }

    #[test]
    fn blank_lines_are_not_documents() {
        let c = Corpus::ingest("\n  \nfoo\n\r\nbar baz\n".as_bytes()).unwrap();
        assert_eq!(c.doc_count(), 2);
        assert_eq!(c.doc(1).len(), 2);
    }

    #[test]
    fn ingest_rejects_empty_and_bad_utf8() {
        assert!(matches!(
            Corpus::ingest("".as_bytes()),
            Err(CorpusError::Empty)
        ));
        assert!(matches!(
            Corpus::ingest("\n\n".as_bytes()),
            Err(CorpusError::Empty)
        ));
        let bytes: &[u8] = b"ok line\nbad \xff here\n";
        match Corpus::ingest(bytes) {
            Err(CorpusError::InvalidUtf8 { line, offset }) => {
                assert_eq!(line, 2);
                assert_eq!(offset, 12);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn parse_query_fixture() {
        let c = corpus_a();
        assert_eq!(c.parse_query("the cat").unwrap().terms, [5, 1]);
        assert_eq!(c.parse_query("cat cat").unwrap().terms, [1]);
        assert_eq!(
            c.parse_query("zebra"),
            Err(QueryError::UnknownTerms(vec!["zebra".into()]))
        );
        assert_eq!(c.parse_query("  ,"), Err(QueryError::Empty));
        let q = c.parse_query("cat zebra").unwrap();
        assert_eq!(q.terms, [1]);
        assert_eq!(q.unknown, ["zebra"]);
    }

    #[test]
    fn ids_independent_of_document_order() {
        let a = Corpus::from_texts(["b a", "c"]).unwrap();
        let b = Corpus::from_texts(["c", "b a"]).unwrap();
        assert_eq!(a.terms(), b.terms());
        assert_eq!(a, Corpus::from_texts(["b a", "c"]).unwrap());
    }

    #[test]
    fn vocabulary_parses_like_corpus() {
        let c = corpus_a();
        let v = c.vocabulary();
        assert_eq!(v.parse_query("sat THE"), c.parse_query("sat THE"));
    }
}
