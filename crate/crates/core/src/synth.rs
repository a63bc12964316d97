//! Seeded synthetic collections with Zipf-distributed term frequencies, and
//! conjunctive query samplers over them.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Zipf};

use crate::corpus::{Corpus, CorpusError, Query};
use crate::{DocId, TermId};

#[derive(Debug, Clone, PartialEq)]
pub struct ZipfParams {
    pub docs: usize,
    /// Number of ranks the sampler draws from; the realized vocabulary is
    /// at most this large.
    pub vocab: usize,
    pub exponent: f64,
    pub min_len: usize,
    pub max_len: usize,
    pub seed: u64,
}

impl Default for ZipfParams {
    fn default() -> Self {
        Self {
            docs: 20_000,
            vocab: 50_000,
            exponent: 1.0,
            min_len: 50,
            max_len: 500,
            seed: 0x7b1c,
        }
    }
}

/// Token text for Zipf rank `rank` (1-based).
pub fn rank_token(rank: u64) -> String {
    format!("w{rank}")
}

/// One line of text per document, tokens drawn i.i.d. from Zipf(vocab, exponent).
pub fn zipf_texts(params: &ZipfParams) -> Vec<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let zipf = Zipf::new(params.vocab as f64, params.exponent).expect("valid zipf parameters");
    (0..params.docs)
        .map(|_| {
            let len = rng.random_range(params.min_len..=params.max_len);
            let mut line = String::with_capacity(len * 7);
            for i in 0..len {
                if i > 0 {
                    line.push(' ');
                }
                let rank = zipf.sample(&mut rng) as u64;
                line.push_str(&rank_token(rank));
            }
            line
        })
        .collect()
}

pub fn zipf_corpus(params: &ZipfParams) -> Result<Corpus, CorpusError> {
    Corpus::from_texts(zipf_texts(params))
}

/// Samples conjunctive queries that each match at least one document: pick a
/// document uniformly, then `min_terms..=max_terms` of its distinct terms.
pub fn sample_queries(
    corpus: &Corpus,
    count: usize,
    min_terms: usize,
    max_terms: usize,
    seed: u64,
) -> Vec<Query> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0usize;
    while out.len() < count && attempts < count * 100 {
        attempts += 1;
        let doc = rng.random_range(0..corpus.doc_count()) as DocId;
        let mut distinct: Vec<TermId> = corpus.doc(doc).to_vec();
        distinct.sort_unstable();
        distinct.dedup();
        if distinct.len() < min_terms {
            continue;
        }
        let n = rng.random_range(min_terms..=max_terms).min(distinct.len());
        let picked = distinct.choose_multiple(&mut rng, n).copied();
        out.push(Query::from_terms(picked));
    }
    out
}

/// Renders a query back to text using the corpus vocabulary.
pub fn query_text(corpus: &Corpus, query: &Query) -> String {
    query
        .terms
        .iter()
        .map(|&t| corpus.term(t))
        .collect::<Vec<_>>()
        .join(" ")
}
