//! Conjunctive query evaluation.
//!
//! Four strategies share one result type:
//!
//! - `exhaustive`: probe the membership model for every document.
//! - `tiered`: scan the union of the first-tier (truncated) lists, optionally
//!   falling back to the second tier when no query term is short enough for the
//!   first tier to be complete.
//! - `block`: intersect per-term block lists and scan only surviving blocks.
//! - `oracle`: exact postings intersection, the ground truth for the others.
//!
//! Every strategy counts the documents it considered and the model calls it
//! made, since those counters are what separates the strategies in cost.

use serde::Serialize;

use crate::corpus::Query;
use crate::index::{intersect, intersect_sorted, InvertedIndex, PostingsList};
use crate::membership::MembershipModel;
use crate::partition::{BlockIndex, TieredIndex};
use crate::{DocId, TermId};

#[derive(thiserror::Error, Debug, Clone, PartialEq, Eq)]
pub enum EngineError {
    #[error("membership model does not cover term {0}")]
    OutOfScope(TermId),
    #[error("term id {0} is not in the index")]
    UnknownTermId(TermId),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct QueryResult {
    pub doc_ids: Vec<DocId>,
    pub candidates_scanned: u64,
    pub model_probes: u64,
    /// Tiered only: some query term has its complete list in the first tier.
    pub guaranteed: Option<bool>,
    /// Tiered only: the second tier was scanned too.
    pub used_fallback: Option<bool>,
    /// The query had tokens outside the vocabulary, so the result is empty.
    pub unknown_terms: bool,
}

impl QueryResult {
    fn empty_unknown() -> Self {
        Self {
            doc_ids: Vec::new(),
            candidates_scanned: 0,
            model_probes: 0,
            guaranteed: None,
            used_fallback: None,
            unknown_terms: true,
        }
    }

    fn new(doc_ids: Vec<DocId>, candidates_scanned: u64, model_probes: u64) -> Self {
        Self {
            doc_ids,
            candidates_scanned,
            model_probes,
            guaranteed: None,
            used_fallback: None,
            unknown_terms: false,
        }
    }
}

/// How one query term is tested for a candidate document.
enum Check<'a> {
    Model(TermId),
    List(&'a [DocId]),
}

struct Matcher<'a, M> {
    model: &'a M,
    checks: Vec<Check<'a>>,
    probes: u64,
}

impl<'a, M: MembershipModel> Matcher<'a, M> {
    fn new(model: &'a M, checks: Vec<Check<'a>>) -> Result<Self, EngineError> {
        for check in &checks {
            if let Check::Model(t) = check {
                if !model.covers(*t) {
                    return Err(EngineError::OutOfScope(*t));
                }
            }
        }
        Ok(Self {
            model,
            checks,
            probes: 0,
        })
    }

    fn matches(&mut self, doc: DocId) -> bool {
        for check in &self.checks {
            let hit = match check {
                Check::Model(t) => {
                    self.probes += 1;
                    self.model.contains(*t, doc)
                }
                Check::List(ids) => ids.binary_search(&doc).is_ok(),
            };
            if !hit {
                return false;
            }
        }
        true
    }
}

fn check_ids(terms: &[TermId], term_count: usize) -> Result<(), EngineError> {
    match terms.iter().find(|&&t| t as usize >= term_count) {
        Some(&t) => Err(EngineError::UnknownTermId(t)),
        None => Ok(()),
    }
}

/// Probes every document in `0..doc_count` against the model.
pub fn query_exhaustive<M: MembershipModel>(
    query: &Query,
    model: &M,
    doc_count: usize,
) -> Result<QueryResult, EngineError> {
    if query.has_unknown() {
        return Ok(QueryResult::empty_unknown());
    }
    let checks = query.terms.iter().map(|&t| Check::Model(t)).collect();
    let mut matcher = Matcher::new(model, checks)?;
    let docs = (0..doc_count as DocId)
        .filter(|&d| matcher.matches(d))
        .collect();
    Ok(QueryResult::new(docs, doc_count as u64, matcher.probes))
}

/// Scans the union of first-tier lists. Terms whose list is complete in the
/// first tier are checked against that list; truncated terms go to the model,
/// which therefore only needs to cover the replaced terms.
pub fn query_tiered<M: MembershipModel>(
    query: &Query,
    tiered: &TieredIndex,
    model: &M,
    fallback: bool,
) -> Result<QueryResult, EngineError> {
    if query.has_unknown() {
        let mut r = QueryResult::empty_unknown();
        r.guaranteed = Some(true);
        r.used_fallback = Some(false);
        return Ok(r);
    }
    check_ids(&query.terms, tiered.term_count())?;
    let checks = query
        .terms
        .iter()
        .map(|&t| {
            if tiered.is_replaced(t) {
                Check::Model(t)
            } else {
                Check::List(tiered.tier1(t).as_slice())
            }
        })
        .collect();
    let mut matcher = Matcher::new(model, checks)?;
    let guaranteed = query.terms.iter().any(|&t| !tiered.is_replaced(t));
    let use_fallback = fallback && !guaranteed;

    let mut candidates: Vec<DocId> = query
        .terms
        .iter()
        .flat_map(|&t| tiered.tier1(t).iter())
        .collect();
    if use_fallback {
        candidates.extend(query.terms.iter().flat_map(|&t| tiered.tier2(t).iter()));
    }
    candidates.sort_unstable();
    candidates.dedup();

    let docs = candidates
        .iter()
        .copied()
        .filter(|&d| matcher.matches(d))
        .collect();
    let mut r = QueryResult::new(docs, candidates.len() as u64, matcher.probes);
    r.guaranteed = Some(guaranteed);
    r.used_fallback = Some(use_fallback);
    Ok(r)
}

/// Scans the documents of every block that all query terms share. Terms with
/// a hybrid exact list are checked against it instead of the model.
pub fn query_block<M: MembershipModel>(
    query: &Query,
    blocks: &BlockIndex,
    model: &M,
) -> Result<QueryResult, EngineError> {
    if query.has_unknown() {
        return Ok(QueryResult::empty_unknown());
    }
    check_ids(&query.terms, blocks.term_count())?;
    let checks = query
        .terms
        .iter()
        .map(|&t| match blocks.hybrid_list(t) {
            Some(list) => Check::List(list.as_slice()),
            None => Check::Model(t),
        })
        .collect();
    let mut matcher = Matcher::new(model, checks)?;
    let lists: Vec<&[u32]> = query.terms.iter().map(|&t| blocks.block_list(t)).collect();
    let shared = intersect_sorted(&lists).unwrap_or_default();

    let mut scanned = 0u64;
    let mut docs = Vec::new();
    for b in shared {
        let range = blocks.document_range_of_block(b);
        scanned += u64::from(range.end - range.start);
        docs.extend(range.filter(|&d| matcher.matches(d)));
    }
    Ok(QueryResult::new(docs, scanned, matcher.probes))
}

/// Exact intersection of the full postings lists.
pub fn query_oracle(query: &Query, index: &InvertedIndex) -> Result<QueryResult, EngineError> {
    if query.has_unknown() {
        return Ok(QueryResult::empty_unknown());
    }
    check_ids(&query.terms, index.term_count())?;
    let lists: Vec<PostingsList> = query.terms.iter().map(|&t| index.postings(t)).collect();
    let refs: Vec<&PostingsList> = lists.iter().collect();
    let scanned = lists.iter().map(|l| l.len()).min().unwrap_or(0) as u64;
    let docs = match intersect(&refs) {
        Ok(list) => list.into_vec(),
        Err(_) => Vec::new(),
    };
    Ok(QueryResult::new(docs, scanned, 0))
}
