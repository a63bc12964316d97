//! Term-document membership models.
//!
//! A model answers "does term `t` occur in document `d`" for the terms in its
//! scope. The query strategies only ever talk to the [`MembershipModel`]
//! trait, so the exact oracle and the Bloom filter are interchangeable, and a
//! learned predictor could be plugged in the same way.

mod bloom;
mod exact;

pub use bloom::BloomModel;
pub use exact::ExactModel;

use std::collections::BTreeSet;

use crate::index::InvertedIndex;
use crate::{DocId, TermId};

pub trait MembershipModel: Send + Sync {
    /// `true` if `term` occurs in `doc`. Only meaningful when `covers(term)`.
    fn contains(&self, term: TermId, doc: DocId) -> bool;

    /// Exact models never report a false positive.
    fn is_exact(&self) -> bool;

    fn covers(&self, term: TermId) -> bool;
}

impl<M: MembershipModel + ?Sized> MembershipModel for &M {
    fn contains(&self, term: TermId, doc: DocId) -> bool {
        (**self).contains(term, doc)
    }

    fn is_exact(&self) -> bool {
        (**self).is_exact()
    }

    fn covers(&self, term: TermId) -> bool {
        (**self).covers(term)
    }
}

impl<M: MembershipModel + ?Sized> MembershipModel for Box<M> {
    fn contains(&self, term: TermId, doc: DocId) -> bool {
        (**self).contains(term, doc)
    }

    fn is_exact(&self) -> bool {
        (**self).is_exact()
    }

    fn covers(&self, term: TermId) -> bool {
        (**self).covers(term)
    }
}

/// Which terms a model is built for.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Scope {
    All,
    Terms(BTreeSet<TermId>),
}

impl Scope {
    pub fn includes(&self, term: TermId) -> bool {
        match self {
            Scope::All => true,
            Scope::Terms(set) => set.contains(&term),
        }
    }

    pub(crate) fn term_ids(&self, term_count: usize) -> Vec<TermId> {
        match self {
            Scope::All => (0..term_count as TermId).collect(),
            Scope::Terms(set) => set
                .iter()
                .copied()
                .filter(|&t| (t as usize) < term_count)
                .collect(),
        }
    }
}

impl FromIterator<TermId> for Scope {
    fn from_iter<I: IntoIterator<Item = TermId>>(iter: I) -> Self {
        Scope::Terms(iter.into_iter().collect())
    }
}

/// Per-unit model cost used by the storage estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelCostParams {
    s: f64,
}

#[derive(thiserror::Error, Debug, Clone, PartialEq)]
#[error("model cost per unit must be finite and non-negative, got {0}")]
pub struct InvalidCost(pub f64);

impl ModelCostParams {
    pub fn new(bits_per_unit: f64) -> Result<Self, InvalidCost> {
        if bits_per_unit.is_finite() && bits_per_unit >= 0.0 {
            Ok(Self { s: bits_per_unit })
        } else {
            Err(InvalidCost(bits_per_unit))
        }
    }

    pub fn bits_per_unit(&self) -> f64 {
        self.s
    }
}

/// Analytic model size: one unit per replaced term and one per document.
pub fn model_storage_bits(params: ModelCostParams, replaced_count: usize, doc_count: usize) -> f64 {
    (replaced_count + doc_count) as f64 * params.s
}

/// Fraction of absent in-scope (term, doc) pairs the model claims are present.
/// Enumerates every pair, so only suitable for small collections.
pub fn false_positive_rate<M: MembershipModel>(
    model: &M,
    index: &InvertedIndex,
    scope: &Scope,
) -> f64 {
    let mut absent = 0u64;
    let mut wrong = 0u64;
    for t in scope.term_ids(index.term_count()) {
        let list = index.postings(t);
        for d in 0..index.doc_count() as DocId {
            if !list.contains(d) {
                absent += 1;
                wrong += u64::from(model.contains(t, d));
            }
        }
    }
    if absent == 0 {
        0.0
    } else {
        wrong as f64 / absent as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn storage_bits_examples() {
        let zero = ModelCostParams::new(0.0).unwrap();
        assert_eq!(model_storage_bits(zero, 3, 3), 0.0);
        assert_eq!(model_storage_bits(zero, 1000, 1_000_000), 0.0);
        let emb = ModelCostParams::new(512.0).unwrap();
        assert_eq!(model_storage_bits(emb, 3, 3), 3072.0);
        let unit = ModelCostParams::new(1.0).unwrap();
        assert_eq!(model_storage_bits(unit, 3, 3), 6.0);
    }

    #[test]
    fn storage_bits_monotone() {
        let p = ModelCostParams::new(2.5).unwrap();
        for r in 0..20 {
            for d in 0..20 {
                let base = model_storage_bits(p, r, d);
                assert!(model_storage_bits(p, r + 1, d) > base);
                assert!(model_storage_bits(p, r, d + 1) > base);
                assert_eq!(base, 2.5 * (r + d) as f64);
            }
        }
    }

    #[test]
    fn cost_rejects_negative() {
        assert!(ModelCostParams::new(-1.0).is_err());
        assert!(ModelCostParams::new(f64::NAN).is_err());
    }

    #[test]
    fn scope_membership() {
        let s: Scope = [1, 4].into_iter().collect();
        assert!(s.includes(4));
        assert!(!s.includes(2));
        assert!(Scope::All.includes(99));
        assert_eq!(s.term_ids(3), [1]);
    }
}
