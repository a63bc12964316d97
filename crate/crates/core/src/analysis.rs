//! Storage and correctness estimates for replacing long postings lists with a
//! membership model.
//!
//! All sizes are in bits. The gain of truncating every list longer than `k`
//! and answering those terms from a model of `s` bits per unit is
//!
//! ```text
//! gain(k, s) = sum_{t in R} (size_full(t) - size_trunc(k)) - (|R| + |D|) * s - |T|
//! ```
//!
//! with `R = { t : df(t) > k }`, `size_trunc(k)` the mean encoded size of the
//! lists that have exactly `k` postings, and one replaced-flag bit per term.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::corpus::Query;
use crate::index::{InvertedIndex, VByte};
use crate::membership::{model_storage_bits, ModelCostParams};
use crate::TermId;

/// Model cost per unit used for the optimistic bound.
pub const UPPER_BOUND_S: f64 = 0.0;
/// Model cost per unit used for the pessimistic bound: a compressed
/// 128-dimensional embedding per unit.
pub const LOWER_BOUND_S: f64 = 512.0;

#[derive(thiserror::Error, Debug, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("index has no terms")]
    EmptyIndex,
    #[error("fraction {0} is outside (0, 1]")]
    BadFraction(f64),
    #[error("truncation length k must be at least 1")]
    ZeroK,
    #[error("no truncation lengths given")]
    NoKs,
    #[error("no queries given")]
    NoQueries,
    #[error("model cost must be finite and non-negative, got {0}")]
    BadCost(f64),
}

/// Number of terms per document frequency. Values sum to |T|.
pub fn df_histogram(index: &InvertedIndex) -> BTreeMap<u32, usize> {
    let mut hist = BTreeMap::new();
    for c in index.compressed_lists() {
        *hist.entry(c.df()).or_insert(0) += 1;
    }
    hist
}

/// For each fraction, the fewest terms whose lists together take at least that
/// fraction of the compressed index (largest lists first).
pub fn storage_fraction_curve(
    index: &InvertedIndex,
    fractions: &[f64],
) -> Result<Vec<usize>, AnalysisError> {
    if index.term_count() == 0 {
        return Err(AnalysisError::EmptyIndex);
    }
    if let Some(&bad) = fractions.iter().find(|&&f| !(f > 0.0 && f <= 1.0)) {
        return Err(AnalysisError::BadFraction(bad));
    }
    let mut sizes: Vec<u64> = index
        .compressed_lists()
        .iter()
        .map(|c| c.size_bits())
        .collect();
    sizes.sort_unstable_by(|a, b| b.cmp(a));
    let total = sizes.iter().sum::<u64>() as f64;
    let prefix: Vec<u64> = sizes
        .iter()
        .scan(0u64, |acc, &s| {
            *acc += s;
            Some(*acc)
        })
        .collect();
    Ok(fractions
        .iter()
        .map(|&phi| {
            let need = phi * total;
            let m = prefix.partition_point(|&p| (p as f64) < need) + 1;
            m.min(sizes.len())
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimateKind {
    /// Lists of exactly length k exist.
    Observed,
    /// Linear between the nearest observed lengths.
    Interpolated,
    /// Outside the observed range; the nearest observed length is used.
    Extrapolated,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TruncEstimate {
    pub bits: f64,
    pub kind: EstimateKind,
}

/// Per-term sizes and document frequencies, reused across a sweep over k.
#[derive(Debug, Clone)]
pub struct StorageProfile {
    doc_count: usize,
    // (df, size_bits) in TermId order
    terms: Vec<(u32, u64)>,
    // df -> mean size_bits of lists with that df
    mean_by_len: BTreeMap<u32, f64>,
}

impl StorageProfile {
    pub fn new(index: &InvertedIndex) -> Self {
        let terms: Vec<(u32, u64)> = index
            .compressed_lists()
            .iter()
            .map(|c| (c.df(), c.size_bits()))
            .collect();
        let mut acc: BTreeMap<u32, (u64, u64)> = BTreeMap::new();
        for &(df, bits) in &terms {
            let e = acc.entry(df).or_default();
            e.0 += bits;
            e.1 += 1;
        }
        let mean_by_len = acc
            .into_iter()
            .map(|(df, (sum, n))| (df, sum as f64 / n as f64))
            .collect();
        Self {
            doc_count: index.doc_count(),
            terms,
            mean_by_len,
        }
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn replaced_count(&self, k: u32) -> usize {
        self.terms.iter().filter(|&&(df, _)| df > k).count()
    }

    pub fn estimate_trunc_list_size(&self, k: u32) -> Result<TruncEstimate, AnalysisError> {
        if k == 0 {
            return Err(AnalysisError::ZeroK);
        }
        if let Some(&bits) = self.mean_by_len.get(&k) {
            return Ok(TruncEstimate {
                bits,
                kind: EstimateKind::Observed,
            });
        }
        let below = self.mean_by_len.range(..k).next_back();
        let above = self.mean_by_len.range(k + 1..).next();
        match (below, above) {
            (Some((&lo, &lo_bits)), Some((&hi, &hi_bits))) => {
                let t = f64::from(k - lo) / f64::from(hi - lo);
                Ok(TruncEstimate {
                    bits: lo_bits + (hi_bits - lo_bits) * t,
                    kind: EstimateKind::Interpolated,
                })
            }
            (Some((_, &bits)), None) | (None, Some((_, &bits))) => Ok(TruncEstimate {
                bits,
                kind: EstimateKind::Extrapolated,
            }),
            (None, None) => Err(AnalysisError::EmptyIndex),
        }
    }

    pub fn gain(&self, k: u32, s: f64) -> Result<f64, AnalysisError> {
        let cost = ModelCostParams::new(s).map_err(|e| AnalysisError::BadCost(e.0))?;
        let trunc = self.estimate_trunc_list_size(k)?.bits;
        let mut saved = 0.0f64;
        let mut replaced = 0usize;
        for &(df, bits) in &self.terms {
            if df > k {
                saved += bits as f64 - trunc;
                replaced += 1;
            }
        }
        Ok(saved - model_storage_bits(cost, replaced, self.doc_count) - self.terms.len() as f64)
    }
}

pub fn estimate_trunc_list_size(
    index: &InvertedIndex,
    k: u32,
) -> Result<TruncEstimate, AnalysisError> {
    StorageProfile::new(index).estimate_trunc_list_size(k)
}

/// Estimated bits saved by truncating at `k` with model cost `s` bits per unit.
/// Negative when replacement costs more than it saves.
pub fn gain(index: &InvertedIndex, k: u32, s: f64) -> Result<f64, AnalysisError> {
    StorageProfile::new(index).gain(k, s)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GainReport {
    pub k: u32,
    pub replaced_count: usize,
    pub trunc_list_size_bits: f64,
    pub trunc_estimate: EstimateKind,
    /// Gain with a free model.
    pub gain_upper_bits: f64,
    /// Gain with a 512-bit-per-unit model.
    pub gain_lower_bits: f64,
    /// Actual encoded size of the first-tier lists of the replaced terms.
    pub measured_trunc_bits: u64,
}

pub fn gain_bounds_sweep(
    index: &InvertedIndex,
    ks: &[u32],
) -> Result<Vec<GainReport>, AnalysisError> {
    if ks.is_empty() {
        return Err(AnalysisError::NoKs);
    }
    let profile = StorageProfile::new(index);
    ks.iter()
        .map(|&k| {
            let est = profile.estimate_trunc_list_size(k)?;
            Ok(GainReport {
                k,
                replaced_count: profile.replaced_count(k),
                trunc_list_size_bits: est.bits,
                trunc_estimate: est.kind,
                gain_upper_bits: profile.gain(k, UPPER_BOUND_S)?,
                gain_lower_bits: profile.gain(k, LOWER_BOUND_S)?,
                measured_trunc_bits: measured_trunc_bits(index, k),
            })
        })
        .collect()
}

/// Sum of the encoded first-k list sizes over the terms with df > k.
pub fn measured_trunc_bits(index: &InvertedIndex, k: u32) -> u64 {
    (0..index.term_count() as TermId)
        .filter(|&t| index.df(t) > k)
        .map(|t| {
            let list = index.postings(t);
            8 * VByte::encoded_len(&list[..k as usize]) as u64
        })
        .sum()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GuaranteeReport {
    pub k: u32,
    pub query_count: usize,
    /// Some query term has df <= k.
    pub pct_with_model: f64,
    /// Every query term has df <= k.
    pub pct_without_model: f64,
}

/// Share of queries whose first-tier answer is provably complete, with and
/// without a model for the truncated terms. Tokens outside the vocabulary
/// count as df 0.
pub fn guarantee_percentages(
    queries: &[Query],
    index: &InvertedIndex,
    k: u32,
) -> Result<GuaranteeReport, AnalysisError> {
    if queries.is_empty() {
        return Err(AnalysisError::NoQueries);
    }
    if k == 0 {
        return Err(AnalysisError::ZeroK);
    }
    let mut with = 0usize;
    let mut without = 0usize;
    for q in queries {
        let short = |t: &TermId| index.df(*t) <= k;
        let any = q.has_unknown() || q.terms.iter().any(short);
        let all = q.terms.iter().all(short);
        with += usize::from(any);
        without += usize::from(all);
    }
    let n = queries.len();
    Ok(GuaranteeReport {
        k,
        query_count: n,
        pct_with_model: 100.0 * with as f64 / n as f64,
        pct_without_model: 100.0 * without as f64 / n as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Corpus;

    fn corpus_a() -> Corpus {
        Corpus::from_texts(["the cat sat", "the dog sat", "a cat ran"]).unwrap()
    }

    #[test]
    fn histogram_fixture() {
        let idx = InvertedIndex::build(&corpus_a());
        assert_eq!(df_histogram(&idx), BTreeMap::from([(1, 3), (2, 3)]));
        let single = InvertedIndex::build(&Corpus::from_texts(["x"]).unwrap());
        assert_eq!(df_histogram(&single), BTreeMap::from([(1, 1)]));
    }

    #[test]
    fn storage_curve_fixture() {
        let idx = InvertedIndex::build(&corpus_a());
        assert_eq!(storage_fraction_curve(&idx, &[0.4]).unwrap(), [2]);
        assert_eq!(storage_fraction_curve(&idx, &[1.0]).unwrap(), [6]);
        assert_eq!(
            storage_fraction_curve(&idx, &[16.0 / 72.0 + 1e-9]).unwrap(),
            [2]
        );
        assert_eq!(storage_fraction_curve(&idx, &[0.1]).unwrap(), [1]);
        assert_eq!(
            storage_fraction_curve(&idx, &[0.0]),
            Err(AnalysisError::BadFraction(0.0))
        );
        assert!(storage_fraction_curve(&idx, &[1.5]).is_err());
        let curve = storage_fraction_curve(&idx, &[0.1, 0.3, 0.5, 0.7, 0.9, 1.0]).unwrap();
        assert!(curve.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn storage_curve_rejects_empty_index() {
        let empty = InvertedIndex::from_parts(Vec::new(), 1);
        assert_eq!(
            storage_fraction_curve(&empty, &[0.5]),
            Err(AnalysisError::EmptyIndex)
        );
    }

    #[test]
    fn trunc_estimate_fixture() {
        let idx = InvertedIndex::build(&corpus_a());
        let e = estimate_trunc_list_size(&idx, 1).unwrap();
        assert_eq!((e.bits, e.kind), (8.0, EstimateKind::Observed));
        assert_eq!(estimate_trunc_list_size(&idx, 2).unwrap().bits, 16.0);
        let e = estimate_trunc_list_size(&idx, 5).unwrap();
        assert_eq!((e.bits, e.kind), (16.0, EstimateKind::Extrapolated));
        assert_eq!(estimate_trunc_list_size(&idx, 0), Err(AnalysisError::ZeroK));
    }

    #[test]
    fn trunc_estimate_interpolates() {
        // lengths 1 ("solo": [0] -> 8 bits) and 3 ("tri": [0,1,2] -> 24 bits)
        let idx = InvertedIndex::build(&Corpus::from_texts(["tri solo", "tri", "tri"]).unwrap());
        assert_eq!(df_histogram(&idx), BTreeMap::from([(1, 1), (3, 1)]));
        let e = estimate_trunc_list_size(&idx, 2).unwrap();
        assert_eq!((e.bits, e.kind), (16.0, EstimateKind::Interpolated));
    }

    #[test]
    fn gain_fixture() {
        let idx = InvertedIndex::build(&corpus_a());
        assert_eq!(gain(&idx, 1, 0.0).unwrap(), 18.0);
        assert_eq!(gain(&idx, 1, 1.0).unwrap(), 12.0);
        assert_eq!(gain(&idx, 2, 0.0).unwrap(), -6.0);
        assert_eq!(gain(&idx, 1, 512.0).unwrap(), -3054.0);
        assert!(gain(&idx, 1, -1.0).is_err());
    }

    #[test]
    fn sweep_fixture() {
        let idx = InvertedIndex::build(&corpus_a());
        let reports = gain_bounds_sweep(&idx, &[1, 2]).unwrap();
        assert_eq!(reports[0].gain_upper_bits, 18.0);
        assert_eq!(reports[0].gain_lower_bits, -3054.0);
        assert_eq!(reports[0].measured_trunc_bits, 24);
        let replaced: Vec<usize> = reports.iter().map(|r| r.replaced_count).collect();
        assert_eq!(replaced, [3, 0]);
        assert!(reports
            .iter()
            .all(|r| r.gain_upper_bits >= r.gain_lower_bits));
        assert_eq!(gain_bounds_sweep(&idx, &[]), Err(AnalysisError::NoKs));
    }

    #[test]
    fn guarantees_fixture() {
        let c = corpus_a();
        let idx = InvertedIndex::build(&c);
        let qs = [
            c.parse_query("a cat").unwrap(),
            c.parse_query("the cat").unwrap(),
        ];
        let r = guarantee_percentages(&qs, &idx, 1).unwrap();
        assert_eq!((r.pct_with_model, r.pct_without_model), (50.0, 0.0));
        let r = guarantee_percentages(&qs, &idx, idx.max_df()).unwrap();
        assert_eq!((r.pct_with_model, r.pct_without_model), (100.0, 100.0));
        let r = guarantee_percentages(&[c.parse_query("a dog").unwrap()], &idx, 1).unwrap();
        assert_eq!((r.pct_with_model, r.pct_without_model), (100.0, 100.0));
        assert_eq!(
            guarantee_percentages(&[], &idx, 1),
            Err(AnalysisError::NoQueries)
        );
    }
}
