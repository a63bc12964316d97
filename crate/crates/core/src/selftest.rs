//! End-to-end checks on a three-document reference collection:
//!
//! ```text
//! d0: the cat sat
//! d1: the dog sat
//! d2: a cat ran
//! ```
//!
//! Every expected value below was worked out by hand from those three lines.

use crate::analysis::{gain, guarantee_percentages};
use crate::corpus::Corpus;
use crate::engine::{query_block, query_exhaustive, query_oracle, query_tiered};
use crate::format::IndexFile;
use crate::index::InvertedIndex;
use crate::membership::{ExactModel, Scope};
use crate::partition::{BlockIndex, TieredIndex};
use crate::DocId;

pub const REFERENCE_CORPUS: &str = "the cat sat\nthe dog sat\na cat ran\n";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

struct Checks(Vec<CheckOutcome>);

impl Checks {
    fn eq<T: PartialEq + std::fmt::Debug>(&mut self, name: &'static str, got: T, want: T) {
        let passed = got == want;
        let detail = if passed {
            format!("{got:?}")
        } else {
            format!("got {got:?}, want {want:?}")
        };
        self.0.push(CheckOutcome {
            name,
            passed,
            detail,
        });
    }
}

pub fn run() -> Vec<CheckOutcome> {
    let mut c = Checks(Vec::new());
    let corpus = Corpus::ingest(REFERENCE_CORPUS.as_bytes()).expect("reference corpus parses");
    c.eq(
        "corpus sizes",
        (corpus.doc_count(), corpus.term_count()),
        (3, 6),
    );
    c.eq(
        "vocabulary order",
        corpus.terms().join(","),
        "a,cat,dog,ran,sat,the".to_string(),
    );

    let index = InvertedIndex::build(&corpus);
    let lists: Vec<Vec<DocId>> = (0..6).map(|t| index.postings(t).into_vec()).collect();
    c.eq(
        "postings",
        lists,
        vec![
            vec![2],
            vec![0, 2],
            vec![1],
            vec![2],
            vec![0, 1],
            vec![0, 1],
        ],
    );
    c.eq("index bits", index.total_bits(), 72);

    let file = IndexFile::new(index.clone(), Some(corpus.vocabulary()));
    let reread = IndexFile::from_bytes(&file.to_bytes()).map(|f| f == file);
    c.eq("index file roundtrip", reread.ok(), Some(true));

    let q = |text: &str| corpus.parse_query(text).expect("fixture query");
    let exact = ExactModel::build(&index, &Scope::All);

    let oracle = query_oracle(&q("cat sat"), &index).map(|r| r.doc_ids);
    c.eq("oracle cat sat", oracle.ok(), Some(vec![0]));

    let r = query_exhaustive(&q("cat sat"), &exact, 3).ok();
    c.eq(
        "exhaustive cat sat",
        r.map(|r| (r.doc_ids, r.candidates_scanned)),
        Some((vec![0], 3)),
    );
    let r = query_exhaustive(&q("the sat"), &exact, 3).ok();
    c.eq("exhaustive the sat", r.map(|r| r.doc_ids), Some(vec![0, 1]));
    let r = query_exhaustive(&q("cat dog"), &exact, 3).ok();
    c.eq("exhaustive cat dog", r.map(|r| r.doc_ids), Some(vec![]));

    let tiers = TieredIndex::build(&index, 1).expect("k=1");
    c.eq(
        "replaced set k=1",
        tiers.replaced_set().into_iter().collect::<Vec<_>>(),
        vec![1, 4, 5],
    );
    let r = query_tiered(&q("the sat"), &tiers, &exact, false).ok();
    c.eq(
        "tiered the sat",
        r.map(|r| (r.doc_ids, r.guaranteed)),
        Some((vec![0], Some(false))),
    );
    let r = query_tiered(&q("the sat"), &tiers, &exact, true).ok();
    c.eq(
        "tiered the sat fallback",
        r.map(|r| (r.doc_ids, r.used_fallback)),
        Some((vec![0, 1], Some(true))),
    );
    let r = query_tiered(&q("a cat"), &tiers, &exact, false).ok();
    c.eq(
        "tiered a cat",
        r.map(|r| (r.doc_ids, r.guaranteed)),
        Some((vec![2], Some(true))),
    );

    let blocks = BlockIndex::build(&index, 2, 0).expect("beta=2");
    let r = query_block(&q("the cat"), &blocks, &exact).ok();
    c.eq(
        "block the cat",
        r.map(|r| (r.doc_ids, r.candidates_scanned)),
        Some((vec![0], 2)),
    );
    let r = query_block(&q("a dog"), &blocks, &exact).ok();
    c.eq(
        "block a dog",
        r.map(|r| (r.doc_ids, r.candidates_scanned)),
        Some((vec![], 0)),
    );

    c.eq("gain k=1 s=0", gain(&index, 1, 0.0).ok(), Some(18.0));
    c.eq("gain k=1 s=1", gain(&index, 1, 1.0).ok(), Some(12.0));
    c.eq("gain k=2 s=0", gain(&index, 2, 0.0).ok(), Some(-6.0));
    c.eq("gain k=1 s=512", gain(&index, 1, 512.0).ok(), Some(-3054.0));

    let qs = [q("a cat"), q("the cat")];
    let g = guarantee_percentages(&qs, &index, 1)
        .ok()
        .map(|g| (g.pct_with_model, g.pct_without_model));
    c.eq("guarantees k=1", g, Some((50.0, 0.0)));

    c.0
}

#[cfg(test)]
mod tests {
    #[test]
    fn all_checks_pass() {
        for outcome in super::run() {
            assert!(outcome.passed, "{}: {}", outcome.name, outcome.detail);
        }
    }
}
