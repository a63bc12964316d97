use crate::index::InvertedIndex;
use crate::membership::{MembershipModel, Scope};
use crate::{DocId, TermId};

/// One Bloom filter over all (term, doc) pairs of the in-scope terms.
///
/// Sized at `bits_per_pair` bits per inserted pair with `ceil(bits_per_pair * ln 2)`
/// probes, positions derived by double hashing. No false negatives.
#[derive(Debug, Clone)]
pub struct BloomModel {
    words: Vec<u64>,
    bit_len: u64,
    hashes: u32,
    scope: Vec<bool>,
}

impl BloomModel {
    pub fn build(index: &InvertedIndex, scope: &Scope, bits_per_pair: u32) -> Self {
        let bits_per_pair = bits_per_pair.max(1);
        let terms = scope.term_ids(index.term_count());
        let pairs: u64 = terms.iter().map(|&t| u64::from(index.df(t))).sum();
        let bit_len = (pairs * u64::from(bits_per_pair)).max(64);
        let hashes = (f64::from(bits_per_pair) * std::f64::consts::LN_2).ceil() as u32;
        let mut model = Self {
            words: vec![0; bit_len.div_ceil(64) as usize],
            bit_len,
            hashes,
            scope: vec![false; index.term_count()],
        };
        for t in terms {
            model.scope[t as usize] = true;
            for d in index.postings(t).iter() {
                model.insert(t, d);
            }
        }
        model
    }

    pub fn hash_count(&self) -> u32 {
        self.hashes
    }

    pub fn bit_len(&self) -> u64 {
        self.bit_len
    }

    fn positions(&self, term: TermId, doc: DocId) -> impl Iterator<Item = u64> + '_ {
        let key = (u64::from(term) << 32) | u64::from(doc);
        let h1 = splitmix64(key);
        let h2 = splitmix64(key ^ 0x9E37_79B9_7F4A_7C15) | 1;
        (0..u64::from(self.hashes)).map(move |i| h1.wrapping_add(i.wrapping_mul(h2)) % self.bit_len)
    }

    fn insert(&mut self, term: TermId, doc: DocId) {
        let positions: Vec<u64> = self.positions(term, doc).collect();
        for p in positions {
            self.words[(p / 64) as usize] |= 1 << (p % 64);
        }
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

impl MembershipModel for BloomModel {
    fn contains(&self, term: TermId, doc: DocId) -> bool {
        self.positions(term, doc)
            .all(|p| self.words[(p / 64) as usize] & (1 << (p % 64)) != 0)
    }

    fn is_exact(&self) -> bool {
        false
    }

    fn covers(&self, term: TermId) -> bool {
        self.scope.get(term as usize).copied().unwrap_or(false)
    }
}
