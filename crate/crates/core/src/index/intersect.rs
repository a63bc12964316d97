use crate::index::PostingsList;
use crate::DocId;

#[derive(thiserror::Error, Debug, Clone, PartialEq, Eq)]
pub enum IntersectError {
    #[error("intersection of zero lists is undefined")]
    NoLists,
}

/// Exact conjunctive intersection. Walks the shortest list and gallops the
/// others forward, so cost is bounded by the shortest list times log of the rest.
pub fn intersect(lists: &[&PostingsList]) -> Result<PostingsList, IntersectError> {
    let slices: Vec<&[DocId]> = lists.iter().map(|l| l.as_slice()).collect();
    intersect_sorted(&slices).map(PostingsList::from_sorted)
}

/// Same as [`intersect`] over raw strictly increasing slices.
pub fn intersect_sorted(lists: &[&[u32]]) -> Result<Vec<u32>, IntersectError> {
    let mut order: Vec<&[u32]> = lists.to_vec();
    if order.is_empty() {
        return Err(IntersectError::NoLists);
    }
    order.sort_by_key(|l| l.len());
    let (shortest, rest) = order.split_first().expect("non-empty");
    let mut cursors = vec![0usize; rest.len()];
    let mut out = Vec::new();
    'candidates: for &doc in *shortest {
        for (list, cursor) in rest.iter().zip(cursors.iter_mut()) {
            *cursor += gallop(&list[*cursor..], doc);
            match list.get(*cursor) {
                Some(&d) if d == doc => {}
                Some(_) => continue 'candidates,
                None => break 'candidates,
            }
        }
        out.push(doc);
    }
    Ok(out)
}

/// Index of the first element `>= target`.
fn gallop(list: &[DocId], target: DocId) -> usize {
    let mut hi = 1;
    while hi < list.len() && list[hi - 1] < target {
        hi *= 2;
    }
    let lo = hi / 2;
    let hi = hi.min(list.len());
    lo + list[lo..hi].partition_point(|&d| d < target)
}
