//! Internal helpers for deterministic, optionally parallel window scans.
//!
//! Work is split into contiguous chunks, one per worker; partial results are
//! merged in chunk order. Because every merged quantity is an exact integer
//! count (or a map of counts), the outcome is independent of the worker
//! count — the property the public reports rely on.

use std::collections::HashMap;
use std::hash::Hash;

use crate::group::GroupContext;
use crate::symbolic::SymbolicFunction;

/// Apply `f` to contiguous chunks of `items` (one chunk per worker) and
/// return the per-chunk results in chunk order.
pub(crate) fn map_chunks<T: Sync, R: Send>(
    items: &[T],
    workers: usize,
    f: impl Fn(&[T]) -> R + Sync,
) -> Vec<R> {
    let workers = workers.max(1).min(items.len().max(1));
    if workers == 1 {
        return vec![f(items)];
    }
    let chunk_len = items.len().div_ceil(workers);
    std::thread::scope(|scope| {
        let handles: Vec<_> = items
            .chunks(chunk_len)
            .map(|chunk| scope.spawn(|| f(chunk)))
            .collect();
        handles.into_iter().map(|h| h.join().expect("scan worker panicked")).collect()
    })
}

/// Merge per-chunk count maps by summing counts per key.
pub(crate) fn merge_counts<K: Eq + Hash>(parts: Vec<HashMap<K, u64>>) -> HashMap<K, u64> {
    let mut parts = parts.into_iter();
    let mut total = parts.next().unwrap_or_default();
    for part in parts {
        for (key, count) in part {
            *total.entry(key).or_insert(0) += count;
        }
    }
    total
}

/// Evaluate a symbolic function over a slice of elements, in order.
pub(crate) fn window_values<G: GroupContext>(
    ctx: &G,
    x: &(dyn SymbolicFunction<G> + Sync),
    elems: &[G::Elem],
    workers: usize,
) -> Vec<u8> {
    let chunks = map_chunks(elems, workers, |chunk| {
        chunk.iter().map(|g| x.eval(ctx, g)).collect::<Vec<u8>>()
    });
    let mut out = Vec::with_capacity(elems.len());
    for chunk in chunks {
        out.extend_from_slice(&chunk);
    }
    out
}

/// Precomputed values of a symbolic function over a window, with O(1)
/// lookup. Uses a flat vector when the window is a contiguous index range
/// of a dense carrier, a hash map otherwise.
pub(crate) enum ValueTable<E> {
    Dense { start: i64, vals: Vec<u8> },
    Map(HashMap<E, u8>),
}

impl<E: Clone + Eq + Hash> ValueTable<E> {
    /// Tabulate `x` over `elems` (canonically sorted window elements).
    pub(crate) fn build<G: GroupContext<Elem = E>>(
        ctx: &G,
        x: &(dyn SymbolicFunction<G> + Sync),
        elems: &[E],
        workers: usize,
    ) -> ValueTable<E> {
        let vals = window_values(ctx, x, elems, workers);
        ValueTable::from_values(ctx, elems, vals)
    }

    /// Wrap already-known values (parallel to `elems`).
    pub(crate) fn from_values<G: GroupContext<Elem = E>>(
        ctx: &G,
        elems: &[E],
        vals: Vec<u8>,
    ) -> ValueTable<E> {
        debug_assert_eq!(elems.len(), vals.len());
        if let Some(start) = dense_start(ctx, elems) {
            ValueTable::Dense { start, vals }
        } else {
            ValueTable::Map(elems.iter().cloned().zip(vals).collect())
        }
    }

    /// Value at `e`, or `None` when `e` is outside the window.
    pub(crate) fn get<G: GroupContext<Elem = E>>(&self, ctx: &G, e: &E) -> Option<u8> {
        match self {
            ValueTable::Dense { start, vals } => {
                let idx = ctx.to_index(e)?;
                let off = idx.checked_sub(*start)?;
                usize::try_from(off).ok().and_then(|o| vals.get(o)).copied()
            }
            ValueTable::Map(map) => map.get(e).copied(),
        }
    }
}

/// If `elems` is exactly a contiguous index interval of a dense carrier,
/// return its first index.
pub(crate) fn dense_start<G: GroupContext>(ctx: &G, elems: &[G::Elem]) -> Option<i64> {
    let first = ctx.to_index(elems.first()?)?;
    let last = ctx.to_index(elems.last()?)?;
    if last - first + 1 == elems.len() as i64 {
        Some(first)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::IntAdd;

    #[test]
    fn chunked_map_preserves_order() {
        let items: Vec<u32> = (0..101).collect();
        for workers in [1, 2, 4, 7] {
            let parts = map_chunks(&items, workers, |c| c.to_vec());
            let flat: Vec<u32> = parts.into_iter().flatten().collect();
            assert_eq!(flat, items);
        }
    }

    #[test]
    fn merged_counts_are_worker_independent() {
        let items: Vec<u64> = (0..1000).map(|i| i % 7).collect();
        let count = |workers: usize| {
            merge_counts(map_chunks(&items, workers, |chunk| {
                let mut m: HashMap<u64, u64> = HashMap::new();
                for &v in chunk {
                    *m.entry(v).or_insert(0) += 1;
                }
                m
            }))
        };
        let base = count(1);
        for workers in [2, 3, 4, 8] {
            assert_eq!(count(workers), base);
        }
    }

    #[test]
    fn dense_detection_requires_contiguity() {
        let ctx = IntAdd;
        let contiguous: Vec<i64> = (5..15).collect();
        assert_eq!(dense_start(&ctx, &contiguous), Some(5));
        let gapped = vec![1i64, 2, 4];
        assert_eq!(dense_start(&ctx, &gapped), None);
    }
}
