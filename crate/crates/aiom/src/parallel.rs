//! Order-preserving batch map, parallel under the `parallel` feature and
//! sequential otherwise. Callers must keep results order-independent in
//! meaning; this helper only guarantees output order matches input order.

#[cfg(feature = "parallel")]
pub fn map_batch<I, O, F>(items: Vec<I>, f: F) -> Vec<O>
where
    I: Send,
    O: Send,
    F: Fn(I) -> O + Sync + Send,
{
    use rayon::prelude::*;
    items.into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_batch<I, O, F>(items: Vec<I>, f: F) -> Vec<O>
where
    F: Fn(I) -> O,
{
    items.into_iter().map(f).collect()
}

/// Always-sequential variant, kept callable under every feature set so the
/// two execution paths can be compared directly in tests and benches.
pub fn map_batch_seq<I, O, F>(items: Vec<I>, f: F) -> Vec<O>
where
    F: Fn(I) -> O,
{
    items.into_iter().map(f).collect()
}
