//! Data-parallel map, compiled against rayon when the `parallel` feature is
//! enabled and falling back to a plain sequential loop otherwise.
//!
//! Output order always matches input order, and each element is computed by
//! the same sequence of floating-point operations in both modes, so results
//! are bitwise identical across the two builds and across thread counts.

#[cfg(feature = "parallel")]
pub(crate) fn maybe_par_map<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync + Send,
{
    use rayon::prelude::*;
    items.into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn maybe_par_map<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync + Send,
{
    items.into_iter().map(f).collect()
}
