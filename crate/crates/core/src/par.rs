//! Order-preserving parallel map, serial when the `parallel` feature is off.

#[cfg(feature = "parallel")]
pub(crate) fn map_ordered<T: Copy + Sync, R: Send>(items: &[T], f: impl Fn(T) -> R + Sync + Send) -> Vec<R> {
    use rayon::prelude::*;
    items.par_iter().map(|x| f(*x)).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map_ordered<T: Copy, R>(items: &[T], f: impl Fn(T) -> R) -> Vec<R> {
    items.iter().map(|x| f(*x)).collect()
}
