//! Order-preserving map over independent work items.
//!
//! With the `parallel` feature the items are spread over a rayon pool of the
//! requested size; otherwise, or with `jobs == 1`, they run in sequence. The
//! output order always follows the input order, so results are identical
//! whatever the worker count.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Worker count; `0` means "all available cores".
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Jobs(pub usize);

impl Jobs {
    pub const SEQUENTIAL: Jobs = Jobs(1);
    pub const ALL: Jobs = Jobs(0);

    pub fn is_sequential(self) -> bool {
        self.0 == 1 || !cfg!(feature = "parallel")
    }
}

impl Default for Jobs {
    fn default() -> Self {
        Jobs::ALL
    }
}

pub fn par_map<T, R, F>(items: &[T], jobs: Jobs, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    if jobs.is_sequential() || items.len() < 2 {
        return items.iter().map(f).collect();
    }
    #[cfg(feature = "parallel")]
    {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs.0).build();
        match pool {
            Ok(pool) => pool.install(|| items.par_iter().map(&f).collect()),
            Err(e) => {
                log::warn!("could not build a thread pool ({e}); running sequentially");
                items.iter().map(f).collect()
            }
        }
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved_for_any_worker_count() {
        let items: Vec<u64> = (0..97).collect();
        let f = |x: &u64| x * x + 1;
        let seq = par_map(&items, Jobs::SEQUENTIAL, f);
        for j in [0, 2, 3, 8] {
            assert_eq!(par_map(&items, Jobs(j), f), seq);
        }
        assert!(par_map(&Vec::<u64>::new(), Jobs::ALL, f).is_empty());
    }
}
