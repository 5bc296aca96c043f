//! Sequential or rayon-backed execution of the data-parallel loops
//! (per-document analysis, statistics shards, vocabulary scans).

/// How batch work is run. `Parallel` exists only with the `parallel` feature.
/// The default is `Parallel` when available.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    #[cfg_attr(not(feature = "parallel"), default)]
    Sequential,
    #[cfg(feature = "parallel")]
    #[default]
    Parallel,
}

impl Execution {
    /// Maps every item, preserving order.
    pub fn map<T, U, F>(self, items: &[T], f: F) -> Vec<U>
    where
        T: Sync,
        U: Send,
        F: Fn(&T) -> U + Sync + Send,
    {
        match self {
            Execution::Sequential => items.iter().map(f).collect(),
            #[cfg(feature = "parallel")]
            Execution::Parallel => {
                use rayon::prelude::*;
                items.par_iter().map(f).collect()
            }
        }
    }

    /// Folds items into per-shard accumulators and merges them. `merge` must
    /// be associative with `identity` as its unit.
    pub fn fold<T, A, I, F, M>(self, items: &[T], identity: I, fold: F, merge: M) -> A
    where
        T: Sync,
        A: Send,
        I: Fn() -> A + Sync + Send,
        F: Fn(A, &T) -> A + Sync + Send,
        M: Fn(A, A) -> A + Sync + Send,
    {
        match self {
            Execution::Sequential => items.iter().fold(identity(), fold),
            #[cfg(feature = "parallel")]
            Execution::Parallel => {
                use rayon::prelude::*;
                items.par_iter().fold(&identity, &fold).reduce(&identity, &merge)
            }
        }
    }

    /// Keeps the items for which `keep` returns a value, preserving order.
    pub fn filter_map<T, U, F>(self, items: &[T], keep: F) -> Vec<U>
    where
        T: Sync,
        U: Send,
        F: Fn(&T) -> Option<U> + Sync + Send,
    {
        match self {
            Execution::Sequential => items.iter().filter_map(keep).collect(),
            #[cfg(feature = "parallel")]
            Execution::Parallel => {
                use rayon::prelude::*;
                items.par_iter().filter_map(keep).collect()
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn modes() -> Vec<Execution> {
        vec![
            Execution::Sequential,
            #[cfg(feature = "parallel")]
            Execution::Parallel,
        ]
    }

    #[test]
    fn modes_agree() {
        let items: Vec<u64> = (0..10_000).collect();
        for m in modes() {
            assert_eq!(m.map(&items, |x| x * 2)[9_999], 19_998);
            assert_eq!(m.fold(&items, || 0u64, |a, x| a + x, |a, b| a + b), 49_995_000);
            assert_eq!(m.filter_map(&items, |x| (x % 1000 == 0).then_some(*x)).len(), 10);
        }
    }
}
