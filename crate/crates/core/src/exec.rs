//! Data-parallel helpers. With the `parallel` feature the work is spread over
//! rayon's pool; without it (or with [`Execution::Sequential`]) it runs in order.
//! Results are always returned in index order, so callers stay deterministic.

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

/// `(0..n).map(f).collect()`, possibly in parallel.
pub fn map_indexed<T, F>(exec: Execution, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            (0..n).into_par_iter().map(f).collect()
        }
        _ => (0..n).map(f).collect(),
    }
}

/// `items.iter().map(f).collect()`, possibly in parallel.
pub fn map_slice<S, T, F>(exec: Execution, items: &[S], f: F) -> Vec<T>
where
    S: Sync,
    T: Send,
    F: Fn(&S) -> T + Sync + Send,
{
    map_indexed(exec, items.len(), |i| f(&items[i]))
}

/// SplitMix64 finalizer; derives independent stream seeds from a master seed.
pub fn derive_seed(master: u64, stream: &[u64]) -> u64 {
    let mut z = master;
    for s in stream {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15).wrapping_add(*s);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^= z >> 31;
    }
    z
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_modes_agree() {
        let a = map_indexed(Execution::Sequential, 100, |i| i * i);
        let b = map_indexed(Execution::Parallel, 100, |i| i * i);
        assert_eq!(a, b);
    }

    #[test]
    fn seeds_differ_per_stream() {
        assert_ne!(derive_seed(7, &[0, 1]), derive_seed(7, &[1, 0]));
        assert_eq!(derive_seed(7, &[3, 4]), derive_seed(7, &[3, 4]));
    }
}
