//! Execution policy for the Monte Carlo and sweep loops.
//!
//! Every replica draws from its own ChaCha stream keyed by `(seed, stream)`, so
//! results do not depend on the execution mode or on the thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// How data-parallel loops are executed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExecMode {
    Sequential,
    /// Uses rayon when the `parallel` feature is enabled, sequential otherwise.
    #[default]
    Parallel,
}

impl ExecMode {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == ExecMode::Parallel
    }
}

/// RNG for replica `stream` of the experiment seeded by `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Independent seed for sub-experiment `tag` of the experiment seeded by `seed`.
pub fn sub_seed(seed: u64, tag: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = seed ^ tag.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Evaluates `f(i)` for `i in 0..n` and returns the results in index order.
pub fn map_indexed<T, F>(mode: ExecMode, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if mode.is_parallel() {
        use rayon::prelude::*;
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = mode;
    (0..n).map(f).collect()
}

/// Like [`map_indexed`] with a per-index RNG stream derived from `seed`.
pub fn map_seeded<T, F>(mode: ExecMode, n: usize, seed: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize, &mut ChaCha8Rng) -> T + Sync + Send,
{
    map_indexed(mode, n, |i| {
        let mut rng = stream_rng(seed, i as u64);
        f(i, &mut rng)
    })
}

/// Runs `f` on each element of `data` in place.
pub fn for_each_mut<T, F>(mode: ExecMode, data: &mut [T], f: F)
where
    T: Send,
    F: Fn(usize, &mut T) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if mode.is_parallel() {
        use rayon::prelude::*;
        data.par_iter_mut().enumerate().for_each(|(i, x)| f(i, x));
        return;
    }
    let _ = mode;
    data.iter_mut().enumerate().for_each(|(i, x)| f(i, x));
}

/// Caps the global rayon pool. Returns false if the pool was already built.
pub fn init_threads(threads: usize) -> bool {
    #[cfg(feature = "parallel")]
    {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .is_ok()
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = threads;
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn modes_agree() {
        let a = map_seeded(ExecMode::Sequential, 64, 9, |_, r| r.random::<u64>());
        let b = map_seeded(ExecMode::Parallel, 64, 9, |_, r| r.random::<u64>());
        assert_eq!(a, b);
    }

    #[test]
    fn streams_differ() {
        let mut a = stream_rng(1, 0);
        let mut b = stream_rng(1, 1);
        assert_ne!(a.random::<u64>(), b.random::<u64>());
    }
}
