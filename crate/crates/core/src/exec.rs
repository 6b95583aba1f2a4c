//! Execution strategy for the Monte-Carlo loops.
//!
//! Every sampled quantity is split into fixed-size chunks, each chunk owns
//! the random stream `(seed, chunk index)`, and partial results are combined
//! in chunk order. The output is therefore identical under either strategy
//! and any thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Samples drawn from one random substream.
pub const CHUNK: usize = 1024;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Uses rayon when the `parallel` feature is enabled, otherwise runs
    /// sequentially.
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

/// Independent stream number `stream` of the master `seed`.
pub fn substream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Applies `f` to `0..n` and returns the results in index order.
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

/// Splits `n` samples into chunks of [`CHUNK`]; `f(chunk, start, len)` is
/// called once per chunk and the partial results come back in chunk order.
pub fn map_chunks<T, F>(exec: Execution, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize, usize, usize) -> T + Sync + Send,
{
    let chunks = n.div_ceil(CHUNK);
    map_indexed(exec, chunks, |c| {
        let start = c * CHUNK;
        let len = CHUNK.min(n - start);
        f(c, start, len)
    })
}
