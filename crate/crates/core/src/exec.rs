//! Trial execution strategy.
//!
//! Every trial loop in the crate goes through [`Execution::map_indexed`]. The
//! closure receives the trial index and must derive all of its randomness
//! from that index, so the collected vector (and anything reduced from it in
//! index order) does not depend on the strategy or on the thread count.

/// How independent trials are scheduled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    /// Run trials one after another on the calling thread.
    Sequential,
    /// Run trials on the rayon global pool. Without the `parallel` feature
    /// this behaves like [`Execution::Sequential`].
    #[default]
    Parallel,
}

impl Execution {
    /// Whether this build can actually run trials concurrently.
    pub const fn parallel_available() -> bool {
        cfg!(feature = "parallel")
    }

    /// Evaluates `f(0), .., f(count - 1)` and returns the results in index
    /// order.
    pub fn map_indexed<T, F>(self, count: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match self {
            Execution::Sequential => (0..count).map(f).collect(),
            Execution::Parallel => par_map(count, f),
        }
    }
}

#[cfg(feature = "parallel")]
fn par_map<T, F>(count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..count).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn par_map<T, F>(count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..count).map(f).collect()
}

/// Neumaier-compensated sum, evaluated in slice order.
pub fn compensated_sum(values: &[f64]) -> f64 {
    let mut sum = 0.0_f64;
    let mut comp = 0.0_f64;
    for &v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// SplitMix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for one random stream, derived from the run seed, the trial index and
/// the role of the stream within the trial (e.g. target vs auxiliary draws).
pub fn derive_seed(base_seed: u64, trial: u64, role: u64) -> u64 {
    mix64(mix64(mix64(base_seed) ^ trial) ^ role.wrapping_mul(0xd6e8_feb8_6659_fd93))
}
