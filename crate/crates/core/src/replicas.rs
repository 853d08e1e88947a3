//! Independent replicas on the rayon pool, collected in replica order.

use rayon::prelude::*;

use crate::error::Result;
use crate::rng::StreamRng;

/// Runs `f(replica, rng)` for `replica in 0..n`, each with its own stream of
/// `seed`. The output order and content do not depend on the thread count.
pub fn run_replicas<T, F>(seed: u64, n: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize, &mut StreamRng) -> Result<T> + Sync,
{
    (0..n)
        .into_par_iter()
        .map(|r| {
            let mut rng = StreamRng::for_replica(seed, r as u64);
            f(r, &mut rng)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_independent_of_pool() {
        let draw = || run_replicas(9, 50, |r, rng| Ok((r, rng.exp1()))).unwrap();
        let one = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(draw);
        let four = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap()
            .install(draw);
        assert_eq!(one, four);
        assert!(one.iter().enumerate().all(|(i, (r, _))| i == *r));
    }
}
