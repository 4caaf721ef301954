//! Per-trial seeds split from a campaign's master seed.

use std::collections::HashMap;

use rmflab_core::counter::counter_word;

use crate::error::{HarnessError, Result};

/// Seed for trial `trial` at length `n`: the ChaCha8 word at position
/// `trial` of stream `n` under key `master`.
pub fn derive_seed(master: u64, n: usize, trial: usize) -> u64 {
    counter_word(master, n as u64, trial as u64)
}

/// Fails if two `(N, trial)` pairs of the campaign share a derived seed.
pub fn scan_collisions(master: u64, n_values: &[usize], trials: usize) -> Result<()> {
    let mut seen: HashMap<u64, (usize, usize)> = HashMap::with_capacity(n_values.len() * trials);
    for &n in n_values {
        for t in 0..trials {
            let s = derive_seed(master, n, t);
            if let Some(&(n0, t0)) = seen.get(&s) {
                return Err(HarnessError::SeedCollision(format!(
                    "(N={n0}, trial={t0}) and (N={n}, trial={t}) both map to {s}"
                )));
            }
            seen.insert(s, (n, t));
        }
    }
    Ok(())
}
