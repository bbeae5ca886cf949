//! Fixtures shared by the benchmarks.

use taylorom::{BcKind, Problem, SimConfig};

/// Reference setup shortened to `nt` steps.
pub fn reference(bc: BcKind, nt: usize) -> Problem {
    let mut cfg = SimConfig::reference(bc);
    cfg.nt = nt;
    Problem::new(cfg).expect("reference configuration is valid")
}

/// Deterministic pseudo-random field of length `len`.
pub fn field(len: usize, seed: u64) -> Vec<f64> {
    (0..len)
        .map(|i| ((i as u64).wrapping_mul(2654435761).wrapping_add(seed) % 1000) as f64 / 500.0 - 1.0)
        .collect()
}
