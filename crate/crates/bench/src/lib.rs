//! Shared inputs for the benchmarks.

use ietpc::construct::{build_pc_from_iet, ConstructedPc};
use ietpc::pc::random_half_slope_pc;
use ietpc::{ExactNumber, Iet, PiecewiseContraction};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// `α = 2 − φ`, the rotation number of the golden rotation.
pub fn alpha() -> ExactNumber {
    ExactNumber::from(2) - ExactNumber::golden_ratio()
}

pub fn golden_pc(depth: usize) -> ConstructedPc {
    build_pc_from_iet(&Iet::golden_rotation(), None, depth).expect("golden rotation constructs")
}

pub fn random_pcs(count: usize, seed: u64) -> Vec<PiecewiseContraction> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_half_slope_pc(&mut rng)).collect()
}
