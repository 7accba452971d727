//! Exact analysis of simulation schemes driven by a DSBS source.
//!
//! Bit-vectors of length `n` are `usize` indices: bit `i` is coordinate `i`
//! (0-based), a clear bit is `+1` and a set bit is `-1`. Block tables over
//! `(X^n, Y^n)` have `2n` binary coordinates ordered `(X_1..X_n, Y_1..Y_n)`;
//! see [`joint_index`].

mod diagnostics;
mod map;
mod scalar;
mod scheme;

pub use diagnostics::{
    conditional_correlation, manouver_check, power_bound_check, ConditionalCorrelation, ManouverReport,
    PowerBoundReport, DEGENERATE_VARIANCE, PREMISE_TOLERANCE,
};
pub use map::{
    collision_probability, is_signed_permutation, preserves_hamming, BooleanMap, SignedPermutation,
    HAMMING_CHECK_MAX_N,
};
pub use scalar::{best_scalar_approximation, ScalarApproximation, EXHAUSTIVE_ALIGNMENT_MAX_N, SCALAR_APPROX_MAX_N};
pub use scheme::{
    block_divergence, coordinate_joint, dsbs_block, dsbs_block_capped, expected_hamming, hamming_lower_bound,
    induced_joint, induced_joint_capped, induced_joint_randomized, induced_joint_randomized_capped, joint_index,
    level_profile, pushforward_dsbs, simulation_divergence, simulation_divergence_capped, split_joint_index,
    CoordinateLevels, DeterministicScheme, LevelProfile, RandomizedScheme, Scheme, SchemeFile, SparseRows,
    SCHEME_CELL_CAP,
};
