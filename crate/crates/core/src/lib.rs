//! Exact computation and Monte-Carlo simulation for distributed source
//! simulation without communication.
//!
//! Two agents observe `U^n` and `V^n` drawn i.i.d. from a joint law and must
//! each produce a sequence locally, with no messages and no shared
//! randomness, so that the pair of outputs is close in relative entropy to an
//! i.i.d. target. The crate is organized as:
//!
//! - [`dist`]: probability tables, kernels, information measures, maximal
//!   correlation and the Gács–Körner / Wyner common-information quantities.
//! - [`fourier`]: Walsh–Hadamard analysis of Boolean functions on `{-1,+1}^n`.
//! - [`schemes`]: exact analysis of deterministic and randomized simulation
//!   schemes for doubly symmetric binary sources.
//! - [`covering`]: soft-covering and hybrid-scheme experiments with exact
//!   per-codebook divergence.
//! - [`counterexample`]: the block-parity construction whose output channel
//!   stays far from every memoryless channel.
//!
//! All logarithms are base 2.

pub mod counterexample;
pub mod covering;
pub mod dist;
pub mod error;
pub mod fourier;
pub mod numeric;
pub mod sampling;
pub mod schemes;

pub use error::{Error, Result};
