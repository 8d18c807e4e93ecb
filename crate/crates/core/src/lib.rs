//! Computable upper bounds on Jacobsthal's function `h(k)`.
//!
//! `h(k)` is the least `m` such that every run of `m` consecutive integers
//! contains one coprime to the primorial `P_k`. This crate computes a
//! recursive lower bound `phi_low(m, k)` on the fewest coprimes any such run
//! can hold; the least `m` where it turns positive is a proven upper bound
//! on `h(k)`. Brute-force oracles in [`oracle`] cover small `k`.

pub mod error;
pub mod known_h;
pub mod oracle;
pub mod phi_low;
pub mod primes;
pub mod search;
pub mod tables;

pub use error::{Error, Result};
pub use known_h::KnownH;
pub use phi_low::{e_correction, header_terms, phi_low, BoundConfig, BoundContext, MemoCache};
pub use primes::{sieve_primes, CappedUint, PrimeBasis};
pub use search::{
    coeff_sweep, find_b, kanold_log10, ratio_natural_log, stevens_log10, sweep_b, BoundResult,
    Budget, CoeffResult,
};
pub use tables::{PhiMinTable, TableSet, TableStatus};
