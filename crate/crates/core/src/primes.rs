//! Prime generation and saturating primorial arithmetic.
//!
//! Indices are 1-based throughout: `p(1) = 2`, and `P_0 = 1` is the empty
//! product.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};

/// An unsigned value that is either exact or known to exceed `u128::MAX`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CappedUint {
    Exact(u128),
    Saturated,
}

impl CappedUint {
    pub fn exact(self) -> Option<u128> {
        match self {
            CappedUint::Exact(v) => Some(v),
            CappedUint::Saturated => None,
        }
    }

    pub fn is_saturated(self) -> bool {
        matches!(self, CappedUint::Saturated)
    }

    pub fn checked_mul(self, rhs: u128) -> CappedUint {
        match self {
            CappedUint::Exact(v) => v
                .checked_mul(rhs)
                .map_or(CappedUint::Saturated, CappedUint::Exact),
            CappedUint::Saturated => CappedUint::Saturated,
        }
    }

    /// The exact value as a `u64`, if it fits.
    pub fn as_u64(self) -> Option<u64> {
        self.exact().and_then(|v| u64::try_from(v).ok())
    }
}

impl PartialOrd for CappedUint {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for CappedUint {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (CappedUint::Exact(a), CappedUint::Exact(b)) => a.cmp(b),
            (CappedUint::Exact(_), CappedUint::Saturated) => Ordering::Less,
            (CappedUint::Saturated, CappedUint::Exact(_)) => Ordering::Greater,
            (CappedUint::Saturated, CappedUint::Saturated) => Ordering::Equal,
        }
    }
}

impl fmt::Display for CappedUint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CappedUint::Exact(v) => write!(f, "{v}"),
            CappedUint::Saturated => f.write_str("saturated"),
        }
    }
}

/// The first `k_max` primes, with primorials and primorial totients cached
/// for every prefix.
#[derive(Clone, Debug)]
pub struct PrimeBasis {
    primes: Vec<u64>,
    primorials: Vec<CappedUint>,
    totients: Vec<CappedUint>,
}

impl PrimeBasis {
    pub fn new(k_max: usize) -> Result<Self> {
        let primes = sieve_primes(k_max)?;
        let mut primorials = Vec::with_capacity(k_max + 1);
        let mut totients = Vec::with_capacity(k_max + 1);
        primorials.push(CappedUint::Exact(1));
        totients.push(CappedUint::Exact(1));
        for &p in &primes {
            let last_p = *primorials.last().unwrap();
            let last_t = *totients.last().unwrap();
            primorials.push(last_p.checked_mul(u128::from(p)));
            totients.push(last_t.checked_mul(u128::from(p - 1)));
        }
        Ok(PrimeBasis {
            primes,
            primorials,
            totients,
        })
    }

    pub fn k_max(&self) -> usize {
        self.primes.len()
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    /// The `i`-th prime, 1-indexed. Panics if `i` is 0 or beyond `k_max`.
    #[inline]
    pub fn p(&self, i: usize) -> u64 {
        self.primes[i - 1]
    }

    pub fn primorial(&self, k: usize) -> Result<CappedUint> {
        self.primorials.get(k).copied().ok_or(Error::IndexOutOfRange {
            k,
            k_max: self.k_max(),
        })
    }

    pub fn totient_primorial(&self, k: usize) -> Result<CappedUint> {
        self.totients.get(k).copied().ok_or(Error::IndexOutOfRange {
            k,
            k_max: self.k_max(),
        })
    }
}

/// Returns the first `k_max` primes in increasing order.
pub fn sieve_primes(k_max: usize) -> Result<Vec<u64>> {
    if k_max == 0 {
        return Err(Error::EmptyBasis);
    }
    let mut limit = nth_prime_upper_bound(k_max);
    loop {
        let found = eratosthenes(limit);
        if found.len() >= k_max {
            return Ok(found.into_iter().take(k_max).collect());
        }
        limit *= 2;
    }
}

/// Rosser's bound p_n < n (ln n + ln ln n) for n >= 6.
fn nth_prime_upper_bound(n: usize) -> usize {
    if n < 6 {
        return 15;
    }
    let n = n as f64;
    (n * (n.ln() + n.ln().ln())).ceil() as usize + 1
}

fn eratosthenes(limit: usize) -> Vec<u64> {
    let mut composite = vec![false; limit + 1];
    let mut primes = Vec::new();
    for n in 2..=limit {
        if composite[n] {
            continue;
        }
        primes.push(n as u64);
        let mut multiple = n * n;
        while multiple <= limit {
            composite[multiple] = true;
            multiple += n;
        }
    }
    primes
}
