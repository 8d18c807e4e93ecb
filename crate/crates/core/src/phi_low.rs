//! The recursive lower bound `phi_low(m, k) <= phi_min(m, k)`.
//!
//! Writing `r = m mod P_k`, the bound is
//!
//! ```text
//! phi(P_k) * floor(m / P_k)
//!     + r - sum_{i=1..k} ceil(r / p_i) + sum_{i=2..k} floor(r / (2 p_i)) + E
//!     + sum_{2 <= i < j <= k} phi_min(floor(r / (p_i p_j)), i - 1)
//! ```
//!
//! where `E` counts the odd primes whose "ceiling count of p, floor count of
//! 2p" configuration cannot occur in a minimizing window. The inner
//! `phi_min` terms are replaced recursively by `phi_low`, bottoming out in
//! exact tables for `k <= base_k` and in the known zero ranges `r < h(k)`.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::known_h::{KnownH, KNOWN_H_MAX_K};
use crate::primes::PrimeBasis;
use crate::tables::{TableSet, DEFAULT_BASE_K};

/// Recursion policy for [`phi_low`].
#[derive(Clone, Debug)]
pub struct BoundConfig {
    /// Largest `k` answered from exact tables.
    pub base_k: usize,
    /// Stop recursing when `r < h(k)` for `k <= 49`.
    pub use_known_h: bool,
    pub known_h: Option<KnownH>,
    pub memo_enabled: bool,
}

impl Default for BoundConfig {
    fn default() -> Self {
        BoundConfig {
            base_k: DEFAULT_BASE_K,
            use_known_h: false,
            known_h: Some(KnownH::hagedorn()),
            memo_enabled: true,
        }
    }
}

impl BoundConfig {
    pub fn with_known_h(mut self, use_known_h: bool) -> Self {
        self.use_known_h = use_known_h;
        self
    }

    pub fn with_memo(mut self, memo_enabled: bool) -> Self {
        self.memo_enabled = memo_enabled;
        self
    }

    pub fn with_base_k(mut self, base_k: usize) -> Self {
        self.base_k = base_k;
        self
    }

    fn validate(&self, tables: &TableSet) -> Result<()> {
        if self.base_k == 0 {
            return Err(Error::Config("base_k must be at least 1".into()));
        }
        if tables.base_k() < self.base_k {
            return Err(Error::MissingTable(tables.base_k() + 1));
        }
        match (&self.known_h, self.use_known_h) {
            (Some(known), _) => known.validate(),
            (None, true) => Err(Error::Config(
                "use_known_h is set but no known-h table is present".into(),
            )),
            (None, false) => Ok(()),
        }
    }
}

/// Previously computed `phi_low` values keyed by `(m, k)`.
///
/// Not synchronized; give each thread its own cache.
#[derive(Clone, Debug, Default)]
pub struct MemoCache {
    map: HashMap<(u64, u32), u64>,
    hits: u64,
}

impl MemoCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn hits(&self) -> u64 {
        self.hits
    }

    pub fn clear(&mut self) {
        self.map.clear();
        self.hits = 0;
    }

    pub fn get(&mut self, m: u64, k: usize) -> Option<u64> {
        let v = self.map.get(&(m, k as u32)).copied();
        self.hits += u64::from(v.is_some());
        v
    }

    pub fn insert(&mut self, m: u64, k: usize, value: u64) {
        self.map.insert((m, k as u32), value);
    }
}

/// The size of the correction set
/// `{ i : 1 < i <= k, p_i does not divide r, and (2 | r - (r mod p_i) + p_i or p_i | r - 1) }`.
pub fn e_correction(r: u64, k: usize, basis: &PrimeBasis) -> u64 {
    let odd = basis.primes().get(1..k.min(basis.k_max())).unwrap_or(&[]);
    odd.iter()
        .filter(|&&p| e_member(r, p))
        .count() as u64
}

#[inline]
fn e_member(r: u64, p: u64) -> bool {
    let rem = r % p;
    // r - rem + p is p * (floor(r / p) + 1), and p is odd
    rem != 0 && ((r / p) % 2 == 1 || rem == 1)
}

/// `r - sum_{i=1..k} ceil(r / p_i) + sum_{i=2..k} floor(r / (2 p_i))`.
pub fn header_terms(r: u64, k: usize, basis: &PrimeBasis) -> i64 {
    let primes = &basis.primes()[..k.min(basis.k_max())];
    let mut total = r as i64;
    for (idx, &p) in primes.iter().enumerate() {
        total -= r.div_ceil(p) as i64;
        if idx > 0 {
            total += (r / (2 * p)) as i64;
        }
    }
    total
}

/// Primes, table set and policy, prepared for repeated [`phi_low`] calls.
#[derive(Clone, Debug)]
pub struct BoundContext {
    basis: PrimeBasis,
    tables: TableSet,
    config: BoundConfig,
    // primorial and its totient per k, when the primorial fits in a u64
    periods: Vec<Option<(u64, u64)>>,
}

impl BoundContext {
    /// `k_max` bounds every `k` later passed to [`phi_low`].
    pub fn new(k_max: usize, tables: TableSet, config: BoundConfig) -> Result<Self> {
        config.validate(&tables)?;
        let basis = PrimeBasis::new(k_max.max(config.base_k))?;
        let periods = (0..=basis.k_max())
            .map(|k| {
                let p = basis.primorial(k).ok()?.as_u64()?;
                let t = basis.totient_primorial(k).ok()?.as_u64()?;
                Some((p, t))
            })
            .collect();
        Ok(BoundContext {
            basis,
            tables,
            config,
            periods,
        })
    }

    pub fn basis(&self) -> &PrimeBasis {
        &self.basis
    }

    pub fn tables(&self) -> &TableSet {
        &self.tables
    }

    pub fn config(&self) -> &BoundConfig {
        &self.config
    }

    pub fn k_max(&self) -> usize {
        self.basis.k_max()
    }

    /// Validated entry point; see the free function [`phi_low`].
    pub fn phi_low(&self, m: u64, k: usize, cache: &mut MemoCache) -> Result<u64> {
        if k == 0 {
            return Err(Error::Config("phi_low needs k >= 1".into()));
        }
        if k > self.k_max() {
            return Err(Error::IndexOutOfRange {
                k,
                k_max: self.k_max(),
            });
        }
        Ok(self.eval(m, k, cache))
    }

    fn eval(&self, m: u64, k: usize, cache: &mut MemoCache) -> u64 {
        let (full, r) = match self.periods[k] {
            Some((primorial, totient)) => ((m / primorial) * totient, m % primorial),
            None => (0, m),
        };
        if k <= self.config.base_k {
            return full + self.tables.get_unchecked_range(r, k);
        }
        if r < 2 * self.basis.p(k - 1) {
            return full;
        }
        if self.config.use_known_h && k <= KNOWN_H_MAX_K {
            let known = self.config.known_h.as_ref().and_then(|h| h.get(k));
            if known.is_some_and(|h| r < h) {
                return full;
            }
        }
        if self.config.memo_enabled {
            if let Some(v) = cache.get(m, k) {
                return v;
            }
        }

        let mut bound = full as i64 + header_terms(r, k, &self.basis);
        bound += e_correction(r, k, &self.basis) as i64;
        bound += self.pair_sum(r, k, cache) as i64;
        let value = bound.max(0) as u64;

        if self.config.memo_enabled {
            cache.insert(m, k, value);
        }
        value
    }

    /// Lower bound on `sum_{2 <= i < j <= k} phi_min(floor(r / (p_i p_j)), i - 1)`.
    ///
    /// The inner loop stops at the first zero term since later `j` give
    /// smaller windows; the outer loop stops once a row's first term is zero.
    fn pair_sum(&self, r: u64, k: usize, cache: &mut MemoCache) -> u64 {
        let mut sum = 0;
        for i in 2..k {
            let p_i = self.basis.p(i);
            let mut row_head = None;
            for j in i + 1..=k {
                let window = r / (p_i * self.basis.p(j));
                let term = if window == 0 {
                    0
                } else {
                    self.eval(window, i - 1, cache)
                };
                row_head.get_or_insert(term);
                if term == 0 {
                    break;
                }
                sum += term;
            }
            if row_head == Some(0) {
                break;
            }
        }
        sum
    }
}

/// Lower bound on `phi_min(m, k)`, the fewest integers coprime to `P_k` in
/// any run of `m` consecutive integers.
pub fn phi_low(m: u64, k: usize, ctx: &BoundContext, cache: &mut MemoCache) -> Result<u64> {
    ctx.phi_low(m, k, cache)
}
