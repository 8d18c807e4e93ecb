//! Brute-force ground truth for window counts, `phi_min`, and `h(k)`.
//!
//! Everything here enumerates. It is meant for small `k` and for checking
//! the recursive bound, not for production sweeps.

use crate::error::{Error, Result};
use crate::primes::PrimeBasis;

/// Oracles refuse moduli larger than this.
pub const ORACLE_MODULUS_LIMIT: u64 = 1_000_000_000;

/// Membership bitmap of the residues mod `P_k` that are coprime to `P_k`.
#[derive(Clone, Debug)]
pub struct CoprimeIndicator {
    k: usize,
    modulus: u64,
    words: Vec<u64>,
    count: u64,
}

impl CoprimeIndicator {
    pub fn new(k: usize, basis: &PrimeBasis) -> Result<Self> {
        let modulus = oracle_modulus(k, basis)?;
        let len = modulus as usize;
        let mut words = vec![u64::MAX; len.div_ceil(64)];
        let tail = len % 64;
        if tail != 0 {
            *words.last_mut().unwrap() = (1u64 << tail) - 1;
        }
        for &p in &basis.primes()[..k] {
            let p = p as usize;
            let mut a = 0;
            while a < len {
                words[a / 64] &= !(1u64 << (a % 64));
                a += p;
            }
        }
        let count = words.iter().map(|w| u64::from(w.count_ones())).sum();
        Ok(CoprimeIndicator {
            k,
            modulus,
            words,
            count,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// Number of coprime residues, i.e. the totient of the modulus.
    pub fn count(&self) -> u64 {
        self.count
    }

    #[inline]
    pub fn is_coprime(&self, a: u64) -> bool {
        self.bit((a % self.modulus) as usize)
    }

    #[inline]
    fn bit(&self, residue: usize) -> bool {
        self.words[residue / 64] >> (residue % 64) & 1 == 1
    }

    /// Minimum coprime count over every window of `m` consecutive integers.
    pub fn phi_min(&self, m: u64) -> u64 {
        let periods = m / self.modulus;
        let r = (m % self.modulus) as usize;
        let len = self.modulus as usize;
        // window (b, b + r] slides over b in [0, len)
        let mut count = (1..=r).filter(|&a| self.bit(a % len)).count() as u64;
        let mut best = count;
        let mut leaving = 1 % len;
        let mut entering = (r + 1) % len;
        for _ in 1..len {
            if best == 0 {
                break;
            }
            count -= u64::from(self.bit(leaving));
            count += u64::from(self.bit(entering));
            best = best.min(count);
            leaving += 1;
            if leaving == len {
                leaving = 0;
            }
            entering += 1;
            if entering == len {
                entering = 0;
            }
        }
        periods * self.count + best
    }

    /// Largest distance between cyclically consecutive coprime residues.
    pub fn max_gap(&self) -> u64 {
        let len = self.modulus as usize;
        let mut first = None;
        let mut prev = 0usize;
        let mut gap = 0usize;
        for a in 0..len {
            if self.bit(a) {
                match first {
                    None => first = Some(a),
                    Some(_) => gap = gap.max(a - prev),
                }
                prev = a;
            }
        }
        let first = first.expect("1 is always coprime");
        gap.max(first + len - prev) as u64
    }
}

/// Sorted coprime residues mod `P_k`, over two periods.
///
/// Answers `phi_min` queries in time linear in the totient rather than the
/// modulus: sliding a window right over non-coprime integers never raises
/// its count, so some minimizing window ends just before a coprime integer.
#[derive(Clone, Debug)]
pub struct CoprimeResidues {
    modulus: u64,
    residues: Vec<u32>,
}

impl CoprimeResidues {
    pub fn new(k: usize, basis: &PrimeBasis) -> Result<Self> {
        let modulus = oracle_modulus(k, basis)?;
        if 2 * modulus > u64::from(u32::MAX) {
            return Err(Error::OracleRange {
                k,
                limit: u64::from(u32::MAX) / 2,
            });
        }
        let primes = &basis.primes()[..k];
        let one_period: Vec<u32> = (1..modulus)
            .filter(|a| primes.iter().all(|p| a % p != 0))
            .map(|a| a as u32)
            .collect();
        let residues = one_period
            .iter()
            .copied()
            .chain(one_period.iter().map(|&c| c + modulus as u32))
            .collect();
        Ok(CoprimeResidues { modulus, residues })
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn count(&self) -> u64 {
        (self.residues.len() / 2) as u64
    }

    pub fn phi_min(&self, m: u64) -> u64 {
        let n = self.residues.len() / 2;
        let periods = m / self.modulus;
        let r = (m % self.modulus) as u32;
        // window (c_j - r - 1, c_j - 1]; residues at or below its start are
        // residues[..below]
        let mut below = 0usize;
        let mut best = n;
        for j in n..2 * n {
            let start = self.residues[j] - r - 1;
            while self.residues[below] <= start {
                below += 1;
            }
            best = best.min(j - below);
        }
        periods * n as u64 + best as u64
    }
}

fn oracle_modulus(k: usize, basis: &PrimeBasis) -> Result<u64> {
    basis
        .primorial(k)?
        .as_u64()
        .filter(|&p| p <= ORACLE_MODULUS_LIMIT)
        .ok_or(Error::OracleRange {
            k,
            limit: ORACLE_MODULUS_LIMIT,
        })
}

/// Number of multiples of `d` in `(b, b + m]`.
pub fn count_multiples(b: u64, m: u64, d: u64) -> Result<u64> {
    if d == 0 {
        return Err(Error::ZeroDivisor);
    }
    Ok((b + m) / d - b / d)
}

/// Number of integers in `(b, b + m]` coprime to `P_k`, by trial division.
pub fn phi_window(b: u64, m: u64, k: usize, basis: &PrimeBasis) -> Result<u64> {
    check_index(k, basis)?;
    let primes = &basis.primes()[..k];
    Ok((b + 1..=b + m)
        .filter(|a| primes.iter().all(|p| a % p != 0))
        .count() as u64)
}

/// Minimum of [`phi_window`] over every window start.
pub fn phi_min_exact(m: u64, k: usize, basis: &PrimeBasis) -> Result<u64> {
    Ok(CoprimeIndicator::new(k, basis)?.phi_min(m))
}

/// `h(k)`: the maximal gap between integers coprime to `P_k`.
pub fn jacobsthal_exact(k: usize, basis: &PrimeBasis) -> Result<u64> {
    Ok(CoprimeIndicator::new(k, basis)?.max_gap())
}

/// Number of the first `k` primes dividing `a`.
pub fn omega_k(a: u64, k: usize, basis: &PrimeBasis) -> Result<u64> {
    check_index(k, basis)?;
    Ok(basis.primes()[..k].iter().filter(|&&p| a.is_multiple_of(p)).count() as u64)
}

fn check_index(k: usize, basis: &PrimeBasis) -> Result<()> {
    if k > basis.k_max() {
        return Err(Error::IndexOutOfRange {
            k,
            k_max: basis.k_max(),
        });
    }
    Ok(())
}
