//! Exact `phi_min(m, k)` tables for small `k`, and their on-disk format.
//!
//! A table for `k` covers every `m` in `[0, P_k)`. Larger `m` reduce to this
//! range by periodicity, which is how the recursion consumes them.
//!
//! File layout, little-endian:
//!
//! ```text
//! b"PHIMIN01" | k: u32 | modulus: u64 | count: u64 | count x u32 | sha256
//! ```
//!
//! The trailing digest covers every byte before it.

use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::primes::PrimeBasis;

pub const MAGIC: &[u8; 8] = b"PHIMIN01";
pub const HEADER_LEN: usize = 8 + 4 + 8 + 8;
pub const DIGEST_LEN: usize = 32;
/// Largest `k` a table may be built for.
pub const MAX_TABLE_K: usize = 8;
pub const DEFAULT_BASE_K: usize = 6;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PhiMinTable {
    k: usize,
    modulus: u64,
    values: Vec<u32>,
    checksum: [u8; DIGEST_LEN],
}

impl PhiMinTable {
    /// Builds the table from the cyclic list of coprime residues.
    ///
    /// With coprime residues `c_0 < c_1 < ...` extended periodically, the
    /// longest window holding at most `t` coprimes has length
    /// `max_i (c_{i+t+1} - c_i - 1)`, and `phi_min(m)` is the least `t` whose
    /// longest window reaches `m`. Cost is quadratic in the totient rather
    /// than in the modulus.
    pub fn build(k: usize, basis: &PrimeBasis) -> Result<Self> {
        if k == 0 || k > MAX_TABLE_K {
            return Err(Error::TableRange { k, max: MAX_TABLE_K });
        }
        let modulus = basis
            .primorial(k)?
            .as_u64()
            .ok_or(Error::TableRange { k, max: MAX_TABLE_K })?;
        let primes = &basis.primes()[..k];
        // 2 * P_8 fits in a u32
        let residues: Vec<u32> = (1..modulus)
            .filter(|a| primes.iter().all(|p| a % p != 0))
            .map(|a| a as u32)
            .collect();
        let n = residues.len();
        let extended: Vec<u32> = residues
            .iter()
            .copied()
            .chain(residues.iter().map(|&c| c + modulus as u32))
            .collect();

        let len = modulus as usize;
        let mut values = vec![0u32; len];
        let mut next = 1usize;
        for t in 0..n {
            // longest window holding at most t coprimes
            let longest = max_spread(&extended[t + 1..t + 1 + n], &extended[..n]) as usize - 1;
            while next <= longest.min(len - 1) {
                values[next] = t as u32;
                next += 1;
            }
            if next == len {
                break;
            }
        }
        Ok(Self::from_values(k, modulus, values))
    }

    fn from_values(k: usize, modulus: u64, values: Vec<u32>) -> Self {
        let mut table = PhiMinTable {
            k,
            modulus,
            values,
            checksum: [0; DIGEST_LEN],
        };
        let body = table.body_bytes();
        table.checksum = Sha256::digest(&body).into();
        table
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn values(&self) -> &[u32] {
        &self.values
    }

    pub fn checksum(&self) -> &[u8; DIGEST_LEN] {
        &self.checksum
    }

    /// Exact `phi_min(m, k)` for `m < modulus`.
    pub fn get(&self, m: u64) -> Option<u64> {
        self.values.get(usize::try_from(m).ok()?).map(|&v| u64::from(v))
    }

    fn body_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN + 4 * self.values.len() + DIGEST_LEN);
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&(self.k as u32).to_le_bytes());
        out.extend_from_slice(&self.modulus.to_le_bytes());
        out.extend_from_slice(&(self.values.len() as u64).to_le_bytes());
        for v in &self.values {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = self.body_bytes();
        out.extend_from_slice(&self.checksum);
        out
    }

    pub fn from_bytes(bytes: &[u8], path: &Path) -> Result<Self> {
        let bad = |reason: &str| Error::Format {
            path: path.to_path_buf(),
            reason: reason.to_string(),
        };
        if bytes.len() < HEADER_LEN + DIGEST_LEN {
            return Err(bad("file too short"));
        }
        let (body, digest) = bytes.split_at(bytes.len() - DIGEST_LEN);
        if Sha256::digest(body).as_slice() != digest {
            return Err(Error::Checksum {
                path: path.to_path_buf(),
            });
        }
        if &body[..8] != MAGIC {
            return Err(bad("bad magic"));
        }
        let k = u32::from_le_bytes(body[8..12].try_into().unwrap()) as usize;
        let modulus = u64::from_le_bytes(body[12..20].try_into().unwrap());
        let count = u64::from_le_bytes(body[20..28].try_into().unwrap());
        if k == 0 || k > MAX_TABLE_K {
            return Err(bad("k outside the supported table range"));
        }
        let expected = PrimeBasis::new(k)?.primorial(k)?.as_u64();
        if expected != Some(modulus) {
            return Err(bad("modulus is not the primorial of k"));
        }
        if count != modulus {
            return Err(bad("value count differs from modulus"));
        }
        let payload = &body[HEADER_LEN..];
        if payload.len() as u64 != count * 4 {
            return Err(bad("payload length differs from value count"));
        }
        let values: Vec<u32> = payload
            .chunks_exact(4)
            .map(|c| u32::from_le_bytes(c.try_into().unwrap()))
            .collect();
        let table = Self::from_values(k, modulus, values);
        table.check_shape().map_err(bad)?;
        Ok(table)
    }

    /// Structural invariants every `phi_min` table satisfies.
    fn check_shape(&self) -> std::result::Result<(), &'static str> {
        if self.values.first() != Some(&0) {
            return Err("values[0] must be 0");
        }
        if self.values.windows(2).any(|w| w[1] < w[0] || w[1] - w[0] > 1) {
            return Err("consecutive values must differ by 0 or 1");
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_bytes()).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_bytes(&bytes, path)
    }
}

/// `max_i (hi[i] - lo[i])`, with `hi[i] >= lo[i]`. Written lane-wise so the
/// compiler vectorizes it; this loop dominates table builds.
fn max_spread(hi: &[u32], lo: &[u32]) -> u32 {
    const LANES: usize = 16;
    let mut acc = [0u32; LANES];
    let hi_chunks = hi.chunks_exact(LANES);
    let lo_chunks = lo.chunks_exact(LANES);
    let tail = hi_chunks
        .remainder()
        .iter()
        .zip(lo_chunks.remainder())
        .map(|(h, l)| h.wrapping_sub(*l))
        .max()
        .unwrap_or(0);
    for (h, l) in hi_chunks.zip(lo_chunks) {
        for lane in 0..LANES {
            acc[lane] = acc[lane].max(h[lane].wrapping_sub(l[lane]));
        }
    }
    acc.into_iter().fold(tail, u32::max)
}

pub fn table_file_name(k: usize) -> String {
    format!("phimin_k{k}.bin")
}

pub fn table_path(dir: &Path, k: usize) -> PathBuf {
    dir.join(table_file_name(k))
}

/// What [`TableSet::ensure_dir`] did for one `k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TableStatus {
    Reused,
    Built,
}

/// One table for every `k` in `1..=base_k`.
#[derive(Clone, Debug)]
pub struct TableSet {
    base_k: usize,
    tables: Vec<PhiMinTable>,
}

impl TableSet {
    pub fn build(base_k: usize, basis: &PrimeBasis) -> Result<Self> {
        check_base_k(base_k)?;
        let tables = (1..=base_k)
            .map(|k| PhiMinTable::build(k, basis))
            .collect::<Result<_>>()?;
        Ok(TableSet { base_k, tables })
    }

    pub fn from_tables(mut tables: Vec<PhiMinTable>) -> Result<Self> {
        tables.sort_by_key(PhiMinTable::k);
        for (i, t) in tables.iter().enumerate() {
            if t.k() != i + 1 {
                return Err(Error::MissingTable(i + 1));
            }
        }
        let base_k = tables.len();
        check_base_k(base_k)?;
        Ok(TableSet { base_k, tables })
    }

    pub fn load_dir(dir: &Path, base_k: usize) -> Result<Self> {
        check_base_k(base_k)?;
        let tables = (1..=base_k)
            .map(|k| {
                let path = table_path(dir, k);
                let table = PhiMinTable::load(&path)?;
                if table.k() != k {
                    return Err(Error::Format {
                        path,
                        reason: format!("holds k = {}, expected {k}", table.k()),
                    });
                }
                Ok(table)
            })
            .collect::<Result<_>>()?;
        Ok(TableSet { base_k, tables })
    }

    pub fn save_dir(&self, dir: &Path) -> Result<()> {
        self.tables
            .iter()
            .try_for_each(|t| t.save(&table_path(dir, t.k())))
    }

    /// Loads every valid table already in `dir`, builds and writes the rest.
    pub fn ensure_dir(
        dir: &Path,
        base_k: usize,
        basis: &PrimeBasis,
    ) -> Result<(Self, Vec<(usize, TableStatus)>)> {
        check_base_k(base_k)?;
        fs::create_dir_all(dir).map_err(|source| Error::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        let mut tables = Vec::with_capacity(base_k);
        let mut report = Vec::with_capacity(base_k);
        for k in 1..=base_k {
            let path = table_path(dir, k);
            match PhiMinTable::load(&path) {
                Ok(t) if t.k() == k => {
                    tables.push(t);
                    report.push((k, TableStatus::Reused));
                }
                _ => {
                    let t = PhiMinTable::build(k, basis)?;
                    t.save(&path)?;
                    tables.push(t);
                    report.push((k, TableStatus::Built));
                }
            }
        }
        Ok((TableSet { base_k, tables }, report))
    }

    pub fn base_k(&self) -> usize {
        self.base_k
    }

    pub fn table(&self, k: usize) -> Option<&PhiMinTable> {
        k.checked_sub(1).and_then(|i| self.tables.get(i))
    }

    pub fn tables(&self) -> &[PhiMinTable] {
        &self.tables
    }

    /// Exact `phi_min(m, k)` for `k <= base_k`. Windows longer than `P_k`
    /// reduce by periodicity.
    pub fn lookup(&self, m: u64, k: usize) -> Result<u64> {
        let table = self.table(k).ok_or(Error::MissingTable(k))?;
        let totient = u64::from(*table.values.last().unwrap()) + 1;
        let periods = m / table.modulus();
        Ok(periods * totient + table.get(m % table.modulus()).unwrap())
    }

    #[inline]
    pub(crate) fn get_unchecked_range(&self, m: u64, k: usize) -> u64 {
        u64::from(self.tables[k - 1].values[m as usize])
    }
}

fn check_base_k(base_k: usize) -> Result<()> {
    if base_k == 0 || base_k > MAX_TABLE_K {
        return Err(Error::TableRange {
            k: base_k,
            max: MAX_TABLE_K,
        });
    }
    Ok(())
}
