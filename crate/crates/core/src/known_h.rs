//! Published exact values of `h(k)` for `k <= 49`.

use crate::error::{Error, Result};

/// Largest `k` for which exact `h(k)` is known.
pub const KNOWN_H_MAX_K: usize = 49;
/// The anchor value every known-h table must carry.
pub const H_49: u64 = 742;

const HAGEDORN: &str = include_str!("../data/known_h.txt");

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KnownH {
    // index 0 unused
    values: Vec<Option<u64>>,
}

impl KnownH {
    /// The shipped table for `k = 1..=49`.
    pub fn hagedorn() -> Self {
        Self::parse(HAGEDORN).expect("bundled known-h table is well formed")
    }

    /// Parses `k h` pairs, one per line; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut values = vec![None; KNOWN_H_MAX_K + 1];
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let bad = || Error::Config(format!("known-h line {}: {line:?}", lineno + 1));
            let mut fields = line.split_whitespace();
            let k: usize = fields.next().and_then(|f| f.parse().ok()).ok_or_else(bad)?;
            let h: u64 = fields.next().and_then(|f| f.parse().ok()).ok_or_else(bad)?;
            if fields.next().is_some() || k == 0 || k > KNOWN_H_MAX_K {
                return Err(bad());
            }
            values[k] = Some(h);
        }
        let known = KnownH { values };
        known.validate()?;
        Ok(known)
    }

    pub fn validate(&self) -> Result<()> {
        if self.get(KNOWN_H_MAX_K) != Some(H_49) {
            return Err(Error::Config(format!(
                "known-h table must give h({KNOWN_H_MAX_K}) = {H_49}"
            )));
        }
        Ok(())
    }

    pub fn get(&self, k: usize) -> Option<u64> {
        self.values.get(k).copied().flatten()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, u64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .filter_map(|(k, h)| h.map(|h| (k, h)))
    }
}
