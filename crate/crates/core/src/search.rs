//! Linear searches for `b(k)`, the least `m` with `phi_low(m, k) > 0`, and
//! for the scaled coefficients `C_k` with `phi_low(floor(C_k k^2 / 10000), k) > 0`.
//!
//! Also the classical closed-form bounds, in log space.

use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::phi_low::{BoundContext, MemoCache};

/// Default cap on `phi_low` evaluations per search or sweep.
pub const DEFAULT_BUDGET: u64 = 1_000_000_000;
/// Denominator of the coefficient scaling `floor(C_k k^2 / 10000)`.
pub const COEFF_SCALE: u64 = 10_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundResult {
    pub k: usize,
    pub b_k: u64,
    /// Number of top-level `phi_low` evaluations spent on this `k`.
    pub evaluations: u64,
    pub elapsed: Duration,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoeffResult {
    pub k: usize,
    pub c_k: u64,
    pub bound: u64,
    pub evaluations: u64,
}

/// Counts evaluations against a shared cap.
#[derive(Clone, Debug)]
pub struct Budget {
    limit: u64,
    used: u64,
}

impl Budget {
    pub fn new(limit: u64) -> Self {
        Budget { limit, used: 0 }
    }

    pub fn used(&self) -> u64 {
        self.used
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    fn charge(&mut self, k: usize, m: u64) -> Result<()> {
        if self.used >= self.limit {
            return Err(Error::Budget {
                budget: self.limit,
                k,
                m,
            });
        }
        self.used += 1;
        Ok(())
    }
}

impl Default for Budget {
    fn default() -> Self {
        Budget::new(DEFAULT_BUDGET)
    }
}

fn positive(
    ctx: &BoundContext,
    cache: &mut MemoCache,
    budget: &mut Budget,
    m: u64,
    k: usize,
) -> Result<bool> {
    budget.charge(k, m)?;
    Ok(ctx.phi_low(m, k, cache)? > 0)
}

/// Least `m >= start_m` with `phi_low(m, k) > 0`.
pub fn find_b(
    k: usize,
    start_m: u64,
    ctx: &BoundContext,
    cache: &mut MemoCache,
    budget: &mut Budget,
) -> Result<BoundResult> {
    if start_m == 0 {
        return Err(Error::Config("search must start at m >= 1".into()));
    }
    let started = Instant::now();
    let before = budget.used();
    let mut m = start_m;
    while !positive(ctx, cache, budget, m, k)? {
        m += 1;
    }
    Ok(BoundResult {
        k,
        b_k: m,
        evaluations: budget.used() - before,
        elapsed: started.elapsed(),
    })
}

/// Runs [`find_b`] for every `k` in `start_k..=end_k`.
///
/// Unless `reset_m` is set, each search resumes from the previous `b(k)`,
/// so the reported values are nondecreasing in `k`. `on_result` sees each
/// row as it completes.
pub fn sweep_b(
    start_k: usize,
    end_k: usize,
    initial_m: u64,
    reset_m: bool,
    ctx: &BoundContext,
    cache: &mut MemoCache,
    budget: &mut Budget,
    mut on_result: impl FnMut(&BoundResult),
) -> Result<Vec<BoundResult>> {
    check_range(start_k, end_k)?;
    let mut results = Vec::with_capacity(end_k - start_k + 1);
    let mut m = initial_m;
    for k in start_k..=end_k {
        let start = if reset_m { initial_m } else { m };
        let result = find_b(k, start, ctx, cache, budget)?;
        m = result.b_k;
        on_result(&result);
        results.push(result);
    }
    Ok(results)
}

pub fn scaled_bound(c: u64, k: usize) -> u64 {
    let k = k as u128;
    (u128::from(c) * k * k / u128::from(COEFF_SCALE)) as u64
}

/// Coefficient search for every `k` in `start_k..=end_k`.
///
/// From the inherited coefficient, decrement while the scaled bound still
/// gives `phi_low > 0`; if that moved at all, step back up once. Otherwise
/// increment until it does. The coefficient carries over to the next `k`.
pub fn coeff_sweep(
    start_k: usize,
    end_k: usize,
    initial_c: u64,
    ctx: &BoundContext,
    cache: &mut MemoCache,
    budget: &mut Budget,
    mut on_result: impl FnMut(&CoeffResult),
) -> Result<Vec<CoeffResult>> {
    check_range(start_k, end_k)?;
    if initial_c == 0 {
        return Err(Error::Config("initial coefficient must be at least 1".into()));
    }
    let mut results = Vec::with_capacity(end_k - start_k + 1);
    let mut c = initial_c;
    for k in start_k..=end_k {
        let before = budget.used();
        let inherited = c;
        while c > 0 && positive(ctx, cache, budget, scaled_bound(c, k), k)? {
            c -= 1;
        }
        if c < inherited {
            c += 1;
        } else {
            while !positive(ctx, cache, budget, scaled_bound(c, k), k)? {
                c += 1;
            }
        }
        let result = CoeffResult {
            k,
            c_k: c,
            bound: scaled_bound(c, k),
            evaluations: budget.used() - before,
        };
        on_result(&result);
        results.push(result);
    }
    Ok(results)
}

fn check_range(start_k: usize, end_k: usize) -> Result<()> {
    if start_k == 0 || start_k > end_k {
        return Err(Error::Config(format!(
            "invalid k range {start_k}..={end_k}"
        )));
    }
    Ok(())
}

/// `log10` of the bound `h(k) <= 2^k`.
pub fn kanold_log10(k: usize) -> f64 {
    k as f64 * std::f64::consts::LOG10_2
}

/// `log10` of the bound `h(k) <= 2 k^(2 + 2e ln k)`.
pub fn stevens_log10(k: usize) -> f64 {
    let k = k as f64;
    let exponent = 2.0 + 2.0 * std::f64::consts::E * k.ln();
    std::f64::consts::LOG10_2 + exponent * k.log10()
}

/// `bound / (k^2 ln k)`; the ratio the headline constant is stated against.
pub fn ratio_natural_log(bound: u64, k: usize) -> f64 {
    let k = k as f64;
    bound as f64 / (k * k * k.ln())
}
