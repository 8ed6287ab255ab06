//! Measure-density estimation through remainder systems: the ratio
//! R(S : B_N) / B_N along an increasing divisibility chain B_N converges
//! to the measure density of S. Exact mode counts attained residues
//! structurally; window mode scans witnesses and yields lower bounds.

pub(crate) mod structural;

use rayon::prelude::*;

use crate::bits::Bits;
use crate::error::{Error, Result};
use crate::expr::SetExpr;
use crate::periodic::{check_period, DEFAULT_PERIOD_LIMIT};
use crate::rational::Rat;
use crate::residue::lcm_upto;

/// An increasing divisibility chain B_1 | B_2 | ... that eventually
/// absorbs every modulus.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RemainderSystem {
    /// B_N = lcm(1..N); the default.
    Lcm,
    /// B_N = N!.
    Factorial,
    /// Explicit chain; validated on construction.
    Custom(Vec<u64>),
}

impl RemainderSystem {
    pub fn custom(chain: Vec<u64>) -> Result<RemainderSystem> {
        if chain.is_empty() {
            return Err(Error::Invalid("empty remainder chain".into()));
        }
        for (i, &b) in chain.iter().enumerate() {
            if b == 0 {
                return Err(Error::Invalid("chain contains 0".into()));
            }
            if i > 0 {
                let prev = chain[i - 1];
                if b < prev || b % prev != 0 {
                    return Err(Error::Invalid(format!(
                        "chain not a divisibility chain at index {i}: {prev} then {b}"
                    )));
                }
            }
        }
        Ok(RemainderSystem::Custom(chain))
    }

    /// B_N for N >= 1.
    pub fn modulus(&self, n: u32) -> Result<u64> {
        if n == 0 {
            return Err(Error::Invalid("remainder index starts at 1".into()));
        }
        match self {
            RemainderSystem::Lcm => lcm_upto(n as u64),
            RemainderSystem::Factorial => {
                let mut f: u64 = 1;
                for k in 2..=n as u64 {
                    f = f.checked_mul(k).ok_or(Error::Overflow("factorial"))?;
                }
                Ok(f)
            }
            RemainderSystem::Custom(chain) => chain
                .get(n as usize - 1)
                .copied()
                .ok_or_else(|| Error::Invalid(format!("chain has no index {n}"))),
        }
    }

    pub fn label(&self) -> String {
        match self {
            RemainderSystem::Lcm => "lcm".into(),
            RemainderSystem::Factorial => "factorial".into(),
            RemainderSystem::Custom(chain) => {
                let parts: Vec<String> = chain.iter().map(|b| b.to_string()).collect();
                format!("custom:{}", parts.join(","))
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CountMode {
    Exact,
    Window,
}

/// Whether the reported ratios bound the measure from above (exact mode)
/// or merely approximate it from below (window mode).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundSemantics {
    UpperBound,
    Approximation,
}

#[derive(Clone, Debug)]
pub struct DensityEntry {
    pub n: u32,
    pub modulus: u64,
    pub count: u64,
    pub ratio: Rat,
    pub exact: bool,
}

#[derive(Clone, Debug)]
pub struct DensityReport {
    pub entries: Vec<DensityEntry>,
    pub mode: CountMode,
    pub window: Option<u64>,
    pub final_ratio: Rat,
    pub bound: BoundSemantics,
}

impl DensityReport {
    pub fn final_value(&self) -> f64 {
        self.final_ratio.to_f64()
    }
}

/// Default scan window for witness counting modulo m.
pub fn default_window(m: u64) -> u64 {
    1_000_000u64.max(m.saturating_mul(64))
}

/// Exact R(S : m) for structurally supported sets.
pub fn residue_count_exact(s: &SetExpr, m: u64) -> Result<u64> {
    structural::count_exact(s, m)
}

/// Residues attained by elements up to `w`: a lower bound on R(S : m),
/// non-decreasing in `w`.
pub fn residue_count_window(s: &SetExpr, m: u64, w: u64) -> Result<u64> {
    Ok(sieve_residues_window(s, m, w)?.count_ones())
}

/// Exact attained-residue bit vector modulo `b`.
pub fn sieve_residues_exact(s: &SetExpr, b: u64) -> Result<Bits> {
    structural::attained(s, b, DEFAULT_PERIOD_LIMIT)
}

/// Witness-scan bit vector: bit i set iff some member <= w is = i (mod b).
pub fn sieve_residues_window(s: &SetExpr, b: u64, w: u64) -> Result<Bits> {
    check_period(b, DEFAULT_PERIOD_LIMIT)?;
    const PAR_THRESHOLD: u64 = 1 << 18;
    const CHUNK: u64 = 1 << 16;
    if w < PAR_THRESHOLD {
        let mut bits = Bits::new(b as usize);
        for n in 1..=w {
            if s.contains(n) {
                bits.set((n % b) as usize);
            }
        }
        return Ok(bits);
    }
    let chunks = (w + CHUNK - 1) / CHUNK;
    Ok((0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut bits = Bits::new(b as usize);
            let lo = c * CHUNK + 1;
            let hi = ((c + 1) * CHUNK).min(w);
            for n in lo..=hi {
                if s.contains(n) {
                    bits.set((n % b) as usize);
                }
            }
            bits
        })
        .reduce(
            || Bits::new(b as usize),
            |mut x, y| {
                x.or_assign(&y);
                x
            },
        ))
}

/// The ratio table R(S : B_N) / B_N for N = 1..=n_max.
///
/// In exact mode the ratios are non-increasing upper bounds of the measure
/// density; in window mode each count is a lower bound on the true count
/// and no bound semantics are claimed beyond approximation.
pub fn mu_estimate(
    s: &SetExpr,
    sys: &RemainderSystem,
    n_max: u32,
    mode: CountMode,
    window: Option<u64>,
) -> Result<DensityReport> {
    if n_max == 0 {
        return Err(Error::Invalid("n_max must be >= 1".into()));
    }
    let mut entries = Vec::with_capacity(n_max as usize);
    for n in 1..=n_max {
        let b = sys.modulus(n)?;
        let count = match mode {
            CountMode::Exact => residue_count_exact(s, b)?,
            CountMode::Window => {
                let w = window.unwrap_or_else(|| default_window(b));
                residue_count_window(s, b, w)?
            }
        };
        entries.push(DensityEntry {
            n,
            modulus: b,
            count,
            ratio: Rat::new(count, b)?,
            exact: mode == CountMode::Exact,
        });
    }
    let final_ratio = entries.last().expect("n_max >= 1").ratio;
    Ok(DensityReport {
        entries,
        mode,
        // None in window mode means the per-modulus default was used.
        window: match mode {
            CountMode::Window => window,
            CountMode::Exact => None,
        },
        final_ratio,
        bound: match mode {
            CountMode::Exact => BoundSemantics::UpperBound,
            CountMode::Window => BoundSemantics::Approximation,
        },
    })
}
