//! Finite unions of residue classes, stored as a full membership bit
//! vector over one period. On this layer the measure density is exactly
//! the rational member count / period, and all boolean operations stay
//! closed.

use crate::bits::Bits;
use crate::error::{Error, Result};
use crate::rational::Rat;
use crate::residue::{lcm_checked, ResidueClass};

/// Default ceiling for periods and sieve moduli (in bits).
pub const DEFAULT_PERIOD_LIMIT: u64 = 1 << 32;

pub(crate) fn check_period(p: u64, limit: u64) -> Result<u64> {
    if p == 0 || p > limit {
        Err(Error::PeriodLimit {
            period: p as u128,
            limit,
        })
    } else {
        Ok(p)
    }
}

/// A periodic subset of the naturals: `n` belongs iff `n mod period` is a
/// member residue.
#[derive(Clone, Debug)]
pub struct PeriodicSet {
    period: u64,
    members: Bits,
}

impl PeriodicSet {
    pub fn empty() -> PeriodicSet {
        PeriodicSet {
            period: 1,
            members: Bits::new(1),
        }
    }

    pub fn all() -> PeriodicSet {
        let mut members = Bits::new(1);
        members.set(0);
        PeriodicSet { period: 1, members }
    }

    pub fn odd() -> PeriodicSet {
        let mut members = Bits::new(2);
        members.set(1);
        PeriodicSet { period: 2, members }
    }

    pub fn from_members(period: u64, members: Bits) -> Result<PeriodicSet> {
        check_period(period, DEFAULT_PERIOD_LIMIT)?;
        if members.len() as u64 != period {
            return Err(Error::Invalid("member table length != period".into()));
        }
        Ok(PeriodicSet { period, members })
    }

    pub fn from_residues<I: IntoIterator<Item = u64>>(period: u64, residues: I) -> Result<PeriodicSet> {
        check_period(period, DEFAULT_PERIOD_LIMIT)?;
        let mut members = Bits::new(period as usize);
        for r in residues {
            members.set((r % period) as usize);
        }
        Ok(PeriodicSet { period, members })
    }

    /// Union of the given classes over the lcm of their moduli.
    pub fn from_classes(classes: &[ResidueClass]) -> Result<PeriodicSet> {
        Self::from_classes_limited(classes, DEFAULT_PERIOD_LIMIT)
    }

    pub fn from_classes_limited(classes: &[ResidueClass], limit: u64) -> Result<PeriodicSet> {
        if classes.is_empty() {
            return Ok(PeriodicSet::empty());
        }
        let mut period: u64 = 1;
        for c in classes {
            period = lcm_checked(period, c.modulus())?;
        }
        check_period(period, limit)?;
        let mut members = Bits::new(period as usize);
        for c in classes {
            let mut r = c.residue();
            while r < period {
                members.set(r as usize);
                r += c.modulus();
            }
        }
        Ok(PeriodicSet { period, members })
    }

    pub fn period(&self) -> u64 {
        self.period
    }

    pub fn member_count(&self) -> u64 {
        self.members.count_ones()
    }

    pub fn is_empty_set(&self) -> bool {
        self.member_count() == 0
    }

    pub fn contains(&self, n: u64) -> bool {
        self.members.get((n % self.period) as usize)
    }

    pub fn contains_residue(&self, r: u64) -> bool {
        self.members.get((r % self.period) as usize)
    }

    /// Member residues in [0, period).
    pub fn member_residues(&self) -> impl Iterator<Item = u64> + '_ {
        self.members.ones().map(|i| i as u64)
    }

    /// Smallest natural (>= 1) in the set.
    pub fn smallest_member(&self) -> Option<u64> {
        let mut it = self.members.ones();
        match it.next() {
            Some(0) => Some(if self.period == 1 { 1 } else { self.period }),
            Some(r) => Some(r as u64),
            None => None,
        }
    }

    /// |members| / period in lowest terms; equals the measure density of
    /// the set.
    pub fn density(&self) -> Rat {
        Rat::new(self.member_count(), self.period).expect("period >= 1")
    }

    /// Re-express over a multiple of the current period.
    pub fn rebase(&self, new_period: u64) -> Result<PeriodicSet> {
        if new_period % self.period != 0 {
            return Err(Error::Invalid(format!(
                "{} is not a multiple of period {}",
                new_period, self.period
            )));
        }
        check_period(new_period, DEFAULT_PERIOD_LIMIT)?;
        if new_period == self.period {
            return Ok(self.clone());
        }
        let mut members = Bits::new(new_period as usize);
        for x in self.members.ones() {
            let mut r = x as u64;
            while r < new_period {
                members.set(r as usize);
                r += self.period;
            }
        }
        Ok(PeriodicSet {
            period: new_period,
            members,
        })
    }

    pub fn union(&self, other: &PeriodicSet) -> Result<PeriodicSet> {
        let l = lcm_checked(self.period, other.period)?;
        let mut a = self.rebase(l)?;
        let b = other.rebase(l)?;
        a.members.or_assign(&b.members);
        Ok(a)
    }

    pub fn intersect(&self, other: &PeriodicSet) -> Result<PeriodicSet> {
        let l = lcm_checked(self.period, other.period)?;
        let mut a = self.rebase(l)?;
        let b = other.rebase(l)?;
        a.members.and_assign(&b.members);
        Ok(a)
    }

    pub fn complement(&self) -> PeriodicSet {
        let mut members = self.members.clone();
        members.invert();
        PeriodicSet {
            period: self.period,
            members,
        }
    }

    /// Image under multiplication by `a >= 1`; density divides by `a`.
    pub fn scale(&self, a: u64) -> Result<PeriodicSet> {
        if a == 0 {
            return Err(Error::Invalid("scale factor must be >= 1".into()));
        }
        let period = self
            .period
            .checked_mul(a)
            .ok_or(Error::Overflow("periodic scale"))?;
        check_period(period, DEFAULT_PERIOD_LIMIT)?;
        let mut members = Bits::new(period as usize);
        for x in self.members.ones() {
            members.set(x * a as usize);
        }
        Ok(PeriodicSet { period, members })
    }

    /// Preimage under multiplication by `c`: { y : c*y in self }.
    pub(crate) fn unscale(&self, c: u64) -> Result<PeriodicSet> {
        if c == 0 {
            return Err(Error::Invalid("scale factor must be >= 1".into()));
        }
        let g = crate::residue::gcd(c % self.period, self.period);
        let period = self.period / g;
        let mut members = Bits::new(period as usize);
        for y in 0..period {
            let r = crate::residue::mul_mod(c % self.period, y, self.period);
            if self.members.get(r as usize) {
                members.set(y as usize);
            }
        }
        Ok(PeriodicSet { period, members })
    }

    /// Bit `i` set iff residue `i` mod `m` is attained by some element.
    pub fn residue_bits(&self, m: u64, limit: u64) -> Result<Bits> {
        check_period(m, limit)?;
        let span = lcm_checked(self.period, m)?;
        check_period(span, limit)?;
        let mut bits = Bits::new(m as usize);
        let copies = span / self.period;
        for x in self.members.ones() {
            let mut v = x as u64 % m;
            let step = self.period % m;
            for _ in 0..copies {
                bits.set(v as usize);
                v += step;
                if v >= m {
                    v -= m;
                }
            }
        }
        Ok(bits)
    }

    /// Exact R(S : m): number of residues mod m attained by the set.
    pub fn residue_count(&self, m: u64) -> Result<u64> {
        Ok(self.residue_bits(m, DEFAULT_PERIOD_LIMIT)?.count_ones())
    }

    /// Minimal-period representation.
    pub fn canonical(&self) -> PeriodicSet {
        let l = self.period;
        for d in 1..=l / 2 {
            if l % d != 0 {
                continue;
            }
            let tiles = (d..l).all(|i| {
                self.members.get(i as usize) == self.members.get((i % d) as usize)
            });
            if tiles {
                let mut members = Bits::new(d as usize);
                for i in 0..d as usize {
                    if self.members.get(i) {
                        members.set(i);
                    }
                }
                return PeriodicSet { period: d, members };
            }
        }
        self.clone()
    }
}

/// Equality canonicalizes both sides, so the same set in different period
/// representations compares equal.
impl PartialEq for PeriodicSet {
    fn eq(&self, other: &PeriodicSet) -> bool {
        let a = self.canonical();
        let b = other.canonical();
        a.period == b.period && a.members == b.members
    }
}

impl Eq for PeriodicSet {}
