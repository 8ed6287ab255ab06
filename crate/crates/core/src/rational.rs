//! Exact nonnegative rationals on 64-bit components.
//!
//! Densities, measures and cover weights all live in [0, 1] or small sums
//! thereof, so 64 bits per component is plenty; every operation keeps the
//! value in lowest terms and reports overflow instead of wrapping.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};
use crate::residue::gcd;

/// A nonnegative rational in lowest terms, `den >= 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Rat {
    num: u64,
    den: u64,
}

impl Rat {
    pub const ZERO: Rat = Rat { num: 0, den: 1 };
    pub const ONE: Rat = Rat { num: 1, den: 1 };

    pub fn new(num: u64, den: u64) -> Result<Rat> {
        if den == 0 {
            return Err(Error::Invalid("rational with zero denominator".into()));
        }
        let g = gcd(num, den);
        Ok(Rat {
            num: num / g,
            den: den / g,
        })
    }

    pub fn from_int(n: u64) -> Rat {
        Rat { num: n, den: 1 }
    }

    fn from_u128(num: u128, den: u128) -> Result<Rat> {
        debug_assert!(den > 0);
        let g = gcd_u128(num, den);
        let (num, den) = (num / g, den / g);
        if num > u64::MAX as u128 || den > u64::MAX as u128 {
            return Err(Error::Overflow("rational reduction"));
        }
        Ok(Rat {
            num: num as u64,
            den: den as u64,
        })
    }

    pub fn num(&self) -> u64 {
        self.num
    }

    pub fn den(&self) -> u64 {
        self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num == 0
    }

    pub fn add(&self, other: &Rat) -> Result<Rat> {
        let num = self.num as u128 * other.den as u128 + other.num as u128 * self.den as u128;
        Rat::from_u128(num, self.den as u128 * other.den as u128)
    }

    /// `self - other`; errors when the result would be negative.
    pub fn sub(&self, other: &Rat) -> Result<Rat> {
        let a = self.num as u128 * other.den as u128;
        let b = other.num as u128 * self.den as u128;
        if b > a {
            return Err(Error::Invalid("negative rational result".into()));
        }
        Rat::from_u128(a - b, self.den as u128 * other.den as u128)
    }

    pub fn mul(&self, other: &Rat) -> Result<Rat> {
        Rat::from_u128(
            self.num as u128 * other.num as u128,
            self.den as u128 * other.den as u128,
        )
    }

    pub fn div(&self, other: &Rat) -> Result<Rat> {
        if other.num == 0 {
            return Err(Error::Invalid("division by zero rational".into()));
        }
        Rat::from_u128(
            self.num as u128 * other.den as u128,
            self.den as u128 * other.num as u128,
        )
    }

    pub fn div_int(&self, n: u64) -> Result<Rat> {
        if n == 0 {
            return Err(Error::Invalid("division by zero".into()));
        }
        Rat::from_u128(self.num as u128, self.den as u128 * n as u128)
    }

    pub fn mul_int(&self, n: u64) -> Result<Rat> {
        Rat::from_u128(self.num as u128 * n as u128, self.den as u128)
    }

    /// 1/n for n >= 1.
    pub fn recip_int(n: u64) -> Result<Rat> {
        Rat::new(1, n)
    }

    pub fn to_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// Absolute difference, handy for tolerance comparisons.
    pub fn abs_diff(&self, other: &Rat) -> Result<Rat> {
        if self >= other {
            self.sub(other)
        } else {
            other.sub(self)
        }
    }
}

fn gcd_u128(mut a: u128, mut b: u128) -> u128 {
    if a == 0 {
        return b.max(1);
    }
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

impl PartialOrd for Rat {
    fn partial_cmp(&self, other: &Rat) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Rat {
    fn cmp(&self, other: &Rat) -> Ordering {
        let a = self.num as u128 * other.den as u128;
        let b = other.num as u128 * self.den as u128;
        a.cmp(&b)
    }
}

impl fmt::Display for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduction_and_display() {
        let r = Rat::new(10, 20).unwrap();
        assert_eq!((r.num(), r.den()), (1, 2));
        assert_eq!(r.to_string(), "1/2");
        assert_eq!(Rat::new(0, 7).unwrap(), Rat::ZERO);
    }

    #[test]
    fn arithmetic() {
        let a = Rat::new(1, 2).unwrap();
        let b = Rat::new(1, 8).unwrap();
        assert_eq!(a.add(&b).unwrap(), Rat::new(5, 8).unwrap());
        assert_eq!(a.sub(&b).unwrap(), Rat::new(3, 8).unwrap());
        assert_eq!(a.mul(&b).unwrap(), Rat::new(1, 16).unwrap());
        assert_eq!(a.div(&b).unwrap(), Rat::from_int(4));
        assert!(b.sub(&a).is_err());
    }

    #[test]
    fn ordering_uses_values() {
        let a = Rat::new(2, 3).unwrap();
        let b = Rat::new(3, 5).unwrap();
        assert!(a > b);
        assert!(Rat::ZERO < Rat::ONE);
    }

    #[test]
    fn zero_denominator_rejected() {
        assert!(Rat::new(1, 0).is_err());
    }
}
