//! Set expressions: every builtin family plus scaling and boolean
//! combinations, with total membership tests and, where the structure
//! allows, exact residue sets and exact measures.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::measure::{measure_balpha, measure_multi, measure_valuation, ExponentSet, Measure};
use crate::periodic::PeriodicSet;
use crate::rational::Rat;
use crate::residue::{
    default_rt_primes, factorize, is_prime, isqrt, omega, pow_checked, tau, valuation_raw,
    ResidueClass,
};

/// Prime list for odd-exponent counting: the builtin default (all primes
/// up to 10^4) or an explicit list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RtPrimes {
    Default,
    Explicit(Vec<u64>),
}

impl RtPrimes {
    pub fn explicit(mut primes: Vec<u64>) -> Result<RtPrimes> {
        if primes.is_empty() {
            return Err(Error::Invalid("empty prime list".into()));
        }
        primes.sort_unstable();
        for w in primes.windows(2) {
            if w[0] == w[1] {
                return Err(Error::Invalid(format!("duplicate prime {}", w[0])));
            }
        }
        for &p in &primes {
            if !is_prime(p) {
                return Err(Error::NotPrime(p));
            }
        }
        Ok(RtPrimes::Explicit(primes))
    }

    pub fn list(&self) -> &[u64] {
        match self {
            RtPrimes::Default => default_rt_primes(),
            RtPrimes::Explicit(v) => v,
        }
    }
}

/// An expression denoting a subset of the naturals.
#[derive(Clone, Debug, PartialEq)]
pub enum SetExpr {
    All,
    Empty,
    Odd,
    /// Arithmetic progression r + (m).
    Ap(ResidueClass),
    /// Explicit periodic set (no surface syntax; built internally).
    Periodic(PeriodicSet),
    /// { n : v_p(n) in E }.
    Valuation { p: u64, exps: ExponentSet },
    /// { n : v_{p_i}(n) in E_i for all i }.
    MultiValuation { parts: Vec<(u64, ExponentSet)> },
    /// Union over nonzero dyadic digits a_{n_k} of 2^(n_k - 1) * odd.
    BAlpha { digits: Vec<bool>, truncated: bool },
    /// Perfect squares.
    Squares,
    /// At most t distinct primes in the canonical representation.
    PtMax { t: u32 },
    /// At most t primes from the list with odd exponent.
    RtMax { t: u32, primes: RtPrimes },
    /// { n : tau(n) | n }.
    TauDivides,
    Scale { factor: u64, inner: Box<SetExpr> },
    Union(Vec<SetExpr>),
    Intersect(Vec<SetExpr>),
    Complement(Box<SetExpr>),
}

impl SetExpr {
    pub fn ap(r: u64, m: u64) -> Result<SetExpr> {
        Ok(SetExpr::Ap(ResidueClass::new(r, m)?))
    }

    pub fn valuation(p: u64, exps: ExponentSet) -> Result<SetExpr> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        Ok(SetExpr::Valuation { p, exps })
    }

    pub fn multi_valuation(parts: Vec<(u64, ExponentSet)>) -> Result<SetExpr> {
        if parts.is_empty() {
            return Err(Error::Invalid("mval needs at least one factor".into()));
        }
        for w in parts.windows(2) {
            if w[0].0 >= w[1].0 {
                return Err(Error::Invalid(
                    "primes must be distinct and increasing".into(),
                ));
            }
        }
        for (p, _) in &parts {
            if !is_prime(*p) {
                return Err(Error::NotPrime(*p));
            }
        }
        Ok(SetExpr::MultiValuation { parts })
    }

    /// Digit-string constructor; trailing zero digits carry no content and
    /// are trimmed.
    pub fn balpha_bits(bits: &str) -> Result<SetExpr> {
        let mut digits = Vec::with_capacity(bits.len());
        for c in bits.chars() {
            match c {
                '0' => digits.push(false),
                '1' => digits.push(true),
                _ => {
                    return Err(Error::Invalid(format!(
                        "dyadic digit string may only contain 0/1, got {c:?}"
                    )))
                }
            }
        }
        if digits.len() > 63 {
            return Err(Error::Overflow("dyadic digit prefix longer than 63"));
        }
        while digits.last() == Some(&false) {
            digits.pop();
        }
        Ok(SetExpr::BAlpha {
            digits,
            truncated: false,
        })
    }

    /// Expand num/den < 1 to `k` dyadic digits by long division; ties in
    /// dyadic rationals terminate, anything left over marks truncation.
    pub fn balpha_rational(num: u64, den: u64, k: usize) -> Result<SetExpr> {
        if den == 0 {
            return Err(Error::Invalid("zero denominator".into()));
        }
        if num >= den {
            return Err(Error::Invalid(
                "dyadic construction needs alpha < 1".into(),
            ));
        }
        if k == 0 || k > 63 {
            return Err(Error::Invalid("digit count must be in 1..=63".into()));
        }
        let mut digits = Vec::with_capacity(k);
        let mut r = num as u128;
        let d = den as u128;
        for _ in 0..k {
            r *= 2;
            if r >= d {
                digits.push(true);
                r -= d;
            } else {
                digits.push(false);
            }
        }
        let truncated = r != 0;
        if !truncated {
            while digits.last() == Some(&false) {
                digits.pop();
            }
        }
        Ok(SetExpr::BAlpha { digits, truncated })
    }

    pub fn pt(t: u32) -> SetExpr {
        SetExpr::PtMax { t }
    }

    pub fn rt(t: u32, primes: RtPrimes) -> SetExpr {
        SetExpr::RtMax { t, primes }
    }

    /// { s in S : p | s, p^2 does not divide s }, as the intersection with
    /// the valuation-1 set.
    pub fn p_slice(inner: SetExpr, p: u64) -> Result<SetExpr> {
        let v1 = SetExpr::valuation(p, ExponentSet::explicit(vec![1])?)?;
        Ok(SetExpr::intersect(vec![inner, v1]))
    }

    pub fn scale(factor: u64, inner: SetExpr) -> Result<SetExpr> {
        if factor == 0 {
            return Err(Error::Invalid("scale factor must be >= 1".into()));
        }
        Ok(SetExpr::Scale {
            factor,
            inner: Box::new(inner),
        })
    }

    pub fn union(mut parts: Vec<SetExpr>) -> SetExpr {
        match parts.len() {
            0 => SetExpr::Empty,
            1 => parts.pop().unwrap(),
            _ => SetExpr::Union(parts),
        }
    }

    pub fn intersect(mut parts: Vec<SetExpr>) -> SetExpr {
        match parts.len() {
            0 => SetExpr::All,
            1 => parts.pop().unwrap(),
            _ => SetExpr::Intersect(parts),
        }
    }

    pub fn complement(inner: SetExpr) -> SetExpr {
        SetExpr::Complement(Box::new(inner))
    }

    /// 1-based positions of nonzero dyadic digits.
    pub fn balpha_positions(digits: &[bool]) -> Vec<u32> {
        digits
            .iter()
            .enumerate()
            .filter(|(_, &d)| d)
            .map(|(i, _)| i as u32 + 1)
            .collect()
    }

    /// The parts 2^(n_k - 1) * odd of the dyadic construction.
    pub fn balpha_parts(digits: &[bool]) -> Vec<SetExpr> {
        SetExpr::balpha_positions(digits)
            .iter()
            .map(|&nk| SetExpr::scale(1u64 << (nk - 1), SetExpr::Odd).unwrap())
            .collect()
    }

    /// Total membership test; 0 is not a natural and never belongs.
    pub fn contains(&self, n: u64) -> bool {
        if n == 0 {
            return false;
        }
        match self {
            SetExpr::All => true,
            SetExpr::Empty => false,
            SetExpr::Odd => n % 2 == 1,
            SetExpr::Ap(c) => c.contains(n),
            SetExpr::Periodic(p) => p.contains(n),
            SetExpr::Valuation { p, exps } => exps.contains(valuation_raw(n, *p)),
            SetExpr::MultiValuation { parts } => parts
                .iter()
                .all(|(p, exps)| exps.contains(valuation_raw(n, *p))),
            SetExpr::BAlpha { digits, .. } => {
                let e = valuation_raw(n, 2) as usize;
                e < digits.len() && digits[e]
            }
            SetExpr::Squares => {
                let r = isqrt(n);
                r * r == n
            }
            SetExpr::PtMax { t } => omega(n).map_or(false, |w| w <= *t),
            SetExpr::RtMax { t, primes } => {
                let list = primes.list();
                let count = factorize(n)
                    .iter()
                    .filter(|(p, e)| e % 2 == 1 && list.binary_search(p).is_ok())
                    .count() as u32;
                count <= *t
            }
            SetExpr::TauDivides => tau(n).map_or(false, |t| n % t == 0),
            SetExpr::Scale { factor, inner } => n % factor == 0 && inner.contains(n / factor),
            SetExpr::Union(parts) => parts.iter().any(|p| p.contains(n)),
            SetExpr::Intersect(parts) => parts.iter().all(|p| p.contains(n)),
            SetExpr::Complement(inner) => !inner.contains(n),
        }
    }

    /// Exact periodic representation when one exists within the period
    /// limit. `Ok(None)` means the set is not periodic-representable.
    pub fn try_to_periodic(&self) -> Result<Option<PeriodicSet>> {
        match self {
            SetExpr::All => Ok(Some(PeriodicSet::all())),
            SetExpr::Empty => Ok(Some(PeriodicSet::empty())),
            SetExpr::Odd => Ok(Some(PeriodicSet::odd())),
            SetExpr::Ap(c) => Ok(Some(PeriodicSet::from_classes(&[*c])?)),
            SetExpr::Periodic(p) => Ok(Some(p.clone())),
            SetExpr::Valuation { p, exps } => valuation_periodic(*p, exps),
            SetExpr::MultiValuation { parts } => {
                let mut acc = PeriodicSet::all();
                for (p, exps) in parts {
                    match valuation_periodic(*p, exps)? {
                        Some(ps) => acc = acc.intersect(&ps)?,
                        None => return Ok(None),
                    }
                }
                Ok(Some(acc))
            }
            SetExpr::BAlpha { digits, .. } => {
                let mut classes = Vec::new();
                for nk in SetExpr::balpha_positions(digits) {
                    let m = pow_checked(2, nk)?;
                    classes.push(ResidueClass::new(m / 2, m)?);
                }
                Ok(Some(PeriodicSet::from_classes(&classes)?))
            }
            SetExpr::Squares
            | SetExpr::PtMax { .. }
            | SetExpr::RtMax { .. }
            | SetExpr::TauDivides => Ok(None),
            SetExpr::Scale { factor, inner } => match inner.try_to_periodic()? {
                Some(ps) => Ok(Some(ps.scale(*factor)?)),
                None => Ok(None),
            },
            SetExpr::Union(parts) => {
                let mut acc = PeriodicSet::empty();
                for part in parts {
                    match part.try_to_periodic()? {
                        Some(ps) => acc = acc.union(&ps)?,
                        None => return Ok(None),
                    }
                }
                Ok(Some(acc))
            }
            SetExpr::Intersect(parts) => {
                let mut acc = PeriodicSet::all();
                for part in parts {
                    match part.try_to_periodic()? {
                        Some(ps) => acc = acc.intersect(&ps)?,
                        None => return Ok(None),
                    }
                }
                Ok(Some(acc))
            }
            SetExpr::Complement(inner) => match inner.try_to_periodic()? {
                Some(ps) => Ok(Some(ps.complement())),
                None => Ok(None),
            },
        }
    }

    /// Exact measure with tail bound, when the node structure provides
    /// one; `Ok(None)` otherwise.
    pub fn exact_measure(&self) -> Result<Option<Measure>> {
        match self {
            SetExpr::All => Ok(Some(Measure::exact(Rat::ONE))),
            SetExpr::Empty => Ok(Some(Measure::exact(Rat::ZERO))),
            SetExpr::Odd => Ok(Some(Measure::exact(Rat::new(1, 2)?))),
            SetExpr::Ap(c) => Ok(Some(Measure::exact(Rat::new(1, c.modulus())?))),
            SetExpr::Periodic(p) => Ok(Some(Measure::exact(p.density()))),
            SetExpr::Valuation { p, exps } => Ok(Some(measure_valuation(*p, exps)?)),
            SetExpr::MultiValuation { parts } => Ok(Some(measure_multi(parts)?)),
            SetExpr::BAlpha { digits, truncated } => {
                Ok(Some(measure_balpha(digits, *truncated)?))
            }
            SetExpr::Scale { factor, inner } => match inner.exact_measure()? {
                Some(m) => Ok(Some(Measure {
                    value: m.value.div_int(*factor)?,
                    tail: m.tail.div_int(*factor)?,
                })),
                None => Ok(None),
            },
            SetExpr::Squares
            | SetExpr::PtMax { .. }
            | SetExpr::RtMax { .. }
            | SetExpr::TauDivides => Ok(None),
            SetExpr::Union(_) | SetExpr::Intersect(_) | SetExpr::Complement(_) => {
                match self.try_to_periodic() {
                    Ok(Some(ps)) => return Ok(Some(Measure::exact(ps.density()))),
                    // An oversized periodic form is not a reason to give
                    // up; the atom route may still apply.
                    Ok(None) | Err(Error::PeriodLimit { .. }) => {}
                    Err(e) => return Err(e),
                }
                crate::estimator::structural::atoms_measure(self)
            }
        }
    }

    /// Whether exact residue counting is available for this expression.
    pub fn has_exact_residues(&self) -> bool {
        crate::estimator::structural::supports_exact(self)
    }

    /// True when the expression structurally denotes the empty set.
    /// Errors for expressions without exact residue structure.
    pub fn provably_empty(&self) -> Result<bool> {
        crate::estimator::structural::proven_empty(self)
    }

    pub fn has_exact_measure(&self) -> bool {
        matches!(self.exact_measure(), Ok(Some(_)))
    }
}

/// Periodic form of { n : v_p(n) in E }: finite exponent sets live mod
/// p^(emax + 1), and a step-1 progression from s is exactly (p^s).
fn valuation_periodic(p: u64, exps: &ExponentSet) -> Result<Option<PeriodicSet>> {
    use crate::measure::ExpKind;
    match exps.kind() {
        ExpKind::Explicit(list) => {
            if list.is_empty() {
                return Ok(Some(PeriodicSet::empty()));
            }
            let emax = *list.last().unwrap();
            let period = pow_checked(p, emax + 1)?;
            crate::periodic::check_period(period, crate::periodic::DEFAULT_PERIOD_LIMIT)?;
            let residues = (1..period).filter(|&r| exps.contains(valuation_raw(r, p)));
            Ok(Some(PeriodicSet::from_residues(period, residues)?))
        }
        ExpKind::Progression { start, step } => {
            if *step == 1 {
                let period = pow_checked(p, *start)?;
                Ok(Some(PeriodicSet::from_residues(period, [0])?))
            } else {
                Ok(None)
            }
        }
    }
}

impl fmt::Display for SetExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn exps_fmt(f: &mut fmt::Formatter<'_>, e: &ExponentSet) -> fmt::Result {
            use crate::measure::ExpKind;
            match e.kind() {
                ExpKind::Explicit(v) => {
                    write!(f, "{{")?;
                    for (i, x) in v.iter().enumerate() {
                        if i > 0 {
                            write!(f, ",")?;
                        }
                        write!(f, "{x}")?;
                    }
                    write!(f, "}}")
                }
                ExpKind::Progression { start, step } => {
                    write!(f, "ap({start},{step}),{}", e.trunc())
                }
            }
        }
        match self {
            SetExpr::All => write!(f, "all"),
            SetExpr::Empty => write!(f, "empty"),
            SetExpr::Odd => write!(f, "odd"),
            SetExpr::Ap(c) => write!(f, "ap({},{})", c.residue(), c.modulus()),
            SetExpr::Periodic(p) => {
                write!(f, "union(")?;
                let mut first = true;
                for r in p.member_residues() {
                    if !first {
                        write!(f, ",")?;
                    }
                    first = false;
                    write!(f, "ap({},{})", r, p.period())?;
                }
                if first {
                    write!(f, "empty")?;
                }
                write!(f, ")")
            }
            SetExpr::Valuation { p, exps } => {
                write!(f, "val({p},")?;
                exps_fmt(f, exps)?;
                write!(f, ")")
            }
            SetExpr::MultiValuation { parts } => {
                write!(f, "mval(")?;
                for (i, (p, exps)) in parts.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "({p},")?;
                    exps_fmt(f, exps)?;
                    write!(f, ")")?;
                }
                write!(f, ")")
            }
            SetExpr::BAlpha { digits, truncated } => {
                write!(f, "balpha(")?;
                if digits.is_empty() {
                    write!(f, "0")?;
                } else {
                    for &d in digits {
                        write!(f, "{}", if d { '1' } else { '0' })?;
                    }
                }
                if *truncated {
                    write!(f, "...")?;
                }
                write!(f, ",{})", digits.len().max(1))
            }
            SetExpr::Squares => write!(f, "squares"),
            SetExpr::PtMax { t } => write!(f, "pt({t})"),
            SetExpr::RtMax { t, primes } => match primes {
                RtPrimes::Default => write!(f, "rt({t};default)"),
                RtPrimes::Explicit(v) => {
                    write!(f, "rt({t};")?;
                    for (i, p) in v.iter().enumerate() {
                        if i > 0 {
                            write!(f, ",")?;
                        }
                        write!(f, "{p}")?;
                    }
                    write!(f, ")")
                }
            },
            SetExpr::TauDivides => write!(f, "taudiv"),
            SetExpr::Scale { factor, inner } => write!(f, "scale({factor},{inner})"),
            SetExpr::Union(parts) => {
                write!(f, "union(")?;
                for (i, p) in parts.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{p}")?;
                }
                write!(f, ")")
            }
            SetExpr::Intersect(parts) => {
                write!(f, "inter(")?;
                for (i, p) in parts.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{p}")?;
                }
                write!(f, ")")
            }
            SetExpr::Complement(inner) => write!(f, "comp({inner})"),
        }
    }
}

impl FromStr for SetExpr {
    type Err = Error;

    fn from_str(s: &str) -> Result<SetExpr> {
        crate::parse::parse_expr(s)
    }
}
