//! Exact measures, with explicit tail bounds, for the valuation-set,
//! multi-prime, dyadic-union and scaled-union families.

use crate::error::{Error, Result};
use crate::expr::SetExpr;
use crate::rational::Rat;
use crate::residue::{is_prime, pow_checked};

/// A set of admissible exponents: a finite explicit list, or an infinite
/// arithmetic progression `start + k*step` truncated to `trunc` terms for
/// measure evaluation. Elements are naturals >= 1; 0 is never admissible.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExpKind {
    Explicit(Vec<u32>),
    Progression { start: u32, step: u32 },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExponentSet {
    kind: ExpKind,
    trunc: usize,
}

impl ExponentSet {
    pub fn explicit(mut elems: Vec<u32>) -> Result<ExponentSet> {
        elems.sort_unstable();
        for w in elems.windows(2) {
            if w[0] == w[1] {
                return Err(Error::Invalid(format!("duplicate exponent {}", w[0])));
            }
        }
        if elems.first().is_some_and(|&e| e == 0) {
            return Err(Error::Invalid("exponent 0 is not admissible".into()));
        }
        let trunc = elems.len();
        Ok(ExponentSet {
            kind: ExpKind::Explicit(elems),
            trunc,
        })
    }

    /// Infinite progression start, start+step, ... with a truncation depth
    /// used when summing measures.
    pub fn progression(start: u32, step: u32, trunc: usize) -> Result<ExponentSet> {
        if start == 0 {
            return Err(Error::Invalid("exponent 0 is not admissible".into()));
        }
        if step == 0 {
            return Err(Error::Invalid("progression step must be >= 1".into()));
        }
        Ok(ExponentSet {
            kind: ExpKind::Progression { start, step },
            trunc,
        })
    }

    /// Every exponent >= 1 (the progression 1, 2, 3, ...).
    pub fn all(trunc: usize) -> ExponentSet {
        ExponentSet {
            kind: ExpKind::Progression { start: 1, step: 1 },
            trunc,
        }
    }

    pub fn kind(&self) -> &ExpKind {
        &self.kind
    }

    pub fn trunc(&self) -> usize {
        self.trunc
    }

    pub fn is_finite(&self) -> bool {
        matches!(self.kind, ExpKind::Explicit(_))
    }

    pub fn is_empty(&self) -> bool {
        matches!(&self.kind, ExpKind::Explicit(v) if v.is_empty())
    }

    /// Full (untruncated) membership test.
    pub fn contains(&self, e: u32) -> bool {
        match &self.kind {
            ExpKind::Explicit(v) => v.binary_search(&e).is_ok(),
            ExpKind::Progression { start, step } => {
                e >= *start && (e - start) % step == 0
            }
        }
    }

    /// Whether some admissible exponent is >= `x`.
    pub fn has_geq(&self, x: u32) -> bool {
        match &self.kind {
            ExpKind::Explicit(v) => v.last().is_some_and(|&e| e >= x),
            ExpKind::Progression { .. } => true,
        }
    }

    /// Terms entering the measure sum: all of a finite list, the first
    /// `trunc` of a progression.
    pub fn measure_terms(&self) -> Vec<u32> {
        match &self.kind {
            ExpKind::Explicit(v) => v.clone(),
            ExpKind::Progression { start, step } => (0..self.trunc as u64)
                .map_while(|k| {
                    let e = *start as u64 + k * *step as u64;
                    u32::try_from(e).ok()
                })
                .collect(),
        }
    }
}

/// A measure value with an explicit upper bound on everything truncated
/// away; `tail == 0` means the value is exact.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Measure {
    pub value: Rat,
    pub tail: Rat,
}

impl Measure {
    pub fn exact(value: Rat) -> Measure {
        Measure {
            value,
            tail: Rat::ZERO,
        }
    }

    pub fn is_exact(&self) -> bool {
        self.tail.is_zero()
    }
}

/// Measure of N(p, E) = { n : v_p(n) in E }:
/// (1 - 1/p) * sum over e in E of p^-e, truncated terms covered by the
/// tail bound p^-(last included exponent).
pub fn measure_valuation(p: u64, exps: &ExponentSet) -> Result<Measure> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    let terms = exps.measure_terms();
    if terms.is_empty() && exps.is_finite() {
        return Ok(Measure::exact(Rat::ZERO));
    }
    if terms.is_empty() {
        // Progression truncated to zero terms: all mass is tail.
        return Ok(Measure {
            value: Rat::ZERO,
            tail: Rat::ONE,
        });
    }
    let factor = Rat::new(p - 1, p)?;
    let mut sum = Rat::ZERO;
    for &e in &terms {
        sum = sum.add(&Rat::new(1, pow_checked(p, e)?)?)?;
    }
    let value = factor.mul(&sum)?;
    let tail = if exps.is_finite() {
        Rat::ZERO
    } else {
        Rat::new(1, pow_checked(p, *terms.last().unwrap())?)?
    };
    Ok(Measure { value, tail })
}

/// Measure of the multi-prime set N(p_1..p_k, E_1..E_k):
/// product of (1 - 1/p_i) times the product of per-prime exponent sums,
/// tails propagated multiplicatively.
pub fn measure_multi(parts: &[(u64, ExponentSet)]) -> Result<Measure> {
    for w in parts.windows(2) {
        if w[0].0 >= w[1].0 {
            return Err(Error::Invalid(
                "primes must be distinct and increasing".into(),
            ));
        }
    }
    let mut value = Rat::ONE;
    let mut upper = Rat::ONE;
    for (p, exps) in parts {
        if exps.is_empty() {
            return Ok(Measure::exact(Rat::ZERO));
        }
        let m = measure_valuation(*p, exps)?;
        value = value.mul(&m.value)?;
        upper = upper.mul(&m.value.add(&m.tail)?)?;
    }
    let tail = upper.sub(&value)?;
    Ok(Measure { value, tail })
}

/// Exact count of residues mod p^a attainable by elements with
/// v_p in E: one class block per admissible exponent below `a`, plus the
/// zero residue when some admissible exponent reaches `a`.
pub fn residues_valuation(p: u64, exps: &ExponentSet, a: u32) -> Result<u64> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    if a == 0 {
        return Err(Error::Invalid("exponent a must be >= 1".into()));
    }
    pow_checked(p, a)?;
    let mut count: u64 = 0;
    for e in 0..a {
        if exps.contains(e) {
            let block = pow_checked(p, a - e - 1)?
                .checked_mul(p - 1)
                .ok_or(Error::Overflow("residue count"))?;
            count = count
                .checked_add(block)
                .ok_or(Error::Overflow("residue count"))?;
        }
    }
    if exps.has_geq(a) {
        count += 1;
    }
    Ok(count)
}

/// Partial sum of 2^-n over the nonzero digit positions of a dyadic
/// expansion; the tail bound covers everything past the digit prefix.
pub fn measure_balpha(digits: &[bool], truncated: bool) -> Result<Measure> {
    if digits.len() > 63 {
        return Err(Error::Overflow("dyadic digit prefix longer than 63"));
    }
    let mut value = Rat::ZERO;
    for (i, &d) in digits.iter().enumerate() {
        if d {
            value = value.add(&Rat::new(1, 1u64 << (i + 1))?)?;
        }
    }
    let tail = if truncated {
        Rat::new(1, 1u64 << digits.len())?
    } else {
        Rat::ZERO
    };
    Ok(Measure { value, tail })
}

/// How the coprimality hypothesis of a scaled union was established.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CoprimalityEvidence {
    /// Every part exposes its exact residue structure and no member
    /// residue shares a prime with any scale.
    Structural,
    /// Only verified for elements up to the stored window.
    Window(u64),
}

/// A union of scaled parts b_1*H_1, b_2*H_2, ... with b_i | b_{i+1}
/// increasing and every element of every H_i coprime to every scale.
#[derive(Clone, Debug)]
pub struct ScaledUnionSpec {
    pub scales: Vec<u64>,
    pub parts: Vec<SetExpr>,
    /// Marks that the listed parts are a prefix of an infinite family;
    /// adds the 1/b_K trailing bound.
    pub truncated: bool,
}

impl ScaledUnionSpec {
    pub fn new(scales: Vec<u64>, parts: Vec<SetExpr>, truncated: bool) -> Result<ScaledUnionSpec> {
        let spec = ScaledUnionSpec {
            scales,
            parts,
            truncated,
        };
        spec.validate_chain()?;
        Ok(spec)
    }

    pub fn validate_chain(&self) -> Result<()> {
        if self.scales.len() != self.parts.len() {
            return Err(Error::Invalid("scales and parts differ in length".into()));
        }
        for (i, &b) in self.scales.iter().enumerate() {
            if b == 0 {
                return Err(Error::Hypothesis("scale 0 in divisibility chain".into()));
            }
            if i > 0 {
                let prev = self.scales[i - 1];
                if b <= prev || b % prev != 0 {
                    return Err(Error::Hypothesis(format!(
                        "divisibility chain broken at index {i}: {prev} then {b}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Check that every element of every part is coprime to every scale.
    /// Returns the kind of evidence obtained, plus a violating element if
    /// one exists.
    pub fn coprimality_witness(&self, window: u64) -> Result<(CoprimalityEvidence, Option<u64>)> {
        let mut primes: Vec<u64> = Vec::new();
        for &b in &self.scales {
            for (p, _) in crate::residue::factorize(b) {
                if !primes.contains(&p) {
                    primes.push(p);
                }
            }
        }
        if primes.is_empty() {
            return Ok((CoprimalityEvidence::Structural, None));
        }
        let mut structural = true;
        for part in &self.parts {
            match part.try_to_periodic()? {
                Some(ps) => {
                    for &q in &primes {
                        if ps.period() % q != 0 {
                            // Some class then contains multiples of q.
                            if let Some(x) = ps.member_residues().next() {
                                // Smallest element of that class divisible by q.
                                let mut n = if x == 0 { ps.period() } else { x };
                                while n % q != 0 || !ps.contains(n) {
                                    n += ps.period();
                                }
                                return Ok((CoprimalityEvidence::Structural, Some(n)));
                            }
                        } else {
                            for x in ps.member_residues() {
                                if x % q == 0 {
                                    let n = if x == 0 { ps.period() } else { x };
                                    return Ok((CoprimalityEvidence::Structural, Some(n)));
                                }
                            }
                        }
                    }
                }
                None => structural = false,
            }
        }
        if structural {
            return Ok((CoprimalityEvidence::Structural, None));
        }
        // Fall back to scanning the window for all parts.
        for n in 1..=window {
            for part in &self.parts {
                if part.contains(n) && primes.iter().any(|&q| n % q == 0) {
                    return Ok((CoprimalityEvidence::Window(window), Some(n)));
                }
            }
        }
        Ok((CoprimalityEvidence::Window(window), None))
    }

    /// Parts of the dyadic construction: scale 2^(n_k - 1) copies of the
    /// odd numbers, one per nonzero digit.
    pub fn balpha(digits: &[bool], truncated: bool) -> Result<ScaledUnionSpec> {
        let mut scales = Vec::new();
        let mut parts = Vec::new();
        for (i, &d) in digits.iter().enumerate() {
            if d {
                if i >= 63 {
                    return Err(Error::Overflow("dyadic scale"));
                }
                scales.push(1u64 << i);
                parts.push(SetExpr::Odd);
            }
        }
        ScaledUnionSpec::new(scales, parts, truncated)
    }
}

/// Sum of part measures divided by their scales. Errors when the chain or
/// the coprimality hypothesis fails (with a witness in the message).
pub fn measure_scaled_union(
    spec: &ScaledUnionSpec,
    window: u64,
) -> Result<(Measure, CoprimalityEvidence)> {
    spec.validate_chain()?;
    let (evidence, witness) = spec.coprimality_witness(window)?;
    if let Some(n) = witness {
        return Err(Error::Hypothesis(format!(
            "element {n} of a part is not coprime to the scales"
        )));
    }
    let mut value = Rat::ZERO;
    let mut tail = Rat::ZERO;
    for (part, &b) in spec.parts.iter().zip(&spec.scales) {
        let m = part
            .exact_measure()?
            .ok_or_else(|| Error::Unsupported(format!("part {part} has no exact measure")))?;
        value = value.add(&m.value.div_int(b)?)?;
        tail = tail.add(&m.tail.div_int(b)?)?;
    }
    if spec.truncated {
        if let Some(&last) = spec.scales.last() {
            // The chain at least doubles, so the dropped scales sum to
            // at most 1/b_K.
            tail = tail.add(&Rat::new(1, last)?)?;
        }
    }
    Ok((Measure { value, tail }, evidence))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::residue::valuation;

    fn exps(list: &[u32]) -> ExponentSet {
        ExponentSet::explicit(list.to_vec()).unwrap()
    }

    /// Oracle: density of { n : v_p(n) in E } over one full period p^a by
    /// direct enumeration.
    fn valuation_density_oracle(p: u64, list: &[u32], a: u32) -> Rat {
        let period = p.pow(a);
        let count = (1..=period)
            .filter(|&n| list.contains(&valuation(n, p).unwrap()))
            .count() as u64;
        Rat::new(count, period).unwrap()
    }

    #[test]
    fn measure_valuation_examples() {
        let m = measure_valuation(2, &exps(&[1])).unwrap();
        assert_eq!(m.value, Rat::new(1, 4).unwrap());
        assert!(m.is_exact());
        // Oracle: count residues mod 8 with v2 = 1.
        assert_eq!(m.value, valuation_density_oracle(2, &[1], 3));

        let m = measure_valuation(2, &exps(&[])).unwrap();
        assert_eq!(m.value, Rat::ZERO);
        assert!(m.is_exact());

        let m = measure_valuation(2, &ExponentSet::all(30)).unwrap();
        let half = Rat::new(1, 2).unwrap();
        assert!(m.value <= half);
        assert!(m.value.add(&m.tail).unwrap() >= half);
        assert!(!m.is_exact());
    }

    #[test]
    fn measure_multi_examples() {
        let m = measure_multi(&[(2, exps(&[1])), (3, exps(&[1]))]).unwrap();
        assert_eq!(m.value, Rat::new(1, 18).unwrap());
        assert!(m.is_exact());
        // Oracle: residues mod 36 with v2 = 1 and v3 = 1.
        let hits: Vec<u64> = (1..=36)
            .filter(|&n| valuation(n, 2).unwrap() == 1 && valuation(n, 3).unwrap() == 1)
            .collect();
        assert_eq!(hits, vec![6, 30]);
        assert_eq!(m.value, Rat::new(2, 36).unwrap());

        let single = measure_multi(&[(2, exps(&[1]))]).unwrap();
        assert_eq!(single, measure_valuation(2, &exps(&[1])).unwrap());

        let empty = measure_multi(&[(2, exps(&[1])), (3, exps(&[]))]).unwrap();
        assert_eq!(empty.value, Rat::ZERO);
        assert!(empty.is_exact());
    }

    #[test]
    fn measure_multi_rejects_bad_primes() {
        assert!(measure_multi(&[(3, exps(&[1])), (2, exps(&[1]))]).is_err());
        assert!(measure_multi(&[(2, exps(&[1])), (2, exps(&[2]))]).is_err());
    }

    /// Oracle: enumerate witnesses directly. A residue x with v_p(x) < a
    /// witnesses itself; residue 0 is witnessed by p^e for the smallest
    /// admissible e >= a, so scanning up to max(p^a, p^emax) is complete.
    fn residues_oracle(p: u64, list: &[u32], a: u32) -> u64 {
        let pa = p.pow(a);
        let emax = list.iter().copied().max().unwrap_or(0);
        let bound = pa.max(p.pow(emax));
        let mut seen = std::collections::BTreeSet::new();
        for n in 1..=bound {
            if list.contains(&valuation(n, p).unwrap()) {
                seen.insert(n % pa);
            }
        }
        seen.len() as u64
    }

    #[test]
    fn residues_valuation_examples() {
        assert_eq!(residues_valuation(2, &exps(&[1]), 3).unwrap(), 2);
        assert_eq!(residues_valuation(2, &exps(&[5]), 3).unwrap(), 1);
        assert_eq!(residues_valuation(3, &exps(&[1, 2]), 1).unwrap(), 1);
    }

    #[test]
    fn residues_valuation_matches_enumeration() {
        for p in [2u64, 3, 5] {
            for a in 1..=4u32 {
                for list in [vec![], vec![1], vec![2], vec![1, 3], vec![2, 4], vec![1, 2, 5]] {
                    let got = residues_valuation(p, &exps(&list), a).unwrap();
                    assert_eq!(got, residues_oracle(p, &list, a), "p={p} a={a} E={list:?}");
                }
            }
        }
    }

    #[test]
    fn residue_ratio_converges_to_measure() {
        let e = exps(&[1, 3]);
        let m = measure_valuation(2, &e).unwrap().value;
        let mut prev = Rat::ONE;
        for a in 1..=10u32 {
            let r = Rat::new(residues_valuation(2, &e, a).unwrap(), 1u64 << a).unwrap();
            assert!(r <= prev, "non-increasing in a");
            assert!(r >= m);
            prev = r;
        }
        assert_eq!(prev, m); // converged well before a = 10
    }

    #[test]
    fn measure_balpha_examples() {
        let half = measure_balpha(&[true], false).unwrap();
        assert_eq!(half.value, Rat::new(1, 2).unwrap());
        let fe = measure_balpha(&[true, false, true], false).unwrap();
        assert_eq!(fe.value, Rat::new(5, 8).unwrap());
        assert!(fe.is_exact());
        let zero = measure_balpha(&[false], false).unwrap();
        assert_eq!(zero.value, Rat::ZERO);
    }

    #[test]
    fn measure_balpha_reproduces_dyadics() {
        // Every dyadic with digits inside the prefix comes back exactly.
        for num in 1u64..32 {
            let den = 32u64;
            let digits: Vec<bool> = (1..=5).map(|i| num >> (5 - i) & 1 == 1).collect();
            let m = measure_balpha(&digits, false).unwrap();
            assert_eq!(m.value, Rat::new(num, den).unwrap());
        }
    }

    #[test]
    fn scaled_union_examples() {
        // Dyadic decomposition of 5/8.
        let spec = ScaledUnionSpec::balpha(&[true, false, true], false).unwrap();
        let (m, ev) = measure_scaled_union(&spec, 1000).unwrap();
        assert_eq!(m.value, Rat::new(5, 8).unwrap());
        assert!(m.is_exact());
        assert_eq!(ev, CoprimalityEvidence::Structural);

        // Single part: the odds.
        let spec = ScaledUnionSpec::new(vec![1], vec![SetExpr::Odd], false).unwrap();
        let (m, _) = measure_scaled_union(&spec, 1000).unwrap();
        assert_eq!(m.value, Rat::new(1, 2).unwrap());

        // b = (3, 9) with parts avoiding multiples of 3.
        let part = SetExpr::complement(SetExpr::ap(0, 3).unwrap());
        let spec = ScaledUnionSpec::new(vec![3, 9], vec![part.clone(), part], false).unwrap();
        let (m, _) = measure_scaled_union(&spec, 1000).unwrap();
        assert_eq!(m.value, Rat::new(8, 27).unwrap());
    }

    #[test]
    fn scaled_union_hypothesis_failures() {
        // Broken chain.
        assert!(ScaledUnionSpec::new(vec![2, 3], vec![SetExpr::Odd, SetExpr::Odd], false).is_err());
        // Elements not coprime to the scale.
        let spec = ScaledUnionSpec::new(vec![2], vec![SetExpr::ap(0, 2).unwrap()], false).unwrap();
        let (_, witness) = spec.coprimality_witness(100).unwrap();
        assert!(witness.is_some());
        assert!(measure_scaled_union(&spec, 100).is_err());
    }
}
