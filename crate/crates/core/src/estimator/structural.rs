//! Exact attained-residue computation.
//!
//! A supported expression is normalized into a union of *atoms*. An atom
//! denotes `scale * (P  ∩  {n : v_p(n) in C_p for each p}  ∩  T_t)` where
//! `P` is periodic, the `C_p` are per-prime exponent conditions and
//! `T_t = { t * w^2 }` is the squarefree-twisted square family
//! (`t = 1` gives the perfect squares). This shape is closed under
//! scaling, union and intersection, so the residues a supported set
//! attains modulo m can be computed exactly — no sampling involved.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::bits::Bits;
use crate::error::{Error, Result};
use crate::expr::SetExpr;
use crate::measure::{ExpKind, ExponentSet, Measure};
use crate::periodic::{check_period, PeriodicSet, DEFAULT_PERIOD_LIMIT};
use crate::rational::Rat;
use crate::residue::{factorize, gcd, lcm_checked, mul_mod, pow_checked, valuation_raw};

/// Per-prime exponent condition; unlike the public exponent sets these may
/// admit 0 (they arise from shifting under preimages of scaling).
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum ExpCond {
    Explicit(Vec<u32>),
    Progression { start: u32, step: u32 },
}

impl ExpCond {
    fn from_exps(e: &ExponentSet) -> ExpCond {
        match e.kind() {
            ExpKind::Explicit(v) => ExpCond::Explicit(v.clone()),
            ExpKind::Progression { start, step } => ExpCond::Progression {
                start: *start,
                step: *step,
            },
        }
    }

    fn is_empty(&self) -> bool {
        matches!(self, ExpCond::Explicit(v) if v.is_empty())
    }

    fn contains(&self, e: u32) -> bool {
        match self {
            ExpCond::Explicit(v) => v.binary_search(&e).is_ok(),
            ExpCond::Progression { start, step } => e >= *start && (e - start) % step == 0,
        }
    }

    fn has_geq(&self, x: u32) -> bool {
        match self {
            ExpCond::Explicit(v) => v.last().is_some_and(|&e| e >= x),
            ExpCond::Progression { .. } => true,
        }
    }

    /// Some admissible exponent e >= min with e = parity (mod 2)?
    fn has_geq_parity(&self, min: u32, parity: u32) -> bool {
        match self {
            ExpCond::Explicit(v) => v.iter().any(|&e| e >= min && e % 2 == parity),
            ExpCond::Progression { start, step } => {
                if step % 2 == 1 {
                    true
                } else {
                    start % 2 == parity % 2
                }
            }
        }
    }

    /// Condition on v(y) given the condition on v(c*y) with v(c) = k.
    fn shift_down(&self, k: u32) -> ExpCond {
        match self {
            ExpCond::Explicit(v) => {
                ExpCond::Explicit(v.iter().filter(|&&e| e >= k).map(|&e| e - k).collect())
            }
            ExpCond::Progression { start, step } => {
                if *start >= k {
                    ExpCond::Progression {
                        start: start - k,
                        step: *step,
                    }
                } else {
                    let rem = (k - start) % step;
                    let first = if rem == 0 { 0 } else { step - rem };
                    ExpCond::Progression {
                        start: first,
                        step: *step,
                    }
                }
            }
        }
    }

    fn intersect(&self, other: &ExpCond) -> ExpCond {
        match (self, other) {
            (ExpCond::Explicit(v), o) => {
                ExpCond::Explicit(v.iter().copied().filter(|&e| o.contains(e)).collect())
            }
            (o @ ExpCond::Progression { .. }, ExpCond::Explicit(v)) => {
                ExpCond::Explicit(v.iter().copied().filter(|&e| o.contains(e)).collect())
            }
            (
                ExpCond::Progression { start: a1, step: d1 },
                ExpCond::Progression { start: a2, step: d2 },
            ) => match progression_intersect(*a1, *d1, *a2, *d2) {
                Some((start, step)) => ExpCond::Progression { start, step },
                None => ExpCond::Explicit(Vec::new()),
            },
        }
    }
}

/// Intersection of two progressions via the usual congruence solve.
/// Components saturate at u32::MAX; queried exponents never exceed 64, so
/// a saturated start simply means "nothing small enough to matter".
fn progression_intersect(a1: u32, d1: u32, a2: u32, d2: u32) -> Option<(u32, u32)> {
    let (a1, d1, a2, d2) = (a1 as i128, d1 as i128, a2 as i128, d2 as i128);
    let (g, s, _) = egcd(d1, d2);
    if (a2 - a1) % g != 0 {
        return None;
    }
    let l = d1 / g * d2;
    let m2 = d2 / g;
    // d1*s + d2*y = g, so (d1/g)*s = 1 (mod d2/g).
    let t = (((a2 - a1) / g % m2) * (s % m2) % m2 + m2) % m2;
    let x0 = a1 + d1 * t;
    let lo = a1.max(a2);
    let x = if x0 >= lo {
        x0 - (x0 - lo) / l * l
    } else {
        x0 + (lo - x0 + l - 1) / l * l
    };
    let start = u32::try_from(x).unwrap_or(u32::MAX);
    let step = u32::try_from(l).unwrap_or(u32::MAX);
    Some((start, step))
}

fn egcd(a: i128, b: i128) -> (i128, i128, i128) {
    if b == 0 {
        (a, 1, 0)
    } else {
        let (g, x, y) = egcd(b, a % b);
        (g, y, x - (a / b) * y)
    }
}

/// One conjunction in the normal form; denotes
/// scale * (periodic ∩ valuation constraints ∩ twisted squares).
#[derive(Clone, Debug)]
pub(crate) struct Atom {
    scale: u64,
    periodic: Option<PeriodicSet>,
    vals: BTreeMap<u64, ExpCond>,
    /// `Some(t)`: elements are t * w^2 with t squarefree.
    twist: Option<u64>,
}

impl Atom {
    fn top() -> Atom {
        Atom {
            scale: 1,
            periodic: None,
            vals: BTreeMap::new(),
            twist: None,
        }
    }

    fn periodic(ps: PeriodicSet) -> Atom {
        Atom {
            periodic: Some(ps),
            ..Atom::top()
        }
    }

    /// Emptiness provable without enumeration.
    fn symbolic_empty(&self) -> bool {
        if self.vals.values().any(|c| c.is_empty()) {
            return true;
        }
        if let Some(ps) = &self.periodic {
            if ps.is_empty_set() {
                return true;
            }
        }
        if let Some(t) = self.twist {
            for (&p, cond) in &self.vals {
                let vt = valuation_raw(t, p);
                // Achievable valuations are vt + 2s, s >= 0.
                if !cond.has_geq_parity(vt, vt % 2) {
                    return true;
                }
            }
        }
        false
    }

    fn is_pure_valuation(&self) -> bool {
        self.periodic.is_none() && self.twist.is_none() && !self.vals.is_empty()
    }
}

/// Normalize into a union of atoms; errors with `Unsupported` for node
/// kinds without exact residue structure.
pub(crate) fn normalize(expr: &SetExpr) -> Result<Vec<Atom>> {
    match expr {
        SetExpr::All => Ok(vec![Atom::top()]),
        SetExpr::Empty => Ok(Vec::new()),
        SetExpr::Odd => Ok(vec![Atom::periodic(PeriodicSet::odd())]),
        SetExpr::Ap(c) => Ok(vec![Atom::periodic(PeriodicSet::from_classes(&[*c])?)]),
        SetExpr::Periodic(p) => Ok(vec![Atom::periodic(p.clone())]),
        SetExpr::Valuation { p, exps } => Ok(vec![Atom {
            vals: BTreeMap::from([(*p, ExpCond::from_exps(exps))]),
            ..Atom::top()
        }]),
        SetExpr::MultiValuation { parts } => Ok(vec![Atom {
            vals: parts
                .iter()
                .map(|(p, e)| (*p, ExpCond::from_exps(e)))
                .collect(),
            ..Atom::top()
        }]),
        SetExpr::BAlpha { .. } => {
            let ps = expr
                .try_to_periodic()?
                .expect("dyadic prefixes are periodic");
            Ok(vec![Atom::periodic(ps)])
        }
        SetExpr::Squares => Ok(vec![Atom {
            twist: Some(1),
            ..Atom::top()
        }]),
        SetExpr::PtMax { .. } | SetExpr::RtMax { .. } | SetExpr::TauDivides => Err(
            Error::Unsupported(format!("{expr} has no exact residue structure")),
        ),
        SetExpr::Scale { factor, inner } => {
            let mut atoms = normalize(inner)?;
            for a in &mut atoms {
                a.scale = a
                    .scale
                    .checked_mul(*factor)
                    .ok_or(Error::Overflow("atom scale"))?;
            }
            Ok(atoms)
        }
        SetExpr::Union(parts) => {
            let mut out = Vec::new();
            for p in parts {
                out.extend(normalize(p)?);
            }
            Ok(out)
        }
        SetExpr::Intersect(parts) => {
            let mut acc = vec![Atom::top()];
            for p in parts {
                let rhs = normalize(p)?;
                let mut next = Vec::new();
                for a in &acc {
                    for b in &rhs {
                        if let Some(c) = atom_intersect(a, b)? {
                            next.push(c);
                        }
                    }
                }
                acc = next;
            }
            Ok(acc)
        }
        SetExpr::Complement(inner) => match inner.try_to_periodic()? {
            Some(ps) => Ok(vec![Atom::periodic(ps.complement())]),
            None => Err(Error::Unsupported(
                "complement of a non-periodic set".into(),
            )),
        },
    }
}

pub(crate) fn supports_exact(expr: &SetExpr) -> bool {
    match normalize(expr) {
        Ok(_) => true,
        Err(Error::Unsupported(_)) => false,
        // Overflow-style failures are a resource issue, not a structural
        // one, but there is still no exact path to offer.
        Err(_) => false,
    }
}

/// Preimage of the atom body under multiplication by `c`, i.e. conditions
/// on y such that c*y satisfies the body.
fn body_preimage(atom: &Atom, c: u64) -> Result<Atom> {
    let mut out = Atom::top();
    if let Some(ps) = &atom.periodic {
        out.periodic = Some(ps.unscale(c)?);
    }
    let cf = factorize(c);
    for (&p, cond) in &atom.vals {
        let k = cf
            .iter()
            .find(|(q, _)| *q == p)
            .map(|(_, e)| *e)
            .unwrap_or(0);
        out.vals.insert(p, cond.shift_down(k));
    }
    if let Some(t) = atom.twist {
        out.twist = Some(squarefree_mul(c, t)?);
    }
    Ok(out)
}

/// Squarefree part of c*t without forming the product.
fn squarefree_mul(c: u64, t: u64) -> Result<u64> {
    let mut primes: BTreeMap<u64, u32> = BTreeMap::new();
    for (p, e) in factorize(c).into_iter().chain(factorize(t)) {
        *primes.entry(p).or_insert(0) += e;
    }
    let mut s: u64 = 1;
    for (p, e) in primes {
        if e % 2 == 1 {
            s = s.checked_mul(p).ok_or(Error::Overflow("squarefree part"))?;
        }
    }
    Ok(s)
}

fn atom_intersect(a: &Atom, b: &Atom) -> Result<Option<Atom>> {
    let l = lcm_checked(a.scale, b.scale)?;
    let pa = body_preimage(a, l / a.scale)?;
    let pb = body_preimage(b, l / b.scale)?;
    let periodic = match (pa.periodic, pb.periodic) {
        (Some(x), Some(y)) => Some(x.intersect(&y)?),
        (Some(x), None) | (None, Some(x)) => Some(x),
        (None, None) => None,
    };
    let mut vals = pa.vals;
    for (p, cond) in pb.vals {
        let merged = match vals.get(&p) {
            Some(existing) => existing.intersect(&cond),
            None => cond,
        };
        vals.insert(p, merged);
    }
    let twist = match (pa.twist, pb.twist) {
        (Some(x), Some(y)) if x != y => return Ok(None), // distinct squarefree parts
        (Some(x), _) => Some(x),
        (None, y) => y,
    };
    Ok(Some(Atom {
        scale: l,
        periodic,
        vals,
        twist,
    }))
}

/// Mark `f(n)` for n in [0, span); parallel for large spans.
fn mark_range<F>(span: u64, m: u64, f: F) -> Bits
where
    F: Fn(u64) -> Option<u64> + Sync,
{
    const PAR_THRESHOLD: u64 = 1 << 21;
    const CHUNK: u64 = 1 << 18;
    if span < PAR_THRESHOLD {
        let mut bits = Bits::new(m as usize);
        for n in 0..span {
            if let Some(r) = f(n) {
                bits.set(r as usize);
            }
        }
        return bits;
    }
    let chunks = (span + CHUNK - 1) / CHUNK;
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut bits = Bits::new(m as usize);
            let lo = c * CHUNK;
            let hi = (lo + CHUNK).min(span);
            for n in lo..hi {
                if let Some(r) = f(n) {
                    bits.set(r as usize);
                }
            }
            bits
        })
        .reduce(
            || Bits::new(m as usize),
            |mut x, y| {
                x.or_assign(&y);
                x
            },
        )
}

/// Exact residues attained by the (unscaled) atom body modulo m.
fn body_attained(atom: &Atom, m: u64, limit: u64) -> Result<Bits> {
    check_period(m, limit)?;
    if atom.symbolic_empty() {
        return Ok(Bits::new(m as usize));
    }
    // Fast paths.
    if atom.twist.is_none() && atom.vals.is_empty() {
        return match &atom.periodic {
            Some(ps) => ps.residue_bits(m, limit),
            None => {
                let mut bits = Bits::new(m as usize);
                bits.invert();
                Ok(bits)
            }
        };
    }

    let lp = atom.periodic.as_ref().map_or(1, |p| p.period());
    let base = lcm_checked(m, lp)?;
    let mut span = base;
    // One extra factor of each constrained prime: classes divisible by
    // p^(v_p(span)) then stand for "valuation at least that", and any
    // larger valuation has a witness in the class.
    let mut caps: Vec<(u64, u32, u64)> = Vec::new(); // (p, cap, p^cap)
    for &p in atom.vals.keys() {
        let a = valuation_raw(base, p);
        let cap = a + 1;
        span = span
            .checked_mul(p)
            .ok_or(Error::Overflow("enumeration span"))?;
        caps.push((p, cap, pow_checked(p, cap)?));
    }
    check_period(span, limit)?;

    let vals: Vec<(&u64, &ExpCond)> = atom.vals.iter().collect();
    match atom.twist {
        None => {
            let f = |n: u64| -> Option<u64> {
                if let Some(ps) = &atom.periodic {
                    if !ps.contains_residue(n % lp) {
                        return None;
                    }
                }
                for ((_, cond), &(p, cap, pe)) in vals.iter().zip(&caps) {
                    let r = n % pe;
                    if r == 0 {
                        if !cond.has_geq(cap) {
                            return None;
                        }
                    } else if !cond.contains(valuation_raw(r, p)) {
                        return None;
                    }
                }
                Some(n % m)
            };
            Ok(mark_range(span, m, f))
        }
        Some(t) => {
            let t_m = t % m;
            let t_lp = t % lp;
            let tw_vals: Vec<u32> = caps.iter().map(|&(p, _, _)| valuation_raw(t, p)).collect();
            let f = |w: u64| -> Option<u64> {
                if let Some(ps) = &atom.periodic {
                    let x_lp = mul_mod(t_lp, mul_mod(w % lp, w % lp, lp), lp);
                    if !ps.contains_residue(x_lp) {
                        return None;
                    }
                }
                for (((_, cond), &(p, cap, pe)), &vt) in vals.iter().zip(&caps).zip(&tw_vals) {
                    let r = w % pe;
                    if r == 0 {
                        if !cond.has_geq_parity(vt + 2 * cap, vt % 2) {
                            return None;
                        }
                    } else if !cond.contains(vt + 2 * valuation_raw(r, p)) {
                        return None;
                    }
                }
                Some(mul_mod(t_m, mul_mod(w % m, w % m, m), m))
            };
            Ok(mark_range(span, m, f))
        }
    }
}

fn atom_attained(atom: &Atom, m: u64, limit: u64) -> Result<Bits> {
    let g = gcd(atom.scale, m);
    let inner_m = m / g;
    let inner = body_attained(atom, inner_m, limit)?;
    if atom.scale == 1 {
        return Ok(inner);
    }
    let mut out = Bits::new(m as usize);
    let s = atom.scale % m;
    for x in inner.ones() {
        out.set(mul_mod(s, x as u64, m) as usize);
    }
    Ok(out)
}

/// Exact attained-residue bit vector of a supported expression modulo m.
pub(crate) fn attained(expr: &SetExpr, m: u64, limit: u64) -> Result<Bits> {
    check_period(m, limit)?;
    let atoms = normalize(expr)?;
    let mut bits = Bits::new(m as usize);
    for atom in &atoms {
        bits.or_assign(&atom_attained(atom, m, limit)?);
    }
    Ok(bits)
}

/// Block count for a single exponent condition modulo q^e.
fn residues_for_cond(q: u64, cond: &ExpCond, e: u32) -> Result<u64> {
    let mut count: u64 = 0;
    for v in 0..e {
        if cond.contains(v) {
            let block = pow_checked(q, e - v - 1)?
                .checked_mul(q - 1)
                .ok_or(Error::Overflow("residue count"))?;
            count = count
                .checked_add(block)
                .ok_or(Error::Overflow("residue count"))?;
        }
    }
    if cond.has_geq(e) {
        count += 1;
    }
    Ok(count)
}

/// Exact R(S : m). For a single pure-valuation atom the count is a product
/// over the prime powers of m — the coordinates are independent — and no
/// bit vector is built; everything else counts the attained sieve.
pub(crate) fn count_exact(expr: &SetExpr, m: u64) -> Result<u64> {
    check_period(m, DEFAULT_PERIOD_LIMIT)?;
    let atoms = normalize(expr)?;
    let live: Vec<&Atom> = atoms.iter().filter(|a| !a.symbolic_empty()).collect();
    if live.is_empty() {
        return Ok(0);
    }
    if live.len() == 1 && live[0].is_pure_valuation() {
        let atom = live[0];
        // Scaling by a is injective on residues mod m/gcd(a, m).
        let mm = m / gcd(atom.scale, m);
        let mut count: u64 = 1;
        for (q, e) in factorize(mm) {
            let factor = match atom.vals.get(&q) {
                Some(cond) => residues_for_cond(q, cond, e)?,
                None => pow_checked(q, e)?,
            };
            count = count
                .checked_mul(factor)
                .ok_or(Error::Overflow("residue count"))?;
        }
        return Ok(count);
    }
    Ok(attained(expr, m, DEFAULT_PERIOD_LIMIT)?.count_ones())
}

/// Atom measure where a closed form exists.
fn atom_measure(atom: &Atom) -> Result<Option<Measure>> {
    if atom.twist.is_some() {
        return Ok(None);
    }
    match (&atom.periodic, atom.vals.is_empty()) {
        (None, true) => Ok(Some(Measure::exact(Rat::new(1, atom.scale)?))),
        (Some(ps), true) => Ok(Some(Measure::exact(ps.density().div_int(atom.scale)?))),
        (None, false) => {
            let mut value = Rat::ONE;
            let mut upper = Rat::ONE;
            for (&p, cond) in &atom.vals {
                let (v, t) = cond_measure(p, cond)?;
                value = value.mul(&v)?;
                upper = upper.mul(&v.add(&t)?)?;
            }
            Ok(Some(Measure {
                value: value.div_int(atom.scale)?,
                tail: upper.sub(&value)?.div_int(atom.scale)?,
            }))
        }
        (Some(_), false) => Ok(None),
    }
}

/// (1 - 1/p) * sum over the condition of p^-e, with a geometric tail for
/// progressions. Conditions may include e = 0.
fn cond_measure(p: u64, cond: &ExpCond) -> Result<(Rat, Rat)> {
    let factor = Rat::new(p - 1, p)?;
    match cond {
        ExpCond::Explicit(v) => {
            let mut sum = Rat::ZERO;
            for &e in v {
                sum = sum.add(&Rat::new(1, pow_checked(p, e)?)?)?;
            }
            Ok((factor.mul(&sum)?, Rat::ZERO))
        }
        ExpCond::Progression { start, step } => {
            // Sum every term whose power still fits in 64 bits; the rest
            // is covered by the geometric tail bound p^-last.
            let mut sum = Rat::ZERO;
            let mut last = *start;
            let mut e = *start as u64;
            while e <= 63 {
                match pow_checked(p, e as u32) {
                    Ok(pe) => {
                        sum = sum.add(&Rat::new(1, pe)?)?;
                        last = e as u32;
                        e += *step as u64;
                    }
                    Err(_) => break,
                }
            }
            let tail = Rat::new(1, pow_checked(p, last)?)?;
            Ok((factor.mul(&sum)?, tail))
        }
    }
}

/// Exact measure from the atom normal form: empties are zero, a single
/// closed-form atom is evaluated, anything else yields `None`.
pub(crate) fn atoms_measure(expr: &SetExpr) -> Result<Option<Measure>> {
    let atoms = match normalize(expr) {
        Ok(a) => a,
        Err(Error::Unsupported(_)) => return Ok(None),
        Err(e) => return Err(e),
    };
    let mut live = Vec::new();
    for atom in atoms {
        if !proven_empty_atom(&atom)? {
            live.push(atom);
        }
    }
    match live.len() {
        0 => Ok(Some(Measure::exact(Rat::ZERO))),
        1 => atom_measure(&live[0]),
        _ => Ok(None),
    }
}

/// Emptiness cap: mixed atoms are enumerated only up to this span.
const EMPTINESS_SPAN_CAP: u64 = 1 << 22;

fn proven_empty_atom(atom: &Atom) -> Result<bool> {
    if atom.symbolic_empty() {
        return Ok(true);
    }
    // Without a periodic component the symbolic screen is complete: a
    // witness can be assembled prime by prime.
    if atom.periodic.is_none() {
        return Ok(false);
    }
    match body_attained(atom, 1, EMPTINESS_SPAN_CAP) {
        Ok(bits) => Ok(bits.count_ones() == 0),
        Err(Error::PeriodLimit { .. }) => Ok(false), // not proven
        Err(e) => Err(e),
    }
}

/// True when the expression provably denotes the empty set.
pub(crate) fn proven_empty(expr: &SetExpr) -> Result<bool> {
    let atoms = normalize(expr)?;
    for atom in atoms {
        if !proven_empty_atom(&atom)? {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_expr;

    fn expr(t: &str) -> SetExpr {
        parse_expr(t).unwrap()
    }

    /// Oracle: witnesses by brute scan. Only valid when every attainable
    /// residue has a witness within the scan bound.
    fn window_oracle(e: &SetExpr, m: u64, w: u64) -> Vec<u64> {
        let mut seen = vec![false; m as usize];
        for n in 1..=w {
            if e.contains(n) {
                seen[(n % m) as usize] = true;
            }
        }
        seen.iter()
            .enumerate()
            .filter(|(_, &s)| s)
            .map(|(i, _)| i as u64)
            .collect()
    }

    fn attained_vec(e: &SetExpr, m: u64) -> Vec<u64> {
        attained(e, m, DEFAULT_PERIOD_LIMIT)
            .unwrap()
            .ones()
            .map(|i| i as u64)
            .collect()
    }

    #[test]
    fn periodic_and_valuation_atoms() {
        assert_eq!(attained_vec(&expr("odd"), 6), vec![1, 3, 5]);
        assert_eq!(attained_vec(&expr("val(2,{1})"), 8), vec![2, 6]);
        assert_eq!(attained_vec(&expr("scale(4,odd)"), 8), vec![4]);
        assert_eq!(count_exact(&expr("val(2,{1})"), 8).unwrap(), 2);
    }

    #[test]
    fn squares_residues_match_enumeration() {
        for m in [4u64, 9, 12, 60, 210] {
            let got = attained_vec(&expr("squares"), m);
            let want: std::collections::BTreeSet<u64> = (0..m).map(|n| n * n % m).collect();
            assert_eq!(got, want.into_iter().collect::<Vec<_>>(), "m = {m}");
        }
        assert_eq!(count_exact(&expr("squares"), 60).unwrap(), 12);
    }

    #[test]
    fn intersections_of_mixed_structure() {
        // Squares with valuation-1 slice are empty.
        let s = expr("inter(squares,val(2,{1}))");
        assert_eq!(count_exact(&s, 16).unwrap(), 0);
        assert!(proven_empty(&s).unwrap());

        // Odd squares mod 8 are exactly {1}.
        let s = expr("inter(squares,odd)");
        assert_eq!(attained_vec(&s, 8), vec![1]);

        // Squares with v2 = 2: residues 4 * (odd square) mod 32 = {4, 20}.
        let s = expr("inter(squares,val(2,{2}))");
        assert_eq!(attained_vec(&s, 32), window_oracle(&s, 32, 100_000));
    }

    #[test]
    fn scaled_intersections() {
        // 2 * squares intersected with odd numbers: empty.
        let s = expr("inter(scale(2,squares),odd)");
        assert!(proven_empty(&s).unwrap());

        // 2 * squares is the twist family t = 2.
        let s = expr("scale(2,squares)");
        assert_eq!(attained_vec(&s, 16), window_oracle(&s, 16, 1 << 14));

        // 3 * squares meets squares only where both parametrizations agree;
        // 3w^2 = v^2 has no solutions, so the intersection is empty.
        let s = expr("inter(scale(3,squares),squares)");
        assert!(proven_empty(&s).unwrap());
    }

    #[test]
    fn attained_agrees_with_window_scan() {
        // Every attainable residue of these sets has a small witness, so a
        // window scan is a complete oracle.
        for (text, m, w) in [
            ("union(odd,squares)", 24u64, 1u64 << 14),
            ("inter(val(2,{1,3}),val(3,{1}))", 72, 1 << 16),
            ("val(2,ap(1,2),8)", 64, 1 << 16),
            ("inter(balpha(101,3),val(3,{1}))", 36, 1 << 14),
            ("comp(ap(0,3))", 9, 100),
            ("scale(6,val(5,{1}))", 150, 1 << 16),
            ("inter(squares,ap(1,3))", 36, 1 << 16),
        ] {
            let e = expr(text);
            assert_eq!(
                attained_vec(&e, m),
                window_oracle(&e, m, w),
                "set {text} mod {m}"
            );
        }
    }

    #[test]
    fn multivaluation_count_is_crt_product() {
        let e = expr("mval((2,{1}),(3,{1}))");
        // 36 = 4 * 9: one block each.
        assert_eq!(count_exact(&e, 36).unwrap(), 2);
        assert_eq!(attained_vec(&e, 36), vec![6, 30]);
        // Counts multiply across coprime moduli.
        let c12 = count_exact(&e, 12).unwrap();
        let c4 = count_exact(&e, 4).unwrap();
        let c3 = count_exact(&e, 3).unwrap();
        assert_eq!(c12, c4 * c3);
    }

    #[test]
    fn unsupported_structures_refused() {
        for text in ["taudiv", "pt(1)", "rt(1;default)", "comp(squares)"] {
            assert!(!expr(text).has_exact_residues(), "{text}");
            assert!(matches!(
                count_exact(&expr(text), 10),
                Err(Error::Unsupported(_))
            ));
        }
        // Complement of a periodic node stays exact.
        assert!(expr("comp(ap(0,3))").has_exact_residues());
    }

    #[test]
    fn atoms_agree_with_periodic_route() {
        // For periodic-convertible expressions the attained residues are
        // computable two independent ways: through the membership table
        // over one period, and through the atom normal form. They must
        // coincide bit for bit.
        let texts = [
            "odd",
            "ap(3,7)",
            "val(2,{1,3})",
            "mval((2,{2}),(5,{1}))",
            "balpha(1101,4)",
            "val(3,ap(1,1),5)",
            "scale(6,union(odd,ap(0,4)))",
            "inter(comp(ap(0,3)),val(2,{1}))",
            "union(scale(2,odd),scale(3,val(2,{1})))",
            "comp(union(odd,ap(0,4)))",
        ];
        for text in texts {
            let e = expr(text);
            let ps = e
                .try_to_periodic()
                .unwrap()
                .unwrap_or_else(|| panic!("{text} should be periodic"));
            for m in [1u64, 2, 5, 8, 12, 36, 90] {
                let via_atoms = attained(&e, m, DEFAULT_PERIOD_LIMIT).unwrap();
                let via_period = ps.residue_bits(m, DEFAULT_PERIOD_LIMIT).unwrap();
                assert_eq!(
                    via_atoms.ones().collect::<Vec<_>>(),
                    via_period.ones().collect::<Vec<_>>(),
                    "{text} mod {m}"
                );
                assert_eq!(
                    count_exact(&e, m).unwrap(),
                    via_period.count_ones(),
                    "{text} count mod {m}"
                );
            }
        }
    }

    #[test]
    fn window_scan_never_exceeds_structural() {
        // For arbitrary supported sets the witness scan is a sound lower
        // bound on the attained set at every window size.
        let texts = [
            "squares",
            "inter(squares,comp(ap(0,3)))",
            "scale(2,squares)",
            "val(5,ap(1,2),6)",
            "inter(val(2,ap(1,2),6),odd)",
            "union(squares,val(3,ap(2,2),6))",
        ];
        for text in texts {
            let e = expr(text);
            for m in [6u64, 16, 45] {
                let exact = attained(&e, m, DEFAULT_PERIOD_LIMIT).unwrap();
                for w in [100u64, 5000, 1 << 16] {
                    let mut seen = Bits::new(m as usize);
                    for n in 1..=w {
                        if e.contains(n) {
                            seen.set((n % m) as usize);
                        }
                    }
                    assert!(
                        seen.subset_of(&exact),
                        "{text} mod {m}: window {w} found a residue the exact path missed"
                    );
                }
            }
        }
    }

    #[test]
    fn randomized_expressions_cross_validate() {
        let mut state = 0x5EED_CAFE_u64;
        let mut rng = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state
        };

        fn gen(rng: &mut impl FnMut() -> u64, depth: u32) -> SetExpr {
            if depth == 0 {
                match rng() % 6 {
                    0 => SetExpr::Odd,
                    1 => SetExpr::ap(rng() % 6, rng() % 6 + 1).unwrap(),
                    2 => {
                        let list: Vec<u32> = (1..=4).filter(|_| rng() % 2 == 0).collect();
                        SetExpr::valuation(2, ExponentSet::explicit(list).unwrap()).unwrap()
                    }
                    3 => SetExpr::Squares,
                    4 => SetExpr::valuation(
                        3,
                        ExponentSet::progression((rng() % 3 + 1) as u32, (rng() % 3 + 1) as u32, 5)
                            .unwrap(),
                    )
                    .unwrap(),
                    _ => SetExpr::All,
                }
            } else {
                let d = depth - 1;
                match rng() % 4 {
                    0 => SetExpr::scale(rng() % 8 + 1, gen(rng, d)).unwrap(),
                    1 => SetExpr::union(vec![gen(rng, d), gen(rng, d)]),
                    2 => SetExpr::intersect(vec![gen(rng, d), gen(rng, d)]),
                    _ => gen(rng, d),
                }
            }
        }

        let mut checked = 0;
        for _ in 0..120 {
            let e = gen(&mut rng, 2);
            let m = rng() % 60 + 1;
            let exact = match attained(&e, m, DEFAULT_PERIOD_LIMIT) {
                Ok(bits) => bits,
                // Oversized enumeration spans are a resource refusal, not
                // a wrong answer.
                Err(Error::PeriodLimit { .. }) | Err(Error::Overflow(_)) => continue,
                Err(e) => panic!("unexpected error {e:?}"),
            };
            // Route 1: the membership table over one period, when the
            // expression is periodic-representable.
            match e.try_to_periodic() {
                Ok(Some(ps)) => {
                    let via_period = ps.residue_bits(m, DEFAULT_PERIOD_LIMIT).unwrap();
                    assert_eq!(
                        exact.ones().collect::<Vec<_>>(),
                        via_period.ones().collect::<Vec<_>>(),
                        "{e} mod {m}"
                    );
                }
                Ok(None) => {}
                Err(_) => {}
            }
            // Route 2: every scanned witness lands in the exact set.
            let mut seen = Bits::new(m as usize);
            for n in 1..=1u64 << 14 {
                if e.contains(n) {
                    seen.set((n % m) as usize);
                }
            }
            assert!(seen.subset_of(&exact), "witness escaped for {e} mod {m}");
            checked += 1;
        }
        assert!(checked >= 100, "only {checked} instances were checkable");
    }

    #[test]
    fn progression_intersection_cases() {
        let a = ExpCond::Progression { start: 1, step: 2 };
        let b = ExpCond::Progression { start: 3, step: 4 };
        let i = a.intersect(&b);
        for e in 0..50 {
            assert_eq!(i.contains(e), a.contains(e) && b.contains(e), "e = {e}");
        }
        let c = ExpCond::Progression { start: 2, step: 4 };
        let j = a.intersect(&c);
        for e in 0..50 {
            assert!(!j.contains(e));
        }
    }

    #[test]
    fn shift_down_matches_semantics() {
        for cond in [
            ExpCond::Explicit(vec![1, 3, 4]),
            ExpCond::Progression { start: 2, step: 3 },
        ] {
            for k in 0..6u32 {
                let shifted = cond.shift_down(k);
                for v in 0..40u32 {
                    assert_eq!(
                        shifted.contains(v),
                        cond.contains(v + k),
                        "cond {cond:?} k {k} v {v}"
                    );
                }
            }
        }
    }
}
