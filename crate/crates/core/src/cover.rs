//! Covers by residue classes. The measure density of a set is the
//! infimum of the weights sum(1/m_i) over finite covers by classes
//! r_i + (m_i); for periodic targets and a modulus cap M the restricted
//! infimum is computed exactly.

use crate::bits::Bits;
use crate::error::{Error, Result};
use crate::estimator::structural;
use crate::expr::SetExpr;
use crate::periodic::{check_period, PeriodicSet, DEFAULT_PERIOD_LIMIT};
use crate::rational::Rat;
use crate::residue::{lcm_checked, lcm_upto, ResidueClass};

/// How a certificate's coverage claim was established.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CoverStatus {
    /// Coverage verified exactly over the structural residues.
    Proved,
    /// Coverage verified for all members up to the window.
    WindowChecked(u64),
}

#[derive(Clone, Debug)]
pub struct CoverCertificate {
    pub classes: Vec<ResidueClass>,
    /// sum of 1/m_i in lowest terms.
    pub weight: Rat,
    pub status: CoverStatus,
}

fn certificate(classes: Vec<ResidueClass>, status: CoverStatus) -> Result<CoverCertificate> {
    let mut weight = Rat::ZERO;
    for c in &classes {
        weight = weight.add(&Rat::new(1, c.modulus())?)?;
    }
    Ok(CoverCertificate {
        classes,
        weight,
        status,
    })
}

#[derive(Clone, Debug)]
pub struct CoverResult {
    pub value: Rat,
    pub certificate: CoverCertificate,
    /// False only when the node budget ran out before the search closed.
    pub optimal: bool,
    pub nodes: u64,
    pub max_modulus: u64,
}

pub const DEFAULT_NODE_BUDGET: u64 = 10_000_000;

/// Exact minimum of sum(1/m_i) over covers of the periodic set by classes
/// with moduli <= max_modulus.
///
/// Every class of modulus m covers at most a 1/m share of density, so no
/// cover can weigh less than the density of what it covers. When
/// max_modulus >= period, the member-class cover attains that bound and is
/// optimal outright. Otherwise a branch-and-bound search runs over the
/// common refinement lcm(period, lcm(1..M)).
pub fn infimum_cover(
    s: &PeriodicSet,
    max_modulus: u64,
    node_budget: Option<u64>,
) -> Result<CoverResult> {
    if max_modulus == 0 {
        return Err(Error::Invalid("max modulus must be >= 1".into()));
    }
    let s = s.canonical();
    if s.is_empty_set() {
        return Ok(CoverResult {
            value: Rat::ZERO,
            certificate: certificate(Vec::new(), CoverStatus::Proved)?,
            optimal: true,
            nodes: 0,
            max_modulus,
        });
    }
    if max_modulus >= s.period() {
        let classes: Vec<ResidueClass> = s
            .member_residues()
            .map(|r| ResidueClass::new(r, s.period()))
            .collect::<Result<_>>()?;
        let cert = certificate(classes, CoverStatus::Proved)?;
        debug_assert_eq!(cert.weight, s.density());
        return Ok(CoverResult {
            value: cert.weight,
            certificate: cert,
            optimal: true,
            nodes: 0,
            max_modulus,
        });
    }
    branch_and_bound(&s, max_modulus, node_budget.unwrap_or(DEFAULT_NODE_BUDGET))
}

struct Candidate {
    class: ResidueClass,
    weight: Rat,
    coverage: Bits,
}

struct Search<'a> {
    candidates: &'a [Candidate],
    covering: Vec<Vec<usize>>, // per universe element, candidate indices
    budget: u64,
    nodes: u64,
    exhausted: bool,
    best_weight: Rat,
    best: Vec<usize>,
    refinement: u64,
}

fn branch_and_bound(s: &PeriodicSet, max_modulus: u64, budget: u64) -> Result<CoverResult> {
    // Universe: member residues over the common refinement of the target
    // period and every candidate modulus.
    let refinement = lcm_checked(s.period(), lcm_upto(max_modulus)?)?;
    check_period(refinement, DEFAULT_PERIOD_LIMIT)?;
    let wide = s.rebase(refinement)?;
    let universe: Vec<u64> = wide.member_residues().collect();

    let mut candidates = Vec::new();
    for m in 1..=max_modulus {
        for r in 0..m {
            let mut coverage = Bits::new(universe.len());
            for (i, &u) in universe.iter().enumerate() {
                if u % m == r {
                    coverage.set(i);
                }
            }
            if coverage.count_ones() > 0 {
                candidates.push(Candidate {
                    class: ResidueClass::new(r, m)?,
                    weight: Rat::new(1, m)?,
                    coverage,
                });
            }
        }
    }

    let mut covering = vec![Vec::new(); universe.len()];
    for (ci, cand) in candidates.iter().enumerate() {
        for i in cand.coverage.ones() {
            covering[i].push(ci);
        }
    }

    // Greedy incumbent: most new coverage per unit weight.
    let mut uncovered = Bits::new(universe.len());
    uncovered.invert();
    let mut greedy = Vec::new();
    while uncovered.count_ones() > 0 {
        let mut best: Option<(usize, u128)> = None;
        for (ci, cand) in candidates.iter().enumerate() {
            let mut new_cov = 0u64;
            for i in cand.coverage.ones() {
                if uncovered.get(i) {
                    new_cov += 1;
                }
            }
            if new_cov == 0 {
                continue;
            }
            // Compare new_cov * m as coverage-per-weight.
            let score = new_cov as u128 * cand.class.modulus() as u128;
            if best.map_or(true, |(_, s)| score > s) {
                best = Some((ci, score));
            }
        }
        let (ci, _) = best.expect("every residue is coverable");
        greedy.push(ci);
        let mut inv = candidates[ci].coverage.clone();
        inv.invert();
        uncovered.and_assign(&inv);
    }
    let mut greedy_weight = Rat::ZERO;
    for &ci in &greedy {
        greedy_weight = greedy_weight.add(&candidates[ci].weight)?;
    }

    let mut search = Search {
        candidates: &candidates,
        covering,
        budget,
        nodes: 0,
        exhausted: false,
        best_weight: greedy_weight,
        best: greedy,
        refinement,
    };
    let mut all = Bits::new(universe.len());
    all.invert();
    let mut chosen = Vec::new();
    search.recurse(&all, Rat::ZERO, &mut chosen)?;

    let classes: Vec<ResidueClass> = search
        .best
        .iter()
        .map(|&ci| candidates[ci].class)
        .collect();
    let cert = certificate(classes, CoverStatus::Proved)?;
    debug_assert!(verify_periodic_cover(s, &cert.classes)?.is_none());
    Ok(CoverResult {
        value: cert.weight,
        certificate: cert,
        optimal: !search.exhausted,
        nodes: search.nodes,
        max_modulus,
    })
}

impl Search<'_> {
    /// Valid lower bound for completing a partial cover: the larger of the
    /// density of the uncovered part and the per-element cheapest-rate sum.
    fn lower_bound(&self, uncovered: &Bits) -> Result<Rat> {
        let count = uncovered.count_ones();
        if count == 0 {
            return Ok(Rat::ZERO);
        }
        let density = Rat::new(count, self.refinement)?;
        let mut rate_sum = Rat::ZERO;
        for i in uncovered.ones() {
            let mut best: Option<Rat> = None;
            for &ci in &self.covering[i] {
                let cand = &self.candidates[ci];
                let mut cov = 0u64;
                for j in cand.coverage.ones() {
                    if uncovered.get(j) {
                        cov += 1;
                    }
                }
                let rate = cand.weight.div_int(cov.max(1))?;
                if best.map_or(true, |b| rate < b) {
                    best = Some(rate);
                }
            }
            rate_sum = rate_sum.add(&best.expect("coverable"))?;
        }
        Ok(if rate_sum > density { rate_sum } else { density })
    }

    fn recurse(&mut self, uncovered: &Bits, weight: Rat, chosen: &mut Vec<usize>) -> Result<()> {
        if uncovered.count_ones() == 0 {
            if weight < self.best_weight {
                self.best_weight = weight;
                self.best = chosen.clone();
            }
            return Ok(());
        }
        if self.nodes >= self.budget {
            self.exhausted = true;
            return Ok(());
        }
        self.nodes += 1;
        let bound = weight.add(&self.lower_bound(uncovered)?)?;
        if bound >= self.best_weight {
            return Ok(());
        }
        // Branch on the uncovered element with the fewest candidates;
        // ties resolve to the first (candidates are ordered by modulus
        // then residue, so the choice is deterministic).
        let mut pick: Option<usize> = None;
        let mut fewest = usize::MAX;
        for i in uncovered.ones() {
            let n = self
                .covering[i]
                .iter()
                .filter(|&&ci| {
                    self.candidates[ci]
                        .coverage
                        .ones()
                        .any(|j| uncovered.get(j))
                })
                .count();
            if n < fewest {
                fewest = n;
                pick = Some(i);
            }
        }
        let element = pick.expect("nonempty uncovered");
        for &ci in &self.covering[element].clone() {
            let cand = &self.candidates[ci];
            let new_weight = weight.add(&cand.weight)?;
            if new_weight >= self.best_weight {
                continue;
            }
            let mut rest = cand.coverage.clone();
            rest.invert();
            rest.and_assign(uncovered);
            chosen.push(ci);
            self.recurse(&rest, new_weight, chosen)?;
            chosen.pop();
            if self.exhausted {
                return Ok(());
            }
        }
        Ok(())
    }
}

/// None when the classes cover the periodic set; otherwise the smallest
/// uncovered member.
fn verify_periodic_cover(s: &PeriodicSet, classes: &[ResidueClass]) -> Result<Option<u64>> {
    let mut span = s.period();
    for c in classes {
        span = lcm_checked(span, c.modulus())?;
    }
    check_period(span, DEFAULT_PERIOD_LIMIT)?;
    let wide = s.rebase(span)?;
    for r in wide.member_residues() {
        if !classes.iter().any(|c| c.contains(r)) {
            let witness = if r == 0 { span } else { r };
            return Ok(Some(witness));
        }
    }
    Ok(None)
}

/// Outcome of a coverage check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum VerifyOutcome {
    Proved,
    WindowChecked { window: u64 },
    Failed { counterexample: u64 },
}

/// Check S is a subset of the union of the classes: exactly when S exposes
/// exact residues, by window scan otherwise.
pub fn verify_cover(s: &SetExpr, classes: &[ResidueClass], window: u64) -> Result<VerifyOutcome> {
    let mut span: u64 = 1;
    for c in classes {
        span = lcm_checked(span, c.modulus())?;
    }
    if structural::supports_exact(s) {
        let attained = structural::attained(s, span, DEFAULT_PERIOD_LIMIT)?;
        let mut covered = Bits::new(span as usize);
        for c in classes {
            let mut r = c.residue();
            while r < span {
                covered.set(r as usize);
                r += c.modulus();
            }
        }
        return match attained.first_not_in(&covered) {
            None => Ok(VerifyOutcome::Proved),
            Some(res) => {
                // Concrete witness in that residue class.
                let mut n = res as u64;
                loop {
                    if n >= 1 && s.contains(n) {
                        break;
                    }
                    n += span;
                    if n > window.max(1_000_000).saturating_mul(64) {
                        // The residue is attained, so a witness exists;
                        // it is just out of scanning reach.
                        n = res as u64;
                        break;
                    }
                }
                Ok(VerifyOutcome::Failed { counterexample: n })
            }
        };
    }
    for n in 1..=window {
        if s.contains(n) && !classes.iter().any(|c| c.contains(n)) {
            return Ok(VerifyOutcome::Failed { counterexample: n });
        }
    }
    Ok(VerifyOutcome::WindowChecked { window })
}

/// Greedy cover of the window-observed residues by classes drawn from the
/// candidate moduli; weight-effectiveness rule, deterministic tie-breaks.
pub fn greedy_cover(
    s: &SetExpr,
    candidate_moduli: &[u64],
    window: u64,
) -> Result<CoverCertificate> {
    if candidate_moduli.is_empty() || candidate_moduli.contains(&0) {
        return Err(Error::Invalid("candidate moduli must be >= 1".into()));
    }
    let mut span: u64 = 1;
    for &m in candidate_moduli {
        span = lcm_checked(span, m)?;
    }
    check_period(span, DEFAULT_PERIOD_LIMIT)?;
    let observed = crate::estimator::sieve_residues_window(s, span, window)?;
    let universe: Vec<u64> = observed.ones().map(|i| i as u64).collect();
    let mut uncovered: Vec<bool> = vec![true; universe.len()];
    let mut remaining = universe.len();
    let mut moduli = candidate_moduli.to_vec();
    moduli.sort_unstable();
    moduli.dedup();
    let mut classes = Vec::new();
    while remaining > 0 {
        let mut best: Option<(u128, ResidueClass)> = None;
        for &m in &moduli {
            for r in 0..m {
                let covered = universe
                    .iter()
                    .zip(&uncovered)
                    .filter(|(&u, &unc)| unc && u % m == r)
                    .count() as u128;
                if covered == 0 {
                    continue;
                }
                let score = covered * m as u128;
                let class = ResidueClass::new(r, m)?;
                if best.map_or(true, |(s, _)| score > s) {
                    best = Some((score, class));
                }
            }
        }
        let (_, class) = best.expect("residues are always coverable by their own class");
        for (i, &u) in universe.iter().enumerate() {
            if uncovered[i] && class.contains(u) {
                uncovered[i] = false;
                remaining -= 1;
            }
        }
        classes.push(class);
    }
    classes.sort_unstable();
    certificate(classes, CoverStatus::WindowChecked(window))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_expr;

    fn expr(t: &str) -> SetExpr {
        parse_expr(t).unwrap()
    }

    #[test]
    fn infimum_examples() {
        let odd = PeriodicSet::odd();
        let res = infimum_cover(&odd, 4, None).unwrap();
        assert_eq!(res.value, Rat::new(1, 2).unwrap());
        assert_eq!(res.certificate.classes, vec![ResidueClass::new(1, 2).unwrap()]);
        assert!(res.optimal);

        let res = infimum_cover(&PeriodicSet::empty(), 10, None).unwrap();
        assert_eq!(res.value, Rat::ZERO);
        assert!(res.certificate.classes.is_empty());

        let s = PeriodicSet::from_residues(4, [1, 2]).unwrap();
        let res = infimum_cover(&s, 4, None).unwrap();
        assert_eq!(res.value, Rat::new(1, 2).unwrap());
        assert_eq!(
            res.certificate.classes,
            vec![
                ResidueClass::new(1, 4).unwrap(),
                ResidueClass::new(2, 4).unwrap()
            ]
        );
    }

    #[test]
    fn restricted_search_below_period() {
        // With moduli capped at 2, covering {1, 2} mod 4 costs a full unit.
        let s = PeriodicSet::from_residues(4, [1, 2]).unwrap();
        let res = infimum_cover(&s, 2, None).unwrap();
        assert_eq!(res.value, Rat::ONE);
        assert!(res.optimal);
        assert!(res.nodes > 0);

        // Oracle: exhaustive subset enumeration over the candidate classes.
        let mut best = Rat::from_int(10);
        let candidates = [
            ResidueClass::new(0, 1).unwrap(),
            ResidueClass::new(0, 2).unwrap(),
            ResidueClass::new(1, 2).unwrap(),
        ];
        for mask in 1u32..8 {
            let chosen: Vec<ResidueClass> = candidates
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, c)| *c)
                .collect();
            if verify_periodic_cover(&s, &chosen).unwrap().is_none() {
                let mut w = Rat::ZERO;
                for c in &chosen {
                    w = w.add(&Rat::new(1, c.modulus()).unwrap()).unwrap();
                }
                if w < best {
                    best = w;
                }
            }
        }
        assert_eq!(res.value, best);
    }

    #[test]
    fn infimum_matches_density_when_moduli_allow_period() {
        // Deterministic pseudo-random periodic sets.
        let mut x = 0x9E3779B97F4A7C15u64;
        let mut next = move || {
            x ^= x << 13;
            x ^= x >> 7;
            x ^= x << 17;
            x
        };
        for _ in 0..25 {
            let period = next() % 24 + 1;
            let s =
                PeriodicSet::from_residues(period, (0..period).filter(|_| next() % 3 == 0))
                    .unwrap();
            let res = infimum_cover(&s, period.max(1), None).unwrap();
            assert_eq!(res.value, s.density());
            assert!(res.optimal);
        }
    }

    #[test]
    fn monotone_and_subadditive_small() {
        let a = PeriodicSet::from_residues(6, [1, 4]).unwrap();
        let b = PeriodicSet::from_residues(6, [1, 2, 4]).unwrap();
        // a subset of b
        for m in 1..=4u64 {
            let ia = infimum_cover(&a, m, None).unwrap().value;
            let ib = infimum_cover(&b, m, None).unwrap().value;
            assert!(ia <= ib, "monotonicity at M = {m}");
            let u = a.union(&b).unwrap();
            let iu = infimum_cover(&u, m, None).unwrap().value;
            assert!(iu <= ia.add(&ib).unwrap(), "subadditivity at M = {m}");
        }
    }

    #[test]
    fn verify_examples() {
        let odd = expr("odd");
        let c12 = ResidueClass::new(1, 2).unwrap();
        assert_eq!(verify_cover(&odd, &[c12], 100).unwrap(), VerifyOutcome::Proved);

        let c14 = ResidueClass::new(1, 4).unwrap();
        assert_eq!(
            verify_cover(&odd, &[c14], 100).unwrap(),
            VerifyOutcome::Failed { counterexample: 3 }
        );

        // Truncated dyadic union covered by its two classes.
        let b = expr("balpha(101,3)");
        let c48 = ResidueClass::new(4, 8).unwrap();
        assert_eq!(
            verify_cover(&b, &[c12, c48], 100).unwrap(),
            VerifyOutcome::Proved
        );

        // Non-structural set: window check.
        let t = expr("taudiv");
        let all = ResidueClass::new(0, 1).unwrap();
        assert_eq!(
            verify_cover(&t, &[all], 500).unwrap(),
            VerifyOutcome::WindowChecked { window: 500 }
        );
    }

    #[test]
    fn greedy_examples() {
        let cert = greedy_cover(&expr("odd"), &[2], 100).unwrap();
        assert_eq!(cert.classes, vec![ResidueClass::new(1, 2).unwrap()]);
        assert_eq!(cert.weight, Rat::new(1, 2).unwrap());

        let cert = greedy_cover(&expr("val(2,{1})"), &[4], 10_000).unwrap();
        assert_eq!(cert.classes, vec![ResidueClass::new(2, 4).unwrap()]);
        assert_eq!(cert.weight, Rat::new(1, 4).unwrap());

        // Divisor-count members with more than two odd exponents are all
        // divisible by 8; the window scan certifies the single class.
        let s = expr("inter(taudiv,comp(rt(2;default)))");
        let cert = greedy_cover(&s, &[8], 1_000_000).unwrap();
        assert_eq!(cert.classes, vec![ResidueClass::new(0, 8).unwrap()]);
        assert_eq!(cert.weight, Rat::new(1, 8).unwrap());
        assert_eq!(cert.status, CoverStatus::WindowChecked(1_000_000));
    }

    #[test]
    fn solver_certificates_verify() {
        let s = PeriodicSet::from_residues(12, [1, 5, 6, 11]).unwrap();
        for m in [2u64, 3, 6, 12] {
            let res = infimum_cover(&s, m, None).unwrap();
            let e = SetExpr::Periodic(s.clone());
            assert_eq!(
                verify_cover(&e, &res.certificate.classes, 1000).unwrap(),
                VerifyOutcome::Proved,
                "M = {m}"
            );
        }
    }
}
