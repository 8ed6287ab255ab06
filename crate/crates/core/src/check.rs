//! Executable checks of the additivity and zero-density statements on
//! concrete instances. Checks verify hypotheses and report numeric
//! evidence; a `Fail` verdict always carries a reproducible
//! counterexample, and finite evidence alone never upgrades to a proof
//! claim (that is what `Inconclusive` is for).

use crate::error::{Error, Result};
use crate::estimator::{
    mu_estimate, residue_count_exact, residue_count_window, CountMode, RemainderSystem,
};
use crate::expr::SetExpr;
use crate::measure::{measure_scaled_union, CoprimalityEvidence, Measure, ScaledUnionSpec};
use crate::rational::Rat;
use crate::residue::{factorize, tau, valuation_raw};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Clone, Debug)]
pub struct Counterexample {
    /// The offending natural, or the series index for per-part violations.
    pub n: u64,
    /// Part index (0-based) when the violation names a part.
    pub part: Option<usize>,
    /// Remainder-system index N when the violation names a stage.
    pub step: Option<u32>,
    pub detail: String,
}

#[derive(Clone, Debug)]
pub struct ReportRow {
    pub label: String,
    pub value: String,
    pub numeric: Option<f64>,
}

impl ReportRow {
    fn new(label: impl Into<String>, value: impl Into<String>, numeric: Option<f64>) -> ReportRow {
        ReportRow {
            label: label.into(),
            value: value.into(),
            numeric,
        }
    }
}

#[derive(Clone, Debug)]
pub struct CheckReport {
    pub check: String,
    pub verdict: Verdict,
    pub counterexample: Option<Counterexample>,
    pub rows: Vec<ReportRow>,
    pub window: Option<u64>,
    pub n_range: Option<(u32, u32)>,
    pub notes: Vec<String>,
}

impl CheckReport {
    fn new(check: &str) -> CheckReport {
        CheckReport {
            check: check.into(),
            verdict: Verdict::Pass,
            counterexample: None,
            rows: Vec::new(),
            window: None,
            n_range: None,
            notes: Vec::new(),
        }
    }

    fn fail(&mut self, ce: Counterexample) {
        self.verdict = Verdict::Fail;
        self.counterexample = Some(ce);
    }
}

/// Rational slack absorbing real-valued tail reporting in comparisons.
fn default_slack() -> Rat {
    Rat::new(1, 1_000_000_000).unwrap()
}

/// First n <= window belonging to two different parts, if any.
fn disjointness_witness(parts: &[SetExpr], window: u64) -> Option<(u64, usize, usize)> {
    for n in 1..=window {
        let mut first: Option<usize> = None;
        for (i, p) in parts.iter().enumerate() {
            if p.contains(n) {
                match first {
                    None => first = Some(i),
                    Some(j) => return Some((n, j, i)),
                }
            }
        }
    }
    None
}

/// Best available estimate of the measure of `e`.
enum Estimate {
    Exact(Measure),
    UpperBound(Rat),
    Window(Rat),
}

fn best_estimate(e: &SetExpr, sys: &RemainderSystem, n_max: u32, window: u64) -> Result<Estimate> {
    if let Some(m) = e.exact_measure()? {
        return Ok(Estimate::Exact(m));
    }
    if e.has_exact_residues() {
        let rep = mu_estimate(e, sys, n_max, CountMode::Exact, None)?;
        return Ok(Estimate::UpperBound(rep.final_ratio));
    }
    let b = sys.modulus(n_max)?;
    let count = residue_count_window(e, b, window)?;
    Ok(Estimate::Window(Rat::new(count, b)?))
}

/// Countable-additivity check: disjoint parts with exact measures, tail
/// unions shrinking to zero, and the union measure matching the series.
pub fn weak_sigma_check(
    parts: &[SetExpr],
    sys: &RemainderSystem,
    n_max: u32,
    k_max: usize,
    window: u64,
) -> Result<CheckReport> {
    let mut report = CheckReport::new("weak-sigma");
    report.window = Some(window);
    report.n_range = Some((1, n_max));
    if parts.is_empty() {
        return Err(Error::Invalid("no parts given".into()));
    }

    if let Some((n, i, j)) = disjointness_witness(parts, window) {
        report.fail(Counterexample {
            n,
            part: Some(j),
            step: None,
            detail: format!("{n} belongs to part {i} and part {j}; parts must be disjoint"),
        });
        return Ok(report);
    }
    report
        .notes
        .push(format!("disjointness checked on window [1, {window}]"));

    let mut sum = Rat::ZERO;
    let mut tails = Rat::ZERO;
    for (i, part) in parts.iter().enumerate() {
        let m = part
            .exact_measure()?
            .ok_or_else(|| Error::Unsupported(format!("part {part} has no exact measure")))?;
        report.rows.push(ReportRow::new(
            format!("mu(part[{i}])"),
            m.value.to_string(),
            Some(m.value.to_f64()),
        ));
        sum = sum.add(&m.value)?;
        tails = tails.add(&m.tail)?;
    }
    report.rows.push(ReportRow::new(
        "sum of part measures",
        sum.to_string(),
        Some(sum.to_f64()),
    ));

    // Tail unions from index K on; these must head to zero for the
    // additivity conclusion to apply.
    for k in 1..=k_max.min(parts.len()) {
        let tail_union = SetExpr::union(parts[k - 1..].to_vec());
        let est = best_estimate(&tail_union, sys, n_max, window)?;
        let (value, kind) = match est {
            Estimate::Exact(m) => (m.value, "exact"),
            Estimate::UpperBound(r) => (r, "upper bound"),
            Estimate::Window(r) => (r, "window"),
        };
        report.rows.push(ReportRow::new(
            format!("mu(union from part {k})"),
            format!("{value} ({kind})"),
            Some(value.to_f64()),
        ));
    }

    let union = SetExpr::union(parts.to_vec());
    let tolerance = tails.add(&default_slack())?;
    match best_estimate(&union, sys, n_max, window)? {
        Estimate::Exact(m) => {
            report.rows.push(ReportRow::new(
                "mu(union)",
                m.value.to_string(),
                Some(m.value.to_f64()),
            ));
            if m.value.abs_diff(&sum)? > tolerance.add(&m.tail)? {
                report.fail(Counterexample {
                    n: 0,
                    part: None,
                    step: Some(n_max),
                    detail: format!(
                        "mu(union) = {} differs from the part sum {} beyond tolerance {}",
                        m.value, sum, tolerance
                    ),
                });
            }
        }
        Estimate::UpperBound(r) => {
            report.rows.push(ReportRow::new(
                "mu(union) upper bound",
                r.to_string(),
                Some(r.to_f64()),
            ));
            if r < sum.sub(&tolerance).unwrap_or(Rat::ZERO) {
                // An exact upper bound below the claimed series sum is a
                // genuine contradiction.
                report.fail(Counterexample {
                    n: 0,
                    part: None,
                    step: Some(n_max),
                    detail: format!(
                        "upper bound {r} for mu(union) is below the part sum {sum}"
                    ),
                });
            } else if r > sum.add(&tolerance)? {
                report.verdict = Verdict::Inconclusive;
                report.notes.push(format!(
                    "upper bound {r} has not yet descended to the part sum {sum} by N = {n_max}"
                ));
            }
        }
        Estimate::Window(r) => {
            report.rows.push(ReportRow::new(
                "mu(union) window estimate",
                r.to_string(),
                Some(r.to_f64()),
            ));
            report.verdict = Verdict::Inconclusive;
            report
                .notes
                .push("union has no exact path; window evidence only".into());
        }
    }
    Ok(report)
}

/// Point-style check for H = union of b_i * H_i with the coprimality
/// hypothesis: measure must equal sum of mu(H_i)/b_i.
pub fn scaled_union_check(
    spec: &ScaledUnionSpec,
    sys: &RemainderSystem,
    n_max: u32,
    window: u64,
) -> Result<CheckReport> {
    let mut report = CheckReport::new("scaled-union");
    report.window = Some(window);
    report.n_range = Some((1, n_max));

    if let Err(Error::Hypothesis(msg)) = spec.validate_chain() {
        report.fail(Counterexample {
            n: 0,
            part: None,
            step: None,
            detail: msg,
        });
        return Ok(report);
    }
    let (evidence, witness) = spec.coprimality_witness(window)?;
    match evidence {
        CoprimalityEvidence::Structural => report
            .notes
            .push("coprimality hypothesis verified structurally".into()),
        CoprimalityEvidence::Window(w) => report.notes.push(format!(
            "coprimality hypothesis empirically verified on window [1, {w}]"
        )),
    }
    if let Some(n) = witness {
        report.fail(Counterexample {
            n,
            part: None,
            step: None,
            detail: format!("element {n} shares a factor with the scales"),
        });
        return Ok(report);
    }

    let (expected, _) = measure_scaled_union(spec, window)?;
    report.rows.push(ReportRow::new(
        "sum mu(H_i)/b_i",
        expected.value.to_string(),
        Some(expected.value.to_f64()),
    ));
    report.rows.push(ReportRow::new(
        "tail bound",
        expected.tail.to_string(),
        Some(expected.tail.to_f64()),
    ));

    let union = SetExpr::union(
        spec.parts
            .iter()
            .zip(&spec.scales)
            .map(|(h, &b)| SetExpr::scale(b, h.clone()))
            .collect::<Result<Vec<_>>>()?,
    );
    let tolerance = expected.tail.add(&default_slack())?;
    match best_estimate(&union, sys, n_max, window)? {
        Estimate::Exact(m) => {
            report.rows.push(ReportRow::new(
                "mu(H)",
                m.value.to_string(),
                Some(m.value.to_f64()),
            ));
            if m.value.abs_diff(&expected.value)? > tolerance.add(&m.tail)? {
                report.fail(Counterexample {
                    n: 0,
                    part: None,
                    step: Some(n_max),
                    detail: format!(
                        "mu(H) = {} differs from the sum {} beyond tolerance {}",
                        m.value, expected.value, tolerance
                    ),
                });
            }
        }
        Estimate::UpperBound(r) => {
            report.rows.push(ReportRow::new(
                "mu(H) upper bound",
                r.to_string(),
                Some(r.to_f64()),
            ));
            if r < expected.value.sub(&tolerance).unwrap_or(Rat::ZERO) {
                report.fail(Counterexample {
                    n: 0,
                    part: None,
                    step: Some(n_max),
                    detail: format!(
                        "upper bound {r} is below the expected sum {}",
                        expected.value
                    ),
                });
            } else if r > expected.value.add(&tolerance)? {
                report.verdict = Verdict::Inconclusive;
            }
        }
        Estimate::Window(r) => {
            report.rows.push(ReportRow::new(
                "mu(H) window estimate",
                r.to_string(),
                Some(r.to_f64()),
            ));
            report.verdict = Verdict::Inconclusive;
        }
    }
    Ok(report)
}

/// Series-domination check: exact-mode ratios of each part against its
/// bound c_n.
///
/// Exact ratios are non-increasing upper bounds, so the sharpest
/// certifiable statement from finite data is the inequality at N = n_max;
/// the full table is reported and earlier stages are noted.
pub fn alexander_check(
    parts: &[SetExpr],
    bounds: &[Rat],
    sys: &RemainderSystem,
    n_max: u32,
    window: u64,
) -> Result<CheckReport> {
    let mut report = CheckReport::new("alexander");
    report.window = Some(window);
    report.n_range = Some((1, n_max));
    if parts.len() != bounds.len() {
        return Err(Error::Invalid(
            "parts and bounds differ in length".into(),
        ));
    }
    if parts.is_empty() {
        return Err(Error::Invalid("no parts given".into()));
    }
    if let Some((n, i, j)) = disjointness_witness(parts, window) {
        report.fail(Counterexample {
            n,
            part: Some(j),
            step: None,
            detail: format!("{n} belongs to part {i} and part {j}; parts must be disjoint"),
        });
        return Ok(report);
    }

    let mut partial = Rat::ZERO;
    for (k, c) in bounds.iter().enumerate() {
        if c.is_zero() {
            return Err(Error::Invalid("bounds must be positive".into()));
        }
        partial = partial.add(c)?;
        report.rows.push(ReportRow::new(
            format!("partial sum c_1..c_{}", k + 1),
            partial.to_string(),
            Some(partial.to_f64()),
        ));
    }

    for (k, (part, c)) in parts.iter().zip(bounds).enumerate() {
        let mut final_ratio = Rat::ONE;
        let mut settled_at: Option<u32> = None;
        for n in 1..=n_max {
            let b = sys.modulus(n)?;
            let count = residue_count_exact(part, b)?;
            let ratio = Rat::new(count, b)?;
            if ratio <= *c && settled_at.is_none() {
                settled_at = Some(n);
            }
            final_ratio = ratio;
        }
        report.rows.push(ReportRow::new(
            format!("R(A_{}:B_{n_max})/B_{n_max}", k + 1),
            final_ratio.to_string(),
            Some(final_ratio.to_f64()),
        ));
        match settled_at {
            Some(n) if final_ratio <= *c => {
                if n > 1 {
                    report.notes.push(format!(
                        "part {} first meets its bound {} at N = {n}",
                        k + 1,
                        c
                    ));
                }
            }
            _ => {
                report.fail(Counterexample {
                    n: (k + 1) as u64,
                    part: Some(k),
                    step: Some(n_max),
                    detail: format!(
                        "R(A_{}:B_{n_max})/B_{n_max} = {} exceeds c_{} = {}",
                        k + 1,
                        final_ratio,
                        k + 1,
                        c
                    ),
                });
                return Ok(report);
            }
        }
    }

    // Additivity evidence when part measures exist.
    let mut sum = Rat::ZERO;
    let mut have_all = true;
    for part in parts {
        match part.exact_measure()? {
            Some(m) => sum = sum.add(&m.value)?,
            None => {
                have_all = false;
                break;
            }
        }
    }
    if have_all {
        report.rows.push(ReportRow::new(
            "sum of part measures",
            sum.to_string(),
            Some(sum.to_f64()),
        ));
    }
    Ok(report)
}

/// Zero-density criterion evidence: estimates the slices { s in S :
/// v_p(s) = 1 } for each prime. Exact positive slice measure is a
/// counterexample; all slices vanishing (exactly or within tolerance) is
/// evidence toward measure zero.
pub fn niven_check(
    s: &SetExpr,
    primes: &[u64],
    sys: &RemainderSystem,
    n_max: u32,
    window: u64,
    tolerance: Rat,
) -> Result<CheckReport> {
    let mut report = CheckReport::new("niven");
    report.window = Some(window);
    report.n_range = Some((1, n_max));
    if primes.is_empty() {
        return Err(Error::Invalid("prime list must be nonempty".into()));
    }
    let mut recip_sum = 0.0;
    let mut all_small = true;
    let mut any_estimate = false;
    for &p in primes {
        recip_sum += 1.0 / p as f64;
        let slice = SetExpr::p_slice(s.clone(), p)?;
        let est = best_estimate(&slice, sys, n_max, window)?;
        match est {
            Estimate::Exact(m) => {
                report.rows.push(ReportRow::new(
                    format!("mu(slice p={p})"),
                    m.value.to_string(),
                    Some(m.value.to_f64()),
                ));
                if !m.value.is_zero() && m.value > m.tail {
                    // Slice provably has positive measure.
                    let witness = (1..=window)
                        .find(|&n| slice.contains(n))
                        .unwrap_or(0);
                    report.fail(Counterexample {
                        n: witness,
                        part: None,
                        step: None,
                        detail: format!(
                            "slice at p = {p} has exact measure {} > 0 (witness {witness})",
                            m.value
                        ),
                    });
                    break;
                }
            }
            Estimate::UpperBound(r) => {
                any_estimate = true;
                report.rows.push(ReportRow::new(
                    format!("slice p={p} upper bound"),
                    r.to_string(),
                    Some(r.to_f64()),
                ));
                if r > tolerance {
                    all_small = false;
                }
            }
            Estimate::Window(r) => {
                any_estimate = true;
                report.rows.push(ReportRow::new(
                    format!("slice p={p} window estimate"),
                    r.to_string(),
                    Some(r.to_f64()),
                ));
                if r > tolerance {
                    all_small = false;
                }
            }
        }
    }
    report.rows.push(ReportRow::new(
        "partial sum of 1/p",
        format!("{recip_sum:.6}"),
        Some(recip_sum),
    ));
    report.notes.push(
        "divergence of the prime reciprocal series is asserted, not proved".into(),
    );
    if report.verdict != Verdict::Fail {
        if !all_small {
            report.verdict = Verdict::Inconclusive;
            report
                .notes
                .push("some slice estimate exceeds the tolerance".into());
        } else if any_estimate {
            report
                .notes
                .push("slice estimates within tolerance; finite evidence only".into());
        }
    }
    Ok(report)
}

/// Inclusion lemmas for the odd-exponent families over a window:
/// slices of R_t at valuation exactly 1 divide down into R_{t-1}, and
/// R_0 has empty slices.
pub fn rt_inclusion_check(
    t_values: &[u32],
    slice_primes: &[u64],
    rt_primes: &[u64],
    window: u64,
) -> Result<CheckReport> {
    let mut report = CheckReport::new("rt-inclusion");
    report.window = Some(window);
    if slice_primes.is_empty() || t_values.is_empty() {
        return Err(Error::Invalid("need at least one prime and one t".into()));
    }
    let mut sorted_primes = rt_primes.to_vec();
    sorted_primes.sort_unstable();

    let odd_count = |n: u64| -> u32 {
        factorize(n)
            .iter()
            .filter(|(p, e)| e % 2 == 1 && sorted_primes.binary_search(p).is_ok())
            .count() as u32
    };

    let mut checked = vec![0u64; t_values.len() * slice_primes.len()];
    let mut zero_slice_checked = 0u64;
    for n in 1..=window {
        let oc = odd_count(n);
        for (ti, &t) in t_values.iter().enumerate() {
            if t == 0 {
                continue;
            }
            if oc <= t {
                for (pi, &p) in slice_primes.iter().enumerate() {
                    if valuation_raw(n, p) == 1 {
                        checked[ti * slice_primes.len() + pi] += 1;
                        // The quotient must drop one odd exponent.
                        if odd_count(n / p) > t - 1 {
                            report.fail(Counterexample {
                                n,
                                part: None,
                                step: None,
                                detail: format!(
                                    "{n} in R_{t} slice at p = {p}, but {n}/{p} is not in R_{}",
                                    t - 1
                                ),
                            });
                            return Ok(report);
                        }
                    }
                }
            }
        }
        // R_0 slices must be empty.
        if oc == 0 {
            for &p in slice_primes {
                if valuation_raw(n, p) == 1 {
                    report.fail(Counterexample {
                        n,
                        part: None,
                        step: None,
                        detail: format!("{n} lies in an R_0 slice at p = {p}"),
                    });
                    return Ok(report);
                }
            }
            zero_slice_checked += 1;
        }
    }
    for (ti, &t) in t_values.iter().enumerate() {
        for (pi, &p) in slice_primes.iter().enumerate() {
            report.rows.push(ReportRow::new(
                format!("t={t} p={p} slice members checked"),
                checked[ti * slice_primes.len() + pi].to_string(),
                Some(checked[ti * slice_primes.len() + pi] as f64),
            ));
        }
    }
    report.rows.push(ReportRow::new(
        "R_0 members checked",
        zero_slice_checked.to_string(),
        Some(zero_slice_checked as f64),
    ));
    Ok(report)
}

/// Divisor-divisibility family: members of R = { n : tau(n) | n } with
/// more than s odd-exponent primes are divisible by 2^(s+1), giving the
/// cover bound 1/2^(s+1) for the part outside P_s.
pub fn taudiv_bound_report(
    s_max: u32,
    sys: &RemainderSystem,
    n_max: u32,
    window: u64,
) -> Result<CheckReport> {
    if s_max == 0 {
        return Err(Error::Invalid("s_max must be >= 1".into()));
    }
    let mut report = CheckReport::new("taudiv-bound");
    report.window = Some(window);
    report.n_range = Some((1, n_max));

    let b = sys.modulus(n_max)?;
    let mut member_counts = vec![0u64; s_max as usize + 1];
    let mut inside_bits = vec![crate::bits::Bits::new(b as usize); s_max as usize];
    for n in 1..=window {
        let t = tau(n)?;
        if n % t != 0 {
            continue;
        }
        let odd_exps = factorize(n).iter().filter(|(_, e)| e % 2 == 1).count() as u32;
        for s in 1..=s_max {
            if odd_exps > s {
                member_counts[s as usize] += 1;
                if n % (1u64 << (s + 1)) != 0 {
                    report.fail(Counterexample {
                        n,
                        part: None,
                        step: None,
                        detail: format!(
                            "tau({n}) | {n} with {odd_exps} odd exponents but 2^{} does not divide {n}",
                            s + 1
                        ),
                    });
                    return Ok(report);
                }
            } else {
                // Window residue data for the inside-P_s part.
                inside_bits[s as usize - 1].set((n % b) as usize);
            }
        }
    }

    let mut prev_bound = Rat::ONE;
    for s in 1..=s_max {
        let bound = Rat::new(1, 1u64 << (s + 1))?;
        assert!(bound < prev_bound, "bounds strictly decrease");
        prev_bound = bound;
        report.rows.push(ReportRow::new(
            format!("s={s} certified bound for R outside P_s"),
            bound.to_string(),
            Some(bound.to_f64()),
        ));
        report.rows.push(ReportRow::new(
            format!("s={s} members with more than s odd exponents"),
            member_counts[s as usize].to_string(),
            Some(member_counts[s as usize] as f64),
        ));
        let inside = inside_bits[s as usize - 1].count_ones();
        let ratio = Rat::new(inside, b)?;
        report.rows.push(ReportRow::new(
            format!("s={s} window residue ratio of R inside P_s mod B_{n_max}"),
            ratio.to_string(),
            Some(ratio.to_f64()),
        ));
    }
    report.notes.push(format!(
        "zero counterexamples on window [1, {window}]; decomposition bound certified"
    ));
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_expr;

    fn expr(t: &str) -> SetExpr {
        parse_expr(t).unwrap()
    }

    fn lcm_sys() -> RemainderSystem {
        RemainderSystem::Lcm
    }

    #[test]
    fn weak_sigma_balpha() {
        // alpha = 5/8: parts odd and 4*odd.
        let parts = SetExpr::balpha_parts(&[true, false, true]);
        let rep = weak_sigma_check(&parts, &lcm_sys(), 8, 3, 10_000).unwrap();
        assert_eq!(rep.verdict, Verdict::Pass);
        let sum = rep
            .rows
            .iter()
            .find(|r| r.label == "sum of part measures")
            .unwrap();
        assert_eq!(sum.value, "5/8");
    }

    #[test]
    fn weak_sigma_simple_instances() {
        let rep = weak_sigma_check(&[SetExpr::Odd], &lcm_sys(), 6, 2, 1000).unwrap();
        assert_eq!(rep.verdict, Verdict::Pass);

        let parts = vec![expr("ap(1,4)"), expr("ap(3,4)")];
        let rep = weak_sigma_check(&parts, &lcm_sys(), 6, 2, 1000).unwrap();
        assert_eq!(rep.verdict, Verdict::Pass);
        let sum = rep
            .rows
            .iter()
            .find(|r| r.label == "sum of part measures")
            .unwrap();
        assert_eq!(sum.value, "1/2");
    }

    #[test]
    fn weak_sigma_rejects_overlap() {
        let parts = vec![expr("odd"), expr("ap(1,4)")];
        let rep = weak_sigma_check(&parts, &lcm_sys(), 6, 2, 1000).unwrap();
        assert_eq!(rep.verdict, Verdict::Fail);
        assert_eq!(rep.counterexample.as_ref().unwrap().n, 1);
    }

    #[test]
    fn scaled_union_balpha() {
        let spec = ScaledUnionSpec::balpha(&[true, false, true], false).unwrap();
        let rep = scaled_union_check(&spec, &lcm_sys(), 8, 10_000).unwrap();
        assert_eq!(rep.verdict, Verdict::Pass);

        let part = SetExpr::complement(expr("ap(0,3)"));
        let spec = ScaledUnionSpec::new(vec![3, 9], vec![part.clone(), part], false).unwrap();
        let rep = scaled_union_check(&spec, &lcm_sys(), 9, 10_000).unwrap();
        assert_eq!(rep.verdict, Verdict::Pass);
        let expected = rep
            .rows
            .iter()
            .find(|r| r.label == "sum mu(H_i)/b_i")
            .unwrap();
        assert_eq!(expected.value, "8/27");
    }

    #[test]
    fn scaled_union_violation() {
        let spec = ScaledUnionSpec::new(vec![2], vec![expr("ap(0,2)")], false).unwrap();
        let rep = scaled_union_check(&spec, &lcm_sys(), 6, 1000).unwrap();
        assert_eq!(rep.verdict, Verdict::Fail);
        assert!(rep.counterexample.is_some());
    }

    #[test]
    fn alexander_balpha_bounds() {
        let digits = [true, false, true];
        let parts = SetExpr::balpha_parts(&digits);
        let bounds: Vec<Rat> = SetExpr::balpha_positions(&digits)
            .iter()
            .map(|&nk| Rat::new(1, 1u64 << nk).unwrap())
            .collect();
        let rep = alexander_check(&parts, &bounds, &lcm_sys(), 10, 1000).unwrap();
        assert_eq!(rep.verdict, Verdict::Pass);

        // Halving c_1 forces a violation.
        let mut halved = bounds.clone();
        halved[0] = halved[0].div_int(2).unwrap();
        let rep = alexander_check(&parts, &halved, &lcm_sys(), 10, 1000).unwrap();
        assert_eq!(rep.verdict, Verdict::Fail);
        assert!(rep.counterexample.is_some());
    }

    #[test]
    fn alexander_odd_cases() {
        let odd = vec![expr("odd")];
        let rep =
            alexander_check(&odd, &[Rat::new(1, 4).unwrap()], &lcm_sys(), 8, 1000).unwrap();
        assert_eq!(rep.verdict, Verdict::Fail);
        let ce = rep.counterexample.unwrap();
        assert_eq!(ce.n, 1);
        let rep =
            alexander_check(&odd, &[Rat::new(1, 2).unwrap()], &lcm_sys(), 8, 1000).unwrap();
        assert_eq!(rep.verdict, Verdict::Pass);
    }

    #[test]
    fn niven_cases() {
        let tol = Rat::new(1, 100).unwrap();
        let rep = niven_check(&expr("squares"), &[2, 3, 5, 7], &lcm_sys(), 8, 10_000, tol)
            .unwrap();
        assert_eq!(rep.verdict, Verdict::Pass);
        // Slices detected exactly zero, not numerically.
        for row in rep.rows.iter().filter(|r| r.label.starts_with("mu(slice")) {
            assert_eq!(row.value, "0/1");
        }

        let rep = niven_check(&expr("all"), &[2, 3], &lcm_sys(), 8, 10_000, tol).unwrap();
        assert_eq!(rep.verdict, Verdict::Fail);
        let ce = rep.counterexample.unwrap();
        assert_eq!(ce.n, 2); // 2 has v2 = 1

        let rep = niven_check(&expr("empty"), &[2, 3], &lcm_sys(), 8, 10_000, tol).unwrap();
        assert_eq!(rep.verdict, Verdict::Pass);
    }

    #[test]
    fn rt_inclusion_window() {
        let rep = rt_inclusion_check(
            &[1, 2],
            &[2, 3, 5, 7],
            crate::residue::default_rt_primes(),
            100_000,
        )
        .unwrap();
        assert_eq!(rep.verdict, Verdict::Pass);
    }

    #[test]
    fn taudiv_bound_cases() {
        let rep = taudiv_bound_report(3, &lcm_sys(), 8, 100_000).unwrap();
        assert_eq!(rep.verdict, Verdict::Pass);
        let bound = rep
            .rows
            .iter()
            .find(|r| r.label.starts_with("s=1 certified"))
            .unwrap();
        assert_eq!(bound.value, "1/4");
        let bound3 = rep
            .rows
            .iter()
            .find(|r| r.label.starts_with("s=3 certified"))
            .unwrap();
        assert_eq!(bound3.value, "1/16");
    }

    #[test]
    fn weak_sigma_truncated_three_tenths() {
        // 3/10 truncated to 20 dyadic digits: nine parts, union periodic
        // mod 2^18, measures exact.
        let e = expr("balpha(3/10,20)");
        let digits = match &e {
            SetExpr::BAlpha { digits, .. } => digits.clone(),
            _ => unreachable!(),
        };
        let parts = SetExpr::balpha_parts(&digits);
        assert_eq!(parts.len(), 9);
        let rep = weak_sigma_check(&parts, &lcm_sys(), 8, 3, 20_000).unwrap();
        assert_eq!(rep.verdict, Verdict::Pass);
        // The partial sum sits within 2^-18 of 3/10.
        let union_measure = SetExpr::union(parts).exact_measure().unwrap().unwrap();
        let alpha = Rat::new(3, 10).unwrap();
        let gap = union_measure.value.abs_diff(&alpha).unwrap();
        assert!(gap <= Rat::new(1, 1 << 18).unwrap());
    }

    #[test]
    fn alexander_settles_on_dyadic_chain() {
        // The lcm chain only ever absorbs 2^4 within 64 bits, so deep
        // dyadic parts need a power-of-two remainder system to reach
        // their bounds.
        let e = expr("balpha(3/10,20)");
        let digits = match &e {
            SetExpr::BAlpha { digits, .. } => digits.clone(),
            _ => unreachable!(),
        };
        let parts = SetExpr::balpha_parts(&digits);
        let bounds: Vec<Rat> = SetExpr::balpha_positions(&digits)
            .iter()
            .map(|&nk| Rat::new(1, 1u64 << nk).unwrap())
            .collect();
        let chain =
            RemainderSystem::custom((1..=20).map(|i| 1u64 << i).collect()).unwrap();
        let rep = alexander_check(&parts, &bounds, &chain, 20, 20_000).unwrap();
        assert_eq!(rep.verdict, Verdict::Pass, "{:?}", rep.counterexample);
    }

    #[test]
    fn fail_verdicts_reproduce() {
        // Re-evaluating a reported counterexample confirms the violation.
        let odd = vec![expr("odd")];
        let c = Rat::new(1, 4).unwrap();
        let rep = alexander_check(&odd, &[c], &lcm_sys(), 8, 1000).unwrap();
        let ce = rep.counterexample.unwrap();
        let n_final = rep.n_range.unwrap().1;
        let b = lcm_sys().modulus(ce.step.unwrap_or(n_final)).unwrap();
        let ratio = Rat::new(residue_count_exact(&odd[0], b).unwrap(), b).unwrap();
        assert!(ratio > c, "counterexample reproduces: {ratio} > {c}");

        let rep = niven_check(
            &expr("all"),
            &[2],
            &lcm_sys(),
            6,
            1000,
            Rat::new(1, 100).unwrap(),
        )
        .unwrap();
        let ce = rep.counterexample.unwrap();
        let slice = SetExpr::p_slice(expr("all"), 2).unwrap();
        assert!(slice.contains(ce.n));
    }

    #[test]
    fn exemption_example() {
        // 12 is in R with exactly one odd-exponent prime, so it is exempt
        // from the divisibility requirement for every s >= 1.
        assert!(expr("taudiv").contains(12));
        let odd_exps = factorize(12)
            .iter()
            .filter(|(_, e)| e % 2 == 1)
            .count();
        assert_eq!(odd_exps, 1);
    }
}
