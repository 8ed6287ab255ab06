//! Measure density over the naturals, computed exactly where structure
//! permits and numerically elsewhere.
//!
//! The measure density of S is the infimum of sum(1/m_i) over finite
//! covers of S by residue classes r_i + (m_i); S is measurable when the
//! densities of S and its complement sum to one. The toolkit provides:
//!
//! - exact rational densities on the periodic layer (finite unions of
//!   residue classes) and for the valuation-set, multi-prime and dyadic
//!   constructions ([`measure`]);
//! - the remainder-system estimator R(S : B_N) / B_N with an exact
//!   structural counting path and a windowed fallback ([`estimator`]);
//! - an exact branch-and-bound solver for the covering infimum restricted
//!   to bounded moduli, plus greedy certificates ([`cover`]);
//! - executable checks of the additivity and zero-density statements on
//!   concrete instances ([`check`]).
//!
//! Naturals are unsigned 64-bit; arithmetic that would overflow reports
//! an error instead of wrapping. The remainder-system ratios in exact
//! mode are non-increasing upper bounds of the measure density; no
//! extrapolation of the limit is ever performed. (The same limit also
//! carries a Haar-measure reading over the polyadic completion; the
//! toolkit sticks to the arithmetic side.)
//!
//! ```
//! use buckdens::{parse_expr, mu_estimate, CountMode, RemainderSystem};
//!
//! let squares = parse_expr("squares").unwrap();
//! let rep = mu_estimate(&squares, &RemainderSystem::Lcm, 6, CountMode::Exact, None).unwrap();
//! assert_eq!(rep.final_ratio.to_string(), "1/5");
//! ```

pub mod bits;
pub mod check;
pub mod cover;
pub mod error;
pub mod estimator;
pub mod expr;
pub mod measure;
pub mod parse;
pub mod periodic;
pub mod rational;
pub mod residue;

pub use check::{CheckReport, Counterexample, ReportRow, Verdict};
pub use cover::{
    greedy_cover, infimum_cover, verify_cover, CoverCertificate, CoverResult, CoverStatus,
    VerifyOutcome, DEFAULT_NODE_BUDGET,
};
pub use error::{Error, Result};
pub use estimator::{
    default_window, mu_estimate, residue_count_exact, residue_count_window, sieve_residues_exact,
    sieve_residues_window, BoundSemantics, CountMode, DensityEntry, DensityReport,
    RemainderSystem,
};
pub use expr::{RtPrimes, SetExpr};
pub use measure::{
    measure_balpha, measure_multi, measure_scaled_union, measure_valuation, residues_valuation,
    CoprimalityEvidence, ExpKind, ExponentSet, Measure, ScaledUnionSpec,
};
pub use parse::parse_expr;
pub use periodic::{PeriodicSet, DEFAULT_PERIOD_LIMIT};
pub use rational::Rat;
pub use residue::{
    default_rt_primes, factorize, is_prime, lcm_upto, primes_upto, tau, valuation, ResidueClass,
};
