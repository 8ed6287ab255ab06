//! Command-line surface for measure-density computations.
//!
//! Exit codes: 0 on success or a passing check, 1 on a failing check
//! (the counterexample is in the report), 2 on usage, parse or
//! computation errors.

mod output;

use std::process::ExitCode;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context};
use clap::{Parser, Subcommand, ValueEnum};

use buckdens::{
    check, greedy_cover, infimum_cover, mu_estimate, parse_expr, verify_cover, CountMode, Rat,
    RemainderSystem, ResidueClass, ScaledUnionSpec, SetExpr, Verdict, VerifyOutcome,
};

#[derive(Parser)]
#[command(
    name = "buckdens",
    version,
    about = "Exact and numeric measure-density computation over the naturals"
)]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, env = "BUCKDENS_FORMAT", default_value = "json")]
    format: Format,

    /// Worker threads for sieving and window scans (default: all cores).
    #[arg(long, global = true, env = "BUCKDENS_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Exact,
    Window,
}

#[derive(Clone)]
struct SystemArg(RemainderSystem);

impl FromStr for SystemArg {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> anyhow::Result<SystemArg> {
        match s {
            "lcm" => Ok(SystemArg(RemainderSystem::Lcm)),
            "factorial" => Ok(SystemArg(RemainderSystem::Factorial)),
            other => {
                let chain = other
                    .strip_prefix("custom:")
                    .ok_or_else(|| anyhow!("expected lcm, factorial or custom:<b1,b2,...>"))?;
                let moduli = parse_u64_list(chain)?;
                Ok(SystemArg(RemainderSystem::custom(moduli)?))
            }
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Exact measure (with tail bound) of a structural set expression.
    Measure { expr: String },

    /// Ratio table R(S:B_N)/B_N for N = 1..=max-n.
    Estimate {
        expr: String,
        #[arg(long, env = "BUCKDENS_SYSTEM", default_value = "lcm")]
        system: SystemArg,
        #[arg(long, env = "BUCKDENS_MAX_N", default_value_t = 10)]
        max_n: u32,
        #[arg(long, value_enum, env = "BUCKDENS_MODE", default_value = "exact")]
        mode: Mode,
        #[arg(long, env = "BUCKDENS_WINDOW")]
        window: Option<u64>,
    },

    /// Exact minimum-weight cover of a periodic set by residue classes
    /// with bounded moduli.
    Cover {
        expr: String,
        #[arg(long, env = "BUCKDENS_MAX_MODULUS")]
        max_modulus: u64,
        /// Optional period to re-express the set over before solving.
        #[arg(long)]
        period: Option<u64>,
        #[arg(long, env = "BUCKDENS_NODE_BUDGET")]
        node_budget: Option<u64>,
    },

    /// Check that the classes cover the set.
    VerifyCover {
        expr: String,
        /// Comma-separated classes, e.g. "1+(2),0+(4)".
        #[arg(long)]
        classes: String,
        #[arg(long, env = "BUCKDENS_WINDOW", default_value_t = 1_000_000)]
        window: u64,
    },

    /// Greedy cover certificate from window-observed residues.
    GreedyCover {
        expr: String,
        /// Candidate moduli, comma-separated.
        #[arg(long)]
        moduli: String,
        #[arg(long, env = "BUCKDENS_WINDOW", default_value_t = 1_000_000)]
        window: u64,
    },

    /// Zero-density slice evidence over a prime list.
    Niven {
        expr: String,
        #[arg(long, env = "BUCKDENS_PRIMES", default_value = "default")]
        primes: String,
        #[arg(long, env = "BUCKDENS_SYSTEM", default_value = "lcm")]
        system: SystemArg,
        #[arg(long, env = "BUCKDENS_MAX_N", default_value_t = 10)]
        max_n: u32,
        #[arg(long, env = "BUCKDENS_WINDOW", default_value_t = 1_000_000)]
        window: u64,
        /// Pass threshold for slice estimates, as a rational.
        #[arg(long, default_value = "1/100")]
        tolerance: String,
    },

    /// Countable-additivity check on disjoint parts (weak sigma), or on a
    /// scaled union when --scales is given.
    CheckSigma {
        /// Part expressions.
        exprs: Vec<String>,
        /// Dyadic digits or p/q generating the parts 2^(n_k-1) * odd.
        #[arg(long)]
        balpha: Option<String>,
        /// Digit count for rational --balpha input.
        #[arg(long, default_value_t = 20)]
        digits: usize,
        /// Run the scaled-union form of the check (with --balpha).
        #[arg(long, default_value_t = false)]
        scaled: bool,
        /// Explicit scales b_i for the scaled-union form.
        #[arg(long, conflicts_with = "balpha")]
        scales: Option<String>,
        #[arg(long, env = "BUCKDENS_SYSTEM", default_value = "lcm")]
        system: SystemArg,
        #[arg(long, env = "BUCKDENS_MAX_N", default_value_t = 10)]
        max_n: u32,
        /// Tail-union table depth.
        #[arg(long, default_value_t = 4)]
        k_max: usize,
        #[arg(long, env = "BUCKDENS_WINDOW", default_value_t = 100_000)]
        window: u64,
    },

    /// Series-domination check R(A_n:B_N)/B_N <= c_n.
    CheckAlexander {
        exprs: Vec<String>,
        /// Bounds c_n, comma-separated rationals.
        #[arg(long)]
        bounds: Option<String>,
        /// Dyadic digits or p/q; parts 2^(n_k-1) * odd with c_k = 2^-n_k.
        #[arg(long)]
        balpha: Option<String>,
        #[arg(long, default_value_t = 20)]
        digits: usize,
        #[arg(long, env = "BUCKDENS_SYSTEM", default_value = "lcm")]
        system: SystemArg,
        #[arg(long, env = "BUCKDENS_MAX_N", default_value_t = 10)]
        max_n: u32,
        #[arg(long, env = "BUCKDENS_WINDOW", default_value_t = 100_000)]
        window: u64,
    },

    /// Window checks of the odd-exponent family inclusions.
    CheckRt {
        /// Values of t, comma-separated.
        #[arg(long, default_value = "1,2")]
        t_list: String,
        /// Slice primes.
        #[arg(long, env = "BUCKDENS_PRIMES", default_value = "2,3,5,7")]
        primes: String,
        #[arg(long, env = "BUCKDENS_WINDOW", default_value_t = 1_000_000)]
        window: u64,
    },

    /// Divisor-divisibility decomposition bounds 1/2^(s+1).
    CheckTaudiv {
        #[arg(long, default_value_t = 3)]
        s_max: u32,
        #[arg(long, env = "BUCKDENS_SYSTEM", default_value = "lcm")]
        system: SystemArg,
        #[arg(long, env = "BUCKDENS_MAX_N", default_value_t = 10)]
        max_n: u32,
        #[arg(long, env = "BUCKDENS_WINDOW", default_value_t = 1_000_000)]
        window: u64,
    },

    /// CSV table of (N, B_N, R, ratio) for external plotting.
    Tabulate {
        expr: String,
        #[arg(long, env = "BUCKDENS_SYSTEM", default_value = "lcm")]
        system: SystemArg,
        #[arg(long, env = "BUCKDENS_MAX_N", default_value_t = 10)]
        max_n: u32,
        #[arg(long, value_enum, env = "BUCKDENS_MODE", default_value = "exact")]
        mode: Mode,
        #[arg(long, env = "BUCKDENS_WINDOW")]
        window: Option<u64>,
    },
}

fn parse_u64_list(s: &str) -> anyhow::Result<Vec<u64>> {
    s.split(',')
        .map(|x| {
            x.trim()
                .parse::<u64>()
                .with_context(|| format!("bad number {x:?}"))
        })
        .collect()
}

fn parse_primes(s: &str) -> anyhow::Result<Vec<u64>> {
    if s == "default" {
        Ok(buckdens::default_rt_primes().to_vec())
    } else {
        parse_u64_list(s)
    }
}

fn parse_rat(s: &str) -> anyhow::Result<Rat> {
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim().parse::<u64>()?, d.trim().parse::<u64>()?),
        None => (s.trim().parse::<u64>()?, 1),
    };
    Ok(Rat::new(num, den)?)
}

fn parse_rat_list(s: &str) -> anyhow::Result<Vec<Rat>> {
    s.split(',').map(parse_rat).collect()
}

fn parse_classes(s: &str) -> anyhow::Result<Vec<ResidueClass>> {
    s.split(',')
        .map(|c| ResidueClass::from_str(c.trim()).map_err(Into::into))
        .collect()
}

/// Digits of a --balpha argument (bit string or p/q with --digits).
fn balpha_digits(arg: &str, digits: usize) -> anyhow::Result<(Vec<bool>, bool)> {
    let expr = if arg.contains('/') {
        let (n, d) = arg.split_once('/').unwrap();
        SetExpr::balpha_rational(n.trim().parse()?, d.trim().parse()?, digits)?
    } else {
        SetExpr::balpha_bits(arg)?
    };
    match expr {
        SetExpr::BAlpha { digits, truncated } => Ok((digits, truncated)),
        _ => unreachable!(),
    }
}

fn mode_of(m: Mode) -> CountMode {
    match m {
        Mode::Exact => CountMode::Exact,
        Mode::Window => CountMode::Window,
    }
}

fn emit(format: Format, value: serde_json::Value) {
    match format {
        Format::Json => println!("{value}"),
        Format::Text => print!("{}", output::text_render(&value)),
        Format::Csv => println!("{value}"), // callers route CSV themselves
    }
}

fn check_exit(verdict: Verdict) -> ExitCode {
    match verdict {
        Verdict::Fail => ExitCode::from(1),
        _ => ExitCode::SUCCESS,
    }
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .ok();
    }
    let format = cli.format;
    match cli.command {
        Cmd::Measure { expr } => {
            let e = parse_expr(&expr)?;
            let m = e
                .exact_measure()?
                .ok_or_else(|| anyhow!("{e} has no exact measure; use estimate instead"))?;
            emit(format, output::measure_value("measure", &e.to_string(), &m));
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Estimate {
            expr,
            system,
            max_n,
            mode,
            window,
        } => {
            let e = parse_expr(&expr)?;
            let rep = mu_estimate(&e, &system.0, max_n, mode_of(mode), window)?;
            if format == Format::Csv {
                print!("{}", output::density_csv(&rep));
            } else {
                emit(
                    format,
                    output::density_value("estimate", &e.to_string(), &system.0.label(), &rep),
                );
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Cover {
            expr,
            max_modulus,
            period,
            node_budget,
        } => {
            let e = parse_expr(&expr)?;
            let mut ps = e
                .try_to_periodic()?
                .ok_or_else(|| anyhow!("{e} is not a periodic set; cover needs one"))?;
            if let Some(p) = period {
                ps = ps.rebase(p).context("cannot rebase to the given period")?;
            }
            let res = infimum_cover(&ps, max_modulus, node_budget)?;
            emit(format, output::cover_value(&e.to_string(), &res));
            Ok(ExitCode::SUCCESS)
        }
        Cmd::VerifyCover {
            expr,
            classes,
            window,
        } => {
            let e = parse_expr(&expr)?;
            let classes = parse_classes(&classes)?;
            let outcome = verify_cover(&e, &classes, window)?;
            let names: Vec<String> = classes.iter().map(|c| c.to_string()).collect();
            emit(format, output::verify_value(&e.to_string(), &names, &outcome));
            Ok(match outcome {
                VerifyOutcome::Failed { .. } => ExitCode::from(1),
                _ => ExitCode::SUCCESS,
            })
        }
        Cmd::GreedyCover {
            expr,
            moduli,
            window,
        } => {
            let e = parse_expr(&expr)?;
            let moduli = parse_u64_list(&moduli)?;
            let cert = greedy_cover(&e, &moduli, window)?;
            let classes: Vec<String> = cert.classes.iter().map(|c| c.to_string()).collect();
            emit(
                format,
                serde_json::json!({
                    "command": "greedy-cover",
                    "expr": e.to_string(),
                    "classes": classes,
                    "weight": cert.weight.to_string(),
                    "weight_real": output::real(cert.weight.to_f64()),
                    "status": "window-checked",
                    "window": window,
                }),
            );
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Niven {
            expr,
            primes,
            system,
            max_n,
            window,
            tolerance,
        } => {
            let e = parse_expr(&expr)?;
            let primes = parse_primes(&primes)?;
            let tol = parse_rat(&tolerance)?;
            let rep = check::niven_check(&e, &primes, &system.0, max_n, window, tol)?;
            emit(format, output::check_value("niven", &rep));
            Ok(check_exit(rep.verdict))
        }
        Cmd::CheckSigma {
            exprs,
            balpha,
            digits,
            scaled,
            scales,
            system,
            max_n,
            k_max,
            window,
        } => {
            let rep = match (&balpha, &scales) {
                (Some(arg), _) if scaled => {
                    let (d, truncated) = balpha_digits(arg, digits)?;
                    let spec = ScaledUnionSpec::balpha(&d, truncated)?;
                    check::scaled_union_check(&spec, &system.0, max_n, window)?
                }
                (Some(arg), _) => {
                    let (d, _) = balpha_digits(arg, digits)?;
                    let parts = SetExpr::balpha_parts(&d);
                    check::weak_sigma_check(&parts, &system.0, max_n, k_max, window)?
                }
                (None, Some(scale_list)) => {
                    let scales = parse_u64_list(scale_list)?;
                    let parts = exprs
                        .iter()
                        .map(|t| parse_expr(t).map_err(Into::into))
                        .collect::<anyhow::Result<Vec<_>>>()?;
                    if parts.is_empty() {
                        bail!("scaled check needs part expressions");
                    }
                    let spec = ScaledUnionSpec::new(scales, parts, false)?;
                    check::scaled_union_check(&spec, &system.0, max_n, window)?
                }
                (None, None) => {
                    let parts = exprs
                        .iter()
                        .map(|t| parse_expr(t).map_err(Into::into))
                        .collect::<anyhow::Result<Vec<_>>>()?;
                    if parts.is_empty() {
                        bail!("check-sigma needs part expressions or --balpha");
                    }
                    if scaled {
                        bail!("--scaled needs --balpha or --scales");
                    }
                    check::weak_sigma_check(&parts, &system.0, max_n, k_max, window)?
                }
            };
            emit(format, output::check_value("check-sigma", &rep));
            Ok(check_exit(rep.verdict))
        }
        Cmd::CheckAlexander {
            exprs,
            bounds,
            balpha,
            digits,
            system,
            max_n,
            window,
        } => {
            let (parts, bounds) = match &balpha {
                Some(arg) => {
                    let (d, _) = balpha_digits(arg, digits)?;
                    let parts = SetExpr::balpha_parts(&d);
                    let bounds: Vec<Rat> = SetExpr::balpha_positions(&d)
                        .iter()
                        .map(|&nk| Rat::new(1, 1u64 << nk).map_err(Into::into))
                        .collect::<anyhow::Result<_>>()?;
                    (parts, bounds)
                }
                None => {
                    let parts = exprs
                        .iter()
                        .map(|t| parse_expr(t).map_err(Into::into))
                        .collect::<anyhow::Result<Vec<_>>>()?;
                    let bounds = parse_rat_list(
                        bounds
                            .as_deref()
                            .ok_or_else(|| anyhow!("--bounds required without --balpha"))?,
                    )?;
                    (parts, bounds)
                }
            };
            let rep = check::alexander_check(&parts, &bounds, &system.0, max_n, window)?;
            emit(format, output::check_value("check-alexander", &rep));
            Ok(check_exit(rep.verdict))
        }
        Cmd::CheckRt {
            t_list,
            primes,
            window,
        } => {
            let ts: Vec<u32> = t_list
                .split(',')
                .map(|t| t.trim().parse::<u32>().map_err(Into::into))
                .collect::<anyhow::Result<_>>()?;
            let primes = parse_primes(&primes)?;
            let rep =
                check::rt_inclusion_check(&ts, &primes, buckdens::default_rt_primes(), window)?;
            emit(format, output::check_value("check-rt", &rep));
            Ok(check_exit(rep.verdict))
        }
        Cmd::CheckTaudiv {
            s_max,
            system,
            max_n,
            window,
        } => {
            let rep = check::taudiv_bound_report(s_max, &system.0, max_n, window)?;
            emit(format, output::check_value("check-taudiv", &rep));
            Ok(check_exit(rep.verdict))
        }
        Cmd::Tabulate {
            expr,
            system,
            max_n,
            mode,
            window,
        } => {
            let e = parse_expr(&expr)?;
            let rep = mu_estimate(&e, &system.0, max_n, mode_of(mode), window)?;
            print!("{}", output::density_csv(&rep));
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
