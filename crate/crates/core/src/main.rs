use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use patternsieve::admissible::{find_admissible, minimal_diameter_subset, AdmissibleTuple, Strategy};
use patternsieve::arith::{is_prime, parse_rational};
use patternsieve::config::{load_config, EffectiveConfig};
use patternsieve::error::{Error, Result};
use patternsieve::report::{
    ap_row, aps_meta, hit_row, hits_meta, rough_value, s1p_row, subset_row, subsets_meta,
    sums_value, tp_value, tuple_value, variational_value, Format, Report, AP_COLUMNS, HIT_COLUMNS,
    S1P_COLUMNS, SUBSET_COLUMNS,
};
use patternsieve::scanner::{count_pattern_subsets, find_pattern_aps, find_pattern_hits, scan_rough};
use patternsieve::sums::{lemma1_constant, run_sums, s1p_record, tp_quadratic_form, window_sums};
use patternsieve::variational::{combine_basis, optimize_mk, symmetric_basis};
use patternsieve::weights::{build_params, exact_context, float_context, SieveParams, WeightContext};

#[derive(Parser)]
#[command(
    name = "patternsieve",
    version,
    about = "Admissible tuples, sieve weight diagnostics, and prime pattern scans"
)]
struct Cli {
    /// Config file (default: $PATTERNSIEVE_CONFIG if set).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Report format: json, jsonl, or csv.
    #[arg(long, global = true, default_value = "json")]
    format: String,
    /// Write the report to this file instead of standard output.
    #[arg(long, global = true, value_name = "PATH")]
    output: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Omit the timestamp so repeated runs are byte-identical.
    #[arg(long, global = true)]
    no_timestamp: bool,
    #[command(subcommand)]
    command: Cmd,
}

/// Overrides for the config-file keys; command line wins over file over
/// defaults.
#[derive(Args, Clone, Default)]
struct ParamArgs {
    /// Tuple offsets, comma separated.
    #[arg(long, value_delimiter = ',')]
    tuple: Option<Vec<u64>>,
    /// Tuple size, used by commands that do not take explicit offsets.
    #[arg(long)]
    k: Option<usize>,
    /// Window scale N.
    #[arg(long)]
    n: Option<u64>,
    /// Level of distribution, as a fraction or decimal.
    #[arg(long)]
    theta: Option<String>,
    /// Deduction from theta/2 in the exponent of R.
    #[arg(long)]
    epsilon: Option<String>,
    /// Primes up to D0 make up the presieve modulus W.
    #[arg(long)]
    d0: Option<u64>,
    /// Roughness exponent c1.
    #[arg(long)]
    c1: Option<String>,
    /// Basis family level for the sieve polynomial F.
    #[arg(long)]
    degree: Option<usize>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check, construct, and shrink admissible tuples.
    Admissible {
        #[command(subcommand)]
        cmd: AdmissibleCmd,
    },
    /// Optimize the variational bound M_k.
    Mk {
        #[command(subcommand)]
        cmd: MkCmd,
    },
    /// Measure weighted sums over windows.
    Sums {
        #[command(subcommand)]
        cmd: SumsCmd,
    },
    /// Scan for rough members, pattern hits, progressions, and subsets.
    Scan {
        #[command(subcommand)]
        cmd: ScanCmd,
    },
}

#[derive(Subcommand)]
enum AdmissibleCmd {
    /// Verdict for one tuple; exits 1 when inadmissible.
    Check {
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Construct an admissible tuple of a given size.
    Find {
        #[command(flatten)]
        params: ParamArgs,
        /// greedy or exhaustive.
        #[arg(long, default_value = "greedy")]
        strategy: String,
        /// Offset search ceiling.
        #[arg(long, default_value_t = 50_000)]
        h_cap: u64,
    },
    /// Minimal-diameter m-subset of a tuple.
    Subset {
        #[command(flatten)]
        params: ParamArgs,
        /// Subset size.
        #[arg(long)]
        m: usize,
    },
}

#[derive(Subcommand)]
enum MkCmd {
    /// Maximize the Rayleigh quotient over the polynomial basis.
    Optimize {
        #[command(flatten)]
        params: ParamArgs,
    },
}

#[derive(Subcommand)]
enum SumsCmd {
    /// All window sums with main-term predictions.
    Run {
        #[command(flatten)]
        params: ParamArgs,
        /// Window start (default N).
        #[arg(long)]
        lo: Option<u64>,
        /// Window end, exclusive (default 2N).
        #[arg(long)]
        hi: Option<u64>,
        /// Prime-count threshold for the hit counter (default: optimizer r_k).
        #[arg(long)]
        rk: Option<u64>,
        /// Override the support bound R.
        #[arg(long)]
        r: Option<f64>,
    },
    /// Fitted smooth-part constant over [N,2N) and [2N,4N); exits 1 when the
    /// two fits differ by more than 1.5x.
    Lemma1 {
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Per-prime divisibility slices against the tail bound.
    Lemma2 {
        #[command(flatten)]
        params: ParamArgs,
        /// How many primes above D0 to check.
        #[arg(long, default_value_t = 10)]
        primes: usize,
        /// Distinguished coordinate, 1-based.
        #[arg(long, default_value_t = 1)]
        coord: usize,
        /// Window start (default N).
        #[arg(long)]
        lo: Option<u64>,
        /// Window end, exclusive (default 2N).
        #[arg(long)]
        hi: Option<u64>,
    },
    /// Exact twisted diagonalization identity; exits 1 on any mismatch.
    TpIdentity {
        #[command(flatten)]
        params: ParamArgs,
        /// Override the support bound R.
        #[arg(long)]
        r: Option<f64>,
        /// Primes to check (default: all primes strictly between D0 and R).
        #[arg(long, value_delimiter = ',')]
        p: Option<Vec<u64>>,
    },
}

#[derive(Subcommand)]
enum ScanCmd {
    /// Count residue-class members whose whole tuple is rough.
    Rough {
        #[command(flatten)]
        params: ParamArgs,
        /// Scan bound.
        #[arg(long)]
        x: u64,
    },
    /// List pattern hits in an inclusive range.
    Hits {
        #[command(flatten)]
        params: ParamArgs,
        /// Pattern offsets (default: the effective tuple).
        #[arg(long, value_delimiter = ',')]
        offsets: Option<Vec<u64>>,
        #[arg(long)]
        lo: u64,
        #[arg(long)]
        hi: u64,
        /// Keep only hits whose translates are consecutive primes.
        #[arg(long)]
        consecutive: bool,
        /// Offsets that must land on non-primes.
        #[arg(long, value_delimiter = ',')]
        exclude: Option<Vec<u64>>,
        /// Attach the whole-tuple roughness flag.
        #[arg(long)]
        rough: bool,
    },
    /// Arithmetic progressions inside the hit set.
    Aps {
        #[command(flatten)]
        params: ParamArgs,
        /// Pattern offsets (default: the effective tuple).
        #[arg(long, value_delimiter = ',')]
        offsets: Option<Vec<u64>>,
        /// Progression length.
        #[arg(long)]
        ell: usize,
        /// Scan bound.
        #[arg(long)]
        x: u64,
        #[arg(long)]
        consecutive: bool,
    },
    /// Count m-subsets of a base set with a progression witness.
    Subsets {
        #[command(flatten)]
        params: ParamArgs,
        /// Base offset set, comma separated.
        #[arg(long, value_delimiter = ',')]
        base: Vec<u64>,
        /// Subset size.
        #[arg(long)]
        m: usize,
        /// Progression length.
        #[arg(long)]
        ell: usize,
        /// Scan bound.
        #[arg(long)]
        x: u64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(error_code(&e))
        }
    }
}

/// 1 = negative mathematical verdict, 2 = unusable request.
fn error_code(e: &Error) -> u8 {
    match e {
        Error::TupleNotFound { .. }
        | Error::NoValidResidue { .. }
        | Error::DegenerateBasis
        | Error::DegenerateF => 1,
        _ => 2,
    }
}

fn run(cli: &Cli) -> Result<u8> {
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(Error::InvalidParams("thread count must be positive".to_string()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .ok();
    }
    let format: Format = cli.format.parse()?;
    let (report, code) = dispatch(cli)?;
    let text = report.render(format);
    match &cli.output {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(code)
}

fn effective(cli: &Cli, args: &ParamArgs) -> Result<EffectiveConfig> {
    let mut eff = EffectiveConfig::defaults();
    eff.apply(&load_config(cli.config.as_deref())?);
    if let Some(v) = args.k {
        eff.k = v;
    }
    if let Some(v) = &args.tuple {
        eff.tuple = v.clone();
    }
    if let Some(v) = args.n {
        eff.n = v;
    }
    if let Some(v) = &args.theta {
        eff.theta = parse_rational(v)?;
    }
    if let Some(v) = &args.epsilon {
        eff.epsilon = parse_rational(v)?;
    }
    if let Some(v) = args.d0 {
        eff.d0 = v;
    }
    if let Some(v) = &args.c1 {
        eff.c1 = parse_rational(v)?;
    }
    if let Some(v) = args.degree {
        eff.f_degree = v;
    }
    Ok(eff)
}

fn new_report(cli: &Cli, command: &str, eff: &EffectiveConfig) -> Report {
    Report::new(command, &eff.render(), !cli.no_timestamp)
}

fn sieve_params(eff: &EffectiveConfig) -> Result<SieveParams> {
    build_params(
        AdmissibleTuple::new(eff.tuple.clone())?,
        eff.n,
        eff.theta.clone(),
        eff.epsilon.clone(),
        eff.d0,
        eff.c1.clone(),
    )
}

/// Optimize F at the configured level and build the float weight context.
fn weight_context(eff: &EffectiveConfig, r_override: Option<f64>) -> Result<(WeightContext<f64>, u64)> {
    let k = eff.tuple.len();
    let opt = optimize_mk(k, eff.f_degree as u32, &eff.theta)?;
    let basis = symmetric_basis(eff.f_degree as u32);
    let f = combine_basis(&basis, &opt.coefficients).to_polyf(k);
    let mut params = sieve_params(eff)?;
    if let Some(r) = r_override {
        if r <= 1.0 {
            return Err(Error::InvalidParams("R override must exceed 1".to_string()));
        }
        params.r = r;
    }
    Ok((float_context(params, f)?, opt.r_k))
}

fn dispatch(cli: &Cli) -> Result<(Report, u8)> {
    match &cli.command {
        Cmd::Admissible { cmd } => match cmd {
            AdmissibleCmd::Check { params } => {
                let eff = effective(cli, params)?;
                let tuple = AdmissibleTuple::new(eff.tuple.clone())?;
                let verdict = tuple.verdict();
                let mut rep = new_report(cli, "admissible check", &eff);
                rep.set("tuple", tuple_value(&tuple));
                Ok((rep, u8::from(!verdict.admissible)))
            }
            AdmissibleCmd::Find {
                params,
                strategy,
                h_cap,
            } => {
                let eff = effective(cli, params)?;
                let strat = match strategy.as_str() {
                    "greedy" => Strategy::GreedySieve,
                    "exhaustive" => Strategy::ExhaustiveMinDiameter,
                    other => {
                        return Err(Error::InvalidParams(format!(
                            "unknown strategy {other:?}; expected greedy or exhaustive"
                        )))
                    }
                };
                let tuple = find_admissible(eff.k, strat, *h_cap)?;
                let mut rep = new_report(cli, "admissible find", &eff);
                rep.set("strategy", json!(strategy));
                rep.set("tuple", tuple_value(&tuple));
                Ok((rep, 0))
            }
            AdmissibleCmd::Subset { params, m } => {
                let eff = effective(cli, params)?;
                let tuple = AdmissibleTuple::new(eff.tuple.clone())?;
                let subset = minimal_diameter_subset(&tuple, *m)?;
                let mut rep = new_report(cli, "admissible subset", &eff);
                rep.set("base", tuple_value(&tuple));
                rep.set("subset", tuple_value(&subset));
                Ok((rep, 0))
            }
        },
        Cmd::Mk { cmd } => match cmd {
            MkCmd::Optimize { params } => {
                let eff = effective(cli, params)?;
                let result = optimize_mk(eff.k, eff.f_degree as u32, &eff.theta)?;
                let mut rep = new_report(cli, "mk optimize", &eff);
                rep.set("result", variational_value(&result));
                Ok((rep, 0))
            }
        },
        Cmd::Sums { cmd } => match cmd {
            SumsCmd::Run {
                params,
                lo,
                hi,
                rk,
                r,
            } => {
                let eff = effective(cli, params)?;
                let (ctx, opt_rk) = weight_context(&eff, *r)?;
                let lo = lo.unwrap_or(eff.n);
                let hi = hi.unwrap_or(eff.n.saturating_mul(2));
                let rk = rk.unwrap_or(opt_rk);
                let result = run_sums(&ctx, lo, hi, rk)?;
                let mut rep = new_report(cli, "sums run", &eff);
                rep.set("sums", sums_value(&result));
                rep.set("lemma1_constant", json!(lemma1_constant(&ctx, &result.sums)));
                Ok((rep, 0))
            }
            SumsCmd::Lemma1 { params } => {
                let eff = effective(cli, params)?;
                let (ctx, opt_rk) = weight_context(&eff, None)?;
                let n = eff.n;
                let first = window_sums(&ctx, n, n.saturating_mul(2), opt_rk)?;
                let second = window_sums(
                    &ctx,
                    n.saturating_mul(2),
                    n.saturating_mul(4),
                    opt_rk,
                )?;
                let c_first = lemma1_constant(&ctx, &first);
                let c_second = lemma1_constant(&ctx, &second);
                let stable = if c_first == 0.0 && c_second == 0.0 {
                    true
                } else if c_first == 0.0 || c_second == 0.0 {
                    false
                } else {
                    let ratio = (c_first / c_second).max(c_second / c_first);
                    ratio <= 1.5
                };
                let mut rep = new_report(cli, "sums lemma1", &eff);
                rep.set(
                    "windows",
                    json!([
                        {"lo": n, "hi": 2 * n, "s1": first.s1, "s1_minus": first.s1_minus,
                         "fitted_constant": c_first},
                        {"lo": 2 * n, "hi": 4 * n, "s1": second.s1, "s1_minus": second.s1_minus,
                         "fitted_constant": c_second},
                    ]),
                );
                rep.set("stable_within_1_5x", json!(stable));
                Ok((rep, u8::from(!stable)))
            }
            SumsCmd::Lemma2 {
                params,
                primes,
                coord,
                lo,
                hi,
            } => {
                let eff = effective(cli, params)?;
                let (ctx, opt_rk) = weight_context(&eff, None)?;
                let lo = lo.unwrap_or(eff.n);
                let hi = hi.unwrap_or(eff.n.saturating_mul(2));
                let sums = window_sums(&ctx, lo, hi, opt_rk)?;
                if sums.s1 == 0.0 {
                    return Err(Error::InvalidParams(
                        "window carries no weight; enlarge it".to_string(),
                    ));
                }
                let mut plist = Vec::new();
                let mut p = ctx.params.d0 + 1;
                while plist.len() < *primes {
                    if is_prime(p) {
                        plist.push(p);
                    }
                    p += 1;
                }
                let mut rep = new_report(cli, "sums lemma2", &eff);
                rep.columns = S1P_COLUMNS.to_vec();
                let mut max_ratio = 0.0f64;
                for &p in &plist {
                    let rec = s1p_record(&ctx, lo, hi, p, *coord, sums.s1)?;
                    max_ratio = max_ratio.max(rec.ratio);
                    rep.rows.push(s1p_row(&rec));
                }
                rep.set("lo", json!(lo));
                rep.set("hi", json!(hi));
                rep.set("S1", json!(sums.s1));
                rep.set("max_ratio", json!(max_ratio));
                rep.set("within_budget", json!(max_ratio <= 4.0));
                rep.set("within_soft_budget", json!(max_ratio <= 40.0));
                Ok((rep, u8::from(max_ratio > 40.0)))
            }
            SumsCmd::TpIdentity { params, r, p } => {
                let eff = effective(cli, params)?;
                let k = eff.tuple.len();
                let opt = optimize_mk(k, eff.f_degree as u32, &eff.theta)?;
                let basis = symmetric_basis(eff.f_degree as u32);
                let f = combine_basis(&basis, &opt.coefficients).to_polyf(k);
                let mut sp = sieve_params(&eff)?;
                if let Some(rv) = r {
                    if *rv <= 1.0 {
                        return Err(Error::InvalidParams(
                            "R override must exceed 1".to_string(),
                        ));
                    }
                    sp.r = *rv;
                }
                let r_bound = sp.r;
                let d0 = sp.d0;
                let ctx = exact_context(sp, f)?;
                let lambdas = ctx.engine.nonzero_lambdas().count() as u64;
                if lambdas.saturating_mul(lambdas) > 4_000_000 {
                    return Err(Error::InvalidParams(format!(
                        "{lambdas} lambda entries make the pair sum too large; reduce R"
                    )));
                }
                let plist: Vec<u64> = match p {
                    Some(list) => list.clone(),
                    None => {
                        let mut v = Vec::new();
                        let mut q = d0 + 1;
                        while (q as f64) < r_bound {
                            if is_prime(q) {
                                v.push(q);
                            }
                            q += 1;
                        }
                        v
                    }
                };
                if plist.is_empty() {
                    return Err(Error::InvalidParams(
                        "no primes strictly between D0 and R".to_string(),
                    ));
                }
                let mut rep = new_report(cli, "sums tp-identity", &eff);
                rep.columns = vec!["p", "lhs", "rhs", "equal"];
                let mut all_equal = true;
                for &q in &plist {
                    let (lhs, rhs) = tp_quadratic_form(&ctx, q)?;
                    all_equal &= lhs == rhs;
                    rep.rows.push(tp_value(q, &lhs, &rhs));
                }
                rep.set("all_equal", json!(all_equal));
                Ok((rep, u8::from(!all_equal)))
            }
        },
        Cmd::Scan { cmd } => match cmd {
            ScanCmd::Rough { params, x } => {
                let eff = effective(cli, params)?;
                let sp = sieve_params(&eff)?;
                let scan = scan_rough(&sp, *x)?;
                let mut rep = new_report(cli, "scan rough", &eff);
                rep.set("rough", rough_value(&scan));
                Ok((rep, 0))
            }
            ScanCmd::Hits {
                params,
                offsets,
                lo,
                hi,
                consecutive,
                exclude,
                rough,
            } => {
                let eff = effective(cli, params)?;
                let pattern = offsets.clone().unwrap_or_else(|| eff.tuple.clone());
                let exclusion = exclude.clone().unwrap_or_default();
                let sp = if *rough { Some(sieve_params(&eff)?) } else { None };
                let scan =
                    find_pattern_hits(&pattern, *lo, *hi, *consecutive, &exclusion, sp.as_ref())?;
                let mut rep = new_report(cli, "scan hits", &eff);
                rep.set("scan", hits_meta(&scan));
                rep.columns = HIT_COLUMNS.to_vec();
                rep.rows = scan.hits.iter().map(hit_row).collect();
                Ok((rep, 0))
            }
            ScanCmd::Aps {
                params,
                offsets,
                ell,
                x,
                consecutive,
            } => {
                let eff = effective(cli, params)?;
                let pattern = offsets.clone().unwrap_or_else(|| eff.tuple.clone());
                let scan = find_pattern_aps(&pattern, *ell, *x, *consecutive)?;
                let mut rep = new_report(cli, "scan aps", &eff);
                rep.set("scan", aps_meta(&scan));
                rep.columns = AP_COLUMNS.to_vec();
                rep.rows = scan.witnesses.iter().map(ap_row).collect();
                Ok((rep, 0))
            }
            ScanCmd::Subsets {
                params,
                base,
                m,
                ell,
                x,
            } => {
                let eff = effective(cli, params)?;
                let scan = count_pattern_subsets(base, *m, *ell, *x)?;
                let mut rep = new_report(cli, "scan subsets", &eff);
                rep.set("scan", subsets_meta(&scan));
                rep.columns = SUBSET_COLUMNS.to_vec();
                rep.rows = scan
                    .records
                    .iter()
                    .map(|r| subset_row(&r.subset, &r.witness))
                    .collect();
                Ok((rep, 0))
            }
        },
    }
}
