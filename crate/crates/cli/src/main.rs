//! Batch command-line front end: invariant computation, universe
//! enumeration, census counts, verification suites, batch transfer, and the
//! dominance Hasse diagram.
//!
//! Data goes to stdout, diagnostics to stderr. Exit codes: 0 success, 1 any
//! failed verification or data error, 2 usage error.

use std::fs;
use std::io::{self, BufWriter, Write};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde_json::json;

use segcalc_core::arith;
use segcalc_core::arith::PrimePair;
use segcalc_core::census::{
    build_universe, census_by_w, speh_transport, tuple_from_json_line, tuple_to_json_line,
    w_values, UniverseConfig,
};
use segcalc_core::cuspidal::{epsilon, omega, t_of, wc_admissible, Level};
use segcalc_core::identity_suite::{
    bigebra_report, conjecture77_cases, conjecture77_report, mackey_expected_terms,
    mackey_report, random_unitriangular, unitriangular_inverse, unitriangular_kernel_trivial,
    unitriangular_solve, y_count, y_count_expected, CheckOutcome,
};
use segcalc_core::jl_transfer::{infer_partner_w, transfer, transfer_to_json};
use segcalc_core::multisegment::{partition_dominance_leq, partitions_of};

#[derive(Parser)]
#[command(name = "segcalc", version, about = "exact segment calculus and congruence counting")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the derived invariants eps, omega, w, c, t for one record
    Invariants(InvariantsArgs),
    /// Build a universe from a config file and emit its tuples as JSON lines
    Enumerate(EnumerateArgs),
    /// Count congruence classes per (w, j) cell of a universe
    Census(CensusArgs),
    /// Run a verification suite, one JSON line per case
    Verify(VerifyArgs),
    /// Batch-transfer the records of a universe file
    Transfer(TransferArgs),
    /// Print the dominance Hasse diagram of the partitions of n
    Hasse(HasseArgs),
}

#[derive(Args)]
struct InvariantsArgs {
    #[arg(long)]
    q: u64,
    #[arg(long)]
    ell: u64,
    /// Torsion number of the ℓ-adic record
    #[arg(long)]
    n: u64,
    /// Shift of the ℓ-adic record
    #[arg(long, default_value_t = 1)]
    s: u64,
    /// Supercuspidal-support size
    #[arg(long, default_value_t = 1)]
    k: u64,
    /// Length of the reduction
    #[arg(long, default_value_t = 1)]
    a: u64,
}

/// Flag overrides for the config file keys of the same names.
#[derive(Args)]
struct ConfigOverrides {
    #[arg(long)]
    q: Option<u64>,
    #[arg(long)]
    ell: Option<u64>,
    #[arg(long = "m_max")]
    m_max: Option<u64>,
    #[arg(long)]
    d: Option<u64>,
    #[arg(long = "n_max")]
    n_max: Option<u64>,
    #[arg(long = "s_max")]
    s_max: Option<u64>,
    #[arg(long = "k_max")]
    k_max: Option<u64>,
    #[arg(long = "u_max")]
    u_max: Option<u32>,
    /// Comma-separated level grid
    #[arg(long)]
    levels: Option<String>,
    /// Comma-separated endo-class labels
    #[arg(long)]
    endo: Option<String>,
}

impl ConfigOverrides {
    fn apply(&self, config: &mut UniverseConfig) -> Result<(), String> {
        if let Some(q) = self.q {
            config.q = q;
        }
        if let Some(ell) = self.ell {
            config.ell = ell;
        }
        if let Some(m) = self.m_max {
            config.m_max = m;
        }
        if let Some(d) = self.d {
            config.d = Some(d);
        }
        if let Some(n) = self.n_max {
            config.n_max = n;
        }
        if let Some(s) = self.s_max {
            config.s_max = s;
        }
        if let Some(k) = self.k_max {
            config.k_max = k;
        }
        if let Some(u) = self.u_max {
            config.u_max = u;
        }
        if let Some(levels) = &self.levels {
            let mut parsed = levels
                .split(',')
                .map(|v| v.trim().parse::<Level>().map_err(|e| e.to_string()))
                .collect::<Result<Vec<_>, _>>()?;
            parsed.sort();
            parsed.dedup();
            config.levels = parsed;
        }
        if let Some(endo) = &self.endo {
            let mut parsed: Vec<String> = endo.split(',').map(|v| v.trim().to_string()).collect();
            parsed.sort();
            parsed.dedup();
            config.endo = parsed;
        }
        Ok(())
    }
}

#[derive(Args)]
struct EnumerateArgs {
    /// key=value config file
    #[arg(long)]
    config: String,
    /// Write JSON lines here instead of stdout
    #[arg(long)]
    out: Option<String>,
    #[command(flatten)]
    overrides: ConfigOverrides,
}

#[derive(Args)]
struct CensusArgs {
    #[arg(long)]
    config: String,
    /// Restrict to one w value
    #[arg(long)]
    w: Option<u64>,
    /// Level cap j; defaults to every level in the config grid
    #[arg(long)]
    j: Option<String>,
    #[command(flatten)]
    overrides: ConfigOverrides,
}

#[derive(Args)]
struct VerifyArgs {
    /// Suite: mackey, ycount, unitriangular, conjecture77, lemma57, tof,
    /// bigebra, or all
    suite: String,
    #[arg(long, default_value_t = 4)]
    bmax: u64,
    #[arg(long)]
    nmax: Option<u64>,
    #[arg(long, default_value_t = 4)]
    amax: u64,
    #[arg(long, default_value_t = 4)]
    smax: u64,
    #[arg(long, default_value_t = 12)]
    emax: u64,
    #[arg(long, default_value_t = 36)]
    kmax: u64,
    #[arg(long, default_value_t = 64)]
    wmax: u64,
    #[arg(long, default_value_t = 6)]
    vmax: u32,
    /// Comma-separated primes
    #[arg(long)]
    ells: Option<String>,
    #[arg(long, default_value_t = 100)]
    cases: u64,
    #[arg(long, default_value_t = 31)]
    seed: u64,
}

#[derive(Args)]
struct TransferArgs {
    /// JSON-lines universe file produced by `enumerate`
    #[arg(long)]
    universe: String,
    /// Transport each record at every multiplicity 1..=rmax
    #[arg(long, default_value_t = 1)]
    rmax: u64,
}

#[derive(Args)]
struct HasseArgs {
    n: u64,
}

fn main() -> ExitCode {
    if let Ok(value) = std::env::var("SEGCALC_THREADS") {
        match value.parse::<usize>() {
            Ok(threads) if threads >= 1 => {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(threads)
                    .build_global();
            }
            _ => {
                eprintln!("error: SEGCALC_THREADS must be a positive integer");
                return ExitCode::from(2);
            }
        }
    }
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Invariants(args) => run_invariants(&args),
        Command::Enumerate(args) => run_enumerate(&args),
        Command::Census(args) => run_census(&args),
        Command::Verify(args) => run_verify(&args),
        Command::Transfer(args) => run_transfer(&args),
        Command::Hasse(args) => run_hasse(&args),
    };
    ExitCode::from(code)
}

fn fail(message: impl std::fmt::Display) -> u8 {
    eprintln!("error: {message}");
    1
}

fn run_invariants(args: &InvariantsArgs) -> u8 {
    let pair = match PrimePair::new(args.q, args.ell) {
        Ok(p) => p,
        Err(e) => return fail(e),
    };
    if args.n == 0 || args.s == 0 || args.k == 0 || args.a == 0 {
        return fail("parameters must be >= 1");
    }
    if args.n % args.a != 0 {
        return fail(format!("a = {} must divide n = {}", args.a, args.n));
    }
    let n_mod = arith::prime_to_ell_part(args.n / args.a, args.ell);
    let shift_mod = args.a * args.s;
    let eps = epsilon(pair, n_mod);
    let om = omega(pair, n_mod, shift_mod);
    let w = args.k * args.a;
    let c = arith::c_value(pair, args.n);
    let t = match t_of(w, c, args.ell) {
        Ok(t) => t,
        Err(e) => return fail(e),
    };
    println!(
        "a={} n_mod={n_mod} shift_mod={shift_mod} eps={eps} omega={om} w={w} c={c} t={t}",
        args.a
    );
    0
}

fn read_config(path: &str) -> Result<UniverseConfig, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("cannot read {path}: {e}"))?;
    UniverseConfig::parse(&text).map_err(|e| e.to_string())
}

fn run_enumerate(args: &EnumerateArgs) -> u8 {
    let mut config = match read_config(&args.config) {
        Ok(c) => c,
        Err(e) => return fail(e),
    };
    if let Err(e) = args.overrides.apply(&mut config) {
        return fail(e);
    }
    let universe = match build_universe(&config) {
        Ok(u) => u,
        Err(e) => return fail(e),
    };
    for rejection in &universe.rejections {
        eprintln!("reject: {} ({})", rejection.record, rejection.reason);
    }
    eprintln!(
        "enumerated {} tuples, rejected {} candidates",
        universe.tuples.len(),
        universe.rejections.len()
    );
    let mut lines = String::new();
    for tuple in &universe.tuples {
        lines.push_str(&tuple_to_json_line(tuple));
        lines.push('\n');
    }
    match &args.out {
        Some(path) => {
            if let Err(e) = fs::write(path, lines) {
                return fail(format!("cannot write {path}: {e}"));
            }
        }
        None => {
            let stdout = io::stdout();
            let mut out = BufWriter::new(stdout.lock());
            if out.write_all(lines.as_bytes()).is_err() {
                return 1;
            }
        }
    }
    0
}

fn run_census(args: &CensusArgs) -> u8 {
    let mut config = match read_config(&args.config) {
        Ok(c) => c,
        Err(e) => return fail(e),
    };
    if let Err(e) = args.overrides.apply(&mut config) {
        return fail(e);
    }
    let universe = match build_universe(&config) {
        Ok(u) => u,
        Err(e) => return fail(e),
    };
    let caps: Vec<Level> = match &args.j {
        Some(text) => match text.parse::<Level>() {
            Ok(level) => vec![level],
            Err(e) => return fail(e),
        },
        None => config.levels.clone(),
    };
    let ws: Vec<u64> = match args.w {
        Some(w) => vec![w],
        None => w_values(&universe),
    };
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    for &w in &ws {
        for &j in &caps {
            let cell = census_by_w(&universe, w, j);
            let line = json!({
                "w": w,
                "j": j.to_string(),
                "count": cell.count(),
            });
            if writeln!(out, "{line}").is_err() {
                return 1;
            }
        }
    }
    0
}

fn parse_ells(text: &Option<String>, default: &[u64]) -> Result<Vec<u64>, String> {
    match text {
        None => Ok(default.to_vec()),
        Some(t) => t
            .split(',')
            .map(|piece| {
                let ell: u64 = piece
                    .trim()
                    .parse()
                    .map_err(|_| format!("bad prime '{piece}'"))?;
                if !arith::is_prime(ell) {
                    return Err(format!("{ell} is not prime"));
                }
                Ok(ell)
            })
            .collect(),
    }
}

struct CaseLine {
    check: &'static str,
    params: serde_json::Value,
    pass: bool,
    witness: Option<String>,
}

impl CaseLine {
    fn render(&self) -> String {
        let mut obj = json!({
            "check": self.check,
            "params": self.params,
            "pass": self.pass,
        });
        if let Some(witness) = &self.witness {
            obj["witness"] = json!(witness);
        }
        obj.to_string()
    }
}

fn outcome_line(
    check: &'static str,
    params: serde_json::Value,
    outcome: &CheckOutcome,
) -> CaseLine {
    CaseLine {
        check,
        params,
        pass: outcome.pass,
        witness: outcome.witness.clone(),
    }
}

fn verify_mackey(bmax: u64, nmax: u64) -> Vec<CaseLine> {
    let mut grid = Vec::new();
    for b in 1..=bmax {
        for n in 2..=nmax {
            for k in 1..n {
                grid.push((b, n, k));
            }
        }
    }
    grid.par_iter()
        .map(|&(b, n, k)| {
            let outcome = mackey_report(b, n, k).expect("grid stays in domain");
            let expected = mackey_expected_terms(b, n, k);
            let pass = outcome.pass
                && outcome.lhs_terms as u64 == expected
                && outcome.rhs_terms as u64 == expected;
            CaseLine {
                check: "mackey",
                params: json!({"b": b, "n": n, "k": k}),
                pass,
                witness: outcome.witness.clone(),
            }
        })
        .collect()
}

fn verify_ycount(emax: u64, smax: u64, kmax: u64) -> Vec<CaseLine> {
    let mut lines = Vec::new();
    for e_prime in 1..=emax {
        for s_prime in 1..=smax {
            let e = arith::gcd(e_prime, s_prime);
            for k in 1..=kmax {
                for mult in 0..(e_prime / e) {
                    let delta = (mult * e) as i64;
                    // skip tuples outside the admissible domain
                    let Ok(count) = y_count(e_prime, s_prime, k, delta) else {
                        continue;
                    };
                    let expected = y_count_expected(e_prime, s_prime, k);
                    lines.push(CaseLine {
                        check: "ycount",
                        params: json!({
                            "e_prime": e_prime, "s_prime": s_prime,
                            "k": k, "delta": delta,
                        }),
                        pass: count == expected,
                        witness: (count != expected)
                            .then(|| format!("counted {count}, closed form gives {expected}")),
                    });
                }
            }
        }
    }
    lines
}

fn verify_unitriangular(nmax: u64, cases: u64, seed: u64) -> Vec<CaseLine> {
    let mut lines = Vec::new();
    for n in 1..=nmax {
        for case in 0..cases {
            let matrix = random_unitriangular(n, seed.wrapping_add(n * 7919 + case), 6);
            let size = matrix.size();
            let kernel = unitriangular_kernel_trivial(&matrix);
            let rhs: Vec<i64> = (0..size as i64).map(|i| (i * 13 % 17) - 8).collect();
            let solution = unitriangular_solve(&matrix, &rhs);
            let solve_ok = (0..size).all(|i| {
                (0..size)
                    .map(|j| matrix.entry(i, j) * solution[j])
                    .sum::<i64>()
                    == rhs[i]
            });
            let inverse = unitriangular_inverse(&matrix);
            let inverse_ok = matrix
                .mul(&inverse)
                .map(|p| p.is_identity())
                .unwrap_or(false);
            let pass = kernel && solve_ok && inverse_ok;
            lines.push(CaseLine {
                check: "unitriangular",
                params: json!({"n": n, "case": case}),
                pass,
                witness: (!pass)
                    .then(|| format!("kernel={kernel} solve={solve_ok} inverse={inverse_ok}")),
            });
        }
    }
    lines
}

fn verify_conjecture77(amax: u64, nmax: u64, smax: u64, ells: &[u64]) -> Vec<CaseLine> {
    let cases = conjecture77_cases(amax, nmax, smax, ells);
    cases
        .par_iter()
        .map(|&(a, n, s_tilde, eps, ell)| {
            let outcome = conjecture77_report(a, n, s_tilde, eps, ell)
                .expect("enumerated cases stay in domain");
            outcome_line(
                "conjecture77",
                json!({"a": a, "n": n, "s_tilde": s_tilde, "eps": eps, "ell": ell}),
                &outcome,
            )
        })
        .collect()
}

fn verify_lemma57(wmax: u64, vmax: u32, ells: &[u64]) -> Vec<CaseLine> {
    let mut lines = Vec::new();
    for &ell in ells {
        for v in 0..=vmax {
            let c = ell.pow(v);
            let mut tested = 0u64;
            for w in 1..=wmax {
                if !wc_admissible(w, c, ell) {
                    continue;
                }
                tested += 1;
                let result = infer_partner_w(w, c, ell);
                lines.push(CaseLine {
                    check: "lemma57",
                    params: json!({"w": w, "c": c, "ell": ell}),
                    pass: result == Ok(w),
                    witness: result.err().map(|e| e.to_string()),
                });
            }
            eprintln!("lemma57: ell={ell} c={c} tested {tested} w values");
        }
    }
    lines
}

fn verify_tof(wmax: u64, vmax: u32, ells: &[u64]) -> Vec<CaseLine> {
    let mut lines = Vec::new();
    for &ell in ells {
        for v in 0..=vmax {
            let c = ell.pow(v);
            for w in 1..=wmax {
                if !wc_admissible(w, c, ell) {
                    continue;
                }
                let result = t_of(w, c, ell);
                lines.push(CaseLine {
                    check: "tof",
                    params: json!({"w": w, "c": c, "ell": ell}),
                    pass: matches!(result, Ok(t) if t >= 1),
                    witness: result.err().map(|e| e.to_string()),
                });
            }
        }
    }
    lines
}

fn verify_bigebra(nmax: u64, cases: u64, seed: u64) -> Vec<CaseLine> {
    let outcome = bigebra_report(nmax, cases, seed);
    vec![outcome_line(
        "bigebra",
        json!({"nmax": nmax, "random_cases": cases, "seed": seed}),
        &outcome,
    )]
}

fn run_verify(args: &VerifyArgs) -> u8 {
    let suites: Vec<&str> = match args.suite.as_str() {
        "all" => vec![
            "mackey",
            "ycount",
            "unitriangular",
            "conjecture77",
            "lemma57",
            "tof",
            "bigebra",
        ],
        other => vec![other],
    };
    let mut lines = Vec::new();
    for suite in suites {
        let batch = match suite {
            "mackey" => verify_mackey(args.bmax, args.nmax.unwrap_or(8)),
            "ycount" => verify_ycount(args.emax, args.emax, args.kmax),
            "unitriangular" => {
                verify_unitriangular(args.nmax.unwrap_or(6), args.cases, args.seed)
            }
            "conjecture77" => {
                let ells = match parse_ells(&args.ells, &[3, 5, 7]) {
                    Ok(e) => e,
                    Err(e) => return fail(e),
                };
                verify_conjecture77(args.amax, args.nmax.unwrap_or(5), args.smax, &ells)
            }
            "lemma57" => {
                let ells = match parse_ells(&args.ells, &[2, 3, 5, 7, 11, 13]) {
                    Ok(e) => e,
                    Err(e) => return fail(e),
                };
                verify_lemma57(args.wmax, args.vmax, &ells)
            }
            "tof" => {
                let ells = match parse_ells(&args.ells, &[2, 3, 5, 7, 11, 13]) {
                    Ok(e) => e,
                    Err(e) => return fail(e),
                };
                verify_tof(args.wmax, args.vmax, &ells)
            }
            "bigebra" => verify_bigebra(args.nmax.unwrap_or(6), args.cases.max(200), args.seed),
            other => {
                eprintln!("error: unknown suite '{other}'");
                return 2;
            }
        };
        lines.extend(batch);
    }
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    let mut failures = 0usize;
    for line in &lines {
        if !line.pass {
            failures += 1;
        }
        if writeln!(out, "{}", line.render()).is_err() {
            return 1;
        }
    }
    drop(out);
    eprintln!("verify: {} cases, {} failures", lines.len(), failures);
    u8::from(failures > 0)
}

fn run_transfer(args: &TransferArgs) -> u8 {
    let text = match fs::read_to_string(&args.universe) {
        Ok(t) => t,
        Err(e) => return fail(format!("cannot read {}: {e}", args.universe)),
    };
    if args.rmax == 0 {
        return fail("rmax must be >= 1");
    }
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let tuple = match tuple_from_json_line(line) {
            Ok(t) => t,
            Err(e) => return fail(format!("line {}: {e}", lineno + 1)),
        };
        for r in 1..=args.rmax {
            let record = speh_transport(&tuple, r);
            match transfer(&record) {
                Ok(result) => {
                    if writeln!(out, "{}", transfer_to_json(&result)).is_err() {
                        return 1;
                    }
                }
                Err(e) => return fail(format!("line {}: {e}", lineno + 1)),
            }
        }
    }
    0
}

fn run_hasse(args: &HasseArgs) -> u8 {
    let mut sorted = partitions_of(args.n);
    sorted.sort_by_key(|p| p.partial_sums(args.n as usize));
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    for lower in &sorted {
        for upper in &sorted {
            if lower == upper || !partition_dominance_leq(lower, upper) {
                continue;
            }
            // cover relation: nothing strictly between
            let covered = sorted.iter().any(|mid| {
                mid != lower
                    && mid != upper
                    && partition_dominance_leq(lower, mid)
                    && partition_dominance_leq(mid, upper)
            });
            if !covered && writeln!(out, "{lower} -> {upper}").is_err() {
                return 1;
            }
        }
    }
    0
}
