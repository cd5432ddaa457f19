//! Exhaustive enumeration of consistent parameter tuples, congruence-class
//! counting, and the Speh-level transport of invariants.
//!
//! The universe is a synthetic model: tuples are parameter records satisfying
//! the constraint system, not actual representations. Counts verify mutual
//! consistency of the formulas, not the representation-theoretic census whose
//! closed form lives outside this crate.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{divisors, ell_valuation, mult_order, prime_to_ell_part, ArithError, PrimePair};
use crate::cuspidal::{
    c_of, epsilon, omega, record_to_kv, t_of, validate_reduction, CuspidalParam, Level,
    ModLReduction,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CensusError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Arith(#[from] ArithError),
    #[error("universe row error: {0}")]
    Row(String),
}

/// Generation bounds for a universe sweep.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UniverseConfig {
    pub q: u64,
    pub ell: u64,
    /// Ambient degree: census cells look at degrees dividing this.
    pub m_max: u64,
    /// Reduced degree of the ambient division algebra; activates the a | d
    /// filter when present.
    pub d: Option<u64>,
    pub n_max: u64,
    pub s_max: u64,
    pub k_max: u64,
    /// Cap on the ℓ-exponent u in the torsion relation n_tors = a·n_mod·ℓ^u.
    pub u_max: u32,
    pub levels: Vec<Level>,
    pub endo: Vec<String>,
}

impl UniverseConfig {
    pub fn new(q: u64, ell: u64, m_max: u64, n_max: u64) -> Self {
        UniverseConfig {
            q,
            ell,
            m_max,
            d: None,
            n_max,
            s_max: 1,
            k_max: m_max,
            u_max: 1,
            levels: vec![Level::zero()],
            endo: vec!["Theta".into()],
        }
    }

    /// Parses the line-oriented `key=value` format; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, CensusError> {
        let mut q = None;
        let mut ell = None;
        let mut m_max = None;
        let mut d = None;
        let mut n_max = None;
        let mut s_max = 1u64;
        let mut k_max = None;
        let mut u_max = 1u32;
        let mut levels = vec![Level::zero()];
        let mut endo = vec!["Theta".to_string()];
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CensusError::Config(format!("line {}: expected key=value", lineno + 1))
            })?;
            let key = key.trim();
            let value = value.trim();
            let parse_u64 = |v: &str| {
                v.parse::<u64>()
                    .map_err(|_| CensusError::Config(format!("bad integer '{v}' for {key}")))
            };
            match key {
                "q" => q = Some(parse_u64(value)?),
                "ell" => ell = Some(parse_u64(value)?),
                "m_max" => m_max = Some(parse_u64(value)?),
                "d" => d = Some(parse_u64(value)?),
                "n_max" => n_max = Some(parse_u64(value)?),
                "s_max" => s_max = parse_u64(value)?,
                "k_max" => k_max = Some(parse_u64(value)?),
                "u_max" => u_max = parse_u64(value)? as u32,
                "levels" => {
                    levels = value
                        .split(',')
                        .map(|v| {
                            v.trim()
                                .parse::<Level>()
                                .map_err(|e| CensusError::Config(e.to_string()))
                        })
                        .collect::<Result<Vec<_>, _>>()?;
                    levels.sort();
                    levels.dedup();
                }
                "endo" => {
                    endo = value.split(',').map(|v| v.trim().to_string()).collect();
                    endo.sort();
                    endo.dedup();
                }
                other => {
                    return Err(CensusError::Config(format!("unknown key '{other}'")));
                }
            }
        }
        let q = q.ok_or_else(|| CensusError::Config("missing key 'q'".into()))?;
        let ell = ell.ok_or_else(|| CensusError::Config("missing key 'ell'".into()))?;
        let m_max = m_max.ok_or_else(|| CensusError::Config("missing key 'm_max'".into()))?;
        let n_max = n_max.ok_or_else(|| CensusError::Config("missing key 'n_max'".into()))?;
        Ok(UniverseConfig {
            q,
            ell,
            m_max,
            d,
            n_max,
            s_max,
            k_max: k_max.unwrap_or(m_max),
            u_max,
            levels,
            endo,
        })
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("q={}\n", self.q));
        out.push_str(&format!("ell={}\n", self.ell));
        out.push_str(&format!("m_max={}\n", self.m_max));
        if let Some(d) = self.d {
            out.push_str(&format!("d={d}\n"));
        }
        out.push_str(&format!("n_max={}\n", self.n_max));
        out.push_str(&format!("s_max={}\n", self.s_max));
        out.push_str(&format!("k_max={}\n", self.k_max));
        out.push_str(&format!("u_max={}\n", self.u_max));
        let levels: Vec<String> = self.levels.iter().map(|l| l.to_string()).collect();
        out.push_str(&format!("levels={}\n", levels.join(",")));
        out.push_str(&format!("endo={}\n", self.endo.join(",")));
        out
    }
}

/// A parameter tuple accepted into a universe, with its derived invariants.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CensusTuple {
    pub sigma: CuspidalParam,
    pub red: ModLReduction,
    pub omega: u64,
    pub w: u64,
    pub c: u64,
    pub t: u64,
}

/// A candidate the generator refused, with the reason.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rejection {
    pub record: String,
    pub reason: String,
}

#[derive(Debug, Clone)]
pub struct Universe {
    pub config: UniverseConfig,
    pub ctx: PrimePair,
    pub tuples: Vec<CensusTuple>,
    pub rejections: Vec<Rejection>,
}

/// All reduction lengths a compatible with the torsion relation: a must
/// divide n_tors, and for a > 1 the prime-to-ℓ part of a must equal the
/// twist period of the quotient torsion. An ambient d filters by a | d.
pub fn enumerate_admissible_a(pair: PrimePair, n_tors: u64, d: Option<u64>) -> Vec<u64> {
    assert!(n_tors >= 1);
    let ell = pair.ell();
    divisors(n_tors)
        .into_iter()
        .filter(|&a| {
            if let Some(d) = d {
                if d % a != 0 {
                    return false;
                }
            }
            if a == 1 {
                return true;
            }
            let n_mod = prime_to_ell_part(n_tors / a, ell);
            prime_to_ell_part(a, ell) == epsilon(pair, n_mod)
        })
        .collect()
}

/// Exhaustive deterministic generation of every tuple within the bounds that
/// passes the reduction constraint system plus the realizability filters on
/// the supercuspidal data. Candidates that fail are kept in the rejection
/// log with the constraint that killed them.
pub fn build_universe(config: &UniverseConfig) -> Result<Universe, CensusError> {
    let ctx = PrimePair::new(config.q, config.ell)?;
    let ell = ctx.ell();
    let e0 = mult_order(ctx.q(), ell).expect("PrimePair guarantees coprimality");
    let mut tuples = Vec::new();
    let mut rejections = Vec::new();

    for deg in 1..=config.m_max {
        for k in divisors(deg).into_iter().filter(|&k| k <= config.k_max) {
            for n_tors in 1..=config.n_max {
                for shift in 1..=config.s_max {
                    for level in &config.levels {
                        for endo in &config.endo {
                            let sigma =
                                CuspidalParam::new(deg, n_tors, shift, *level, endo.clone(), ctx);
                            for a in divisors(n_tors) {
                                let quotient = n_tors / a;
                                let n_mod = prime_to_ell_part(quotient, ell);
                                let u = ell_valuation(quotient, ell);
                                let eps = epsilon(ctx, n_mod);
                                let red = ModLReduction {
                                    a,
                                    n_mod,
                                    shift_mod: a * shift,
                                    k,
                                    eps,
                                    sc_shift: Some(eps),
                                    sc_eps: Some(eps * prime_to_ell_part(k, ell)),
                                };
                                let mut reject = |reason: String| {
                                    rejections.push(Rejection {
                                        record: record_to_kv(&sigma, &red),
                                        reason,
                                    });
                                };
                                if u > config.u_max {
                                    reject(format!("u = {u} exceeds cap {}", config.u_max));
                                    continue;
                                }
                                if let Some(d) = config.d {
                                    if d % a != 0 {
                                        reject(format!("a = {a} does not divide d = {d}"));
                                        continue;
                                    }
                                }
                                let report = validate_reduction(&sigma, &red);
                                if !report.valid() {
                                    reject(format!(
                                        "constraint {} fails",
                                        report.first_failure().unwrap_or("unknown")
                                    ));
                                    continue;
                                }
                                let w = k * a;
                                // supercuspidal realizability: for w > 1 the
                                // prime-to-ℓ part of w must be ε(α), hence an
                                // order of a power of q mod ℓ
                                if w > 1 {
                                    let w_prime = prime_to_ell_part(w, ell);
                                    let sc_eps = red.sc_eps.expect("generator sets sc_eps");
                                    if w_prime != sc_eps {
                                        reject(format!(
                                            "prime-to-ell part {w_prime} of w differs from eps(alpha) = {sc_eps}"
                                        ));
                                        continue;
                                    }
                                    if e0 % sc_eps != 0 {
                                        reject(format!(
                                            "eps(alpha) = {sc_eps} is not an order of a power of q mod {ell}"
                                        ));
                                        continue;
                                    }
                                }
                                let c = c_of(&sigma);
                                let t = match t_of(w, c, ell) {
                                    Ok(t) => t,
                                    Err(e) => {
                                        reject(format!("t inconsistent: {e}"));
                                        continue;
                                    }
                                };
                                let om = omega(ctx, n_mod, red.shift_mod);
                                tuples.push(CensusTuple {
                                    sigma: sigma.clone(),
                                    red,
                                    omega: om,
                                    w,
                                    c,
                                    t,
                                });
                            }
                        }
                    }
                }
            }
        }
    }

    Ok(Universe {
        config: config.clone(),
        ctx,
        tuples,
        rejections,
    })
}

/// Grouping key for a congruence class: the mod-ℓ invariant vector plus the
/// base label. Degree is part of the vector since records of different
/// degree can never share a reduction.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ClassKey {
    pub deg: u64,
    pub n_mod: u64,
    pub shift_mod: u64,
    pub k: u64,
    pub eps: u64,
    pub endo: String,
}

impl ClassKey {
    pub fn of(tuple: &CensusTuple) -> Self {
        ClassKey {
            deg: tuple.sigma.deg,
            n_mod: tuple.red.n_mod,
            shift_mod: tuple.red.shift_mod,
            k: tuple.red.k,
            eps: tuple.red.eps,
            endo: tuple.sigma.endo.clone(),
        }
    }
}

impl fmt::Display for ClassKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "deg={} n_mod={} shift_mod={} k={} eps={} endo={}",
            self.deg, self.n_mod, self.shift_mod, self.k, self.eps, self.endo
        )
    }
}

/// Census cell: distinct congruence classes among tuples with the given w,
/// level at most j, and degree dividing the ambient degree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CensusCell {
    pub w: u64,
    pub level_cap: Level,
    pub classes: Vec<ClassKey>,
}

impl CensusCell {
    pub fn count(&self) -> usize {
        self.classes.len()
    }
}

pub fn census_by_w(universe: &Universe, w: u64, level_cap: Level) -> CensusCell {
    let m = universe.config.m_max;
    let classes: BTreeSet<ClassKey> = universe
        .tuples
        .iter()
        .filter(|t| t.w == w && t.sigma.level <= level_cap && m % t.sigma.deg == 0)
        .map(ClassKey::of)
        .collect();
    CensusCell {
        w,
        level_cap,
        classes: classes.into_iter().collect(),
    }
}

/// A Speh-level record: the segment built on a cuspidal record in r steps,
/// carrying the transported invariants. The source tuple is retained so the
/// record determines the pair (σ̃, r).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpehRecord {
    pub ctx: PrimePair,
    pub r: u64,
    pub degree: u64,
    pub n_tors: u64,
    pub c: u64,
    pub w: u64,
    pub t: u64,
    pub level: Level,
    pub endo: String,
    pub origin: Option<(CuspidalParam, ModLReduction)>,
}

impl SpehRecord {
    /// The five quantities the transfer must preserve.
    pub fn invariant_vector(&self) -> (u64, u64, u64, u64, Level) {
        (self.n_tors, self.c, self.w, self.t, self.level)
    }
}

/// Transports the cuspidal invariants to the Speh record of length r:
/// degree multiplies by r, everything else is unchanged.
pub fn speh_transport(tuple: &CensusTuple, r: u64) -> SpehRecord {
    assert!(r >= 1);
    SpehRecord {
        ctx: tuple.sigma.ctx,
        r,
        degree: r * tuple.sigma.deg,
        n_tors: tuple.sigma.n_tors,
        c: tuple.c,
        w: tuple.w,
        t: tuple.t,
        level: tuple.sigma.level,
        endo: tuple.sigma.endo.clone(),
        origin: Some((tuple.sigma.clone(), tuple.red.clone())),
    }
}

/// Result of comparing the cuspidal-side and Speh-side class sets of a cell.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EqualityReport {
    pub w: u64,
    pub level_cap: Level,
    pub cuspidal_count: usize,
    pub speh_count: usize,
    pub first_unmatched: Option<String>,
}

impl EqualityReport {
    pub fn matched(&self) -> bool {
        self.cuspidal_count == self.speh_count && self.first_unmatched.is_none()
    }
}

/// Verifies that the cuspidal classes of degree dividing m and the Speh
/// classes of degree exactly m correspond one-to-one under transport within
/// the (w, j) cell.
pub fn census_equalities(universe: &Universe, w: u64, level_cap: Level) -> EqualityReport {
    let m = universe.config.m_max;
    census_views(&universe.tuples, &universe.tuples, m, w, level_cap)
}

/// Two-sided variant taking independent tuple lists, so corruption of one
/// side is detectable.
pub fn census_views(
    cuspidal_side: &[CensusTuple],
    speh_side: &[CensusTuple],
    m: u64,
    w: u64,
    level_cap: Level,
) -> EqualityReport {
    let keep = |t: &&CensusTuple| t.w == w && t.sigma.level <= level_cap && m % t.sigma.deg == 0;
    let a_view: BTreeSet<ClassKey> = cuspidal_side.iter().filter(keep).map(ClassKey::of).collect();
    // Speh side: each cuspidal class of degree deg | m transports to the
    // record class (r, key) with r = m / deg
    let e_view: BTreeSet<(u64, ClassKey)> = speh_side
        .iter()
        .filter(keep)
        .map(|t| {
            let record = speh_transport(t, m / t.sigma.deg);
            (record.r, ClassKey::of(t))
        })
        .collect();

    let mut first_unmatched = None;
    for key in &a_view {
        let expected = (m / key.deg, key.clone());
        if !e_view.contains(&expected) {
            first_unmatched = Some(format!("cuspidal class [{key}] has no Speh partner"));
            break;
        }
    }
    if first_unmatched.is_none() {
        for (r, key) in &e_view {
            if !a_view.contains(key) {
                first_unmatched =
                    Some(format!("Speh class [r={r} {key}] has no cuspidal partner"));
                break;
            }
        }
    }
    EqualityReport {
        w,
        level_cap,
        cuspidal_count: a_view.len(),
        speh_count: e_view.len(),
        first_unmatched,
    }
}

/// Cross-universe count comparison per (w, j) cell; the caller supplies
/// matched generation configs, the tool only compares counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompareReport {
    pub w: u64,
    pub level_cap: Level,
    pub left_count: usize,
    pub right_count: usize,
}

impl CompareReport {
    pub fn equal(&self) -> bool {
        self.left_count == self.right_count
    }
}

pub fn census_compare(
    left: &Universe,
    right: &Universe,
    w: u64,
    level_cap: Level,
) -> CompareReport {
    CompareReport {
        w,
        level_cap,
        left_count: census_by_w(left, w, level_cap).count(),
        right_count: census_by_w(right, w, level_cap).count(),
    }
}

/// Distinct w values present in a universe, ascending.
pub fn w_values(universe: &Universe) -> Vec<u64> {
    let set: BTreeSet<u64> = universe.tuples.iter().map(|t| t.w).collect();
    set.into_iter().collect()
}

#[derive(Serialize, Deserialize)]
struct TupleRow {
    q: u64,
    ell: u64,
    deg: u64,
    n_tors: u64,
    shift: u64,
    level: Level,
    endo: String,
    a: u64,
    n_mod: u64,
    shift_mod: u64,
    k: u64,
    eps: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    sc_shift: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sc_eps: Option<u64>,
    omega: u64,
    w: u64,
    c: u64,
    t: u64,
}

/// One JSON line per tuple, self-contained (the context rides along).
pub fn tuple_to_json_line(tuple: &CensusTuple) -> String {
    let row = TupleRow {
        q: tuple.sigma.ctx.q(),
        ell: tuple.sigma.ctx.ell(),
        deg: tuple.sigma.deg,
        n_tors: tuple.sigma.n_tors,
        shift: tuple.sigma.shift,
        level: tuple.sigma.level,
        endo: tuple.sigma.endo.clone(),
        a: tuple.red.a,
        n_mod: tuple.red.n_mod,
        shift_mod: tuple.red.shift_mod,
        k: tuple.red.k,
        eps: tuple.red.eps,
        sc_shift: tuple.red.sc_shift,
        sc_eps: tuple.red.sc_eps,
        omega: tuple.omega,
        w: tuple.w,
        c: tuple.c,
        t: tuple.t,
    };
    serde_json::to_string(&row).expect("tuple row serialization cannot fail")
}

pub fn tuple_from_json_line(line: &str) -> Result<CensusTuple, CensusError> {
    let row: TupleRow =
        serde_json::from_str(line).map_err(|e| CensusError::Row(e.to_string()))?;
    let ctx = PrimePair::new(row.q, row.ell)?;
    let sigma = CuspidalParam::new(row.deg, row.n_tors, row.shift, row.level, row.endo, ctx);
    let red = ModLReduction {
        a: row.a,
        n_mod: row.n_mod,
        shift_mod: row.shift_mod,
        k: row.k,
        eps: row.eps,
        sc_shift: row.sc_shift,
        sc_eps: row.sc_eps,
    };
    Ok(CensusTuple {
        sigma,
        red,
        omega: row.omega,
        w: row.w,
        c: row.c,
        t: row.t,
    })
}

pub fn universe_to_json_lines(universe: &Universe) -> String {
    let mut out = String::new();
    for tuple in &universe.tuples {
        out.push_str(&tuple_to_json_line(tuple));
        out.push('\n');
    }
    out
}
