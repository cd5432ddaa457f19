//! Parameter records for ℓ-adic cuspidals and their mod-ℓ reductions.
//!
//! A [`CuspidalParam`] carries the numeric invariants of an ℓ-adic cuspidal:
//! degree, torsion number, shift, an opaque normalized level and an opaque
//! endo-class label. A [`ModLReduction`] describes a candidate reduction:
//! length `a`, mod-ℓ torsion number and shift, supercuspidal-support size `k`,
//! the twist period `eps`, and optionally the supercuspidal data `(s(α), ε(α))`.
//!
//! [`validate_reduction`] checks the constraint system tying the two records
//! together and reports pass/fail per constraint, so sweeps can tabulate which
//! constraint kills a candidate.

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{self, ell_valuation, gcd, mult_order, pow_mod, prime_to_ell_part, PrimePair};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CuspidalError {
    #[error("inconsistent parameters: {0}")]
    Inconsistent(String),
    #[error("c = {0} is not a power of ell = {1}")]
    NotEllPower(u64, u64),
    #[error("the prime-to-ell comparison needs w > 1")]
    TrivialW,
    #[error("record is missing supercuspidal fields")]
    MissingSupercuspidal,
    #[error("record parse error: {0}")]
    Parse(String),
}

/// Opaque nonnegative rational level. Never computed, only compared.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Level(Ratio<u64>);

impl Level {
    pub fn new(numer: u64, denom: u64) -> Self {
        assert!(denom >= 1, "level denominator must be >= 1");
        Level(Ratio::new(numer, denom))
    }

    pub fn zero() -> Self {
        Level(Ratio::new(0, 1))
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if *self.0.denom() == 1 {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl FromStr for Level {
    type Err = CuspidalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let (n, d) = match s.split_once('/') {
            Some((n, d)) => (n, d),
            None => (s, "1"),
        };
        let numer: u64 = n
            .trim()
            .parse()
            .map_err(|_| CuspidalError::Parse(format!("bad level '{s}'")))?;
        let denom: u64 = d
            .trim()
            .parse()
            .map_err(|_| CuspidalError::Parse(format!("bad level '{s}'")))?;
        if denom == 0 {
            return Err(CuspidalError::Parse(format!("zero denominator in '{s}'")));
        }
        Ok(Level::new(numer, denom))
    }
}

impl Serialize for Level {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Level {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Numeric invariants of an ℓ-adic cuspidal, plus the ambient (q, ℓ) pair.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CuspidalParam {
    pub deg: u64,
    pub n_tors: u64,
    pub shift: u64,
    pub level: Level,
    pub endo: String,
    pub ctx: PrimePair,
}

impl CuspidalParam {
    pub fn new(
        deg: u64,
        n_tors: u64,
        shift: u64,
        level: Level,
        endo: impl Into<String>,
        ctx: PrimePair,
    ) -> Self {
        assert!(deg >= 1 && n_tors >= 1 && shift >= 1);
        CuspidalParam {
            deg,
            n_tors,
            shift,
            level,
            endo: endo.into(),
            ctx,
        }
    }
}

/// The mod-ℓ side of a candidate reduction.
///
/// `sc_shift` and `sc_eps` are the supercuspidal-support data `s(α)`, `ε(α)`;
/// they are optional because the gcd constraint is the only one that reads
/// them.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ModLReduction {
    pub a: u64,
    pub n_mod: u64,
    pub shift_mod: u64,
    pub k: u64,
    pub eps: u64,
    pub sc_shift: Option<u64>,
    pub sc_eps: Option<u64>,
}

/// Period of the twist orbit: the order of q^n_mod modulo ℓ.
pub fn epsilon(pair: PrimePair, n_mod: u64) -> u64 {
    let x = pow_mod(pair.q(), n_mod, pair.ell());
    mult_order(x, pair.ell()).expect("PrimePair guarantees coprimality")
}

/// Order of q^(n_mod * shift_mod) modulo ℓ.
pub fn omega(pair: PrimePair, n_mod: u64, shift_mod: u64) -> u64 {
    let x = pow_mod(pow_mod(pair.q(), n_mod, pair.ell()), shift_mod, pair.ell());
    mult_order(x, pair.ell()).expect("PrimePair guarantees coprimality")
}

/// ε(σ) from the supercuspidal data: gcd(ε(α), s(α)).
pub fn epsilon_from_supercuspidal(sc_eps: u64, sc_shift: u64) -> u64 {
    assert!(sc_eps >= 1 && sc_shift >= 1);
    gcd(sc_eps, sc_shift)
}

/// w = k · a, the product of support size and reduction length.
pub fn w_invariant(k: u64, a: u64) -> u64 {
    assert!(k >= 1 && a >= 1);
    k * a
}

/// Pass/fail per constraint of the reduction system.
///
/// The supercuspidal gcd check is `None` when the record carries no
/// supercuspidal fields; a skipped check never blocks validity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ValidationReport {
    /// n_tors = a · n_mod · ℓ^u with n_mod the prime-to-ℓ part of n_tors/a.
    pub torsion_factorization: bool,
    /// shift_mod = a · shift.
    pub shift_scaling: bool,
    /// For a > 1: the prime-to-ℓ part of a equals ε(pair, n_mod).
    pub eps_vs_a: bool,
    /// eps = gcd(sc_eps, sc_shift), when the record carries both.
    pub supercuspidal_gcd: Option<bool>,
}

impl ValidationReport {
    pub fn valid(&self) -> bool {
        self.torsion_factorization
            && self.shift_scaling
            && self.eps_vs_a
            && self.supercuspidal_gcd.unwrap_or(true)
    }

    /// Name of the first failing constraint, if any.
    pub fn first_failure(&self) -> Option<&'static str> {
        if !self.torsion_factorization {
            Some("torsion_factorization")
        } else if !self.shift_scaling {
            Some("shift_scaling")
        } else if !self.eps_vs_a {
            Some("eps_vs_a")
        } else if self.supercuspidal_gcd == Some(false) {
            Some("supercuspidal_gcd")
        } else {
            None
        }
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mark = |b: bool| if b { "pass" } else { "FAIL" };
        write!(
            f,
            "torsion_factorization={} shift_scaling={} eps_vs_a={} supercuspidal_gcd={} valid={}",
            mark(self.torsion_factorization),
            mark(self.shift_scaling),
            mark(self.eps_vs_a),
            self.supercuspidal_gcd
                .map(mark)
                .unwrap_or("skipped"),
            self.valid()
        )
    }
}

/// Checks the constraint system tying a cuspidal record to a candidate
/// reduction. A failing divisibility is a failed constraint, not an error.
pub fn validate_reduction(sigma: &CuspidalParam, red: &ModLReduction) -> ValidationReport {
    let ell = sigma.ctx.ell();

    let torsion_factorization = red.a >= 1
        && sigma.n_tors % red.a == 0
        && prime_to_ell_part(sigma.n_tors / red.a, ell) == red.n_mod;

    let shift_scaling = red.shift_mod == red.a * sigma.shift;

    let eps_vs_a = if red.a > 1 {
        prime_to_ell_part(red.a, ell) == epsilon(sigma.ctx, red.n_mod)
    } else {
        true
    };

    let supercuspidal_gcd = match (red.sc_eps, red.sc_shift) {
        (Some(se), Some(ss)) => Some(red.eps == epsilon_from_supercuspidal(se, ss)),
        _ => None,
    };

    ValidationReport {
        torsion_factorization,
        shift_scaling,
        eps_vs_a,
        supercuspidal_gcd,
    }
}

/// The congruence-class count t from the piecewise relation
/// t·w = c, c - 1, or c(ℓ-1)/ℓ according to w = 1, 1 < w < ℓ, w >= ℓ.
///
/// A non-integral or non-positive t signals a parameter tuple the relation
/// forbids and comes back as an inconsistency error.
pub fn t_of(w: u64, c: u64, ell: u64) -> Result<u64, CuspidalError> {
    assert!(w >= 1);
    if !is_ell_power(c, ell) {
        return Err(CuspidalError::NotEllPower(c, ell));
    }
    let rhs = if w == 1 {
        c
    } else if w < ell {
        c - 1
    } else {
        if c % ell != 0 {
            return Err(CuspidalError::Inconsistent(format!(
                "w = {w} >= ell = {ell} needs ell | c, got c = {c}"
            )));
        }
        (c / ell) * (ell - 1)
    };
    if rhs == 0 || rhs % w != 0 {
        return Err(CuspidalError::Inconsistent(format!(
            "t·w = {rhs} has no positive integer solution for w = {w}, c = {c}, ell = {ell}"
        )));
    }
    Ok(rhs / w)
}

fn is_ell_power(c: u64, ell: u64) -> bool {
    if c == 0 {
        return false;
    }
    let mut c = c;
    while c % ell == 0 {
        c /= ell;
    }
    c == 1
}

/// Admissibility of a (w, c, ℓ) triple: the prime-to-ℓ part of w divides
/// ℓ - 1; ℓ divides w whenever w >= ℓ; and c is large enough for the
/// piecewise relation to have a positive solution (c > 1 when w > 1, and
/// v_ℓ(c) > v_ℓ(w) when w >= ℓ). On admissible triples [`t_of`] never fails.
pub fn wc_admissible(w: u64, c: u64, ell: u64) -> bool {
    if w == 0 || !is_ell_power(c, ell) {
        return false;
    }
    if (ell - 1) % prime_to_ell_part(w, ell) != 0 {
        return false;
    }
    if w >= ell && w % ell != 0 {
        return false;
    }
    if w == 1 {
        return true;
    }
    if c == 1 {
        return false;
    }
    if w >= ell && ell_valuation(c, ell) <= ell_valuation(w, ell) {
        return false;
    }
    true
}

/// For w > 1: does the prime-to-ℓ part of w equal the supercuspidal ε(α)?
pub fn w_prime_to_ell_check(w: u64, red: &ModLReduction, ell: u64) -> Result<bool, CuspidalError> {
    if w <= 1 {
        return Err(CuspidalError::TrivialW);
    }
    let sc_eps = red.sc_eps.ok_or(CuspidalError::MissingSupercuspidal)?;
    Ok(prime_to_ell_part(w, ell) == sc_eps)
}

/// b from b · s = [k : k0]; the division must be exact.
pub fn b_of(shift: u64, kk0: u64) -> Result<u64, CuspidalError> {
    assert!(shift >= 1 && kk0 >= 1);
    if kk0 % shift != 0 {
        return Err(CuspidalError::Inconsistent(format!(
            "shift = {shift} does not divide [k:k0] = {kk0}"
        )));
    }
    Ok(kk0 / shift)
}

/// Twisting by a character whose reduction has the given order leaves the
/// reduction class unchanged exactly when that order divides n_tors.
pub fn twist_congruence(char_red_order: u64, n_tors: u64) -> bool {
    assert!(char_red_order >= 1 && n_tors >= 1);
    n_tors % char_red_order == 0
}

#[derive(Serialize, Deserialize)]
struct RecordJson {
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
}

/// One-line key=value record with the fields in canonical order.
pub fn record_to_kv(sigma: &CuspidalParam, red: &ModLReduction) -> String {
    let mut out = format!(
        "deg={} n_tors={} shift={} level={} endo={} a={} n_mod={} shift_mod={} k={} eps={}",
        sigma.deg,
        sigma.n_tors,
        sigma.shift,
        sigma.level,
        sigma.endo,
        red.a,
        red.n_mod,
        red.shift_mod,
        red.k,
        red.eps
    );
    if let Some(ss) = red.sc_shift {
        out.push_str(&format!(" sc_shift={ss}"));
    }
    if let Some(se) = red.sc_eps {
        out.push_str(&format!(" sc_eps={se}"));
    }
    out
}

/// Parses a key=value record; the ambient (q, ℓ) context is supplied by the
/// caller since it is not part of the flat record.
pub fn record_from_kv(
    line: &str,
    ctx: PrimePair,
) -> Result<(CuspidalParam, ModLReduction), CuspidalError> {
    let mut fields = std::collections::BTreeMap::new();
    for token in line.split_whitespace() {
        let (key, value) = token
            .split_once('=')
            .ok_or_else(|| CuspidalError::Parse(format!("expected key=value, got '{token}'")))?;
        if fields.insert(key.to_string(), value.to_string()).is_some() {
            return Err(CuspidalError::Parse(format!("duplicate key '{key}'")));
        }
    }
    let get = |key: &str| -> Result<String, CuspidalError> {
        fields
            .get(key)
            .cloned()
            .ok_or_else(|| CuspidalError::Parse(format!("missing key '{key}'")))
    };
    let num = |key: &str| -> Result<u64, CuspidalError> {
        get(key)?
            .parse()
            .map_err(|_| CuspidalError::Parse(format!("bad integer for '{key}'")))
    };
    let opt_num = |key: &str| -> Result<Option<u64>, CuspidalError> {
        match fields.get(key) {
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| CuspidalError::Parse(format!("bad integer for '{key}'"))),
            None => Ok(None),
        }
    };
    let known = [
        "deg", "n_tors", "shift", "level", "endo", "a", "n_mod", "shift_mod", "k", "eps",
        "sc_shift", "sc_eps",
    ];
    for key in fields.keys() {
        if !known.contains(&key.as_str()) {
            return Err(CuspidalError::Parse(format!("unknown key '{key}'")));
        }
    }
    let sigma = CuspidalParam::new(
        num("deg")?,
        num("n_tors")?,
        num("shift")?,
        get("level")?.parse()?,
        get("endo")?,
        ctx,
    );
    let red = ModLReduction {
        a: num("a")?,
        n_mod: num("n_mod")?,
        shift_mod: num("shift_mod")?,
        k: num("k")?,
        eps: num("eps")?,
        sc_shift: opt_num("sc_shift")?,
        sc_eps: opt_num("sc_eps")?,
    };
    Ok((sigma, red))
}

/// JSON object with exactly the canonical field names.
pub fn record_to_json(sigma: &CuspidalParam, red: &ModLReduction) -> serde_json::Value {
    serde_json::to_value(RecordJson {
        deg: sigma.deg,
        n_tors: sigma.n_tors,
        shift: sigma.shift,
        level: sigma.level,
        endo: sigma.endo.clone(),
        a: red.a,
        n_mod: red.n_mod,
        shift_mod: red.shift_mod,
        k: red.k,
        eps: red.eps,
        sc_shift: red.sc_shift,
        sc_eps: red.sc_eps,
    })
    .expect("record serialization cannot fail")
}

pub fn record_from_json(
    value: &serde_json::Value,
    ctx: PrimePair,
) -> Result<(CuspidalParam, ModLReduction), CuspidalError> {
    let rec: RecordJson = serde_json::from_value(value.clone())
        .map_err(|e| CuspidalError::Parse(e.to_string()))?;
    Ok((
        CuspidalParam::new(rec.deg, rec.n_tors, rec.shift, rec.level, rec.endo, ctx),
        ModLReduction {
            a: rec.a,
            n_mod: rec.n_mod,
            shift_mod: rec.shift_mod,
            k: rec.k,
            eps: rec.eps,
            sc_shift: rec.sc_shift,
            sc_eps: rec.sc_eps,
        },
    ))
}

/// Convenience: the ℓ-part of q^n - 1 for a record's own torsion number.
pub fn c_of(sigma: &CuspidalParam) -> u64 {
    arith::c_value(sigma.ctx, sigma.n_tors)
}
