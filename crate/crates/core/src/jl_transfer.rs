//! Parameter-level transfer between inner-form records and division-algebra
//! records: sign bookkeeping, invariant transport, and the executable replay
//! of the uniqueness squeeze pinning the partner's w invariant.

use serde_json::json;
use thiserror::Error;

use crate::arith::divisors;
use crate::census::SpehRecord;
use crate::cuspidal::{t_of, wc_admissible};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TransferError {
    #[error("inadmissible invariant vector: {0}")]
    Inadmissible(String),
    #[error(
        "uniqueness counterexample at (w={w}, c={c}, ell={ell}): candidates {candidates:?}"
    )]
    Counterexample {
        w: u64,
        c: u64,
        ell: u64,
        candidates: Vec<u64>,
    },
}

/// (-1)^(r-1): the sign relating the two dual parametrizations.
pub fn zelevinski_sign(r: u64) -> i64 {
    assert!(r >= 1);
    if (r - 1) % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Replays the squeeze: among all admissible w' >= w whose class count is at
/// least that of w, only w itself survives. Returns w, or a counterexample
/// error that would falsify the deduction.
pub fn infer_partner_w(w: u64, c: u64, ell: u64) -> Result<u64, TransferError> {
    if !wc_admissible(w, c, ell) {
        return Err(TransferError::Inadmissible(format!(
            "(w={w}, c={c}, ell={ell}) fails the admissibility rules"
        )));
    }
    let t0 = t_of(w, c, ell)
        .map_err(|e| TransferError::Inadmissible(e.to_string()))?;

    // every admissible w' factors as w0 · ℓ^b with w0 | ℓ-1, and any w' with
    // a class count at all satisfies w' <= c
    let mut candidates = Vec::new();
    for w0 in divisors(ell - 1) {
        let mut w_prime = w0;
        loop {
            if w_prime >= w
                && wc_admissible(w_prime, c, ell)
                && t_of(w_prime, c, ell).map(|t| t >= t0).unwrap_or(false)
            {
                candidates.push(w_prime);
            }
            match w_prime.checked_mul(ell) {
                Some(next) if next <= c.max(w) => w_prime = next,
                _ => break,
            }
        }
    }
    candidates.sort_unstable();
    candidates.dedup();

    if candidates == [w] {
        Ok(w)
    } else {
        Err(TransferError::Counterexample {
            w,
            c,
            ell,
            candidates,
        })
    }
}

/// A matched pair of records with equal invariants and the Zelevinski sign.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransferRecord {
    pub source: SpehRecord,
    pub target: SpehRecord,
    pub sign: i64,
}

/// Transfers a Speh-level record to the division-algebra side: the target is
/// a degree-n cuspidal-parameter record (r = 1) carrying the identical
/// invariant vector, with sign (-1)^(r-1).
pub fn transfer(source: &SpehRecord) -> Result<TransferRecord, TransferError> {
    let ell = source.ctx.ell();
    if !wc_admissible(source.w, source.c, ell) {
        return Err(TransferError::Inadmissible(format!(
            "(w={}, c={}, ell={ell}) fails the admissibility rules",
            source.w, source.c
        )));
    }
    let t = t_of(source.w, source.c, ell)
        .map_err(|e| TransferError::Inadmissible(e.to_string()))?;
    if t != source.t {
        return Err(TransferError::Inadmissible(format!(
            "record carries t = {} but the invariants force t = {t}",
            source.t
        )));
    }
    let target = SpehRecord {
        ctx: source.ctx,
        r: 1,
        degree: source.degree,
        n_tors: source.n_tors,
        c: source.c,
        w: source.w,
        t: source.t,
        level: source.level,
        endo: source.endo.clone(),
        origin: None,
    };
    Ok(TransferRecord {
        source: source.clone(),
        target,
        sign: zelevinski_sign(source.r),
    })
}

fn record_json(record: &SpehRecord) -> serde_json::Value {
    json!({
        "q": record.ctx.q(),
        "ell": record.ctx.ell(),
        "r": record.r,
        "degree": record.degree,
        "n_tors": record.n_tors,
        "c": record.c,
        "w": record.w,
        "t": record.t,
        "level": record.level.to_string(),
        "endo": record.endo,
    })
}

pub fn transfer_to_json(record: &TransferRecord) -> serde_json::Value {
    json!({
        "source": record_json(&record.source),
        "target": record_json(&record.target),
        "sign": record.sign,
    })
}
