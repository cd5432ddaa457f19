//! Exact modular and integer arithmetic primitives.
//!
//! Everything here works in machine words. The only place where the full
//! integer `q^n - 1` would be needed — the ℓ-part `c_value` — is computed by
//! lifting the exponent on valuations instead, so no big-integer type enters
//! the production path.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ArithError {
    #[error("mult_order requires gcd({x}, {n}) = 1")]
    NotCoprime { x: u64, n: u64 },
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("residue cardinality q = {q} must be >= 2 and prime to ell = {ell}")]
    BadPair { q: u64, ell: u64 },
}

/// The ambient pair (q, ℓ): residue-field cardinality and a prime ℓ ∤ q.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PrimePair {
    q: u64,
    ell: u64,
}

impl PrimePair {
    pub fn new(q: u64, ell: u64) -> Result<Self, ArithError> {
        if !is_prime(ell) {
            return Err(ArithError::NotPrime(ell));
        }
        if q < 2 || q % ell == 0 {
            return Err(ArithError::BadPair { q, ell });
        }
        Ok(PrimePair { q, ell })
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn ell(&self) -> u64 {
        self.ell
    }
}

/// Trial-division primality; the sweeps stay far below the range where this
/// would matter.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

pub fn gcd(a: u64, b: u64) -> u64 {
    num_integer::gcd(a, b)
}

/// x^e mod n, with n < 2^63 so that the intermediate product fits in u128.
pub fn pow_mod(x: u64, mut e: u64, n: u64) -> u64 {
    assert!(n >= 1);
    if n == 1 {
        return 0;
    }
    let n128 = n as u128;
    let mut base = (x % n) as u128;
    let mut acc = 1u128;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % n128;
        }
        base = base * base % n128;
        e >>= 1;
    }
    acc as u64
}

/// Smallest t >= 1 with x^t = 1 mod n. Requires gcd(x, n) = 1.
pub fn mult_order(x: u64, n: u64) -> Result<u64, ArithError> {
    assert!(n >= 2, "modulus must be >= 2");
    let x0 = x % n;
    if gcd(x0, n) != 1 {
        return Err(ArithError::NotCoprime { x, n });
    }
    let mut acc = x0;
    let mut t = 1u64;
    while acc != 1 {
        acc = (acc as u128 * x0 as u128 % n as u128) as u64;
        t += 1;
    }
    Ok(t)
}

/// Splits n >= 1 as (ℓ^v, n / ℓ^v) with ℓ not dividing the second factor.
pub fn ell_part(n: u64, ell: u64) -> (u64, u64) {
    assert!(n >= 1, "ell_part needs n >= 1");
    assert!(ell >= 2);
    let mut rest = n;
    let mut power = 1u64;
    while rest % ell == 0 {
        rest /= ell;
        power *= ell;
    }
    (power, rest)
}

/// The largest divisor of n prime to ℓ.
pub fn prime_to_ell_part(n: u64, ell: u64) -> u64 {
    ell_part(n, ell).1
}

/// ℓ-adic valuation of n >= 1.
pub fn ell_valuation(n: u64, ell: u64) -> u32 {
    assert!(n >= 1);
    let mut rest = n;
    let mut v = 0u32;
    while rest % ell == 0 {
        rest /= ell;
        v += 1;
    }
    v
}

/// v_ℓ(x^e - 1) computed without materializing x^e: raise the modulus ℓ^j
/// until x^e is no longer 1 against it. Requires ℓ | x^e - 1.
fn valuation_of_pow_minus_one(x: u64, e: u64, ell: u64) -> u32 {
    debug_assert_eq!(pow_mod(x, e, ell), 1 % ell);
    let mut v = 0u32;
    let mut modulus = ell as u128;
    loop {
        // modulus = ell^(v+1); test whether ell^(v+1) | x^e - 1
        if modulus > (1u128 << 63) {
            // Unreachable for machine-word inputs: v_ℓ(x^e - 1) of this size
            // would mean x^e - 1 itself exceeds 2^63·ℓ.
            panic!("valuation overflow for x={x}, e={e}, ell={ell}");
        }
        let m = modulus as u64;
        if pow_mod(x % m, e, m) != 1 % m {
            return v;
        }
        v += 1;
        modulus *= ell as u128;
    }
}

/// The exact ℓ-part of q^n - 1, i.e. the largest power of ℓ dividing it.
///
/// Lifting the exponent: for odd ℓ, the answer is 1 unless e = ord(q mod ℓ)
/// divides n, in which case v_ℓ(q^n - 1) = v_ℓ(q^e - 1) + v_ℓ(n / e). For
/// ℓ = 2 and n even, v_2(q^n - 1) = v_2(q - 1) + v_2(q + 1) + v_2(n) - 1.
pub fn c_value(pair: PrimePair, n: u64) -> u64 {
    assert!(n >= 1, "c_value needs n >= 1");
    let q = pair.q();
    let ell = pair.ell();
    let v = if ell == 2 {
        // q odd since gcd(q, 2) = 1
        if n % 2 == 1 {
            ell_valuation(q - 1, 2)
        } else {
            ell_valuation(q - 1, 2) + ell_valuation(q + 1, 2) + ell_valuation(n, 2) - 1
        }
    } else {
        let e = mult_order(q, ell).expect("PrimePair guarantees gcd(q, ell) = 1");
        if n % e != 0 {
            0
        } else {
            valuation_of_pow_minus_one(q, e, ell) + ell_valuation(n / e, ell)
        }
    };
    ell.checked_pow(v)
        .expect("c_value exceeds u64; inputs outside the supported range")
}

/// Divisors of n in increasing order.
pub fn divisors(n: u64) -> Vec<u64> {
    assert!(n >= 1);
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = 1u64;
    while d.saturating_mul(d) <= n {
        if n % d == 0 {
            small.push(d);
            if d != n / d {
                large.push(n / d);
            }
        }
        d += 1;
    }
    large.reverse();
    small.extend(large);
    small
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Brute-force order oracle: multiply until 1 shows up.
    fn order_oracle(x: u64, n: u64) -> u64 {
        let mut acc = x % n;
        let mut t = 1;
        while acc != 1 {
            acc = acc * x % n;
            t += 1;
        }
        t
    }

    #[test]
    fn mult_order_examples() {
        // powers of 2 mod 7: 2, 4, 1
        assert_eq!(mult_order(2, 7).unwrap(), 3);
        assert_eq!(mult_order(1, 13).unwrap(), 1);
        // powers of 3 mod 5: 3, 4, 2, 1
        assert_eq!(mult_order(3, 5).unwrap(), 4);
    }

    #[test]
    fn mult_order_rejects_non_coprime() {
        assert!(matches!(
            mult_order(6, 9),
            Err(ArithError::NotCoprime { .. })
        ));
    }

    #[test]
    fn mult_order_divides_group_order_mod_primes() {
        for ell in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31] {
            for q in 2..=32 {
                if q % ell == 0 {
                    continue;
                }
                let t = mult_order(q, ell).unwrap();
                assert_eq!(t, order_oracle(q, ell));
                assert_eq!((ell - 1) % t, 0, "ord({q} mod {ell}) must divide {ell}-1");
            }
        }
    }

    #[test]
    fn ell_part_examples() {
        assert_eq!(ell_part(12, 3), (3, 4));
        assert_eq!(ell_part(8, 3), (1, 8));
        assert_eq!(ell_part(9, 3), (9, 1));
    }

    #[test]
    fn ell_part_reconstructs() {
        for ell in [2u64, 3, 5, 7] {
            for n in 1..=512u64 {
                let (p, rest) = ell_part(n, ell);
                assert_eq!(p * rest, n);
                assert_ne!(rest % ell, 0);
            }
        }
    }

    #[test]
    fn c_value_examples() {
        let p = PrimePair::new(2, 7).unwrap();
        assert_eq!(c_value(p, 3), 7); // 2^3 - 1 = 7
        assert_eq!(c_value(p, 1), 1); // 2 - 1 = 1
        let p = PrimePair::new(3, 2).unwrap();
        assert_eq!(c_value(p, 2), 8); // 3^2 - 1 = 8
    }

    #[test]
    fn c_value_matches_direct_bigint() {
        use num_bigint::BigUint;
        for ell in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31] {
            for q in 2..=32u64 {
                if q % ell == 0 {
                    continue;
                }
                let pair = PrimePair::new(q, ell).unwrap();
                for n in 1..=64u64 {
                    let direct = {
                        let mut m = BigUint::from(q).pow(n as u32) - 1u32;
                        let big_ell = BigUint::from(ell);
                        let mut part = 1u64;
                        while (&m % &big_ell) == BigUint::from(0u32) {
                            m /= &big_ell;
                            part *= ell;
                        }
                        part
                    };
                    assert_eq!(
                        c_value(pair, n),
                        direct,
                        "ell-part mismatch at q={q}, ell={ell}, n={n}"
                    );
                }
            }
        }
    }

    #[test]
    fn divisors_are_sorted_and_complete() {
        assert_eq!(divisors(12), vec![1, 2, 3, 4, 6, 12]);
        assert_eq!(divisors(1), vec![1]);
        assert_eq!(divisors(49), vec![1, 7, 49]);
    }

    #[test]
    fn prime_pair_rejects_bad_input() {
        assert!(PrimePair::new(2, 4).is_err());
        assert!(PrimePair::new(14, 7).is_err());
        assert!(PrimePair::new(1, 3).is_err());
        assert!(PrimePair::new(4, 2).is_err());
    }
}
