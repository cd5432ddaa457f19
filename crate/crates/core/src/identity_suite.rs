//! Executable verification of the finite identities the surrounding theory
//! rests on: the composition-sum formula and its Mackey rearrangement, the
//! segment-reduction consistency check, the residue-count identity behind the
//! support-uniqueness argument, and the unitriangular systems that make
//! decomposition coefficients uniquely solvable.

use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::arith::{gcd, is_prime, prime_to_ell_part};
use crate::formal_ring::{
    coproduct, cusp_chain, product, restrict, Atom, Base, RingElement, TensorElement, Term,
};
use crate::multisegment::{
    binomial, compositions_of, partition_dominance_leq, partitions_of, Partition,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SuiteError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("ring error: {0}")]
    Ring(#[from] crate::formal_ring::RingError),
}

/// Outcome of a single identity check, with a witness on failure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckOutcome {
    pub pass: bool,
    pub lhs_terms: usize,
    pub rhs_terms: usize,
    pub witness: Option<String>,
}

fn zfin_bases(b: u64) -> Vec<Base> {
    (1..=b).map(|i| Base::finite(format!("t{i}"), 1)).collect()
}

fn zfin_product(bases: &[Base], composition: &[u64]) -> Term {
    let atoms: Vec<Atom> = composition
        .iter()
        .enumerate()
        .filter(|(_, &n)| n > 0)
        .map(|(i, &n)| Atom::zfin(&bases[i], n))
        .collect();
    Term::from_atoms(atoms)
}

/// The composition-indexed sum Σ_α z(τ_1, n_1) × ... × z(τ_b, n_b) over all
/// families of b nonnegative integers summing to n; the image of a length-n
/// segment under the fixed-level functor, with b distinct finite bases.
pub fn lemma64_rhs(b: u64, n: u64) -> RingElement {
    assert!(b >= 1);
    let bases = zfin_bases(b);
    let mut out = RingElement::zero();
    for composition in compositions_of(n, b) {
        out.add_term(zfin_product(&bases, &composition), 1);
    }
    out
}

/// Restricts the composition sum at a cut two ways — through the coproduct
/// machinery, and directly as the double composition sum — and compares.
pub fn mackey_report(b: u64, n: u64, k: u64) -> Result<CheckOutcome, SuiteError> {
    if !(1..n).contains(&k) {
        return Err(SuiteError::Domain(format!(
            "cut k = {k} must satisfy 1 <= k <= n-1 = {}",
            n.saturating_sub(1)
        )));
    }
    let lhs = restrict(&lemma64_rhs(b, n), k)?;
    let bases = zfin_bases(b);
    let mut rhs = TensorElement::zero(2);
    for alpha in compositions_of(k, b) {
        for beta in compositions_of(n - k, b) {
            rhs.add_term(
                vec![zfin_product(&bases, &alpha), zfin_product(&bases, &beta)],
                1,
            );
        }
    }
    let witness = lhs
        .first_difference(&rhs)
        .map(|(slots, c_lhs, c_rhs)| {
            let rendered: Vec<String> = slots.iter().map(|t| t.to_string()).collect();
            format!(
                "{} has coefficient {c_lhs} from the coproduct but {c_rhs} in the double sum",
                rendered.join(" ⊗ ")
            )
        });
    Ok(CheckOutcome {
        pass: witness.is_none(),
        lhs_terms: lhs.term_count(),
        rhs_terms: rhs.term_count(),
        witness,
    })
}

/// True when both routes through the cut agree.
pub fn check_mackey_rearrangement(b: u64, n: u64, k: u64) -> bool {
    mackey_report(b, n, k).map(|o| o.pass).unwrap_or(false)
}

/// Expected term count of each side of the rearrangement at cut k.
pub fn mackey_expected_terms(b: u64, n: u64, k: u64) -> u64 {
    binomial(k + b - 1, b - 1) * binomial(n - k + b - 1, b - 1)
}

/// Consistency of the conjectured segment reduction against the Jacquet
/// constraint: the cuspidal chain of the conjectured right-hand side must
/// equal the termwise reduction of the ℓ-adic chain.
///
/// Parameters must be mutually consistent: eps | a, and for a > 1 the
/// prime-to-ℓ part of a equals eps, which must divide ℓ - 1.
pub fn conjecture77_report(
    a: u64,
    n: u64,
    s_tilde: u64,
    eps: u64,
    ell: u64,
) -> Result<CheckOutcome, SuiteError> {
    if a == 0 || n == 0 || s_tilde == 0 || eps == 0 {
        return Err(SuiteError::Domain("parameters must be >= 1".into()));
    }
    if !is_prime(ell) {
        return Err(SuiteError::Domain(format!("{ell} is not prime")));
    }
    if a % eps != 0 {
        return Err(SuiteError::Domain(format!("eps = {eps} must divide a = {a}")));
    }
    if a > 1 {
        if prime_to_ell_part(a, ell) != eps {
            return Err(SuiteError::Domain(format!(
                "prime-to-{ell} part of a = {a} must equal eps = {eps}"
            )));
        }
        if (ell - 1) % eps != 0 {
            return Err(SuiteError::Domain(format!(
                "eps = {eps} must divide ell - 1 = {}",
                ell - 1
            )));
        }
    }

    // mod-ℓ family: period eps, segment step s(σ) = a·s̃ reduced mod eps
    let base = Base::mod_ell("sigma", 1, eps, a * s_tilde);

    // conjectured RHS: Σ over families (n_0, ..., n_{a-1}) of the product of
    // segments starting at σν^i
    let mut rhs = RingElement::zero();
    for composition in compositions_of(n, a) {
        let atoms: Vec<Atom> = composition
            .iter()
            .enumerate()
            .filter(|(_, &len)| len > 0)
            .map(|(i, &len)| Atom::zseg(&base, i as i64, len))
            .collect();
        rhs.add_term(Term::from_atoms(atoms), 1);
    }
    let rhs_chains = cusp_chain(&rhs)?;

    // necessary condition: the termwise reduction of the ℓ-adic chain
    // σ̃ ⊗ σ̃ν_σ̃ ⊗ ... ⊗ σ̃ν_σ̃^{n-1}, position j contributing the residues
    // (i + j·s̃) mod eps for 0 <= i < a
    let mut lhs_chains: BTreeMap<Vec<i64>, i64> = BTreeMap::new();
    lhs_chains.insert(Vec::new(), 1);
    for j in 0..n {
        let mut next: BTreeMap<Vec<i64>, i64> = BTreeMap::new();
        for (prefix, count) in &lhs_chains {
            for i in 0..a {
                let residue = ((i + j * s_tilde) % eps) as i64;
                let mut seq = prefix.clone();
                seq.push(residue);
                *next.entry(seq).or_insert(0) += count;
            }
        }
        lhs_chains = next;
    }

    let mut witness = None;
    for (seq, count) in &lhs_chains {
        let got = rhs_chains.get(seq).copied().unwrap_or(0);
        if got != *count {
            witness = Some(format!(
                "chain {seq:?} appears {count} times in the reduced chain but {got} in the conjectured sum"
            ));
            break;
        }
    }
    if witness.is_none() {
        for (seq, count) in &rhs_chains {
            if !lhs_chains.contains_key(seq) {
                witness = Some(format!(
                    "chain {seq:?} appears {count} times in the conjectured sum but not in the reduced chain"
                ));
                break;
            }
        }
    }
    Ok(CheckOutcome {
        pass: witness.is_none(),
        lhs_terms: lhs_chains.len(),
        rhs_terms: rhs_chains.len(),
        witness,
    })
}

pub fn check_conjecture77(
    a: u64,
    n: u64,
    s_tilde: u64,
    eps: u64,
    ell: u64,
) -> Result<bool, SuiteError> {
    conjecture77_report(a, n, s_tilde, eps, ell).map(|o| o.pass)
}

/// All mutually consistent (a, n, s̃, eps, ℓ) tuples within the caps.
pub fn conjecture77_cases(
    a_max: u64,
    n_max: u64,
    s_max: u64,
    ells: &[u64],
) -> Vec<(u64, u64, u64, u64, u64)> {
    let mut cases = Vec::new();
    for &ell in ells {
        for a in 1..=a_max {
            let eps = if a == 1 { 1 } else { prime_to_ell_part(a, ell) };
            if a > 1 && (ell - 1) % eps != 0 {
                continue;
            }
            for n in 1..=n_max {
                for s_tilde in 1..=s_max {
                    cases.push((a, n, s_tilde, eps, ell));
                }
            }
        }
    }
    cases
}

/// Counts t in {0, ..., k-1} with e' | delta + t·s', by brute force.
///
/// Admissible inputs: e = gcd(e', s') divides delta, e'/e divides k, and the
/// cofactor k·e/e' is 1 or a prime power coprime to e'/e (the shape the
/// support-uniqueness argument produces). On admissible inputs the count
/// equals k·e/e'.
pub fn y_count(e_prime: u64, s_prime: u64, k: u64, delta: i64) -> Result<u64, SuiteError> {
    if e_prime == 0 || s_prime == 0 || k == 0 {
        return Err(SuiteError::Domain("parameters must be >= 1".into()));
    }
    let e = gcd(e_prime, s_prime);
    if delta.rem_euclid(e as i64) != 0 {
        return Err(SuiteError::Domain(format!(
            "gcd(e', s') = {e} must divide delta = {delta}"
        )));
    }
    let m = e_prime / e;
    if k % m != 0 {
        return Err(SuiteError::Domain(format!(
            "e'/e = {m} must divide k = {k}"
        )));
    }
    if !is_admissible_cofactor(k / m, m) {
        return Err(SuiteError::Domain(format!(
            "k/(e'/e) = {} is not 1 or a prime power coprime to e'/e = {m}",
            k / m
        )));
    }
    let mut count = 0;
    for t in 0..k {
        if (delta + t as i64 * s_prime as i64).rem_euclid(e_prime as i64) == 0 {
            count += 1;
        }
    }
    Ok(count)
}

/// The closed-form value the count must equal.
pub fn y_count_expected(e_prime: u64, s_prime: u64, k: u64) -> u64 {
    k * gcd(e_prime, s_prime) / e_prime
}

fn is_admissible_cofactor(k_prime: u64, m: u64) -> bool {
    if k_prime == 1 {
        return true;
    }
    // prime-power test by trial division
    let mut rest = k_prime;
    let mut p = 0u64;
    let mut d = 2u64;
    while d * d <= rest {
        if rest % d == 0 {
            p = d;
            while rest % d == 0 {
                rest /= d;
            }
            break;
        }
        d += 1;
    }
    if p == 0 {
        p = rest;
        rest = 1;
    }
    rest == 1 && m % p != 0
}

/// Integer matrix indexed by the partitions of one n, with unit diagonal and
/// support below the dominance order: a nonzero entry at (row µ, col ν)
/// forces ν ⊴ µ. Rows and columns follow the linear extension of dominance
/// given by the lexicographic order on partial-sum vectors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UniTriMatrix {
    index: Vec<Partition>,
    entries: Vec<Vec<i64>>,
}

/// The partitions of n in the elimination order: ascending lexicographic on
/// padded partial-sum vectors, which refines dominance.
pub fn canonical_index(n: u64) -> Vec<Partition> {
    let mut ps = partitions_of(n);
    let width = n as usize;
    ps.sort_by_key(|p| p.partial_sums(width));
    ps
}

impl UniTriMatrix {
    pub fn from_entries(index: Vec<Partition>, entries: Vec<Vec<i64>>) -> Result<Self, SuiteError> {
        let r = index.len();
        if entries.len() != r || entries.iter().any(|row| row.len() != r) {
            return Err(SuiteError::Domain("entry matrix shape mismatch".into()));
        }
        if r > 0 {
            let total = index[0].sum();
            if index.iter().any(|p| p.sum() != total) {
                return Err(SuiteError::Domain(
                    "index partitions must share one total".into(),
                ));
            }
        }
        let width = index.first().map(|p| p.sum() as usize).unwrap_or(0);
        for w in index.windows(2) {
            if w[0].partial_sums(width) >= w[1].partial_sums(width) {
                return Err(SuiteError::Domain(
                    "index must be strictly increasing in the elimination order".into(),
                ));
            }
        }
        for (i, row) in entries.iter().enumerate() {
            if row[i] != 1 {
                return Err(SuiteError::Domain(format!(
                    "diagonal entry at {} must be 1",
                    index[i]
                )));
            }
            for (j, &v) in row.iter().enumerate() {
                if v != 0 && !partition_dominance_leq(&index[j], &index[i]) {
                    return Err(SuiteError::Domain(format!(
                        "entry at ({}, {}) is nonzero but {} does not dominate {}",
                        index[i], index[j], index[i], index[j]
                    )));
                }
            }
        }
        Ok(UniTriMatrix { index, entries })
    }

    pub fn identity(n: u64) -> Self {
        let index = canonical_index(n);
        let r = index.len();
        let entries = (0..r)
            .map(|i| (0..r).map(|j| i64::from(i == j)).collect())
            .collect();
        UniTriMatrix { index, entries }
    }

    pub fn index(&self) -> &[Partition] {
        &self.index
    }

    pub fn size(&self) -> usize {
        self.index.len()
    }

    pub fn entry(&self, row: usize, col: usize) -> i64 {
        self.entries[row][col]
    }

    pub fn mul(&self, other: &UniTriMatrix) -> Result<UniTriMatrix, SuiteError> {
        if self.index != other.index {
            return Err(SuiteError::Domain("matrix indices differ".into()));
        }
        let r = self.size();
        let mut entries = vec![vec![0i64; r]; r];
        for i in 0..r {
            for l in 0..r {
                let a = self.entries[i][l];
                if a == 0 {
                    continue;
                }
                for j in 0..r {
                    entries[i][j] += a * other.entries[l][j];
                }
            }
        }
        UniTriMatrix::from_entries(self.index.clone(), entries)
    }

    pub fn is_identity(&self) -> bool {
        self.entries.iter().enumerate().all(|(i, row)| {
            row.iter()
                .enumerate()
                .all(|(j, &v)| v == i64::from(i == j))
        })
    }
}

/// Constructive kernel check, mirroring the minimal-element argument: walk
/// the index in the elimination order and watch each coordinate get forced
/// to zero.
pub fn unitriangular_kernel_trivial(matrix: &UniTriMatrix) -> bool {
    let zeros = vec![0i64; matrix.size()];
    unitriangular_solve(matrix, &zeros).iter().all(|&v| v == 0)
}

/// The unique integer solution of E·d = rhs, by forward substitution along
/// the elimination order.
pub fn unitriangular_solve(matrix: &UniTriMatrix, rhs: &[i64]) -> Vec<i64> {
    assert_eq!(rhs.len(), matrix.size());
    let r = matrix.size();
    let mut solution = vec![0i64; r];
    for i in 0..r {
        let mut acc = rhs[i];
        for j in 0..i {
            acc -= matrix.entry(i, j) * solution[j];
        }
        // diagonal is 1
        solution[i] = acc;
    }
    solution
}

/// The inverse matrix; unitriangular matrices are closed under inversion
/// over the integers.
pub fn unitriangular_inverse(matrix: &UniTriMatrix) -> UniTriMatrix {
    let r = matrix.size();
    let mut cols = vec![vec![0i64; r]; r];
    for j in 0..r {
        let mut unit = vec![0i64; r];
        unit[j] = 1;
        cols[j] = unitriangular_solve(matrix, &unit);
    }
    let entries: Vec<Vec<i64>> = (0..r).map(|i| (0..r).map(|j| cols[j][i]).collect()).collect();
    UniTriMatrix::from_entries(matrix.index().to_vec(), entries)
        .expect("inverse of a unitriangular matrix is unitriangular")
}

/// Seeded random matrix satisfying the unitriangular invariants.
pub fn random_unitriangular(n: u64, seed: u64, amplitude: i64) -> UniTriMatrix {
    let index = canonical_index(n);
    let r = index.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut entries = vec![vec![0i64; r]; r];
    for i in 0..r {
        entries[i][i] = 1;
        for j in 0..i {
            if partition_dominance_leq(&index[j], &index[i]) {
                entries[i][j] = rng.gen_range(-amplitude..=amplitude);
            }
        }
    }
    UniTriMatrix::from_entries(index, entries).expect("construction respects the invariants")
}

/// Reports whether the element is invariant under the exponent twist; twist
/// invariance is exactly the statement that every term and its twist carry
/// the same multiplicity.
pub fn twist_multiplicity_symmetry(x: &RingElement, j: i64) -> bool {
    x.twist(j) == *x
}

/// Spot-check of the bigebra laws on segment atoms and seeded random
/// products: coassociativity and Δ(xy) = Δ(x)Δ(y).
pub fn bigebra_report(n_max: u64, random_products: u64, seed: u64) -> CheckOutcome {
    let padic = Base::padic("p", 1);
    let fin = Base::finite("t", 1);
    let mut checked = 0usize;
    let mut witness = None;

    'outer: for n in 1..=n_max {
        for el in [
            RingElement::from_atom(Atom::zseg(&padic, 0, n)),
            RingElement::from_atom(Atom::zfin(&fin, n)),
        ] {
            let d = coproduct(&el).expect("segment atoms have a coproduct");
            let left = d.coproduct_at(0).expect("iterated coproduct");
            let right = d.coproduct_at(1).expect("iterated coproduct");
            checked += 1;
            if left != right {
                witness = Some(format!("coassociativity fails on {el}"));
                break 'outer;
            }
        }
    }

    if witness.is_none() {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let bases = [padic, fin, Base::mod_ell("m", 1, 3, 1)];
        for _ in 0..random_products {
            let x = random_seg_element(&mut rng, &bases);
            let y = random_seg_element(&mut rng, &bases);
            let lhs = coproduct(&product(&x, &y)).expect("segment atoms have a coproduct");
            let rhs = coproduct(&x)
                .expect("segment atoms have a coproduct")
                .pointwise_product(&coproduct(&y).expect("segment atoms have a coproduct"));
            checked += 1;
            if lhs != rhs {
                witness = Some(format!("Δ(xy) ≠ Δ(x)Δ(y) for x = {x}, y = {y}"));
                break;
            }
        }
    }

    CheckOutcome {
        pass: witness.is_none(),
        lhs_terms: checked,
        rhs_terms: checked,
        witness,
    }
}

fn random_seg_element(rng: &mut ChaCha8Rng, bases: &[Base]) -> RingElement {
    let mut out = RingElement::zero();
    for _ in 0..rng.gen_range(1..=2) {
        let mut atoms = Vec::new();
        for _ in 0..rng.gen_range(0..=2usize) {
            let base = &bases[rng.gen_range(0..bases.len())];
            let exp = rng.gen_range(-3i64..=3);
            match rng.gen_range(0..3) {
                0 => atoms.push(Atom::cusp(base, exp)),
                1 => atoms.push(Atom::zseg(base, exp, rng.gen_range(1..=3))),
                _ => atoms.push(Atom::zfin(base, rng.gen_range(1..=3))),
            }
        }
        out.add_term(Term::from_atoms(atoms), rng.gen_range(1..=2));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formal_ring::Modulus;

    #[test]
    fn lemma64_rhs_term_counts() {
        assert_eq!(lemma64_rhs(2, 2).term_count(), 3);
        let single = lemma64_rhs(1, 5);
        assert_eq!(single.term_count(), 1);
        assert_eq!(lemma64_rhs(3, 2).term_count(), 6);
        for b in 1..=4u64 {
            for n in 0..=8u64 {
                assert_eq!(
                    lemma64_rhs(b, n).term_count() as u64,
                    binomial(n + b - 1, b - 1)
                );
            }
        }
    }

    #[test]
    fn mackey_examples() {
        let o = mackey_report(2, 2, 1).unwrap();
        assert!(o.pass);
        assert_eq!(o.lhs_terms, 4);
        assert_eq!(o.rhs_terms, 4);

        let o = mackey_report(1, 4, 2).unwrap();
        assert!(o.pass);
        assert_eq!(o.lhs_terms, 1);

        let o = mackey_report(2, 3, 1).unwrap();
        assert!(o.pass);
        assert_eq!(o.rhs_terms, 6);
    }

    #[test]
    fn mackey_sweep_small() {
        for b in 1..=3u64 {
            for n in 2..=6u64 {
                for k in 1..n {
                    let o = mackey_report(b, n, k).unwrap();
                    assert!(o.pass, "mackey failed at b={b}, n={n}, k={k}: {:?}", o.witness);
                    assert_eq!(o.lhs_terms as u64, mackey_expected_terms(b, n, k));
                }
            }
        }
    }

    #[test]
    fn conjecture77_examples() {
        // both chain multisets are {(0,0),(0,1),(1,0),(1,1)}
        let o = conjecture77_report(2, 2, 1, 2, 3).unwrap();
        assert!(o.pass, "{:?}", o.witness);
        assert_eq!(o.lhs_terms, 4);

        // a = 1 reduces to a single segment chain
        assert!(check_conjecture77(1, 3, 1, 1, 5).unwrap());

        // exhaustive brute force at a = 3
        assert!(check_conjecture77(3, 2, 1, 3, 7).unwrap());
    }

    #[test]
    fn conjecture77_rejects_inconsistent_parameters() {
        assert!(matches!(
            check_conjecture77(2, 2, 1, 3, 5),
            Err(SuiteError::Domain(_))
        ));
        // eps = 3 does not divide 5 - 1
        assert!(matches!(
            check_conjecture77(3, 2, 1, 3, 5),
            Err(SuiteError::Domain(_))
        ));
    }

    #[test]
    fn conjecture77_case_enumeration_is_consistent() {
        for (a, n, s, eps, ell) in conjecture77_cases(4, 3, 2, &[3, 5, 7]) {
            assert!(check_conjecture77(a, n, s, eps, ell).is_ok());
        }
    }

    #[test]
    fn y_count_examples() {
        // only t = 1 solves 2t ≡ 2 mod 4 within {0, 1}
        assert_eq!(y_count(4, 2, 2, 2).unwrap(), 1);
        assert_eq!(y_count(1, 1, 3, 0).unwrap(), 3);
        assert_eq!(y_count(2, 2, 4, 0).unwrap(), 4);
        assert_eq!(y_count_expected(4, 2, 2), 1);
        assert_eq!(y_count_expected(2, 2, 4), 4);
    }

    #[test]
    fn y_count_rejects_bad_domain() {
        // gcd(4, 2) = 2 does not divide 1
        assert!(matches!(y_count(4, 2, 2, 1), Err(SuiteError::Domain(_))));
        // e'/e = 2 does not divide 3
        assert!(matches!(y_count(4, 2, 3, 0), Err(SuiteError::Domain(_))));
        // cofactor 6 is not a prime power
        assert!(matches!(y_count(2, 2, 12, 0), Err(SuiteError::Domain(_))));
    }

    #[test]
    fn y_count_matches_closed_form_exhaustively() {
        for e_prime in 1..=12u64 {
            for s_prime in 1..=12u64 {
                let e = gcd(e_prime, s_prime);
                let m = e_prime / e;
                for k in 1..=36u64 {
                    if k % m != 0 || !is_admissible_cofactor(k / m, m) {
                        continue;
                    }
                    // every residue class of delta with e | delta
                    for mult in 0..(e_prime / e) {
                        let delta = (mult * e) as i64;
                        assert_eq!(
                            y_count(e_prime, s_prime, k, delta).unwrap(),
                            y_count_expected(e_prime, s_prime, k),
                            "mismatch at e'={e_prime}, s'={s_prime}, k={k}, delta={delta}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn canonical_index_refines_dominance() {
        for n in 1..=7u64 {
            let index = canonical_index(n);
            for (i, a) in index.iter().enumerate() {
                for (j, b) in index.iter().enumerate() {
                    if partition_dominance_leq(a, b) && a != b {
                        assert!(i < j, "{a} dominated by {b} must come first");
                    }
                }
            }
        }
    }

    #[test]
    fn unitriangular_solve_examples() {
        let id3 = UniTriMatrix::identity(3);
        assert_eq!(unitriangular_solve(&id3, &[1, 2, 0]), vec![1, 2, 0]);

        // n = 2: index ((1,1), (2)), E = [[1,0],[1,1]]
        let index = canonical_index(2);
        let e = UniTriMatrix::from_entries(index, vec![vec![1, 0], vec![1, 1]]).unwrap();
        assert_eq!(unitriangular_solve(&e, &[1, 1]), vec![1, 0]);
        assert!(unitriangular_kernel_trivial(&e));
    }

    #[test]
    fn unitriangular_solve_round_trips_randomly() {
        for n in 1..=6u64 {
            for seed in 0..20u64 {
                let e = random_unitriangular(n, seed, 5);
                let r = e.size();
                let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabcd);
                let rhs: Vec<i64> = (0..r).map(|_| rng.gen_range(-9i64..=9)).collect();
                let d = unitriangular_solve(&e, &rhs);
                // E·d must reproduce rhs
                for i in 0..r {
                    let acc: i64 = (0..r).map(|j| e.entry(i, j) * d[j]).sum();
                    assert_eq!(acc, rhs[i]);
                }
            }
        }
    }

    #[test]
    fn unitriangular_inverse_examples() {
        let id = UniTriMatrix::identity(4);
        assert_eq!(unitriangular_inverse(&id), id);

        let index = canonical_index(2);
        let m = UniTriMatrix::from_entries(index, vec![vec![1, 0], vec![1, 1]]).unwrap();
        let inv = unitriangular_inverse(&m);
        assert_eq!(inv.entry(1, 0), -1);
        assert!(m.mul(&inv).unwrap().is_identity());
        assert!(inv.mul(&m).unwrap().is_identity());

        for seed in 0..10u64 {
            let m = random_unitriangular(4, seed, 4);
            let inv = unitriangular_inverse(&m);
            assert!(m.mul(&inv).unwrap().is_identity());
            assert!(inv.mul(&m).unwrap().is_identity());
        }
    }

    #[test]
    fn from_entries_validates_invariants() {
        let index = canonical_index(2);
        // zero diagonal
        assert!(UniTriMatrix::from_entries(index.clone(), vec![vec![0, 0], vec![0, 1]]).is_err());
        // support above the order: (2) does not dominate... (1,1) ⊴ (2) so
        // entry at (row (1,1), col (2)) is illegal
        assert!(UniTriMatrix::from_entries(index, vec![vec![1, 5], vec![0, 1]]).is_err());
    }

    #[test]
    fn twist_symmetry_examples() {
        let m2 = Base::mod_ell("m", 1, 2, 0);
        let orbit = RingElement::from_atom(Atom::cusp(&m2, 0))
            .add(&RingElement::from_atom(Atom::cusp(&m2, 1)));
        assert!(twist_multiplicity_symmetry(&orbit, 1));

        let single = RingElement::from_atom(Atom::cusp(&m2, 0));
        assert!(!twist_multiplicity_symmetry(&single, 1));

        // composition sums over a full modulus orbit are twist symmetric
        let mut sym = RingElement::zero();
        for comp in compositions_of(3, 2) {
            let atoms: Vec<Atom> = comp
                .iter()
                .enumerate()
                .filter(|(_, &len)| len > 0)
                .map(|(i, &len)| Atom::zseg(&m2, i as i64, len))
                .collect();
            sym.add_term(Term::from_atoms(atoms), 1);
        }
        assert!(twist_multiplicity_symmetry(&sym, 1));
        assert_eq!(m2.modulus, Modulus::Finite(2));
    }

    #[test]
    fn bigebra_report_passes() {
        let o = bigebra_report(4, 40, 99);
        assert!(o.pass, "{:?}", o.witness);
    }
}
