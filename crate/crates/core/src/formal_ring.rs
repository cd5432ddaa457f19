//! The free graded commutative bigebra on segment atoms.
//!
//! Elements are integer combinations of atom products. Atom families share a
//! [`Base`]: a label, a graded degree, an exponent period (`∞` for ℓ-adic
//! families, finite for mod-ℓ families), and a segment step — the exponent
//! increment between consecutive positions of a segment chain. For ℓ-adic
//! families exponents are measured in ν_σ-units and the step is 1; for mod-ℓ
//! families exponents live in Z/ε in ν-units and the step is s(σ) mod ε,
//! which encodes that σν_σ ≅ σ whenever ε divides s(σ).
//!
//! The coproduct cuts segments at every position (boundary cuts included, as
//! the counit requires), is primitive on cuspidal atoms, multiplicative on
//! products, and undefined on St atoms.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::multisegment::{Multisegment, Partition};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RingError {
    #[error("coproduct is not defined on {0} atoms")]
    UnsupportedCoproduct(&'static str),
    #[error("operation requires a homogeneous element")]
    NonHomogeneous,
    #[error("cut {cut} out of range for degree {degree}")]
    BadCut { degree: u64, cut: u64 },
    #[error("operation requires all atoms to share one base")]
    MixedBases,
    #[error("cuts {0:?} do not sum to the element degree {1}")]
    BadChain(Vec<u64>, u64),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("unknown base label '{0}'")]
    UnknownBase(String),
}

/// Exponent period of an atom family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Modulus {
    Finite(u64),
    Infinite,
}

/// Shared data of an atom family.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Base {
    pub label: String,
    pub degree: u64,
    pub modulus: Modulus,
    /// Exponent increment per chain position inside a segment.
    pub seg_step: i64,
}

impl Base {
    /// ℓ-adic family: infinite period, exponents in ν_σ-units, step 1.
    pub fn padic(label: impl Into<String>, degree: u64) -> Self {
        assert!(degree >= 1);
        Base {
            label: label.into(),
            degree,
            modulus: Modulus::Infinite,
            seg_step: 1,
        }
    }

    /// Mod-ℓ family with twist period eps and segment step s(σ) mod eps,
    /// exponents in ν-units.
    pub fn mod_ell(label: impl Into<String>, degree: u64, eps: u64, shift: u64) -> Self {
        assert!(degree >= 1 && eps >= 1);
        Base {
            label: label.into(),
            degree,
            modulus: Modulus::Finite(eps),
            seg_step: (shift % eps) as i64,
        }
    }

    /// Finite-group family (z- and st-atoms): unramified twists act trivially.
    pub fn finite(label: impl Into<String>, degree: u64) -> Self {
        assert!(degree >= 1);
        Base {
            label: label.into(),
            degree,
            modulus: Modulus::Finite(1),
            seg_step: 0,
        }
    }

    pub fn reduce_exp(&self, exp: i64) -> i64 {
        match self.modulus {
            Modulus::Infinite => exp,
            Modulus::Finite(e) => exp.rem_euclid(e as i64),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AtomData {
    Cusp,
    Zseg { len: u64 },
    Zfin { len: u64 },
    StFin { shape: Partition },
    StPadic { shape: Partition },
}

/// A basis atom: a base family, a twist exponent, and the kind payload.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    pub base: Base,
    pub exp: i64,
    pub data: AtomData,
}

impl Atom {
    pub fn cusp(base: &Base, exp: i64) -> Self {
        Atom {
            exp: base.reduce_exp(exp),
            base: base.clone(),
            data: AtomData::Cusp,
        }
    }

    pub fn zseg(base: &Base, exp: i64, len: u64) -> Self {
        assert!(len >= 1, "segment atoms need len >= 1");
        Atom {
            exp: base.reduce_exp(exp),
            base: base.clone(),
            data: AtomData::Zseg { len },
        }
    }

    pub fn zfin(base: &Base, len: u64) -> Self {
        assert!(len >= 1, "segment atoms need len >= 1");
        Atom {
            exp: base.reduce_exp(0),
            base: base.clone(),
            data: AtomData::Zfin { len },
        }
    }

    pub fn st_fin(base: &Base, shape: Partition) -> Self {
        assert!(shape.sum() >= 1);
        Atom {
            exp: base.reduce_exp(0),
            base: base.clone(),
            data: AtomData::StFin { shape },
        }
    }

    pub fn st_padic(base: &Base, exp: i64, shape: Partition) -> Self {
        assert!(shape.sum() >= 1);
        Atom {
            exp: base.reduce_exp(exp),
            base: base.clone(),
            data: AtomData::StPadic { shape },
        }
    }

    pub fn degree(&self) -> u64 {
        let factor = match &self.data {
            AtomData::Cusp => 1,
            AtomData::Zseg { len } | AtomData::Zfin { len } => *len,
            AtomData::StFin { shape } | AtomData::StPadic { shape } => shape.sum(),
        };
        self.base.degree * factor
    }

    pub fn twist(&self, j: i64) -> Atom {
        Atom {
            base: self.base.clone(),
            exp: self.base.reduce_exp(self.exp + j),
            data: self.data.clone(),
        }
    }

    fn kind_name(&self) -> &'static str {
        match self.data {
            AtomData::Cusp => "Cusp",
            AtomData::Zseg { .. } => "Zseg",
            AtomData::Zfin { .. } => "Zfin",
            AtomData::StFin { .. } => "StFin",
            AtomData::StPadic { .. } => "StPadic",
        }
    }

    fn render(&self, with_label: bool) -> String {
        let tag = if with_label {
            format!("[{}]", self.base.label)
        } else {
            String::new()
        };
        match &self.data {
            AtomData::Cusp => format!("C{tag}({})", self.exp),
            AtomData::Zseg { len } => format!("Z{tag}({},{})", self.exp, len),
            AtomData::Zfin { len } => format!("z{tag}({len})"),
            AtomData::StFin { shape } => {
                if self.exp == 0 {
                    format!("st{tag}({shape})")
                } else {
                    format!("st{tag}({},{shape})", self.exp)
                }
            }
            AtomData::StPadic { shape } => {
                if self.exp == 0 {
                    format!("St{tag}({shape})")
                } else {
                    format!("St{tag}({},{shape})", self.exp)
                }
            }
        }
    }
}

/// A commutative product of atoms, stored sorted. The empty product is the
/// ring unit.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Term(Vec<Atom>);

impl Term {
    pub fn unit() -> Self {
        Term::default()
    }

    pub fn from_atoms(mut atoms: Vec<Atom>) -> Self {
        atoms.sort();
        Term(atoms)
    }

    pub fn atom(a: Atom) -> Self {
        Term(vec![a])
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.0
    }

    pub fn is_unit(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> u64 {
        self.0.iter().map(Atom::degree).sum()
    }

    pub fn merge(&self, other: &Term) -> Term {
        let mut atoms = self.0.clone();
        atoms.extend(other.0.iter().cloned());
        Term::from_atoms(atoms)
    }

    pub fn twist(&self, j: i64) -> Term {
        Term::from_atoms(self.0.iter().map(|a| a.twist(j)).collect())
    }
}

impl Term {
    fn render_with(&self, with_label: bool) -> String {
        if self.is_unit() {
            return "1".into();
        }
        let parts: Vec<String> = self.0.iter().map(|a| a.render(with_label)).collect();
        parts.join("×")
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let labelled = distinct_bases(self.0.iter()).len() > 1;
        write!(f, "{}", self.render_with(labelled))
    }
}

fn distinct_bases<'a>(atoms: impl Iterator<Item = &'a Atom>) -> Vec<&'a Base> {
    let mut bases: Vec<&Base> = Vec::new();
    for a in atoms {
        if !bases.contains(&&a.base) {
            bases.push(&a.base);
        }
    }
    bases
}

/// Integer combination of atom products.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RingElement {
    terms: BTreeMap<Term, i64>,
}

impl RingElement {
    pub fn zero() -> Self {
        RingElement::default()
    }

    pub fn unit() -> Self {
        RingElement::from_term(Term::unit(), 1)
    }

    pub fn from_term(term: Term, coeff: i64) -> Self {
        let mut el = RingElement::zero();
        el.add_term(term, coeff);
        el
    }

    pub fn from_atom(atom: Atom) -> Self {
        RingElement::from_term(Term::atom(atom), 1)
    }

    pub fn add_term(&mut self, term: Term, coeff: i64) {
        if coeff == 0 {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(term) {
            Entry::Vacant(slot) => {
                slot.insert(coeff);
            }
            Entry::Occupied(mut slot) => {
                *slot.get_mut() += coeff;
                if *slot.get() == 0 {
                    slot.remove();
                }
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Term, i64)> {
        self.terms.iter().map(|(t, &c)| (t, c))
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &RingElement) -> RingElement {
        let mut out = self.clone();
        for (t, c) in other.terms() {
            out.add_term(t.clone(), c);
        }
        out
    }

    pub fn scale(&self, factor: i64) -> RingElement {
        let mut out = RingElement::zero();
        for (t, c) in self.terms() {
            out.add_term(t.clone(), c * factor);
        }
        out
    }

    /// Coefficient of a term, 0 when absent.
    pub fn multiplicity(&self, term: &Term) -> i64 {
        self.terms.get(term).copied().unwrap_or(0)
    }

    /// Degree when homogeneous; None on mixed degrees. The zero element is
    /// homogeneous of every degree and reports 0.
    pub fn homogeneous_degree(&self) -> Option<u64> {
        let mut degree = None;
        for (t, _) in self.terms() {
            let d = t.degree();
            match degree {
                None => degree = Some(d),
                Some(prev) if prev != d => return None,
                _ => {}
            }
        }
        Some(degree.unwrap_or(0))
    }

    /// Shifts every atom exponent by j; a ring automorphism.
    pub fn twist(&self, j: i64) -> RingElement {
        let mut out = RingElement::zero();
        for (t, c) in self.terms() {
            out.add_term(t.twist(j), c);
        }
        out
    }
}

/// Bilinear extension of the multiset union of atoms.
pub fn product(x: &RingElement, y: &RingElement) -> RingElement {
    let mut out = RingElement::zero();
    for (tx, cx) in x.terms() {
        for (ty, cy) in y.terms() {
            out.add_term(tx.merge(ty), cx * cy);
        }
    }
    out
}

/// A formal sum of r-fold tensors of terms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TensorElement {
    arity: usize,
    terms: BTreeMap<Vec<Term>, i64>,
}

impl TensorElement {
    pub fn zero(arity: usize) -> Self {
        TensorElement {
            arity,
            terms: BTreeMap::new(),
        }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn add_term(&mut self, slots: Vec<Term>, coeff: i64) {
        assert_eq!(slots.len(), self.arity);
        if coeff == 0 {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(slots) {
            Entry::Vacant(slot) => {
                slot.insert(coeff);
            }
            Entry::Occupied(mut slot) => {
                *slot.get_mut() += coeff;
                if *slot.get() == 0 {
                    slot.remove();
                }
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<Term>, i64)> {
        self.terms.iter().map(|(t, &c)| (t, c))
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    /// Slotwise product: (a1⊗b1)(a2⊗b2) = a1a2 ⊗ b1b2, extended bilinearly.
    pub fn pointwise_product(&self, other: &TensorElement) -> TensorElement {
        assert_eq!(self.arity, other.arity);
        let mut out = TensorElement::zero(self.arity);
        for (s1, c1) in self.terms() {
            for (s2, c2) in other.terms() {
                let merged: Vec<Term> = s1.iter().zip(s2.iter()).map(|(a, b)| a.merge(b)).collect();
                out.add_term(merged, c1 * c2);
            }
        }
        out
    }

    /// Applies the coproduct to one slot, increasing the arity by one.
    pub fn coproduct_at(&self, slot: usize) -> Result<TensorElement, RingError> {
        assert!(slot < self.arity);
        let mut out = TensorElement::zero(self.arity + 1);
        for (slots, coeff) in self.terms() {
            let inner = coproduct_term(&slots[slot])?;
            for (pair, c) in inner.terms() {
                let mut next = Vec::with_capacity(self.arity + 1);
                next.extend_from_slice(&slots[..slot]);
                next.push(pair[0].clone());
                next.push(pair[1].clone());
                next.extend_from_slice(&slots[slot + 1..]);
                out.add_term(next, coeff * c);
            }
        }
        Ok(out)
    }

    /// First term of `self` missing (or with a different coefficient) in
    /// `other`; a witness for failed comparisons.
    pub fn first_difference(&self, other: &TensorElement) -> Option<(Vec<Term>, i64, i64)> {
        for (slots, c) in self.terms() {
            let oc = other.terms.get(slots).copied().unwrap_or(0);
            if oc != c {
                return Some((slots.clone(), c, oc));
            }
        }
        for (slots, c) in other.terms() {
            if !self.terms.contains_key(slots) {
                return Some((slots.clone(), 0, c));
            }
        }
        None
    }
}

impl fmt::Display for TensorElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (slots, c) in self.terms() {
            let rendered: Vec<String> = slots.iter().map(|t| t.to_string()).collect();
            let body = rendered.join(" ⊗ ");
            if first {
                if c == 1 {
                    write!(f, "{body}")?;
                } else if c == -1 {
                    write!(f, "-{body}")?;
                } else {
                    write!(f, "{c}·{body}")?;
                }
                first = false;
            } else if c < 0 {
                if c == -1 {
                    write!(f, " - {body}")?;
                } else {
                    write!(f, " - {}·{body}", -c)?;
                }
            } else if c == 1 {
                write!(f, " + {body}")?;
            } else {
                write!(f, " + {c}·{body}")?;
            }
        }
        Ok(())
    }
}

fn coproduct_atom(atom: &Atom) -> Result<Vec<(Term, Term)>, RingError> {
    match &atom.data {
        AtomData::Cusp => Ok(vec![
            (Term::atom(atom.clone()), Term::unit()),
            (Term::unit(), Term::atom(atom.clone())),
        ]),
        AtomData::Zseg { len } => {
            let n = *len;
            let mut out = Vec::with_capacity(n as usize + 1);
            for k in 0..=n {
                let left = if k == 0 {
                    Term::unit()
                } else {
                    Term::atom(Atom::zseg(&atom.base, atom.exp, k))
                };
                let right = if k == n {
                    Term::unit()
                } else {
                    Term::atom(Atom::zseg(
                        &atom.base,
                        atom.exp + k as i64 * atom.base.seg_step,
                        n - k,
                    ))
                };
                out.push((left, right));
            }
            Ok(out)
        }
        AtomData::Zfin { len } => {
            let n = *len;
            let mut out = Vec::with_capacity(n as usize + 1);
            for k in 0..=n {
                let left = if k == 0 {
                    Term::unit()
                } else {
                    Term::atom(Atom::zfin(&atom.base, k))
                };
                let right = if k == n {
                    Term::unit()
                } else {
                    Term::atom(Atom::zfin(&atom.base, n - k))
                };
                out.push((left, right));
            }
            Ok(out)
        }
        AtomData::StFin { .. } => Err(RingError::UnsupportedCoproduct("StFin")),
        AtomData::StPadic { .. } => Err(RingError::UnsupportedCoproduct("StPadic")),
    }
}

fn coproduct_term(term: &Term) -> Result<TensorElement, RingError> {
    let mut acc = TensorElement::zero(2);
    acc.add_term(vec![Term::unit(), Term::unit()], 1);
    for atom in term.atoms() {
        let pieces = coproduct_atom(atom)?;
        let mut next = TensorElement::zero(2);
        for (slots, c) in acc.terms() {
            for (l, r) in &pieces {
                next.add_term(vec![slots[0].merge(l), slots[1].merge(r)], c);
            }
        }
        acc = next;
    }
    Ok(acc)
}

/// The restriction coproduct: primitive on cuspidal atoms, segment cuts on
/// Z-atoms (boundary cuts included), multiplicative on products, linear on
/// sums. St atoms are not supported.
pub fn coproduct(x: &RingElement) -> Result<TensorElement, RingError> {
    let mut out = TensorElement::zero(2);
    for (term, coeff) in x.terms() {
        let inner = coproduct_term(term)?;
        for (slots, c) in inner.terms() {
            out.add_term(slots.clone(), coeff * c);
        }
    }
    Ok(out)
}

/// The bidegree-(k, n-k) component of the coproduct of a homogeneous element.
pub fn restrict(x: &RingElement, k: u64) -> Result<TensorElement, RingError> {
    let degree = x.homogeneous_degree().ok_or(RingError::NonHomogeneous)?;
    if k > degree {
        return Err(RingError::BadCut { degree, cut: k });
    }
    let full = coproduct(x)?;
    let mut out = TensorElement::zero(2);
    for (slots, c) in full.terms() {
        if slots[0].degree() == k {
            out.add_term(slots.clone(), c);
        }
    }
    Ok(out)
}

/// Iterated restriction along a list of degree cuts summing to deg(x).
pub fn restrict_chain(x: &RingElement, cuts: &[u64]) -> Result<TensorElement, RingError> {
    let degree = x.homogeneous_degree().ok_or(RingError::NonHomogeneous)?;
    let total: u64 = cuts.iter().sum();
    if cuts.is_empty() || total != degree {
        return Err(RingError::BadChain(cuts.to_vec(), degree));
    }
    let mut acc = TensorElement::zero(1);
    for (t, c) in x.terms() {
        acc.add_term(vec![t.clone()], c);
    }
    for (i, &cut) in cuts[..cuts.len() - 1].iter().enumerate() {
        let expanded = acc.coproduct_at(i)?;
        let mut filtered = TensorElement::zero(expanded.arity());
        for (slots, c) in expanded.terms() {
            if slots[i].degree() == cut {
                filtered.add_term(slots.clone(), c);
            }
        }
        acc = filtered;
    }
    Ok(acc)
}

/// Fully iterated restriction of a single-base element into base-degree
/// slices; returns the multiset of exponent sequences.
pub fn cusp_chain(x: &RingElement) -> Result<BTreeMap<Vec<i64>, i64>, RingError> {
    let degree = x.homogeneous_degree().ok_or(RingError::NonHomogeneous)?;
    let mut base: Option<&Base> = None;
    for (t, _) in x.terms() {
        for atom in t.atoms() {
            match base {
                None => base = Some(&atom.base),
                Some(b) if *b != atom.base => return Err(RingError::MixedBases),
                _ => {}
            }
        }
    }
    let mut chains = BTreeMap::new();
    let base = match base {
        Some(b) => b,
        None => {
            // only unit/zero terms: the empty chain
            for (_, c) in x.terms() {
                *chains.entry(Vec::new()).or_insert(0) += c;
            }
            return Ok(chains);
        }
    };
    debug_assert_eq!(degree % base.degree, 0);
    let positions = degree / base.degree;
    let cuts = vec![base.degree; positions as usize];
    let expanded = restrict_chain(x, &cuts)?;
    for (slots, c) in expanded.terms() {
        let mut seq = Vec::with_capacity(slots.len());
        for slot in slots {
            let atoms = slot.atoms();
            if atoms.len() != 1 {
                return Err(RingError::NonHomogeneous);
            }
            let a = &atoms[0];
            match &a.data {
                AtomData::Cusp => seq.push(a.exp),
                AtomData::Zseg { len } | AtomData::Zfin { len } if *len == 1 => seq.push(a.exp),
                _ => return Err(RingError::NonHomogeneous),
            }
        }
        *chains.entry(seq).or_insert(0) += c;
    }
    chains.retain(|_, c| *c != 0);
    Ok(chains)
}

/// Pairs a formal multisegment with a cuspidal atom family: `[a, n]` maps to
/// the segment atom starting at `a` steps of ν_σ above the base.
pub fn pair_with_cuspidal(mu: &Multisegment, base: &Base) -> Vec<Atom> {
    mu.segments()
        .iter()
        .map(|seg| Atom::zseg(base, seg.start * base.seg_step, seg.len))
        .collect()
}

impl fmt::Display for RingElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        // label atoms whenever the element as a whole touches several bases,
        // so the rendering parses back unambiguously
        let labelled =
            distinct_bases(self.terms.keys().flat_map(|t| t.atoms().iter())).len() > 1;
        let mut first = true;
        for (term, c) in self.terms() {
            let body = term.render_with(labelled);
            if first {
                if c == 1 && !term.is_unit() {
                    write!(f, "{body}")?;
                } else if c == -1 && !term.is_unit() {
                    write!(f, "-{body}")?;
                } else if term.is_unit() {
                    write!(f, "{c}")?;
                } else {
                    write!(f, "{c}·{body}")?;
                }
                first = false;
            } else {
                let (sign, mag) = if c < 0 { (" - ", -c) } else { (" + ", c) };
                write!(f, "{sign}")?;
                if term.is_unit() {
                    write!(f, "{mag}")?;
                } else if mag == 1 {
                    write!(f, "{body}")?;
                } else {
                    write!(f, "{mag}·{body}")?;
                }
            }
        }
        Ok(())
    }
}

/// Label-resolved parsing context for the canonical text rendering.
#[derive(Debug, Clone, Default)]
pub struct BaseTable {
    bases: BTreeMap<String, Base>,
    default_label: Option<String>,
}

impl BaseTable {
    pub fn new() -> Self {
        BaseTable::default()
    }

    pub fn with_default(base: Base) -> Self {
        let mut table = BaseTable::new();
        table.default_label = Some(base.label.clone());
        table.insert(base);
        table
    }

    pub fn insert(&mut self, base: Base) {
        if self.default_label.is_none() {
            self.default_label = Some(base.label.clone());
        }
        self.bases.insert(base.label.clone(), base);
    }

    fn resolve(&self, label: Option<&str>) -> Result<&Base, RingError> {
        match label {
            Some(l) => self
                .bases
                .get(l)
                .ok_or_else(|| RingError::UnknownBase(l.to_string())),
            None => {
                let l = self
                    .default_label
                    .as_ref()
                    .ok_or_else(|| RingError::UnknownBase("<default>".into()))?;
                self.bases
                    .get(l)
                    .ok_or_else(|| RingError::UnknownBase(l.clone()))
            }
        }
    }
}

/// Parses the canonical rendering back into an element, resolving base labels
/// through the table. Bare atoms use the table's default base.
pub fn parse_element(text: &str, table: &BaseTable) -> Result<RingElement, RingError> {
    let text = text.trim();
    if text == "0" || text.is_empty() {
        return Ok(RingElement::zero());
    }
    let mut out = RingElement::zero();
    for (sign, chunk) in split_signed_terms(text) {
        let (coeff, rest) = split_coeff(chunk)?;
        let term = if rest.is_empty() || rest == "1" {
            Term::unit()
        } else {
            let mut atoms = Vec::new();
            for piece in rest.split(['×', '*']) {
                atoms.push(parse_atom(piece.trim(), table)?);
            }
            Term::from_atoms(atoms)
        };
        out.add_term(term, sign * coeff);
    }
    Ok(out)
}

fn split_signed_terms(text: &str) -> Vec<(i64, &str)> {
    let mut out = Vec::new();
    let mut rest = text.trim();
    let mut sign = 1i64;
    if let Some(r) = rest.strip_prefix('-') {
        sign = -1;
        rest = r.trim_start();
    }
    loop {
        if let Some(pos) = find_top_level_sign(rest) {
            let (chunk, tail) = rest.split_at(pos);
            out.push((sign, chunk.trim()));
            sign = if tail.starts_with(" - ") { -1 } else { 1 };
            rest = tail[3..].trim_start();
        } else {
            out.push((sign, rest.trim()));
            return out;
        }
    }
}

fn find_top_level_sign(text: &str) -> Option<usize> {
    let plus = text.find(" + ");
    let minus = text.find(" - ");
    match (plus, minus) {
        (Some(p), Some(m)) => Some(p.min(m)),
        (Some(p), None) => Some(p),
        (None, Some(m)) => Some(m),
        (None, None) => None,
    }
}

fn split_coeff(chunk: &str) -> Result<(i64, &str), RingError> {
    if let Some((head, tail)) = chunk.split_once(['·']) {
        let coeff: i64 = head
            .trim()
            .parse()
            .map_err(|_| RingError::Parse(format!("bad coefficient '{head}'")))?;
        return Ok((coeff, tail.trim()));
    }
    if chunk
        .chars()
        .all(|ch| ch.is_ascii_digit() || ch == '-' || ch == '+')
    {
        let coeff: i64 = chunk
            .trim()
            .parse()
            .map_err(|_| RingError::Parse(format!("bad constant '{chunk}'")))?;
        return Ok((coeff, ""));
    }
    Ok((1, chunk.trim()))
}

fn parse_atom(piece: &str, table: &BaseTable) -> Result<Atom, RingError> {
    let bad = || RingError::Parse(format!("bad atom '{piece}'"));
    let open = piece.find('(').ok_or_else(bad)?;
    let head = &piece[..open];
    let args = piece[open..]
        .strip_prefix('(')
        .and_then(|p| p.strip_suffix(')'))
        .ok_or_else(bad)?;
    let (kind, label) = match head.find('[') {
        Some(b) => {
            let label = head[b..]
                .strip_prefix('[')
                .and_then(|l| l.strip_suffix(']'))
                .ok_or_else(bad)?;
            (&head[..b], Some(label))
        }
        None => (head, None),
    };
    let base = table.resolve(label)?;
    let parse_int = |s: &str| -> Result<i64, RingError> {
        s.trim()
            .parse()
            .map_err(|_| RingError::Parse(format!("bad integer '{s}' in '{piece}'")))
    };
    match kind {
        "C" => Ok(Atom::cusp(base, parse_int(args)?)),
        "Z" => {
            let (e, n) = args.split_once(',').ok_or_else(bad)?;
            Ok(Atom::zseg(base, parse_int(e)?, parse_int(n)? as u64))
        }
        "z" => Ok(Atom::zfin(base, parse_int(args)? as u64)),
        "st" | "St" => {
            let (exp, shape_text) = match args.find('(') {
                Some(0) => (0i64, args),
                Some(p) => {
                    let head = args[..p].trim().trim_end_matches(',');
                    (parse_int(head)?, &args[p..])
                }
                None => return Err(bad()),
            };
            let shape: Partition = shape_text
                .parse()
                .map_err(|_| RingError::Parse(format!("bad shape in '{piece}'")))?;
            if kind == "st" {
                Ok(Atom::st_fin(base, shape))
            } else {
                Ok(Atom::st_padic(base, exp, shape))
            }
        }
        _ => Err(bad()),
    }
}

/// JSON export of the term map.
pub fn element_to_json(x: &RingElement) -> serde_json::Value {
    use serde_json::json;
    let terms: Vec<serde_json::Value> = x
        .terms()
        .map(|(t, c)| {
            let atoms: Vec<serde_json::Value> = t
                .atoms()
                .iter()
                .map(|a| {
                    let mut obj = serde_json::Map::new();
                    obj.insert("kind".into(), json!(a.kind_name()));
                    obj.insert("base".into(), json!(a.base.label));
                    obj.insert("exp".into(), json!(a.exp));
                    match &a.data {
                        AtomData::Zseg { len } | AtomData::Zfin { len } => {
                            obj.insert("len".into(), json!(len));
                        }
                        AtomData::StFin { shape } | AtomData::StPadic { shape } => {
                            obj.insert("shape".into(), json!(shape.to_string()));
                        }
                        AtomData::Cusp => {}
                    }
                    serde_json::Value::Object(obj)
                })
                .collect();
            json!({ "coeff": c, "atoms": atoms })
        })
        .collect();
    json!({ "terms": terms })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn padic() -> Base {
        Base::padic("s", 1)
    }

    fn zs(exp: i64, len: u64) -> RingElement {
        RingElement::from_atom(Atom::zseg(&padic(), exp, len))
    }

    #[test]
    fn product_examples() {
        let x = zs(0, 1);
        assert_eq!(product(&RingElement::unit(), &x), x);
        let y = zs(1, 1);
        let xy = product(&x, &y);
        assert_eq!(xy.term_count(), 1);
        let expected = Term::from_atoms(vec![
            Atom::zseg(&padic(), 0, 1),
            Atom::zseg(&padic(), 1, 1),
        ]);
        assert_eq!(xy.multiplicity(&expected), 1);
        assert_eq!(
            xy.homogeneous_degree(),
            Some(x.homogeneous_degree().unwrap() + y.homogeneous_degree().unwrap())
        );
    }

    #[test]
    fn coproduct_of_segment() {
        // Δ(Z(0,2)) = 1⊗Z(0,2) + Z(0,1)⊗Z(1,1) + Z(0,2)⊗1
        let d = coproduct(&zs(0, 2)).unwrap();
        assert_eq!(d.term_count(), 3);
        let mid = vec![
            Term::atom(Atom::zseg(&padic(), 0, 1)),
            Term::atom(Atom::zseg(&padic(), 1, 1)),
        ];
        assert_eq!(d.terms().find(|(t, _)| **t == mid).map(|(_, c)| c), Some(1));
    }

    #[test]
    fn coproduct_of_unit_and_bigebra_square() {
        let d = coproduct(&RingElement::unit()).unwrap();
        assert_eq!(d.term_count(), 1);

        // Δ(z(τ,1)·z(τ,1)) = Δ(z(τ,1))^2, four terms grouped into three
        let tau = Base::finite("t", 1);
        let z1 = RingElement::from_atom(Atom::zfin(&tau, 1));
        let sq = product(&z1, &z1);
        let left = coproduct(&sq).unwrap();
        let d1 = coproduct(&z1).unwrap();
        let right = d1.pointwise_product(&d1);
        assert_eq!(left, right);
        // z(τ,1)z(τ,1) ⊗ 1, z(τ,1) ⊗ z(τ,1) twice, 1 ⊗ z(τ,1)z(τ,1)
        let cross = vec![
            Term::atom(Atom::zfin(&tau, 1)),
            Term::atom(Atom::zfin(&tau, 1)),
        ];
        assert_eq!(
            left.terms().find(|(t, _)| **t == cross).map(|(_, c)| c),
            Some(2)
        );
    }

    #[test]
    fn restrict_examples() {
        // restrict(Z(0,3), 1) = Z(0,1) ⊗ Z(1,2)
        let r = restrict(&zs(0, 3), 1).unwrap();
        assert_eq!(r.term_count(), 1);
        let expected = vec![
            Term::atom(Atom::zseg(&padic(), 0, 1)),
            Term::atom(Atom::zseg(&padic(), 1, 2)),
        ];
        assert_eq!(r.terms().next().unwrap(), (&expected, 1));

        // full cut: z(τ,2) ⊗ 1
        let tau = Base::finite("t", 1);
        let z2 = RingElement::from_atom(Atom::zfin(&tau, 2));
        let r = restrict(&z2, 2).unwrap();
        assert_eq!(r.term_count(), 1);
        let expected = vec![Term::atom(Atom::zfin(&tau, 2)), Term::unit()];
        assert_eq!(r.terms().next().unwrap(), (&expected, 1));

        // restrict(z(τ,1)·z(ρ,1), 1) has the two crossed terms
        let rho = Base::finite("r", 1);
        let prod = product(
            &RingElement::from_atom(Atom::zfin(&tau, 1)),
            &RingElement::from_atom(Atom::zfin(&rho, 1)),
        );
        let r = restrict(&prod, 1).unwrap();
        assert_eq!(r.term_count(), 2);
    }

    #[test]
    fn restrict_rejects_non_homogeneous() {
        let mixed = zs(0, 1).add(&zs(0, 2));
        assert!(matches!(
            restrict(&mixed, 1),
            Err(RingError::NonHomogeneous)
        ));
    }

    #[test]
    fn cusp_chain_examples() {
        let chains = cusp_chain(&zs(0, 3)).unwrap();
        assert_eq!(chains.len(), 1);
        assert_eq!(chains.get(&vec![0, 1, 2]), Some(&1));

        let c = RingElement::from_atom(Atom::cusp(&padic(), 0));
        let chains = cusp_chain(&c).unwrap();
        assert_eq!(chains.get(&vec![0]), Some(&1));

        let prod = product(&zs(0, 1), &zs(1, 1));
        let chains = cusp_chain(&prod).unwrap();
        assert_eq!(chains.get(&vec![0, 1]), Some(&1));
        assert_eq!(chains.get(&vec![1, 0]), Some(&1));
        assert_eq!(chains.len(), 2);
    }

    #[test]
    fn cusp_chain_counts() {
        for n in 1..=5u64 {
            let chains = cusp_chain(&zs(0, n)).unwrap();
            assert_eq!(chains.len(), 1, "single chain for Z(0,{n})");
        }
        // distinct starts: all permutations
        for len in 1..=5usize {
            let prod =
                (0..len as i64).fold(RingElement::unit(), |acc, i| product(&acc, &zs(i, 1)));
            let chains = cusp_chain(&prod).unwrap();
            let factorial: usize = (1..=len).product();
            assert_eq!(chains.len(), factorial, "permutation count at {len}");
        }
        // repeated starts: permutations of a multiset, with multiplicity
        let rep = product(&product(&zs(0, 1), &zs(0, 1)), &zs(1, 1));
        let chains = cusp_chain(&rep).unwrap();
        let total: i64 = chains.values().sum();
        assert_eq!(total, 6);
        assert_eq!(chains.len(), 3, "three arrangements of {{0,0,1}}");
    }

    #[test]
    fn cusp_chain_rejects_mixed_bases() {
        let other = Base::padic("o", 1);
        let mixed = product(
            &zs(0, 1),
            &RingElement::from_atom(Atom::zseg(&other, 0, 1)),
        );
        assert!(matches!(cusp_chain(&mixed), Err(RingError::MixedBases)));
    }

    #[test]
    fn twist_examples() {
        assert_eq!(zs(0, 2).twist(1), zs(1, 2));
        let x = zs(3, 2);
        assert_eq!(x.twist(0), x);
        let mod2 = Base::mod_ell("m", 1, 2, 0);
        let c1 = RingElement::from_atom(Atom::cusp(&mod2, 1));
        let c0 = RingElement::from_atom(Atom::cusp(&mod2, 0));
        assert_eq!(c1.twist(1), c0);
    }

    #[test]
    fn twist_commutes_with_coproduct_and_product() {
        let bases = vec![
            Base::padic("p", 1),
            Base::mod_ell("m2", 1, 2, 1),
            Base::mod_ell("m3", 1, 3, 2),
            Base::mod_ell("m4", 2, 4, 2),
        ];
        for base in &bases {
            for j in -3i64..=3 {
                let x = RingElement::from_atom(Atom::zseg(base, 1, 3));
                let y = RingElement::from_atom(Atom::cusp(base, 2));
                let p = product(&x, &y);
                assert_eq!(p.twist(j), product(&x.twist(j), &y.twist(j)));
                let d = coproduct(&p).unwrap();
                let mut twisted = TensorElement::zero(2);
                for (slots, c) in d.terms() {
                    twisted.add_term(vec![slots[0].twist(j), slots[1].twist(j)], c);
                }
                assert_eq!(twisted, coproduct(&p.twist(j)).unwrap());
            }
        }
    }

    #[test]
    fn multiplicity_examples() {
        let x = zs(0, 1).scale(2);
        assert_eq!(x.multiplicity(&Term::atom(Atom::zseg(&padic(), 0, 1))), 2);
        assert_eq!(
            RingElement::unit().multiplicity(&Term::atom(Atom::zseg(&padic(), 0, 1))),
            0
        );
        // coproduct components agree with restrict on Z(0,2)
        let d = coproduct(&zs(0, 2)).unwrap();
        let r = restrict(&zs(0, 2), 1).unwrap();
        for (slots, c) in r.terms() {
            assert_eq!(
                d.terms().find(|(t, _)| *t == slots).map(|(_, cc)| cc),
                Some(c)
            );
        }
    }

    #[test]
    fn coassociativity_on_atoms() {
        let tau = Base::finite("t", 1);
        for n in 1..=6u64 {
            for el in [
                zs(0, n),
                RingElement::from_atom(Atom::zfin(&tau, n)),
            ] {
                let d = coproduct(&el).unwrap();
                let left = d.coproduct_at(0).unwrap();
                let right = d.coproduct_at(1).unwrap();
                assert_eq!(left, right, "coassociativity for n={n}");
            }
        }
    }

    #[test]
    fn grading_of_coproduct() {
        for n in 1..=6u64 {
            let el = zs(0, n);
            let d = coproduct(&el).unwrap();
            for (slots, _) in d.terms() {
                assert_eq!(slots[0].degree() + slots[1].degree(), n);
            }
        }
    }

    fn random_element(rng: &mut StdRng, bases: &[Base], max_atoms: usize) -> RingElement {
        let mut out = RingElement::zero();
        let terms = rng.gen_range(1..=3);
        for _ in 0..terms {
            let mut atoms = Vec::new();
            for _ in 0..rng.gen_range(0..=max_atoms) {
                let base = &bases[rng.gen_range(0..bases.len())];
                let exp = rng.gen_range(-4i64..=4);
                match rng.gen_range(0..3) {
                    0 => atoms.push(Atom::cusp(base, exp)),
                    1 => atoms.push(Atom::zseg(base, exp, rng.gen_range(1..=3))),
                    _ => atoms.push(Atom::zfin(base, rng.gen_range(1..=3))),
                }
            }
            out.add_term(Term::from_atoms(atoms), rng.gen_range(-3i64..=3));
        }
        out
    }

    #[test]
    fn product_is_commutative_associative_random() {
        let bases = vec![Base::padic("p", 1), Base::mod_ell("m", 1, 3, 1)];
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..60 {
            let x = random_element(&mut rng, &bases, 3);
            let y = random_element(&mut rng, &bases, 3);
            let z = random_element(&mut rng, &bases, 3);
            assert_eq!(product(&x, &y), product(&y, &x));
            assert_eq!(
                product(&product(&x, &y), &z),
                product(&x, &product(&y, &z))
            );
        }
    }

    #[test]
    fn bigebra_law_random() {
        let bases = vec![Base::padic("p", 1), Base::finite("t", 1)];
        let mut rng = StdRng::seed_from_u64(11);
        for _ in 0..40 {
            let x = random_element(&mut rng, &bases, 2);
            let y = random_element(&mut rng, &bases, 2);
            let lhs = coproduct(&product(&x, &y)).unwrap();
            let rhs = coproduct(&x)
                .unwrap()
                .pointwise_product(&coproduct(&y).unwrap());
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn st_atoms_refuse_coproduct() {
        let b = Base::padic("p", 1);
        let st = RingElement::from_atom(Atom::st_padic(&b, 0, Partition::new(vec![2, 1])));
        assert!(matches!(
            coproduct(&st),
            Err(RingError::UnsupportedCoproduct("StPadic"))
        ));
    }

    #[test]
    fn render_and_parse_round_trip() {
        let b = padic();
        let table = BaseTable::with_default(b.clone());
        let el = zs(0, 2)
            .scale(2)
            .add(&product(&zs(1, 1), &RingElement::from_atom(Atom::cusp(&b, 1))))
            .add(&RingElement::unit().scale(-3));
        let text = el.to_string();
        let parsed = parse_element(&text, &table).unwrap();
        assert_eq!(parsed, el, "round trip of '{text}'");

        // multi-base rendering keeps labels
        let tau = Base::finite("t1", 1);
        let rho = Base::finite("t2", 1);
        let mut table = BaseTable::new();
        table.insert(tau.clone());
        table.insert(rho.clone());
        let el = product(
            &RingElement::from_atom(Atom::zfin(&tau, 2)),
            &RingElement::from_atom(Atom::zfin(&rho, 1)),
        );
        let text = el.to_string();
        assert!(text.contains("z[t1](2)") && text.contains("z[t2](1)"), "{text}");
        assert_eq!(parse_element(&text, &table).unwrap(), el);

        // St atoms round-trip too
        let st = RingElement::from_atom(Atom::st_padic(&b, 2, Partition::new(vec![2, 1])));
        let text = st.to_string();
        assert_eq!(parse_element(&text, &table_with(&b)).unwrap(), st, "{text}");
    }

    fn table_with(b: &Base) -> BaseTable {
        BaseTable::with_default(b.clone())
    }

    #[test]
    fn json_export_shape() {
        let el = zs(0, 2).scale(2);
        let v = element_to_json(&el);
        assert_eq!(v["terms"][0]["coeff"], 2);
        assert_eq!(v["terms"][0]["atoms"][0]["kind"], "Zseg");
        assert_eq!(v["terms"][0]["atoms"][0]["len"], 2);
    }

    #[test]
    fn pair_with_cuspidal_examples() {
        let plain = padic();
        let mu: Multisegment = "[0,3]".parse().unwrap();
        assert_eq!(
            pair_with_cuspidal(&mu, &plain),
            vec![Atom::zseg(&plain, 0, 3)]
        );
        let mu: Multisegment = "[2,1]+[0,1]".parse().unwrap();
        let atoms = pair_with_cuspidal(&mu, &plain);
        assert!(atoms.contains(&Atom::zseg(&plain, 2, 1)));
        assert!(atoms.contains(&Atom::zseg(&plain, 0, 1)));

        // with σν_σ ≅ σ all starts collapse: [5,2] ⊠ σ = Z(0,2)
        let collapsed = Base::mod_ell("m", 1, 2, 2);
        let mu: Multisegment = "[5,2]".parse().unwrap();
        assert_eq!(
            pair_with_cuspidal(&mu, &collapsed),
            vec![Atom::zseg(&collapsed, 0, 2)]
        );
    }
}
