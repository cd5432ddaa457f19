//! Exact-arithmetic segment calculus.
//!
//! This crate provides the building blocks for bookkeeping around cuspidal
//! parameter records and their reductions modulo a prime ℓ:
//!
//! - [`arith`]: multiplicative orders, ℓ-part extraction, and the ℓ-part of
//!   `q^n - 1` by valuation arithmetic.
//! - [`cuspidal`]: parameter records for ℓ-adic cuspidals and their mod-ℓ
//!   reductions, the constraint system validating a candidate reduction, and
//!   the derived invariants `ε`, `ω`, `w`, `t`, `c`.
//! - [`multisegment`]: formal segments, multisegments, partitions,
//!   compositions, dominance order and conjugation.
//! - [`formal_ring`]: a free graded commutative bigebra on segment atoms with
//!   product, restriction coproduct, cuspidal-support chains and the twist
//!   action.
//! - [`identity_suite`]: executable checks of the finite identities the
//!   surrounding theory rests on (composition sums, Mackey rearrangement,
//!   congruence counts, unitriangular systems).
//! - [`census`]: exhaustive enumeration of consistent parameter tuples,
//!   congruence-class counting and the Speh-level transport of invariants.
//! - [`jl_transfer`]: the parameter-level transfer with its sign bookkeeping
//!   and the uniqueness squeeze on the `w` invariant.

pub mod arith;
pub mod census;
pub mod cuspidal;
pub mod formal_ring;
pub mod identity_suite;
pub mod jl_transfer;
pub mod multisegment;

pub use arith::{c_value, ell_part, mult_order, prime_to_ell_part, PrimePair};
pub use census::{SpehRecord, Universe, UniverseConfig};
pub use cuspidal::{CuspidalParam, Level, ModLReduction, ValidationReport};
pub use formal_ring::{Atom, Base, Modulus, RingElement, Term};
pub use identity_suite::UniTriMatrix;
pub use jl_transfer::TransferRecord;
pub use multisegment::{FormalSegment, Multisegment, Partition};
