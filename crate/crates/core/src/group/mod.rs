//! Prime-order additive groups.
//!
//! Two backends implement [`Group`]: [`P256Group`] for real use and
//! [`ToyGroup`], the integers mod a small prime under addition, whose scalar
//! multiplication is plain modular multiplication. The toy group makes every
//! protocol value hand-checkable.

mod p256;
mod toy;

use std::fmt;

use rand::{CryptoRng, RngCore};
use serde::{Deserialize, Serialize};

use crate::error::Result;

pub use self::p256::P256Group;
pub use self::toy::{ToyElement, ToyGroup, ToyScalar};

/// Identifies a concrete group instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    P256,
    Toy { q: u64 },
}

impl Backend {
    pub const P256_TAG: u8 = 0x01;
    pub const TOY_TAG: u8 = 0x02;

    /// Picks the backend for a security parameter given in bits.
    ///
    /// 256 selects P-256; 2..=31 selects the toy group whose order is the
    /// largest prime below `2^bits` (so 4 bits gives q = 13).
    pub fn for_security_bits(bits: u32) -> Result<Self> {
        match bits {
            256 => Ok(Backend::P256),
            2..=31 => {
                let mut q = (1u64 << bits) - 1;
                while !toy::is_prime(q) {
                    q -= 1;
                }
                Ok(Backend::Toy { q })
            }
            _ => Err(crate::Error::UnsupportedParameter(format!(
                "no backend for a {bits}-bit group order (use 256, or 2..=31 for the toy group)"
            ))),
        }
    }

    pub fn to_bytes(self) -> Vec<u8> {
        match self {
            Backend::P256 => vec![Self::P256_TAG],
            Backend::Toy { q } => {
                let mut out = vec![Self::TOY_TAG];
                out.extend_from_slice(&q.to_be_bytes());
                out
            }
        }
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Backend::P256 => f.write_str("p256"),
            Backend::Toy { q } => write!(f, "toy(q={q})"),
        }
    }
}

/// Operations an instrumented backend can tally. Uninstrumented groups
/// ignore them.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CostOp {
    SymEncrypt,
    SymDecrypt,
}

/// A cyclic group of prime order q, written additively, together with its
/// scalar field Z_q.
///
/// Scalars are always reduced mod q. Elements are either the identity or of
/// order q.
pub trait Group: Clone + fmt::Debug {
    type Scalar: Copy + Eq + fmt::Debug;
    type Element: Copy + Eq + fmt::Debug;

    fn backend(&self) -> Backend;

    fn generator(&self) -> Self::Element;
    fn identity(&self) -> Self::Element;
    fn is_identity(&self, e: &Self::Element) -> bool {
        *e == self.identity()
    }

    fn scalar_from_u64(&self, v: u64) -> Self::Scalar;
    fn scalar_is_zero(&self, a: &Self::Scalar) -> bool {
        *a == self.scalar_from_u64(0)
    }
    fn scalar_add(&self, a: &Self::Scalar, b: &Self::Scalar) -> Self::Scalar;
    fn scalar_neg(&self, a: &Self::Scalar) -> Self::Scalar;
    fn scalar_mul(&self, a: &Self::Scalar, b: &Self::Scalar) -> Self::Scalar;
    /// Fails with [`crate::Error::ZeroInversion`] on zero.
    fn scalar_invert(&self, a: &Self::Scalar) -> Result<Self::Scalar>;

    fn point_add(&self, a: &Self::Element, b: &Self::Element) -> Self::Element;
    fn point_neg(&self, a: &Self::Element) -> Self::Element;
    fn point_mul(&self, k: &Self::Scalar, p: &Self::Element) -> Self::Element;

    /// Uniform scalar in [1, q-1].
    fn random_nonzero_scalar<R: RngCore + CryptoRng + ?Sized>(&self, rng: &mut R)
        -> Self::Scalar;

    /// Interprets 64 big-endian bytes as an integer, reduces it mod q and
    /// maps a zero result to one.
    fn scalar_from_wide(&self, wide: &[u8; 64]) -> Self::Scalar;

    fn element_len(&self) -> usize;
    fn scalar_len(&self) -> usize;
    fn encode_element(&self, e: &Self::Element) -> Vec<u8>;
    fn decode_element(&self, bytes: &[u8]) -> Result<Self::Element>;
    fn encode_scalar(&self, s: &Self::Scalar) -> Vec<u8>;
    fn decode_scalar(&self, bytes: &[u8]) -> Result<Self::Scalar>;

    /// Instrumentation hook for operations that live outside the group.
    fn tally(&self, _op: CostOp) {}
}
