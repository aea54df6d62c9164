use rand::{CryptoRng, RngCore};

use super::{Backend, Group};
use crate::error::{Error, Result};

/// The additive group (Z_q, +) with generator 1.
///
/// Scalar multiplication is modular multiplication, so every protocol value
/// can be recomputed by hand. Variable-time; for tests and vectors only.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ToyGroup {
    q: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ToyScalar(u64);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ToyElement(u64);

impl ToyScalar {
    pub fn value(self) -> u64 {
        self.0
    }
}

impl ToyElement {
    pub fn value(self) -> u64 {
        self.0
    }
}

pub(crate) fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

const ENCODED_LEN: usize = 8;

impl ToyGroup {
    /// The default oracle group, q = 13.
    pub const DEFAULT_ORDER: u64 = 13;

    /// `q` must be a prime below 2^32.
    pub fn new(q: u64) -> Result<Self> {
        if q >= 1 << 32 || !is_prime(q) {
            return Err(Error::UnsupportedParameter(format!(
                "toy group order must be a prime below 2^32, got {q}"
            )));
        }
        Ok(ToyGroup { q })
    }

    pub fn order(&self) -> u64 {
        self.q
    }

    pub fn scalar(&self, v: u64) -> ToyScalar {
        ToyScalar(v % self.q)
    }

    pub fn element(&self, v: u64) -> ToyElement {
        ToyElement(v % self.q)
    }

    fn mulmod(&self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.q as u128) as u64
    }

    fn decode_u64(&self, bytes: &[u8]) -> Result<u64> {
        let arr: [u8; ENCODED_LEN] = bytes
            .try_into()
            .map_err(|_| Error::InvalidEncoding("toy value must be 8 bytes"))?;
        let v = u64::from_be_bytes(arr);
        if v >= self.q {
            return Err(Error::InvalidEncoding("toy value out of range"));
        }
        Ok(v)
    }
}

impl Default for ToyGroup {
    fn default() -> Self {
        ToyGroup {
            q: Self::DEFAULT_ORDER,
        }
    }
}

impl Group for ToyGroup {
    type Scalar = ToyScalar;
    type Element = ToyElement;

    fn backend(&self) -> Backend {
        Backend::Toy { q: self.q }
    }

    fn generator(&self) -> ToyElement {
        ToyElement(1)
    }

    fn identity(&self) -> ToyElement {
        ToyElement(0)
    }

    fn scalar_from_u64(&self, v: u64) -> ToyScalar {
        self.scalar(v)
    }

    fn scalar_add(&self, a: &ToyScalar, b: &ToyScalar) -> ToyScalar {
        ToyScalar((a.0 + b.0) % self.q)
    }

    fn scalar_neg(&self, a: &ToyScalar) -> ToyScalar {
        ToyScalar((self.q - a.0) % self.q)
    }

    fn scalar_mul(&self, a: &ToyScalar, b: &ToyScalar) -> ToyScalar {
        ToyScalar(self.mulmod(a.0, b.0))
    }

    fn scalar_invert(&self, a: &ToyScalar) -> Result<ToyScalar> {
        if a.0 == 0 {
            return Err(Error::ZeroInversion);
        }
        // Fermat: a^(q-2)
        let (mut base, mut exp, mut acc) = (a.0, self.q - 2, 1u64);
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mulmod(acc, base);
            }
            base = self.mulmod(base, base);
            exp >>= 1;
        }
        Ok(ToyScalar(acc))
    }

    fn point_add(&self, a: &ToyElement, b: &ToyElement) -> ToyElement {
        ToyElement((a.0 + b.0) % self.q)
    }

    fn point_neg(&self, a: &ToyElement) -> ToyElement {
        ToyElement((self.q - a.0) % self.q)
    }

    fn point_mul(&self, k: &ToyScalar, p: &ToyElement) -> ToyElement {
        ToyElement(self.mulmod(k.0, p.0))
    }

    fn random_nonzero_scalar<R: RngCore + CryptoRng + ?Sized>(&self, rng: &mut R) -> ToyScalar {
        // Rejection sampling on a big-endian u64; a tape holding v < q yields v.
        let zone = u64::MAX - (u64::MAX % self.q);
        loop {
            let mut buf = [0u8; 8];
            rng.fill_bytes(&mut buf);
            let v = u64::from_be_bytes(buf);
            if v >= zone {
                continue;
            }
            let s = v % self.q;
            if s != 0 {
                return ToyScalar(s);
            }
        }
    }

    fn scalar_from_wide(&self, wide: &[u8; 64]) -> ToyScalar {
        let q = self.q as u128;
        let v = wide.iter().fold(0u128, |acc, &b| (acc * 256 + b as u128) % q) as u64;
        ToyScalar(if v == 0 { 1 } else { v })
    }

    fn element_len(&self) -> usize {
        ENCODED_LEN
    }

    fn scalar_len(&self) -> usize {
        ENCODED_LEN
    }

    fn encode_element(&self, e: &ToyElement) -> Vec<u8> {
        e.0.to_be_bytes().to_vec()
    }

    fn decode_element(&self, bytes: &[u8]) -> Result<ToyElement> {
        self.decode_u64(bytes).map(ToyElement)
    }

    fn encode_scalar(&self, s: &ToyScalar) -> Vec<u8> {
        s.0.to_be_bytes().to_vec()
    }

    fn decode_scalar(&self, bytes: &[u8]) -> Result<ToyScalar> {
        self.decode_u64(bytes).map(ToyScalar)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g() -> ToyGroup {
        ToyGroup::default()
    }

    #[test]
    fn scalar_arithmetic_mod_13() {
        let g = g();
        assert_eq!(g.scalar_mul(&g.scalar(7), &g.scalar(2)), g.scalar(1));
        assert_eq!(g.scalar_invert(&g.scalar(7)).unwrap(), g.scalar(2));
        assert_eq!(g.scalar_invert(&g.scalar(1)).unwrap(), g.scalar(1));
        assert_eq!(g.scalar_invert(&g.scalar(0)), Err(Error::ZeroInversion));
        assert_eq!(g.scalar_add(&g.scalar(9), &g.scalar(0)), g.scalar(9));
        assert_eq!(g.scalar_neg(&g.scalar(0)), g.scalar(0));
        assert_eq!(g.scalar_add(&g.scalar(5), &g.scalar_neg(&g.scalar(5))), g.scalar(0));
    }

    #[test]
    fn point_ops_mod_13() {
        let g = g();
        assert_eq!(g.point_mul(&g.scalar(3), &g.generator()), g.element(3));
        assert_eq!(g.point_add(&g.element(7), &g.element(5)), g.element(12));
        assert_eq!(g.point_mul(&g.scalar(0), &g.element(6)), g.identity());
        assert_eq!(g.point_mul(&g.scalar(13), &g.generator()), g.identity());
        let p = g.element(4);
        assert_eq!(g.point_add(&p, &g.point_neg(&p)), g.identity());
        assert_eq!(g.point_add(&p, &g.identity()), p);
    }

    #[test]
    fn invert_matches_exhaustive_search() {
        for q in [2u64, 3, 13, 101, 997] {
            let g = ToyGroup::new(q).unwrap();
            for a in 1..q {
                let brute = (1..q).find(|b| a * b % q == 1).unwrap();
                assert_eq!(g.scalar_invert(&g.scalar(a)).unwrap().value(), brute);
            }
        }
    }

    #[test]
    fn point_mul_matches_repeated_addition() {
        for q in [13u64, 101, 997] {
            let g = ToyGroup::new(q).unwrap();
            let p = g.element(q / 2 + 1);
            let mut acc = g.identity();
            for k in 0..q {
                assert_eq!(g.point_mul(&g.scalar(k), &p), acc, "q={q} k={k}");
                acc = g.point_add(&acc, &p);
            }
        }
    }

    #[test]
    fn rejects_non_prime_or_large_order() {
        assert!(ToyGroup::new(12).is_err());
        assert!(ToyGroup::new(1).is_err());
        assert!(ToyGroup::new(4_294_967_311).is_err());
    }

    #[test]
    fn decode_rejects_out_of_range() {
        let g = g();
        assert!(g.decode_element(&13u64.to_be_bytes()).is_err());
        assert!(g.decode_scalar(&[0u8; 7]).is_err());
        assert_eq!(g.decode_element(&12u64.to_be_bytes()).unwrap(), g.element(12));
    }

    #[test]
    fn wide_reduction_bumps_zero() {
        let g = g();
        assert_eq!(g.scalar_from_wide(&[0u8; 64]), g.scalar(1));
        let mut w = [0u8; 64];
        w[63] = 26;
        assert_eq!(g.scalar_from_wide(&w), g.scalar(1));
        w[63] = 28;
        assert_eq!(g.scalar_from_wide(&w), g.scalar(2));
    }
}
