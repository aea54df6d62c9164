use p256::elliptic_curve::group::Group as _;
use p256::elliptic_curve::sec1::{FromEncodedPoint, ToEncodedPoint};
use p256::elliptic_curve::{Field, PrimeField};
use p256::{AffinePoint, EncodedPoint, FieldBytes, ProjectivePoint, Scalar};
use rand::{CryptoRng, RngCore};

use super::{Backend, Group};
use crate::error::{Error, Result};

/// NIST P-256 (prime order, cofactor 1).
///
/// Elements encode as 33-byte SEC1 compressed points; the identity, which
/// SEC1 writes as a single zero byte, is widened to 33 zero bytes so every
/// element has the same length. Scalars are 32-byte big-endian and must be
/// canonical.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct P256Group;

const ELEMENT_LEN: usize = 33;
const SCALAR_LEN: usize = 32;

impl Group for P256Group {
    type Scalar = Scalar;
    type Element = ProjectivePoint;

    fn backend(&self) -> Backend {
        Backend::P256
    }

    fn generator(&self) -> ProjectivePoint {
        ProjectivePoint::GENERATOR
    }

    fn identity(&self) -> ProjectivePoint {
        ProjectivePoint::IDENTITY
    }

    fn is_identity(&self, e: &ProjectivePoint) -> bool {
        bool::from(e.is_identity())
    }

    fn scalar_from_u64(&self, v: u64) -> Scalar {
        Scalar::from(v)
    }

    fn scalar_is_zero(&self, a: &Scalar) -> bool {
        bool::from(a.is_zero())
    }

    fn scalar_add(&self, a: &Scalar, b: &Scalar) -> Scalar {
        a + b
    }

    fn scalar_neg(&self, a: &Scalar) -> Scalar {
        -a
    }

    fn scalar_mul(&self, a: &Scalar, b: &Scalar) -> Scalar {
        a * b
    }

    fn scalar_invert(&self, a: &Scalar) -> Result<Scalar> {
        Option::from(a.invert()).ok_or(Error::ZeroInversion)
    }

    fn point_add(&self, a: &ProjectivePoint, b: &ProjectivePoint) -> ProjectivePoint {
        a + b
    }

    fn point_neg(&self, a: &ProjectivePoint) -> ProjectivePoint {
        -a
    }

    fn point_mul(&self, k: &Scalar, p: &ProjectivePoint) -> ProjectivePoint {
        p * k
    }

    fn random_nonzero_scalar<R: RngCore + CryptoRng + ?Sized>(&self, rng: &mut R) -> Scalar {
        loop {
            let mut repr = FieldBytes::default();
            rng.fill_bytes(&mut repr);
            if let Some(s) = Option::<Scalar>::from(Scalar::from_repr(repr)) {
                if !bool::from(s.is_zero()) {
                    return s;
                }
            }
        }
    }

    fn scalar_from_wide(&self, wide: &[u8; 64]) -> Scalar {
        let radix = Scalar::from(256u64);
        let s = wide
            .iter()
            .fold(Scalar::ZERO, |acc, &b| acc * radix + Scalar::from(b as u64));
        if bool::from(s.is_zero()) {
            Scalar::ONE
        } else {
            s
        }
    }

    fn element_len(&self) -> usize {
        ELEMENT_LEN
    }

    fn scalar_len(&self) -> usize {
        SCALAR_LEN
    }

    fn encode_element(&self, e: &ProjectivePoint) -> Vec<u8> {
        if self.is_identity(e) {
            return vec![0u8; ELEMENT_LEN];
        }
        e.to_affine().to_encoded_point(true).as_bytes().to_vec()
    }

    fn decode_element(&self, bytes: &[u8]) -> Result<ProjectivePoint> {
        if bytes.len() != ELEMENT_LEN {
            return Err(Error::InvalidEncoding("P-256 element must be 33 bytes"));
        }
        if bytes.iter().all(|&b| b == 0) {
            return Ok(ProjectivePoint::IDENTITY);
        }
        if bytes[0] != 0x02 && bytes[0] != 0x03 {
            return Err(Error::InvalidEncoding("P-256 element must be compressed"));
        }
        let ep = EncodedPoint::from_bytes(bytes)
            .map_err(|_| Error::InvalidEncoding("malformed SEC1 point"))?;
        Option::<AffinePoint>::from(AffinePoint::from_encoded_point(&ep))
            .map(ProjectivePoint::from)
            .ok_or(Error::InvalidEncoding("point not on P-256"))
    }

    fn encode_scalar(&self, s: &Scalar) -> Vec<u8> {
        s.to_repr().to_vec()
    }

    fn decode_scalar(&self, bytes: &[u8]) -> Result<Scalar> {
        if bytes.len() != SCALAR_LEN {
            return Err(Error::InvalidEncoding("P-256 scalar must be 32 bytes"));
        }
        let repr: FieldBytes = <[u8; SCALAR_LEN]>::try_from(bytes).expect("length checked").into();
        Option::from(Scalar::from_repr(repr)).ok_or(Error::InvalidEncoding("scalar not reduced"))
    }
}
