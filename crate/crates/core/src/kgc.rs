//! Key Generating Center: system setup and partial private key extraction.

use rand::{CryptoRng, RngCore};

use crate::error::{Error, Result};
use crate::group::Group;
use crate::hash_suite::{HashSuite, Transcript};

/// The public system parameters: group, P_pub and hash suite.
#[derive(Debug, Clone)]
pub struct SystemParams<G: Group> {
    pub group: G,
    pub p_pub: G::Element,
    pub suite: HashSuite,
}

impl<G: Group> SystemParams<G> {
    /// H1(id, R).
    pub fn h1_identity(&self, id: &[u8], r: &G::Element) -> Result<G::Scalar> {
        let t = Transcript::new().identity(id).element(&self.group, r);
        self.suite.h1(&self.group, &t)
    }

    /// Same parameters with another hash suite (used to install stub tables).
    pub fn with_suite(mut self, suite: HashSuite) -> Self {
        self.suite = suite;
        self
    }
}

/// The KGC's master secret x_msk.
#[derive(Clone)]
pub struct MasterKey<G: Group> {
    x_msk: G::Scalar,
}

impl<G: Group> MasterKey<G> {
    pub fn secret(&self) -> &G::Scalar {
        &self.x_msk
    }
}

impl<G: Group> std::fmt::Debug for MasterKey<G> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("MasterKey(..)")
    }
}

/// A KGC-issued partial private key (R, d) bound to `id`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialPrivateKey<G: Group> {
    pub id: Vec<u8>,
    pub r_point: G::Element,
    pub d: G::Scalar,
}

pub fn setup<G: Group, R: RngCore + CryptoRng + ?Sized>(
    group: G,
    rng: &mut R,
) -> (SystemParams<G>, MasterKey<G>) {
    let x_msk = group.random_nonzero_scalar(rng);
    setup_with_master(group, x_msk).expect("sampled master key is nonzero")
}

/// Setup with a caller-chosen master key.
pub fn setup_with_master<G: Group>(
    group: G,
    x_msk: G::Scalar,
) -> Result<(SystemParams<G>, MasterKey<G>)> {
    if group.scalar_is_zero(&x_msk) {
        return Err(Error::DegenerateKey("master key must be nonzero"));
    }
    let p_pub = group.point_mul(&x_msk, &group.generator());
    Ok((
        SystemParams {
            group,
            p_pub,
            suite: HashSuite::standard(),
        },
        MasterKey { x_msk },
    ))
}

/// Rebuilds a master key from its scalar, checking it against `params`.
pub fn master_key_from_scalar<G: Group>(params: &SystemParams<G>, x_msk: G::Scalar) -> Result<MasterKey<G>> {
    let g = &params.group;
    if g.scalar_is_zero(&x_msk) || g.point_mul(&x_msk, &g.generator()) != params.p_pub {
        return Err(Error::KeyValidation);
    }
    Ok(MasterKey { x_msk })
}

/// Issues a fresh partial private key for `id`. A fresh nonce r is drawn
/// per call; d = 0 is resampled.
pub fn extract_partial_key<G: Group, R: RngCore + CryptoRng + ?Sized>(
    msk: &MasterKey<G>,
    params: &SystemParams<G>,
    id: &[u8],
    rng: &mut R,
) -> Result<PartialPrivateKey<G>> {
    loop {
        let r = params.group.random_nonzero_scalar(rng);
        match extract_partial_key_with(msk, params, id, r) {
            Err(Error::DegenerateKey(_)) => continue,
            other => return other,
        }
    }
}

/// Extraction with a caller-chosen nonce r: R = rP, d = r + x_msk·H1(id, R).
pub fn extract_partial_key_with<G: Group>(
    msk: &MasterKey<G>,
    params: &SystemParams<G>,
    id: &[u8],
    r: G::Scalar,
) -> Result<PartialPrivateKey<G>> {
    if id.is_empty() {
        return Err(Error::EmptyIdentity);
    }
    let g = &params.group;
    if g.scalar_is_zero(&r) {
        return Err(Error::DegenerateKey("extraction nonce must be nonzero"));
    }
    let r_point = g.point_mul(&r, &g.generator());
    let h = params.h1_identity(id, &r_point)?;
    let d = g.scalar_add(&r, &g.scalar_mul(&msk.x_msk, &h));
    if g.scalar_is_zero(&d) {
        return Err(Error::DegenerateKey("partial private key is zero"));
    }
    Ok(PartialPrivateKey {
        id: id.to_vec(),
        r_point,
        d,
    })
}

/// Checks d·P = R + H1(id, R)·P_pub.
pub fn validate_partial_key<G: Group>(params: &SystemParams<G>, ppk: &PartialPrivateKey<G>) -> bool {
    let g = &params.group;
    let Ok(h) = params.h1_identity(&ppk.id, &ppk.r_point) else {
        return false;
    };
    let lhs = g.point_mul(&ppk.d, &g.generator());
    let rhs = g.point_add(&ppk.r_point, &g.point_mul(&h, &params.p_pub));
    lhs == rhs
}
