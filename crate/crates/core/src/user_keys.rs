//! User key generation and full key assembly.

use rand::{CryptoRng, RngCore};

use crate::error::{Error, Result};
use crate::group::Group;
use crate::kgc::{validate_partial_key, PartialPrivateKey, SystemParams};

/// pk = (P_E, R) with the identity it belongs to.
#[derive(Debug, Clone)]
pub struct FullPublicKey<G: Group> {
    pub id: Vec<u8>,
    pub p_e: G::Element,
    pub r_point: G::Element,
}

impl<G: Group> PartialEq for FullPublicKey<G> {
    fn eq(&self, other: &Self) -> bool {
        self.id == other.id && self.p_e == other.p_e && self.r_point == other.r_point
    }
}

impl<G: Group> Eq for FullPublicKey<G> {}

/// sk = (x, d), plus the matching public key.
#[derive(Clone)]
pub struct FullPrivateKey<G: Group> {
    x: G::Scalar,
    d: G::Scalar,
    public: FullPublicKey<G>,
}

impl<G: Group> std::fmt::Debug for FullPrivateKey<G> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FullPrivateKey")
            .field("public", &self.public)
            .finish_non_exhaustive()
    }
}

impl<G: Group> FullPrivateKey<G> {
    /// Combines a validated partial key with the user's secret value x.
    ///
    /// Rejects partial keys that fail validation, x = 0, and x = -d (which
    /// would make the combined public key the identity).
    pub fn assemble(params: &SystemParams<G>, partial: &PartialPrivateKey<G>, x: G::Scalar) -> Result<Self> {
        let g = &params.group;
        if !validate_partial_key(params, partial) {
            return Err(Error::KeyValidation);
        }
        if g.scalar_is_zero(&x) {
            return Err(Error::DegenerateKey("secret value must be nonzero"));
        }
        if g.scalar_is_zero(&g.scalar_add(&x, &partial.d)) {
            return Err(Error::DegenerateKey("d + x must be nonzero"));
        }
        let public = FullPublicKey {
            id: partial.id.clone(),
            p_e: g.point_mul(&x, &g.generator()),
            r_point: partial.r_point,
        };
        Ok(FullPrivateKey {
            x,
            d: partial.d,
            public,
        })
    }

    pub fn id(&self) -> &[u8] {
        &self.public.id
    }

    pub fn secret_value(&self) -> &G::Scalar {
        &self.x
    }

    pub fn partial_key(&self) -> &G::Scalar {
        &self.d
    }

    pub fn public(&self) -> &FullPublicKey<G> {
        &self.public
    }
}

/// GenUserKeys: x uniform in [1, q-1] and P_E = xP.
pub fn gen_user_keys<G: Group, R: RngCore + CryptoRng + ?Sized>(
    params: &SystemParams<G>,
    rng: &mut R,
) -> (G::Scalar, G::Element) {
    let g = &params.group;
    let x = g.random_nonzero_scalar(rng);
    (x, g.point_mul(&x, &g.generator()))
}

/// Generates x and assembles the full private key, resampling x = -d.
pub fn gen_full_keys<G: Group, R: RngCore + CryptoRng + ?Sized>(
    params: &SystemParams<G>,
    partial: &PartialPrivateKey<G>,
    rng: &mut R,
) -> Result<FullPrivateKey<G>> {
    loop {
        let (x, _) = gen_user_keys(params, rng);
        match FullPrivateKey::assemble(params, partial, x) {
            Err(Error::DegenerateKey(_)) => continue,
            other => return other,
        }
    }
}

/// A public key with its precomputed sums:
/// `partial = R + H1(id, R)·P_pub` and `combined = partial + P_E`.
///
/// `combined` equals (d + x)·P for the matching private key. Building one
/// costs a single scalar multiplication; callers cache it per peer.
#[derive(Debug, Clone)]
pub struct CombinedPublicKey<G: Group> {
    pub public: FullPublicKey<G>,
    pub partial: G::Element,
    pub combined: G::Element,
}

impl<G: Group> PartialEq for CombinedPublicKey<G> {
    fn eq(&self, other: &Self) -> bool {
        self.public == other.public && self.combined == other.combined
    }
}

impl<G: Group> Eq for CombinedPublicKey<G> {}

impl<G: Group> CombinedPublicKey<G> {
    pub fn id(&self) -> &[u8] {
        &self.public.id
    }
}

pub fn combine_public_key<G: Group>(params: &SystemParams<G>, pk: &FullPublicKey<G>) -> Result<CombinedPublicKey<G>> {
    let g = &params.group;
    if pk.id.is_empty() {
        return Err(Error::EmptyIdentity);
    }
    if g.is_identity(&pk.p_e) || g.is_identity(&pk.r_point) {
        return Err(Error::DegenerateKey("public key component is the identity"));
    }
    let h = params.h1_identity(&pk.id, &pk.r_point)?;
    let partial = g.point_add(&pk.r_point, &g.point_mul(&h, &params.p_pub));
    let combined = g.point_add(&partial, &pk.p_e);
    if g.is_identity(&combined) || g.is_identity(&partial) {
        return Err(Error::DegenerateKey("combined public key is the identity"));
    }
    Ok(CombinedPublicKey {
        public: pk.clone(),
        partial,
        combined,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{P256Group, ToyGroup};
    use crate::hash_suite::{HashFn, HashSuite, StubEntry, StubOutput, StubTable, Transcript};
    use crate::kgc::{extract_partial_key, extract_partial_key_with, setup, setup_with_master};
    use rand::rngs::OsRng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn toy_combined_key_matches_oracle() {
        let g = ToyGroup::default();
        let (params, msk) = setup_with_master(g, g.scalar(3)).unwrap();
        let table = StubTable::new([StubEntry {
            function: HashFn::H1,
            mac_key: None,
            input: Transcript::new().identity(b"IDB").element(&g, &g.element(7)),
            output: StubOutput::Scalar(g.encode_scalar(&g.scalar(4))),
        }]);
        let params = params.with_suite(HashSuite::stubbed(table));
        let ppk = extract_partial_key_with(&msk, &params, b"IDB", g.scalar(7)).unwrap();
        let sk = FullPrivateKey::assemble(&params, &ppk, g.scalar(5)).unwrap();
        assert_eq!(sk.public().p_e, g.element(5));
        let y = combine_public_key(&params, sk.public()).unwrap();
        assert_eq!(y.combined, g.element(11));
        assert_eq!(y.partial, g.element(6));
        assert_eq!(combine_public_key(&params, sk.public()).unwrap(), y);
    }

    #[test]
    fn combined_equals_d_plus_x_on_p256() {
        let (params, msk) = setup(P256Group, &mut OsRng);
        let g = params.group;
        for _ in 0..20 {
            let ppk = extract_partial_key(&msk, &params, b"node-7", &mut OsRng).unwrap();
            let sk = gen_full_keys(&params, &ppk, &mut OsRng).unwrap();
            let y = combine_public_key(&params, sk.public()).unwrap();
            let dx = g.scalar_add(sk.partial_key(), sk.secret_value());
            assert_eq!(y.combined, g.point_mul(&dx, &g.generator()));
        }
    }

    #[test]
    fn assembly_rejects_bad_inputs() {
        let g = ToyGroup::default();
        let (params, msk) = setup_with_master(g, g.scalar(3)).unwrap();
        let ppk = extract_partial_key(&msk, &params, b"IDB", &mut OsRng).unwrap();
        let minus_d = g.scalar_neg(&ppk.d);
        assert!(matches!(
            FullPrivateKey::assemble(&params, &ppk, minus_d),
            Err(Error::DegenerateKey(_))
        ));
        let mut bad = ppk.clone();
        bad.d = g.scalar_add(&bad.d, &g.scalar(1));
        assert_eq!(
            FullPrivateKey::assemble(&params, &bad, g.scalar(1)).unwrap_err(),
            Error::KeyValidation
        );
    }

    #[test]
    fn identity_components_rejected() {
        let g = ToyGroup::default();
        let (params, _) = setup_with_master(g, g.scalar(3)).unwrap();
        let pk = FullPublicKey {
            id: b"IDB".to_vec(),
            p_e: g.identity(),
            r_point: g.element(7),
        };
        assert!(combine_public_key(&params, &pk).is_err());
    }

    #[test]
    fn user_keys_deterministic_under_seed() {
        let (params, _) = setup(P256Group, &mut OsRng);
        let a = gen_user_keys(&params, &mut ChaCha20Rng::seed_from_u64(1));
        let b = gen_user_keys(&params, &mut ChaCha20Rng::seed_from_u64(1));
        assert_eq!(a, b);
    }
}
