//! LSW-CLSC-TKEM: a certificateless signcryption tag-KEM built on a
//! Schnorr-like certificateless signature.
//!
//! ```text
//! sender A                                          recipient B
//! u ←R Z*_q
//! U = u·Y_B,  X = u·P,  K = KDF(X, U, ID_A, ID_B)
//! a ←R Z*_q,  Q = a·P
//! h = H2(τ, ID_A, ID_B, R_A, R_B, P_A, P_B, Q, X, U)
//! s = a / (h·x_A + d_A)
//!                    φ = ⟨Q, U, s, h⟩
//!              ─────────────────────────────▶
//!                                               X = (d_B + x_B)^-1 · U
//!                                               h' = H2(...)      (must equal h)
//!                                               s·(h'·P_A + Y'_A) = Q ?
//!                                               K = KDF(X, U, ID_A, ID_B)
//! ```
//!
//! Y_B and Y'_A = R_A + H1(ID_A, R_A)·P_pub come precomputed from
//! [`CombinedPublicKey`]. With them the sender does 3 scalar
//! multiplications, 1 inversion and 2 field multiplications; the recipient
//! 3 scalar multiplications and 1 inversion.

use rand::{CryptoRng, RngCore};

use crate::error::{Error, Rejected, Result};
use crate::group::Group;
use crate::hash_suite::{SymmetricKey, Transcript};
use crate::kgc::SystemParams;
use crate::user_keys::{CombinedPublicKey, FullPrivateKey, FullPublicKey};

/// Sender state ω between key generation and encapsulation.
///
/// Consumed by [`LswSession::encapsulate`]; a session cannot be used twice:
///
/// ```compile_fail
/// # use clsc_tkem::{group::ToyGroup, lsw::LswSession, kgc::SystemParams, user_keys::FullPrivateKey};
/// # fn reuse(s: LswSession<ToyGroup>, p: &SystemParams<ToyGroup>, sk: &FullPrivateKey<ToyGroup>) {
/// let mut rng = rand::rngs::OsRng;
/// let _ = s.encapsulate(p, b"t", sk, &mut rng);
/// let _ = s.encapsulate(p, b"t", sk, &mut rng);
/// # }
/// ```
pub struct LswSession<G: Group> {
    u: G::Scalar,
    sender: FullPublicKey<G>,
    receiver: FullPublicKey<G>,
    x_point: G::Element,
    u_point: G::Element,
}

impl<G: Group> std::fmt::Debug for LswSession<G> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LswSession")
            .field("x_point", &self.x_point)
            .field("u_point", &self.u_point)
            .finish_non_exhaustive()
    }
}

/// φ = ⟨Q, U, σ = (s, h)⟩.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LswEncapsulation<G: Group> {
    pub q_point: G::Element,
    pub u_point: G::Element,
    pub s: G::Scalar,
    pub h: G::Scalar,
}

impl<G: Group> LswSession<G> {
    pub fn x_point(&self) -> &G::Element {
        &self.x_point
    }

    pub fn u_point(&self) -> &G::Element {
        &self.u_point
    }

    /// The ephemeral u, exposed for tests that check X = uP and U = u·Y_B.
    pub fn ephemeral(&self) -> &G::Scalar {
        &self.u
    }

    /// Signs the session under tag τ. Resamples a whenever h·x_A + d_A = 0.
    pub fn encapsulate<R: RngCore + CryptoRng + ?Sized>(
        self,
        params: &SystemParams<G>,
        tag: &[u8],
        sk_a: &FullPrivateKey<G>,
        rng: &mut R,
    ) -> Result<LswEncapsulation<G>> {
        self.check_sender(sk_a)?;
        loop {
            let a = params.group.random_nonzero_scalar(rng);
            if let Some(phi) = self.sign(params, tag, sk_a, a)? {
                return Ok(phi);
            }
        }
    }

    /// Encapsulation with a caller-chosen a.
    pub fn encapsulate_with(
        self,
        params: &SystemParams<G>,
        tag: &[u8],
        sk_a: &FullPrivateKey<G>,
        a: G::Scalar,
    ) -> Result<LswEncapsulation<G>> {
        self.check_sender(sk_a)?;
        if params.group.scalar_is_zero(&a) {
            return Err(Error::DegenerateKey("a must be nonzero"));
        }
        self.sign(params, tag, sk_a, a)?.ok_or(Error::DegenerateDenominator)
    }

    fn check_sender(&self, sk_a: &FullPrivateKey<G>) -> Result<()> {
        if *sk_a.public() != self.sender {
            return Err(Error::IdentityMismatch);
        }
        Ok(())
    }

    fn sign(
        &self,
        params: &SystemParams<G>,
        tag: &[u8],
        sk_a: &FullPrivateKey<G>,
        a: G::Scalar,
    ) -> Result<Option<LswEncapsulation<G>>> {
        let g = &params.group;
        let q_point = g.point_mul(&a, &g.generator());
        let h = h2(params, tag, &self.sender, &self.receiver, &q_point, &self.x_point, &self.u_point)?;
        let denom = g.scalar_add(&g.scalar_mul(&h, sk_a.secret_value()), sk_a.partial_key());
        let Ok(inv) = g.scalar_invert(&denom) else {
            return Ok(None);
        };
        Ok(Some(LswEncapsulation {
            q_point,
            u_point: self.u_point,
            s: g.scalar_mul(&a, &inv),
            h,
        }))
    }
}

fn h2<G: Group>(
    params: &SystemParams<G>,
    tag: &[u8],
    sender: &FullPublicKey<G>,
    receiver: &FullPublicKey<G>,
    q_point: &G::Element,
    x_point: &G::Element,
    u_point: &G::Element,
) -> Result<G::Scalar> {
    let g = &params.group;
    let t = Transcript::new()
        .tag(tag)
        .identity(&sender.id)
        .identity(&receiver.id)
        .element(g, &sender.r_point)
        .element(g, &receiver.r_point)
        .element(g, &sender.p_e)
        .element(g, &receiver.p_e)
        .element(g, q_point)
        .element(g, x_point)
        .element(g, u_point);
    params.suite.h2_lsw(g, &t)
}

fn session_key<G: Group>(
    params: &SystemParams<G>,
    x_point: &G::Element,
    u_point: &G::Element,
    sender_id: &[u8],
    receiver_id: &[u8],
) -> Result<SymmetricKey> {
    let g = &params.group;
    let t = Transcript::new()
        .element(g, x_point)
        .element(g, u_point)
        .identity(sender_id)
        .identity(receiver_id);
    params.suite.kdf_key(&t)
}

/// SymmetricKeyGen: draws u and derives K.
pub fn symmetric_key_gen<G: Group, R: RngCore + CryptoRng + ?Sized>(
    params: &SystemParams<G>,
    sender: &FullPrivateKey<G>,
    receiver: &CombinedPublicKey<G>,
    rng: &mut R,
) -> Result<(SymmetricKey, LswSession<G>)> {
    let u = params.group.random_nonzero_scalar(rng);
    symmetric_key_gen_with(params, sender, receiver, u)
}

/// SymmetricKeyGen with a caller-chosen u: U = u·Y_B, X = u·P.
pub fn symmetric_key_gen_with<G: Group>(
    params: &SystemParams<G>,
    sender: &FullPrivateKey<G>,
    receiver: &CombinedPublicKey<G>,
    u: G::Scalar,
) -> Result<(SymmetricKey, LswSession<G>)> {
    let g = &params.group;
    if g.scalar_is_zero(&u) {
        return Err(Error::DegenerateKey("u must be nonzero"));
    }
    let u_point = g.point_mul(&u, &receiver.combined);
    let x_point = g.point_mul(&u, &g.generator());
    let k = session_key(params, &x_point, &u_point, sender.id(), receiver.id())?;
    Ok((
        k,
        LswSession {
            u,
            sender: sender.public().clone(),
            receiver: receiver.public.clone(),
            x_point,
            u_point,
        },
    ))
}

/// Decapsulation. Any failure, including malformed input or a hash error,
/// is the single [`Rejected`] value.
pub fn decapsulate<G: Group>(
    params: &SystemParams<G>,
    phi: &LswEncapsulation<G>,
    tag: &[u8],
    sender: &CombinedPublicKey<G>,
    receiver: &FullPrivateKey<G>,
) -> Result<SymmetricKey, Rejected> {
    let g = &params.group;
    if g.scalar_is_zero(&phi.s) || g.scalar_is_zero(&phi.h) {
        return Err(Rejected);
    }
    let dx = g.scalar_add(receiver.partial_key(), receiver.secret_value());
    let dx_inv = g.scalar_invert(&dx).map_err(|_| Rejected)?;
    let x_point = g.point_mul(&dx_inv, &phi.u_point);
    let h = h2(
        params,
        tag,
        &sender.public,
        receiver.public(),
        &phi.q_point,
        &x_point,
        &phi.u_point,
    )
    .map_err(|_| Rejected)?;
    if h != phi.h {
        return Err(Rejected);
    }
    let inner = g.point_add(&g.point_mul(&h, &sender.public.p_e), &sender.partial);
    if g.point_mul(&phi.s, &inner) != phi.q_point {
        return Err(Rejected);
    }
    session_key(params, &x_point, &phi.u_point, sender.id(), receiver.id()).map_err(|_| Rejected)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{P256Group, ToyGroup};
    use crate::kgc::{extract_partial_key, setup};
    use crate::user_keys::{combine_public_key, gen_full_keys};
    use rand::rngs::OsRng;
    use std::collections::HashSet;

    struct World<G: Group> {
        params: SystemParams<G>,
        alice: FullPrivateKey<G>,
        bob: FullPrivateKey<G>,
        alice_c: CombinedPublicKey<G>,
        bob_c: CombinedPublicKey<G>,
    }

    fn world<G: Group>(group: G) -> World<G> {
        let (params, msk) = setup(group, &mut OsRng);
        let mk = |id: &[u8]| {
            let ppk = extract_partial_key(&msk, &params, id, &mut OsRng).unwrap();
            gen_full_keys(&params, &ppk, &mut OsRng).unwrap()
        };
        let alice = mk(b"alice");
        let bob = mk(b"bob");
        let alice_c = combine_public_key(&params, alice.public()).unwrap();
        let bob_c = combine_public_key(&params, bob.public()).unwrap();
        World {
            params,
            alice,
            bob,
            alice_c,
            bob_c,
        }
    }

    #[test]
    fn round_trip_p256() {
        let w = world(P256Group);
        let (k, session) = symmetric_key_gen(&w.params, &w.alice, &w.bob_c, &mut OsRng).unwrap();
        let phi = session.encapsulate(&w.params, b"", &w.alice, &mut OsRng).unwrap();
        assert_eq!(decapsulate(&w.params, &phi, b"", &w.alice_c, &w.bob), Ok(k));
    }

    #[test]
    fn tag_and_field_tampering_rejected_p256() {
        let w = world(P256Group);
        let g = w.params.group;
        let (_, session) = symmetric_key_gen(&w.params, &w.alice, &w.bob_c, &mut OsRng).unwrap();
        let phi = session.encapsulate(&w.params, b"tag", &w.alice, &mut OsRng).unwrap();
        assert_eq!(decapsulate(&w.params, &phi, b"tag2", &w.alice_c, &w.bob), Err(Rejected));
        let one = g.scalar_from_u64(1);
        let mut bad = phi.clone();
        bad.s = g.scalar_add(&bad.s, &one);
        assert_eq!(decapsulate(&w.params, &bad, b"tag", &w.alice_c, &w.bob), Err(Rejected));
        let mut bad = phi.clone();
        bad.h = g.scalar_add(&bad.h, &one);
        assert_eq!(decapsulate(&w.params, &bad, b"tag", &w.alice_c, &w.bob), Err(Rejected));
        let mut bad = phi.clone();
        bad.q_point = g.point_add(&bad.q_point, &g.generator());
        assert_eq!(decapsulate(&w.params, &bad, b"tag", &w.alice_c, &w.bob), Err(Rejected));
        let mut bad = phi;
        bad.u_point = g.point_add(&bad.u_point, &g.generator());
        assert_eq!(decapsulate(&w.params, &bad, b"tag", &w.alice_c, &w.bob), Err(Rejected));
    }

    #[test]
    fn wrong_sender_key_rejected_at_encapsulation() {
        let w = world(ToyGroup::new(1009).unwrap());
        let (_, session) = symmetric_key_gen(&w.params, &w.alice, &w.bob_c, &mut OsRng).unwrap();
        assert_eq!(
            session.encapsulate(&w.params, b"", &w.bob, &mut OsRng).unwrap_err(),
            Error::IdentityMismatch
        );
    }

    #[test]
    fn ephemeral_values_are_fresh() {
        let w = world(P256Group);
        let mut seen = HashSet::new();
        for _ in 0..1000 {
            let (_, s) = symmetric_key_gen(&w.params, &w.alice, &w.bob_c, &mut OsRng).unwrap();
            assert!(seen.insert(w.params.group.encode_element(s.u_point())));
        }
    }

    #[test]
    fn session_points_match_ephemeral() {
        let w = world(ToyGroup::new(1009).unwrap());
        let g = w.params.group;
        let (_, s) = symmetric_key_gen(&w.params, &w.alice, &w.bob_c, &mut OsRng).unwrap();
        assert_eq!(*s.x_point(), g.point_mul(s.ephemeral(), &g.generator()));
        assert_eq!(*s.u_point(), g.point_mul(s.ephemeral(), &w.bob_c.combined));
    }
}
