//! DKTUTS-CLSC-TKEM: certificateless direct key transport with a timestamp.
//!
//! ```text
//! sender A                                          recipient B
//! K ←R {0,1}^128,  x, a ←R Z*_q
//! U = a·P,  X = x·Y_B,  (k1, k2) = KDF-split(X + U)
//! m = (K, TS, τ, ID_A, ID_B, R_A, R_B, P_A, P_B, X, U)
//! c = E_k1(m),  r = F_k2(m),  s = x / (r + x_A)
//!                    φ = ⟨U, c, r, s⟩
//!              ─────────────────────────────▶
//!                                               w  = s·(d_B + x_B)
//!                                               X' = w·(P_A + r·P)
//!                                               (k1, k2) = KDF-split(X' + U)
//!                                               m' = D_k1(c),  r' = F_k2(m')
//!                                               reject unless TS fresh, U' = U,
//!                                               X = X', r' = r
//! ```
//!
//! The recipient additionally requires the decrypted τ, identities and
//! public keys to equal the ones it was called with.
//!
//! Replays inside the freshness window pass every check above.
//! [`ReplayCache`] is an opt-in guard for callers that need more.

use std::collections::HashMap;
use std::time::{SystemTime, UNIX_EPOCH};

use rand::{CryptoRng, RngCore};
use sha2::{Digest, Sha256};

use crate::error::{Error, Rejected, Result};
use crate::group::{CostOp, Group};
use crate::hash_suite::{sym_decrypt, sym_encrypt, Item, MacKey, SymmetricKey, Transcript, KEY_LEN};
use crate::kgc::SystemParams;
use crate::user_keys::{CombinedPublicKey, FullPrivateKey, FullPublicKey};

/// Seconds since the Unix epoch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Timestamp(pub u64);

pub trait Clock {
    fn now(&self) -> Timestamp;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SystemClock;

impl Clock for SystemClock {
    fn now(&self) -> Timestamp {
        let secs = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        Timestamp(secs)
    }
}

/// A clock that always reads the same instant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FixedClock(pub Timestamp);

impl Clock for FixedClock {
    fn now(&self) -> Timestamp {
        self.0
    }
}

/// Accept TS iff |now - TS| <= window.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Freshness {
    pub window_secs: u64,
}

impl Default for Freshness {
    fn default() -> Self {
        Freshness { window_secs: 120 }
    }
}

impl Freshness {
    pub fn accepts(&self, ts: Timestamp, now: Timestamp) -> bool {
        now.0.abs_diff(ts.0) <= self.window_secs
    }
}

/// Sender state ω between key generation and encapsulation. Single-use.
pub struct DktutsSession<G: Group> {
    x: G::Scalar,
    k1: SymmetricKey,
    k2: MacKey,
    ts: Timestamp,
    sender: FullPublicKey<G>,
    receiver: CombinedPublicKey<G>,
    x_point: G::Element,
    u_point: G::Element,
    key: SymmetricKey,
}

impl<G: Group> std::fmt::Debug for DktutsSession<G> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DktutsSession")
            .field("ts", &self.ts)
            .field("x_point", &self.x_point)
            .field("u_point", &self.u_point)
            .finish_non_exhaustive()
    }
}

/// φ = ⟨U, c, r, s⟩.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DktutsEncapsulation<G: Group> {
    pub u_point: G::Element,
    pub ciphertext: Vec<u8>,
    pub r: G::Scalar,
    pub s: G::Scalar,
}

impl<G: Group> DktutsEncapsulation<G> {
    /// SHA-256 over the wire body; the key used by [`ReplayCache`].
    pub fn fingerprint(&self, group: &G) -> [u8; 32] {
        let mut h = Sha256::new();
        h.update(group.encode_element(&self.u_point));
        h.update((self.ciphertext.len() as u32).to_be_bytes());
        h.update(&self.ciphertext);
        h.update(group.encode_scalar(&self.r));
        h.update(group.encode_scalar(&self.s));
        h.finalize().into()
    }
}

/// The tuple m that is encrypted under k1 and MACed under k2.
#[allow(clippy::too_many_arguments)]
fn inner_plaintext<G: Group>(
    g: &G,
    key: &[u8],
    ts: Timestamp,
    tag: &[u8],
    sender: &FullPublicKey<G>,
    receiver: &FullPublicKey<G>,
    x_point: &G::Element,
    u_point: &G::Element,
) -> Transcript {
    Transcript::new()
        .key(key)
        .timestamp(ts.0)
        .tag(tag)
        .identity(&sender.id)
        .identity(&receiver.id)
        .element(g, &sender.r_point)
        .element(g, &receiver.r_point)
        .element(g, &sender.p_e)
        .element(g, &receiver.p_e)
        .element(g, x_point)
        .element(g, u_point)
}

fn split_keys<G: Group>(params: &SystemParams<G>, x_point: &G::Element, u_point: &G::Element) -> Result<(SymmetricKey, MacKey)> {
    let g = &params.group;
    let t = Transcript::new().element(g, &g.point_add(x_point, u_point));
    params.suite.kdf_split(&t)
}

impl<G: Group> DktutsSession<G> {
    pub fn timestamp(&self) -> Timestamp {
        self.ts
    }

    pub fn x_point(&self) -> &G::Element {
        &self.x_point
    }

    pub fn u_point(&self) -> &G::Element {
        &self.u_point
    }

    pub fn ephemeral(&self) -> &G::Scalar {
        &self.x
    }

    pub fn split_keys(&self) -> (&SymmetricKey, &MacKey) {
        (&self.k1, &self.k2)
    }

    /// Encapsulates under tag τ. If r + x_A = 0 a fresh x is drawn and X,
    /// (k1, k2) and r are recomputed.
    pub fn encapsulate<R: RngCore + CryptoRng + ?Sized>(
        mut self,
        params: &SystemParams<G>,
        tag: &[u8],
        sk_a: &FullPrivateKey<G>,
        rng: &mut R,
    ) -> Result<DktutsEncapsulation<G>> {
        self.check_sender(sk_a)?;
        loop {
            if let Some(phi) = self.sign(params, tag, sk_a)? {
                return Ok(phi);
            }
            let g = &params.group;
            self.x = g.random_nonzero_scalar(rng);
            self.x_point = g.point_mul(&self.x, &self.receiver.combined);
            (self.k1, self.k2) = split_keys(params, &self.x_point, &self.u_point)?;
        }
    }

    /// Encapsulation without resampling; reports the degenerate case.
    pub fn encapsulate_with(
        self,
        params: &SystemParams<G>,
        tag: &[u8],
        sk_a: &FullPrivateKey<G>,
    ) -> Result<DktutsEncapsulation<G>> {
        self.check_sender(sk_a)?;
        self.sign(params, tag, sk_a)?.ok_or(Error::DegenerateDenominator)
    }

    fn check_sender(&self, sk_a: &FullPrivateKey<G>) -> Result<()> {
        if *sk_a.public() != self.sender {
            return Err(Error::IdentityMismatch);
        }
        Ok(())
    }

    fn sign(&self, params: &SystemParams<G>, tag: &[u8], sk_a: &FullPrivateKey<G>) -> Result<Option<DktutsEncapsulation<G>>> {
        let g = &params.group;
        let m = inner_plaintext(
            g,
            self.key.as_bytes(),
            self.ts,
            tag,
            &self.sender,
            &self.receiver.public,
            &self.x_point,
            &self.u_point,
        );
        let r = params.suite.mac(g, &self.k2, &m)?;
        let Ok(inv) = g.scalar_invert(&g.scalar_add(&r, sk_a.secret_value())) else {
            return Ok(None);
        };
        let s = g.scalar_mul(&self.x, &inv);
        g.tally(CostOp::SymEncrypt);
        let ciphertext = sym_encrypt(&self.k1, &m.encode());
        Ok(Some(DktutsEncapsulation {
            u_point: self.u_point,
            ciphertext,
            r,
            s,
        }))
    }
}

/// SymmetricKeyGen: draws K, then x, then a, and stamps the session with
/// `clock`.
pub fn symmetric_key_gen<G: Group, C: Clock + ?Sized, R: RngCore + CryptoRng + ?Sized>(
    params: &SystemParams<G>,
    sender: &FullPrivateKey<G>,
    receiver: &CombinedPublicKey<G>,
    clock: &C,
    rng: &mut R,
) -> Result<(SymmetricKey, DktutsSession<G>)> {
    let key = SymmetricKey::random(rng);
    let x = params.group.random_nonzero_scalar(rng);
    let a = params.group.random_nonzero_scalar(rng);
    symmetric_key_gen_with(params, sender, receiver, key, x, a, clock.now())
}

/// SymmetricKeyGen with caller-chosen K, x, a and TS.
pub fn symmetric_key_gen_with<G: Group>(
    params: &SystemParams<G>,
    sender: &FullPrivateKey<G>,
    receiver: &CombinedPublicKey<G>,
    key: SymmetricKey,
    x: G::Scalar,
    a: G::Scalar,
    ts: Timestamp,
) -> Result<(SymmetricKey, DktutsSession<G>)> {
    let g = &params.group;
    if g.scalar_is_zero(&x) || g.scalar_is_zero(&a) {
        return Err(Error::DegenerateKey("x and a must be nonzero"));
    }
    let u_point = g.point_mul(&a, &g.generator());
    let x_point = g.point_mul(&x, &receiver.combined);
    let (k1, k2) = split_keys(params, &x_point, &u_point)?;
    Ok((
        key,
        DktutsSession {
            x,
            k1,
            k2,
            ts,
            sender: sender.public().clone(),
            receiver: receiver.clone(),
            x_point,
            u_point,
            key,
        },
    ))
}

/// Decapsulation; every failure is the single [`Rejected`] value.
pub fn decapsulate<G: Group, C: Clock + ?Sized>(
    params: &SystemParams<G>,
    phi: &DktutsEncapsulation<G>,
    tag: &[u8],
    sender: &FullPublicKey<G>,
    receiver: &FullPrivateKey<G>,
    clock: &C,
    freshness: Freshness,
) -> Result<SymmetricKey, Rejected> {
    let g = &params.group;
    if g.scalar_is_zero(&phi.r) || g.scalar_is_zero(&phi.s) {
        return Err(Rejected);
    }
    let w = g.scalar_mul(&phi.s, &g.scalar_add(receiver.partial_key(), receiver.secret_value()));
    let r_p = g.point_mul(&phi.r, &g.generator());
    let x_prime = g.point_mul(&w, &g.point_add(&sender.p_e, &r_p));
    let (k1, k2) = split_keys(params, &x_prime, &phi.u_point).map_err(|_| Rejected)?;
    g.tally(CostOp::SymDecrypt);
    let plaintext = sym_decrypt(&k1, &phi.ciphertext).map_err(|_| Rejected)?;
    let m = Transcript::decode(&plaintext).map_err(|_| Rejected)?;
    let (key, ts) = match m.items() {
        [Item::Key(k), Item::Timestamp(ts), ..] if k.len() == KEY_LEN => {
            (SymmetricKey::from_slice(k).map_err(|_| Rejected)?, Timestamp(*ts))
        }
        _ => return Err(Rejected),
    };
    // One comparison covers U' = U, X = X', the tag, both identities and
    // all four public-key elements.
    let expected = inner_plaintext(g, key.as_bytes(), ts, tag, sender, receiver.public(), &x_prime, &phi.u_point);
    if m != expected {
        return Err(Rejected);
    }
    let r_prime = params.suite.mac(g, &k2, &m).map_err(|_| Rejected)?;
    if r_prime != phi.r || !freshness.accepts(ts, clock.now()) {
        return Err(Rejected);
    }
    Ok(key)
}

/// Remembers accepted encapsulations for one freshness window so a replay
/// inside the window can be refused.
#[derive(Debug, Clone, Default)]
pub struct ReplayCache {
    seen: HashMap<[u8; 32], Timestamp>,
}

impl ReplayCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.seen.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seen.is_empty()
    }

    /// Returns false if `fingerprint` was recorded within the window;
    /// otherwise records it and returns true. Expired entries are pruned.
    pub fn check_and_record(&mut self, fingerprint: [u8; 32], now: Timestamp, freshness: Freshness) -> bool {
        self.seen.retain(|_, t| freshness.accepts(*t, now));
        if self.seen.contains_key(&fingerprint) {
            return false;
        }
        self.seen.insert(fingerprint, now);
        true
    }
}

/// [`decapsulate`] followed by a replay-cache check.
#[allow(clippy::too_many_arguments)]
pub fn decapsulate_once<G: Group, C: Clock + ?Sized>(
    params: &SystemParams<G>,
    phi: &DktutsEncapsulation<G>,
    tag: &[u8],
    sender: &FullPublicKey<G>,
    receiver: &FullPrivateKey<G>,
    clock: &C,
    freshness: Freshness,
    cache: &mut ReplayCache,
) -> Result<SymmetricKey, Rejected> {
    let key = decapsulate(params, phi, tag, sender, receiver, clock, freshness)?;
    if !cache.check_and_record(phi.fingerprint(&params.group), clock.now(), freshness) {
        return Err(Rejected);
    }
    Ok(key)
}
