//! Hash functions, key derivation, the keyed hash F and the symmetric
//! cipher, all over one injective transcript encoding.
//!
//! # Transcript encoding
//!
//! A transcript is a sequence of typed items. Each item encodes as
//!
//! ```text
//! type (1 byte) || length (u32 big-endian) || body
//! ```
//!
//! with type codes `0x01` identity, `0x02` group element, `0x03` scalar,
//! `0x04` tag, `0x05` timestamp (8-byte big-endian body), `0x06` symmetric
//! key. Elements and scalars use the group's canonical encoding.
//!
//! # Functions
//!
//! | function    | construction                                                   |
//! |-------------|----------------------------------------------------------------|
//! | H1, H2      | SHA-512(len32(label) ‖ label ‖ transcript), reduced mod q, 0 ↦ 1 |
//! | KDF         | HKDF-SHA-256(ikm = transcript, info = label), 16 bytes          |
//! | KDF-split   | one HKDF extract, expand with `label ‖ "/k1"` and `label ‖ "/k2"` |
//! | F (mac)     | HMAC-SHA-512(k2, len32(label) ‖ label ‖ transcript), reduced, 0 ↦ 1 |
//! | DEM key     | KDF with the DEM label over the single item `key(K)`            |
//! | E / D       | AES-128-GCM, all-zero nonce, empty AAD (every key is single-use) |
//!
//! Labels are listed on [`HashFn::label`].

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use aes_gcm::aead::{Aead, KeyInit};
use aes_gcm::{Aes128Gcm, Nonce};
use hkdf::Hkdf;
use hmac::{Hmac, Mac};
use rand::{CryptoRng, RngCore};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256, Sha512};

use crate::error::{Error, Result};
use crate::group::Group;

/// Symmetric key length l_k in bits.
pub const KEY_BITS: usize = 128;
pub const KEY_LEN: usize = KEY_BITS / 8;
const TAG_LEN: usize = 16;

macro_rules! secret_bytes {
    ($name:ident) => {
        #[derive(Clone, Copy, Eq)]
        pub struct $name([u8; KEY_LEN]);

        impl $name {
            pub fn from_bytes(bytes: [u8; KEY_LEN]) -> Self {
                $name(bytes)
            }

            pub fn from_slice(bytes: &[u8]) -> Result<Self> {
                bytes
                    .try_into()
                    .map($name)
                    .map_err(|_| Error::InvalidEncoding(concat!(stringify!($name), " must be 16 bytes")))
            }

            pub fn as_bytes(&self) -> &[u8; KEY_LEN] {
                &self.0
            }

            pub fn random<R: RngCore + CryptoRng + ?Sized>(rng: &mut R) -> Self {
                let mut k = [0u8; KEY_LEN];
                rng.fill_bytes(&mut k);
                $name(k)
            }
        }

        impl PartialEq for $name {
            fn eq(&self, other: &Self) -> bool {
                self.0.iter().zip(other.0.iter()).fold(0u8, |acc, (a, b)| acc | (a ^ b)) == 0
            }
        }

        impl fmt::Debug for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, concat!(stringify!($name), "({})"), hex::encode(self.0))
            }
        }
    };
}

secret_bytes!(SymmetricKey);
secret_bytes!(MacKey);

/// One typed transcript item.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Item {
    Identity(#[serde(with = "hex")] Vec<u8>),
    Element(#[serde(with = "hex")] Vec<u8>),
    Scalar(#[serde(with = "hex")] Vec<u8>),
    Tag(#[serde(with = "hex")] Vec<u8>),
    Timestamp(u64),
    Key(#[serde(with = "hex")] Vec<u8>),
}

impl Item {
    fn type_code(&self) -> u8 {
        match self {
            Item::Identity(_) => 0x01,
            Item::Element(_) => 0x02,
            Item::Scalar(_) => 0x03,
            Item::Tag(_) => 0x04,
            Item::Timestamp(_) => 0x05,
            Item::Key(_) => 0x06,
        }
    }
}

/// An ordered list of typed items with an injective byte encoding.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Transcript(pub Vec<Item>);

impl Transcript {
    pub fn new() -> Self {
        Transcript(Vec::new())
    }

    pub fn identity(mut self, id: &[u8]) -> Self {
        self.0.push(Item::Identity(id.to_vec()));
        self
    }

    pub fn element<G: Group>(mut self, group: &G, e: &G::Element) -> Self {
        self.0.push(Item::Element(group.encode_element(e)));
        self
    }

    pub fn scalar<G: Group>(mut self, group: &G, s: &G::Scalar) -> Self {
        self.0.push(Item::Scalar(group.encode_scalar(s)));
        self
    }

    pub fn tag(mut self, tag: &[u8]) -> Self {
        self.0.push(Item::Tag(tag.to_vec()));
        self
    }

    pub fn timestamp(mut self, ts: u64) -> Self {
        self.0.push(Item::Timestamp(ts));
        self
    }

    pub fn key(mut self, key: &[u8]) -> Self {
        self.0.push(Item::Key(key.to_vec()));
        self
    }

    pub fn items(&self) -> &[Item] {
        &self.0
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::new();
        for item in &self.0 {
            out.push(item.type_code());
            let ts_buf;
            let body: &[u8] = match item {
                Item::Identity(b) | Item::Element(b) | Item::Scalar(b) | Item::Tag(b) | Item::Key(b) => b,
                Item::Timestamp(t) => {
                    ts_buf = t.to_be_bytes();
                    &ts_buf
                }
            };
            out.extend_from_slice(&(body.len() as u32).to_be_bytes());
            out.extend_from_slice(body);
        }
        out
    }

    pub fn decode(mut bytes: &[u8]) -> Result<Self> {
        let mut items = Vec::new();
        while !bytes.is_empty() {
            if bytes.len() < 5 {
                return Err(Error::InvalidEncoding("truncated transcript item header"));
            }
            let code = bytes[0];
            let len = u32::from_be_bytes(bytes[1..5].try_into().unwrap()) as usize;
            let rest = &bytes[5..];
            if rest.len() < len {
                return Err(Error::InvalidEncoding("truncated transcript item body"));
            }
            let body = rest[..len].to_vec();
            items.push(match code {
                0x01 => Item::Identity(body),
                0x02 => Item::Element(body),
                0x03 => Item::Scalar(body),
                0x04 => Item::Tag(body),
                0x05 => {
                    let arr: [u8; 8] = body
                        .as_slice()
                        .try_into()
                        .map_err(|_| Error::InvalidEncoding("timestamp must be 8 bytes"))?;
                    Item::Timestamp(u64::from_be_bytes(arr))
                }
                0x06 => Item::Key(body),
                _ => return Err(Error::InvalidEncoding("unknown transcript item type")),
            });
            bytes = &rest[len..];
        }
        Ok(Transcript(items))
    }
}

/// The logical hash functions of the suite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HashFn {
    H1,
    H2Lsw,
    Kdf,
    KdfSplit,
    Mac,
    Dem,
}

impl HashFn {
    pub fn label(self) -> &'static str {
        match self {
            HashFn::H1 => "CLSC-TKEM/v1/H1",
            HashFn::H2Lsw => "CLSC-TKEM/v1/H2-LSW",
            HashFn::Kdf => "CLSC-TKEM/v1/KDF",
            HashFn::KdfSplit => "CLSC-TKEM/v1/KDF-SPLIT",
            HashFn::Mac => "CLSC-TKEM/v1/F",
            HashFn::Dem => "CLSC-TKEM/v1/DEM",
        }
    }

    fn name(self) -> &'static str {
        match self {
            HashFn::H1 => "H1",
            HashFn::H2Lsw => "H2",
            HashFn::Kdf => "KDF",
            HashFn::KdfSplit => "KDF-split",
            HashFn::Mac => "F",
            HashFn::Dem => "DEM-KDF",
        }
    }
}

/// Fixed output for one stubbed hash input.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StubOutput {
    Scalar(#[serde(with = "hex")] Vec<u8>),
    Key(#[serde(with = "hex")] Vec<u8>),
    Split {
        #[serde(with = "hex")]
        k1: Vec<u8>,
        #[serde(with = "hex")]
        k2: Vec<u8>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StubEntry {
    pub function: HashFn,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "opt_hex")]
    pub mac_key: Option<Vec<u8>>,
    pub input: Transcript,
    pub output: StubOutput,
}

mod opt_hex {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<Vec<u8>>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(b) => s.serialize_str(&hex::encode(b)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Vec<u8>>, D::Error> {
        Option::<String>::deserialize(d)?
            .map(|h| hex::decode(h).map_err(serde::de::Error::custom))
            .transpose()
    }
}

type StubKey = (HashFn, Option<Vec<u8>>, Vec<u8>);

/// A lookup table that replaces the real hash functions so toy-group
/// vectors can be worked by hand. Unlisted inputs are an error.
#[derive(Debug, Clone, Default)]
pub struct StubTable {
    entries: BTreeMap<StubKey, StubOutput>,
}

impl StubTable {
    pub fn new(entries: impl IntoIterator<Item = StubEntry>) -> Self {
        let entries = entries
            .into_iter()
            .map(|e| ((e.function, e.mac_key, e.input.encode()), e.output))
            .collect();
        StubTable { entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    fn lookup(&self, f: HashFn, key: Option<&[u8]>, t: &Transcript) -> Result<&StubOutput> {
        self.entries
            .get(&(f, key.map(<[u8]>::to_vec), t.encode()))
            .ok_or(Error::StubMiss(f.name()))
    }
}

/// The concrete instantiation of H1, H2, KDF, F and (E, D).
///
/// The standard suite never fails; a stubbed suite fails with
/// [`Error::StubMiss`] on any input missing from its table.
#[derive(Debug, Clone, Default)]
pub struct HashSuite {
    stub: Option<Arc<StubTable>>,
}

impl HashSuite {
    /// Identifier written into parameter files.
    pub const STANDARD_ID: u8 = 0x01;

    pub fn standard() -> Self {
        HashSuite { stub: None }
    }

    pub fn stubbed(table: StubTable) -> Self {
        HashSuite {
            stub: Some(Arc::new(table)),
        }
    }

    pub fn is_stubbed(&self) -> bool {
        self.stub.is_some()
    }

    pub fn h1<G: Group>(&self, group: &G, t: &Transcript) -> Result<G::Scalar> {
        self.hash_to_scalar(group, HashFn::H1, t)
    }

    pub fn h2_lsw<G: Group>(&self, group: &G, t: &Transcript) -> Result<G::Scalar> {
        self.hash_to_scalar(group, HashFn::H2Lsw, t)
    }

    /// Derives an l_k-bit symmetric key.
    pub fn kdf_key(&self, t: &Transcript) -> Result<SymmetricKey> {
        self.derive_key(HashFn::Kdf, t)
    }

    /// Derives the key used by the DEM in hybrid signcryption from K.
    pub fn dem_key(&self, k: &SymmetricKey) -> Result<SymmetricKey> {
        self.derive_key(HashFn::Dem, &Transcript::new().key(k.as_bytes()))
    }

    /// Derives an encryption key and a MAC key from one KDF call.
    pub fn kdf_split(&self, t: &Transcript) -> Result<(SymmetricKey, MacKey)> {
        if let Some(stub) = &self.stub {
            return match stub.lookup(HashFn::KdfSplit, None, t)? {
                StubOutput::Split { k1, k2 } => Ok((SymmetricKey::from_slice(k1)?, MacKey::from_slice(k2)?)),
                _ => Err(Error::InvalidEncoding("stub output for KDF-split must be a split")),
            };
        }
        let hk = Hkdf::<Sha256>::new(None, &t.encode());
        let label = HashFn::KdfSplit.label();
        let mut k1 = [0u8; KEY_LEN];
        let mut k2 = [0u8; KEY_LEN];
        hk.expand_multi_info(&[label.as_bytes(), b"/k1"], &mut k1)
            .expect("16 bytes is a valid HKDF length");
        hk.expand_multi_info(&[label.as_bytes(), b"/k2"], &mut k2)
            .expect("16 bytes is a valid HKDF length");
        Ok((SymmetricKey(k1), MacKey(k2)))
    }

    /// The keyed hash F, reduced to a nonzero scalar.
    pub fn mac<G: Group>(&self, group: &G, key: &MacKey, t: &Transcript) -> Result<G::Scalar> {
        if let Some(stub) = &self.stub {
            return stub_scalar(group, stub.lookup(HashFn::Mac, Some(key.as_bytes()), t)?);
        }
        let mut mac = <Hmac<Sha512> as Mac>::new_from_slice(key.as_bytes()).expect("HMAC accepts any key length");
        mac.update(&labelled(HashFn::Mac, t));
        let wide: [u8; 64] = mac.finalize().into_bytes().into();
        Ok(group.scalar_from_wide(&wide))
    }

    fn hash_to_scalar<G: Group>(&self, group: &G, f: HashFn, t: &Transcript) -> Result<G::Scalar> {
        if let Some(stub) = &self.stub {
            return stub_scalar(group, stub.lookup(f, None, t)?);
        }
        let wide: [u8; 64] = Sha512::digest(labelled(f, t)).into();
        Ok(group.scalar_from_wide(&wide))
    }

    fn derive_key(&self, f: HashFn, t: &Transcript) -> Result<SymmetricKey> {
        if let Some(stub) = &self.stub {
            return match stub.lookup(f, None, t)? {
                StubOutput::Key(k) => SymmetricKey::from_slice(k),
                _ => Err(Error::InvalidEncoding("stub output for a KDF must be a key")),
            };
        }
        let mut k = [0u8; KEY_LEN];
        Hkdf::<Sha256>::new(None, &t.encode())
            .expand(f.label().as_bytes(), &mut k)
            .expect("16 bytes is a valid HKDF length");
        Ok(SymmetricKey(k))
    }
}

fn stub_scalar<G: Group>(group: &G, out: &StubOutput) -> Result<G::Scalar> {
    match out {
        StubOutput::Scalar(bytes) => {
            let s = group.decode_scalar(bytes)?;
            if group.scalar_is_zero(&s) {
                return Err(Error::InvalidEncoding("stub scalar must be nonzero"));
            }
            Ok(s)
        }
        _ => Err(Error::InvalidEncoding("stub output must be a scalar")),
    }
}

fn labelled(f: HashFn, t: &Transcript) -> Vec<u8> {
    let label = f.label().as_bytes();
    let mut out = Vec::with_capacity(4 + label.len());
    out.extend_from_slice(&(label.len() as u32).to_be_bytes());
    out.extend_from_slice(label);
    out.extend_from_slice(&t.encode());
    out
}

/// E_K: AES-128-GCM with an all-zero nonce. Output is ciphertext ‖ tag.
pub fn sym_encrypt(key: &SymmetricKey, plaintext: &[u8]) -> Vec<u8> {
    Aes128Gcm::new(key.as_bytes().into())
        .encrypt(&Nonce::default(), plaintext)
        .expect("AES-GCM encryption of an in-memory buffer cannot fail")
}

/// D_K; any authentication failure is [`Error::DecryptFailure`].
pub fn sym_decrypt(key: &SymmetricKey, ciphertext: &[u8]) -> Result<Vec<u8>> {
    if ciphertext.len() < TAG_LEN {
        return Err(Error::DecryptFailure);
    }
    Aes128Gcm::new(key.as_bytes().into())
        .decrypt(&Nonce::default(), ciphertext)
        .map_err(|_| Error::DecryptFailure)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{P256Group, ToyGroup};
    use proptest::prelude::*;
    use rand::rngs::OsRng;
    use rand::RngCore;
    use std::collections::HashSet;

    #[test]
    fn item_boundaries_change_encoding() {
        let a = Transcript::new().identity(b"AB").identity(b"C");
        let b = Transcript::new().identity(b"A").identity(b"BC");
        assert_ne!(a.encode(), b.encode());
        let suite = HashSuite::standard();
        let g = P256Group;
        assert_ne!(suite.h1(&g, &a).unwrap(), suite.h1(&g, &b).unwrap());
    }

    #[test]
    fn type_tags_change_encoding() {
        let a = Transcript::new().identity(b"x");
        let b = Transcript::new().tag(b"x");
        assert_ne!(a.encode(), b.encode());
    }

    #[test]
    fn hashes_are_deterministic_and_domain_separated() {
        let g = P256Group;
        let suite = HashSuite::standard();
        let t = Transcript::new().identity(b"alice").element(&g, &g.generator());
        assert_eq!(suite.h1(&g, &t).unwrap(), suite.h1(&g, &t).unwrap());
        assert_ne!(suite.h1(&g, &t).unwrap(), suite.h2_lsw(&g, &t).unwrap());
        assert_eq!(suite.kdf_key(&t).unwrap(), suite.kdf_key(&t).unwrap());
        let (k1, k2) = suite.kdf_split(&t).unwrap();
        assert_ne!(k1.as_bytes(), k2.as_bytes());
        assert_ne!(suite.kdf_key(&t).unwrap(), k1);
    }

    #[test]
    fn kdf_no_collisions_over_random_points() {
        let g = P256Group;
        let suite = HashSuite::standard();
        let mut seen = HashSet::new();
        let u = g.point_mul(&g.random_nonzero_scalar(&mut OsRng), &g.generator());
        for _ in 0..10_000 {
            // Cheap distinct X values: random 16-byte stand-ins in the element slot.
            let mut x = [0u8; 33];
            OsRng.fill_bytes(&mut x);
            let t = Transcript(vec![Item::Element(x.to_vec())])
                .element(&g, &u)
                .identity(b"A")
                .identity(b"B");
            assert!(seen.insert(*suite.kdf_key(&t).unwrap().as_bytes()));
        }
    }

    #[test]
    fn kdf_split_keys_differ_and_mac_depends_on_key() {
        let g = P256Group;
        let suite = HashSuite::standard();
        let t = Transcript::new().tag(b"payload");
        let mut tags = HashSet::new();
        for i in 0..200u64 {
            let pt = g.point_mul(&g.scalar_from_u64(i + 1), &g.generator());
            let (k1, k2) = suite.kdf_split(&Transcript::new().element(&g, &pt)).unwrap();
            assert_ne!(k1.as_bytes(), k2.as_bytes());
            assert!(tags.insert(g.encode_scalar(&suite.mac(&g, &k2, &t).unwrap())));
        }
    }

    #[test]
    fn toy_scalar_hashes_are_nonzero() {
        let g = ToyGroup::new(2).unwrap();
        let suite = HashSuite::standard();
        for i in 0..100u8 {
            let s = suite.h1(&g, &Transcript::new().tag(&[i])).unwrap();
            assert_eq!(s.value(), 1);
        }
    }

    #[test]
    fn stub_returns_listed_and_rejects_unlisted() {
        let g = ToyGroup::default();
        let t = Transcript::new().identity(b"IDA").element(&g, &g.element(2));
        let suite = HashSuite::stubbed(StubTable::new([StubEntry {
            function: HashFn::H1,
            mac_key: None,
            input: t.clone(),
            output: StubOutput::Scalar(g.encode_scalar(&g.scalar(5))),
        }]));
        assert_eq!(suite.h1(&g, &t).unwrap(), g.scalar(5));
        assert_eq!(suite.h1(&g, &t).unwrap(), g.scalar(5));
        assert_eq!(suite.h2_lsw(&g, &t), Err(Error::StubMiss("H2")));
        let other = Transcript::new().identity(b"IDA").element(&g, &g.element(3));
        assert_eq!(suite.h1(&g, &other), Err(Error::StubMiss("H1")));
    }

    #[test]
    fn cipher_round_trips_and_detects_tampering() {
        let key = SymmetricKey::random(&mut OsRng);
        assert_eq!(sym_decrypt(&key, &sym_encrypt(&key, b"")).unwrap(), b"");
        let mut msg = vec![0u8; 1024];
        OsRng.fill_bytes(&mut msg);
        let mut ct = sym_encrypt(&key, &msg);
        assert_eq!(sym_decrypt(&key, &ct).unwrap(), msg);
        ct[17] ^= 0x01;
        assert_eq!(sym_decrypt(&key, &ct), Err(Error::DecryptFailure));
        assert_eq!(sym_decrypt(&key, &[0u8; 3]), Err(Error::DecryptFailure));
        let other = SymmetricKey::random(&mut OsRng);
        assert_eq!(sym_decrypt(&other, &sym_encrypt(&key, b"hi")), Err(Error::DecryptFailure));
    }

    fn arb_item() -> impl Strategy<Value = Item> {
        let bytes = || proptest::collection::vec(any::<u8>(), 0..6);
        prop_oneof![
            bytes().prop_map(Item::Identity),
            bytes().prop_map(Item::Element),
            bytes().prop_map(Item::Scalar),
            bytes().prop_map(Item::Tag),
            any::<u64>().prop_map(Item::Timestamp),
            bytes().prop_map(Item::Key),
        ]
    }

    proptest! {
        #[test]
        fn encoding_is_injective(
            a in proptest::collection::vec(arb_item(), 0..5),
            b in proptest::collection::vec(arb_item(), 0..5),
        ) {
            let (ta, tb) = (Transcript(a), Transcript(b));
            prop_assert_eq!(ta == tb, ta.encode() == tb.encode());
        }

        #[test]
        fn decode_inverts_encode(a in proptest::collection::vec(arb_item(), 0..6)) {
            let t = Transcript(a);
            prop_assert_eq!(Transcript::decode(&t.encode()).unwrap(), t);
        }
    }
}
