//! Binary file formats.
//!
//! Every file starts with
//!
//! ```text
//! magic "CLTK" (4) || version 0x01 (1) || role (1) || backend
//! ```
//!
//! where backend is `0x01` for P-256 or `0x02 || q (u64 BE)` for the toy
//! group. Group elements and scalars are written in their fixed-length
//! canonical encodings; identities and other variable-length fields carry a
//! u32 big-endian length prefix.
//!
//! | role | body |
//! |------|------|
//! | 0x01 params | suite id (1) ‖ P_pub |
//! | 0x02 master key | x_msk |
//! | 0x03 partial key | id ‖ R ‖ d |
//! | 0x04 private key | id ‖ x ‖ d ‖ P_E ‖ R |
//! | 0x05 public key | id ‖ P_E ‖ R |
//! | 0x06 LSW φ | Q ‖ U ‖ s ‖ h |
//! | 0x07 DKTUTS φ | U ‖ len(c) ‖ c ‖ r ‖ s |
//! | 0x08 session key | K (16 bytes) |
//! | 0x09 signcrypted | protocol (1) ‖ φ body ‖ len(ct) ‖ ct |
//!
//! Unknown versions, wrong roles and trailing bytes are rejected.

use crate::dktuts::DktutsEncapsulation;
use crate::error::{Error, Result};
use crate::group::{Backend, Group};
use crate::hash_suite::{HashSuite, SymmetricKey};
use crate::hybrid::{Encapsulation, Protocol, SigncryptedMessage};
use crate::kgc::{master_key_from_scalar, MasterKey, PartialPrivateKey, SystemParams};
use crate::lsw::LswEncapsulation;
use crate::user_keys::{FullPrivateKey, FullPublicKey};

pub const MAGIC: [u8; 4] = *b"CLTK";
pub const VERSION: u8 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum FileRole {
    Params = 0x01,
    MasterKey = 0x02,
    PartialKey = 0x03,
    PrivateKey = 0x04,
    PublicKey = 0x05,
    LswEncapsulation = 0x06,
    DktutsEncapsulation = 0x07,
    SessionKey = 0x08,
    Signcrypted = 0x09,
}

impl FileRole {
    fn from_u8(v: u8) -> Result<Self> {
        use FileRole::*;
        Ok(match v {
            0x01 => Params,
            0x02 => MasterKey,
            0x03 => PartialKey,
            0x04 => PrivateKey,
            0x05 => PublicKey,
            0x06 => LswEncapsulation,
            0x07 => DktutsEncapsulation,
            0x08 => SessionKey,
            0x09 => Signcrypted,
            _ => return Err(Error::InvalidEncoding("unknown file role")),
        })
    }

    /// Files holding secrets; the CLI writes these owner-only.
    pub fn is_secret(self) -> bool {
        matches!(self, FileRole::MasterKey | FileRole::PartialKey | FileRole::PrivateKey | FileRole::SessionKey)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Header {
    pub role: FileRole,
    pub backend: Backend,
}

/// Reads the header and returns it with the remaining body.
pub fn read_header(bytes: &[u8]) -> Result<(Header, &[u8])> {
    if bytes.len() < 7 || bytes[..4] != MAGIC {
        return Err(Error::InvalidEncoding("missing CLTK magic"));
    }
    if bytes[4] != VERSION {
        return Err(Error::InvalidEncoding("unsupported format version"));
    }
    let role = FileRole::from_u8(bytes[5])?;
    let (backend, rest) = match bytes[6] {
        Backend::P256_TAG => (Backend::P256, &bytes[7..]),
        Backend::TOY_TAG => {
            let q = bytes
                .get(7..15)
                .ok_or(Error::InvalidEncoding("truncated toy backend id"))?;
            (Backend::Toy { q: u64::from_be_bytes(q.try_into().unwrap()) }, &bytes[15..])
        }
        _ => return Err(Error::InvalidEncoding("unknown backend id")),
    };
    Ok((Header { role, backend }, rest))
}

struct Writer<'g, G: Group> {
    group: &'g G,
    buf: Vec<u8>,
}

impl<'g, G: Group> Writer<'g, G> {
    fn new(group: &'g G, role: FileRole) -> Self {
        let mut buf = MAGIC.to_vec();
        buf.push(VERSION);
        buf.push(role as u8);
        buf.extend(group.backend().to_bytes());
        Writer { group, buf }
    }

    fn u8(mut self, v: u8) -> Self {
        self.buf.push(v);
        self
    }

    fn raw(mut self, b: &[u8]) -> Self {
        self.buf.extend_from_slice(b);
        self
    }

    fn bytes(mut self, b: &[u8]) -> Self {
        self.buf.extend_from_slice(&(b.len() as u32).to_be_bytes());
        self.buf.extend_from_slice(b);
        self
    }

    fn element(self, e: &G::Element) -> Self {
        let enc = self.group.encode_element(e);
        self.raw(&enc)
    }

    fn scalar(self, s: &G::Scalar) -> Self {
        let enc = self.group.encode_scalar(s);
        self.raw(&enc)
    }

    fn finish(self) -> Vec<u8> {
        self.buf
    }
}

struct Reader<'a, 'g, G: Group> {
    group: &'g G,
    rest: &'a [u8],
}

impl<'a, 'g, G: Group> Reader<'a, 'g, G> {
    fn open(group: &'g G, bytes: &'a [u8], role: FileRole) -> Result<Self> {
        let (header, rest) = read_header(bytes)?;
        if header.role != role {
            return Err(Error::InvalidEncoding("file has the wrong role"));
        }
        if header.backend != group.backend() {
            return Err(Error::BackendMismatch {
                expected: group.backend().to_string(),
                found: header.backend.to_string(),
            });
        }
        Ok(Reader { group, rest })
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.rest.len() < n {
            return Err(Error::InvalidEncoding("truncated file"));
        }
        let (head, tail) = self.rest.split_at(n);
        self.rest = tail;
        Ok(head)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn bytes(&mut self) -> Result<Vec<u8>> {
        let len = u32::from_be_bytes(self.take(4)?.try_into().unwrap()) as usize;
        Ok(self.take(len)?.to_vec())
    }

    fn element(&mut self) -> Result<G::Element> {
        let b = self.take(self.group.element_len())?;
        self.group.decode_element(b)
    }

    fn nonidentity_element(&mut self) -> Result<G::Element> {
        let e = self.element()?;
        if self.group.is_identity(&e) {
            return Err(Error::InvalidEncoding("unexpected identity element"));
        }
        Ok(e)
    }

    fn scalar(&mut self) -> Result<G::Scalar> {
        let b = self.take(self.group.scalar_len())?;
        self.group.decode_scalar(b)
    }

    fn nonzero_scalar(&mut self) -> Result<G::Scalar> {
        let s = self.scalar()?;
        if self.group.scalar_is_zero(&s) {
            return Err(Error::InvalidEncoding("unexpected zero scalar"));
        }
        Ok(s)
    }

    fn finish(self) -> Result<()> {
        if !self.rest.is_empty() {
            return Err(Error::InvalidEncoding("trailing bytes"));
        }
        Ok(())
    }
}

pub fn encode_params<G: Group>(params: &SystemParams<G>) -> Vec<u8> {
    Writer::new(&params.group, FileRole::Params)
        .u8(HashSuite::STANDARD_ID)
        .element(&params.p_pub)
        .finish()
}

/// Parameters always load with the standard hash suite.
pub fn decode_params<G: Group>(group: G, bytes: &[u8]) -> Result<SystemParams<G>> {
    let mut r = Reader::open(&group, bytes, FileRole::Params)?;
    if r.u8()? != HashSuite::STANDARD_ID {
        return Err(Error::InvalidEncoding("unknown hash suite"));
    }
    let p_pub = r.nonidentity_element()?;
    r.finish()?;
    Ok(SystemParams {
        group,
        p_pub,
        suite: HashSuite::standard(),
    })
}

pub fn encode_master_key<G: Group>(params: &SystemParams<G>, msk: &MasterKey<G>) -> Vec<u8> {
    Writer::new(&params.group, FileRole::MasterKey).scalar(msk.secret()).finish()
}

/// Also checks x_msk·P = P_pub.
pub fn decode_master_key<G: Group>(params: &SystemParams<G>, bytes: &[u8]) -> Result<MasterKey<G>> {
    let mut r = Reader::open(&params.group, bytes, FileRole::MasterKey)?;
    let x = r.nonzero_scalar()?;
    r.finish()?;
    master_key_from_scalar(params, x)
}

pub fn encode_partial_key<G: Group>(group: &G, ppk: &PartialPrivateKey<G>) -> Vec<u8> {
    Writer::new(group, FileRole::PartialKey)
        .bytes(&ppk.id)
        .element(&ppk.r_point)
        .scalar(&ppk.d)
        .finish()
}

pub fn decode_partial_key<G: Group>(group: &G, bytes: &[u8]) -> Result<PartialPrivateKey<G>> {
    let mut r = Reader::open(group, bytes, FileRole::PartialKey)?;
    let ppk = PartialPrivateKey {
        id: r.bytes()?,
        r_point: r.nonidentity_element()?,
        d: r.nonzero_scalar()?,
    };
    r.finish()?;
    Ok(ppk)
}

pub fn encode_private_key<G: Group>(group: &G, sk: &FullPrivateKey<G>) -> Vec<u8> {
    Writer::new(group, FileRole::PrivateKey)
        .bytes(sk.id())
        .scalar(sk.secret_value())
        .scalar(sk.partial_key())
        .element(&sk.public().p_e)
        .element(&sk.public().r_point)
        .finish()
}

/// Re-validates the partial key and the stored public half.
pub fn decode_private_key<G: Group>(params: &SystemParams<G>, bytes: &[u8]) -> Result<FullPrivateKey<G>> {
    let mut r = Reader::open(&params.group, bytes, FileRole::PrivateKey)?;
    let id = r.bytes()?;
    let x = r.nonzero_scalar()?;
    let d = r.nonzero_scalar()?;
    let p_e = r.nonidentity_element()?;
    let r_point = r.nonidentity_element()?;
    r.finish()?;
    let sk = FullPrivateKey::assemble(params, &PartialPrivateKey { id, r_point, d }, x)?;
    if sk.public().p_e != p_e {
        return Err(Error::KeyValidation);
    }
    Ok(sk)
}

pub fn encode_public_key<G: Group>(group: &G, pk: &FullPublicKey<G>) -> Vec<u8> {
    Writer::new(group, FileRole::PublicKey)
        .bytes(&pk.id)
        .element(&pk.p_e)
        .element(&pk.r_point)
        .finish()
}

pub fn decode_public_key<G: Group>(group: &G, bytes: &[u8]) -> Result<FullPublicKey<G>> {
    let mut r = Reader::open(group, bytes, FileRole::PublicKey)?;
    let id = r.bytes()?;
    if id.is_empty() {
        return Err(Error::EmptyIdentity);
    }
    let pk = FullPublicKey {
        id,
        p_e: r.nonidentity_element()?,
        r_point: r.nonidentity_element()?,
    };
    r.finish()?;
    Ok(pk)
}

fn write_lsw<'g, G: Group>(w: Writer<'g, G>, phi: &LswEncapsulation<G>) -> Writer<'g, G> {
    w.element(&phi.q_point).element(&phi.u_point).scalar(&phi.s).scalar(&phi.h)
}

fn read_lsw<G: Group>(r: &mut Reader<'_, '_, G>) -> Result<LswEncapsulation<G>> {
    Ok(LswEncapsulation {
        q_point: r.element()?,
        u_point: r.element()?,
        s: r.scalar()?,
        h: r.scalar()?,
    })
}

fn write_dktuts<'g, G: Group>(w: Writer<'g, G>, phi: &DktutsEncapsulation<G>) -> Writer<'g, G> {
    w.element(&phi.u_point).bytes(&phi.ciphertext).scalar(&phi.r).scalar(&phi.s)
}

fn read_dktuts<G: Group>(r: &mut Reader<'_, '_, G>) -> Result<DktutsEncapsulation<G>> {
    Ok(DktutsEncapsulation {
        u_point: r.element()?,
        ciphertext: r.bytes()?,
        r: r.scalar()?,
        s: r.scalar()?,
    })
}

pub fn encode_lsw<G: Group>(group: &G, phi: &LswEncapsulation<G>) -> Vec<u8> {
    write_lsw(Writer::new(group, FileRole::LswEncapsulation), phi).finish()
}

pub fn decode_lsw<G: Group>(group: &G, bytes: &[u8]) -> Result<LswEncapsulation<G>> {
    let mut r = Reader::open(group, bytes, FileRole::LswEncapsulation)?;
    let phi = read_lsw(&mut r)?;
    r.finish()?;
    Ok(phi)
}

pub fn encode_dktuts<G: Group>(group: &G, phi: &DktutsEncapsulation<G>) -> Vec<u8> {
    write_dktuts(Writer::new(group, FileRole::DktutsEncapsulation), phi).finish()
}

pub fn decode_dktuts<G: Group>(group: &G, bytes: &[u8]) -> Result<DktutsEncapsulation<G>> {
    let mut r = Reader::open(group, bytes, FileRole::DktutsEncapsulation)?;
    let phi = read_dktuts(&mut r)?;
    r.finish()?;
    Ok(phi)
}

pub fn encode_session_key<G: Group>(group: &G, k: &SymmetricKey) -> Vec<u8> {
    Writer::new(group, FileRole::SessionKey).raw(k.as_bytes()).finish()
}

pub fn decode_session_key<G: Group>(group: &G, bytes: &[u8]) -> Result<SymmetricKey> {
    let mut r = Reader::open(group, bytes, FileRole::SessionKey)?;
    let k = SymmetricKey::from_slice(r.take(16)?)?;
    r.finish()?;
    Ok(k)
}

pub fn encode_signcrypted<G: Group>(group: &G, sc: &SigncryptedMessage<G>) -> Vec<u8> {
    let w = Writer::new(group, FileRole::Signcrypted).u8(sc.protocol().wire_id());
    let w = match &sc.encapsulation {
        Encapsulation::Lsw(phi) => write_lsw(w, phi),
        Encapsulation::Dktuts(phi) => write_dktuts(w, phi),
    };
    w.bytes(&sc.dem_ciphertext).finish()
}

pub fn decode_signcrypted<G: Group>(group: &G, bytes: &[u8]) -> Result<SigncryptedMessage<G>> {
    let mut r = Reader::open(group, bytes, FileRole::Signcrypted)?;
    let protocol = Protocol::from_wire_id(r.u8()?).ok_or(Error::InvalidEncoding("unknown protocol id"))?;
    let encapsulation = match protocol {
        Protocol::Lsw => Encapsulation::Lsw(read_lsw(&mut r)?),
        Protocol::Dktuts => Encapsulation::Dktuts(read_dktuts(&mut r)?),
    };
    let dem_ciphertext = r.bytes()?;
    r.finish()?;
    Ok(SigncryptedMessage {
        encapsulation,
        dem_ciphertext,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{P256Group, ToyGroup};
    use crate::kgc::{extract_partial_key, setup};
    use crate::user_keys::gen_full_keys;
    use proptest::prelude::*;
    use rand::rngs::OsRng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn header_rejects_unknown_version_and_role() {
        let (params, _) = setup(ToyGroup::default(), &mut OsRng);
        let mut bytes = encode_params(&params);
        assert!(decode_params(ToyGroup::default(), &bytes).is_ok());
        bytes[4] = 2;
        assert!(decode_params(ToyGroup::default(), &bytes).is_err());
        bytes[4] = 1;
        bytes[5] = 0x7f;
        assert!(decode_params(ToyGroup::default(), &bytes).is_err());
    }

    #[test]
    fn master_key_cannot_load_as_user_key() {
        let (params, msk) = setup(P256Group, &mut OsRng);
        let bytes = encode_master_key(&params, &msk);
        assert!(decode_private_key(&params, &bytes).is_err());
        assert!(decode_partial_key(&params.group, &bytes).is_err());
        assert!(decode_master_key(&params, &bytes).is_ok());
    }

    #[test]
    fn backend_mismatch_reported() {
        let (params, _) = setup(ToyGroup::default(), &mut OsRng);
        let bytes = encode_params(&params);
        assert!(matches!(
            decode_params(ToyGroup::new(101).unwrap(), &bytes),
            Err(Error::BackendMismatch { .. })
        ));
        assert!(decode_params(P256Group, &bytes).is_err());
    }

    #[test]
    fn trailing_bytes_rejected() {
        let (params, _) = setup(P256Group, &mut OsRng);
        let mut bytes = encode_params(&params);
        bytes.push(0);
        assert!(decode_params(P256Group, &bytes).is_err());
    }

    #[test]
    fn private_key_with_wrong_public_half_rejected() {
        let (params, msk) = setup(P256Group, &mut OsRng);
        let ppk = extract_partial_key(&msk, &params, b"n", &mut OsRng).unwrap();
        let sk = gen_full_keys(&params, &ppk, &mut OsRng).unwrap();
        let mut bytes = encode_private_key(&params.group, &sk);
        assert!(decode_private_key(&params, &bytes).is_ok());
        // Swap P_E for R (last two 33-byte fields).
        let n = bytes.len();
        let (pe, r) = (bytes[n - 66..n - 33].to_vec(), bytes[n - 33..].to_vec());
        bytes[n - 66..n - 33].copy_from_slice(&r);
        bytes[n - 33..].copy_from_slice(&pe);
        assert!(decode_private_key(&params, &bytes).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn key_files_round_trip_byte_identical(seed in any::<u64>(), id in "[a-z]{1,12}") {
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            let (params, msk) = setup(P256Group, &mut rng);
            let g = params.group;
            let ppk = extract_partial_key(&msk, &params, id.as_bytes(), &mut rng).unwrap();
            let sk = gen_full_keys(&params, &ppk, &mut rng).unwrap();

            let b = encode_params(&params);
            prop_assert_eq!(encode_params(&decode_params(g, &b).unwrap()), b);
            let b = encode_master_key(&params, &msk);
            prop_assert_eq!(encode_master_key(&params, &decode_master_key(&params, &b).unwrap()), b);
            let b = encode_partial_key(&g, &ppk);
            prop_assert_eq!(encode_partial_key(&g, &decode_partial_key(&g, &b).unwrap()), b);
            let b = encode_private_key(&g, &sk);
            prop_assert_eq!(encode_private_key(&g, &decode_private_key(&params, &b).unwrap()), b);
            let b = encode_public_key(&g, sk.public());
            prop_assert_eq!(encode_public_key(&g, &decode_public_key(&g, &b).unwrap()), b);
        }

        #[test]
        fn encapsulations_round_trip(q in 0u64..13, u in 0u64..13, s in 0u64..13, h in 0u64..13, c in proptest::collection::vec(any::<u8>(), 0..40)) {
            let g = ToyGroup::default();
            let lsw = LswEncapsulation::<ToyGroup> { q_point: g.element(q), u_point: g.element(u), s: g.scalar(s), h: g.scalar(h) };
            let b = encode_lsw(&g, &lsw);
            prop_assert_eq!(decode_lsw(&g, &b).unwrap(), lsw.clone());
            let dk = DktutsEncapsulation::<ToyGroup> { u_point: g.element(u), ciphertext: c.clone(), r: g.scalar(s), s: g.scalar(h) };
            let b = encode_dktuts(&g, &dk);
            prop_assert_eq!(decode_dktuts(&g, &b).unwrap(), dk.clone());
            for enc in [Encapsulation::Lsw(lsw), Encapsulation::Dktuts(dk)] {
                let sc = SigncryptedMessage { encapsulation: enc, dem_ciphertext: c.clone() };
                let b = encode_signcrypted(&g, &sc);
                prop_assert_eq!(decode_signcrypted(&g, &b).unwrap(), sc);
            }
        }
    }
}
