//! Self-contained test-vector files.
//!
//! A vector fixes the backend, every random choice, and a stub table for
//! the hash functions, then lists every intermediate value the protocol
//! run produces. [`check`] replays the file through the library and
//! compares each value byte for byte.
//!
//! All values are hex of the canonical encodings (8-byte big-endian words
//! on the toy backend).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dktuts::{self, FixedClock, Freshness, Timestamp};
use crate::error::{Error, Result};
use crate::group::{Backend, Group, P256Group, ToyGroup};
use crate::hash_suite::{HashFn, HashSuite, StubEntry, StubOutput, StubTable, SymmetricKey, Transcript};
use crate::hybrid::Protocol;
use crate::kgc::{extract_partial_key_with, setup_with_master, SystemParams};
use crate::lsw;
use crate::user_keys::{combine_public_key, FullPrivateKey};
use crate::codec;

pub const FORMAT: &str = "clsc-tkem-vectors/v1";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestVectorFile {
    pub format: String,
    pub name: String,
    pub protocol: Protocol,
    pub backend: Backend,
    pub sender_id: String,
    pub receiver_id: String,
    #[serde(with = "hex")]
    pub tag: Vec<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<u64>,
    /// Random choices by name: x_msk, r_a, r_b, x_a, x_b, then u, a (LSW)
    /// or k, x, a (DKTUTS).
    pub inputs: BTreeMap<String, String>,
    pub stub: Vec<StubEntry>,
    pub expected: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mismatch {
    pub name: String,
    pub expected: Option<String>,
    pub computed: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VectorReport {
    pub name: String,
    pub checked: usize,
    pub mismatches: Vec<Mismatch>,
}

impl VectorReport {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }
}

impl TestVectorFile {
    pub fn from_json(s: &str) -> Result<Self> {
        let f: Self = serde_json::from_str(s).map_err(|_| Error::InvalidEncoding("malformed vector file"))?;
        if f.format != FORMAT {
            return Err(Error::InvalidEncoding("unknown vector format"));
        }
        Ok(f)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("vector serializes") + "\n"
    }

    pub fn stub_table(&self) -> StubTable {
        StubTable::new(self.stub.iter().cloned())
    }

    fn input<G: Group>(&self, g: &G, name: &str) -> Result<G::Scalar> {
        let hex = self.inputs.get(name).ok_or(Error::InvalidEncoding("vector input missing"))?;
        g.decode_scalar(&hex::decode(hex).map_err(|_| Error::InvalidEncoding("vector input is not hex"))?)
    }

    fn input_key(&self, name: &str) -> Result<SymmetricKey> {
        let hex = self.inputs.get(name).ok_or(Error::InvalidEncoding("vector input missing"))?;
        SymmetricKey::from_slice(&hex::decode(hex).map_err(|_| Error::InvalidEncoding("vector input is not hex"))?)
    }
}

/// Replays `file` and compares every intermediate value.
pub fn check(file: &TestVectorFile) -> Result<VectorReport> {
    let computed = match file.backend {
        Backend::P256 => replay(P256Group, file)?,
        Backend::Toy { q } => replay(ToyGroup::new(q)?, file)?,
    };
    let mut mismatches = Vec::new();
    let names: std::collections::BTreeSet<&String> = file.expected.keys().chain(computed.keys()).collect();
    for name in &names {
        let (e, c) = (file.expected.get(*name), computed.get(*name));
        if e != c {
            mismatches.push(Mismatch {
                name: (*name).clone(),
                expected: e.cloned(),
                computed: c.cloned(),
            });
        }
    }
    Ok(VectorReport {
        name: file.name.clone(),
        checked: names.len(),
        mismatches,
    })
}

/// Runs the protocol described by `file` and returns every named value.
pub fn replay<G: Group>(group: G, file: &TestVectorFile) -> Result<BTreeMap<String, String>> {
    let g = group.clone();
    let mut out = BTreeMap::new();
    let mut put = |name: &str, bytes: Vec<u8>| {
        out.insert(name.to_string(), hex::encode(bytes));
    };
    let (params, msk) = setup_with_master(group, file.input(&g, "x_msk")?)?;
    let params = params.with_suite(HashSuite::stubbed(file.stub_table()));
    put("p_pub", g.encode_element(&params.p_pub));

    let (ida, idb) = (file.sender_id.as_bytes(), file.receiver_id.as_bytes());
    let ppk_a = extract_partial_key_with(&msk, &params, ida, file.input(&g, "r_a")?)?;
    let ppk_b = extract_partial_key_with(&msk, &params, idb, file.input(&g, "r_b")?)?;
    put("h_a", g.encode_scalar(&params.h1_identity(ida, &ppk_a.r_point)?));
    put("h_b", g.encode_scalar(&params.h1_identity(idb, &ppk_b.r_point)?));
    put("r_a_point", g.encode_element(&ppk_a.r_point));
    put("d_a", g.encode_scalar(&ppk_a.d));
    put("r_b_point", g.encode_element(&ppk_b.r_point));
    put("d_b", g.encode_scalar(&ppk_b.d));
    let alice = FullPrivateKey::assemble(&params, &ppk_a, file.input(&g, "x_a")?)?;
    let bob = FullPrivateKey::assemble(&params, &ppk_b, file.input(&g, "x_b")?)?;
    put("p_a", g.encode_element(&alice.public().p_e));
    put("p_b", g.encode_element(&bob.public().p_e));
    let alice_c = combine_public_key(&params, alice.public())?;
    let bob_c = combine_public_key(&params, bob.public())?;
    put("y_a_partial", g.encode_element(&alice_c.partial));
    put("y_b", g.encode_element(&bob_c.combined));

    let dx_b = g.scalar_add(bob.partial_key(), bob.secret_value());
    match file.protocol {
        Protocol::Lsw => {
            let (k, session) = lsw::symmetric_key_gen_with(&params, &alice, &bob_c, file.input(&g, "u")?)?;
            put("u_point", g.encode_element(session.u_point()));
            put("x_point", g.encode_element(session.x_point()));
            put("k", k.as_bytes().to_vec());
            let phi = session.encapsulate_with(&params, &file.tag, &alice, file.input(&g, "a")?)?;
            put("q_point", g.encode_element(&phi.q_point));
            put("h", g.encode_scalar(&phi.h));
            put("s", g.encode_scalar(&phi.s));
            put("phi", codec::encode_lsw(&g, &phi));
            // Recipient side, step by step.
            let x_rec = g.point_mul(&g.scalar_invert(&dx_b)?, &phi.u_point);
            put("recipient_x_point", g.encode_element(&x_rec));
            let inner = g.point_add(&g.point_mul(&phi.h, &alice.public().p_e), &alice_c.partial);
            put("verify_inner", g.encode_element(&inner));
            put("verify_lhs", g.encode_element(&g.point_mul(&phi.s, &inner)));
            let got = lsw::decapsulate(&params, &phi, &file.tag, &alice_c, &bob)
                .map_err(|_| Error::InvalidEncoding("vector failed to decapsulate"))?;
            put("recipient_k", got.as_bytes().to_vec());
        }
        Protocol::Dktuts => {
            let ts = Timestamp(file.timestamp.ok_or(Error::InvalidEncoding("DKTUTS vector needs a timestamp"))?);
            let (k, session) = dktuts::symmetric_key_gen_with(
                &params,
                &alice,
                &bob_c,
                file.input_key("k")?,
                file.input(&g, "x")?,
                file.input(&g, "a")?,
                ts,
            )?;
            put("k", k.as_bytes().to_vec());
            put("u_point", g.encode_element(session.u_point()));
            put("x_point", g.encode_element(session.x_point()));
            put("x_plus_u", g.encode_element(&g.point_add(session.x_point(), session.u_point())));
            let (k1, k2) = session.split_keys();
            put("k1", k1.as_bytes().to_vec());
            put("k2", k2.as_bytes().to_vec());
            let phi = session.encapsulate_with(&params, &file.tag, &alice)?;
            put("c", phi.ciphertext.clone());
            put("r", g.encode_scalar(&phi.r));
            put("s", g.encode_scalar(&phi.s));
            put("phi", codec::encode_dktuts(&g, &phi));
            let w = g.scalar_mul(&phi.s, &dx_b);
            put("recipient_w", g.encode_scalar(&w));
            let base = g.point_add(&alice.public().p_e, &g.point_mul(&phi.r, &g.generator()));
            put("recipient_x_point", g.encode_element(&g.point_mul(&w, &base)));
            let got = dktuts::decapsulate(&params, &phi, &file.tag, alice.public(), &bob, &FixedClock(ts), Freshness::default())
                .map_err(|_| Error::InvalidEncoding("vector failed to decapsulate"))?;
            put("recipient_k", got.as_bytes().to_vec());
        }
    }
    Ok(out)
}

/// Named toy-group choices for the worked Z_13 examples.
pub mod toy {
    pub const Q: u64 = 13;
    pub const SENDER: &str = "IDA";
    pub const RECEIVER: &str = "IDB";
    pub const TAG: &[u8] = b"toy-tag";
    pub const X_MSK: u64 = 3;
    pub const R_A: u64 = 2;
    pub const R_B: u64 = 7;
    pub const H_A: u64 = 5;
    pub const H_B: u64 = 4;
    pub const X_A: u64 = 6;
    pub const X_B: u64 = 5;
    pub const LSW_U: u64 = 2;
    pub const LSW_A: u64 = 3;
    pub const LSW_H: u64 = 7;
    pub const LSW_K: [u8; 16] = *b"LSW toy K 128bit";
    pub const DKTUTS_K: [u8; 16] = *b"DKTUTS toy K 128";
    pub const DKTUTS_X: u64 = 4;
    pub const DKTUTS_A: u64 = 2;
    pub const DKTUTS_R: u64 = 3;
    pub const DKTUTS_K1: [u8; 16] = *b"toy k1 for E/D..";
    pub const DKTUTS_K2: [u8; 16] = *b"toy k2 for F....";
    pub const DKTUTS_TS: u64 = 1_700_000_000;
}

/// Builds a toy vector with the stub table and inputs filled in and an
/// empty `expected` map. The protocol-specific stub inputs are computed
/// from the worked-example values in [`toy`], not from a protocol run.
pub fn toy_skeleton(protocol: Protocol) -> TestVectorFile {
    use toy::*;
    let g = ToyGroup::new(Q).expect("13 is prime");
    let el = |v: u64| g.encode_element(&g.element(v));
    let sc = |v: u64| hex::encode(g.encode_scalar(&g.scalar(v)));
    let h1 = |id: &str, r: u64, h: u64| StubEntry {
        function: HashFn::H1,
        mac_key: None,
        input: Transcript::new().identity(id.as_bytes()).element(&g, &g.element(r)),
        output: StubOutput::Scalar(g.encode_scalar(&g.scalar(h))),
    };
    let (p_a, p_b, r_a, r_b) = (X_A, X_B, R_A, R_B);
    let mut inputs: BTreeMap<String, String> = [
        ("x_msk", X_MSK),
        ("r_a", R_A),
        ("r_b", R_B),
        ("x_a", X_A),
        ("x_b", X_B),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), sc(v)))
    .collect();
    let mut stub = vec![h1(SENDER, R_A, H_A), h1(RECEIVER, R_B, H_B)];
    let mut timestamp = None;
    match protocol {
        Protocol::Lsw => {
            inputs.insert("u".into(), sc(LSW_U));
            inputs.insert("a".into(), sc(LSW_A));
            // Y_B = 11, so U = 2·11 = 9, X = 2, Q = 3.
            let (u_pt, x_pt, q_pt) = (9, 2, 3);
            let mut t = Transcript::new().tag(TAG).identity(SENDER.as_bytes()).identity(RECEIVER.as_bytes());
            for v in [r_a, r_b, p_a, p_b, q_pt, x_pt, u_pt] {
                t.0.push(crate::hash_suite::Item::Element(el(v)));
            }
            stub.push(StubEntry {
                function: HashFn::H2Lsw,
                mac_key: None,
                input: t,
                output: StubOutput::Scalar(g.encode_scalar(&g.scalar(LSW_H))),
            });
            stub.push(StubEntry {
                function: HashFn::Kdf,
                mac_key: None,
                input: Transcript::new()
                    .element(&g, &g.element(x_pt))
                    .element(&g, &g.element(u_pt))
                    .identity(SENDER.as_bytes())
                    .identity(RECEIVER.as_bytes()),
                output: StubOutput::Key(LSW_K.to_vec()),
            });
        }
        Protocol::Dktuts => {
            inputs.insert("k".into(), hex::encode(DKTUTS_K));
            inputs.insert("x".into(), sc(DKTUTS_X));
            inputs.insert("a".into(), sc(DKTUTS_A));
            timestamp = Some(DKTUTS_TS);
            // U = 2, X = 4·11 = 5, X + U = 7.
            let (u_pt, x_pt) = (2, 5);
            stub.push(StubEntry {
                function: HashFn::KdfSplit,
                mac_key: None,
                input: Transcript::new().element(&g, &g.element(7)),
                output: StubOutput::Split {
                    k1: DKTUTS_K1.to_vec(),
                    k2: DKTUTS_K2.to_vec(),
                },
            });
            let mut m = Transcript::new()
                .key(&DKTUTS_K)
                .timestamp(DKTUTS_TS)
                .tag(TAG)
                .identity(SENDER.as_bytes())
                .identity(RECEIVER.as_bytes());
            for v in [r_a, r_b, p_a, p_b, x_pt, u_pt] {
                m.0.push(crate::hash_suite::Item::Element(el(v)));
            }
            stub.push(StubEntry {
                function: HashFn::Mac,
                mac_key: Some(DKTUTS_K2.to_vec()),
                input: m,
                output: StubOutput::Scalar(g.encode_scalar(&g.scalar(DKTUTS_R))),
            });
        }
    }
    TestVectorFile {
        format: FORMAT.to_string(),
        name: format!("{}-toy-z13", match protocol {
            Protocol::Lsw => "lsw",
            Protocol::Dktuts => "dktuts",
        }),
        protocol,
        backend: Backend::Toy { q: Q },
        sender_id: SENDER.to_string(),
        receiver_id: RECEIVER.to_string(),
        tag: TAG.to_vec(),
        timestamp,
        inputs,
        stub,
        expected: BTreeMap::new(),
    }
}

/// A complete toy vector: the skeleton plus the values a replay produces.
pub fn generate_toy_vector(protocol: Protocol) -> Result<TestVectorFile> {
    let mut file = toy_skeleton(protocol);
    file.expected = replay(ToyGroup::new(toy::Q)?, &file)?;
    Ok(file)
}

/// Parameters of a vector with its stub table installed, for tools that
/// drive the library step by step.
pub fn toy_params_with_stub(file: &TestVectorFile) -> Result<SystemParams<ToyGroup>> {
    let Backend::Toy { q } = file.backend else {
        return Err(Error::UnsupportedParameter("not a toy vector".into()));
    };
    let g = ToyGroup::new(q)?;
    let x = file.input(&g, "x_msk")?;
    Ok(setup_with_master(g, x)?.0.with_suite(HashSuite::stubbed(file.stub_table())))
}
