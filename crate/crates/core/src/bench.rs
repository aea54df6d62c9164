//! Operation counting and timing.
//!
//! [`Metered`] wraps any [`Group`] and tallies what the protocols do. The
//! counting convention that makes the published cost rows line up with the
//! algorithms:
//!
//! * every scalar multiplication of a group element is one EM, whatever
//!   the base point;
//! * point additions, scalar additions and hashing are free;
//! * each scalar-by-scalar product is one field multiplication and each
//!   scalar inversion one field inversion;
//! * combining a peer's public key (`R + H1(ID, R)·P_pub + P_E`) is an
//!   offline precomputation, cached per peer and tallied separately.
//!
//! Under it, for example, the LSW sender's online EMs are U = u·Y_B,
//! X = u·P and Q = a·P, and its field work is h·x_A, one inversion and
//! a·(h·x_A + d_A)^-1.

use std::cell::RefCell;
use std::fmt::Write as _;
use std::rc::Rc;
use std::time::{Duration, Instant};

use rand::rngs::OsRng;
use rand::{CryptoRng, RngCore};
use serde::{Deserialize, Serialize};

use crate::dktuts::{self, FixedClock, Freshness, Timestamp};
use crate::error::Result;
use crate::group::{Backend, CostOp, Group, P256Group};
use crate::hybrid::Protocol;
use crate::kgc::{extract_partial_key, setup, SystemParams};
use crate::lsw;
use crate::user_keys::{combine_public_key, gen_full_keys, CombinedPublicKey, FullPrivateKey};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    KeyGen,
    Encap,
    Decap,
    Precompute,
}

/// Tallies for one measured run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpCounter {
    pub scalar_mults_online: u64,
    pub scalar_mults_offline: u64,
    pub field_inversions: u64,
    pub field_mults: u64,
    pub sym_encryptions: u64,
    pub sym_decryptions: u64,
}

#[derive(Debug)]
struct Tally {
    phase: Option<Phase>,
    counts: OpCounter,
}

/// A group wrapper that counts operations into a private, per-run tally.
#[derive(Debug, Clone)]
pub struct Metered<G: Group> {
    inner: G,
    tally: Rc<RefCell<Tally>>,
}

impl<G: Group> Metered<G> {
    pub fn new(inner: G) -> Self {
        Metered {
            inner,
            tally: Rc::new(RefCell::new(Tally {
                phase: None,
                counts: OpCounter::default(),
            })),
        }
    }

    pub fn inner(&self) -> &G {
        &self.inner
    }

    /// Zeroes the tally and starts `phase`. EMs in [`Phase::Precompute`]
    /// count as offline.
    pub fn begin(&self, phase: Phase) {
        let mut t = self.tally.borrow_mut();
        t.phase = Some(phase);
        t.counts = OpCounter::default();
    }

    pub fn phase(&self) -> Option<Phase> {
        self.tally.borrow().phase
    }

    pub fn counts(&self) -> OpCounter {
        self.tally.borrow().counts
    }

    fn bump(&self, f: impl FnOnce(&mut OpCounter)) {
        f(&mut self.tally.borrow_mut().counts)
    }
}

impl<G: Group> Group for Metered<G> {
    type Scalar = G::Scalar;
    type Element = G::Element;

    fn backend(&self) -> Backend {
        self.inner.backend()
    }
    fn generator(&self) -> G::Element {
        self.inner.generator()
    }
    fn identity(&self) -> G::Element {
        self.inner.identity()
    }
    fn is_identity(&self, e: &G::Element) -> bool {
        self.inner.is_identity(e)
    }
    fn scalar_from_u64(&self, v: u64) -> G::Scalar {
        self.inner.scalar_from_u64(v)
    }
    fn scalar_is_zero(&self, a: &G::Scalar) -> bool {
        self.inner.scalar_is_zero(a)
    }
    fn scalar_add(&self, a: &G::Scalar, b: &G::Scalar) -> G::Scalar {
        self.inner.scalar_add(a, b)
    }
    fn scalar_neg(&self, a: &G::Scalar) -> G::Scalar {
        self.inner.scalar_neg(a)
    }
    fn scalar_mul(&self, a: &G::Scalar, b: &G::Scalar) -> G::Scalar {
        self.bump(|c| c.field_mults += 1);
        self.inner.scalar_mul(a, b)
    }
    fn scalar_invert(&self, a: &G::Scalar) -> Result<G::Scalar> {
        self.bump(|c| c.field_inversions += 1);
        self.inner.scalar_invert(a)
    }
    fn point_add(&self, a: &G::Element, b: &G::Element) -> G::Element {
        self.inner.point_add(a, b)
    }
    fn point_neg(&self, a: &G::Element) -> G::Element {
        self.inner.point_neg(a)
    }
    fn point_mul(&self, k: &G::Scalar, p: &G::Element) -> G::Element {
        let offline = self.phase() == Some(Phase::Precompute);
        self.bump(|c| {
            if offline {
                c.scalar_mults_offline += 1
            } else {
                c.scalar_mults_online += 1
            }
        });
        self.inner.point_mul(k, p)
    }
    fn random_nonzero_scalar<R: RngCore + CryptoRng + ?Sized>(&self, rng: &mut R) -> G::Scalar {
        self.inner.random_nonzero_scalar(rng)
    }
    fn scalar_from_wide(&self, wide: &[u8; 64]) -> G::Scalar {
        self.inner.scalar_from_wide(wide)
    }
    fn element_len(&self) -> usize {
        self.inner.element_len()
    }
    fn scalar_len(&self) -> usize {
        self.inner.scalar_len()
    }
    fn encode_element(&self, e: &G::Element) -> Vec<u8> {
        self.inner.encode_element(e)
    }
    fn decode_element(&self, bytes: &[u8]) -> Result<G::Element> {
        self.inner.decode_element(bytes)
    }
    fn encode_scalar(&self, s: &G::Scalar) -> Vec<u8> {
        self.inner.encode_scalar(s)
    }
    fn decode_scalar(&self, bytes: &[u8]) -> Result<G::Scalar> {
        self.inner.decode_scalar(bytes)
    }
    fn tally(&self, op: CostOp) {
        self.bump(|c| match op {
            CostOp::SymEncrypt => c.sym_encryptions += 1,
            CostOp::SymDecrypt => c.sym_decryptions += 1,
        });
        self.inner.tally(op)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Sender,
    Recipient,
}

/// One published cost row. `symmetric` is encryptions for the sender and
/// decryptions for the recipient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ReferenceCostRow {
    pub protocol: &'static str,
    pub role: Role,
    pub online_em: u64,
    pub offline_em: u64,
    pub field_inversions: u64,
    pub field_mults: u64,
    pub symmetric: u64,
}

const fn row(protocol: &'static str, role: Role, online_em: u64, offline_em: u64, inv: u64, mult: u64, sym: u64) -> ReferenceCostRow {
    ReferenceCostRow {
        protocol,
        role,
        online_em,
        offline_em,
        field_inversions: inv,
        field_mults: mult,
        symmetric: sym,
    }
}

/// Sender-side costs of four CLSC-TKEM protocols. The first two rows are
/// reference constants for protocols this crate does not implement.
pub const SENDER_REFERENCE: [ReferenceCostRow; 4] = [
    row("CLSC-TKEM[SB13]", Role::Sender, 2, 0, 0, 2, 0),
    row("eCLSC-TKEM[JSB15]", Role::Sender, 4, 2, 0, 0, 0),
    row("LSW-CLSC-TKEM", Role::Sender, 3, 0, 1, 2, 0),
    row("DKTUTS-CLSC-TKEM", Role::Sender, 2, 0, 1, 1, 1),
];

pub const RECIPIENT_REFERENCE: [ReferenceCostRow; 4] = [
    row("CLSC-TKEM[SB13]", Role::Recipient, 5, 3, 0, 0, 0),
    row("eCLSC-TKEM[JSB15]", Role::Recipient, 4, 2, 0, 0, 0),
    row("LSW-CLSC-TKEM", Role::Recipient, 3, 0, 1, 0, 0),
    row("DKTUTS-CLSC-TKEM", Role::Recipient, 2, 0, 0, 1, 1),
];

pub fn reference_row(protocol: Protocol, role: Role) -> ReferenceCostRow {
    let table = match role {
        Role::Sender => &SENDER_REFERENCE,
        Role::Recipient => &RECIPIENT_REFERENCE,
    };
    *table
        .iter()
        .find(|r| r.protocol == protocol.name())
        .expect("both implemented protocols have reference rows")
}

/// A measured run in the same shape as [`ReferenceCostRow`], plus the
/// precompute EMs spent on combining the peer's public key.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Measurement {
    pub protocol: Protocol,
    pub role: Role,
    pub online_em: u64,
    pub offline_em: u64,
    pub field_inversions: u64,
    pub field_mults: u64,
    pub symmetric: u64,
    pub precompute_em: u64,
}

impl Measurement {
    fn from_counts(protocol: Protocol, role: Role, run: OpCounter, precompute: OpCounter) -> Self {
        Measurement {
            protocol,
            role,
            online_em: run.scalar_mults_online,
            offline_em: run.scalar_mults_offline,
            field_inversions: run.field_inversions,
            field_mults: run.field_mults,
            symmetric: match role {
                Role::Sender => run.sym_encryptions,
                Role::Recipient => run.sym_decryptions,
            },
            precompute_em: precompute.scalar_mults_offline,
        }
    }

    pub fn matches(&self, r: &ReferenceCostRow) -> bool {
        r.role == self.role
            && r.protocol == self.protocol.name()
            && (self.online_em, self.offline_em, self.field_inversions, self.field_mults, self.symmetric)
                == (r.online_em, r.offline_em, r.field_inversions, r.field_mults, r.symmetric)
    }
}

struct Fixture<G: Group> {
    params: SystemParams<Metered<G>>,
    alice: FullPrivateKey<Metered<G>>,
    bob: FullPrivateKey<Metered<G>>,
}

const BENCH_TS: Timestamp = Timestamp(1_700_000_000);

fn fixture<G: Group>(group: G) -> Fixture<G> {
    let (params, msk) = setup(Metered::new(group), &mut OsRng);
    let mk = |id: &[u8]| {
        let ppk = extract_partial_key(&msk, &params, id, &mut OsRng).expect("fresh extraction");
        gen_full_keys(&params, &ppk, &mut OsRng).expect("honest key assembly")
    };
    let alice = mk(b"drone");
    let bob = mk(b"smart-object");
    Fixture { params, alice, bob }
}

fn precompute<G: Group>(f: &Fixture<G>, peer: &FullPrivateKey<Metered<G>>) -> (CombinedPublicKey<Metered<G>>, OpCounter) {
    f.params.group.begin(Phase::Precompute);
    let c = combine_public_key(&f.params, peer.public()).expect("honest public key");
    (c, f.params.group.counts())
}

/// Counts SymmetricKeyGen + Encapsulation for one sender run on `group`.
pub fn count_sender_on<G: Group>(group: G, protocol: Protocol) -> Measurement {
    let f = fixture(group);
    let (bob_c, pre) = precompute(&f, &f.bob);
    let meter = &f.params.group;
    meter.begin(Phase::Encap);
    match protocol {
        Protocol::Lsw => {
            let (_, s) = lsw::symmetric_key_gen(&f.params, &f.alice, &bob_c, &mut OsRng).expect("keygen");
            s.encapsulate(&f.params, b"bench", &f.alice, &mut OsRng).expect("encap");
        }
        Protocol::Dktuts => {
            let (_, s) = dktuts::symmetric_key_gen(&f.params, &f.alice, &bob_c, &FixedClock(BENCH_TS), &mut OsRng)
                .expect("keygen");
            s.encapsulate(&f.params, b"bench", &f.alice, &mut OsRng).expect("encap");
        }
    }
    Measurement::from_counts(protocol, Role::Sender, meter.counts(), pre)
}

/// Counts Decapsulation for one recipient run on `group`.
pub fn count_recipient_on<G: Group>(group: G, protocol: Protocol) -> Measurement {
    let f = fixture(group);
    let meter = &f.params.group;
    let bob_c = combine_public_key(&f.params, f.bob.public()).expect("honest public key");
    let (alice_c, pre) = precompute(&f, &f.alice);
    let clock = FixedClock(BENCH_TS);
    match protocol {
        Protocol::Lsw => {
            let (k, s) = lsw::symmetric_key_gen(&f.params, &f.alice, &bob_c, &mut OsRng).expect("keygen");
            let phi = s.encapsulate(&f.params, b"bench", &f.alice, &mut OsRng).expect("encap");
            meter.begin(Phase::Decap);
            let got = lsw::decapsulate(&f.params, &phi, b"bench", &alice_c, &f.bob);
            assert_eq!(got, Ok(k), "honest LSW run must decapsulate");
        }
        Protocol::Dktuts => {
            let (k, s) = dktuts::symmetric_key_gen(&f.params, &f.alice, &bob_c, &clock, &mut OsRng).expect("keygen");
            let phi = s.encapsulate(&f.params, b"bench", &f.alice, &mut OsRng).expect("encap");
            meter.begin(Phase::Decap);
            let got = dktuts::decapsulate(&f.params, &phi, b"bench", f.alice.public(), &f.bob, &clock, Freshness::default());
            assert_eq!(got, Ok(k), "honest DKTUTS run must decapsulate");
        }
    }
    Measurement::from_counts(protocol, Role::Recipient, meter.counts(), pre)
}

/// Sender counts on the production backend.
pub fn count_sender(protocol: Protocol) -> Measurement {
    count_sender_on(P256Group, protocol)
}

/// Recipient counts on the production backend.
pub fn count_recipient(protocol: Protocol) -> Measurement {
    count_recipient_on(P256Group, protocol)
}

/// Measured rows for both protocols and roles next to their references.
#[derive(Debug, Clone, Serialize)]
pub struct CostReport {
    pub rows: Vec<(Measurement, ReferenceCostRow)>,
    pub reference_only: Vec<ReferenceCostRow>,
}

impl CostReport {
    pub fn all_match(&self) -> bool {
        self.rows.iter().all(|(m, r)| m.matches(r))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_table(&self) -> String {
        let mut out = String::new();
        for role in [Role::Sender, Role::Recipient] {
            let sym = if role == Role::Sender { "enc" } else { "dec" };
            let _ = writeln!(out, "{} cost", if role == Role::Sender { "Sender" } else { "Recipient" });
            let _ = writeln!(
                out,
                "{:<20} {:>9} {:>10} {:>8} {:>9} {:>5} {:>11}  status",
                "protocol", "online EM", "offline EM", "fld inv", "fld mult", sym, "precomp EM"
            );
            for r in self.reference_only.iter().filter(|r| r.role == role) {
                let _ = writeln!(
                    out,
                    "{:<20} {:>9} {:>10} {:>8} {:>9} {:>5} {:>11}  reference",
                    r.protocol, r.online_em, r.offline_em, r.field_inversions, r.field_mults, r.symmetric, "-"
                );
            }
            for (m, r) in self.rows.iter().filter(|(m, _)| m.role == role) {
                let _ = writeln!(
                    out,
                    "{:<20} {:>9} {:>10} {:>8} {:>9} {:>5} {:>11}  {}",
                    r.protocol,
                    m.online_em,
                    m.offline_em,
                    m.field_inversions,
                    m.field_mults,
                    m.symmetric,
                    m.precompute_em,
                    if m.matches(r) { "match" } else { "MISMATCH" }
                );
            }
            out.push('\n');
        }
        out
    }
}

pub fn cost_report_on<G: Group>(group: G, protocols: &[Protocol]) -> CostReport {
    let mut rows = Vec::new();
    for &p in protocols {
        rows.push((count_sender_on(group.clone(), p), reference_row(p, Role::Sender)));
        rows.push((count_recipient_on(group.clone(), p), reference_row(p, Role::Recipient)));
    }
    let reference_only = SENDER_REFERENCE
        .iter()
        .chain(RECIPIENT_REFERENCE.iter())
        .filter(|r| !Protocol::ALL.iter().any(|p| p.name() == r.protocol))
        .copied()
        .collect();
    CostReport { rows, reference_only }
}

pub fn cost_report(protocols: &[Protocol]) -> CostReport {
    cost_report_on(P256Group, protocols)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseTiming {
    pub phase: Phase,
    pub median_ns: u128,
    pub p95_ns: u128,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingReport {
    pub protocol: Protocol,
    pub iterations: usize,
    pub phases: Vec<PhaseTiming>,
}

fn summarize(phase: Phase, mut samples: Vec<Duration>) -> PhaseTiming {
    samples.sort();
    let at = |p: f64| samples[((samples.len() - 1) as f64 * p).round() as usize].as_nanos();
    PhaseTiming {
        phase,
        median_ns: at(0.5),
        p95_ns: at(0.95),
    }
}

/// Wall-clock timing of key generation, encapsulation and decapsulation on
/// P-256. `iterations == 0` yields an empty report.
pub fn timing_bench(protocol: Protocol, iterations: usize) -> TimingReport {
    let mut report = TimingReport {
        protocol,
        iterations,
        phases: Vec::new(),
    };
    if iterations == 0 {
        return report;
    }
    let (params, msk) = setup(P256Group, &mut OsRng);
    let mk = |id: &[u8]| {
        let ppk = extract_partial_key(&msk, &params, id, &mut OsRng).expect("extraction");
        gen_full_keys(&params, &ppk, &mut OsRng).expect("assembly")
    };
    let (alice, bob) = (mk(b"drone"), mk(b"smart-object"));
    let alice_c = combine_public_key(&params, alice.public()).expect("combine");
    let bob_c = combine_public_key(&params, bob.public()).expect("combine");
    let clock = FixedClock(BENCH_TS);
    let (mut keygen, mut encap, mut decap) = (Vec::new(), Vec::new(), Vec::new());
    for _ in 0..iterations {
        match protocol {
            Protocol::Lsw => {
                let t = Instant::now();
                let (k, s) = lsw::symmetric_key_gen(&params, &alice, &bob_c, &mut OsRng).expect("keygen");
                keygen.push(t.elapsed());
                let t = Instant::now();
                let phi = s.encapsulate(&params, b"bench", &alice, &mut OsRng).expect("encap");
                encap.push(t.elapsed());
                let t = Instant::now();
                let got = lsw::decapsulate(&params, &phi, b"bench", &alice_c, &bob);
                decap.push(t.elapsed());
                assert_eq!(got, Ok(k));
            }
            Protocol::Dktuts => {
                let t = Instant::now();
                let (k, s) = dktuts::symmetric_key_gen(&params, &alice, &bob_c, &clock, &mut OsRng).expect("keygen");
                keygen.push(t.elapsed());
                let t = Instant::now();
                let phi = s.encapsulate(&params, b"bench", &alice, &mut OsRng).expect("encap");
                encap.push(t.elapsed());
                let t = Instant::now();
                let got = dktuts::decapsulate(&params, &phi, b"bench", alice.public(), &bob, &clock, Freshness::default());
                decap.push(t.elapsed());
                assert_eq!(got, Ok(k));
            }
        }
    }
    report.phases = vec![
        summarize(Phase::KeyGen, keygen),
        summarize(Phase::Encap, encap),
        summarize(Phase::Decap, decap),
    ];
    report
}
