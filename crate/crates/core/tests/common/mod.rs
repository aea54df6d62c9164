#![allow(dead_code)]

use clsc_tkem::group::{Group, ToyGroup};
use clsc_tkem::kgc::{extract_partial_key, extract_partial_key_with, master_key_from_scalar, setup, MasterKey, SystemParams};
use clsc_tkem::user_keys::{combine_public_key, gen_full_keys, CombinedPublicKey, FullPrivateKey};
use clsc_tkem::vectors::{self, TestVectorFile};
use rand::{CryptoRng, RngCore};

pub struct World<G: Group> {
    pub params: SystemParams<G>,
    pub msk: MasterKey<G>,
    pub alice: FullPrivateKey<G>,
    pub bob: FullPrivateKey<G>,
    pub alice_c: CombinedPublicKey<G>,
    pub bob_c: CombinedPublicKey<G>,
}

pub fn world<G: Group, R: RngCore + CryptoRng>(group: G, rng: &mut R) -> World<G> {
    let (params, msk) = setup(group, rng);
    let alice = {
        let ppk = extract_partial_key(&msk, &params, b"drone-17", rng).unwrap();
        gen_full_keys(&params, &ppk, rng).unwrap()
    };
    let bob = {
        let ppk = extract_partial_key(&msk, &params, b"smart-meter-4", rng).unwrap();
        gen_full_keys(&params, &ppk, rng).unwrap()
    };
    finish(params, msk, alice, bob)
}

fn finish<G: Group>(params: SystemParams<G>, msk: MasterKey<G>, alice: FullPrivateKey<G>, bob: FullPrivateKey<G>) -> World<G> {
    let alice_c = combine_public_key(&params, alice.public()).unwrap();
    let bob_c = combine_public_key(&params, bob.public()).unwrap();
    World {
        params,
        msk,
        alice,
        bob,
        alice_c,
        bob_c,
    }
}

pub fn load_vector(name: &str) -> TestVectorFile {
    let path = format!("{}/vectors/{name}", env!("CARGO_MANIFEST_DIR"));
    TestVectorFile::from_json(&std::fs::read_to_string(path).unwrap()).unwrap()
}

pub fn toy_input(file: &TestVectorFile, g: &ToyGroup, name: &str) -> <ToyGroup as Group>::Scalar {
    g.decode_scalar(&hex::decode(&file.inputs[name]).unwrap()).unwrap()
}

/// The key material of a toy vector, with its stub hash table installed.
pub fn vector_world(file: &TestVectorFile) -> World<ToyGroup> {
    let params = vectors::toy_params_with_stub(file).unwrap();
    let g = params.group;
    let msk = master_key_from_scalar(&params, toy_input(file, &g, "x_msk")).unwrap();
    let mk = |id: &str, r: &str, x: &str| {
        let ppk = extract_partial_key_with(&msk, &params, id.as_bytes(), toy_input(file, &g, r)).unwrap();
        FullPrivateKey::assemble(&params, &ppk, toy_input(file, &g, x)).unwrap()
    };
    let alice = mk(&file.sender_id, "r_a", "x_a");
    let bob = mk(&file.receiver_id, "r_b", "x_b");
    finish(params, msk, alice, bob)
}

/// Every single-field mutation of a byte string that keeps it distinct:
/// a low-bit flip at each position, truncation by one, truncation to
/// empty and a one-byte extension.
pub fn byte_mutations(b: &[u8]) -> Vec<Vec<u8>> {
    let mut out = Vec::new();
    for i in 0..b.len() {
        let mut m = b.to_vec();
        m[i] ^= 0x01;
        out.push(m);
    }
    if !b.is_empty() {
        out.push(b[..b.len() - 1].to_vec());
        if b.len() > 1 {
            out.push(Vec::new());
        }
    }
    let mut ext = b.to_vec();
    ext.push(0);
    out.push(ext);
    out
}
