//! The Z_13 worked example, step by step, with every value printed.
//!
//! The group is Z_13 under addition with generator 1, so "points" and
//! scalars are both small integers and each line can be checked by hand.
//! Hash outputs come from the stub table in the shipped vector file.

use clsc_tkem::group::{Group, ToyGroup};
use clsc_tkem::kgc::{extract_partial_key_with, master_key_from_scalar};
use clsc_tkem::lsw;
use clsc_tkem::user_keys::{combine_public_key, FullPrivateKey};
use clsc_tkem::vectors::{generate_toy_vector, toy, toy_params_with_stub};
use clsc_tkem::hybrid::Protocol;

fn main() -> clsc_tkem::Result<()> {
    let file = generate_toy_vector(Protocol::Lsw)?;
    let params = toy_params_with_stub(&file)?;
    let g: &ToyGroup = &params.group;
    let v = |s: &<ToyGroup as Group>::Scalar| s.value();
    let e = |p: &<ToyGroup as Group>::Element| p.value();

    let msk = master_key_from_scalar(&params, g.scalar(toy::X_MSK))?;
    println!("x_msk = {}, P_pub = {}", toy::X_MSK, e(&params.p_pub));
    let ppk_a = extract_partial_key_with(&msk, &params, toy::SENDER.as_bytes(), g.scalar(toy::R_A))?;
    let ppk_b = extract_partial_key_with(&msk, &params, toy::RECEIVER.as_bytes(), g.scalar(toy::R_B))?;
    println!("A: R_A = {}, d_A = {}", e(&ppk_a.r_point), v(&ppk_a.d));
    println!("B: R_B = {}, d_B = {}", e(&ppk_b.r_point), v(&ppk_b.d));
    let alice = FullPrivateKey::assemble(&params, &ppk_a, g.scalar(toy::X_A))?;
    let bob = FullPrivateKey::assemble(&params, &ppk_b, g.scalar(toy::X_B))?;
    let alice_y = combine_public_key(&params, alice.public())?;
    let bob_y = combine_public_key(&params, bob.public())?;
    println!("P_A = {}, P_B = {}, Y_B = {}", e(&alice.public().p_e), e(&bob.public().p_e), e(&bob_y.combined));

    let (k, session) = lsw::symmetric_key_gen_with(&params, &alice, &bob_y, g.scalar(toy::LSW_U))?;
    println!("u = {}: U = {}, X = {}", toy::LSW_U, e(session.u_point()), e(session.x_point()));
    let phi = session.encapsulate_with(&params, toy::TAG, &alice, g.scalar(toy::LSW_A))?;
    println!("a = {}: Q = {}, h = {}, s = {}", toy::LSW_A, e(&phi.q_point), v(&phi.h), v(&phi.s));

    let got = lsw::decapsulate(&params, &phi, toy::TAG, &alice_y, &bob).expect("toy run verifies");
    assert_eq!(got, k);
    println!("K = {}", String::from_utf8_lossy(k.as_bytes()));
    Ok(())
}
