//! One LSW-CLSC-TKEM exchange, plus what a forged tag does to it.

use clsc_tkem::group::P256Group;
use clsc_tkem::kgc::{extract_partial_key, setup};
use clsc_tkem::lsw;
use clsc_tkem::user_keys::{combine_public_key, gen_full_keys};
use rand::rngs::OsRng;

fn main() -> clsc_tkem::Result<()> {
    let (params, msk) = setup(P256Group, &mut OsRng);
    let keys = |id: &[u8]| -> clsc_tkem::Result<_> {
        let ppk = extract_partial_key(&msk, &params, id, &mut OsRng)?;
        gen_full_keys(&params, &ppk, &mut OsRng)
    };
    let (alice, bob) = (keys(b"alice")?, keys(b"bob")?);
    let alice_y = combine_public_key(&params, alice.public())?;
    let bob_y = combine_public_key(&params, bob.public())?;

    let (k, session) = lsw::symmetric_key_gen(&params, &alice, &bob_y, &mut OsRng)?;
    let tag = b"firmware manifest v7";
    let phi = session.encapsulate(&params, tag, &alice, &mut OsRng)?;
    println!("sender K    {}", hex::encode(k.as_bytes()));

    let got = lsw::decapsulate(&params, &phi, tag, &alice_y, &bob).expect("honest run");
    println!("recipient K {}", hex::encode(got.as_bytes()));

    let forged = lsw::decapsulate(&params, &phi, b"firmware manifest v8", &alice_y, &bob);
    println!("other tag:  {}", if forged.is_err() { "rejected" } else { "accepted" });
    Ok(())
}
