//! Signcrypting a message: the DEM ciphertext is the tag of the KEM.

use clsc_tkem::dktuts::{Freshness, SystemClock};
use clsc_tkem::group::P256Group;
use clsc_tkem::hybrid::{signcrypt, unsigncrypt, Protocol};
use clsc_tkem::kgc::{extract_partial_key, setup};
use clsc_tkem::user_keys::{combine_public_key, gen_full_keys};
use clsc_tkem::codec;
use rand::rngs::OsRng;

fn main() -> clsc_tkem::Result<()> {
    let (params, msk) = setup(P256Group, &mut OsRng);
    let keys = |id: &[u8]| -> clsc_tkem::Result<_> {
        let ppk = extract_partial_key(&msk, &params, id, &mut OsRng)?;
        gen_full_keys(&params, &ppk, &mut OsRng)
    };
    let (alice, bob) = (keys(b"meter-88")?, keys(b"utility")?);
    let alice_y = combine_public_key(&params, alice.public())?;
    let bob_y = combine_public_key(&params, bob.public())?;

    let msg = b"2026-10-16T09:00Z kWh=1432.7";
    for protocol in Protocol::ALL {
        let sc = signcrypt(&params, protocol, msg, &alice, &bob_y, &SystemClock, &mut OsRng)?;
        let wire = codec::encode_signcrypted(&params.group, &sc);
        let back = codec::decode_signcrypted(&params.group, &wire)?;
        let opened = unsigncrypt(&params, &back, &alice_y, &bob, &SystemClock, Freshness::default());
        println!(
            "{:<17} {} bytes on the wire, opened: {:?}",
            protocol.name(),
            wire.len(),
            opened.map(|m| String::from_utf8_lossy(&m).into_owned())
        );
    }
    Ok(())
}
