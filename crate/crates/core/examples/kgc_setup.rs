//! KGC setup, extraction, client-side validation and key assembly on P-256.

use clsc_tkem::group::{Group, P256Group};
use clsc_tkem::kgc::{extract_partial_key, setup, validate_partial_key};
use clsc_tkem::user_keys::{combine_public_key, gen_full_keys};
use rand::rngs::OsRng;

fn main() -> clsc_tkem::Result<()> {
    let (params, msk) = setup(P256Group, &mut OsRng);
    let g = &params.group;
    println!("P_pub = {}", hex::encode(g.encode_element(&params.p_pub)));

    let ppk = extract_partial_key(&msk, &params, b"sensor-0001", &mut OsRng)?;
    println!("R     = {}", hex::encode(g.encode_element(&ppk.r_point)));
    println!("partial key valid: {}", validate_partial_key(&params, &ppk));

    let sk = gen_full_keys(&params, &ppk, &mut OsRng)?;
    println!("P_E   = {}", hex::encode(g.encode_element(&sk.public().p_e)));

    // Senders cache this per peer; it equals (d + x)·P.
    let y = combine_public_key(&params, sk.public())?;
    let dx = g.scalar_add(sk.partial_key(), sk.secret_value());
    assert_eq!(y.combined, g.point_mul(&dx, &g.generator()));
    println!("Y     = {}", hex::encode(g.encode_element(&y.combined)));
    Ok(())
}
