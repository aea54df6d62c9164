//! DKTUTS-CLSC-TKEM with an injected clock: accepted while fresh, rejected
//! once the timestamp falls out of the window, and caught on replay.

use clsc_tkem::dktuts::{self, FixedClock, Freshness, ReplayCache, Timestamp};
use clsc_tkem::group::P256Group;
use clsc_tkem::kgc::{extract_partial_key, setup};
use clsc_tkem::user_keys::{combine_public_key, gen_full_keys};
use rand::rngs::OsRng;

fn main() -> clsc_tkem::Result<()> {
    let (params, msk) = setup(P256Group, &mut OsRng);
    let keys = |id: &[u8]| -> clsc_tkem::Result<_> {
        let ppk = extract_partial_key(&msk, &params, id, &mut OsRng)?;
        gen_full_keys(&params, &ppk, &mut OsRng)
    };
    let (alice, bob) = (keys(b"uav-3")?, keys(b"ground-station")?);
    let bob_y = combine_public_key(&params, bob.public())?;

    let sent_at = Timestamp(1_750_000_000);
    let (k, session) = dktuts::symmetric_key_gen(&params, &alice, &bob_y, &FixedClock(sent_at), &mut OsRng)?;
    let tag = b"waypoint batch 12";
    let phi = session.encapsulate(&params, tag, &alice, &mut OsRng)?;

    let freshness = Freshness::default();
    for delay in [0, 60, 120, 121, 600] {
        let clock = FixedClock(Timestamp(sent_at.0 + delay));
        let r = dktuts::decapsulate(&params, &phi, tag, alice.public(), &bob, &clock, freshness);
        println!("received after {delay:>3} s: {}", if r == Ok(k) { "K recovered" } else { "rejected" });
    }

    let mut cache = ReplayCache::new();
    let clock = FixedClock(Timestamp(sent_at.0 + 5));
    for attempt in 1..=2 {
        let r = dktuts::decapsulate_once(&params, &phi, tag, alice.public(), &bob, &clock, freshness, &mut cache);
        println!("delivery {attempt} with replay cache: {}", if r.is_ok() { "accepted" } else { "rejected" });
    }
    Ok(())
}
