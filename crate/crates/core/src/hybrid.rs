//! One-pass signcryption of whole messages: either tag-KEM produces K, the
//! message is encrypted under a key derived from K, and that ciphertext is
//! the tag the encapsulation signs.

use rand::{CryptoRng, RngCore};
use serde::{Deserialize, Serialize};

use crate::dktuts::{self, Clock, DktutsEncapsulation, Freshness};
use crate::error::{Rejected, Result};
use crate::group::Group;
use crate::hash_suite::{sym_decrypt, sym_encrypt};
use crate::kgc::SystemParams;
use crate::lsw::{self, LswEncapsulation};
use crate::user_keys::{CombinedPublicKey, FullPrivateKey};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Protocol {
    Lsw,
    Dktuts,
}

impl Protocol {
    pub const ALL: [Protocol; 2] = [Protocol::Lsw, Protocol::Dktuts];

    pub fn name(self) -> &'static str {
        match self {
            Protocol::Lsw => "LSW-CLSC-TKEM",
            Protocol::Dktuts => "DKTUTS-CLSC-TKEM",
        }
    }

    pub fn wire_id(self) -> u8 {
        match self {
            Protocol::Lsw => 0x01,
            Protocol::Dktuts => 0x02,
        }
    }

    pub fn from_wire_id(id: u8) -> Option<Self> {
        match id {
            0x01 => Some(Protocol::Lsw),
            0x02 => Some(Protocol::Dktuts),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Encapsulation<G: Group> {
    Lsw(LswEncapsulation<G>),
    Dktuts(DktutsEncapsulation<G>),
}

impl<G: Group> Encapsulation<G> {
    pub fn protocol(&self) -> Protocol {
        match self {
            Encapsulation::Lsw(_) => Protocol::Lsw,
            Encapsulation::Dktuts(_) => Protocol::Dktuts,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SigncryptedMessage<G: Group> {
    pub encapsulation: Encapsulation<G>,
    pub dem_ciphertext: Vec<u8>,
}

impl<G: Group> SigncryptedMessage<G> {
    pub fn protocol(&self) -> Protocol {
        self.encapsulation.protocol()
    }
}

/// `clock` stamps DKTUTS sessions and is ignored for LSW.
#[allow(clippy::too_many_arguments)]
pub fn signcrypt<G: Group, C: Clock + ?Sized, R: RngCore + CryptoRng + ?Sized>(
    params: &SystemParams<G>,
    protocol: Protocol,
    message: &[u8],
    sender: &FullPrivateKey<G>,
    receiver: &CombinedPublicKey<G>,
    clock: &C,
    rng: &mut R,
) -> Result<SigncryptedMessage<G>> {
    match protocol {
        Protocol::Lsw => {
            let (k, session) = lsw::symmetric_key_gen(params, sender, receiver, rng)?;
            let dem_ciphertext = sym_encrypt(&params.suite.dem_key(&k)?, message);
            let phi = session.encapsulate(params, &dem_ciphertext, sender, rng)?;
            Ok(SigncryptedMessage {
                encapsulation: Encapsulation::Lsw(phi),
                dem_ciphertext,
            })
        }
        Protocol::Dktuts => {
            let (k, session) = dktuts::symmetric_key_gen(params, sender, receiver, clock, rng)?;
            let dem_ciphertext = sym_encrypt(&params.suite.dem_key(&k)?, message);
            let phi = session.encapsulate(params, &dem_ciphertext, sender, rng)?;
            Ok(SigncryptedMessage {
                encapsulation: Encapsulation::Dktuts(phi),
                dem_ciphertext,
            })
        }
    }
}

pub fn unsigncrypt<G: Group, C: Clock + ?Sized>(
    params: &SystemParams<G>,
    sc: &SigncryptedMessage<G>,
    sender: &CombinedPublicKey<G>,
    receiver: &FullPrivateKey<G>,
    clock: &C,
    freshness: Freshness,
) -> Result<Vec<u8>, Rejected> {
    let tag = &sc.dem_ciphertext;
    let k = match &sc.encapsulation {
        Encapsulation::Lsw(phi) => lsw::decapsulate(params, phi, tag, sender, receiver)?,
        Encapsulation::Dktuts(phi) => {
            dktuts::decapsulate(params, phi, tag, &sender.public, receiver, clock, freshness)?
        }
    };
    let dem_key = params.suite.dem_key(&k).map_err(|_| Rejected)?;
    sym_decrypt(&dem_key, tag).map_err(|_| Rejected)
}
