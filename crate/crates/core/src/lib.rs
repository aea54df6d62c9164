//! Pairing-free certificateless signcryption tag-KEMs.
//!
//! Two one-pass key establishment protocols over any prime-order group:
//!
//! * [`lsw`]: LSW-CLSC-TKEM, a tag-KEM signed with a Schnorr-like
//!   certificateless signature;
//! * [`dktuts`]: DKTUTS-CLSC-TKEM, timestamped direct key transport.
//!
//! Both follow the same six-step shape: [`kgc::setup`],
//! [`kgc::extract_partial_key`], [`user_keys::gen_user_keys`], then
//! SymmetricKeyGen, Encapsulation and Decapsulation in the protocol
//! modules. [`hybrid`] composes either one with a DEM, and [`bench`]
//! counts the group and field operations each side performs.
//!
//! [`group::P256Group`] is the production backend. [`group::ToyGroup`] is
//! Z_q under addition; with a stubbed [`hash_suite::HashSuite`] every value
//! of a protocol run can be checked by hand (see [`vectors`]).

pub mod bench;
pub mod codec;
pub mod dktuts;
mod error;
pub mod group;
pub mod hash_suite;
pub mod hybrid;
pub mod kgc;
pub mod lsw;
pub mod rng;
pub mod user_keys;
pub mod vectors;

pub use error::{Error, Rejected, Result};
