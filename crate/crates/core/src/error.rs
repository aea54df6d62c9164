use thiserror::Error;

/// Errors surfaced by key management, encoding, and the sending side of
/// both protocols.
///
/// Decapsulation never returns this type; it collapses every failure into
/// [`Rejected`].
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("attempted to invert the zero scalar")]
    ZeroInversion,
    #[error("unsupported parameter: {0}")]
    UnsupportedParameter(String),
    #[error("symmetric decryption failed")]
    DecryptFailure,
    #[error("invalid encoding: {0}")]
    InvalidEncoding(&'static str),
    #[error("stub hash table has no entry for this {0} input")]
    StubMiss(&'static str),
    #[error("degenerate denominator in signing equation")]
    DegenerateDenominator,
    #[error("degenerate key material: {0}")]
    DegenerateKey(&'static str),
    #[error("partial private key failed validation")]
    KeyValidation,
    #[error("key or state does not belong to the expected identity")]
    IdentityMismatch,
    #[error("identity must be non-empty")]
    EmptyIdentity,
    #[error("backend mismatch: expected {expected}, found {found}")]
    BackendMismatch { expected: String, found: String },
}

/// The opaque rejection symbol returned by decapsulation.
///
/// Carries no failure cause.
#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
#[error("invalid encapsulation")]
pub struct Rejected;

pub type Result<T, E = Error> = std::result::Result<T, E>;
