//! A byte-tape random source for reproducing worked examples.

use rand::{CryptoRng, RngCore};

/// Replays a fixed byte string as randomness and panics when it runs dry.
///
/// Scalars on the toy backend are drawn as one 8-byte big-endian word, so a
/// tape of `3u64.to_be_bytes()` makes the next sampled scalar 3. On P-256 a
/// scalar takes 32 big-endian bytes.
///
/// Not random. Only for vectors and tests.
#[derive(Debug, Clone)]
pub struct TapeRng {
    tape: Vec<u8>,
    pos: usize,
}

impl TapeRng {
    pub fn new(tape: impl Into<Vec<u8>>) -> Self {
        TapeRng {
            tape: tape.into(),
            pos: 0,
        }
    }

    /// A tape of toy scalars, each as an 8-byte big-endian word.
    pub fn from_toy_scalars(values: &[u64]) -> Self {
        Self::new(values.iter().flat_map(|v| v.to_be_bytes()).collect::<Vec<_>>())
    }

    pub fn remaining(&self) -> usize {
        self.tape.len() - self.pos
    }
}

impl RngCore for TapeRng {
    fn next_u32(&mut self) -> u32 {
        let mut b = [0u8; 4];
        self.fill_bytes(&mut b);
        u32::from_be_bytes(b)
    }

    fn next_u64(&mut self) -> u64 {
        let mut b = [0u8; 8];
        self.fill_bytes(&mut b);
        u64::from_be_bytes(b)
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        let end = self.pos + dest.len();
        assert!(end <= self.tape.len(), "randomness tape exhausted");
        dest.copy_from_slice(&self.tape[self.pos..end]);
        self.pos = end;
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> Result<(), rand::Error> {
        self.fill_bytes(dest);
        Ok(())
    }
}

impl CryptoRng for TapeRng {}
