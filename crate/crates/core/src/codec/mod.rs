//! Binary time/frequency codebook, memory layouts and the encoding pipeline
//! that writes an arriving photon into the site memories.

mod encode;
mod layout;

pub use encode::{encode_bin, encode_photon, memory_label, encode_run_full, parallel_frequency_compress, EncodeRun, PhotonSource};
pub use layout::{layouts, Layout, Parallel, Sequential};

use crate::{Error, Result};

/// ceil(log2(x)) for x >= 1.
pub fn ceil_log2(x: usize) -> usize {
    assert!(x >= 1);
    (usize::BITS - (x - 1).leading_zeros()) as usize
}

/// MSB-first binary of `value` over `width` bits.
pub fn binary(value: usize, width: usize) -> String {
    (0..width)
        .rev()
        .map(|b| if (value >> b) & 1 == 1 { '1' } else { '0' })
        .collect()
}

/// Codeword sizes for M time bins and R frequency bands.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Codebook {
    pub m: usize,
    pub r: usize,
    pub t_bits: usize,
    pub f_bits: usize,
}

impl Codebook {
    pub fn new(m: usize, r: usize) -> Result<Self> {
        if m < 1 || r < 1 {
            return Err(Error::param("M and R must be at least 1"));
        }
        Ok(Self {
            m,
            r,
            t_bits: ceil_log2(m + 1),
            f_bits: ceil_log2(r),
        })
    }

    fn check(&self, m: usize, r: usize) -> Result<()> {
        if m < 1 || m > self.m {
            return Err(Error::param(format!("time bin {m} outside 1..={}", self.m)));
        }
        if r < 1 || r > self.r {
            return Err(Error::param(format!("band {r} outside 1..={}", self.r)));
        }
        Ok(())
    }

    pub fn word_len(&self) -> usize {
        self.t_bits + self.f_bits
    }

    /// binary(m) over t_bits followed by binary(r - 1) over f_bits.
    pub fn codeword(&self, m: usize, r: usize) -> Result<String> {
        self.check(m, r)?;
        Ok(format!("{}{}", binary(m, self.t_bits), binary(r - 1, self.f_bits)))
    }

    pub fn vacuum(&self) -> String {
        "0".repeat(self.word_len())
    }

    /// Inverse of [`Codebook::codeword`]; `None` for the vacuum word.
    pub fn decode_word(&self, word: &str) -> Result<Option<(usize, usize)>> {
        if word.len() != self.word_len() || word.chars().any(|c| c != '0' && c != '1') {
            return Err(Error::param(format!("`{word}` is not a {}-bit word", self.word_len())));
        }
        let parse = |s: &str| if s.is_empty() { 0 } else { usize::from_str_radix(s, 2).unwrap() };
        let m = parse(&word[..self.t_bits]);
        let f = parse(&word[self.t_bits..]);
        if m == 0 {
            if f != 0 {
                return Err(Error::param(format!("`{word}` has a band but no time bin")));
            }
            return Ok(None);
        }
        self.check(m, f + 1)?;
        Ok(Some((m, f + 1)))
    }
}

/// Structural resource counters.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ResourceLedger {
    pub memory_qubits_per_site: usize,
    pub bell_pairs: usize,
    pub ghz_states: usize,
    pub w_states: usize,
    /// Receiving qubits per site, reset and reused every bin.
    pub ancilla_qubits: usize,
}

impl ResourceLedger {
    /// Counts one shared resource among `parties` sites (a Bell pair when two).
    pub fn add_entangled(&mut self, parties: usize) {
        if parties == 2 {
            self.bell_pairs += 1;
        } else {
            self.ghz_states += 1;
        }
    }

    /// Parity-check resources of either kind.
    pub fn parity_resources(&self) -> usize {
        self.bell_pairs + self.ghz_states
    }

    pub fn merge(&mut self, other: &ResourceLedger) {
        self.memory_qubits_per_site = self.memory_qubits_per_site.max(other.memory_qubits_per_site);
        self.ancilla_qubits = self.ancilla_qubits.max(other.ancilla_qubits);
        self.bell_pairs += other.bell_pairs;
        self.ghz_states += other.ghz_states;
        self.w_states += other.w_states;
    }
}
