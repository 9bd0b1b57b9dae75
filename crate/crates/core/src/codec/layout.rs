use super::{binary, ceil_log2, Codebook};
use crate::registry::Registry;
use crate::{Error, Result};

/// Placement of codeword bits in the per-site memory.
///
/// Names returned here are local to a site; the same name at every site forms
/// one nonlocal register that is parity-checked during decode.
pub trait Layout: Send + Sync + std::fmt::Debug {
    fn name(&self) -> &'static str;

    fn memory_qubits_per_site(&self, book: &Codebook) -> usize;

    /// Every memory qubit of a site, in canonical order.
    fn memory_names(&self, book: &Codebook) -> Vec<String>;

    /// Memory qubits flipped by a photon in bin `m`, band `r`.
    fn written(&self, book: &Codebook, m: usize, r: usize) -> Result<Vec<String>>;

    /// Registers read first during decode, MSB first.
    fn frequency_registers(&self, book: &Codebook) -> Vec<String>;

    /// Band implied by the frequency-register parities; `None` means no photon.
    fn band_from_parities(&self, book: &Codebook, odd: &[bool]) -> Result<Option<usize>>;

    /// Time registers of `band`, MSB first.
    fn time_registers(&self, book: &Codebook, band: usize) -> Vec<String>;

    /// Whether frequency flags must be compressed before decoding.
    fn needs_compression(&self) -> bool {
        false
    }

    fn clone_box(&self) -> Box<dyn Layout>;
}

impl Clone for Box<dyn Layout> {
    fn clone(&self) -> Self {
        self.clone_box()
    }
}

fn ones(word: &str, names: impl Fn(usize) -> String) -> Vec<String> {
    word.chars()
        .enumerate()
        .filter(|(_, c)| *c == '1')
        .map(|(i, _)| names(i))
        .collect()
}

fn bits_value(odd: &[bool]) -> usize {
    odd.iter().fold(0, |acc, &b| acc * 2 + b as usize)
}

/// One codeword per site: time field followed by frequency field.
#[derive(Clone, Copy, Debug, Default)]
pub struct Sequential;

impl Layout for Sequential {
    fn name(&self) -> &'static str {
        "sequential"
    }

    fn memory_qubits_per_site(&self, book: &Codebook) -> usize {
        book.word_len()
    }

    fn memory_names(&self, book: &Codebook) -> Vec<String> {
        (0..book.t_bits)
            .map(|k| format!("t{k}"))
            .chain((0..book.f_bits).map(|k| format!("f{k}")))
            .collect()
    }

    fn written(&self, book: &Codebook, m: usize, r: usize) -> Result<Vec<String>> {
        let word = book.codeword(m, r)?;
        Ok(ones(&word, |i| {
            if i < book.t_bits {
                format!("t{i}")
            } else {
                format!("f{}", i - book.t_bits)
            }
        }))
    }

    fn frequency_registers(&self, book: &Codebook) -> Vec<String> {
        (0..book.f_bits).map(|k| format!("f{k}")).collect()
    }

    fn band_from_parities(&self, book: &Codebook, odd: &[bool]) -> Result<Option<usize>> {
        let r = bits_value(odd) + 1;
        if r > book.r {
            return Err(Error::ProtocolMisuse(format!("frequency field decodes to band {r}")));
        }
        // vacuum shares the all-zero frequency field; the time field settles it
        Ok(Some(r))
    }

    fn time_registers(&self, book: &Codebook, _band: usize) -> Vec<String> {
        (0..book.t_bits).map(|k| format!("t{k}")).collect()
    }

    fn clone_box(&self) -> Box<dyn Layout> {
        Box::new(*self)
    }
}

/// One time register and one flag per band, with flags later compressed
/// into ceil(log2(R+1)) qubits holding the band index.
#[derive(Clone, Copy, Debug, Default)]
pub struct Parallel;

impl Parallel {
    pub fn compressed_bits(book: &Codebook) -> usize {
        ceil_log2(book.r + 1)
    }

    pub fn flag(r: usize) -> String {
        format!("r{r}flag")
    }

    /// Compressed-register qubits set for band `r` (binary of r, MSB first).
    pub fn compressed_written(book: &Codebook, r: usize) -> Vec<String> {
        ones(&binary(r, Self::compressed_bits(book)), |i| format!("c{i}"))
    }
}

impl Layout for Parallel {
    fn name(&self) -> &'static str {
        "parallel"
    }

    fn memory_qubits_per_site(&self, book: &Codebook) -> usize {
        book.r * book.t_bits + book.r + Self::compressed_bits(book)
    }

    fn memory_names(&self, book: &Codebook) -> Vec<String> {
        let mut out = Vec::new();
        for r in 1..=book.r {
            out.extend((0..book.t_bits).map(|k| format!("r{r}t{k}")));
            out.push(Self::flag(r));
        }
        out.extend((0..Self::compressed_bits(book)).map(|k| format!("c{k}")));
        out
    }

    fn written(&self, book: &Codebook, m: usize, r: usize) -> Result<Vec<String>> {
        book.codeword(m, r)?;
        let mut out = ones(&binary(m, book.t_bits), |i| format!("r{r}t{i}"));
        out.push(Self::flag(r));
        Ok(out)
    }

    fn frequency_registers(&self, book: &Codebook) -> Vec<String> {
        (0..Self::compressed_bits(book)).map(|k| format!("c{k}")).collect()
    }

    fn band_from_parities(&self, book: &Codebook, odd: &[bool]) -> Result<Option<usize>> {
        match bits_value(odd) {
            0 => Ok(None),
            r if r <= book.r => Ok(Some(r)),
            r => Err(Error::ProtocolMisuse(format!("compressed register decodes to band {r}"))),
        }
    }

    fn time_registers(&self, book: &Codebook, band: usize) -> Vec<String> {
        (0..book.t_bits).map(|k| format!("r{band}t{k}")).collect()
    }

    fn needs_compression(&self) -> bool {
        true
    }

    fn clone_box(&self) -> Box<dyn Layout> {
        Box::new(*self)
    }
}

/// All memory layouts by name.
pub fn layouts() -> Registry<dyn Layout> {
    let seq: Box<dyn Layout> = Box::new(Sequential);
    let par: Box<dyn Layout> = Box::new(Parallel);
    Registry::new("layout").with("sequential", seq).with("parallel", par)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sequential_counts() {
        let b = Codebook::new(5, 2).unwrap();
        assert_eq!(Sequential.memory_qubits_per_site(&b), 4);
        assert_eq!(Sequential.written(&b, 5, 2).unwrap(), vec!["t0", "t2", "f0"]);
    }

    #[test]
    fn parallel_counts_and_compression() {
        let b = Codebook::new(16, 4).unwrap();
        assert_eq!(Parallel.memory_qubits_per_site(&b), 4 * 5 + 4 + 3);
        assert_eq!(Parallel.memory_names(&b).len(), Parallel.memory_qubits_per_site(&b));
        let b2 = Codebook::new(3, 2).unwrap();
        assert_eq!(Parallel::compressed_written(&b2, 2), vec!["c0"]); // "10"
        let b3 = Codebook::new(3, 3).unwrap();
        assert_eq!(Parallel::compressed_written(&b3, 1), vec!["c1"]); // "01"
        assert_eq!(Parallel.band_from_parities(&b3, &[false, false]).unwrap(), None);
        assert!(Parallel.band_from_parities(&b2, &[true, true]).is_err());
    }

    #[test]
    fn registry_lookup() {
        let reg = layouts();
        assert_eq!(reg.names(), vec!["parallel", "sequential"]);
        assert_eq!(reg.get("parallel").unwrap().name(), "parallel");
        assert!(matches!(reg.get("zigzag"), Err(Error::UnknownStrategy { .. })));
    }
}
