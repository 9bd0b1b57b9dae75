use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModeKind {
    Qubit,
    /// Bosonic mode holding 0..=cutoff photons.
    Fock { cutoff: usize },
}

impl ModeKind {
    pub fn dim(self) -> usize {
        match self {
            ModeKind::Qubit => 2,
            ModeKind::Fock { cutoff } => cutoff + 1,
        }
    }

    pub fn is_fock(self) -> bool {
        matches!(self, ModeKind::Fock { .. })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mode {
    pub label: String,
    pub kind: ModeKind,
}

/// Ordered list of uniquely labeled modes.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ModeRegistry {
    modes: Vec<Mode>,
}

impl ModeRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn qubits<S: AsRef<str>>(labels: &[S]) -> Result<Self> {
        let mut reg = Self::new();
        for l in labels {
            reg.push(l.as_ref(), ModeKind::Qubit)?;
        }
        Ok(reg)
    }

    pub fn with_qubit(mut self, label: &str) -> Result<Self> {
        self.push(label, ModeKind::Qubit)?;
        Ok(self)
    }

    pub fn with_fock(mut self, label: &str, cutoff: usize) -> Result<Self> {
        self.push(label, ModeKind::Fock { cutoff })?;
        Ok(self)
    }

    pub fn push(&mut self, label: &str, kind: ModeKind) -> Result<()> {
        if let ModeKind::Fock { cutoff } = kind {
            if cutoff < 1 {
                return Err(Error::param(format!("fock cutoff of `{label}` must be >= 1")));
            }
        }
        if self.contains(label) {
            return Err(Error::DuplicateLabel(label.to_string()));
        }
        self.modes.push(Mode {
            label: label.to_string(),
            kind,
        });
        Ok(())
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn contains(&self, label: &str) -> bool {
        self.modes.iter().any(|m| m.label == label)
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.modes
            .iter()
            .position(|m| m.label == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn indices_of<S: AsRef<str>>(&self, labels: &[S]) -> Result<Vec<usize>> {
        let idx = labels
            .iter()
            .map(|l| self.index_of(l.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        for (k, i) in idx.iter().enumerate() {
            if idx[..k].contains(i) {
                return Err(Error::DuplicateLabel(self.modes[*i].label.clone()));
            }
        }
        Ok(idx)
    }

    pub fn mode(&self, label: &str) -> Result<&Mode> {
        Ok(&self.modes[self.index_of(label)?])
    }

    pub fn dims(&self) -> Vec<usize> {
        self.modes.iter().map(|m| m.kind.dim()).collect()
    }

    /// Total dimension (1 for the empty registry).
    pub fn dim(&self) -> usize {
        self.modes.iter().map(|m| m.kind.dim()).product()
    }

    pub fn labels(&self) -> Vec<&str> {
        self.modes.iter().map(|m| m.label.as_str()).collect()
    }

    pub fn digits(&self, mut index: usize) -> Vec<usize> {
        let dims = self.dims();
        let mut out = vec![0; dims.len()];
        for (k, d) in dims.iter().enumerate().rev() {
            out[k] = index % d;
            index /= d;
        }
        out
    }

    pub fn index(&self, digits: &[usize]) -> usize {
        self.modes
            .iter()
            .zip(digits)
            .fold(0, |acc, (m, d)| acc * m.kind.dim() + d)
    }

    /// Parses a basis label: one character per mode (`"0110"`), or
    /// comma-separated occupations (`"3,0,1"`) when any mode needs more than one digit.
    pub fn parse_basis(&self, label: &str) -> Result<usize> {
        let bad = |reason: &str| Error::BadBasisLabel {
            label: label.to_string(),
            reason: reason.to_string(),
        };
        let parts: Vec<&str> = if label.contains(',') {
            label.split(',').map(str::trim).collect()
        } else {
            label
                .char_indices()
                .map(|(i, ch)| &label[i..i + ch.len_utf8()])
                .collect()
        };
        if parts.len() != self.len() {
            return Err(bad(&format!("expected {} digits, found {}", self.len(), parts.len())));
        }
        let mut digits = Vec::with_capacity(parts.len());
        for (p, m) in parts.iter().zip(&self.modes) {
            let v: usize = p.parse().map_err(|_| bad("non-numeric digit"))?;
            if v >= m.kind.dim() {
                return Err(bad(&format!("digit {v} out of range for mode `{}`", m.label)));
            }
            digits.push(v);
        }
        Ok(self.index(&digits))
    }

    /// Concatenation; labels must stay unique.
    pub fn concat(&self, other: &ModeRegistry) -> Result<Self> {
        let mut out = self.clone();
        for m in &other.modes {
            out.push(&m.label, m.kind)?;
        }
        Ok(out)
    }

    /// Registry of the given modes, kept in this registry's order.
    pub fn restrict(&self, keep: &[usize]) -> Self {
        Self {
            modes: self
                .modes
                .iter()
                .enumerate()
                .filter(|(i, _)| keep.contains(i))
                .map(|(_, m)| m.clone())
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dims_and_indexing() {
        let reg = ModeRegistry::new()
            .with_qubit("q")
            .unwrap()
            .with_fock("a", 3)
            .unwrap();
        assert_eq!(reg.dim(), 8);
        assert_eq!(reg.parse_basis("12").unwrap(), 6);
        assert_eq!(reg.parse_basis("1,2").unwrap(), 6);
        assert_eq!(reg.digits(6), vec![1, 2]);
        assert!(reg.parse_basis("14").is_err());
        assert!(reg.parse_basis("1").is_err());
    }

    #[test]
    fn rejects_duplicates_and_zero_cutoff() {
        let reg = ModeRegistry::qubits(&["a"]).unwrap();
        assert!(matches!(reg.with_qubit("a"), Err(Error::DuplicateLabel(_))));
        assert!(ModeRegistry::new().with_fock("f", 0).is_err());
    }
}
