//! Per-site detector statistics.
//!
//! A site holds a memory entangled with the stellar mode, (|0>|0bar> + |1>|1bar>)/sqrt2,
//! mixes the stellar mode with ancilla light and counts photons. For every
//! count pattern n only three numbers matter downstream:
//! w0 = sum |c0|^2, w1 = sum |c1|^2 and coh = sum c1 c0*, summed over any
//! unobserved (lost) photon numbers.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::qcore::{
    beam_splitter, coherent_amplitudes, coherent_state, linear_optics, lossy_detector, measure_all,
    min_coherent_cutoff, qft_matrix, Basis, CMatrix, CVector, MeasurementBranch, ModeRegistry,
    QuantumState,
};
use crate::{Error, Result, C64};

/// Truncation leakage tolerated in an amplitude table.
pub const TABLE_LEAKAGE: f64 = 1e-9;

/// Site outcomes lighter than this (w0 + w1) are dropped before joint enumeration.
pub const PRUNE_WEIGHT: f64 = 1e-20;

pub(crate) const MEMORY: &str = "mem";

#[derive(Clone, Debug, PartialEq)]
pub struct SiteOutcome {
    pub counts: Vec<usize>,
    pub w0: f64,
    pub w1: f64,
    pub coh: C64,
}

impl SiteOutcome {
    /// Probability of the pattern for an evenly weighted memory-photon input.
    pub fn probability(&self) -> f64 {
        (self.w0 + self.w1) / 2.0
    }

    /// Phase applied to |1bar> after this pattern. Zero when the pattern carries no coherence.
    pub fn correction(&self) -> f64 {
        if self.coh.norm() == 0.0 {
            return 0.0;
        }
        let phi = -self.coh.arg();
        if phi <= -PI + 1e-15 {
            PI
        } else {
            phi
        }
    }

    pub fn total_count(&self) -> usize {
        self.counts.iter().sum()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SiteTable {
    pub outcomes: Vec<SiteOutcome>,
    /// Weight lost to truncation and pruning.
    pub leakage: f64,
}

impl SiteTable {
    /// (sum w0, sum w1) over kept outcomes.
    pub fn norms(&self) -> (f64, f64) {
        self.outcomes
            .iter()
            .fold((0.0, 0.0), |(a, b), o| (a + o.w0, b + o.w1))
    }

    /// Drops outcomes with w0 + w1 below `threshold`, booking their weight as leakage.
    pub fn pruned(mut self, threshold: f64) -> Self {
        let mut lost = 0.0;
        self.outcomes.retain(|o| {
            let keep = o.w0 + o.w1 >= threshold;
            if !keep {
                lost += o.probability();
            }
            keep
        });
        self.leakage += lost;
        self
    }

    pub fn find(&self, counts: &[usize]) -> Option<&SiteOutcome> {
        self.outcomes.iter().find(|o| o.counts == counts)
    }
}

/// c0(i, i') and c1(i, i') for a 50:50 splitter fed by the stellar mode and |alpha>.
#[derive(Clone, Debug)]
pub struct AmplitudeTable {
    alpha: C64,
    cutoff: usize,
    c0: CMatrix,
    c1: CMatrix,
    leakage: f64,
}

impl AmplitudeTable {
    pub fn alpha(&self) -> C64 {
        self.alpha
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn c0(&self, i: usize, ip: usize) -> C64 {
        self.c0[(i, ip)]
    }

    pub fn c1(&self, i: usize, ip: usize) -> C64 {
        self.c1[(i, ip)]
    }

    pub fn leakage(&self) -> f64 {
        self.leakage
    }

    /// (sum |c0|^2, sum |c1|^2).
    pub fn norms(&self) -> (f64, f64) {
        (
            self.c0.iter().map(|a| a.norm_sqr()).sum(),
            self.c1.iter().map(|a| a.norm_sqr()).sum(),
        )
    }

    pub fn site_table(&self) -> SiteTable {
        let n = self.cutoff + 1;
        let mut outcomes = Vec::with_capacity(n * n);
        for i in 0..n {
            for ip in 0..n {
                let (a, b) = (self.c0[(i, ip)], self.c1[(i, ip)]);
                outcomes.push(SiteOutcome {
                    counts: vec![i, ip],
                    w0: a.norm_sqr(),
                    w1: b.norm_sqr(),
                    coh: b * a.conj(),
                });
            }
        }
        SiteTable {
            outcomes,
            leakage: self.leakage,
        }
        .pruned(PRUNE_WEIGHT)
    }

    fn check(self) -> Result<Self> {
        if self.leakage > TABLE_LEAKAGE {
            return Err(Error::Truncation {
                leakage: self.leakage,
                threshold: TABLE_LEAKAGE,
            });
        }
        Ok(self)
    }
}

/// Closed-form table. The outputs of the ancilla are |beta>|-beta>, beta = alpha/sqrt2,
/// and the stellar photon enters as (a'^dagger + b'^dagger)/sqrt2.
pub fn coherent_amplitude_table(alpha: C64, cutoff: usize) -> Result<AmplitudeTable> {
    let beta = alpha * FRAC_1_SQRT_2;
    let p = crate::qcore::poisson_amplitudes(beta, cutoff);
    let m = crate::qcore::poisson_amplitudes(-beta, cutoff);
    let n = cutoff + 1;
    let c0 = CMatrix::from_fn(n, n, |i, ip| p[i] * m[ip]);
    let c1 = CMatrix::from_fn(n, n, |i, ip| {
        if i == 0 {
            if ip == 0 {
                C64::new(0.0, 0.0)
            } else {
                p[0] * m[ip - 1] * (ip as f64).sqrt() * FRAC_1_SQRT_2
            }
        } else {
            // both terms share beta^(i-1) (-beta)^i'; they differ only by the factor (i - i')
            p[i - 1] * m[ip] * ((i as f64 - ip as f64) / (i as f64).sqrt()) * FRAC_1_SQRT_2
        }
    });
    let mut t = AmplitudeTable {
        alpha,
        cutoff,
        c0,
        c1,
        leakage: 0.0,
    };
    let (n0, n1) = t.norms();
    t.leakage = (1.0 - n0).max(1.0 - n1).max(0.0);
    t.check()
}

/// The same table by brute force: |0>|alpha> and |1>|alpha> through the Fock-space splitter.
pub fn fock_amplitude_table(alpha: C64, cutoff: usize) -> Result<AmplitudeTable> {
    let k = cutoff.max(min_coherent_cutoff(alpha.norm()));
    let anc = coherent_state("a", alpha, k)?;
    let read = |photon: usize| -> Result<CMatrix> {
        let reg = ModeRegistry::new().with_fock("s", k)?;
        let s = QuantumState::basis(reg, photon)?.tensor(&anc)?;
        let out = beam_splitter(&s, "s", "a")?;
        let v = out.pure_vector().ok_or_else(|| Error::Unphysical("splitter output not pure".into()))?;
        Ok(CMatrix::from_fn(k + 1, k + 1, |i, ip| v[i * (k + 1) + ip]))
    };
    let mut t = AmplitudeTable {
        alpha,
        cutoff: k,
        c0: read(0)?,
        c1: read(1)?,
        leakage: 0.0,
    };
    // the ancilla was renormalized on its truncated space; report the dropped tail
    let tail: f64 = 1.0 - crate::qcore::poisson_amplitudes(alpha, k).iter().map(|a| a.norm_sqr()).sum::<f64>();
    t.leakage = tail.max(0.0);
    t.check()
}

/// Ancilla light fed into the non-stellar ports.
#[derive(Clone, Debug, PartialEq)]
pub enum AncillaState {
    /// (|0> + |1>)/sqrt2.
    Plus,
    Coherent(C64),
    /// Arbitrary Fock amplitudes, normalized on use.
    Fock(Vec<C64>),
}

impl AncillaState {
    pub fn max_photons(&self) -> usize {
        match self {
            AncillaState::Plus => 1,
            AncillaState::Coherent(a) => min_coherent_cutoff(a.norm()),
            AncillaState::Fock(v) => v.len().saturating_sub(1),
        }
    }

    pub fn amplitudes(&self, cutoff: usize) -> Result<Vec<C64>> {
        let mut out = vec![C64::new(0.0, 0.0); cutoff + 1];
        match self {
            AncillaState::Plus => {
                out[0] = C64::new(FRAC_1_SQRT_2, 0.0);
                out[1] = C64::new(FRAC_1_SQRT_2, 0.0);
            }
            AncillaState::Coherent(a) => return coherent_amplitudes(*a, cutoff),
            AncillaState::Fock(v) => {
                if v.len() > cutoff + 1 {
                    return Err(Error::param("ancilla amplitudes exceed the mode cutoff"));
                }
                let norm = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
                if norm == 0.0 {
                    return Err(Error::ZeroNorm);
                }
                for (o, a) in out.iter_mut().zip(v) {
                    *o = a / norm;
                }
            }
        }
        Ok(out)
    }
}

/// Largest joint dimension of the port modes simulated in Fock space.
const MULTIPORT_DIM_LIMIT: usize = 1 << 15;

pub(crate) fn port_label(k: usize) -> String {
    format!("p{k}")
}

/// Site table from a Fock-space simulation: the stellar photon enters port 0
/// of a (P+1)-port QFT splitter, the ancillas enter ports 1..=P, and every
/// port is counted, behind lossy detectors of amplitude transmission `eta` if given.
pub fn multiport_site_table(ancillas: &[AncillaState], eta: Option<f64>) -> Result<SiteTable> {
    if ancillas.is_empty() {
        return Err(Error::param("multiport splitter needs at least one ancilla (P >= 1)"));
    }
    let ports = ancillas.len() + 1;
    let cutoff = 1 + ancillas.iter().map(AncillaState::max_photons).sum::<usize>();
    let dim = (cutoff + 1).checked_pow(ports as u32).unwrap_or(usize::MAX);
    if dim > MULTIPORT_DIM_LIMIT {
        return Err(Error::TooLarge(dim));
    }

    let reg = ModeRegistry::new().with_qubit(MEMORY)?.with_fock(&port_label(0), cutoff)?;
    let mut v = CVector::zeros(reg.dim());
    v[0] = C64::new(FRAC_1_SQRT_2, 0.0);
    v[(cutoff + 1) + 1] = C64::new(FRAC_1_SQRT_2, 0.0);
    let mut state = QuantumState::pure(reg, v)?;
    for (k, a) in ancillas.iter().enumerate() {
        let reg = ModeRegistry::new().with_fock(&port_label(k + 1), cutoff)?;
        state = state.tensor(&QuantumState::pure(reg, CVector::from_vec(a.amplitudes(cutoff)?))?)?;
    }
    let labels: Vec<String> = (0..ports).map(port_label).collect();
    let state = linear_optics(&state, &labels, &qft_matrix(ports))?;

    let branches: Vec<MeasurementBranch> = match eta {
        None => measure_all(&state, &labels, Basis::Number)?,
        Some(eta) => {
            let mut acc = vec![MeasurementBranch {
                outcome: vec![],
                probability: 1.0,
                state,
            }];
            for l in &labels {
                let mut next = Vec::new();
                for b in acc {
                    for sub in lossy_detector(&b.state, l, eta)? {
                        let mut outcome = b.outcome.clone();
                        outcome.extend(sub.outcome);
                        next.push(MeasurementBranch {
                            outcome,
                            probability: b.probability * sub.probability,
                            state: sub.state,
                        });
                    }
                }
                acc = next;
            }
            acc
        }
    };

    let mut outcomes = Vec::with_capacity(branches.len());
    let mut kept = 0.0;
    for b in branches {
        let rho = b.state.partial_trace(&[MEMORY])?.density_matrix()?;
        let scale = 2.0 * b.probability;
        kept += b.probability;
        outcomes.push(SiteOutcome {
            counts: b.outcome,
            w0: scale * rho[(0, 0)].re,
            w1: scale * rho[(1, 1)].re,
            coh: rho[(1, 0)] * scale,
        });
    }
    Ok(SiteTable {
        outcomes,
        leakage: (1.0 - kept).max(0.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn vacuum_ancilla_table() {
        let t = coherent_amplitude_table(c(0.0), 20).unwrap();
        assert!((t.c0(0, 0) - c(1.0)).norm() < 1e-15);
        assert!((t.c1(1, 0).norm_sqr() - 0.5).abs() < 1e-15);
        assert!((t.c1(0, 1).norm_sqr() - 0.5).abs() < 1e-15);
        let (n0, n1) = t.norms();
        assert!((n0 - 1.0).abs() < 1e-15 && (n1 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn ties_vanish_and_norms() {
        for a in [0.3, 1.0, 2.0, 3.0] {
            let t = coherent_amplitude_table(c(a), min_coherent_cutoff(a)).unwrap();
            for i in 0..=t.cutoff() {
                assert_eq!(t.c1(i, i).norm(), 0.0);
            }
            let (n0, n1) = t.norms();
            assert!((n0 - 1.0).abs() < 1e-10, "{a} {n0}");
            assert!((n1 - 1.0).abs() < 1e-10, "{a} {n1}");
        }
    }

    #[test]
    fn short_cutoff_is_rejected() {
        assert!(matches!(coherent_amplitude_table(c(3.0), 10), Err(Error::Truncation { .. })));
    }

    #[test]
    fn closed_form_matches_fock_simulation() {
        for a in [C64::new(0.0, 0.0), c(0.25), c(0.6), C64::new(0.5, 0.4), c(1.0)] {
            let exact = coherent_amplitude_table(a, min_coherent_cutoff(a.norm())).unwrap();
            let fock = fock_amplitude_table(a, 6).unwrap();
            for i in 0..=6 {
                for ip in 0..=6 {
                    assert!((exact.c0(i, ip) - fock.c0(i, ip)).norm() < 1e-9);
                    assert!((exact.c1(i, ip) - fock.c1(i, ip)).norm() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn plus_port_table() {
        let t = multiport_site_table(&[AncillaState::Plus], None).unwrap();
        let (n0, n1) = t.norms();
        assert!((n0 - 1.0).abs() < 1e-12 && (n1 - 1.0).abs() < 1e-12);
        let vac = t.find(&[0, 0]).unwrap();
        assert!((vac.w0 - 0.5).abs() < 1e-12 && vac.w1 == 0.0);
        for n in [[1, 0], [0, 1]] {
            let o = t.find(&n).unwrap();
            assert!((o.w0 - 0.25).abs() < 1e-12 && (o.w1 - 0.25).abs() < 1e-12);
            assert!((o.coh.norm() - 0.25).abs() < 1e-12);
        }
        // relative sign flips between the two single clicks
        let z = t.find(&[0, 1]).unwrap().correction();
        let id = t.find(&[1, 0]).unwrap().correction();
        assert!((z.abs() - PI).abs() < 1e-12 && id.abs() < 1e-12);
        // two photons bunch
        assert!(t.find(&[1, 1]).is_none_or(|o| o.probability() < 1e-15));
    }

    #[test]
    fn multiport_coherent_matches_closed_form() {
        let a = c(0.7);
        let exact = coherent_amplitude_table(a, min_coherent_cutoff(0.7)).unwrap().site_table();
        let fock = multiport_site_table(&[AncillaState::Coherent(a)], None).unwrap();
        for o in fock.outcomes.iter().filter(|o| o.counts.iter().all(|&n| n <= 8)) {
            let e = exact.find(&o.counts).unwrap();
            assert!((e.w0 - o.w0).abs() < 1e-10);
            assert!((e.w1 - o.w1).abs() < 1e-10);
            assert!((e.coh - o.coh).norm() < 1e-10);
        }
    }

    #[test]
    fn lossless_detector_path_agrees() {
        let a = multiport_site_table(&[AncillaState::Plus], None).unwrap();
        let b = multiport_site_table(&[AncillaState::Plus], Some(1.0)).unwrap();
        for o in &a.outcomes {
            let p = b.find(&o.counts).unwrap();
            assert!((p.w0 - o.w0).abs() < 1e-12 && (p.coh - o.coh).norm() < 1e-12);
        }
    }

    #[test]
    fn oversized_multiport_is_refused() {
        let anc = vec![AncillaState::Coherent(c(1.0)); 3];
        assert!(matches!(multiport_site_table(&anc, None), Err(Error::TooLarge(_))));
    }
}
