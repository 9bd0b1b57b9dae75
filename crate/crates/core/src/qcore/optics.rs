use std::f64::consts::FRAC_1_SQRT_2;

use super::{c, measure_all, Basis, CMatrix, MeasurementBranch, ModeKind, ModeRegistry, QuantumState};
use crate::{Error, Result, C64};

/// Largest probability that may fall outside the truncated output space.
pub const BS_LEAKAGE_THRESHOLD: f64 = 1e-9;

fn fock_cutoffs<S: AsRef<str>>(state: &QuantumState, modes: &[S]) -> Result<Vec<usize>> {
    modes
        .iter()
        .map(|m| match state.registry().mode(m.as_ref())?.kind {
            ModeKind::Fock { cutoff } => Ok(cutoff),
            ModeKind::Qubit => Err(Error::param(format!(
                "mode `{}` is not a fock mode",
                m.as_ref()
            ))),
        })
        .collect()
}

/// Truncated Fock-space matrix of the passive linear-optics map
/// a_k^dagger -> sum_l u[l][k] a_l^dagger on modes with the given cutoffs.
///
/// Amplitude pushed above a cutoff is dropped, so the result is unitary only
/// on inputs that do not leak.
pub fn linear_optics_matrix(cutoffs: &[usize], u: &CMatrix) -> Result<CMatrix> {
    let p = cutoffs.len();
    if u.nrows() != p || u.ncols() != p {
        return Err(Error::DimensionMismatch {
            expected: p,
            found: u.nrows(),
        });
    }
    let dims: Vec<usize> = cutoffs.iter().map(|c| c + 1).collect();
    let dim: usize = dims.iter().product();
    let mut strides = vec![1usize; p];
    for k in (0..p.saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * dims[k + 1];
    }
    let digit = |idx: usize, l: usize| (idx / strides[l]) % dims[l];

    let mut out = CMatrix::zeros(dim, dim);
    let mut ket = vec![C64::new(0.0, 0.0); dim];
    let mut next = vec![C64::new(0.0, 0.0); dim];
    for col in 0..dim {
        ket.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
        ket[0] = c(1.0, 0.0);
        // apply each input creation operator n_k times, normalizing by sqrt(j) at step j
        for k in 0..p {
            for j in 1..=digit(col, k) {
                next.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
                let norm = 1.0 / (j as f64).sqrt();
                for (idx, &amp) in ket.iter().enumerate() {
                    if amp.re == 0.0 && amp.im == 0.0 {
                        continue;
                    }
                    for l in 0..p {
                        let n = digit(idx, l);
                        if n < cutoffs[l] {
                            next[idx + strides[l]] += amp * u[(l, k)] * ((n + 1) as f64).sqrt() * norm;
                        }
                    }
                }
                std::mem::swap(&mut ket, &mut next);
            }
        }
        for (row, &amp) in ket.iter().enumerate() {
            out[(row, col)] = amp;
        }
    }
    Ok(out)
}

/// Applies a passive linear-optics transformation to Fock modes of `state`.
/// Errors when more than [`BS_LEAKAGE_THRESHOLD`] of the probability leaves the truncated space.
pub fn linear_optics<S: AsRef<str>>(state: &QuantumState, modes: &[S], u: &CMatrix) -> Result<QuantumState> {
    let cutoffs = fock_cutoffs(state, modes)?;
    let m = linear_optics_matrix(&cutoffs, u)?;
    let (kept, out) = match state.transform(&m, modes) {
        Err(Error::ZeroNorm) => {
            return Err(Error::Truncation {
                leakage: 1.0,
                threshold: BS_LEAKAGE_THRESHOLD,
            })
        }
        r => r?,
    };
    let leakage = (1.0 - kept).max(0.0);
    if leakage > BS_LEAKAGE_THRESHOLD {
        return Err(Error::Truncation {
            leakage,
            threshold: BS_LEAKAGE_THRESHOLD,
        });
    }
    Ok(out)
}

/// 50:50 splitter: a^dagger -> (a'^dagger + b'^dagger)/sqrt2, b^dagger -> (a'^dagger - b'^dagger)/sqrt2.
pub fn beam_splitter(state: &QuantumState, mode_a: &str, mode_b: &str) -> Result<QuantumState> {
    let cut = fock_cutoffs(state, &[mode_a, mode_b])?;
    if cut[0] != cut[1] {
        return Err(Error::param("beam splitter modes need equal cutoffs"));
    }
    let s = FRAC_1_SQRT_2;
    let u = CMatrix::from_row_slice(2, 2, &[c(s, 0.), c(s, 0.), c(s, 0.), c(-s, 0.)]);
    linear_optics(state, &[mode_a, mode_b], &u)
}

/// Splitter with amplitude transmission `eta`: a^dagger -> eta a^dagger + t l^dagger,
/// l^dagger -> -t a^dagger + eta l^dagger, t = sqrt(1 - eta^2).
pub fn transmission_beam_splitter(state: &QuantumState, mode: &str, loss: &str, eta: f64) -> Result<QuantumState> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::param(format!("transmission {eta} outside [0, 1]")));
    }
    let t = (1.0 - eta * eta).max(0.0).sqrt();
    let u = CMatrix::from_row_slice(2, 2, &[c(eta, 0.), c(-t, 0.), c(t, 0.), c(eta, 0.)]);
    linear_optics(state, &[mode, loss], &u)
}

/// Smallest cutoff accepted for a coherent amplitude of modulus `abs_alpha`.
pub fn min_coherent_cutoff(abs_alpha: f64) -> usize {
    (abs_alpha * abs_alpha + 10.0 * abs_alpha + 20.0).ceil() as usize
}

/// Unnormalized e^{-|a|^2/2} a^n / sqrt(n!) for n = 0..=n_max.
pub(crate) fn poisson_amplitudes(alpha: C64, n_max: usize) -> Vec<C64> {
    let mut out = Vec::with_capacity(n_max + 1);
    let mut a = C64::new((-alpha.norm_sqr() / 2.0).exp(), 0.0);
    out.push(a);
    for n in 1..=n_max {
        a = a * alpha / (n as f64).sqrt();
        out.push(a);
    }
    out
}

/// Coherent-state amplitudes on 0..=cutoff, renormalized over the truncated space.
pub fn coherent_amplitudes(alpha: C64, cutoff: usize) -> Result<Vec<C64>> {
    let need = min_coherent_cutoff(alpha.norm());
    if cutoff < need {
        return Err(Error::param(format!(
            "cutoff {cutoff} below {need} required for |alpha| = {}",
            alpha.norm()
        )));
    }
    let mut amps = poisson_amplitudes(alpha, cutoff);
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    amps.iter_mut().for_each(|a| *a /= norm);
    Ok(amps)
}

/// |alpha> on a single fock mode.
pub fn coherent_state(label: &str, alpha: C64, cutoff: usize) -> Result<QuantumState> {
    let amps = coherent_amplitudes(alpha, cutoff)?;
    let reg = ModeRegistry::new().with_fock(label, cutoff)?;
    QuantumState::pure(reg, super::CVector::from_vec(amps))
}

/// Photon counting behind a lossy detector of amplitude transmission `eta`.
///
/// The mode meets a vacuum loss port on a transmission splitter, the loss port
/// is traced out, and the transmitted port is counted perfectly. Branch
/// outcomes are the counted photon numbers.
pub fn lossy_detector(state: &QuantumState, mode: &str, eta: f64) -> Result<Vec<MeasurementBranch>> {
    let cutoff = fock_cutoffs(state, &[mode])?[0];
    let loss = format!("{mode}~loss");
    let widened = state.extend_vacuum(&[(&loss, ModeKind::Fock { cutoff })])?;
    let mixed = transmission_beam_splitter(&widened, mode, &loss, eta)?;
    let reduced = mixed.discard(&[loss.as_str()])?;
    measure_all(&reduced, &[mode], Basis::Number)
}
