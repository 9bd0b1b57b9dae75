use rand::Rng;

use super::{gates, CMatrix, ModeKind, QuantumState};
use crate::{Error, Result};

/// Branches at or below this probability are treated as impossible.
const MIN_BRANCH_PROB: f64 = 1e-15;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Basis {
    Z,
    /// Outcome 0 is |+>, 1 is |->.
    X,
    /// Photon counting on Fock modes.
    Number,
}

#[derive(Clone, Debug)]
pub struct MeasurementBranch {
    /// One outcome digit per measured mode, in request order.
    pub outcome: Vec<usize>,
    pub probability: f64,
    /// Renormalized post-measurement state; measured modes stay in the registry.
    pub state: QuantumState,
}

fn check_basis(state: &QuantumState, idx: &[usize], basis: Basis) -> Result<()> {
    for &i in idx {
        let m = &state.registry().modes()[i];
        match (basis, m.kind) {
            (Basis::X, ModeKind::Fock { .. }) => {
                return Err(Error::param(format!("X basis on fock mode `{}`", m.label)))
            }
            (Basis::Number, ModeKind::Qubit) => {
                return Err(Error::param(format!("number basis on qubit mode `{}`", m.label)))
            }
            _ => {}
        }
    }
    Ok(())
}

fn hadamards<S: AsRef<str>>(state: &QuantumState, modes: &[S]) -> Result<QuantumState> {
    let h: CMatrix = gates::h();
    let mut out = state.clone();
    for m in modes {
        out = out.transform(&h, &[m.as_ref()])?.1;
    }
    Ok(out)
}

fn split_outcome(state: &QuantumState, idx: &[usize], mut sub: usize) -> Vec<usize> {
    let dims = state.registry().dims();
    let mut out = vec![0; idx.len()];
    for (k, &i) in idx.iter().enumerate().rev() {
        out[k] = sub % dims[i];
        sub /= dims[i];
    }
    out
}

fn branch<S: AsRef<str>>(
    rotated: &QuantumState,
    modes: &[S],
    idx: &[usize],
    basis: Basis,
    sub: usize,
) -> Result<MeasurementBranch> {
    let (p, mut post) = rotated.project_digits(idx, sub)?;
    if basis == Basis::X {
        post = hadamards(&post, modes)?;
    }
    Ok(MeasurementBranch {
        outcome: split_outcome(rotated, idx, sub),
        probability: p,
        state: post,
    })
}

fn prepare<S: AsRef<str>>(
    state: &QuantumState,
    modes: &[S],
    basis: Basis,
) -> Result<(Vec<usize>, QuantumState)> {
    if modes.is_empty() {
        return Err(Error::param("no modes to measure"));
    }
    let idx = state.registry().indices_of(modes)?;
    check_basis(state, &idx, basis)?;
    let rotated = if basis == Basis::X {
        hadamards(state, modes)?
    } else {
        state.clone()
    };
    Ok((idx, rotated))
}

/// Every outcome with nonzero probability, in increasing outcome order.
pub fn measure_all<S: AsRef<str>>(
    state: &QuantumState,
    modes: &[S],
    basis: Basis,
) -> Result<Vec<MeasurementBranch>> {
    let (idx, rotated) = prepare(state, modes, basis)?;
    let probs = rotated.marginal(&idx);
    let mut out = Vec::new();
    for (sub, &p) in probs.iter().enumerate() {
        if p > MIN_BRANCH_PROB {
            out.push(branch(&rotated, modes, &idx, basis, sub)?);
        }
    }
    Ok(out)
}

/// One Born-rule sample.
pub fn measure<S: AsRef<str>, R: Rng + ?Sized>(
    state: &QuantumState,
    modes: &[S],
    basis: Basis,
    rng: &mut R,
) -> Result<MeasurementBranch> {
    let (idx, rotated) = prepare(state, modes, basis)?;
    let probs = rotated.marginal(&idx);
    let total: f64 = probs.iter().sum();
    let mut u = rng.random::<f64>() * total;
    let mut pick = None;
    for (sub, &p) in probs.iter().enumerate() {
        if p > MIN_BRANCH_PROB {
            pick = Some(sub);
            if u < p {
                break;
            }
            u -= p;
        }
    }
    let sub = pick.ok_or(Error::ZeroProbability)?;
    branch(&rotated, modes, &idx, basis, sub)
}

/// Projects onto a given outcome; fails if it has zero probability.
pub fn measure_forced<S: AsRef<str>>(
    state: &QuantumState,
    modes: &[S],
    basis: Basis,
    outcome: &[usize],
) -> Result<MeasurementBranch> {
    let (idx, rotated) = prepare(state, modes, basis)?;
    if outcome.len() != idx.len() {
        return Err(Error::DimensionMismatch {
            expected: idx.len(),
            found: outcome.len(),
        });
    }
    let dims = state.registry().dims();
    let mut sub = 0;
    for (&o, &i) in outcome.iter().zip(&idx) {
        if o >= dims[i] {
            return Err(Error::param(format!("outcome digit {o} out of range")));
        }
        sub = sub * dims[i] + o;
    }
    let b = branch(&rotated, modes, &idx, basis, sub)?;
    if b.probability <= MIN_BRANCH_PROB {
        return Err(Error::ZeroProbability);
    }
    Ok(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::{build_state, c, coherent_state, ModeRegistry, PIPELINE_TOL};
    use crate::rng::seeded;
    use proptest::prelude::*;

    fn one() -> crate::C64 {
        c(1., 0.)
    }

    #[test]
    fn z_on_plus_and_x_on_zero() {
        let q = ModeRegistry::qubits(&["a"]).unwrap();
        let plus = build_state(q.clone(), &[("0", one()), ("1", one())]).unwrap();
        let b = measure_all(&plus, &["a"], Basis::Z).unwrap();
        assert_eq!(b.len(), 2);
        assert!((b[0].probability - 0.5).abs() < 1e-15 && (b[1].probability - 0.5).abs() < 1e-15);

        let zero = build_state(q, &[("0", one())]).unwrap();
        let b = measure_all(&zero, &["a"], Basis::X).unwrap();
        assert!((b[0].probability - 0.5).abs() < 1e-15 && (b[1].probability - 0.5).abs() < 1e-15);
        // post-state of the "-" branch is |->
        let d = b[1].state.density_matrix().unwrap();
        assert!((d[(0, 1)].re + 0.5).abs() < 1e-15);
    }

    #[test]
    fn number_on_coherent() {
        let s = coherent_state("f", c(1., 0.), 31).unwrap();
        let b = measure_forced(&s, &["f"], Basis::Number, &[1]).unwrap();
        assert!((b.probability - (-1.0f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn basis_kind_checks() {
        let reg = ModeRegistry::new().with_fock("f", 2).unwrap().with_qubit("q").unwrap();
        let s = QuantumState::vacuum(reg);
        assert!(measure_all(&s, &["f"], Basis::X).is_err());
        assert!(measure_all(&s, &["q"], Basis::Number).is_err());
        assert!(matches!(
            measure_forced(&s, &["q"], Basis::Z, &[1]),
            Err(Error::ZeroProbability)
        ));
    }

    #[test]
    fn sampling_follows_born_rule() {
        let q = ModeRegistry::qubits(&["a"]).unwrap();
        let s = build_state(q, &[("0", c(0.6, 0.)), ("1", c(0.8, 0.))]).unwrap();
        let mut rng = seeded(11);
        let n = 20_000;
        let ones = (0..n)
            .filter(|_| measure(&s, &["a"], Basis::Z, &mut rng).unwrap().outcome[0] == 1)
            .count() as f64;
        let p = 0.64;
        let sigma = (p * (1.0 - p) / n as f64).sqrt();
        assert!((ones / n as f64 - p).abs() < 3.0 * sigma);
    }

    fn random_state(re: &[f64], im: &[f64]) -> QuantumState {
        let reg = ModeRegistry::qubits(&["a", "b", "c"]).unwrap();
        let v = crate::qcore::CVector::from_fn(8, |i, _| c(re[i], im[i]));
        QuantumState::pure(reg, v).unwrap()
    }

    proptest! {
        #[test]
        fn branches_sum_and_recombine(
            re in proptest::collection::vec(-1.0f64..1.0, 8),
            im in proptest::collection::vec(-1.0f64..1.0, 8),
            x_basis in any::<bool>(),
        ) {
            prop_assume!(re.iter().chain(&im).map(|v| v * v).sum::<f64>() > 1e-3);
            let s = random_state(&re, &im);
            let basis = if x_basis { Basis::X } else { Basis::Z };
            let br = measure_all(&s, &["a", "c"], basis).unwrap();
            let total: f64 = br.iter().map(|b| b.probability).sum();
            prop_assert!((total - 1.0).abs() < PIPELINE_TOL);

            // recombination equals the dephased state in the measurement basis
            let mut mix = crate::qcore::CMatrix::zeros(8, 8);
            for b in &br {
                mix += b.state.density_matrix().unwrap() * c(b.probability, 0.);
            }
            let rotated = if x_basis { hadamards(&s, &["a", "c"]).unwrap() } else { s.clone() };
            let rho = rotated.density_matrix().unwrap();
            let reg = rotated.registry().clone();
            let mut deph = crate::qcore::CMatrix::zeros(8, 8);
            for i in 0..8 {
                for j in 0..8 {
                    let (di, dj) = (reg.digits(i), reg.digits(j));
                    if di[0] == dj[0] && di[2] == dj[2] {
                        deph[(i, j)] = rho[(i, j)];
                    }
                }
            }
            let deph = QuantumState::from_density(reg, deph).unwrap();
            let deph = if x_basis { hadamards(&deph, &["a", "c"]).unwrap() } else { deph };
            prop_assert!((mix - deph.density_matrix().unwrap()).camax() < 1e-12);
        }
    }
}
