use std::f64::consts::PI;

use super::{c, CMatrix, STRUCT_TOL};
use crate::{Error, Result};

/// Unitary matrix bound to an ordered list of target mode labels.
#[derive(Clone, Debug)]
pub struct UnitaryOp {
    matrix: CMatrix,
    targets: Vec<String>,
}

impl UnitaryOp {
    pub fn new<S: AsRef<str>>(matrix: CMatrix, targets: &[S]) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch {
                expected: matrix.nrows(),
                found: matrix.ncols(),
            });
        }
        let n = matrix.nrows();
        let dev = (&matrix * matrix.adjoint() - CMatrix::identity(n, n)).camax();
        if dev > STRUCT_TOL {
            return Err(Error::NotUnitary(dev));
        }
        Ok(Self {
            matrix,
            targets: targets.iter().map(|s| s.as_ref().to_string()).collect(),
        })
    }

    /// Same matrix on different modes.
    pub fn on<S: AsRef<str>>(&self, targets: &[S]) -> Self {
        Self {
            matrix: self.matrix.clone(),
            targets: targets.iter().map(|s| s.as_ref().to_string()).collect(),
        }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn targets(&self) -> &[String] {
        &self.targets
    }
}

/// Standard gate matrices. Two-qubit gates take the first target as control.
pub mod gates {
    use super::super::{c, CMatrix};

    fn from_rows(n: usize, rows: &[(f64, f64)]) -> CMatrix {
        CMatrix::from_row_iterator(n, n, rows.iter().map(|&(re, im)| c(re, im)))
    }

    pub fn identity(n: usize) -> CMatrix {
        CMatrix::identity(n, n)
    }

    pub fn x() -> CMatrix {
        from_rows(2, &[(0., 0.), (1., 0.), (1., 0.), (0., 0.)])
    }

    pub fn y() -> CMatrix {
        from_rows(2, &[(0., 0.), (0., -1.), (0., 1.), (0., 0.)])
    }

    pub fn z() -> CMatrix {
        from_rows(2, &[(1., 0.), (0., 0.), (0., 0.), (-1., 0.)])
    }

    pub fn h() -> CMatrix {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        from_rows(2, &[(s, 0.), (s, 0.), (s, 0.), (-s, 0.)])
    }

    pub fn s() -> CMatrix {
        from_rows(2, &[(1., 0.), (0., 0.), (0., 0.), (0., 1.)])
    }

    pub fn sdg() -> CMatrix {
        s().adjoint()
    }

    /// diag(1, e^{i phi})
    pub fn phase(phi: f64) -> CMatrix {
        let mut m = identity(2);
        m[(1, 1)] = c(phi.cos(), phi.sin());
        m
    }

    pub fn cnot() -> CMatrix {
        let mut m = CMatrix::zeros(4, 4);
        m[(0, 0)] = c(1., 0.);
        m[(1, 1)] = c(1., 0.);
        m[(2, 3)] = c(1., 0.);
        m[(3, 2)] = c(1., 0.);
        m
    }

    pub fn cz() -> CMatrix {
        let mut m = identity(4);
        m[(3, 3)] = c(-1., 0.);
        m
    }

    /// Identity except a -1 phase on basis index `index` (a projector-controlled Z).
    pub fn projector_phase(dim: usize, index: usize) -> CMatrix {
        let mut m = identity(dim);
        m[(index, index)] = c(-1., 0.);
        m
    }
}

/// (1/sqrt n) omega^{jk} with omega = exp(2 pi i / n).
pub fn qft_matrix(n: usize) -> CMatrix {
    assert!(n >= 1, "qft size must be at least 1");
    let norm = 1.0 / (n as f64).sqrt();
    CMatrix::from_fn(n, n, |j, k| {
        let ang = 2.0 * PI * ((j * k) % n) as f64 / n as f64;
        c(ang.cos() * norm, ang.sin() * norm)
    })
}

/// QFT as a [`UnitaryOp`] without targets; bind it with [`UnitaryOp::on`].
pub fn qft_unitary(n: usize) -> Result<UnitaryOp> {
    if n == 0 {
        return Err(Error::param("qft size must be at least 1"));
    }
    UnitaryOp::new::<&str>(qft_matrix(n), &[])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::{build_state, ModeRegistry};
    use proptest::prelude::*;

    #[test]
    fn qft_examples() {
        assert!((qft_matrix(1)[(0, 0)] - c(1., 0.)).norm() < 1e-15);
        assert!((qft_matrix(2) - gates::h()).camax() < 1e-15);
        assert!((qft_matrix(4)[(2, 3)] - c(-0.5, 0.)).norm() < 1e-15);
        assert!(qft_unitary(0).is_err());
    }

    #[test]
    fn rejects_non_unitary() {
        let m = CMatrix::from_element(2, 2, c(1., 0.));
        assert!(matches!(UnitaryOp::new(m, &["a"]), Err(Error::NotUnitary(_))));
    }

    #[test]
    fn gate_examples() {
        let reg = ModeRegistry::qubits(&["a", "b"]).unwrap();
        let one = c(1., 0.);
        let s = build_state(reg.clone(), &[("10", one)]).unwrap();
        let out = s.apply(&UnitaryOp::new(gates::cnot(), &["a", "b"]).unwrap()).unwrap();
        assert!((out.diagonal()[3] - 1.0).abs() < 1e-15);

        let s = build_state(reg.clone(), &[("11", one)]).unwrap();
        let cz = UnitaryOp::new(gates::cz(), &["a", "b"]).unwrap();
        let v = cz.matrix() * s.pure_vector().unwrap();
        assert!((v[3] + one).norm() < 1e-15);

        let bell = build_state(reg, &[("00", one), ("11", one)]).unwrap();
        let xx = UnitaryOp::new(gates::x().kronecker(&gates::x()), &["a", "b"]).unwrap();
        assert!((bell.apply(&xx).unwrap().fidelity(&bell).unwrap() - 1.0).abs() < 1e-14);

        let bad = UnitaryOp::new(gates::cnot(), &["a"]).unwrap();
        assert!(matches!(
            build_state(ModeRegistry::qubits(&["a"]).unwrap(), &[("0", one)]).unwrap().apply(&bad),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    proptest! {
        #[test]
        fn qft_is_unitary_and_squares_to_parity(n in 1usize..=8) {
            let f = qft_matrix(n);
            let dev = (&f * f.adjoint() - CMatrix::identity(n, n)).camax();
            prop_assert!(dev < 1e-12);
            let sq = &f * &f;
            for j in 0..n {
                for k in 0..n {
                    let want = if (j + k) % n == 0 { 1.0 } else { 0.0 };
                    prop_assert!((sq[(j, k)] - c(want, 0.)).norm() < 1e-12);
                }
            }
        }
    }
}
