//! Application of local operators to vectors and density matrices.

use super::{CMatrix, CVector};
use crate::C64;

/// Precomputed index structure for an operator acting on a subset of modes.
pub(crate) struct LocalPlan {
    /// Offsets of the targeted sub-basis, in operator index order.
    pub(crate) offsets: Vec<usize>,
    /// Base indices with every targeted digit zero, in registry order of the other modes.
    pub(crate) bases: Vec<usize>,
}

impl LocalPlan {
    pub(crate) fn new(dims: &[usize], targets: &[usize]) -> Self {
        let n = dims.len();
        let mut strides = vec![1usize; n];
        for k in (0..n.saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * dims[k + 1];
        }
        let total: usize = dims.iter().product();

        let sub_dim: usize = targets.iter().map(|&t| dims[t]).product();
        let mut offsets = Vec::with_capacity(sub_dim);
        for s in 0..sub_dim {
            let mut rem = s;
            let mut off = 0;
            for &t in targets.iter().rev() {
                off += (rem % dims[t]) * strides[t];
                rem /= dims[t];
            }
            offsets.push(off);
        }

        let rest: Vec<usize> = (0..n).filter(|k| !targets.contains(k)).collect();
        let rest_dim: usize = rest.iter().map(|&k| dims[k]).product();
        let mut bases = Vec::with_capacity(rest_dim);
        for s in 0..rest_dim {
            let mut rem = s;
            let mut off = 0;
            for &k in rest.iter().rev() {
                off += (rem % dims[k]) * strides[k];
                rem /= dims[k];
            }
            bases.push(off);
        }
        debug_assert_eq!(sub_dim * rest_dim, total);
        Self { offsets, bases }
    }

    pub(crate) fn apply_slice(&self, data: &mut [C64], op: &CMatrix) {
        let d = self.offsets.len();
        let mut buf = vec![C64::new(0.0, 0.0); d];
        for &base in &self.bases {
            for (b, &off) in buf.iter_mut().zip(&self.offsets) {
                *b = data[base + off];
            }
            if buf.iter().all(|z| z.re == 0.0 && z.im == 0.0) {
                continue;
            }
            for (r, &off) in self.offsets.iter().enumerate() {
                let mut acc = C64::new(0.0, 0.0);
                for (cix, b) in buf.iter().enumerate() {
                    acc += op[(r, cix)] * b;
                }
                data[base + off] = acc;
            }
        }
    }

    pub(crate) fn apply_vector(&self, v: &CVector, op: &CMatrix) -> CVector {
        let mut out = v.clone();
        self.apply_slice(out.as_mut_slice(), op);
        out
    }

    /// rho -> op rho op^dagger
    pub(crate) fn conjugate(&self, rho: &CMatrix, op: &CMatrix) -> CMatrix {
        let n = rho.nrows();
        let mut left = rho.clone();
        for col in left.as_mut_slice().chunks_mut(n) {
            self.apply_slice(col, op);
        }
        let mut right = left.adjoint();
        for col in right.as_mut_slice().chunks_mut(n) {
            self.apply_slice(col, op);
        }
        right.adjoint()
    }
}

/// Maps every full basis index to its sub-index over `targets` (in the given order).
pub(crate) fn sub_index_map(dims: &[usize], targets: &[usize]) -> Vec<usize> {
    let total: usize = dims.iter().product();
    let n = dims.len();
    let mut out = Vec::with_capacity(total);
    let mut digits = vec![0usize; n];
    for _ in 0..total {
        let s = targets.iter().fold(0, |acc, &t| acc * dims[t] + digits[t]);
        out.push(s);
        for k in (0..n).rev() {
            digits[k] += 1;
            if digits[k] < dims[k] {
                break;
            }
            digits[k] = 0;
        }
    }
    out
}
