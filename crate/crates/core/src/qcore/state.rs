use nalgebra::SymmetricEigen;

use super::kernel::{sub_index_map, LocalPlan};
use super::{CMatrix, CVector, ModeKind, ModeRegistry, UnitaryOp, DENSE_LIMIT, PIPELINE_TOL, STRUCT_TOL};
use crate::{Error, Result, C64};

/// Eigenvalues below this are dropped when decomposing into pure members.
const RANK_EPS: f64 = 1e-14;

/// Normalized quantum state over a [`ModeRegistry`].
///
/// Held either as a weighted ensemble of normalized pure vectors or as a dense
/// density matrix. Both are exact for every linear operation.
#[derive(Clone, Debug)]
pub struct QuantumState {
    registry: ModeRegistry,
    repr: Repr,
}

#[derive(Clone, Debug)]
enum Repr {
    Dense(CMatrix),
    Ensemble(Vec<(f64, CVector)>),
}

fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

fn eigen_members(rho: &CMatrix) -> Vec<(f64, CVector)> {
    let eig = SymmetricEigen::new(rho.clone());
    let mut out = Vec::new();
    for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
        if lambda > RANK_EPS {
            out.push((lambda, eig.eigenvectors.column(k).into_owned()));
        }
    }
    out
}

impl QuantumState {
    pub fn pure(registry: ModeRegistry, vector: CVector) -> Result<Self> {
        Self::from_ensemble(registry, vec![(1.0, vector)])
    }

    /// Weighted mixture of (not necessarily normalized) vectors.
    pub fn from_ensemble(registry: ModeRegistry, members: Vec<(f64, CVector)>) -> Result<Self> {
        let dim = registry.dim();
        let mut kept = Vec::with_capacity(members.len());
        for (w, v) in members {
            if v.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: v.len(),
                });
            }
            if !(w >= 0.0) {
                return Err(Error::param("ensemble weights must be nonnegative"));
            }
            let n = v.norm();
            if w > 0.0 && n > 0.0 {
                kept.push((w, v / C64::new(n, 0.0)));
            }
        }
        let total: f64 = kept.iter().map(|(w, _)| w).sum();
        if kept.is_empty() || total <= 0.0 {
            return Err(Error::ZeroNorm);
        }
        for m in kept.iter_mut() {
            m.0 /= total;
        }
        Ok(Self {
            registry,
            repr: Repr::Ensemble(kept),
        }
        .compact())
    }

    /// Density matrix input, renormalized to unit trace and checked for physicality.
    pub fn from_density(registry: ModeRegistry, rho: CMatrix) -> Result<Self> {
        let dim = registry.dim();
        if rho.nrows() != dim || rho.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: rho.nrows(),
            });
        }
        if dim > DENSE_LIMIT {
            return Err(Error::TooLarge(dim));
        }
        let tr = rho.trace().re;
        if tr <= 0.0 {
            return Err(Error::ZeroNorm);
        }
        let state = Self {
            registry,
            repr: Repr::Dense(rho / C64::new(tr, 0.0)),
        };
        state.validate()?;
        Ok(state)
    }

    pub fn basis(registry: ModeRegistry, index: usize) -> Result<Self> {
        let dim = registry.dim();
        if index >= dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: index,
            });
        }
        let mut v = CVector::zeros(dim);
        v[index] = C64::new(1.0, 0.0);
        Self::pure(registry, v)
    }

    /// All modes in |0>.
    pub fn vacuum(registry: ModeRegistry) -> Self {
        Self::basis(registry, 0).expect("index 0 always exists")
    }

    pub fn registry(&self) -> &ModeRegistry {
        &self.registry
    }

    pub fn dim(&self) -> usize {
        self.registry.dim()
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.repr, Repr::Dense(_))
    }

    pub fn purity(&self) -> f64 {
        match &self.repr {
            Repr::Dense(rho) => (rho * rho).trace().re,
            Repr::Ensemble(ms) => {
                let mut p = 0.0;
                for (wi, vi) in ms {
                    for (wj, vj) in ms {
                        p += wi * wj * vi.dotc(vj).norm_sqr();
                    }
                }
                p
            }
        }
    }

    pub fn is_pure(&self) -> bool {
        match &self.repr {
            Repr::Ensemble(ms) if ms.len() == 1 => true,
            _ => (self.purity() - 1.0).abs() < PIPELINE_TOL,
        }
    }

    /// The state vector, if the state is pure (up to global phase).
    pub fn pure_vector(&self) -> Option<CVector> {
        match &self.repr {
            Repr::Ensemble(ms) if ms.len() == 1 => Some(ms[0].1.clone()),
            _ if self.is_pure() => self.members().into_iter().max_by(|a, b| a.0.total_cmp(&b.0)).map(|m| m.1),
            _ => None,
        }
    }

    /// Decomposition into weighted normalized pure states.
    pub fn members(&self) -> Vec<(f64, CVector)> {
        match &self.repr {
            Repr::Ensemble(ms) => ms.clone(),
            Repr::Dense(rho) => eigen_members(rho),
        }
    }

    pub fn density_matrix(&self) -> Result<CMatrix> {
        match &self.repr {
            Repr::Dense(rho) => Ok(rho.clone()),
            Repr::Ensemble(ms) => {
                let dim = self.dim();
                if dim > DENSE_LIMIT {
                    return Err(Error::TooLarge(dim));
                }
                let mut rho = CMatrix::zeros(dim, dim);
                for (w, v) in ms {
                    rho += v * v.adjoint() * C64::new(*w, 0.0);
                }
                Ok(rho)
            }
        }
    }

    /// Computational-basis populations.
    pub fn diagonal(&self) -> Vec<f64> {
        match &self.repr {
            Repr::Dense(rho) => (0..self.dim()).map(|i| rho[(i, i)].re).collect(),
            Repr::Ensemble(ms) => {
                let mut d = vec![0.0; self.dim()];
                for (w, v) in ms {
                    for (di, a) in d.iter_mut().zip(v.iter()) {
                        *di += w * a.norm_sqr();
                    }
                }
                d
            }
        }
    }

    pub fn trace(&self) -> f64 {
        match &self.repr {
            Repr::Dense(rho) => rho.trace().re,
            Repr::Ensemble(ms) => ms.iter().map(|(w, v)| w * v.norm_squared()).sum(),
        }
    }

    /// Smallest eigenvalue of the density matrix.
    pub fn min_eigenvalue(&self) -> Result<f64> {
        match &self.repr {
            Repr::Ensemble(_) => Ok(0.0f64.min(self.density_eigen_min()?)),
            Repr::Dense(rho) => Ok(SymmetricEigen::new(rho.clone()).eigenvalues.min()),
        }
    }

    fn density_eigen_min(&self) -> Result<f64> {
        if self.dim() > 512 {
            // ensemble weights are nonnegative, so the state is PSD by construction
            return Ok(0.0);
        }
        let rho = self.density_matrix()?;
        Ok(SymmetricEigen::new(rho).eigenvalues.min())
    }

    /// Checks hermiticity, unit trace and positivity at the crate tolerances.
    pub fn validate(&self) -> Result<()> {
        let tr = self.trace();
        if (tr - 1.0).abs() > PIPELINE_TOL {
            return Err(Error::Unphysical(format!("trace {tr}")));
        }
        match &self.repr {
            Repr::Dense(rho) => {
                let herm = (rho - rho.adjoint()).camax();
                if herm > STRUCT_TOL {
                    return Err(Error::Unphysical(format!("hermiticity deviation {herm:.3e}")));
                }
                let min = SymmetricEigen::new(rho.clone()).eigenvalues.min();
                if min < -PIPELINE_TOL {
                    return Err(Error::Unphysical(format!("negative eigenvalue {min:.3e}")));
                }
            }
            Repr::Ensemble(ms) => {
                if ms.iter().any(|(w, _)| *w < 0.0) {
                    return Err(Error::Unphysical("negative ensemble weight".into()));
                }
            }
        }
        Ok(())
    }

    fn compact(self) -> Self {
        match self.repr {
            Repr::Ensemble(ms) if ms.len() > 1 => {
                let dim = self.registry.dim();
                if dim <= DENSE_LIMIT && ms.len() * 4 >= dim {
                    let st = Self {
                        registry: self.registry,
                        repr: Repr::Ensemble(ms),
                    };
                    let rho = st.density_matrix().expect("dim within dense limit");
                    Self {
                        registry: st.registry,
                        repr: Repr::Dense(rho),
                    }
                } else {
                    Self {
                        registry: self.registry,
                        repr: Repr::Ensemble(ms),
                    }
                }
            }
            repr => Self {
                registry: self.registry,
                repr,
            },
        }
    }

    fn target_indices<S: AsRef<str>>(&self, targets: &[S]) -> Result<Vec<usize>> {
        self.registry.indices_of(targets)
    }

    /// Applies a unitary on its target modes.
    pub fn apply(&self, op: &UnitaryOp) -> Result<Self> {
        let (_, out) = self.transform(op.matrix(), op.targets())?;
        Ok(out)
    }

    /// Applies an arbitrary operator and renormalizes. Returns the surviving
    /// weight tr(O rho O^dagger) together with the normalized state.
    pub fn transform<S: AsRef<str>>(&self, op: &CMatrix, targets: &[S]) -> Result<(f64, Self)> {
        let idx = self.target_indices(targets)?;
        let dims = self.registry.dims();
        let sub: usize = idx.iter().map(|&t| dims[t]).product();
        if op.nrows() != sub || op.ncols() != sub {
            return Err(Error::DimensionMismatch {
                expected: sub,
                found: op.nrows(),
            });
        }
        let plan = LocalPlan::new(&dims, &idx);
        match &self.repr {
            Repr::Dense(rho) => {
                let out = plan.conjugate(rho, op);
                let tr = out.trace().re;
                if tr <= 0.0 {
                    return Err(Error::ZeroNorm);
                }
                Ok((
                    tr,
                    Self {
                        registry: self.registry.clone(),
                        repr: Repr::Dense(out / C64::new(tr, 0.0)),
                    },
                ))
            }
            Repr::Ensemble(ms) => {
                let mut out = Vec::with_capacity(ms.len());
                let mut total = 0.0;
                for (w, v) in ms {
                    let nv = plan.apply_vector(v, op);
                    let n2 = nv.norm_squared();
                    total += w * n2;
                    out.push((w * n2, nv));
                }
                if total <= 0.0 {
                    return Err(Error::ZeroNorm);
                }
                Ok((total, Self::from_ensemble(self.registry.clone(), out)?))
            }
        }
    }

    /// Keeps only basis states whose digits on `targets` equal `outcome`
    /// (a sub-index in target order). Returns (probability, normalized state).
    pub(crate) fn project_digits(&self, targets: &[usize], outcome: usize) -> Result<(f64, Self)> {
        let map = sub_index_map(&self.registry.dims(), targets);
        match &self.repr {
            Repr::Dense(rho) => {
                let mut out = rho.clone();
                let n = out.nrows();
                for j in 0..n {
                    for i in 0..n {
                        if map[i] != outcome || map[j] != outcome {
                            out[(i, j)] = zero();
                        }
                    }
                }
                let tr = out.trace().re;
                if tr <= 0.0 {
                    return Err(Error::ZeroProbability);
                }
                Ok((
                    tr,
                    Self {
                        registry: self.registry.clone(),
                        repr: Repr::Dense(out / C64::new(tr, 0.0)),
                    },
                ))
            }
            Repr::Ensemble(ms) => {
                let mut out = Vec::with_capacity(ms.len());
                let mut total = 0.0;
                for (w, v) in ms {
                    let mut nv = v.clone();
                    for (a, &s) in nv.iter_mut().zip(&map) {
                        if s != outcome {
                            *a = zero();
                        }
                    }
                    let n2 = nv.norm_squared();
                    if n2 > 0.0 {
                        total += w * n2;
                        out.push((w * n2, nv));
                    }
                }
                if total <= 0.0 {
                    return Err(Error::ZeroProbability);
                }
                Ok((total, Self::from_ensemble(self.registry.clone(), out)?))
            }
        }
    }

    /// Marginal computational-basis distribution of `targets` (sub-index in target order).
    pub(crate) fn marginal(&self, targets: &[usize]) -> Vec<f64> {
        let dims = self.registry.dims();
        let sub: usize = targets.iter().map(|&t| dims[t]).product();
        let map = sub_index_map(&dims, targets);
        let mut out = vec![0.0; sub];
        for (p, s) in self.diagonal().iter().zip(&map) {
            out[*s] += p;
        }
        out
    }

    /// Marginal populations of the named modes.
    pub fn marginal_probabilities<S: AsRef<str>>(&self, modes: &[S]) -> Result<Vec<f64>> {
        let idx = self.target_indices(modes)?;
        Ok(self.marginal(&idx))
    }

    pub fn expectation<S: AsRef<str>>(&self, op: &CMatrix, targets: &[S]) -> Result<C64> {
        let idx = self.target_indices(targets)?;
        let dims = self.registry.dims();
        let sub: usize = idx.iter().map(|&t| dims[t]).product();
        if op.nrows() != sub {
            return Err(Error::DimensionMismatch {
                expected: sub,
                found: op.nrows(),
            });
        }
        let plan = LocalPlan::new(&dims, &idx);
        match &self.repr {
            Repr::Ensemble(ms) => Ok(ms
                .iter()
                .map(|(w, v)| v.dotc(&plan.apply_vector(v, op)) * *w)
                .sum()),
            Repr::Dense(rho) => {
                // tr(O rho) = sum_j (O rho)_{jj}
                let n = rho.nrows();
                let mut left = rho.clone();
                for col in left.as_mut_slice().chunks_mut(n) {
                    plan.apply_slice(col, op);
                }
                Ok(left.trace())
            }
        }
    }

    /// <target|rho|target> for a pure target over the same registry.
    pub fn fidelity(&self, target: &QuantumState) -> Result<f64> {
        if target.registry != self.registry {
            return Err(Error::param("fidelity target lives on a different registry"));
        }
        let t = target
            .pure_vector()
            .ok_or_else(|| Error::param("fidelity target must be pure"))?;
        self.fidelity_vector(&t)
    }

    pub fn fidelity_vector(&self, t: &CVector) -> Result<f64> {
        if t.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: t.len(),
            });
        }
        let t = t / C64::new(t.norm(), 0.0);
        let f = match &self.repr {
            Repr::Ensemble(ms) => ms.iter().map(|(w, v)| w * t.dotc(v).norm_sqr()).sum(),
            Repr::Dense(rho) => (t.adjoint() * rho * &t)[(0, 0)].re,
        };
        Ok(f.clamp(0.0, 1.0))
    }

    /// Tensor product, `self` modes first.
    pub fn tensor(&self, other: &QuantumState) -> Result<Self> {
        let registry = self.registry.concat(&other.registry)?;
        let dim = registry.dim();
        if let (Repr::Dense(a), Repr::Dense(b)) = (&self.repr, &other.repr) {
            if dim <= DENSE_LIMIT {
                return Ok(Self {
                    registry,
                    repr: Repr::Dense(a.kronecker(b)),
                });
            }
        }
        let (ma, mb) = (self.members(), other.members());
        let mut out = Vec::with_capacity(ma.len() * mb.len());
        for (wa, va) in &ma {
            for (wb, vb) in &mb {
                out.push((wa * wb, va.kronecker(vb)));
            }
        }
        Self::from_ensemble(registry, out)
    }

    /// Appends modes prepared in their vacuum / |0> state.
    pub fn extend_vacuum(&self, modes: &[(&str, ModeKind)]) -> Result<Self> {
        let mut reg = ModeRegistry::new();
        for (l, k) in modes {
            reg.push(l, *k)?;
        }
        self.tensor(&QuantumState::vacuum(reg))
    }

    /// Reduced state on `keep`, which stays in this registry's order.
    pub fn partial_trace<S: AsRef<str>>(&self, keep: &[S]) -> Result<Self> {
        if keep.is_empty() {
            return Err(Error::param("partial trace must keep at least one mode"));
        }
        let mut idx = self.target_indices(keep)?;
        idx.sort_unstable();
        if idx.len() == self.registry.len() {
            return Ok(self.clone());
        }
        let registry = self.registry.restrict(&idx);
        let plan = LocalPlan::new(&self.registry.dims(), &idx);
        let keep_dim = plan.offsets.len();
        let trace_dim = plan.bases.len();

        match &self.repr {
            Repr::Dense(rho) => {
                let mut out = CMatrix::zeros(keep_dim, keep_dim);
                for (b, &ob) in plan.offsets.iter().enumerate() {
                    for (a, &oa) in plan.offsets.iter().enumerate() {
                        let mut acc = zero();
                        for &t in &plan.bases {
                            acc += rho[(oa + t, ob + t)];
                        }
                        out[(a, b)] = acc;
                    }
                }
                Ok(Self {
                    registry,
                    repr: Repr::Dense(out),
                })
            }
            Repr::Ensemble(ms) => {
                if keep_dim <= 64 && keep_dim <= trace_dim {
                    let mut out = CMatrix::zeros(keep_dim, keep_dim);
                    for (w, v) in ms {
                        for &t in &plan.bases {
                            for (b, &ob) in plan.offsets.iter().enumerate() {
                                let vb = v[ob + t].conj() * *w;
                                if vb == zero() {
                                    continue;
                                }
                                for (a, &oa) in plan.offsets.iter().enumerate() {
                                    out[(a, b)] += v[oa + t] * vb;
                                }
                            }
                        }
                    }
                    return Ok(Self {
                        registry,
                        repr: Repr::Dense(out),
                    }
                    .compact_dense());
                }
                let mut members = Vec::new();
                for (w, v) in ms {
                    // columns of the keep x trace reshaping, orthogonalized through the Gram matrix
                    let m = CMatrix::from_fn(keep_dim, trace_dim, |a, t| v[plan.offsets[a] + plan.bases[t]]);
                    let nonzero: Vec<usize> = (0..trace_dim)
                        .filter(|&t| m.column(t).iter().any(|z| z.norm_sqr() > 0.0))
                        .collect();
                    if nonzero.len() == 1 {
                        let col = m.column(nonzero[0]).into_owned();
                        members.push((*w * col.norm_squared(), col));
                        continue;
                    }
                    let sub = m.select_columns(&nonzero);
                    let gram = sub.adjoint() * &sub;
                    let eig = SymmetricEigen::new(gram);
                    for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
                        if lambda > RANK_EPS {
                            let vec = &sub * eig.eigenvectors.column(k);
                            members.push((*w * lambda, vec));
                        }
                    }
                }
                Self::from_ensemble(registry, members)
            }
        }
    }

    /// Small dense states that are pure go back to a single-vector ensemble.
    fn compact_dense(self) -> Self {
        if let Repr::Dense(rho) = &self.repr {
            let ms = eigen_members(rho);
            if ms.len() == 1 {
                return Self {
                    registry: self.registry,
                    repr: Repr::Ensemble(ms),
                };
            }
        }
        self
    }

    /// Traces out the named modes.
    pub fn discard<S: AsRef<str>>(&self, labels: &[S]) -> Result<Self> {
        let drop = self.target_indices(labels)?;
        let keep: Vec<String> = self
            .registry
            .modes()
            .iter()
            .enumerate()
            .filter(|(i, _)| !drop.contains(i))
            .map(|(_, m)| m.label.clone())
            .collect();
        if keep.is_empty() {
            return Err(Error::param("cannot discard every mode"));
        }
        self.partial_trace(&keep)
    }

    /// Same modes, reordered to match `target` (which must hold exactly the same modes).
    pub fn permuted(&self, target: &ModeRegistry) -> Result<Self> {
        if target == &self.registry {
            return Ok(self.clone());
        }
        if target.len() != self.registry.len() {
            return Err(Error::param("permutation target has a different mode set"));
        }
        let src_pos: Vec<usize> = target
            .modes()
            .iter()
            .map(|m| {
                let i = self.registry.index_of(&m.label)?;
                if self.registry.modes()[i].kind != m.kind {
                    return Err(Error::param(format!("mode `{}` changes kind", m.label)));
                }
                Ok(i)
            })
            .collect::<Result<_>>()?;
        let dim = self.dim();
        // perm[new_index] = old_index
        let perm: Vec<usize> = (0..dim)
            .map(|ni| {
                let nd = target.digits(ni);
                let mut od = vec![0; nd.len()];
                for (k, &src) in src_pos.iter().enumerate() {
                    od[src] = nd[k];
                }
                self.registry.index(&od)
            })
            .collect();
        let repr = match &self.repr {
            Repr::Ensemble(ms) => Repr::Ensemble(
                ms.iter()
                    .map(|(w, v)| (*w, CVector::from_fn(dim, |i, _| v[perm[i]])))
                    .collect(),
            ),
            Repr::Dense(rho) => Repr::Dense(CMatrix::from_fn(dim, dim, |i, j| rho[(perm[i], perm[j])])),
        };
        Ok(Self {
            registry: target.clone(),
            repr,
        })
    }

    /// Same state with its modes renamed, in order.
    pub fn relabeled<S: AsRef<str>>(&self, labels: &[S]) -> Result<Self> {
        if labels.len() != self.registry.len() {
            return Err(Error::DimensionMismatch {
                expected: self.registry.len(),
                found: labels.len(),
            });
        }
        let mut reg = ModeRegistry::new();
        for (m, l) in self.registry.modes().iter().zip(labels) {
            reg.push(l.as_ref(), m.kind)?;
        }
        Ok(Self {
            registry: reg,
            repr: self.repr.clone(),
        })
    }

    /// Appends any of `labels` not yet present as qubits in |0>.
    pub fn with_qubits<S: AsRef<str>>(&self, labels: &[S]) -> Result<Self> {
        let missing: Vec<(&str, ModeKind)> = labels
            .iter()
            .map(|l| l.as_ref())
            .filter(|l| !self.registry.contains(l))
            .map(|l| (l, ModeKind::Qubit))
            .collect();
        if missing.is_empty() {
            return Ok(self.clone());
        }
        self.extend_vacuum(&missing)
    }

    /// Equality as density operators, up to `tol`.
    pub fn approx_eq(&self, other: &QuantumState, tol: f64) -> Result<bool> {
        let other = other.permuted(&self.registry)?;
        if self.dim() <= DENSE_LIMIT {
            let d = (self.density_matrix()? - other.density_matrix()?).camax();
            return Ok(d <= tol);
        }
        match (self.pure_vector(), other.pure_vector()) {
            (Some(a), Some(b)) => Ok(1.0 - a.dotc(&b).norm_sqr() <= tol),
            _ => Err(Error::TooLarge(self.dim())),
        }
    }

    /// Convex combination of states on a common registry; weights are renormalized.
    pub fn mixture(parts: &[(f64, QuantumState)]) -> Result<Self> {
        let first = parts.first().ok_or(Error::ZeroNorm)?;
        let registry = first.1.registry.clone();
        let total: f64 = parts.iter().map(|(w, _)| *w).sum();
        if total <= 0.0 {
            return Err(Error::ZeroNorm);
        }
        let mut aligned = Vec::with_capacity(parts.len());
        for (w, s) in parts {
            if *w < 0.0 {
                return Err(Error::param("mixture weights must be nonnegative"));
            }
            aligned.push((*w / total, s.permuted(&registry)?));
        }
        let any_dense = aligned.iter().any(|(_, s)| s.is_dense());
        if any_dense {
            let dim = registry.dim();
            let mut rho = CMatrix::zeros(dim, dim);
            for (w, s) in &aligned {
                rho += s.density_matrix()? * C64::new(*w, 0.0);
            }
            return Ok(Self {
                registry,
                repr: Repr::Dense(rho),
            });
        }
        let mut members = Vec::new();
        for (w, s) in aligned {
            for (wm, v) in s.members() {
                members.push((w * wm, v));
            }
        }
        Self::from_ensemble(registry, members)
    }
}

/// Normalized pure state from (basis label, amplitude) pairs.
pub fn build_state(registry: ModeRegistry, spec: &[(&str, C64)]) -> Result<QuantumState> {
    let mut v = CVector::zeros(registry.dim());
    for (label, amp) in spec {
        let i = registry.parse_basis(label)?;
        v[i] += amp;
    }
    if v.norm() == 0.0 {
        return Err(Error::ZeroNorm);
    }
    QuantumState::pure(registry, v)
}

pub fn partial_trace<S: AsRef<str>>(state: &QuantumState, keep: &[S]) -> Result<QuantumState> {
    state.partial_trace(keep)
}

pub fn fidelity(state: &QuantumState, target: &QuantumState) -> Result<f64> {
    state.fidelity(target)
}
