//! Stellar light model: array geometry, intensity samples, visibilities and
//! the photonic density matrices seen by the sites.

use std::f64::consts::PI;
use std::path::Path;

use nalgebra::SymmetricEigen;

use crate::qcore::{CMatrix, CVector, ModeRegistry, QuantumState, PIPELINE_TOL, STRUCT_TOL};
use crate::{Error, Result, C64};

/// Default mean photon number per time bin.
pub const DEFAULT_EPSILON: f64 = 0.01;

/// Above this the weak-source approximation is questionable.
pub const EPSILON_WARN: f64 = 0.1;

/// Label of the memory qubit at site `i` in single-excitation registers.
pub fn site_label(i: usize) -> String {
    format!("s{i}")
}

/// Rejects eps outside (0, 1) and warns above [`EPSILON_WARN`].
pub fn check_epsilon(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::param(format!("eps = {eps} must lie in (0, 1)")));
    }
    if eps > EPSILON_WARN {
        log::warn!("eps = {eps} exceeds {EPSILON_WARN}; the one-photon approximation degrades");
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct ArrayGeometry {
    positions: Vec<f64>,
    uniform: bool,
}

impl ArrayGeometry {
    /// N sites evenly spread over [0, d].
    pub fn linear(n: usize, d: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::param("an array needs at least two sites"));
        }
        if !(d > 0.0 && d.is_finite()) {
            return Err(Error::param("maximal baseline must be positive"));
        }
        let positions = (0..n).map(|i| d * i as f64 / (n - 1) as f64).collect();
        Ok(Self {
            positions,
            uniform: true,
        })
    }

    pub fn explicit(positions: Vec<f64>) -> Result<Self> {
        if positions.len() < 2 {
            return Err(Error::param("an array needs at least two sites"));
        }
        if positions.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::param("site positions must be strictly increasing"));
        }
        let n = positions.len();
        let d = positions[n - 1] - positions[0];
        let uniform = positions
            .iter()
            .enumerate()
            .all(|(i, x)| (x - positions[0] - d * i as f64 / (n - 1) as f64).abs() <= 1e-12 * d.max(1.0));
        Ok(Self { positions, uniform })
    }

    pub fn n(&self) -> usize {
        self.positions.len()
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn max_baseline(&self) -> f64 {
        self.positions[self.n() - 1] - self.positions[0]
    }

    pub fn is_uniform(&self) -> bool {
        self.uniform
    }

    /// x_k = d k / (N - 1)
    pub fn baseline(&self, k: usize) -> f64 {
        self.max_baseline() * k as f64 / (self.n() - 1) as f64
    }

    /// Reconstruction grid y_j = (N - 1) j / (N d).
    pub fn native_grid(&self) -> Vec<f64> {
        let n = self.n() as f64;
        let d = self.max_baseline();
        (0..self.n()).map(|j| (n - 1.0) * j as f64 / (n * d)).collect()
    }
}

/// Normalized nonnegative intensity samples (y_j, I_j).
#[derive(Clone, Debug, PartialEq)]
pub struct IntensityDistribution {
    samples: Vec<(f64, f64)>,
}

impl IntensityDistribution {
    /// Weights are renormalized to sum to one.
    pub fn new(samples: Vec<(f64, f64)>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::param("intensity distribution has no samples"));
        }
        if samples.iter().any(|&(y, w)| !(w >= 0.0) || !y.is_finite() || !w.is_finite()) {
            return Err(Error::param("intensities must be finite and nonnegative"));
        }
        let total: f64 = samples.iter().map(|s| s.1).sum();
        if total <= 0.0 {
            return Err(Error::ZeroNorm);
        }
        Ok(Self {
            samples: samples.into_iter().map(|(y, w)| (y, w / total)).collect(),
        })
    }

    pub fn point(y: f64) -> Self {
        Self {
            samples: vec![(y, 1.0)],
        }
    }

    /// Weights placed on the native grid of `geom`.
    pub fn on_grid(geom: &ArrayGeometry, weights: &[f64]) -> Result<Self> {
        if weights.len() != geom.n() {
            return Err(Error::DimensionMismatch {
                expected: geom.n(),
                found: weights.len(),
            });
        }
        Self::new(geom.native_grid().into_iter().zip(weights.iter().copied()).collect())
    }

    pub fn flat_on_grid(geom: &ArrayGeometry) -> Self {
        Self::on_grid(geom, &vec![1.0; geom.n()]).expect("uniform weights are valid")
    }

    /// Two columns `y I` per line; blank lines and lines starting with '#' are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut samples = Vec::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line
                .split(|ch: char| ch.is_whitespace() || ch == ',')
                .filter(|s| !s.is_empty())
                .collect();
            if cols.len() != 2 {
                return Err(Error::Parse {
                    line: no + 1,
                    msg: format!("expected 2 columns, found {}", cols.len()),
                });
            }
            let num = |s: &str| {
                s.parse::<f64>().map_err(|e| Error::Parse {
                    line: no + 1,
                    msg: format!("`{s}`: {e}"),
                })
            };
            samples.push((num(cols[0])?, num(cols[1])?));
        }
        Self::new(samples)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn samples(&self) -> &[(f64, f64)] {
        &self.samples
    }

    /// g(x) = sum_j I_j exp(-2 pi i x y_j)
    pub fn visibility_at(&self, x: f64) -> C64 {
        self.samples
            .iter()
            .map(|&(y, w)| C64::from_polar(w, -2.0 * PI * x * y))
            .sum()
    }

    /// Weights resampled onto `geom`'s native grid; samples off the grid are rejected.
    pub fn grid_weights(&self, geom: &ArrayGeometry) -> Result<Vec<f64>> {
        let grid = geom.native_grid();
        let step = grid[1] - grid[0];
        let mut out = vec![0.0; grid.len()];
        for &(y, w) in &self.samples {
            let j = (y / step).round();
            if j < 0.0 || j as usize >= grid.len() || (y - grid[j as usize]).abs() > 1e-9 * step {
                return Err(Error::param(format!("sample at y = {y} is off the native grid")));
            }
            out[j as usize] += w;
        }
        Ok(out)
    }
}

/// Geometry plus the visibility matrix g_{ij} and the per-bin photon number.
#[derive(Clone, Debug)]
pub struct VisibilityModel {
    geometry: ArrayGeometry,
    g: CMatrix,
    epsilon: f64,
}

impl VisibilityModel {
    /// Checks unit diagonal and hermiticity; positivity is checked where a state is built.
    pub fn new(geometry: ArrayGeometry, g: CMatrix, epsilon: f64) -> Result<Self> {
        let n = geometry.n();
        if g.nrows() != n || g.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: g.nrows(),
            });
        }
        check_epsilon(epsilon)?;
        for i in 0..n {
            if (g[(i, i)] - C64::new(1.0, 0.0)).norm() > STRUCT_TOL {
                return Err(Error::Unphysical(format!("g[{i},{i}] != 1")));
            }
        }
        if (&g - g.adjoint()).camax() > STRUCT_TOL {
            return Err(Error::Unphysical("visibility matrix is not hermitian".into()));
        }
        Ok(Self {
            geometry,
            g,
            epsilon,
        })
    }

    /// Toeplitz model from baseline visibilities g^{(k)}, k = 1..N-1.
    pub fn from_baselines(geometry: ArrayGeometry, gk: &[C64], epsilon: f64) -> Result<Self> {
        let n = geometry.n();
        if gk.len() != n - 1 {
            return Err(Error::DimensionMismatch {
                expected: n - 1,
                found: gk.len(),
            });
        }
        let g = CMatrix::from_fn(n, n, |i, j| match i.cmp(&j) {
            std::cmp::Ordering::Equal => C64::new(1.0, 0.0),
            std::cmp::Ordering::Greater => gk[i - j - 1],
            std::cmp::Ordering::Less => gk[j - i - 1].conj(),
        });
        Self::new(geometry, g, epsilon)
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Result<Self> {
        check_epsilon(epsilon)?;
        self.epsilon = epsilon;
        Ok(self)
    }

    pub fn geometry(&self) -> &ArrayGeometry {
        &self.geometry
    }

    pub fn n(&self) -> usize {
        self.geometry.n()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.g
    }

    pub fn g(&self, i: usize, j: usize) -> C64 {
        self.g[(i, j)]
    }

    /// g^{(k)} = g(x_k) = g_{k,0}.
    pub fn baseline_visibility(&self, k: usize) -> C64 {
        self.g[(k, 0)]
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }
}

pub fn visibility_from_intensity(intensity: &IntensityDistribution, geom: &ArrayGeometry) -> VisibilityModel {
    let x = geom.positions();
    let n = geom.n();
    let g = CMatrix::from_fn(n, n, |i, j| {
        if i == j {
            C64::new(1.0, 0.0)
        } else {
            intensity.visibility_at(x[i] - x[j])
        }
    });
    VisibilityModel {
        geometry: geom.clone(),
        g,
        epsilon: DEFAULT_EPSILON,
    }
}

/// Basis index of |1_i> in an N-qubit register (site 0 most significant).
pub fn excitation_index(n: usize, i: usize) -> usize {
    1 << (n - 1 - i)
}

/// rho^(1) = g / N on the single-excitation sector of N memory qubits `s0..`.
pub fn single_photon_rho(vis: &VisibilityModel) -> Result<QuantumState> {
    let n = vis.n();
    let labels: Vec<String> = (0..n).map(site_label).collect();
    let reg = ModeRegistry::qubits(&labels)?;
    let block = vis.matrix() / C64::new(n as f64, 0.0);
    let eig = SymmetricEigen::new(block);
    let min = eig.eigenvalues.min();
    if min < -PIPELINE_TOL {
        return Err(Error::Unphysical(format!(
            "visibility matrix is not positive semidefinite (eigenvalue {min:.3e})"
        )));
    }
    let dim = reg.dim();
    let mut members = Vec::new();
    for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
        if lambda > 1e-14 {
            let mut v = CVector::zeros(dim);
            for i in 0..n {
                v[excitation_index(n, i)] = eig.eigenvectors[(i, k)];
            }
            members.push((lambda, v));
        }
    }
    QuantumState::from_ensemble(reg, members)
}

/// Mode labels of the two-site, two-band photonic state: band-major, site-minor.
pub const BROADBAND_MODES: [&str; 4] = ["b1s1", "b1s2", "b2s1", "b2s2"];

/// (1 - eps) vacuum + (eps/2) band-1 photon + (eps/2) band-2 photon, with no
/// coherence across bands.
pub fn broadband_two_site_rho(eps: f64, g1: C64, g2: C64) -> Result<QuantumState> {
    check_epsilon(eps)?;
    if g1.norm() > 1.0 + STRUCT_TOL || g2.norm() > 1.0 + STRUCT_TOL {
        return Err(Error::param("|g| must not exceed 1"));
    }
    let mut reg = ModeRegistry::new();
    for l in BROADBAND_MODES {
        reg = reg.with_fock(l, 1)?;
    }
    let idx = |s: &str| reg.parse_basis(s).expect("static label");
    let mut rho = CMatrix::zeros(16, 16);
    rho[(0, 0)] = C64::new(1.0 - eps, 0.0);
    for (g, a, b) in [(g1, "1000", "0100"), (g2, "0010", "0001")] {
        let (ia, ib) = (idx(a), idx(b));
        let w = eps / 4.0;
        rho[(ia, ia)] += w;
        rho[(ib, ib)] += w;
        rho[(ia, ib)] += g * w;
        rho[(ib, ia)] += g.conj() * w;
    }
    QuantumState::from_density(reg, rho)
}
