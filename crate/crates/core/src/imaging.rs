//! Intensity reconstruction: quantum Fourier transform of the single-photon
//! register versus sampling pairwise visibilities and transforming classically.

use std::f64::consts::PI;

use crate::qcore::{qft_matrix, CMatrix, QuantumState};
use crate::registry::Registry;
use crate::rng::{binomial, multinomial, trial_rng, SimRng};
use crate::source::{excitation_index, single_photon_rho, VisibilityModel};
use crate::{Error, Result, C64};

#[derive(Clone, Debug, PartialEq)]
pub struct ImagingEstimate {
    pub method: String,
    pub grid: Vec<f64>,
    pub i_hat: Vec<f64>,
    /// Reported variance of each I_hat entry.
    pub variance: Vec<f64>,
    pub shots: u64,
}

/// The N x N block of rho on the single-excitation basis {|1_i>}.
pub fn excitation_block(rho1: &QuantumState) -> Result<CMatrix> {
    let n = rho1.registry().len();
    if n == 0 {
        return Err(Error::param("empty register"));
    }
    let idx: Vec<usize> = (0..n).map(|i| excitation_index(n, i)).collect();
    let block = if rho1.is_dense() {
        let rho = rho1.density_matrix()?;
        CMatrix::from_fn(n, n, |a, b| rho[(idx[a], idx[b])])
    } else {
        let mut out = CMatrix::zeros(n, n);
        for (w, v) in rho1.members() {
            for a in 0..n {
                for b in 0..n {
                    out[(a, b)] += v[idx[a]] * v[idx[b]].conj() * w;
                }
            }
        }
        out
    };
    let inside: f64 = (0..n).map(|i| block[(i, i)].re).sum();
    if (inside - 1.0).abs() > 1e-10 {
        return Err(Error::ProtocolMisuse(format!(
            "register carries weight {inside:.6} in the single-excitation sector"
        )));
    }
    Ok(block)
}

/// Diagonal of U_QFT rho^(1) U_QFT^dagger on the single-excitation sector.
pub fn qft_process(rho1: &QuantumState) -> Result<Vec<f64>> {
    let block = excitation_block(rho1)?;
    let f = qft_matrix(block.nrows());
    let out = &f * block * f.adjoint();
    Ok((0..out.nrows()).map(|j| out[(j, j)].re).collect())
}

/// Multiplicity (N - k) of baseline k = 1..N-1 in a uniform linear array.
pub fn natural_weights(n: usize) -> Vec<usize> {
    (1..n).map(|k| n - k).collect()
}

fn require_uniform(vis: &VisibilityModel) -> Result<()> {
    if !vis.geometry().is_uniform() {
        return Err(Error::param("reconstruction needs a uniform linear array"));
    }
    Ok(())
}

/// Quadrature phase 2 pi x_k y_j.
fn phase(vis: &VisibilityModel, k: usize, y: f64) -> f64 {
    2.0 * PI * vis.geometry().baseline(k) * y
}

/// 1/N + (2/N^2) sum_k (N-k) Re{g^(k) e^{2 pi i x_k y_j}} on the native grid.
pub fn qft_diagonal_closed_form(vis: &VisibilityModel) -> Result<Vec<f64>> {
    require_uniform(vis)?;
    let n = vis.n();
    let nf = n as f64;
    Ok(vis
        .geometry()
        .native_grid()
        .iter()
        .map(|&y| {
            let s: f64 = natural_weights(n)
                .iter()
                .enumerate()
                .map(|(i, &w)| {
                    let k = i + 1;
                    w as f64 * (vis.baseline_visibility(k) * C64::from_polar(1.0, phase(vis, k, y))).re
                })
                .sum();
            1.0 / nf + 2.0 / (nf * nf) * s
        })
        .collect())
}

/// l register measurements after the QFT: multinomial counts over p.
pub fn sample_qft(p: &[f64], grid: &[f64], l: u64, rng: &mut SimRng) -> Result<ImagingEstimate> {
    if l == 0 {
        return Err(Error::param("shot count l must be positive"));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > 1e-10 || p.iter().any(|&x| x < -1e-10) {
        return Err(Error::param("QFT probabilities must form a distribution"));
    }
    let counts = multinomial(rng, l, p);
    let i_hat: Vec<f64> = counts.iter().map(|&c| c as f64 / l as f64).collect();
    let variance = i_hat.iter().map(|&i| i * (1.0 - i) / l as f64).collect();
    Ok(ImagingEstimate {
        method: "qft".into(),
        grid: grid.to_vec(),
        i_hat,
        variance,
        shots: l,
    })
}

/// A reconstruction strategy prepared for one visibility model.
pub trait Estimator: Send + Sync {
    /// Noiseless reconstruction.
    fn exact(&self) -> Vec<f64>;

    /// Expected per-point variance of [`Estimator::estimate`] at `l` shots.
    fn analytic_variance(&self, l: u64) -> Vec<f64>;

    fn estimate(&self, l: u64, rng: &mut SimRng) -> Result<ImagingEstimate>;
}

pub trait ImagingPipeline: Send + Sync {
    fn name(&self) -> &'static str;

    fn prepare(&self, vis: &VisibilityModel) -> Result<Box<dyn Estimator>>;
}

pub struct Qft;

struct QftEstimator {
    p: Vec<f64>,
    grid: Vec<f64>,
}

impl ImagingPipeline for Qft {
    fn name(&self) -> &'static str {
        "qft"
    }

    fn prepare(&self, vis: &VisibilityModel) -> Result<Box<dyn Estimator>> {
        let p = qft_process(&single_photon_rho(vis)?)?;
        Ok(Box::new(QftEstimator {
            p,
            grid: vis.geometry().native_grid(),
        }))
    }
}

impl Estimator for QftEstimator {
    fn exact(&self) -> Vec<f64> {
        self.p.clone()
    }

    fn analytic_variance(&self, l: u64) -> Vec<f64> {
        self.p.iter().map(|&p| (p * (1.0 - p) / l as f64).max(0.0)).collect()
    }

    fn estimate(&self, l: u64, rng: &mut SimRng) -> Result<ImagingEstimate> {
        sample_qft(&self.p, &self.grid, l, rng)
    }
}

/// Sample-then-transform reconstruction. Every grid point gets its own l rounds;
/// a round yields a pair (i, j) whose product measurement
/// X (x) (cos phi X - sin phi Y), phi = 2 pi x_k y_j, has mean Re{g^(k) e^{i phi}}.
///
/// `w_state` rounds go through the W-state readout (retry probability 1/N,
/// pair probability (rho_ii + rho_jj)/N); otherwise every round picks a pair uniformly.
pub struct Classical {
    pub w_state: bool,
}

struct Pair {
    k: usize,
    prob: f64,
    /// Pair-state coherence rho_ij / (rho_ii + rho_jj) * 2, i.e. g_ij for rho = g/N.
    g: C64,
}

struct ClassicalEstimator {
    method: &'static str,
    n: usize,
    grid: Vec<f64>,
    pairs: Vec<Pair>,
    /// Product-outcome mean per (grid point, pair).
    means: Vec<Vec<f64>>,
}

impl ImagingPipeline for Classical {
    fn name(&self) -> &'static str {
        if self.w_state {
            "classical"
        } else {
            "classical-direct"
        }
    }

    fn prepare(&self, vis: &VisibilityModel) -> Result<Box<dyn Estimator>> {
        require_uniform(vis)?;
        let n = vis.n();
        let block = excitation_block(&single_photon_rho(vis)?)?;
        let npairs = n * (n - 1) / 2;
        let mut pairs = Vec::with_capacity(npairs);
        for i in 0..n {
            for j in i + 1..n {
                let pop = block[(i, i)].re + block[(j, j)].re;
                let prob = if self.w_state { pop / n as f64 } else { 1.0 / npairs as f64 };
                let g = if pop > 0.0 { block[(i, j)] * (2.0 / pop) } else { C64::new(0.0, 0.0) };
                pairs.push(Pair { k: j - i, prob, g });
            }
        }
        let grid = vis.geometry().native_grid();
        let means = grid
            .iter()
            .map(|&y| {
                pairs
                    .iter()
                    .map(|p| (p.g * C64::from_polar(1.0, -phase(vis, p.k, y))).re)
                    .collect()
            })
            .collect();
        Ok(Box::new(ClassicalEstimator {
            method: self.name(),
            n,
            grid,
            pairs,
            means,
        }))
    }
}

impl ClassicalEstimator {
    fn combine(&self, q: &[f64]) -> f64 {
        let nf = self.n as f64;
        let s: f64 = natural_weights(self.n)
            .iter()
            .zip(q)
            .map(|(&w, &qk)| w as f64 * qk)
            .sum();
        1.0 / nf + 2.0 / (nf * nf) * s
    }

    fn weight_sq(&self, k: usize) -> f64 {
        let nf = self.n as f64;
        4.0 * ((self.n - k) as f64).powi(2) / nf.powi(4)
    }
}

impl Estimator for ClassicalEstimator {
    fn exact(&self) -> Vec<f64> {
        self.means
            .iter()
            .map(|row| {
                let mut q = vec![0.0; self.n - 1];
                let mut w = vec![0.0; self.n - 1];
                for (p, &e) in self.pairs.iter().zip(row) {
                    q[p.k - 1] += p.prob * e;
                    w[p.k - 1] += p.prob;
                }
                let q: Vec<f64> = q.iter().zip(&w).map(|(a, b)| if *b > 0.0 { a / b } else { 0.0 }).collect();
                self.combine(&q)
            })
            .collect()
    }

    fn analytic_variance(&self, l: u64) -> Vec<f64> {
        self.means
            .iter()
            .map(|row| {
                let mut var = 0.0;
                for k in 1..self.n {
                    let (mut nk, mut second) = (0.0, 0.0);
                    let mut mean = 0.0;
                    for (p, &e) in self.pairs.iter().zip(row).filter(|(p, _)| p.k == k) {
                        nk += p.prob * l as f64;
                        mean += p.prob * e;
                        second += p.prob;
                    }
                    if nk > 0.0 {
                        let m = mean / second;
                        var += self.weight_sq(k) * (1.0 - m * m).max(0.0) / nk;
                    }
                }
                var
            })
            .collect()
    }

    fn estimate(&self, l: u64, rng: &mut SimRng) -> Result<ImagingEstimate> {
        if l == 0 {
            return Err(Error::param("shot count l must be positive"));
        }
        let mut probs: Vec<f64> = self.pairs.iter().map(|p| p.prob).collect();
        let retry = (1.0 - probs.iter().sum::<f64>()).max(0.0);
        probs.push(retry);
        let mut i_hat = Vec::with_capacity(self.grid.len());
        let mut variance = Vec::with_capacity(self.grid.len());
        for row in &self.means {
            let counts = multinomial(rng, l, &probs);
            let mut sum = vec![0.0; self.n - 1];
            let mut nk = vec![0u64; self.n - 1];
            for ((p, &e), &c) in self.pairs.iter().zip(row).zip(&counts) {
                let plus = binomial(rng, c, (1.0 + e) / 2.0);
                sum[p.k - 1] += 2.0 * plus as f64 - c as f64;
                nk[p.k - 1] += c;
            }
            let mut q = vec![0.0; self.n - 1];
            let mut var = 0.0;
            for k in 1..self.n {
                let n = nk[k - 1];
                if n == 0 {
                    // unobserved baseline: estimate 0 with the variance of a single shot
                    var += self.weight_sq(k);
                    continue;
                }
                let m = sum[k - 1] / n as f64;
                q[k - 1] = m;
                var += self.weight_sq(k) * (1.0 - m * m) / n as f64;
            }
            i_hat.push(self.combine(&q));
            variance.push(var);
        }
        Ok(ImagingEstimate {
            method: self.method.into(),
            grid: self.grid.clone(),
            i_hat,
            variance,
            shots: l,
        })
    }
}

/// All imaging pipelines by name.
pub fn pipelines() -> Registry<dyn ImagingPipeline> {
    let qft: Box<dyn ImagingPipeline> = Box::new(Qft);
    let w: Box<dyn ImagingPipeline> = Box::new(Classical { w_state: true });
    let direct: Box<dyn ImagingPipeline> = Box::new(Classical { w_state: false });
    Registry::new("imaging pipeline")
        .with("qft", qft)
        .with("classical", w)
        .with("classical-direct", direct)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SnrRow {
    pub j: usize,
    pub y: f64,
    pub i_true: f64,
    pub qft_mean: f64,
    pub qft_var: f64,
    pub qft_var_analytic: f64,
    pub classical_mean: f64,
    pub classical_var: f64,
    pub classical_var_analytic: f64,
    /// Empirical classical / QFT variance; infinite when the QFT variance vanishes.
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SnrReport {
    pub n: usize,
    pub shots: u64,
    pub trials: usize,
    pub classical_method: String,
    pub rows: Vec<SnrRow>,
    /// Every QFT estimate was identical across trials.
    pub qft_zero_variance: bool,
    /// One-sided comparison of the classical variance with 1/l at every point.
    pub classical_above_inverse_l: bool,
}

impl SnrReport {
    /// Relative standard error of an empirical variance ratio over `trials` runs.
    pub fn ratio_rel_sigma(&self) -> f64 {
        (4.0 / (self.trials as f64 - 1.0)).sqrt()
    }

    /// Mean empirical ratio over points with nonzero QFT variance.
    pub fn mean_ratio(&self) -> f64 {
        let r: Vec<f64> = self.rows.iter().map(|r| r.ratio).filter(|r| r.is_finite()).collect();
        if r.is_empty() {
            f64::INFINITY
        } else {
            r.iter().sum::<f64>() / r.len() as f64
        }
    }
}

fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = if xs.len() > 1 {
        xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, var)
}

/// Runs the QFT and a classical pipeline for `trials` seeds at matched `l` and
/// compares their empirical per-point variances.
pub fn snr_report(vis: &VisibilityModel, l: u64, seed: u64, trials: usize, classical: &str) -> Result<SnrReport> {
    if trials < 2 {
        return Err(Error::param("need at least two trials for an empirical variance"));
    }
    let reg = pipelines();
    let qft = reg.get("qft")?.prepare(vis)?;
    let cl = reg.get(classical)?.prepare(vis)?;
    let n = vis.n();
    let mut q_runs = vec![Vec::with_capacity(trials); n];
    let mut c_runs = vec![Vec::with_capacity(trials); n];
    for t in 0..trials as u64 {
        let q = qft.estimate(l, &mut trial_rng(seed, 2 * t))?;
        let c = cl.estimate(l, &mut trial_rng(seed, 2 * t + 1))?;
        for j in 0..n {
            q_runs[j].push(q.i_hat[j]);
            c_runs[j].push(c.i_hat[j]);
        }
    }
    let truth = qft.exact();
    let qa = qft.analytic_variance(l);
    let ca = cl.analytic_variance(l);
    let grid = vis.geometry().native_grid();
    let mut rows = Vec::with_capacity(n);
    for j in 0..n {
        let (qm, qv) = mean_var(&q_runs[j]);
        let (cm, cv) = mean_var(&c_runs[j]);
        rows.push(SnrRow {
            j,
            y: grid[j],
            i_true: truth[j],
            qft_mean: qm,
            qft_var: qv,
            qft_var_analytic: qa[j],
            classical_mean: cm,
            classical_var: cv,
            classical_var_analytic: ca[j],
            ratio: if qv > 0.0 { cv / qv } else { f64::INFINITY },
        });
    }
    let qft_zero_variance = rows.iter().all(|r| r.qft_var == 0.0);
    let classical_above_inverse_l = rows.iter().all(|r| r.classical_var >= 1.0 / l as f64);
    Ok(SnrReport {
        n,
        shots: l,
        trials,
        classical_method: classical.to_string(),
        rows,
        qft_zero_variance,
        classical_above_inverse_l,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netdecode::{pair_state, quadrature_correlator, w_state_readout, EntangledResource, ResourceKind, WOutcome};
    use crate::rng::seeded;
    use crate::source::{site_label, visibility_from_intensity, ArrayGeometry, IntensityDistribution};
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn two_site(g: f64) -> VisibilityModel {
        let geom = ArrayGeometry::linear(2, 1.0).unwrap();
        VisibilityModel::from_baselines(geom, &[c(g, 0.)], 0.01).unwrap()
    }

    #[test]
    fn two_site_hadamard() {
        for g in [0.0, 0.6, -0.3, 1.0] {
            let p = qft_process(&single_photon_rho(&two_site(g)).unwrap()).unwrap();
            // oracle: H (1/2)[[1,g],[g,1]] H
            assert!((p[0] - (1.0 + g) / 2.0).abs() < 1e-12);
            assert!((p[1] - (1.0 - g) / 2.0).abs() < 1e-12);
        }
        let cf = qft_diagonal_closed_form(&two_site(1.0)).unwrap();
        assert!((cf[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn point_and_flat_sources() {
        let geom = ArrayGeometry::linear(5, 2.0).unwrap();
        let y3 = geom.native_grid()[3];
        let vis = visibility_from_intensity(&IntensityDistribution::point(y3), &geom);
        let p = qft_process(&single_photon_rho(&vis).unwrap()).unwrap();
        for (j, pj) in p.iter().enumerate() {
            assert!((pj - if j == 3 { 1.0 } else { 0.0 }).abs() < 1e-10);
        }
        let est = sample_qft(&p, &geom.native_grid(), 1000, &mut seeded(1)).unwrap();
        assert_eq!(est.i_hat[3], 1.0);
        assert!(est.variance.iter().all(|&v| v == 0.0));

        let vis = visibility_from_intensity(&IntensityDistribution::flat_on_grid(&geom), &geom);
        for pj in qft_process(&single_photon_rho(&vis).unwrap()).unwrap() {
            assert!((pj - 0.2).abs() < 1e-12);
        }
        let zero = VisibilityModel::from_baselines(geom, &[c(0., 0.); 4], 0.01).unwrap();
        for pj in qft_diagonal_closed_form(&zero).unwrap() {
            assert!((pj - 0.2).abs() < 1e-15);
        }
    }

    #[test]
    fn natural_weights_are_baseline_multiplicities() {
        for n in 2..=9 {
            let geom = ArrayGeometry::linear(n, 1.0).unwrap();
            let x = geom.positions();
            for (i, &w) in natural_weights(n).iter().enumerate() {
                let k = i + 1;
                let mult = (0..n)
                    .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
                    .filter(|&(a, b)| ((x[b] - x[a]) - geom.baseline(k)).abs() < 1e-12)
                    .count();
                assert_eq!(w, mult);
            }
        }
    }

    #[test]
    fn sample_qft_errors_and_spread() {
        assert!(sample_qft(&[0.5, 0.5], &[0., 1.], 0, &mut seeded(1)).is_err());
        let p = vec![0.25; 4];
        let est = sample_qft(&p, &[0.; 4], 100_000, &mut seeded(9)).unwrap();
        let se = (0.25f64 * 0.75 / 1e5).sqrt();
        assert!((se - 1.37e-3).abs() < 1e-5);
        for v in &est.i_hat {
            assert!((v - 0.25).abs() < 3.0 * se);
        }
    }

    #[test]
    fn classical_means_agree_with_w_readout() {
        // the estimator's pair probabilities and quadrature means against the
        // explicit W-state readout and correlator measurement
        let n = 4;
        let geom = ArrayGeometry::linear(n, 1.3).unwrap();
        let src = IntensityDistribution::new(vec![(0.0, 0.4), (0.3, 0.35), (0.55, 0.25)]).unwrap();
        let vis = visibility_from_intensity(&src, &geom);
        let rho = single_photon_rho(&vis).unwrap();
        let labels: Vec<String> = (0..n).map(site_label).collect();
        let w = EntangledResource::new(ResourceKind::W, &["w0", "w1", "w2", "w3"]).unwrap();
        let branches = w_state_readout(&rho, &labels, &w).unwrap();
        let est = Classical { w_state: true }.prepare(&vis).unwrap();
        let cf = qft_diagonal_closed_form(&vis).unwrap();
        let exact = est.exact();
        for j in 0..n {
            assert!((exact[j] - cf[j]).abs() < 1e-12);
        }
        let y = geom.native_grid();
        for b in branches {
            if let WOutcome::Pair(i, k) = b.outcome {
                let pair = pair_state(&b.state, &labels, i, k).unwrap();
                let phi = 2.0 * PI * geom.baseline(k - i) * y[2];
                let q = quadrature_correlator(&pair, phi).unwrap();
                let want = (vis.baseline_visibility(k - i) * C64::from_polar(1.0, phi)).re;
                assert!((q - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn flat_variances_have_closed_forms() {
        let n = 4;
        let geom = ArrayGeometry::linear(n, 1.0).unwrap();
        let vis = visibility_from_intensity(&IntensityDistribution::flat_on_grid(&geom), &geom);
        let l = 1000;
        let nf = n as f64;
        let q = Qft.prepare(&vis).unwrap().analytic_variance(l);
        let w = Classical { w_state: true }.prepare(&vis).unwrap().analytic_variance(l);
        let d = Classical { w_state: false }.prepare(&vis).unwrap().analytic_variance(l);
        for j in 0..n {
            assert!((q[j] - (nf - 1.0) / (nf * nf * l as f64)).abs() < 1e-15);
            assert!((w[j] - (nf - 1.0) / (nf * l as f64)).abs() < 1e-15);
            assert!((d[j] - (nf - 1.0).powi(2) / (nf * nf * l as f64)).abs() < 1e-15);
        }
    }

    #[test]
    fn point_source_report() {
        let geom = ArrayGeometry::linear(3, 1.0).unwrap();
        let vis = visibility_from_intensity(&IntensityDistribution::point(geom.native_grid()[1]), &geom);
        let rep = snr_report(&vis, 2000, 4, 20, "classical").unwrap();
        assert!(rep.qft_zero_variance);
        // quadratures are deterministic at the source point only
        assert_eq!(rep.rows[1].classical_var, 0.0);
        assert!(rep.rows[0].classical_var > 0.0 && rep.rows[2].classical_var > 0.0);
    }

    #[test]
    fn two_site_unbiased() {
        let vis = two_site(0.6);
        let rep = snr_report(&vis, 5000, 8, 200, "classical").unwrap();
        for r in &rep.rows {
            let se_q = (r.qft_var / rep.trials as f64).sqrt();
            let se_c = (r.classical_var / rep.trials as f64).sqrt();
            assert!((r.qft_mean - r.i_true).abs() < 3.0 * se_q);
            assert!((r.classical_mean - r.i_true).abs() < 3.0 * se_c);
        }
    }

    #[test]
    fn registry_names() {
        assert_eq!(pipelines().names(), vec!["classical", "classical-direct", "qft"]);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn closed_form_matches_conjugation(
            n in 2usize..=8,
            ws in proptest::collection::vec(0.0f64..1.0, 8),
        ) {
            prop_assume!(ws[..n].iter().sum::<f64>() > 1e-3);
            let geom = ArrayGeometry::linear(n, 1.0).unwrap();
            let vis = visibility_from_intensity(&IntensityDistribution::on_grid(&geom, &ws[..n]).unwrap(), &geom);
            let p = qft_process(&single_photon_rho(&vis).unwrap()).unwrap();
            let cf = qft_diagonal_closed_form(&vis).unwrap();
            let total: f64 = p.iter().sum();
            prop_assert!((total - 1.0).abs() < 1e-10);
            let norm: f64 = ws[..n].iter().sum();
            for j in 0..n {
                prop_assert!(p[j] >= -1e-10);
                prop_assert!((p[j] - cf[j]).abs() < 1e-10);
                prop_assert!((p[j] - ws[j] / norm).abs() < 1e-10);
            }
        }
    }
}
