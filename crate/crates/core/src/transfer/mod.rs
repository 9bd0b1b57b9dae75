//! Photon-detection-based state transfer.
//!
//! The stellar mode, already entangled with the memory by the encoding CNOTs,
//! is mixed with ancilla light and counted; a count-dependent phase on the
//! memory finishes the transfer. Strategies differ in the ancilla, the
//! splitter and the detectors, and are looked up by name in [`strategies`].

mod network;
mod sweep;
mod table;

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::str::FromStr;

pub use network::{
    binomial_coefficient, network_fidelity, network_formulas, network_monte_carlo, network_p_fail, network_p_k,
    w_network_fidelity, NetworkFormulas, NetworkSample,
};
pub use sweep::{alpha_grid, alpha_sweep, golden_max, heralded_optimum, lossy_curve, LossyPoint, SweepPoint};
pub use table::{
    coherent_amplitude_table, fock_amplitude_table, multiport_site_table, AmplitudeTable, AncillaState, SiteOutcome,
    SiteTable, PRUNE_WEIGHT, TABLE_LEAKAGE,
};

use crate::qcore::{min_coherent_cutoff, CMatrix, CVector, ModeRegistry, QuantumState};
use crate::registry::Registry;
use crate::{Error, Result, C64};

/// Accepted-branch fidelity bound used by the heralding checks.
pub const HERALD_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TransferMode {
    /// Every outcome accepted and corrected.
    Deterministic,
    /// Only outcomes passing the strategy's herald rule.
    Heralded,
}

impl FromStr for TransferMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "deterministic" => Ok(Self::Deterministic),
            "heralded" => Ok(Self::Heralded),
            _ => Err(Error::param(format!("unknown transfer mode `{s}`"))),
        }
    }
}

impl fmt::Display for TransferMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Deterministic => "deterministic",
            Self::Heralded => "heralded",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TransferConfig {
    /// Coherent ancilla amplitude.
    pub alpha: C64,
    /// Multiport ancillas, one per extra port.
    pub ancillas: Vec<AncillaState>,
    pub mode: TransferMode,
    /// Detector amplitude transmission.
    pub eta: f64,
    /// Phase of the incoming light.
    pub theta: f64,
    /// Overrides the coherent cutoff policy.
    pub cutoff: Option<usize>,
}

impl Default for TransferConfig {
    fn default() -> Self {
        Self {
            alpha: C64::new(1.0, 0.0),
            ancillas: vec![AncillaState::Plus],
            mode: TransferMode::Deterministic,
            eta: 1.0,
            theta: 0.0,
            cutoff: None,
        }
    }
}

impl TransferConfig {
    pub fn coherent(alpha: f64, mode: TransferMode) -> Self {
        Self {
            alpha: C64::new(alpha, 0.0),
            mode,
            ..Self::default()
        }
    }

    /// P copies of the |+> superposition.
    pub fn multiport(ports: usize, mode: TransferMode) -> Self {
        Self {
            ancillas: vec![AncillaState::Plus; ports],
            mode,
            ..Self::default()
        }
    }

    pub fn lossy(eta: f64) -> Self {
        Self {
            eta,
            mode: TransferMode::Heralded,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.eta) {
            return Err(Error::param(format!("eta = {} outside [0, 1]", self.eta)));
        }
        if self.ancillas.is_empty() {
            return Err(Error::param("need P >= 1 ancillas"));
        }
        if !self.alpha.re.is_finite() || !self.alpha.im.is_finite() || !self.theta.is_finite() {
            return Err(Error::param("alpha and theta must be finite"));
        }
        Ok(())
    }

    pub fn coherent_cutoff(&self) -> usize {
        self.cutoff.unwrap_or_else(|| min_coherent_cutoff(self.alpha.norm()))
    }
}

/// One enumerated detection event.
#[derive(Clone, Debug)]
pub struct TransferOutcome {
    /// Counts per detector port, one entry per site.
    pub counts: Vec<Vec<usize>>,
    /// Herald verdict of the strategy.
    pub accepted: bool,
    /// Phase applied to |1bar> at each site.
    pub correction: Vec<f64>,
    pub probability: f64,
    /// Fidelity of the corrected memory with the target; NaN for impossible outcomes.
    pub fidelity: f64,
    /// Corrected memory state, absent for impossible outcomes.
    pub memory: Option<QuantumState>,
}

#[derive(Clone, Debug)]
pub struct TransferReport {
    pub strategy: &'static str,
    pub sites: usize,
    pub mode: TransferMode,
    /// Fidelity and probability in the configured mode.
    pub fidelity: f64,
    pub probability: f64,
    pub deterministic_fidelity: f64,
    pub heralded_probability: f64,
    /// Mean fidelity over heralded outcomes; NaN when none can occur.
    pub heralded_fidelity: f64,
    pub min_heralded_fidelity: f64,
    /// Probability summed over every enumerated outcome.
    pub total_probability: f64,
    pub outcomes: usize,
    pub table: SiteTable,
}

impl TransferReport {
    /// Per-site heralding probability implied by the joint one, sqrt(p).
    pub fn per_site_probability(&self) -> f64 {
        if self.sites == 2 {
            self.heralded_probability.sqrt()
        } else {
            self.heralded_probability
        }
    }
}

pub trait TransferStrategy: Send + Sync {
    fn name(&self) -> &'static str;

    /// 1 for a memory-photon pair at one site, 2 for the two-site Bell-like input.
    fn sites(&self) -> usize;

    fn site_table(&self, cfg: &TransferConfig) -> Result<SiteTable>;

    /// Herald rule over the per-site outcomes of one joint event.
    fn heralds(&self, outcomes: &[&SiteOutcome]) -> bool;

    fn run(&self, cfg: &TransferConfig) -> Result<TransferReport> {
        cfg.validate()?;
        let table = self.site_table(cfg)?;
        let report = match self.sites() {
            1 => single_site_report(self, table, cfg.mode),
            2 => two_site_report(self, table, cfg.mode),
            n => return Err(Error::param(format!("{n}-site transfer is not supported"))),
        };
        Ok(report)
    }
}

fn sum_stats(
    stats: impl Iterator<Item = (bool, f64, f64)>,
) -> (f64, f64, f64, f64, f64, usize) {
    let (mut total, mut det, mut acc_p, mut acc_pf) = (0.0, 0.0, 0.0, 0.0);
    let mut min_f = f64::INFINITY;
    let mut count = 0;
    for (accepted, p, pf) in stats {
        count += 1;
        total += p;
        det += pf;
        if accepted && p > 0.0 {
            acc_p += p;
            acc_pf += pf;
            min_f = min_f.min(pf / p);
        }
    }
    (total, det, acc_p, acc_pf, min_f, count)
}

fn finish(
    (strategy, sites): (&'static str, usize),
    table: SiteTable,
    mode: TransferMode,
    (total, det, acc_p, acc_pf, min_f, count): (f64, f64, f64, f64, f64, usize),
) -> TransferReport {
    let her_f = if acc_p > 0.0 { acc_pf / acc_p } else { f64::NAN };
    let (fidelity, probability) = match mode {
        TransferMode::Deterministic => (det / total, total),
        TransferMode::Heralded => (her_f, acc_p),
    };
    TransferReport {
        strategy,
        sites,
        mode,
        fidelity,
        probability,
        deterministic_fidelity: det / total,
        heralded_probability: acc_p,
        heralded_fidelity: her_f,
        min_heralded_fidelity: if acc_p > 0.0 { min_f } else { f64::NAN },
        total_probability: total,
        outcomes: count,
        table,
    }
}

/// (p, p*f) of a single-site pattern after its correction.
fn single_stats(o: &SiteOutcome) -> (f64, f64) {
    (o.probability(), (o.w0 + o.w1 + 2.0 * o.coh.norm()) / 4.0)
}

/// (p, p*f) of a two-site pattern after both corrections.
fn pair_stats(a: &SiteOutcome, b: &SiteOutcome) -> (f64, f64) {
    let diag = a.w0 * b.w1 + a.w1 * b.w0;
    (diag / 2.0, (diag + 2.0 * a.coh.norm() * b.coh.norm()) / 4.0)
}

fn single_site_report<S: TransferStrategy + ?Sized>(s: &S, table: SiteTable, mode: TransferMode) -> TransferReport {
    let stats = sum_stats(table.outcomes.iter().map(|o| {
        let (p, pf) = single_stats(o);
        (s.heralds(&[o]), p, pf)
    }));
    finish((s.name(), s.sites()), table, mode, stats)
}

fn two_site_report<S: TransferStrategy + ?Sized>(s: &S, table: SiteTable, mode: TransferMode) -> TransferReport {
    let out = &table.outcomes;
    let stats = sum_stats(out.iter().flat_map(|a| {
        out.iter().map(move |b| {
            let (p, pf) = pair_stats(a, b);
            (s.heralds(&[a, b]), p, pf)
        })
    }));
    finish((s.name(), s.sites()), table, mode, stats)
}

/// Every detection event with its corrected memory state at input phase `cfg.theta`.
pub fn outcome_table(strategy: &dyn TransferStrategy, cfg: &TransferConfig) -> Result<Vec<TransferOutcome>> {
    cfg.validate()?;
    let table = strategy.site_table(cfg)?;
    let phase = C64::from_polar(1.0, cfg.theta);
    let mut rows = Vec::new();
    match strategy.sites() {
        1 => {
            let reg = ModeRegistry::qubits(&["mem"])?;
            let target = CVector::from_vec(vec![C64::new(FRAC_1_SQRT_2, 0.0), phase * FRAC_1_SQRT_2]);
            for o in &table.outcomes {
                let (p, _) = single_stats(o);
                let phi = o.correction();
                let coh = o.coh * phase * C64::from_polar(1.0, phi);
                let rho = CMatrix::from_row_slice(
                    2,
                    2,
                    &[C64::new(o.w0, 0.0), coh.conj(), coh, C64::new(o.w1, 0.0)],
                )
                .unscale(2.0);
                rows.push(outcome_row(vec![o.counts.clone()], strategy.heralds(&[o]), vec![phi], p, &reg, rho, &target)?);
            }
        }
        2 => {
            let reg = ModeRegistry::qubits(&["m1", "m2"])?;
            let mut target = CVector::zeros(4);
            target[1] = C64::new(FRAC_1_SQRT_2, 0.0);
            target[2] = phase * FRAC_1_SQRT_2;
            for a in &table.outcomes {
                for b in &table.outcomes {
                    let (p, _) = pair_stats(a, b);
                    let (pa, pb) = (a.correction(), b.correction());
                    // |0bar 1bar> picks up site 2's phase, |1bar 0bar> site 1's
                    let coh = a.coh * b.coh.conj() * phase * C64::from_polar(1.0, pa - pb);
                    let mut rho = CMatrix::zeros(4, 4);
                    rho[(1, 1)] = C64::new(a.w0 * b.w1 / 2.0, 0.0);
                    rho[(2, 2)] = C64::new(a.w1 * b.w0 / 2.0, 0.0);
                    rho[(2, 1)] = coh / 2.0;
                    rho[(1, 2)] = coh.conj() / 2.0;
                    let counts = vec![a.counts.clone(), b.counts.clone()];
                    rows.push(outcome_row(counts, strategy.heralds(&[a, b]), vec![pa, pb], p, &reg, rho, &target)?);
                }
            }
        }
        n => return Err(Error::param(format!("{n}-site transfer is not supported"))),
    }
    Ok(rows)
}

fn outcome_row(
    counts: Vec<Vec<usize>>,
    accepted: bool,
    correction: Vec<f64>,
    p: f64,
    reg: &ModeRegistry,
    rho: CMatrix,
    target: &CVector,
) -> Result<TransferOutcome> {
    let (fidelity, memory) = if p > 1e-300 {
        let m = QuantumState::from_density(reg.clone(), rho)?;
        (m.fidelity_vector(target)?, Some(m))
    } else {
        (f64::NAN, None)
    };
    Ok(TransferOutcome {
        counts,
        accepted,
        correction,
        probability: p,
        fidelity,
        memory,
    })
}

/// Perfectly correctable: the corrected branch has fidelity 1.
fn correctable(outcomes: &[&SiteOutcome]) -> bool {
    let (p, pf) = match outcomes {
        [a] => single_stats(a),
        [a, b] => pair_stats(a, b),
        _ => return false,
    };
    p > 0.0 && pf / p >= 1.0 - HERALD_TOL
}

/// |+> ancilla on a 50:50 splitter, perfect detectors. Heralds on exactly one photon.
pub struct PlusAncilla;

/// Coherent ancilla at both sites of a two-site array. Heralds on |i - i'| = |j - j'| != 0.
pub struct CoherentAncilla;

/// (P+1)-port QFT splitter at one site. Heralds on perfectly correctable patterns.
pub struct Multiport;

/// |+> ancilla behind detectors of transmission eta. Heralds on exactly one detected photon.
pub struct LossyPlus;

impl TransferStrategy for PlusAncilla {
    fn name(&self) -> &'static str {
        "plus"
    }

    fn sites(&self) -> usize {
        1
    }

    fn site_table(&self, _: &TransferConfig) -> Result<SiteTable> {
        multiport_site_table(&[AncillaState::Plus], None)
    }

    fn heralds(&self, o: &[&SiteOutcome]) -> bool {
        o.iter().all(|o| o.total_count() == 1)
    }
}

impl TransferStrategy for CoherentAncilla {
    fn name(&self) -> &'static str {
        "coherent"
    }

    fn sites(&self) -> usize {
        2
    }

    fn site_table(&self, cfg: &TransferConfig) -> Result<SiteTable> {
        Ok(coherent_amplitude_table(cfg.alpha, cfg.coherent_cutoff())?.site_table())
    }

    fn heralds(&self, o: &[&SiteOutcome]) -> bool {
        let diff = |o: &SiteOutcome| o.counts[0].abs_diff(o.counts[1]);
        match o {
            [a, b] => diff(a) == diff(b) && diff(a) != 0,
            _ => false,
        }
    }
}

impl TransferStrategy for Multiport {
    fn name(&self) -> &'static str {
        "multiport"
    }

    fn sites(&self) -> usize {
        1
    }

    fn site_table(&self, cfg: &TransferConfig) -> Result<SiteTable> {
        multiport_site_table(&cfg.ancillas, None)
    }

    fn heralds(&self, o: &[&SiteOutcome]) -> bool {
        correctable(o)
    }
}

impl TransferStrategy for LossyPlus {
    fn name(&self) -> &'static str {
        "lossy"
    }

    fn sites(&self) -> usize {
        1
    }

    fn site_table(&self, cfg: &TransferConfig) -> Result<SiteTable> {
        multiport_site_table(&[AncillaState::Plus], Some(cfg.eta))
    }

    fn heralds(&self, o: &[&SiteOutcome]) -> bool {
        o.iter().all(|o| o.total_count() == 1)
    }
}

pub fn strategies() -> Registry<dyn TransferStrategy> {
    let plus: Box<dyn TransferStrategy> = Box::new(PlusAncilla);
    let coherent: Box<dyn TransferStrategy> = Box::new(CoherentAncilla);
    let multiport: Box<dyn TransferStrategy> = Box::new(Multiport);
    let lossy: Box<dyn TransferStrategy> = Box::new(LossyPlus);
    Registry::new("transfer strategy")
        .with("plus", plus)
        .with("coherent", coherent)
        .with("multiport", multiport)
        .with("lossy", lossy)
}

/// Single-site |+> ancilla transfer, every outcome enumerated.
pub fn plus_ancilla_transfer(theta: f64) -> Result<Vec<TransferOutcome>> {
    let cfg = TransferConfig {
        theta,
        ..TransferConfig::default()
    };
    outcome_table(&PlusAncilla, &cfg)
}

/// Two-site transfer with coherent ancillas of amplitude `cfg.alpha`.
pub fn two_site_transfer(cfg: &TransferConfig) -> Result<TransferReport> {
    CoherentAncilla.run(cfg)
}

/// Single-site transfer through a (P+1)-port QFT splitter, P = `ancillas.len()`.
pub fn multiport_transfer(ancillas: &[AncillaState], mode: TransferMode) -> Result<TransferReport> {
    let cfg = TransferConfig {
        ancillas: ancillas.to_vec(),
        mode,
        ..TransferConfig::default()
    };
    Multiport.run(&cfg)
}

/// |+> ancilla transfer behind lossy detectors, heralded on one detected photon.
pub fn lossy_transfer(cfg: &TransferConfig) -> Result<TransferReport> {
    LossyPlus.run(&TransferConfig {
        mode: TransferMode::Heralded,
        ..cfg.clone()
    })
}
