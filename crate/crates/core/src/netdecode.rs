//! Entanglement-assisted decoding across sites: nonlocal parity checks,
//! redundant-register cleanup, pairwise W-state readout and visibility extraction.

use rand::Rng;

use crate::codec::{EncodeRun, ResourceLedger};
use crate::qcore::{gates, measure, measure_all, Basis, CMatrix, CVector, ModeRegistry, QuantumState, PIPELINE_TOL};
use crate::rng::{binomial, Branching};
use crate::source::site_label;
use crate::{Error, Result, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ResourceKind {
    Bell,
    Ghz,
    W,
}

/// A shared entangled state, one qubit per site.
#[derive(Clone, Debug)]
pub struct EntangledResource {
    kind: ResourceKind,
    labels: Vec<String>,
}

impl EntangledResource {
    pub fn new<S: AsRef<str>>(kind: ResourceKind, labels: &[S]) -> Result<Self> {
        let labels: Vec<String> = labels.iter().map(|l| l.as_ref().to_string()).collect();
        match kind {
            ResourceKind::Bell if labels.len() != 2 => {
                return Err(Error::param("a Bell pair has exactly two parties"))
            }
            _ if labels.len() < 2 => return Err(Error::param("an entangled resource needs two or more parties")),
            _ => {}
        }
        Ok(Self { kind, labels })
    }

    /// Bell pair for two parties, GHZ otherwise.
    pub fn parity_resource<S: AsRef<str>>(labels: &[S]) -> Result<Self> {
        let kind = if labels.len() == 2 { ResourceKind::Bell } else { ResourceKind::Ghz };
        Self::new(kind, labels)
    }

    pub fn kind(&self) -> ResourceKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// |GHZ+> (or |phi+>), or |W>.
    pub fn state(&self) -> Result<QuantumState> {
        let n = self.n();
        let reg = ModeRegistry::qubits(&self.labels)?;
        let mut v = CVector::zeros(reg.dim());
        match self.kind {
            ResourceKind::Bell | ResourceKind::Ghz => {
                v[0] = C64::new(1.0, 0.0);
                v[reg.dim() - 1] = C64::new(1.0, 0.0);
            }
            ResourceKind::W => {
                for i in 0..n {
                    v[1 << (n - 1 - i)] = C64::new(1.0, 0.0);
                }
            }
        }
        QuantumState::pure(reg, v)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

#[derive(Clone, Debug)]
pub struct ParityBranch {
    pub parity: Parity,
    pub probability: f64,
    /// Post-check state with the resource qubits removed.
    pub state: QuantumState,
}

/// Weight of register patterns with two or more excitations.
fn multi_excitation_weight(state: &QuantumState, register: &[String]) -> Result<f64> {
    let marg = state.marginal_probabilities(register)?;
    Ok(marg
        .iter()
        .enumerate()
        .filter(|(s, _)| s.count_ones() >= 2)
        .map(|(_, p)| p)
        .sum())
}

fn owned<S: AsRef<str>>(labels: &[S]) -> Vec<String> {
    labels.iter().map(|l| l.as_ref().to_string()).collect()
}

/// Appends the resource and applies CZ(register_s, resource_s) at every site.
pub fn ghz_parity_entangle<S: AsRef<str>>(
    state: &QuantumState,
    register: &[S],
    ghz: &EntangledResource,
) -> Result<QuantumState> {
    let register = owned(register);
    if ghz.kind == ResourceKind::W {
        return Err(Error::param("parity checks need a Bell or GHZ resource"));
    }
    if ghz.n() != register.len() {
        return Err(Error::DimensionMismatch {
            expected: register.len(),
            found: ghz.n(),
        });
    }
    let state = state.with_qubits(&register)?;
    if multi_excitation_weight(&state, &register)? > PIPELINE_TOL {
        return Err(Error::ProtocolMisuse(
            "register holds more than one excitation".into(),
        ));
    }
    let mut s = state.tensor(&ghz.state()?)?;
    for (r, g) in register.iter().zip(&ghz.labels) {
        s = s.transform(&gates::cz(), &[r.as_str(), g.as_str()])?.1;
    }
    Ok(s)
}

/// Nonlocal parity check of one qubit per site. Branches are grouped by parity;
/// within a class the post-states coincide.
pub fn ghz_parity_check<S: AsRef<str>>(
    state: &QuantumState,
    register: &[S],
    ghz: &EntangledResource,
) -> Result<Vec<ParityBranch>> {
    let s = ghz_parity_entangle(state, register, ghz)?;
    let mut classes: [Vec<(f64, QuantumState)>; 2] = [Vec::new(), Vec::new()];
    for b in measure_all(&s, &ghz.labels, Basis::X)? {
        let minus = b.outcome.iter().filter(|&&o| o == 1).count();
        classes[minus % 2].push((b.probability, b.state.discard(&ghz.labels)?));
    }
    let mut out = Vec::new();
    for (parity, class) in [Parity::Even, Parity::Odd].into_iter().zip(classes) {
        if class.is_empty() {
            continue;
        }
        let p: f64 = class.iter().map(|c| c.0).sum();
        out.push(ParityBranch {
            parity,
            probability: p,
            state: QuantumState::mixture(&class)?,
        });
    }
    Ok(out)
}

/// Outcome of decoding one integration run.
#[derive(Clone, Debug)]
pub struct DecodeResult {
    /// 0 when no photon was recorded.
    pub arrival_bin: usize,
    pub band: Option<usize>,
    /// The N-site single-excitation register on qubits `s0..`, when a photon arrived.
    pub register: Option<QuantumState>,
    /// Run ledger plus the resources spent decoding.
    pub ledger: ResourceLedger,
    /// Probability of this parity record.
    pub probability: f64,
}

#[derive(Clone)]
struct Path {
    p: f64,
    state: QuantumState,
    bits: Vec<bool>,
    odd: Vec<String>,
    ledger: ResourceLedger,
}

fn register_labels(sites: usize, name: &str) -> Vec<String> {
    (0..sites).map(|i| crate::codec::memory_label(i, name)).collect()
}

fn check_register(run: &EncodeRun, paths: Vec<Path>, name: &str, branching: &mut Branching) -> Result<Vec<Path>> {
    let sites = run.sites();
    let labels = register_labels(sites, name);
    let ghz_labels: Vec<String> = (0..sites).map(|i| format!("site{i}:ghz")).collect();
    let ghz = EntangledResource::parity_resource(&ghz_labels)?;
    let mut out = Vec::new();
    for mut path in paths {
        path.ledger.add_entangled(sites);
        if !labels.iter().any(|l| path.state.registry().contains(l)) {
            // never written: all |0>, the check reads even without disturbing anything
            path.bits.push(false);
            out.push(path);
            continue;
        }
        let branches = ghz_parity_check(&path.state, &labels, &ghz)?
            .into_iter()
            .map(|b| (b.probability, b))
            .collect();
        for (p, b) in branching.select(branches) {
            let mut next = path.clone();
            next.p *= p;
            next.state = b.state;
            next.bits.push(b.parity == Parity::Odd);
            if b.parity == Parity::Odd {
                next.odd.push(name.to_string());
            }
            out.push(next);
        }
    }
    Ok(out)
}

fn bits_value(bits: &[bool]) -> usize {
    bits.iter().fold(0, |acc, &b| acc * 2 + b as usize)
}

/// Measures `redundant` registers out in X, correcting the survivor with Z at
/// every site that read "-", then keeps only the survivor.
fn collapse_to_survivor(
    state: &QuantumState,
    survivor: &[String],
    redundant: &[Vec<String>],
    branching: &mut Branching,
) -> Result<QuantumState> {
    let mut state = state.clone();
    for reg in redundant {
        let mut corrected = Vec::new();
        for b in measure_all(&state, reg, Basis::X)? {
            let mut s = b.state;
            for (site, &o) in b.outcome.iter().enumerate() {
                if o == 1 {
                    s = s.transform(&gates::z(), &[survivor[site].as_str()])?.1;
                }
            }
            corrected.push((b.probability, s.discard(reg)?));
        }
        let chosen = branching.select(corrected);
        state = QuantumState::mixture(&chosen)?;
    }
    state.partial_trace(survivor)?.permuted(&ModeRegistry::qubits(survivor)?)
}

/// Reads arrival time and band through parity checks on every register position.
///
/// Enumeration returns one result per parity record; sampling returns one.
pub fn decode_arrival(run: &EncodeRun, branching: &mut Branching) -> Result<Vec<DecodeResult>> {
    let layout = run.layout();
    let book = run.book();
    if layout.needs_compression() && !run.is_compressed() {
        return Err(Error::ProtocolMisuse(
            "frequency flags must be compressed before decoding".into(),
        ));
    }
    let sites = run.sites();
    let start = Path {
        p: 1.0,
        state: run.state().clone(),
        bits: Vec::new(),
        odd: Vec::new(),
        ledger: *run.ledger(),
    };
    let mut freq_paths = vec![start];
    for name in layout.frequency_registers(book) {
        freq_paths = check_register(run, freq_paths, &name, branching)?;
    }

    let mut results = Vec::new();
    for fp in freq_paths {
        let band = match layout.band_from_parities(book, &fp.bits)? {
            Some(b) => b,
            None => {
                results.push(DecodeResult {
                    arrival_bin: 0,
                    band: None,
                    register: None,
                    ledger: fp.ledger,
                    probability: fp.p,
                });
                continue;
            }
        };
        let freq_odd = fp.odd.clone();
        let mut paths = vec![Path { bits: Vec::new(), odd: Vec::new(), ..fp }];
        for name in layout.time_registers(book, band) {
            paths = check_register(run, paths, &name, branching)?;
        }
        for tp in paths {
            let m = bits_value(&tp.bits);
            if m == 0 {
                if !freq_odd.is_empty() || layout.needs_compression() {
                    return Err(Error::ProtocolMisuse(
                        "band recorded without an arrival time".into(),
                    ));
                }
                results.push(DecodeResult {
                    arrival_bin: 0,
                    band: None,
                    register: None,
                    ledger: tp.ledger,
                    probability: tp.p,
                });
                continue;
            }
            if m > book.m {
                return Err(Error::ProtocolMisuse(format!("decoded bin {m} exceeds M")));
            }
            let survivor = register_labels(sites, &tp.odd[0]);
            let redundant: Vec<Vec<String>> = freq_odd
                .iter()
                .chain(&tp.odd[1..])
                .map(|n| register_labels(sites, n))
                .collect();
            let reg = collapse_to_survivor(&tp.state, &survivor, &redundant, branching)?;
            let labels: Vec<String> = (0..sites).map(site_label).collect();
            results.push(DecodeResult {
                arrival_bin: m,
                band: Some(band),
                register: Some(reg.relabeled(&labels)?),
                ledger: tp.ledger,
                probability: tp.p,
            });
        }
    }
    Ok(results)
}

/// Result of one W-state round.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WOutcome {
    Retry,
    /// Sites i < j found in |1>.
    Pair(usize, usize),
}

#[derive(Clone, Debug)]
pub struct WBranch {
    pub outcome: WOutcome,
    pub probability: f64,
    /// Register after the round, resource qubits removed.
    pub state: QuantumState,
}

/// Attempts allowed in sampling mode before giving up.
pub const W_RETRY_CAP: usize = 64;

fn w_round<S: AsRef<str>>(state: &QuantumState, register: &[S], w: &EntangledResource) -> Result<QuantumState> {
    let register = owned(register);
    if w.kind != ResourceKind::W {
        return Err(Error::param("pairwise readout needs a W resource"));
    }
    if w.n() != register.len() {
        return Err(Error::DimensionMismatch {
            expected: register.len(),
            found: w.n(),
        });
    }
    let marg = state.marginal_probabilities(&register)?;
    let off: f64 = marg
        .iter()
        .enumerate()
        .filter(|(s, _)| s.count_ones() != 1)
        .map(|(_, p)| p)
        .sum();
    if off > PIPELINE_TOL {
        return Err(Error::ProtocolMisuse(
            "register is not in the single-excitation sector".into(),
        ));
    }
    let mut s = state.tensor(&w.state()?)?;
    for (r, q) in register.iter().zip(&w.labels) {
        s = s.transform(&gates::cnot(), &[r.as_str(), q.as_str()])?.1;
    }
    Ok(s)
}

fn classify(outcome: &[usize]) -> Result<WOutcome> {
    let ones: Vec<usize> = outcome.iter().enumerate().filter(|(_, &o)| o == 1).map(|(i, _)| i).collect();
    match ones.as_slice() {
        [] => Ok(WOutcome::Retry),
        [i, j] => Ok(WOutcome::Pair(*i, *j)),
        _ => Err(Error::ProtocolMisuse(format!("W readout found {} excitations", ones.len()))),
    }
}

/// Every outcome of one W-state round: local CNOTs (register controls W qubit)
/// and Z measurement of the W qubits.
pub fn w_state_readout<S: AsRef<str>>(
    state: &QuantumState,
    register: &[S],
    w: &EntangledResource,
) -> Result<Vec<WBranch>> {
    let s = w_round(state, register, w)?;
    measure_all(&s, &w.labels, Basis::Z)?
        .into_iter()
        .map(|b| {
            Ok(WBranch {
                outcome: classify(&b.outcome)?,
                probability: b.probability,
                state: b.state.discard(&w.labels)?,
            })
        })
        .collect()
}

/// Repeats sampled W rounds until a pair is found; returns (W states used, pair branch).
pub fn w_state_readout_sampled<S: AsRef<str>, R: Rng + ?Sized>(
    state: &QuantumState,
    register: &[S],
    w: &EntangledResource,
    rng: &mut R,
) -> Result<(usize, WBranch)> {
    for attempt in 1..=W_RETRY_CAP {
        let s = w_round(state, register, w)?;
        let b = measure(&s, &w.labels, Basis::Z, rng)?;
        let outcome = classify(&b.outcome)?;
        if outcome != WOutcome::Retry {
            return Ok((
                attempt,
                WBranch {
                    outcome,
                    probability: b.probability,
                    state: b.state.discard(&w.labels)?,
                },
            ));
        }
    }
    Err(Error::ProtocolMisuse(format!("no pair after {W_RETRY_CAP} W states")))
}

/// Two-qubit state of register sites (i, j), in that order.
pub fn pair_state<S: AsRef<str>>(state: &QuantumState, register: &[S], i: usize, j: usize) -> Result<QuantumState> {
    let keep = [register[i].as_ref(), register[j].as_ref()];
    state
        .partial_trace(&keep)?
        .permuted(&ModeRegistry::qubits(&keep)?)
}

fn pauli_pair(a: CMatrix, b: CMatrix) -> CMatrix {
    a.kronecker(&b)
}

/// (<X x X>, <X x Y>) of a two-qubit state.
pub fn pair_correlators(pair: &QuantumState) -> Result<(f64, f64)> {
    let labels: Vec<String> = pair.registry().labels().iter().map(|s| s.to_string()).collect();
    if labels.len() != 2 {
        return Err(Error::param("pair state must hold two qubits"));
    }
    let xx = pair.expectation(&pauli_pair(gates::x(), gates::x()), &labels)?.re;
    let xy = pair.expectation(&pauli_pair(gates::x(), gates::y()), &labels)?.re;
    Ok((xx, xy))
}

/// <X x (cos(phi) X - sin(phi) Y)> = Re{g e^{-i phi}} for coherence g on |10><01|.
pub fn quadrature_correlator(pair: &QuantumState, phi: f64) -> Result<f64> {
    let (xx, xy) = pair_correlators(pair)?;
    Ok(phi.cos() * xx - phi.sin() * xy)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VisibilityEstimate {
    pub g: C64,
    pub se_re: f64,
    pub se_im: f64,
    /// Shots per correlator; 0 in exact mode.
    pub shots: u64,
}

/// Re g from <X x X> and Im g from -<X x Y>. Exact under enumeration; otherwise
/// `shots` single-shot products per correlator.
pub fn pair_visibility_estimate(pair: &QuantumState, shots: u64, branching: &mut Branching) -> Result<VisibilityEstimate> {
    let (xx, xy) = pair_correlators(pair)?;
    match branching {
        Branching::Enumerate => Ok(VisibilityEstimate {
            g: C64::new(xx, -xy),
            se_re: 0.0,
            se_im: 0.0,
            shots: 0,
        }),
        Branching::Sample(rng) => {
            if shots == 0 {
                return Err(Error::param("shots must be positive"));
            }
            let mean = |e: f64, rng: &mut crate::rng::SimRng| {
                let plus = binomial(rng, shots, (1.0 + e) / 2.0) as f64;
                let m = 2.0 * plus / shots as f64 - 1.0;
                (m, ((1.0 - m * m) / shots as f64).sqrt())
            };
            let (re, se_re) = mean(xx, rng);
            let (xy_hat, se_im) = mean(xy, rng);
            Ok(VisibilityEstimate {
                g: C64::new(re, -xy_hat),
                se_re,
                se_im,
                shots,
            })
        }
    }
}
