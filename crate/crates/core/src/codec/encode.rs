use super::{Codebook, Layout, Parallel, ResourceLedger};
use crate::qcore::{gates, measure_all, Basis, ModeKind, ModeRegistry, QuantumState, PIPELINE_TOL};
use crate::rng::Branching;
use crate::source::{check_epsilon, single_photon_rho, ArrayGeometry, VisibilityModel};
use crate::{Error, Result, C64};

/// Largest memory dimension a fully mixed run may reach.
const FULL_RUN_DIM_LIMIT: usize = 1 << 22;

pub fn memory_label(site: usize, name: &str) -> String {
    format!("site{site}:{name}")
}

fn recv_label(site: usize, band: usize) -> String {
    format!("site{site}:recv{band}")
}

fn site_of(label: &str) -> Option<(usize, &str)> {
    let rest = label.strip_prefix("site")?;
    let (s, name) = rest.split_once(':')?;
    Some((s.parse().ok()?, name))
}

/// Memories of every site during and after time-bin integration.
///
/// Memory qubits are materialized lazily; a qubit absent from the state is in |0>.
#[derive(Clone, Debug)]
pub struct EncodeRun {
    book: Codebook,
    layout: Box<dyn Layout>,
    sites: usize,
    eps: f64,
    state: QuantumState,
    ledger: ResourceLedger,
    next_bin: usize,
    compressed: bool,
}

impl EncodeRun {
    pub fn new(book: Codebook, layout: &dyn Layout, sites: usize, eps: f64) -> Result<Self> {
        if sites < 1 {
            return Err(Error::param("need at least one site"));
        }
        check_epsilon(eps)?;
        let ledger = ResourceLedger {
            memory_qubits_per_site: layout.memory_qubits_per_site(&book),
            ancilla_qubits: book.r,
            ..Default::default()
        };
        Ok(Self {
            book,
            layout: layout.clone_box(),
            sites,
            eps,
            state: QuantumState::vacuum(ModeRegistry::new()),
            ledger,
            next_bin: 1,
            compressed: false,
        })
    }

    pub fn book(&self) -> &Codebook {
        &self.book
    }

    pub fn layout(&self) -> &dyn Layout {
        self.layout.as_ref()
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// Materialized memory qubits only.
    pub fn state(&self) -> &QuantumState {
        &self.state
    }

    pub fn ledger(&self) -> &ResourceLedger {
        &self.ledger
    }

    pub fn bins_done(&self) -> usize {
        self.next_bin - 1
    }

    pub fn is_compressed(&self) -> bool {
        self.compressed
    }

    /// The run state over the given memory qubits, in the given order.
    pub fn memory_state(&self, labels: &[String]) -> Result<QuantumState> {
        let reduced = self.state.with_qubits(labels)?.partial_trace(labels)?;
        let reg = ModeRegistry::qubits(labels)?;
        reduced.permuted(&reg)
    }

    fn order_key(&self, label: &str) -> (usize, usize, String) {
        let names = self.layout.memory_names(&self.book);
        match site_of(label) {
            Some((s, name)) => (
                s,
                names.iter().position(|n| n == name).unwrap_or(usize::MAX),
                name.to_string(),
            ),
            None => (usize::MAX, 0, label.to_string()),
        }
    }

    fn canonical(&self, state: &QuantumState) -> Result<QuantumState> {
        let mut modes: Vec<_> = state.registry().modes().to_vec();
        modes.sort_by_key(|m| self.order_key(&m.label));
        let mut reg = ModeRegistry::new();
        for m in &modes {
            reg.push(&m.label, m.kind)?;
        }
        state.permuted(&reg)
    }
}

/// Applies a projector phase on `labels` being all one, for each flagged site.
fn correct(state: &QuantumState, patterns: &[&[String]]) -> Result<QuantumState> {
    let mut out = state.clone();
    for labels in patterns {
        if labels.is_empty() {
            continue;
        }
        let dim = 1 << labels.len();
        out = out.transform(&gates::projector_phase(dim, dim - 1), labels)?.1;
    }
    Ok(out)
}

/// CNOTs from control qubits into patterns, X measurement of the controls and
/// projector-phase correction of every pattern whose control read "-".
///
/// In enumeration mode every outcome is corrected and checked to give the same state.
fn teleport_write(
    state: QuantumState,
    writes: &[(String, Vec<String>)],
    branching: &mut Branching,
) -> Result<QuantumState> {
    let mut state = state;
    for (ctrl, targets) in writes {
        state = state.with_qubits(targets)?;
        for t in targets {
            state = state.transform(&gates::cnot(), &[ctrl.as_str(), t.as_str()])?.1;
        }
    }
    let ctrls: Vec<&str> = writes.iter().map(|w| w.0.as_str()).collect();
    let branches = measure_all(&state, &ctrls, Basis::X)?;
    let mut corrected = Vec::with_capacity(branches.len());
    for b in branches {
        let flagged: Vec<&[String]> = writes
            .iter()
            .zip(&b.outcome)
            .filter(|(_, &o)| o == 1)
            .map(|(w, _)| w.1.as_slice())
            .collect();
        let s = correct(&b.state, &flagged)?.discard(&ctrls)?;
        corrected.push((b.probability, s));
    }
    if branching.is_enumerate() {
        let first = &corrected[0].1;
        for (_, s) in &corrected[1..] {
            if !first.approx_eq(s, PIPELINE_TOL)? {
                return Err(Error::ProtocolMisuse(
                    "measurement branches differ after correction".into(),
                ));
            }
        }
        return Ok(corrected.swap_remove(0).1);
    }
    Ok(branching.select(corrected).swap_remove(0).1)
}

/// Encodes time bin `m`. `photons` lists (band, receiving-qubit state) for the
/// bands that carry light; the state has one qubit per site with |1> marking
/// absorption there. Empty `photons` is the vacuum bin and leaves the memories untouched.
pub fn encode_bin(
    run: &EncodeRun,
    m: usize,
    photons: &[(usize, QuantumState)],
    branching: &mut Branching,
) -> Result<EncodeRun> {
    if run.compressed {
        return Err(Error::Collapsed);
    }
    if m != run.next_bin || m > run.book.m {
        return Err(Error::ProtocolMisuse(format!(
            "expected bin {} of {}, got {m}",
            run.next_bin, run.book.m
        )));
    }
    let mut out = run.clone();
    out.next_bin += 1;
    if photons.is_empty() {
        return Ok(out);
    }

    let mut state = run.state.clone();
    let mut writes = Vec::new();
    for (band, photon) in photons {
        let written = run.layout.written(&run.book, m, *band)?;
        if photon.registry().len() != run.sites
            || photon.registry().modes().iter().any(|md| md.kind != ModeKind::Qubit)
        {
            return Err(Error::param(format!(
                "photon state must hold {} receiving qubits",
                run.sites
            )));
        }
        let recv: Vec<String> = (0..run.sites).map(|i| recv_label(i, *band)).collect();
        state = state.tensor(&photon.relabeled(&recv)?)?;
        for (i, r) in recv.into_iter().enumerate() {
            let targets = written.iter().map(|n| memory_label(i, n)).collect();
            writes.push((r, targets));
        }
    }
    let state = teleport_write(state, &writes, branching)?;
    out.state = out.canonical(&state)?;
    Ok(out)
}

/// Per-band spatial photon states together with the per-bin photon number.
#[derive(Clone, Debug)]
pub struct PhotonSource {
    pub eps: f64,
    /// One single-excitation state over the sites per band.
    pub bands: Vec<QuantumState>,
}

impl PhotonSource {
    /// The same spatial state in each of `r` bands.
    pub fn from_visibility(vis: &VisibilityModel, r: usize) -> Result<Self> {
        let rho = single_photon_rho(vis)?;
        Ok(Self {
            eps: vis.epsilon(),
            bands: vec![rho; r],
        })
    }

    /// Two sites with band coherences g_r between the photon at site 0 and at site 1.
    pub fn two_site(eps: f64, g: &[C64]) -> Result<Self> {
        let geom = ArrayGeometry::linear(2, 1.0)?;
        let mut bands = Vec::new();
        for &gr in g {
            let mat = crate::qcore::CMatrix::from_row_slice(2, 2, &[C64::new(1.0, 0.0), gr, gr.conj(), C64::new(1.0, 0.0)]);
            bands.push(single_photon_rho(&VisibilityModel::new(geom.clone(), mat, eps)?)?);
        }
        Ok(Self { eps, bands })
    }

    pub fn sites(&self) -> usize {
        self.bands.first().map_or(0, |b| b.registry().len())
    }
}

/// A run over all M bins with a single photon in bin `m`, band `r`.
pub fn encode_photon(
    book: Codebook,
    layout: &dyn Layout,
    eps: f64,
    m: usize,
    r: usize,
    photon: &QuantumState,
    branching: &mut Branching,
) -> Result<EncodeRun> {
    book.codeword(m, r)?;
    let mut run = EncodeRun::new(book, layout, photon.registry().len(), eps)?;
    for bin in 1..=book.m {
        let input = if bin == m {
            vec![(r, photon.clone())]
        } else {
            Vec::new()
        };
        run = encode_bin(&run, bin, &input, branching)?;
    }
    Ok(run)
}

/// Exact post-integration state: the weighted mixture of the vacuum run and of
/// every first-photon event (bin m, band r) with weight eps (1-eps)^(m-1) / R.
pub fn encode_run_full(source: &PhotonSource, book: Codebook, layout: &dyn Layout) -> Result<EncodeRun> {
    if source.bands.len() != book.r {
        return Err(Error::DimensionMismatch {
            expected: book.r,
            found: source.bands.len(),
        });
    }
    let eps = source.eps;
    let vacuum = EncodeRun::new(book, layout, source.sites(), eps)?;
    let mut parts = Vec::new();
    let mut template = None;
    for m in 1..=book.m {
        for r in 1..=book.r {
            let w = eps * (1.0 - eps).powi(m as i32 - 1) / book.r as f64;
            let run = encode_photon(book, layout, eps, m, r, &source.bands[r - 1], &mut Branching::Enumerate)?;
            parts.push((w, run.state.clone()));
            template.get_or_insert(run);
        }
    }
    let mut out = template.expect("M, R >= 1");
    parts.push(((1.0 - eps).powi(book.m as i32), vacuum.state.clone()));

    let mut labels: Vec<String> = Vec::new();
    for (_, s) in &parts {
        for l in s.registry().labels() {
            if !labels.iter().any(|x| x == l) {
                labels.push(l.to_string());
            }
        }
    }
    if labels.len() >= usize::BITS as usize || (1usize << labels.len()) > FULL_RUN_DIM_LIMIT {
        return Err(Error::TooLarge(1usize.checked_shl(labels.len() as u32).unwrap_or(usize::MAX)));
    }
    let mut aligned = Vec::with_capacity(parts.len());
    for (w, s) in parts {
        aligned.push((w, out.canonical(&s.with_qubits(&labels)?)?));
    }
    out.state = QuantumState::mixture(&aligned)?;
    Ok(out)
}

/// Folds the R per-band flags of each site into ceil(log2(R+1)) qubits holding
/// the binary band index, then measures the flags out in X.
pub fn parallel_frequency_compress(run: &EncodeRun, branching: &mut Branching) -> Result<EncodeRun> {
    if !run.layout.needs_compression() {
        return Err(Error::ProtocolMisuse(format!(
            "{} layout has no frequency flags",
            run.layout.name()
        )));
    }
    if run.compressed {
        return Err(Error::Collapsed);
    }
    let mut writes = Vec::new();
    for i in 0..run.sites {
        for r in 1..=run.book.r {
            let flag = memory_label(i, &Parallel::flag(r));
            if run.state.registry().contains(&flag) {
                let targets = Parallel::compressed_written(&run.book, r)
                    .iter()
                    .map(|n| memory_label(i, n))
                    .collect();
                writes.push((flag, targets));
            }
        }
    }
    let mut out = run.clone();
    out.compressed = true;
    if writes.is_empty() {
        return Ok(out);
    }
    let state = teleport_write(run.state.clone(), &writes, branching)?;
    out.state = out.canonical(&state)?;
    Ok(out)
}
