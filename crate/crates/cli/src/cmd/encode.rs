use std::path::Path;

use qarray_core::codec::{encode_photon, layouts, parallel_frequency_compress, Codebook, PhotonSource, ResourceLedger};
use qarray_core::netdecode::decode_arrival;
use qarray_core::rng::{seeded, Branching};
use qarray_core::source::{visibility_from_intensity, ArrayGeometry, IntensityDistribution};
use qarray_core::C64;

use crate::config::RunConfig;
use crate::output::{csv_writer, row};
use crate::CliError;

fn source(n: usize, r: usize, eps: f64) -> Result<PhotonSource, CliError> {
    if n == 2 {
        let g: Vec<C64> = (0..r)
            .map(|b| C64::from_polar(0.3 + 0.6 * b as f64 / r as f64, 0.7 * b as f64))
            .collect();
        return Ok(PhotonSource::two_site(eps, &g)?);
    }
    let geom = ArrayGeometry::linear(n, 1.0)?;
    let src = IntensityDistribution::new(vec![(0.0, 0.6), (0.35, 0.4)])?;
    let vis = visibility_from_intensity(&src, &geom).with_epsilon(eps)?;
    Ok(PhotonSource::from_visibility(&vis, r)?)
}

pub fn run(cfg: &RunConfig) -> Result<(), CliError> {
    let m: usize = cfg.get("m")?;
    let r: usize = cfg.get("r")?;
    let n: usize = cfg.get("n")?;
    let eps = super::epsilon(cfg)?;
    if n < 2 {
        return Err(CliError::Config(format!("n = {n}: need at least two sites")));
    }
    let book = Codebook::new(m, r).map_err(|e| CliError::Config(e.to_string()))?;
    let names: Vec<&str> = match cfg.raw("layout") {
        "both" => vec!["sequential", "parallel"],
        one => vec![one],
    };
    let sample = match cfg.raw("branching") {
        "enumerate" => false,
        "sample" => true,
        v => return Err(CliError::Config(format!("branching = `{v}`: expected enumerate | sample"))),
    };
    let reg = layouts();
    for name in &names {
        reg.get(name).map_err(|e| CliError::Config(e.to_string()))?;
    }
    let src = source(n, r, eps)?;
    let mut rng = seeded(cfg.get("seed")?);

    let mut csv = match cfg.raw("out") {
        "" => None,
        p => Some(csv_writer(
            Path::new(p),
            cfg,
            &["layout", "m", "r", "decoded_bin", "decoded_band", "register_ok", "memory_qubits_per_site", "bell_pairs", "ghz_states"],
        )?),
    };

    println!("codebook M={m} R={r}: {} time bits, {} frequency bits", book.t_bits, book.f_bits);
    println!("{:<11} {:>11} {:>14} {:>10} {:>10} {:>9}", "layout", "roundtrips", "memory/site", "bell", "ghz", "receive");
    let mut failures = 0;
    for name in names {
        let layout = reg.get(name)?;
        log::info!("{name}: {} roundtrips", m * r);
        let mut passed = 0;
        let mut ledger = ResourceLedger::default();
        for bin in 1..=m {
            for band in 1..=r {
                let photon = &src.bands[band - 1];
                let mut branching = if sample { Branching::Sample(&mut rng) } else { Branching::Enumerate };
                let mut run = encode_photon(book, layout, eps, bin, band, photon, &mut branching)?;
                if layout.needs_compression() {
                    run = parallel_frequency_compress(&run, &mut branching)?;
                }
                let res = decode_arrival(&run, &mut branching)?;
                let first = &res[0];
                let ok = res.len() == 1
                    && first.arrival_bin == bin
                    && first.band == Some(band)
                    && first.register.as_ref().map_or(Ok(false), |s| s.approx_eq(photon, 1e-10))?;
                ledger = first.ledger;
                passed += usize::from(ok);
                if let Some(w) = csv.as_mut() {
                    row(
                        w,
                        &[
                            name.to_string(),
                            bin.to_string(),
                            band.to_string(),
                            first.arrival_bin.to_string(),
                            first.band.map_or(String::new(), |b| b.to_string()),
                            ok.to_string(),
                            first.ledger.memory_qubits_per_site.to_string(),
                            first.ledger.bell_pairs.to_string(),
                            first.ledger.ghz_states.to_string(),
                        ],
                    )?;
                }
            }
        }
        failures += m * r - passed;
        println!(
            "{:<11} {:>11} {:>14} {:>10} {:>10} {:>9}",
            name,
            format!("{passed}/{}", m * r),
            ledger.memory_qubits_per_site,
            ledger.bell_pairs,
            ledger.ghz_states,
            ledger.ancilla_qubits
        );
    }
    if let Some(mut w) = csv {
        w.flush()?;
    }
    if failures > 0 {
        return Err(CliError::Check(format!("{failures} roundtrips failed")));
    }
    Ok(())
}
