//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::Rng;

use qarray_core::codec::{ceil_log2, encode_photon, layouts, parallel_frequency_compress, Codebook, PhotonSource};
use qarray_core::imaging::{qft_diagonal_closed_form, qft_process, sample_qft, snr_report};
use qarray_core::netdecode::{decode_arrival, pair_state, pair_visibility_estimate, w_state_readout};
use qarray_core::netdecode::{EntangledResource, ResourceKind, WOutcome};
use qarray_core::qcore::min_coherent_cutoff;
use qarray_core::rng::{seeded, Branching};
use qarray_core::source::{
    single_photon_rho, site_label, visibility_from_intensity, ArrayGeometry, IntensityDistribution,
};
use qarray_core::transfer::{
    alpha_grid, alpha_sweep, coherent_amplitude_table, fock_amplitude_table, heralded_optimum, lossy_curve,
    network_formulas, network_monte_carlo, plus_ancilla_transfer, two_site_transfer, TransferConfig, TransferMode,
};
use qarray_core::{Result, C64};

type Check = Result<(bool, String)>;
type Criterion = (u8, &'static str, fn() -> Check);

fn c1_plateau() -> Check {
    let t = Instant::now();
    let r = two_site_transfer(&TransferConfig::coherent(3.0, TransferMode::Deterministic))?;
    let dt = t.elapsed();
    let ok = (r.fidelity - 0.82).abs() <= 0.01 && dt < Duration::from_secs(60);
    Ok((ok, format!("f(alpha=3) = {:.5}, target 0.82 +/- 0.01, {:.2?}", r.fidelity, dt)))
}

fn c2_heralded_optimum() -> Check {
    let grid = alpha_grid();
    let pts = alpha_sweep(&grid)?;
    let best = pts.iter().max_by(|a, b| a.p_heralded.total_cmp(&b.p_heralded)).unwrap();
    let min_f = pts
        .iter()
        .filter(|p| p.p_heralded > 0.0)
        .map(|p| p.min_f_heralded)
        .fold(f64::INFINITY, f64::min);
    let (a_ref, p_ref) = heralded_optimum(&grid)?;
    let ok = (best.p_heralded - 0.22).abs() <= 0.01 && min_f >= 1.0 - 1e-9;
    Ok((
        ok,
        format!(
            "grid max p = {:.5} at alpha = {:.2} (refined {:.5} at {:.4}), min accepted f = {:.12}",
            best.p_heralded, best.alpha, p_ref, a_ref, min_f
        ),
    ))
}

fn c3_plus_ancilla() -> Check {
    let mut ok = true;
    let mut worst = 0.0f64;
    let mut acc_p = 0.0;
    for theta in [0.0, PI / 4.0, PI / 2.0, PI] {
        let rows = plus_ancilla_transfer(theta)?;
        acc_p = rows.iter().filter(|r| r.accepted).map(|r| r.probability).sum();
        ok &= (acc_p - 0.5).abs() <= 1e-12;
        for r in rows.iter().filter(|r| r.accepted) {
            worst = worst.max((r.fidelity - 1.0).abs());
        }
    }
    ok &= worst <= 1e-12;
    Ok((ok, format!("accepted p = {acc_p:.15}, max |f - 1| = {worst:.1e}")))
}

fn c4_qft_closed_form() -> Check {
    let t = Instant::now();
    let mut rng = seeded(4);
    let mut worst = 0.0f64;
    for n in 2..=8 {
        let geom = ArrayGeometry::linear(n, 1.0)?;
        for _ in 0..100 {
            let w: Vec<f64> = (0..n).map(|_| rng.random::<f64>() + 1e-3).collect();
            let vis = visibility_from_intensity(&IntensityDistribution::on_grid(&geom, &w)?, &geom);
            let direct = qft_process(&single_photon_rho(&vis)?)?;
            let closed = qft_diagonal_closed_form(&vis)?;
            for (a, b) in direct.iter().zip(&closed) {
                worst = worst.max((a - b).abs());
            }
        }
    }
    let dt = t.elapsed();
    Ok((worst <= 1e-10 && dt < Duration::from_secs(10), format!("max deviation {worst:.2e}, {dt:.2?}")))
}

fn c5_point_source() -> Check {
    let geom = ArrayGeometry::linear(5, 1.0)?;
    let vis = visibility_from_intensity(&IntensityDistribution::point(geom.native_grid()[2]), &geom);
    let p = qft_process(&single_photon_rho(&vis)?)?;
    let peak = p.iter().cloned().fold(f64::MIN, f64::max);
    let mut rng = seeded(5);
    let first = sample_qft(&p, &geom.native_grid(), 100_000, &mut rng)?;
    let mut identical = true;
    for _ in 0..200 {
        identical &= sample_qft(&p, &geom.native_grid(), 100_000, &mut rng)?.i_hat == first.i_hat;
    }
    let report = snr_report(&vis, 100_000, 5, 50, "classical")?;
    let ok = (peak - 1.0).abs() <= 1e-10 && identical && report.qft_zero_variance;
    Ok((ok, format!("peak {peak:.12}, empirical QFT variance zero: {}", identical && report.qft_zero_variance)))
}

fn c6_flat_factor() -> Check {
    let n = 4;
    let geom = ArrayGeometry::linear(n, 1.0)?;
    let vis = visibility_from_intensity(&IntensityDistribution::flat_on_grid(&geom), &geom);
    let rep = snr_report(&vis, 100_000, 6, 2000, "classical")?;
    let sigma = n as f64 * rep.ratio_rel_sigma();
    let ok = rep.rows.iter().all(|r| (r.ratio - n as f64).abs() <= 3.0 * sigma);
    let ratios: Vec<String> = rep.rows.iter().map(|r| format!("{:.3}", r.ratio)).collect();
    Ok((ok, format!("ratios [{}], 3 sigma = {:.3}", ratios.join(", "), 3.0 * sigma)))
}

fn c7_w_readout() -> Check {
    let mut worst_retry = 0.0f64;
    let mut worst_g = 0.0f64;
    for n in 2..=6 {
        let geom = ArrayGeometry::linear(n, 1.7)?;
        let src = IntensityDistribution::new(vec![(0.0, 0.45), (0.13, 0.35), (0.4, 0.2)])?;
        let vis = visibility_from_intensity(&src, &geom);
        let rho = single_photon_rho(&vis)?;
        let sites: Vec<String> = (0..n).map(site_label).collect();
        let labels: Vec<String> = (0..n).map(|i| format!("w{i}")).collect();
        let w = EntangledResource::new(ResourceKind::W, &labels)?;
        for b in w_state_readout(&rho, &sites, &w)? {
            match b.outcome {
                WOutcome::Retry => worst_retry = worst_retry.max((b.probability - 1.0 / n as f64).abs()),
                WOutcome::Pair(i, j) => {
                    let pair = pair_state(&b.state, &sites, i, j)?;
                    let est = pair_visibility_estimate(&pair, 0, &mut Branching::Enumerate)?;
                    worst_g = worst_g.max((est.g - vis.g(i, j)).norm());
                }
            }
        }
    }
    let ok = worst_retry <= 1e-12 && worst_g <= 1e-10;
    Ok((ok, format!("max |p_retry - 1/N| = {worst_retry:.1e}, max |g - g_ij| = {worst_g:.1e}")))
}

fn c8_network() -> Check {
    let trials = 100_000u64;
    let mut ok = true;
    let mut worst_z = 0.0f64;
    for n in 2..=8 {
        for p1 in [0.22f64.sqrt(), 0.7] {
            let f = network_formulas(n, 0.8, p1)?;
            let mc = network_monte_carlo(n, p1, trials, 800 + n as u64)?;
            let z = (mc.p_fail() - f.p_fail).abs() / (f.p_fail * (1.0 - f.p_fail) / trials as f64).sqrt();
            worst_z = worst_z.max(z);
            for &(k, p) in &f.p_k {
                let s = mc.p_k_sigma(p);
                if s > 0.0 {
                    worst_z = worst_z.max((mc.p_k(k) - p).abs() / s);
                }
            }
        }
    }
    ok &= worst_z <= 3.0;
    let mut worst_sum = 0.0f64;
    for n in 2..=10 {
        for i in 1..=9 {
            let f = network_formulas(n, 0.8, i as f64 / 10.0)?;
            worst_sum = worst_sum.max((f.p_k.iter().map(|(_, p)| p).sum::<f64>() - 1.0).abs());
        }
    }
    ok &= worst_sum <= 1e-12;
    Ok((ok, format!("max z = {worst_z:.2}, max |sum_k p - 1| = {worst_sum:.1e}")))
}

fn c9_roundtrip() -> Check {
    let (m_bins, bands) = (16, 4);
    let book = Codebook::new(m_bins, bands)?;
    let g: Vec<C64> = (0..bands).map(|r| C64::from_polar(0.3 + 0.15 * r as f64, 0.7 * r as f64)).collect();
    let src = PhotonSource::two_site(0.01, &g)?;
    let reg = layouts();
    let mut ok = true;
    let mut done = 0;
    for name in ["sequential", "parallel"] {
        let layout = reg.get(name)?;
        for m in 1..=m_bins {
            for r in 1..=bands {
                let mut run = encode_photon(book, layout, 0.01, m, r, &src.bands[r - 1], &mut Branching::Enumerate)?;
                if layout.needs_compression() {
                    run = parallel_frequency_compress(&run, &mut Branching::Enumerate)?;
                }
                let res = decode_arrival(&run, &mut Branching::Enumerate)?;
                let hit = res.len() == 1
                    && res[0].arrival_bin == m
                    && res[0].band == Some(r)
                    && res[0].register.as_ref().is_some_and(|s| s.approx_eq(&src.bands[r - 1], 1e-10).unwrap_or(false));
                // ledger against the closed counts
                let l = &res[0].ledger;
                let (mem, bell) = if name == "sequential" {
                    (ceil_log2(m_bins * bands + 1), ceil_log2(m_bins * bands + 1))
                } else {
                    let t = ceil_log2(m_bins + 1);
                    let f = ceil_log2(bands + 1);
                    (bands * t + bands + f, t + f)
                };
                ok &= hit && l.memory_qubits_per_site == mem && l.bell_pairs == bell && l.ghz_states == 0;
                done += usize::from(hit);
            }
        }
    }
    let small = qarray_core::codec::EncodeRun::new(Codebook::new(5, 2)?, reg.get("sequential")?, 2, 0.01)?;
    let four = small.ledger().memory_qubits_per_site;
    ok &= four == 4;
    Ok((ok, format!("{done}/128 roundtrips, M=5 R=2 sequential memory qubits = {four}")))
}

fn c10_lossy() -> Check {
    let etas: Vec<f64> = (1..=10).map(|i| i as f64 / 10.0).collect();
    let c = lossy_curve(&etas)?;
    let mono = c
        .windows(2)
        .all(|w| w[1].fidelity >= w[0].fidelity && w[1].probability >= w[0].probability);
    let end = c.last().unwrap();
    let ok = mono && (end.fidelity - 1.0).abs() <= 1e-12 && (end.probability - 0.5).abs() <= 1e-12;
    Ok((
        ok,
        format!(
            "monotone {mono}, eta=0.1 (f, p) = ({:.4}, {:.4}), eta=1 (f, p) = ({:.12}, {:.12})",
            c[0].fidelity, c[0].probability, end.fidelity, end.probability
        ),
    ))
}

fn c11_oracle_gate() -> Check {
    let mut worst = 0.0f64;
    for a in [C64::new(0.0, 0.0), C64::new(0.2, 0.0), C64::new(0.5, 0.0), C64::new(0.4, 0.3), C64::new(0.75, 0.0), C64::new(1.0, 0.0)] {
        let closed = coherent_amplitude_table(a, min_coherent_cutoff(a.norm()))?;
        let fock = fock_amplitude_table(a, 6)?;
        for i in 0..=6 {
            for ip in 0..=6 {
                worst = worst.max((closed.c0(i, ip) - fock.c0(i, ip)).norm());
                worst = worst.max((closed.c1(i, ip) - fock.c1(i, ip)).norm());
            }
        }
    }
    Ok((worst <= 1e-9, format!("max amplitude deviation {worst:.1e} over counts <= 6")))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        (11, "amplitude table oracle gate", c11_oracle_gate),
        (1, "deterministic coherent plateau", c1_plateau),
        (2, "heralded optimum", c2_heralded_optimum),
        (3, "plus ancilla transfer", c3_plus_ancilla),
        (4, "QFT closed form", c4_qft_closed_form),
        (5, "point source", c5_point_source),
        (6, "flat source variance factor", c6_flat_factor),
        (7, "W readout", c7_w_readout),
        (8, "network formulas", c8_network),
        (9, "encode/decode roundtrip", c9_roundtrip),
        (10, "lossy detectors", c10_lossy),
    ];
    let mut failed = 0;
    let mut gate = true;
    for (id, name, check) in criteria {
        let (mut pass, mut detail) = match check() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        if id == 11 {
            gate = pass;
        }
        if (id == 1 || id == 2) && !gate {
            pass = false;
            detail.push_str(" [oracle gate failed]");
        }
        if !pass {
            failed += 1;
        }
        println!("criterion {id:>2} {:<32} {}  {detail}", name, if pass { "PASS" } else { "FAIL" });
    }
    println!("{} of 11 criteria passed", 11 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
