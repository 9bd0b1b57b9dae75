use std::path::PathBuf;

use qarray_core::transfer::{alpha_sweep, lossy_curve, multiport_transfer, AncillaState, TransferMode};

use crate::config::RunConfig;
use crate::output::{csv_writer, num, row};
use crate::CliError;

fn grid(cfg: &RunConfig) -> Result<Vec<f64>, CliError> {
    let lo: f64 = cfg.get("alpha_min")?;
    let hi: f64 = cfg.get("alpha_max")?;
    let step: f64 = cfg.get("alpha_step")?;
    if !(step > 0.0) || hi < lo || lo < 0.0 {
        return Err(CliError::Config(format!("bad alpha grid {lo}..{hi} step {step}")));
    }
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| lo + i as f64 * step).collect())
}

pub fn run(cfg: &RunConfig) -> Result<(), CliError> {
    let alphas = grid(cfg)?;
    let etas: Vec<f64> = cfg.list("eta")?;
    if etas.iter().any(|e| !(0.0..=1.0).contains(e)) {
        return Err(CliError::Config("eta values must lie in [0, 1]".into()));
    }
    let ports: usize = cfg.get("ports")?;
    if ports == 0 {
        return Err(CliError::Config("ports must be at least 1".into()));
    }
    let check = cfg.flag("check")?;
    let prefix = cfg.raw("out");
    let path = |tag: &str| PathBuf::from(format!("{prefix}_{tag}.csv"));

    log::info!("alpha sweep over {} points", alphas.len());
    let sweep = alpha_sweep(&alphas)?;
    let mut w = csv_writer(&path("alpha"), cfg, &["alpha", "f_deterministic", "p_heralded", "f_heralded"])?;
    for p in &sweep {
        row(&mut w, &[num(p.alpha), num(p.f_deterministic), num(p.p_heralded), num(p.f_heralded)])?;
    }
    w.flush()?;

    let lossy = lossy_curve(&etas)?;
    let mut w = csv_writer(&path("eta"), cfg, &["eta", "f", "p"])?;
    for p in &lossy {
        row(&mut w, &[num(p.eta), num(p.fidelity), num(p.probability)])?;
    }
    w.flush()?;

    let mut w = csv_writer(&path("multiport"), cfg, &["ports", "f_deterministic", "p_heralded", "f_heralded"])?;
    println!("{:>6} {:>16} {:>12} {:>12}", "P", "f_deterministic", "p_heralded", "f_heralded");
    for p in 1..=ports {
        log::info!("multiport with {p} ancilla ports");
        let r = multiport_transfer(&vec![AncillaState::Plus; p], TransferMode::Deterministic)?;
        row(&mut w, &[p.to_string(), num(r.deterministic_fidelity), num(r.heralded_probability), num(r.heralded_fidelity)])?;
        println!("{:>6} {:>16.6} {:>12.6} {:>12.6}", p, r.deterministic_fidelity, r.heralded_probability, r.heralded_fidelity);
    }
    w.flush()?;

    let plateau = sweep.iter().map(|p| p.f_deterministic).fold(f64::NAN, f64::max);
    let best = sweep
        .iter()
        .max_by(|a, b| a.p_heralded.total_cmp(&b.p_heralded))
        .expect("nonempty grid");
    let min_f = sweep
        .iter()
        .filter(|p| p.p_heralded > 0.0)
        .map(|p| p.min_f_heralded)
        .fold(f64::INFINITY, f64::min);
    println!("deterministic fidelity, grid maximum: {plateau:.5}");
    println!(
        "heralded probability, grid maximum: {:.5} at alpha = {:.2} (per site {:.5}); min accepted fidelity {:.12}",
        best.p_heralded,
        best.alpha,
        best.p_heralded.sqrt(),
        min_f
    );
    for p in &lossy {
        println!("eta {:>5.2}: f = {:.6}, p = {:.6}", p.eta, p.fidelity, p.probability);
    }

    if check {
        let mut bad = Vec::new();
        if (plateau - 0.82).abs() > 0.01 {
            bad.push(format!("plateau {plateau:.5} not within 0.82 +/- 0.01"));
        }
        if (best.p_heralded - 0.22).abs() > 0.01 {
            bad.push(format!("heralded maximum {:.5} not within 0.22 +/- 0.01", best.p_heralded));
        }
        if min_f < 1.0 - 1e-9 {
            bad.push(format!("accepted fidelity {min_f} below 1 - 1e-9"));
        }
        if let Some(end) = lossy.iter().find(|p| p.eta == 1.0) {
            if (end.fidelity - 1.0).abs() > 1e-12 || (end.probability - 0.5).abs() > 1e-12 {
                bad.push(format!("eta = 1 endpoint ({}, {})", end.fidelity, end.probability));
            }
        }
        if !bad.is_empty() {
            return Err(CliError::Check(bad.join("; ")));
        }
    }
    Ok(())
}
