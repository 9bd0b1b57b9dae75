use std::path::Path;

use qarray_core::transfer::{network_formulas, network_monte_carlo};

use crate::config::RunConfig;
use crate::output::{csv_writer, num, row};
use crate::CliError;

pub fn run(cfg: &RunConfig) -> Result<(), CliError> {
    let n_max: usize = cfg.get("n")?;
    let f2: f64 = cfg.get("f2")?;
    let p1: f64 = cfg.get("p1")?;
    let trials: u64 = cfg.get("trials")?;
    let seed: u64 = cfg.get("seed")?;
    let check = cfg.flag("check")?;
    if n_max < 2 || trials == 0 {
        return Err(CliError::Config("need n >= 2 and trials >= 1".into()));
    }

    let mut w = csv_writer(
        Path::new(cfg.raw("out")),
        cfg,
        &["n", "f_network", "p_fail", "p_fail_mc", "p_fail_sigma", "k", "p_k", "p_k_mc"],
    )?;
    println!("{:>3} {:>10} {:>10} {:>10} {:>8}", "N", "f(N)", "p_fail", "MC", "z");
    let mut worst = 0.0f64;
    for n in 2..=n_max {
        let f = network_formulas(n, f2, p1).map_err(|e| CliError::Config(e.to_string()))?;
        log::debug!("N = {n}: {trials} Monte Carlo trials");
        let mc = network_monte_carlo(n, p1, trials, seed.wrapping_add(n as u64))?;
        let sigma = (f.p_fail * (1.0 - f.p_fail) / trials as f64).sqrt();
        let z = if sigma > 0.0 { (mc.p_fail() - f.p_fail).abs() / sigma } else { 0.0 };
        worst = worst.max(z);
        println!("{:>3} {:>10.6} {:>10.6} {:>10.6} {:>8.2}", n, f.fidelity, f.p_fail, mc.p_fail(), z);
        for &(k, p) in &f.p_k {
            let mc_p = if mc.failures < mc.trials { mc.p_k(k) } else { f64::NAN };
            let s = mc.p_k_sigma(p);
            if s > 0.0 && mc_p.is_finite() {
                worst = worst.max((mc_p - p).abs() / s);
            }
            row(
                &mut w,
                &[n.to_string(), num(f.fidelity), num(f.p_fail), num(mc.p_fail()), num(sigma), k.to_string(), num(p), num(mc_p)],
            )?;
        }
        let total: f64 = f.p_k.iter().map(|(_, p)| p).sum();
        if check && p1 > 0.0 && (total - 1.0).abs() > 1e-12 {
            return Err(CliError::Check(format!("N = {n}: sum of p(N, k) = {total}")));
        }
    }
    w.flush()?;
    println!("largest deviation {worst:.2} sigma");
    if check && worst > 3.0 {
        return Err(CliError::Check(format!("Monte Carlo deviates by {worst:.2} sigma")));
    }
    Ok(())
}
