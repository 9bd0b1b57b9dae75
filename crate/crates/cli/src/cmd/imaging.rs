use std::path::Path;

use qarray_core::imaging::snr_report;
use qarray_core::source::{visibility_from_intensity, ArrayGeometry, IntensityDistribution, VisibilityModel};

use crate::config::RunConfig;
use crate::output::{csv_writer, num, row};
use crate::CliError;

fn visibility(cfg: &RunConfig, geom: &ArrayGeometry, eps: f64) -> Result<VisibilityModel, CliError> {
    let n = geom.n();
    let intensity = match cfg.raw("source") {
        "flat" => IntensityDistribution::flat_on_grid(geom),
        "point" => {
            let j: usize = cfg.get("point")?;
            let grid = geom.native_grid();
            let y = *grid
                .get(j)
                .ok_or_else(|| CliError::Config(format!("point = {j} outside the {n}-point grid")))?;
            IntensityDistribution::point(y)
        }
        "file" => IntensityDistribution::from_file(cfg.raw("intensity"))
            .map_err(|e| CliError::Config(format!("intensity `{}`: {e}", cfg.raw("intensity"))))?,
        "baselines" => {
            let g = cfg.complex_list("g")?;
            if g.len() != n - 1 {
                return Err(CliError::Config(format!("g needs {} values for n = {n}, got {}", n - 1, g.len())));
            }
            return VisibilityModel::from_baselines(geom.clone(), &g, eps).map_err(|e| CliError::Config(e.to_string()));
        }
        v => return Err(CliError::Config(format!("source = `{v}`: expected flat | point | file | baselines"))),
    };
    Ok(visibility_from_intensity(&intensity, geom).with_epsilon(eps)?)
}

pub fn run(cfg: &RunConfig) -> Result<(), CliError> {
    let n: usize = cfg.get("n")?;
    let d: f64 = cfg.get("d")?;
    let eps = super::epsilon(cfg)?;
    let l: u64 = cfg.get("l")?;
    let trials: usize = cfg.get("trials")?;
    let seed: u64 = cfg.get("seed")?;
    let classical = cfg.raw("classical");
    if l == 0 || trials < 2 {
        return Err(CliError::Config("need l >= 1 and trials >= 2".into()));
    }
    let geom = ArrayGeometry::linear(n, d).map_err(|e| CliError::Config(e.to_string()))?;
    let vis = visibility(cfg, &geom, eps)?;
    log::info!("imaging n = {n}, l = {l}, {trials} trials per pipeline");
    let rep = snr_report(&vis, l, seed, trials, classical)?;

    let mut w = csv_writer(
        Path::new(cfg.raw("out")),
        cfg,
        &["j", "y_j", "I_true", "I_hat_qft", "var_qft", "I_hat_classical", "var_classical"],
    )?;
    println!("{:>3} {:>10} {:>10} {:>10} {:>12} {:>10} {:>12} {:>8}", "j", "y_j", "I_true", "qft", "var_qft", "classical", "var_cl", "ratio");
    for r in &rep.rows {
        row(
            &mut w,
            &[
                r.j.to_string(),
                num(r.y),
                num(r.i_true),
                num(r.qft_mean),
                num(r.qft_var),
                num(r.classical_mean),
                num(r.classical_var),
            ],
        )?;
        println!(
            "{:>3} {:>10.5} {:>10.6} {:>10.6} {:>12.4e} {:>10.6} {:>12.4e} {:>8.3}",
            r.j, r.y, r.i_true, r.qft_mean, r.qft_var, r.classical_mean, r.classical_var, r.ratio
        );
    }
    w.flush()?;
    println!(
        "mean variance ratio {:.3} (relative sigma {:.3}); QFT variance zero: {}; classical variance at or above 1/l at every point (one-sided): {}",
        rep.mean_ratio(),
        rep.ratio_rel_sigma(),
        rep.qft_zero_variance,
        rep.classical_above_inverse_l
    );
    Ok(())
}
