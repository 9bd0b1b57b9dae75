//! Parameter sweeps over the ancilla amplitude and the detector transmission.

use super::{lossy_transfer, two_site_transfer, TransferConfig, TransferMode};
use crate::Result;

/// Default amplitude grid, 0 to 4 in steps of 0.05.
pub fn alpha_grid() -> Vec<f64> {
    (0..=80).map(|i| i as f64 * 0.05).collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepPoint {
    pub alpha: f64,
    pub f_deterministic: f64,
    pub p_heralded: f64,
    /// NaN where nothing can be heralded.
    pub f_heralded: f64,
    pub min_f_heralded: f64,
}

pub fn sweep_point(alpha: f64) -> Result<SweepPoint> {
    let r = two_site_transfer(&TransferConfig::coherent(alpha, TransferMode::Deterministic))?;
    Ok(SweepPoint {
        alpha,
        f_deterministic: r.deterministic_fidelity,
        p_heralded: r.heralded_probability,
        f_heralded: r.heralded_fidelity,
        min_f_heralded: r.min_heralded_fidelity,
    })
}

pub fn alpha_sweep(alphas: &[f64]) -> Result<Vec<SweepPoint>> {
    alphas.iter().map(|&a| sweep_point(a)).collect()
}

/// Golden-section search for a maximum of a unimodal `f` on [lo, hi].
pub fn golden_max(mut f: impl FnMut(f64) -> Result<f64>, mut lo: f64, mut hi: f64, tol: f64) -> Result<(f64, f64)> {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (f(x1)?, f(x2)?);
    while hi - lo > tol {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2)?;
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1)?;
        }
    }
    Ok(if f1 > f2 { (x1, f1) } else { (x2, f2) })
}

/// Grid maximum of the heralded probability, refined within one grid step.
/// Returns (alpha, p).
pub fn heralded_optimum(alphas: &[f64]) -> Result<(f64, f64)> {
    let pts = alpha_sweep(alphas)?;
    let best = pts
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.p_heralded.total_cmp(&b.1.p_heralded))
        .map(|(i, _)| i)
        .ok_or_else(|| crate::Error::param("empty alpha grid"))?;
    let lo = alphas[best.saturating_sub(1)];
    let hi = alphas[(best + 1).min(alphas.len() - 1)];
    let (a, p) = golden_max(|a| Ok(sweep_point(a)?.p_heralded), lo, hi, 1e-4)?;
    Ok(if p >= pts[best].p_heralded { (a, p) } else { (pts[best].alpha, pts[best].p_heralded) })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LossyPoint {
    pub eta: f64,
    pub fidelity: f64,
    pub probability: f64,
}

pub fn lossy_curve(etas: &[f64]) -> Result<Vec<LossyPoint>> {
    etas.iter()
        .map(|&eta| {
            let r = lossy_transfer(&TransferConfig::lossy(eta))?;
            Ok(LossyPoint {
                eta,
                fidelity: r.fidelity,
                probability: r.probability,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_finds_parabola_peak() {
        let (x, fx) = golden_max(|x| Ok(-(x - 0.3) * (x - 0.3) + 2.0), 0.0, 1.0, 1e-8).unwrap();
        assert!((x - 0.3).abs() < 1e-6 && (fx - 2.0).abs() < 1e-12);
    }

    #[test]
    fn grid_shape() {
        let g = alpha_grid();
        assert_eq!(g.len(), 81);
        assert_eq!(g[80], 4.0);
    }

    #[test]
    fn deterministic_fidelity_rises() {
        let pts = alpha_sweep(&[0.5, 1.0, 1.5, 2.0, 2.5]).unwrap();
        for w in pts.windows(2) {
            assert!(w[1].f_deterministic >= w[0].f_deterministic);
        }
    }

    #[test]
    fn lossy_monotone() {
        let etas: Vec<f64> = (1..=10).map(|i| i as f64 / 10.0).collect();
        let c = lossy_curve(&etas).unwrap();
        for w in c.windows(2) {
            assert!(w[1].fidelity >= w[0].fidelity - 1e-12, "{w:?}");
            assert!(w[1].probability >= w[0].probability - 1e-12, "{w:?}");
        }
    }
}
