//! Multi-site transfer: closed forms and their Monte Carlo / enumeration checks.

use rand::Rng;

use super::table::SiteTable;
use crate::rng::seeded;
use crate::{Error, Result};

pub fn binomial_coefficient(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn check(n: usize, x: f64, what: &str) -> Result<()> {
    if n < 2 {
        return Err(Error::param(format!("network needs N >= 2, got {n}")));
    }
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::param(format!("{what} = {x} outside [0, 1]")));
    }
    Ok(())
}

/// Deterministic network fidelity for a W-state photon, (1 + (N-1)(2 f2 - 1))/N.
pub fn network_fidelity(n: usize, f2: f64) -> Result<f64> {
    check(n, f2, "f2")?;
    Ok((1.0 + (n as f64 - 1.0) * (2.0 * f2 - 1.0)) / n as f64)
}

/// Probability that no coherence survives: (1 - p1)(1 + p1 (1 - p1)^(N-2)).
pub fn network_p_fail(n: usize, p1: f64) -> Result<f64> {
    check(n, p1, "p1")?;
    Ok((1.0 - p1) * (1.0 + p1 * (1.0 - p1).powi(n as i32 - 2)))
}

/// Probability of coherence over exactly k >= 2 sites given overall success.
/// NaN when success is impossible (p1 = 0).
pub fn network_p_k(n: usize, k: usize, p1: f64) -> Result<f64> {
    if !(2..=n).contains(&k) {
        return Err(Error::param(format!("k = {k} outside 2..={n}")));
    }
    let fail = network_p_fail(n, p1)?;
    if fail >= 1.0 {
        return Ok(f64::NAN);
    }
    let kf = k as f64;
    Ok(binomial_coefficient(n, k) * p1.powi(k as i32) * (1.0 - p1).powi((n - k) as i32) * kf
        / (n as f64 * (1.0 - fail)))
}

#[derive(Clone, Debug, PartialEq)]
pub struct NetworkFormulas {
    pub n: usize,
    pub fidelity: f64,
    pub p_fail: f64,
    /// (k, p(N, k)) for k = 2..=N.
    pub p_k: Vec<(usize, f64)>,
}

pub fn network_formulas(n: usize, f2: f64, p1: f64) -> Result<NetworkFormulas> {
    Ok(NetworkFormulas {
        n,
        fidelity: network_fidelity(n, f2)?,
        p_fail: network_p_fail(n, p1)?,
        p_k: (2..=n).map(|k| Ok((k, network_p_k(n, k, p1)?))).collect::<Result<_>>()?,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct NetworkSample {
    pub n: usize,
    pub trials: u64,
    pub failures: u64,
    /// Successful trials by number of coherent sites, indexed by k.
    pub k_counts: Vec<u64>,
}

impl NetworkSample {
    pub fn p_fail(&self) -> f64 {
        self.failures as f64 / self.trials as f64
    }

    pub fn p_fail_sigma(&self) -> f64 {
        let p = self.p_fail();
        (p * (1.0 - p) / self.trials as f64).sqrt()
    }

    fn successes(&self) -> u64 {
        self.trials - self.failures
    }

    pub fn p_k(&self, k: usize) -> f64 {
        self.k_counts[k] as f64 / self.successes() as f64
    }

    /// Binomial standard error of `p_k`, computed at the reference value `p`.
    pub fn p_k_sigma(&self, p: f64) -> f64 {
        (p * (1.0 - p) / self.successes() as f64).sqrt()
    }
}

/// Per-site Bernoulli(p1) erasure and a uniformly placed photon. A trial fails
/// when the photon sits at a failed site or when it is the only success.
pub fn network_monte_carlo(n: usize, p1: f64, trials: u64, seed: u64) -> Result<NetworkSample> {
    check(n, p1, "p1")?;
    if trials == 0 {
        return Err(Error::param("trials must be positive"));
    }
    let mut rng = seeded(seed);
    let mut failures = 0;
    let mut k_counts = vec![0; n + 1];
    let mut ok = vec![false; n];
    for _ in 0..trials {
        for s in ok.iter_mut() {
            *s = rng.random_bool(p1);
        }
        let photon = rng.random_range(0..n);
        let k = ok.iter().filter(|&&s| s).count();
        if !ok[photon] || k < 2 {
            failures += 1;
        } else {
            k_counts[k] += 1;
        }
    }
    Ok(NetworkSample {
        n,
        trials,
        failures,
        k_counts,
    })
}

const W_ENUM_LIMIT: f64 = 5e7;

/// Deterministic transfer of a W-state photon over `n` sites, every site
/// counting independently with the same table and correcting locally.
/// Returns the average fidelity with the W target.
pub fn w_network_fidelity(table: &SiteTable, n: usize) -> Result<f64> {
    let out = &table.outcomes;
    let t = out.len();
    if n < 2 {
        return Err(Error::param("need at least two sites"));
    }
    if (t as f64).powi(n as i32) > W_ENUM_LIMIT {
        return Err(Error::TooLarge(t.saturating_pow(n as u32)));
    }
    let mut idx = vec![0usize; n];
    let (mut total, mut overlap) = (0.0, 0.0);
    loop {
        let sites: Vec<_> = idx.iter().map(|&i| &out[i]).collect();
        for s in 0..n {
            // photon at s: w1 there, w0 everywhere else
            let others: f64 = (0..n).filter(|&u| u != s).map(|u| sites[u].w0).product();
            total += sites[s].w1 * others;
            overlap += sites[s].w1 * others;
            for r in 0..n {
                if r == s {
                    continue;
                }
                let rest: f64 = (0..n).filter(|&u| u != s && u != r).map(|u| sites[u].w0).product();
                overlap += sites[s].coh.norm() * sites[r].coh.norm() * rest;
            }
        }
        let mut d = 0;
        loop {
            if d == n {
                let nf = n as f64;
                return Ok((overlap / (nf * nf)) / (total / nf));
            }
            idx[d] += 1;
            if idx[d] < t {
                break;
            }
            idx[d] = 0;
            d += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::min_coherent_cutoff;
    use crate::transfer::{coherent_amplitude_table, two_site_transfer, TransferConfig, TransferMode};
    use crate::C64;

    #[test]
    fn closed_form_limits() {
        for f2 in [0.5, 0.7, 0.82, 1.0] {
            assert!((network_fidelity(2, f2).unwrap() - f2).abs() < 1e-15);
            assert!((network_fidelity(100_000, f2).unwrap() - (2.0 * f2 - 1.0)).abs() < 1e-4);
        }
        for p1 in [0.0, 0.3, 0.9, 1.0] {
            assert!((network_p_fail(2, p1).unwrap() - (1.0 - p1 * p1)).abs() < 1e-15);
        }
        assert_eq!(network_p_fail(5, 1.0).unwrap(), 0.0);
        assert!(network_fidelity(1, 0.8).is_err());
        assert!(network_p_fail(3, 1.5).is_err());
        assert!(network_p_k(3, 1, 0.5).is_err());
    }

    #[test]
    fn p_fail_matches_sum_form() {
        // oracle: single survivor plus photon at a failed site
        for n in 2..=10 {
            for p1 in [0.1f64, 0.35, 0.6, 0.95] {
                let q = 1.0 - p1;
                let mut sum = p1 * q.powi(n as i32 - 1);
                for i in 1..=n {
                    sum += binomial_coefficient(n, i) * q.powi(i as i32) * p1.powi((n - i) as i32) * i as f64 / n as f64;
                }
                assert!((sum - network_p_fail(n, p1).unwrap()).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn k_distribution_normalized() {
        for n in 2..=10 {
            for i in 1..=9 {
                let f = network_formulas(n, 0.8, i as f64 / 10.0).unwrap();
                let s: f64 = f.p_k.iter().map(|(_, p)| p).sum();
                assert!((s - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn monte_carlo_agrees() {
        for (n, p1) in [(2, 0.47), (5, 0.3), (8, 0.22f64.sqrt())] {
            let mc = network_monte_carlo(n, p1, 100_000, 11).unwrap();
            let pf = network_p_fail(n, p1).unwrap();
            assert!((mc.p_fail() - pf).abs() < 3.0 * (pf * (1.0 - pf) / 1e5).sqrt());
        }
        assert_eq!(network_monte_carlo(4, 1.0, 1000, 1).unwrap().failures, 0);
        assert!(network_monte_carlo(4, 0.5, 0, 1).is_err());
    }

    #[test]
    fn w_state_matches_formula() {
        let a = 0.5;
        let table = coherent_amplitude_table(C64::new(a, 0.0), min_coherent_cutoff(a)).unwrap().site_table().pruned(1e-12);
        let f2 = two_site_transfer(&TransferConfig::coherent(a, TransferMode::Deterministic)).unwrap().fidelity;
        let w2 = w_network_fidelity(&table, 2).unwrap();
        assert!((w2 - f2).abs() < 1e-9);
        let w3 = w_network_fidelity(&table, 3).unwrap();
        assert!((w3 - network_fidelity(3, f2).unwrap()).abs() < 1e-9, "{w3}");
    }
}
