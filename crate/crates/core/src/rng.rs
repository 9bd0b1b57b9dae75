//! Seeded randomness. Every Monte Carlo result is a function of (seed, config).

use rand::SeedableRng;
use rand_distr::Distribution;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent child seed for trial `index`, so trials can run in any order.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    // splitmix64 finalizer over the combined word
    let mut z = seed
        .wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(index.wrapping_add(1)));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn trial_rng(seed: u64, index: u64) -> SimRng {
    seeded(derive_seed(seed, index))
}

/// One Binomial(n, p) draw; `p` is clamped to [0, 1].
pub fn binomial<R: rand::Rng + ?Sized>(rng: &mut R, n: u64, p: f64) -> u64 {
    let p = p.clamp(0.0, 1.0);
    if n == 0 || p == 0.0 {
        return 0;
    }
    if p == 1.0 {
        return n;
    }
    rand_distr::Binomial::new(n, p)
        .expect("probability clamped to [0, 1]")
        .sample(rng)
}

/// Multinomial counts over `probs` (normalized internally) via sequential binomials.
pub fn multinomial<R: rand::Rng + ?Sized>(rng: &mut R, n: u64, probs: &[f64]) -> Vec<u64> {
    let last = probs.iter().rposition(|&p| p > 0.0);
    let mut left = n;
    let mut mass: f64 = probs.iter().map(|p| p.max(0.0)).sum();
    let mut out = vec![0; probs.len()];
    for (i, &p) in probs.iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        let k = if Some(i) == last { left } else { binomial(rng, left, p / mass) };
        out[i] = k;
        left -= k;
        mass -= p;
    }
    out
}

/// How a measurement inside a protocol step is resolved.
pub enum Branching<'a> {
    /// Keep every outcome with its probability.
    Enumerate,
    /// Draw one outcome.
    Sample(&'a mut SimRng),
}

impl Branching<'_> {
    /// Applies the policy to weighted outcomes. A sampled outcome keeps its probability.
    pub fn select<T>(&mut self, mut branches: Vec<(f64, T)>) -> Vec<(f64, T)> {
        match self {
            Branching::Enumerate => branches,
            Branching::Sample(rng) => {
                let total: f64 = branches.iter().map(|b| b.0).sum();
                let mut u = rand::Rng::random::<f64>(*rng) * total;
                let mut pick = branches.len().saturating_sub(1);
                for (i, b) in branches.iter().enumerate() {
                    if u < b.0 {
                        pick = i;
                        break;
                    }
                    u -= b.0;
                }
                if branches.is_empty() {
                    return branches;
                }
                vec![branches.swap_remove(pick)]
            }
        }
    }

    pub fn is_enumerate(&self) -> bool {
        matches!(self, Branching::Enumerate)
    }
}
