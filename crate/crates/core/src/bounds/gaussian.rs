use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rng::{derive_seed, stream_rng};
use crate::stats::RunningStats;

const CHUNK: usize = 1 << 14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RsGaussianEstimate {
    pub value: f64,
    pub std_error: f64,
}

/// Monte Carlo estimate of `log E sum_k exp(a z_k) - beta^2 / (2 kappa)` with
/// `a = beta sqrt(2 / kappa)` and `z_k` i.i.d. standard Gaussians.
///
/// Each `E exp(a z_k)` is importance sampled from `N(a, s^2)` with
/// `s^2 = 1 + a^2 / (1 + a^2)`. Centering at the tilt keeps the lognormal
/// tail under control for large `a`; the width `s > 1` keeps the weights
/// bounded. At `a = 0` the proposal is the target and every sample equals
/// `kappa`, giving `log kappa` with zero standard error.
///
/// The standard error comes from the delta method on `log` of the sample mean.
pub fn rs_gaussian_value(kappa: usize, beta: f64, num_samples: usize, seed: u64) -> Result<RsGaussianEstimate> {
    if kappa < 2 {
        return Err(Error::invalid("kappa", format!("must be at least 2, got {kappa}")));
    }
    if !(beta >= 0.0) || !beta.is_finite() {
        return Err(Error::invalid("beta", format!("must be finite and >= 0, got {beta}")));
    }
    if num_samples == 0 {
        return Err(Error::invalid("samples", "must be at least 1"));
    }
    let a = beta * (2.0 / kappa as f64).sqrt();
    let mu = a;
    let s2 = 1.0 + a * a / (1.0 + a * a);
    let log_s = 0.5 * s2.ln();
    let s = s2.sqrt();
    // Log-weight at the proposal centre, factored out of every term.
    let shift = a * mu - half_sq(mu);

    let chunks = num_samples.div_ceil(CHUNK);
    let partials: Vec<RunningStats> = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = stream_rng(derive_seed(seed, chunk as u64), 0);
            let len = CHUNK.min(num_samples - chunk * CHUNK);
            let mut stats = RunningStats::new();
            for _ in 0..len {
                let mut sum = 0.0;
                for _ in 0..kappa {
                    let u: f64 = StandardNormal.sample(&mut rng);
                    let z = mu + s * u;
                    let log_term = a * z - shift - half_sq(z) + half_sq(z - mu) / s2 + log_s;
                    sum += log_term.exp();
                }
                stats.push(sum);
            }
            stats
        })
        .collect();
    let mut total = RunningStats::new();
    for p in &partials {
        total.merge(p);
    }
    let mean = total.mean();
    Ok(RsGaussianEstimate {
        value: mean.ln() + shift - beta * beta / (2.0 * kappa as f64),
        std_error: total.std_error() / mean,
    })
}

#[inline]
fn half_sq(x: f64) -> f64 {
    0.5 * (x * x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::rs_upper_bound;

    #[test]
    fn zero_beta_is_exact() {
        for kappa in [2, 5, 58] {
            let est = rs_gaussian_value(kappa, 0.0, 10_000, 1).unwrap();
            assert_eq!(est.value, (kappa as f64).ln());
            assert_eq!(est.std_error, 0.0);
        }
    }

    #[test]
    fn closed_form_at_moderate_beta() {
        let est = rs_gaussian_value(4, 2.0, 1_000_000, 7).unwrap();
        let exact = 4f64.ln() + 0.5;
        assert!((est.value - exact).abs() <= 4.0 * est.std_error, "{est:?} vs {exact}");
        assert!(est.std_error > 0.0 && est.std_error < 1e-3);
    }

    #[test]
    fn small_grid_consistency() {
        for (i, &(kappa, beta)) in [(2, 0.5), (3, 3.0), (10, 7.0), (30, 12.0)].iter().enumerate() {
            let est = rs_gaussian_value(kappa, beta, 100_000, i as u64).unwrap();
            let exact = rs_upper_bound(kappa, beta);
            assert!((est.value - exact).abs() <= 4.0 * est.std_error, "kappa {kappa} beta {beta}: {est:?} vs {exact}");
        }
    }

    #[test]
    fn independent_of_thread_count() {
        let a = rs_gaussian_value(5, 1.5, 50_000, 3).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| rs_gaussian_value(5, 1.5, 50_000, 3).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(rs_gaussian_value(1, 1.0, 10, 0).is_err());
        assert!(rs_gaussian_value(3, 1.0, 0, 0).is_err());
        assert!(rs_gaussian_value(3, -1.0, 10, 0).is_err());
    }
}
