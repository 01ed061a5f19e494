//! Analytic side: the finite-`N` lower bound on the free energy, the
//! replica-symmetric upper bound at uniform color proportions, the region of
//! `(kappa, beta)` where the former exceeds the latter, and validation of
//! matrix-valued order-parameter paths.
//!
//! The lower bound is linear in `beta` with slope `c`; the default slope is
//! `2 / (3 sqrt(pi))`, and [`sk_constant`] gives the slope implied by the
//! Sherrington-Kirkpatrick ground-state energy. With slope `c`, colour
//! symmetry is broken wherever `c beta > log kappa + beta^2 / (2 kappa)`.

mod gaussian;
mod path;
mod region;

pub use gaussian::{rs_gaussian_value, RsGaussianEstimate};
pub use path::{validate_path, MatrixPath, PathViolation, ViolationKind, PSD_TOLERANCE, SYMMETRY_TOLERANCE};
pub use region::{beta_grid, region_scan, thresholds_summary, KappaInterval, RegionGrid, ThresholdRow, REGION_CSV_HEADER, THRESHOLD_TABLE_HEADER};

use serde::Serialize;

use crate::error::{Error, Result};

/// Ground-state energy density of the SK model in the usual normalisation.
pub const SK_GROUND_STATE_ENERGY: f64 = 0.7632;

/// `2 / (3 sqrt(pi))`, the large-`N` slope of the free-energy lower bound.
pub fn default_constant() -> f64 {
    2.0 / (3.0 * std::f64::consts::PI.sqrt())
}

/// `sqrt(2) * 0.7632 / 2`: half the maximal per-site SK energy in this
/// crate's normalisation, which is the slope of the improved lower bound.
pub fn sk_constant() -> f64 {
    0.5 * std::f64::consts::SQRT_2 * SK_GROUND_STATE_ENERGY
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SystemSize {
    Finite(usize),
    Infinite,
}

/// `((N - 1) / N)^{3/2} * 2 beta / (3 sqrt(pi))`; the prefactor is 1 for `N = infinity`.
pub fn lower_bound(size: SystemSize, beta: f64) -> f64 {
    let prefactor = match size {
        SystemSize::Finite(n) => ((n as f64 - 1.0) / n as f64).powf(1.5),
        SystemSize::Infinite => 1.0,
    };
    prefactor * default_constant() * beta
}

/// `log kappa + beta^2 / (2 kappa)`.
pub fn rs_upper_bound(kappa: usize, beta: f64) -> f64 {
    (kappa as f64).ln() + beta * beta / (2.0 * kappa as f64)
}

/// A point `(kappa, beta)` together with the lower-bound slope.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegionQuery {
    pub kappa: usize,
    pub beta: f64,
    pub constant_c: f64,
}

impl RegionQuery {
    pub fn new(kappa: usize, beta: f64, constant_c: f64) -> Result<Self> {
        if kappa < 2 {
            return Err(Error::invalid("kappa", format!("must be at least 2, got {kappa}")));
        }
        if !(beta >= 0.0) || !beta.is_finite() {
            return Err(Error::invalid("beta", format!("must be finite and >= 0, got {beta}")));
        }
        check_constant(constant_c)?;
        Ok(Self { kappa, beta, constant_c })
    }

    pub fn with_default_constant(kappa: usize, beta: f64) -> Result<Self> {
        Self::new(kappa, beta, default_constant())
    }
}

fn check_constant(c: f64) -> Result<()> {
    if !(c > 0.0 && c <= 1.0) {
        return Err(Error::invalid("constant_c", format!("must lie in (0, 1], got {c}")));
    }
    Ok(())
}

/// Strict `c beta > log kappa + beta^2 / (2 kappa)`.
pub fn symmetry_breaking_criterion(query: &RegionQuery) -> bool {
    query.constant_c * query.beta > rs_upper_bound(query.kappa, query.beta)
}

/// The same region written as
/// `kappa / log kappa > 2 / c^2` and `|beta / (kappa c) - 1|^2 < 1 - 2 log kappa / (kappa c^2)`.
pub fn symmetry_breaking_closed_form(query: &RegionQuery) -> bool {
    let k = query.kappa as f64;
    let c = query.constant_c;
    let log_k = k.ln();
    k / log_k > 2.0 / (c * c) && (query.beta / (k * c) - 1.0).powi(2) < 1.0 - 2.0 * log_k / (k * c * c)
}

/// Open interval of `beta` on which the criterion holds, if non-empty:
/// the roots of `beta^2 - 2 kappa c beta + 2 kappa log kappa`.
pub fn beta_interval(kappa: usize, constant_c: f64) -> Option<(f64, f64)> {
    let k = kappa as f64;
    let center = k * constant_c;
    let product = 2.0 * k * k.ln();
    let disc = center * center - product;
    if !(disc > 0.0) {
        return None;
    }
    let upper = center + disc.sqrt();
    // Lower root from the product of the roots, avoiding cancellation.
    Some((product / upper, upper))
}

/// Smallest `kappa >= 2` whose beta interval is non-empty, by upward scan.
/// The scan is capped at `10 * ceil(exp(2 / c^2))` (and at `10^12`).
pub fn min_kappa_threshold(constant_c: f64) -> Result<u64> {
    check_constant(constant_c)?;
    let cap_f = 10.0 * (2.0 / (constant_c * constant_c)).exp().ceil();
    let cap = if cap_f.is_finite() && cap_f < 1e12 { cap_f as u64 } else { 1_000_000_000_000 };
    (2..=cap)
        .find(|&k| beta_interval(k as usize, constant_c).is_some())
        .ok_or(Error::ThresholdCapExceeded { cap })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lower_bound_values() {
        assert_eq!(lower_bound(SystemSize::Finite(1), 3.7), 0.0);
        assert_eq!(lower_bound(SystemSize::Infinite, 0.0), 0.0);
        assert_eq!(lower_bound(SystemSize::Finite(10), 0.0), 0.0);
        assert!((lower_bound(SystemSize::Infinite, 1.0) - 0.376126).abs() < 5e-7);
        let n8 = lower_bound(SystemSize::Finite(8), 2.0);
        assert!((n8 - (7.0f64 / 8.0).powf(1.5) * 2.0 * 0.376_126_389_031_837_5).abs() < 1e-15);
    }

    #[test]
    fn rs_upper_bound_values() {
        assert_eq!(rs_upper_bound(7, 0.0), 7f64.ln());
        assert!((rs_upper_bound(58, 20.0) - 7.5087).abs() < 5e-5);
        assert!((rs_upper_bound(58, 20.0) - 7.508_718_872_615_385).abs() < 1e-14);
        assert!((rs_upper_bound(2, 2.0) - (2f64.ln() + 1.0)).abs() < 1e-15);
    }

    #[test]
    fn criterion_examples() {
        for beta in [0.0, 5.0, 19.6, 21.8, 22.0, 24.0, 40.0] {
            assert!(!symmetry_breaking_criterion(&RegionQuery::with_default_constant(57, beta).unwrap()));
        }
        assert!(symmetry_breaking_criterion(&RegionQuery::with_default_constant(58, 22.0).unwrap()));
        assert!(!symmetry_breaking_criterion(&RegionQuery::with_default_constant(58, 10.0).unwrap()));
        assert!(symmetry_breaking_closed_form(&RegionQuery::with_default_constant(58, 22.0).unwrap()));
        assert!(!symmetry_breaking_closed_form(&RegionQuery::with_default_constant(58, 10.0).unwrap()));
        assert!(RegionQuery::new(58, 1.0, 1.5).is_err());
        assert!(RegionQuery::new(58, 1.0, 0.0).is_err());
        assert!(RegionQuery::new(1, 1.0, 0.5).is_err());
        assert!(RegionQuery::new(5, -1.0, 0.5).is_err());
    }

    #[test]
    fn interval_at_threshold() {
        let (lo, hi) = beta_interval(58, default_constant()).unwrap();
        assert!((lo - 19.602_355_555_737_82).abs() < 1e-12);
        assert!((hi - 24.028_305_571_955_33).abs() < 1e-12);
        assert!(beta_interval(57, default_constant()).is_none());
        for kappa in [58, 80, 200, 1000] {
            let c = default_constant();
            let (a, b) = beta_interval(kappa, c).unwrap();
            let mid = 0.5 * (a + b);
            assert!((mid - kappa as f64 * c).abs() < 1e-9 * mid);
            assert!(c * mid > rs_upper_bound(kappa, mid));
        }
    }

    #[test]
    fn thresholds() {
        assert_eq!(min_kappa_threshold(default_constant()).unwrap(), 58);
        assert_eq!(min_kappa_threshold(sk_constant()).unwrap(), 21);
        assert!((sk_constant() - 0.53966).abs() < 1e-5);
        assert!(min_kappa_threshold(0.0).is_err());
        assert!(min_kappa_threshold(1.01).is_err());
    }

    #[test]
    fn threshold_agrees_with_dense_scan() {
        // Oracle: first kappa in [2, 100] for which the closed form holds at some
        // beta on a fine grid around kappa * c.
        for c in [1.0, 0.9, 0.75, 0.6, sk_constant(), 0.45, default_constant()] {
            let oracle = (2..=100usize).find(|&k| {
                let center = k as f64 * c;
                (-2000..=2000).any(|i| {
                    let beta = center * (1.0 + i as f64 * 5e-4);
                    symmetry_breaking_closed_form(&RegionQuery { kappa: k, beta, constant_c: c })
                })
            });
            assert_eq!(Some(min_kappa_threshold(c).unwrap()), oracle.map(|k| k as u64), "c = {c}");
        }
    }

    #[test]
    fn threshold_monotone_in_constant() {
        let mut last = u64::MAX;
        for i in 1..=60 {
            let c = 0.3 + i as f64 * 0.7 / 60.0;
            let k = min_kappa_threshold(c).unwrap();
            assert!(k <= last, "c = {c}");
            last = k;
        }
    }

    #[test]
    fn criterion_interval_coherence() {
        for c in [default_constant(), sk_constant(), 0.8] {
            for kappa in 2..=300 {
                let interval = beta_interval(kappa, c);
                for i in 0..=1500 {
                    let beta = i as f64 * 0.1;
                    let q = RegionQuery { kappa, beta, constant_c: c };
                    let inside = interval.is_some_and(|(a, b)| a < beta && beta < b);
                    assert_eq!(symmetry_breaking_criterion(&q), inside, "kappa {kappa} beta {beta}");
                    assert_eq!(symmetry_breaking_closed_form(&q), inside, "kappa {kappa} beta {beta}");
                }
            }
        }
    }

    #[test]
    fn bounds_cross_at_interval_endpoints() {
        for kappa in [58, 70, 120, 500] {
            let (a, b) = beta_interval(kappa, default_constant()).unwrap();
            for beta in [a, b] {
                assert!((lower_bound(SystemSize::Infinite, beta) - rs_upper_bound(kappa, beta)).abs() < 1e-9);
            }
            for i in 1..50 {
                let beta = a + (b - a) * i as f64 / 50.0;
                assert!(lower_bound(SystemSize::Infinite, beta) > rs_upper_bound(kappa, beta));
            }
        }
    }
}
