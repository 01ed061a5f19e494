//! End-to-end acceptance checks, shared by the `acceptance` test target and
//! the command-line `verify` command. Each check returns a [`CriterionOutcome`]
//! instead of panicking, and includes its own time limit in the verdict.

use std::fmt;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::{
    beta_interval, default_constant, lower_bound, min_kappa_threshold, rs_gaussian_value, rs_upper_bound, sk_constant,
    symmetry_breaking_criterion, RegionQuery, SystemSize,
};
use crate::error::Result;
use crate::exact::ExactLab;
use crate::glass::{sk_energy, ColorProfile, DisorderSample, ModelParams};
use crate::mc::{anneal_ground_state, estimate_sector_max, thermo_integrate, LadderConfig, System, DEFAULT_RUNGS};
use crate::rng::derive_seed;

const SEED: u64 = 0x5eed_2024;

#[derive(Debug, Clone, Serialize)]
pub struct CriterionOutcome {
    pub id: u32,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    #[serde(rename = "elapsed_seconds", serialize_with = "as_seconds")]
    pub elapsed: Duration,
    #[serde(rename = "limit_seconds", serialize_with = "as_seconds")]
    pub limit: Duration,
}

fn as_seconds<S: serde::Serializer>(d: &Duration, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_f64(d.as_secs_f64())
}

impl fmt::Display for CriterionOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} criterion {:>2} {}: {} ({:.2}s, limit {}s)",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.detail,
            self.elapsed.as_secs_f64(),
            self.limit.as_secs()
        )
    }
}

/// Runs `check`, timing it; errors count as failures.
fn timed(id: u32, name: &'static str, limit_secs: u64, check: impl FnOnce() -> Result<(bool, String)>) -> CriterionOutcome {
    let start = Instant::now();
    let result = check();
    let elapsed = start.elapsed();
    let limit = Duration::from_secs(limit_secs);
    let (ok, mut detail) = match result {
        Ok(pair) => pair,
        Err(e) => (false, format!("error: {e}")),
    };
    let in_time = elapsed <= limit;
    if !in_time {
        detail.push_str("; over time limit");
    }
    CriterionOutcome {
        id,
        name,
        passed: ok && in_time,
        detail,
        elapsed,
        limit,
    }
}

pub fn threshold_58() -> CriterionOutcome {
    timed(1, "threshold 58", 1, || {
        let k = min_kappa_threshold(default_constant())?;
        let below = beta_interval(57, default_constant());
        Ok((k == 58 && below.is_none(), format!("min kappa {k}, interval at 57: {below:?}")))
    })
}

pub fn threshold_21() -> CriterionOutcome {
    timed(2, "threshold 21", 1, || {
        let k = min_kappa_threshold(sk_constant())?;
        Ok((k == 21, format!("min kappa {k}")))
    })
}

fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// `(1/N) log sum_s exp((beta / 2) sk(s))` by direct enumeration of Ising spins.
fn sk_log_partition(disorder: &DisorderSample, beta: f64) -> Result<f64> {
    let n = disorder.n();
    let mut exponents = Vec::with_capacity(1 << n);
    let mut spins = vec![1i8; n];
    for mask in 0u32..(1 << n) {
        for (i, s) in spins.iter_mut().enumerate() {
            *s = if mask >> i & 1 == 1 { -1 } else { 1 };
        }
        exponents.push(0.5 * beta * sk_energy(disorder, &spins)?);
    }
    Ok(log_sum_exp(&exponents) / n as f64)
}

pub fn sk_identity() -> CriterionOutcome {
    timed(3, "two colors vs SK", 60, || {
        let lab = ExactLab::new();
        let betas = [0.5, 1.0, 3.0];
        let mut worst = 0.0f64;
        for n in 2..=10usize {
            let diffs = (0..100u64)
                .into_par_iter()
                .map(|i| {
                    let disorder = DisorderSample::generate(n, derive_seed(SEED ^ n as u64, i));
                    let shift = disorder.total() / (2.0 * (n as f64).powf(1.5));
                    let mut worst = 0.0f64;
                    for &beta in &betas {
                        let potts = lab.log_partition(&ModelParams::new(n, 2, beta)?, &disorder, None)?;
                        let sk = beta * shift + sk_log_partition(&disorder, beta)?;
                        worst = worst.max((potts - sk).abs());
                    }
                    Ok(worst)
                })
                .collect::<Result<Vec<f64>>>()?;
            worst = diffs.into_iter().fold(worst, f64::max);
        }
        Ok((worst <= 1e-10, format!("max |difference| {worst:e} over N = 2..10, 100 disorders each")))
    })
}

pub fn zero_beta_exactness() -> CriterionOutcome {
    timed(4, "beta = 0 exactness", 10, || {
        let lab = ExactLab::new();
        let mut bad = Vec::new();
        let mut cases = 0;
        for &n in &[1usize, 2, 5, 8, 12, 40] {
            for &kappa in &[2usize, 3, 5, 10, 58] {
                let q = lab.quenched_free_energy(&ModelParams::new(n, kappa, 0.0)?, 20, SEED, None)?;
                cases += 1;
                if q.mean != (kappa as f64).ln() || q.std_error != 0.0 {
                    bad.push(format!("N={n} kappa={kappa}: {} +- {}", q.mean, q.std_error));
                }
            }
        }
        Ok((bad.is_empty(), if bad.is_empty() { format!("{cases} cases exact") } else { bad.join(", ") }))
    })
}

pub fn finite_lower_bound() -> CriterionOutcome {
    timed(5, "finite-N lower bound", 600, || {
        let lab = ExactLab::new();
        let mut worst_margin = f64::INFINITY;
        let mut failures = Vec::new();
        for &n in &[4usize, 6, 8] {
            for &kappa in &[2usize, 3] {
                for &beta in &[0.5, 1.0, 2.0] {
                    let q = lab.quenched_free_energy(&ModelParams::new(n, kappa, beta)?, 500, derive_seed(SEED, n as u64), None)?;
                    let bound = lower_bound(SystemSize::Finite(n), beta);
                    let margin = q.mean + 4.0 * q.std_error - bound;
                    worst_margin = worst_margin.min(margin);
                    if margin < 0.0 {
                        failures.push(format!("N={n} kappa={kappa} beta={beta}"));
                    }
                }
            }
        }
        let detail = if failures.is_empty() {
            format!("18 cases, smallest margin {worst_margin:.4}")
        } else {
            format!("violated at {}", failures.join(", "))
        };
        Ok((failures.is_empty(), detail))
    })
}

pub fn rs_gaussian_identity() -> CriterionOutcome {
    timed(6, "replica-symmetric Gaussian identity", 60, || {
        let mut worst = 0.0f64;
        let mut failures = Vec::new();
        for &kappa in &[2usize, 4, 8, 58] {
            for &beta in &[0.0, 1.0, 5.0, 20.0] {
                let est = rs_gaussian_value(kappa, beta, 1_000_000, derive_seed(SEED, kappa as u64))?;
                let target = rs_upper_bound(kappa, beta);
                let dev = (est.value - target).abs();
                let ok = if est.std_error == 0.0 { dev == 0.0 } else { dev <= 4.0 * est.std_error };
                if est.std_error > 0.0 {
                    worst = worst.max(dev / est.std_error);
                }
                if !ok {
                    failures.push(format!("kappa={kappa} beta={beta}: {} vs {target}", est.value));
                }
            }
        }
        let detail = if failures.is_empty() {
            format!("16 points, largest deviation {worst:.2} sigma")
        } else {
            failures.join(", ")
        };
        Ok((failures.is_empty(), detail))
    })
}

pub fn thermo_vs_exact() -> CriterionOutcome {
    timed(7, "thermodynamic integration vs enumeration", 300, || {
        let params = ModelParams::new(8, 3, 1.0)?;
        let ladder = LadderConfig::hybrid(1.0, DEFAULT_RUNGS)?;
        let lab = ExactLab::new();
        let errors = (0..20u64)
            .into_par_iter()
            .map(|i| {
                let disorder = DisorderSample::generate(8, derive_seed(SEED, i));
                let exact = lab.log_partition(&params, &disorder, None)?;
                let system = System::new(params, &disorder)?;
                let mc = thermo_integrate(&system, &ladder, derive_seed(SEED ^ 7, i))?.value;
                Ok((mc - exact).abs())
            })
            .collect::<Result<Vec<f64>>>()?;
        let worst = errors.iter().copied().fold(0.0, f64::max);
        Ok((worst <= 0.02, format!("max |error| {worst:.5} over 20 disorders")))
    })
}

pub fn ground_states() -> CriterionOutcome {
    timed(8, "annealing vs exact ground states", 600, || {
        let lab = ExactLab::new();
        let schedule = LadderConfig::default_anneal();
        let tol = 1e-9;

        let full = (0..100u64)
            .into_par_iter()
            .map(|i| {
                let params = ModelParams::new(14, 2, 0.0)?;
                let disorder = DisorderSample::generate(14, derive_seed(SEED ^ 8, i));
                let (_, exact) = lab.exact_ground_state(&params, &disorder, None)?;
                let (_, found) = anneal_ground_state(&System::new(params, &disorder)?, &schedule, 8, i)?;
                Ok((found >= exact - tol, found <= exact + tol))
            })
            .collect::<Result<Vec<(bool, bool)>>>()?;
        let hits = full.iter().filter(|r| r.0).count();
        let never_above = full.iter().all(|r| r.1);

        let profile = ColorProfile::uniform(3, 1e-9)?;
        let sector = (0..100u64)
            .into_par_iter()
            .map(|i| {
                let params = ModelParams::new(12, 3, 0.0)?;
                let disorder = DisorderSample::generate(12, derive_seed(SEED ^ 9, i));
                let (_, exact) = lab.exact_ground_state(&params, &disorder, Some(&profile))?;
                let (sigma, found) = estimate_sector_max(&System::new(params, &disorder)?, &profile, &schedule, 8, i)?;
                let inside = profile.admits_counts(sigma.counts(), 12);
                Ok((found >= exact - tol, found <= exact + tol && inside))
            })
            .collect::<Result<Vec<(bool, bool)>>>()?;
        let sector_hits = sector.iter().filter(|r| r.0).count();
        let sector_never_above = sector.iter().all(|r| r.1);

        let ok = hits >= 95 && never_above && sector_hits >= 95 && sector_never_above;
        Ok((
            ok,
            format!(
                "N=14 kappa=2: {hits}/100 exact{}; sector N=12 kappa=3: {sector_hits}/100 exact{}",
                if never_above { "" } else { ", EXCEEDED exact" },
                if sector_never_above { "" } else { ", EXCEEDED exact or left sector" }
            ),
        ))
    })
}

pub fn slope_sandwich() -> CriterionOutcome {
    timed(9, "large-beta sandwich", 60, || {
        let lab = ExactLab::new();
        let profiles = [
            (2usize, ColorProfile::uniform(2, 0.1)?),
            (2, ColorProfile::new(vec![0.7, 0.3], 0.15)?),
            (3, ColorProfile::uniform(3, 1e-9)?),
            (3, ColorProfile::uniform(3, 1.0)?),
            (3, ColorProfile::new(vec![0.5, 0.25, 0.25], 0.1)?),
            (4, ColorProfile::uniform(4, 0.3)?),
        ];
        let mut cases = 0usize;
        let mut failures = Vec::new();
        for &n in &[4usize, 6, 8] {
            for (kappa, profile) in &profiles {
                for &beta in &[0.0, 0.5, 1.0, 5.0, 20.0, 50.0] {
                    for &gamma in &[0.0, 0.5] {
                        for i in 0..3u64 {
                            let disorder = DisorderSample::generate(n, derive_seed(SEED ^ 10, i + 10 * n as u64));
                            let params = ModelParams::with_gamma(n, *kappa, beta, gamma)?;
                            let s = match lab.beta_slope_check(&params, &disorder, profile) {
                                Ok(s) => s,
                                // Sector empty at this N: nothing to check.
                                Err(crate::Error::EmptySector) => continue,
                                Err(e) => return Err(e),
                            };
                            cases += 1;
                            if !s.holds() {
                                failures.push(format!("N={n} beta={beta} d={}: {s:?}", profile.label()));
                            }
                        }
                    }
                }
            }
        }
        let detail = if failures.is_empty() { format!("{cases} instances hold") } else { failures.join("; ") };
        Ok((failures.is_empty() && cases > 0, detail))
    })
}

pub fn region_coherence() -> CriterionOutcome {
    timed(10, "region coherence", 10, || {
        let c = default_constant();
        let mismatches: usize = (2usize..=400)
            .into_par_iter()
            .map(|kappa| {
                let interval = beta_interval(kappa, c);
                (0..=8000)
                    .filter(|&j| {
                        let beta = j as f64 * 0.01;
                        let inside = interval.is_some_and(|(lo, hi)| lo < beta && beta < hi);
                        symmetry_breaking_criterion(&RegionQuery { kappa, beta, constant_c: c }) != inside
                    })
                    .count()
            })
            .sum();
        let (lo, hi) = beta_interval(58, c).expect("interval at 58");
        let gap = [lo, hi]
            .iter()
            .map(|&b| (lower_bound(SystemSize::Infinite, b) - rs_upper_bound(58, b)).abs())
            .fold(0.0, f64::max);
        Ok((
            mismatches == 0 && gap <= 1e-9,
            format!("{mismatches} grid mismatches on kappa 2..400 x beta 0..80; endpoint gap at 58: {gap:e}"),
        ))
    })
}

/// Every criterion, in order.
pub fn run_all() -> Vec<CriterionOutcome> {
    CHECKS.iter().map(|f| f()).collect()
}

/// A single criterion by number (1 to 10).
pub fn run(id: u32) -> Option<CriterionOutcome> {
    let index = usize::try_from(id).ok()?.checked_sub(1)?;
    CHECKS.get(index).map(|f| f())
}

const CHECKS: [fn() -> CriterionOutcome; 10] = [
    threshold_58,
    threshold_21,
    sk_identity,
    zero_beta_exactness,
    finite_lower_bound,
    rs_gaussian_identity,
    thermo_vs_exact,
    ground_states,
    slope_sandwich,
    region_coherence,
];
