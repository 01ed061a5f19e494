//! Brute-force enumeration over all `kappa^N` colorings.
//!
//! This is the trusted oracle for small systems: partition functions (whole
//! space or a color sector), quenched averages over disorder and exact ground
//! states. Configurations are visited in lexicographic order by an odometer
//! whose last site turns fastest; each step applies one or more single-site
//! recolors at `O(N)` cost, and the energy is recomputed from scratch every
//! `N` steps so incremental rounding does not accumulate.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::glass::{energy::energy_unchecked, ColorProfile, Couplings, DisorderSample, ModelParams, SpinConfiguration};
use crate::rng::derive_seed;
use crate::stats::RunningStats;

/// Default cap on the number of enumerated configurations (`2^27`).
pub const DEFAULT_BUDGET: u64 = 1 << 27;

pub const QUENCHED_CSV_HEADER: &str = "N,kappa,beta,gamma,sector,mean,std_error,num_samples,seed";

/// Disorder-averaged free energy `F_N = E[(1/N) log Z]` with its standard error.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuenchedEstimate {
    #[serde(flatten)]
    pub params: ModelParams,
    pub sector: Option<ColorProfile>,
    pub mean: f64,
    /// Unbiased sample standard deviation over `sqrt(num_disorder_samples)`.
    pub std_error: f64,
    #[serde(rename = "num_samples")]
    pub num_disorder_samples: usize,
    pub seed: u64,
}

impl QuenchedEstimate {
    pub fn from_samples(
        params: ModelParams,
        sector: Option<ColorProfile>,
        values: &[f64],
        seed: u64,
    ) -> Self {
        let stats: RunningStats = values.iter().copied().collect();
        Self {
            params,
            sector,
            mean: stats.mean(),
            std_error: stats.std_error(),
            num_disorder_samples: values.len(),
            seed,
        }
    }

    pub fn csv_row(&self) -> String {
        let sector = self.sector.as_ref().map(ColorProfile::label).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.params.n(),
            self.params.kappa(),
            self.params.beta(),
            self.params.gamma(),
            sector,
            self.mean,
            self.std_error,
            self.num_disorder_samples,
            self.seed
        )
    }
}

/// Bracket `lower <= (1/N) log Z <= lower + log kappa` with
/// `lower = (1/N) max_sigma [beta H + (beta gamma / N) sum_k n_k^2]` over the sector.
/// For `gamma = 0` this is `(beta / N) max H`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlopeSandwich {
    pub lower: f64,
    pub log_partition: f64,
    pub upper: f64,
}

impl SlopeSandwich {
    /// Sandwich check. The upper side allows a few ulps, since `log(kappa^N) / N`
    /// and `log kappa` need not round identically.
    pub fn holds(&self) -> bool {
        let slack = 4.0 * f64::EPSILON * self.upper.abs().max(1.0);
        self.lower <= self.log_partition && self.log_partition <= self.upper + slack
    }
}

/// Exhaustive enumeration with a configurable budget.
#[derive(Debug, Clone, Copy)]
pub struct ExactLab {
    budget: u64,
}

impl Default for ExactLab {
    fn default() -> Self {
        Self { budget: DEFAULT_BUDGET }
    }
}

impl ExactLab {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_budget(budget: u64) -> Self {
        Self { budget }
    }

    pub fn budget(&self) -> u64 {
        self.budget
    }

    fn state_count(&self, params: &ModelParams) -> Result<u64> {
        let required = (params.kappa() as u128).checked_pow(params.n() as u32).unwrap_or(u128::MAX);
        if required > self.budget as u128 {
            return Err(Error::BudgetExceeded {
                required,
                budget: self.budget,
            });
        }
        Ok(required as u64)
    }

    fn check_inputs(params: &ModelParams, disorder: &DisorderSample, profile: Option<&ColorProfile>) -> Result<()> {
        if disorder.n() != params.n() {
            return Err(Error::DimensionMismatch {
                field: "disorder",
                expected: params.n(),
                found: disorder.n(),
            });
        }
        if let Some(p) = profile {
            if p.kappa() != params.kappa() {
                return Err(Error::DimensionMismatch {
                    field: "d",
                    expected: params.kappa(),
                    found: p.kappa(),
                });
            }
        }
        Ok(())
    }

    /// Calls `visit(colors, H, bias)` for every configuration (in the sector,
    /// if one is given) in lexicographic order. Returns the number visited.
    fn enumerate<F>(&self, params: &ModelParams, disorder: &DisorderSample, profile: Option<&ColorProfile>, mut visit: F) -> Result<u64>
    where
        F: FnMut(&[usize], f64, u64),
    {
        Self::check_inputs(params, disorder, profile)?;
        let total = self.state_count(params)?;
        let n = params.n();
        let kappa = params.kappa();
        let couplings = Couplings::new(disorder);

        let mut colors = vec![0usize; n];
        let mut counts = vec![0usize; kappa];
        counts[0] = n;
        let mut h = couplings.energy(&colors);
        let mut bias = (n * n) as u64;
        let mut since_refresh = 0usize;
        let mut visited = 0u64;

        for step in 0..total {
            if profile.is_none_or(|p| p.admits_counts(&counts, n)) {
                visit(&colors, h, bias);
                visited += 1;
            }
            if step + 1 == total {
                break;
            }
            let mut site = n - 1;
            loop {
                let old = colors[site];
                let new = if old + 1 < kappa { old + 1 } else { 0 };
                h += couplings.delta(&colors, site, new);
                bias = bias + 2 * counts[new] as u64 + 2 - 2 * counts[old] as u64;
                counts[old] -= 1;
                counts[new] += 1;
                colors[site] = new;
                if new != 0 {
                    break;
                }
                site -= 1;
            }
            since_refresh += 1;
            if since_refresh >= n {
                h = couplings.energy(&colors);
                since_refresh = 0;
            }
        }
        Ok(visited)
    }

    /// Streaming log-sum-exp of the Gibbs exponent; returns `(log Z, max exponent)`.
    fn log_sum_exp(&self, params: &ModelParams, disorder: &DisorderSample, profile: Option<&ColorProfile>) -> Result<(f64, f64)> {
        let beta = params.beta();
        let bias_weight = beta * params.gamma() / params.n() as f64;
        let mut max = f64::NEG_INFINITY;
        let mut scaled = 0.0f64;
        let visited = self.enumerate(params, disorder, profile, |_, h, bias| {
            let x = beta * h + bias_weight * bias as f64;
            if x > max {
                scaled = scaled * (max - x).exp() + 1.0;
                max = x;
            } else {
                scaled += (x - max).exp();
            }
        })?;
        if visited == 0 {
            return Err(Error::EmptySector);
        }
        Ok((max + scaled.ln(), max))
    }

    /// `(1/N) log sum_sigma exp(beta H(sigma) + (beta gamma / N) sum_k n_k^2)`,
    /// over all colorings or over a sector.
    ///
    /// At `beta = 0` without a sector the value is `log kappa` and nothing is
    /// enumerated.
    pub fn log_partition(&self, params: &ModelParams, disorder: &DisorderSample, profile: Option<&ColorProfile>) -> Result<f64> {
        if params.beta() == 0.0 && profile.is_none() {
            Self::check_inputs(params, disorder, profile)?;
            return Ok((params.kappa() as f64).ln());
        }
        let (log_z, _) = self.log_sum_exp(params, disorder, profile)?;
        Ok(log_z / params.n() as f64)
    }

    /// Averages [`ExactLab::log_partition`] over `num_samples` disorders; sample
    /// `i` is generated from `derive_seed(seed, i)`, so the result is independent
    /// of thread count.
    pub fn quenched_free_energy(
        &self,
        params: &ModelParams,
        num_samples: usize,
        seed: u64,
        profile: Option<&ColorProfile>,
    ) -> Result<QuenchedEstimate> {
        if num_samples == 0 {
            return Err(Error::invalid("samples", "must be at least 1"));
        }
        if params.beta() != 0.0 || profile.is_some() {
            self.state_count(params)?;
        }
        let values = (0..num_samples as u64)
            .into_par_iter()
            .map(|i| {
                let disorder = DisorderSample::generate(params.n(), derive_seed(seed, i));
                self.log_partition(params, &disorder, profile)
            })
            .collect::<Result<Vec<f64>>>()?;
        Ok(QuenchedEstimate::from_samples(*params, profile.cloned(), &values, seed))
    }

    /// Energy maximiser over all colorings or a sector, ties going to the
    /// lexicographically smallest color sequence. Only `H` is maximised; the
    /// bias term does not enter.
    pub fn exact_ground_state(
        &self,
        params: &ModelParams,
        disorder: &DisorderSample,
        profile: Option<&ColorProfile>,
    ) -> Result<(SpinConfiguration, f64)> {
        let mut best: Option<(Vec<usize>, f64, f64)> = None;
        self.enumerate(params, disorder, profile, |colors, h, _| match &mut best {
            None => best = Some((colors.to_vec(), h, energy_unchecked(disorder, colors))),
            Some((best_colors, best_h, best_exact)) => {
                let tol = 1e-9 * best_h.abs().max(1.0);
                let replace = if h > *best_h + tol {
                    true
                } else if h >= *best_h - tol {
                    // Near-tie: settle it on the exactly recomputed energies.
                    let exact = energy_unchecked(disorder, colors);
                    exact > *best_exact
                } else {
                    false
                };
                if replace {
                    best_colors.copy_from_slice(colors);
                    *best_h = h;
                    *best_exact = energy_unchecked(disorder, colors);
                }
            }
        })?;
        let (colors, _, exact) = best.ok_or(Error::EmptySector)?;
        Ok((SpinConfiguration::from_zero_based_unchecked(colors, params.kappa()), exact))
    }

    /// Large-`beta` sandwich for the (restricted) log-partition, computed in a
    /// single pass so `lower` is exactly the maximum exponent used in `log Z`.
    pub fn beta_slope_check(&self, params: &ModelParams, disorder: &DisorderSample, profile: &ColorProfile) -> Result<SlopeSandwich> {
        let n = params.n() as f64;
        let (log_z, max) = self.log_sum_exp(params, disorder, Some(profile))?;
        let lower = max / n;
        Ok(SlopeSandwich {
            lower,
            log_partition: log_z / n,
            upper: lower + (params.kappa() as f64).ln(),
        })
    }
}
