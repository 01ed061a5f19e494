use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::QuenchedEstimate;
use crate::glass::{DisorderSample, ModelParams};
use crate::rng::{derive_seed, stream_rng};
use crate::stats::RunningStats;

use super::chain::{gibbs_sweep, ChainState, System};
use super::LadderConfig;

pub const TRACE_CSV_HEADER: &str = "beta,mean_energy,std_error,swap_acceptance,recolor_rate";

/// Per-rung diagnostics of a tempering run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RungTrace {
    pub beta: f64,
    /// Estimate of the Gibbs average of `H + (gamma / N) sum_k n_k^2`.
    pub mean_energy: f64,
    /// Standard error ignoring autocorrelation.
    pub std_error: f64,
    /// Acceptance rate of exchanges with the next rung; `None` on the top rung.
    pub swap_acceptance: Option<f64>,
    /// Fraction of heat-bath updates that changed a color.
    pub recolor_rate: f64,
}

impl RungTrace {
    pub fn csv_row(&self) -> String {
        let swap = self.swap_acceptance.map(|a| a.to_string()).unwrap_or_default();
        format!("{},{},{},{},{}", self.beta, self.mean_energy, self.std_error, swap, self.recolor_rate)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThermoEstimate {
    /// Estimate of `(1/N) log Z` at the top of the ladder.
    pub value: f64,
    pub rungs: Vec<RungTrace>,
}

/// Parallel tempering over a ladder of inverse temperatures.
///
/// Each rung owns a chain with its own random stream. Rungs advance
/// independently (in parallel) between exchange phases; exchanges between
/// neighbours are attempted serially, alternating even and odd pairs, with a
/// dedicated stream. Output does not depend on the number of threads.
pub struct Tempering<'a> {
    system: &'a System,
    chains: Vec<ChainState>,
    energy_stats: Vec<RunningStats>,
    recolors: Vec<u64>,
    swap_attempts: Vec<u64>,
    swap_accepts: Vec<u64>,
    exchange_rng: rand_chacha::ChaCha8Rng,
    sweeps_done: usize,
    rounds_done: usize,
    sweeps_per_exchange: usize,
    burn_in: usize,
}

impl<'a> Tempering<'a> {
    pub fn new(system: &'a System, ladder: &LadderConfig, seed: u64) -> Result<Self> {
        ladder.validate()?;
        let rungs = ladder.betas().len();
        let chains = ladder
            .betas()
            .iter()
            .enumerate()
            .map(|(k, &b)| ChainState::random(system, b, seed, k as u64))
            .collect();
        Ok(Self {
            system,
            chains,
            energy_stats: vec![RunningStats::new(); rungs],
            recolors: vec![0; rungs],
            swap_attempts: vec![0; rungs],
            swap_accepts: vec![0; rungs],
            exchange_rng: stream_rng(seed, u64::MAX),
            sweeps_done: 0,
            rounds_done: 0,
            sweeps_per_exchange: ladder.sweeps_per_exchange(),
            burn_in: ladder.burn_in(),
        })
    }

    pub fn chains(&self) -> &[ChainState] {
        &self.chains
    }

    /// `sweeps_per_exchange` sweeps on every rung followed by one exchange phase.
    pub fn round(&mut self) {
        let system = self.system;
        let start = self.sweeps_done;
        let spe = self.sweeps_per_exchange;
        let burn_in = self.burn_in;
        self.chains
            .par_iter_mut()
            .zip(self.energy_stats.par_iter_mut())
            .zip(self.recolors.par_iter_mut())
            .for_each(|((chain, stats), recolors)| {
                for s in 0..spe {
                    *recolors += gibbs_sweep(system, chain) as u64;
                    if start + s >= burn_in {
                        stats.push(chain.gibbs_energy(system));
                    }
                }
            });
        self.sweeps_done += spe;
        self.exchange();
        self.rounds_done += 1;
    }

    fn exchange(&mut self) {
        use rand::Rng;
        let rungs = self.chains.len();
        let mut k = self.rounds_done % 2;
        while k + 1 < rungs {
            let (lo, hi) = self.chains.split_at_mut(k + 1);
            let (a, b) = (&mut lo[k], &mut hi[0]);
            let log_ratio = (a.beta() - b.beta()) * (b.gibbs_energy(self.system) - a.gibbs_energy(self.system));
            self.swap_attempts[k] += 1;
            if log_ratio >= 0.0 || self.exchange_rng.random::<f64>() < log_ratio.exp() {
                a.exchange_configuration(b);
                self.swap_accepts[k] += 1;
            }
            k += 2;
        }
    }

    pub fn traces(&self) -> Vec<RungTrace> {
        let rungs = self.chains.len();
        let updates = (self.sweeps_done * self.system.n()).max(1) as f64;
        (0..rungs)
            .map(|k| RungTrace {
                beta: self.chains[k].beta(),
                mean_energy: self.energy_stats[k].mean(),
                std_error: self.energy_stats[k].std_error(),
                swap_acceptance: (k + 1 < rungs)
                    .then(|| self.swap_accepts[k] as f64 / self.swap_attempts[k].max(1) as f64),
                recolor_rate: self.recolors[k] as f64 / updates,
            })
            .collect()
    }
}

/// `(1/N) log Z(beta) = log kappa + (1/N) int_0^beta <H + (gamma/N) sum n_k^2>_b db`,
/// with the integrand estimated on every ladder rung by parallel tempering
/// and integrated with the trapezoid rule. The ladder must end at
/// `params.beta`.
pub fn thermo_integrate(system: &System, ladder: &LadderConfig, seed: u64) -> Result<ThermoEstimate> {
    ladder.validate()?;
    let params = system.params();
    let target = params.beta();
    if (ladder.top() - target).abs() > 1e-12 * target.max(1.0) {
        return Err(Error::invalid(
            "ladder",
            format!("top rung {} differs from beta = {target}", ladder.top()),
        ));
    }
    let log_kappa = (params.kappa() as f64).ln();
    if ladder.betas().len() == 1 {
        return Ok(ThermoEstimate {
            value: log_kappa,
            rungs: Vec::new(),
        });
    }
    let mut pt = Tempering::new(system, ladder, seed)?;
    let rounds = ladder.total_sweeps().div_ceil(ladder.sweeps_per_exchange());
    for _ in 0..rounds {
        pt.round();
    }
    let rungs = pt.traces();
    let integral: f64 = rungs
        .windows(2)
        .map(|w| 0.5 * (w[1].beta - w[0].beta) * (w[0].mean_energy + w[1].mean_energy))
        .sum();
    Ok(ThermoEstimate {
        value: log_kappa + integral / params.n() as f64,
        rungs,
    })
}

/// Disorder average of [`thermo_integrate`], disorder `i` drawn from
/// `derive_seed(seed, i)` exactly as in the exact quenched estimator.
pub fn quenched_thermo_integrate(params: &ModelParams, ladder: &LadderConfig, num_samples: usize, seed: u64) -> Result<QuenchedEstimate> {
    if num_samples == 0 {
        return Err(Error::invalid("samples", "must be at least 1"));
    }
    let values = (0..num_samples as u64)
        .into_par_iter()
        .map(|i| {
            let disorder_seed = derive_seed(seed, i);
            let system = System::new(*params, &DisorderSample::generate(params.n(), disorder_seed))?;
            Ok(thermo_integrate(&system, ladder, derive_seed(disorder_seed, 1))?.value)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(QuenchedEstimate::from_samples(*params, None, &values, seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::ExactLab;
    use crate::glass::{energy, SpinConfiguration};

    #[test]
    fn zero_beta_is_log_kappa() {
        let params = ModelParams::new(5, 4, 0.0).unwrap();
        let system = System::new(params, &DisorderSample::generate(5, 1)).unwrap();
        let est = thermo_integrate(&system, &LadderConfig::hybrid(0.0, 32).unwrap(), 3).unwrap();
        assert_eq!(est.value, 4f64.ln());
    }

    #[test]
    fn ladder_must_end_at_beta() {
        let params = ModelParams::new(4, 2, 1.0).unwrap();
        let system = System::new(params, &DisorderSample::generate(4, 1)).unwrap();
        assert!(thermo_integrate(&system, &LadderConfig::hybrid(2.0, 8).unwrap(), 0).is_err());
    }

    #[test]
    fn matches_exact_enumeration() {
        let params = ModelParams::new(8, 3, 1.0).unwrap();
        let d = DisorderSample::generate(8, 12);
        let system = System::new(params, &d).unwrap();
        let est = thermo_integrate(&system, &LadderConfig::hybrid(1.0, 32).unwrap(), 4).unwrap();
        let exact = ExactLab::new().log_partition(&params, &d, None).unwrap();
        assert!((est.value - exact).abs() < 0.02, "{} vs {exact}", est.value);
        assert_eq!(est.rungs.len(), 32);
        assert!(est.rungs[..31].iter().all(|r| r.swap_acceptance.unwrap() > 0.0));
        assert!(est.rungs[31].swap_acceptance.is_none());
    }

    #[test]
    fn matches_exact_with_bias() {
        let params = ModelParams::with_gamma(6, 3, 1.2, -0.6).unwrap();
        let d = DisorderSample::generate(6, 5);
        let system = System::new(params, &d).unwrap();
        let est = thermo_integrate(&system, &LadderConfig::hybrid(1.2, 24).unwrap(), 9).unwrap();
        let exact = ExactLab::new().log_partition(&params, &d, None).unwrap();
        assert!((est.value - exact).abs() < 0.02, "{} vs {exact}", est.value);
    }

    #[test]
    fn convex_across_endpoints() {
        let d = DisorderSample::generate(8, 31);
        let f = |b: f64| {
            let system = System::new(ModelParams::new(8, 3, b).unwrap(), &d).unwrap();
            thermo_integrate(&system, &LadderConfig::hybrid(b, 24).unwrap(), 2).unwrap().value
        };
        let (a, b, c) = (f(0.5), f(1.0), f(1.5));
        assert!(a - 2.0 * b + c >= -1e-3, "{a} {b} {c}");
    }

    #[test]
    fn deterministic_across_thread_counts() {
        let params = ModelParams::new(6, 3, 0.8).unwrap();
        let system = System::new(params, &DisorderSample::generate(6, 2)).unwrap();
        let ladder = LadderConfig::hybrid(0.8, 8).unwrap().with_sweeps(600, 100).unwrap();
        let a = thermo_integrate(&system, &ladder, 17).unwrap();
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = one.install(|| thermo_integrate(&system, &ladder, 17).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn two_rung_marginals_match_gibbs() {
        let d = DisorderSample::from_rows(&[vec![0.3, -0.9], vec![0.4, 0.2]]).unwrap();
        let params = ModelParams::new(2, 2, 1.5).unwrap();
        let system = System::new(params, &d).unwrap();
        let ladder = LadderConfig::new(vec![0.0, 1.5], 1, 1_000_000, 0).unwrap();
        let mut pt = Tempering::new(&system, &ladder, 6).unwrap();
        let samples = 60_000usize;
        let mut hist = [[0u64; 4]; 2];
        for _ in 0..samples {
            pt.round();
            pt.round();
            for (k, chain) in pt.chains().iter().enumerate() {
                let c = chain.sigma().colors();
                hist[k][c[0] * 2 + c[1]] += 1;
            }
        }
        for (k, &beta) in [0.0, 1.5].iter().enumerate() {
            let p_at = params.at_beta(beta).unwrap();
            let log_z = 2.0 * ExactLab::new().log_partition(&p_at, &d, None).unwrap();
            for idx in 0..4 {
                let s = SpinConfiguration::from_zero_based(vec![idx / 2, idx % 2], 2).unwrap();
                let p = (beta * energy(&params, &d, &s).unwrap() - log_z).exp();
                let expected = samples as f64 * p;
                let sd = (samples as f64 * p * (1.0 - p)).sqrt();
                let got = hist[k][idx] as f64;
                assert!((got - expected).abs() < 4.0 * sd, "rung {k} state {idx}: {got} vs {expected}");
            }
        }
        let traces = pt.traces();
        assert!(traces[0].swap_acceptance.unwrap() > 0.0);
    }

    #[test]
    fn quenched_average_tracks_exact() {
        let params = ModelParams::new(8, 3, 1.0).unwrap();
        let ladder = LadderConfig::hybrid(1.0, 16).unwrap().with_sweeps(3000, 500).unwrap();
        let mc = quenched_thermo_integrate(&params, &ladder, 200, 44).unwrap();
        let exact = ExactLab::new().quenched_free_energy(&params, 200, 44, None).unwrap();
        let combined = (mc.std_error.powi(2) + exact.std_error.powi(2)).sqrt();
        assert!((mc.mean - exact.mean).abs() < 4.0 * combined, "{mc:?} vs {exact:?}");
    }
}
