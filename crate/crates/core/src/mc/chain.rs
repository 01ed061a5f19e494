use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::glass::{energy::energy_unchecked, Couplings, DisorderSample, ModelParams, SpinConfiguration};
use crate::rng::stream_rng;

/// Sweeps between full recomputations of the cached energy and local fields.
pub const REFRESH_INTERVAL: usize = 128;

/// A disorder realisation prepared for sampling: model parameters plus the
/// symmetrised couplings.
#[derive(Debug, Clone)]
pub struct System {
    params: ModelParams,
    disorder: DisorderSample,
    couplings: Couplings,
}

impl System {
    pub fn new(params: ModelParams, disorder: &DisorderSample) -> Result<Self> {
        if disorder.n() != params.n() {
            return Err(Error::DimensionMismatch {
                field: "disorder",
                expected: params.n(),
                found: disorder.n(),
            });
        }
        Ok(Self {
            params,
            disorder: disorder.clone(),
            couplings: Couplings::new(disorder),
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn disorder(&self) -> &DisorderSample {
        &self.disorder
    }

    pub fn couplings(&self) -> &Couplings {
        &self.couplings
    }

    pub fn n(&self) -> usize {
        self.params.n()
    }

    pub fn kappa(&self) -> usize {
        self.params.kappa()
    }

    /// Weight of `sum_k n_k^2` in the energy entering the Gibbs measure.
    pub(crate) fn bias_coefficient(&self) -> f64 {
        self.params.gamma() / self.params.n() as f64
    }

    /// Exact `H` of a configuration.
    pub fn energy_of(&self, sigma: &SpinConfiguration) -> f64 {
        energy_unchecked(&self.disorder, sigma.colors())
    }
}

/// One Markov chain: configuration, cached energy and local fields, its
/// inverse temperature and its private random stream.
#[derive(Debug, Clone)]
pub struct ChainState {
    sigma: SpinConfiguration,
    fields: Vec<f64>,
    energy: f64,
    bias: u64,
    beta: f64,
    stream: u64,
    rng: ChaCha8Rng,
    sweeps_since_refresh: usize,
}

impl ChainState {
    pub fn new(system: &System, sigma: SpinConfiguration, beta: f64, seed: u64, stream: u64) -> Result<Self> {
        Self::with_rng(system, sigma, beta, stream_rng(seed, stream), stream)
    }

    /// Chain started from a uniformly random coloring drawn from its own stream.
    pub fn random(system: &System, beta: f64, seed: u64, stream: u64) -> Self {
        let mut rng = stream_rng(seed, stream);
        let kappa = system.kappa();
        let colors = (0..system.n()).map(|_| rng.random_range(0..kappa)).collect();
        let sigma = SpinConfiguration::from_zero_based_unchecked(colors, kappa);
        Self::with_rng(system, sigma, beta, rng, stream).expect("dimensions are consistent by construction")
    }

    pub(crate) fn with_rng(system: &System, sigma: SpinConfiguration, beta: f64, rng: ChaCha8Rng, stream: u64) -> Result<Self> {
        if sigma.len() != system.n() {
            return Err(Error::DimensionMismatch {
                field: "sigma",
                expected: system.n(),
                found: sigma.len(),
            });
        }
        if sigma.kappa() != system.kappa() {
            return Err(Error::DimensionMismatch {
                field: "kappa",
                expected: system.kappa(),
                found: sigma.kappa(),
            });
        }
        if !(beta >= 0.0) || !beta.is_finite() {
            return Err(Error::invalid("beta", format!("must be finite and >= 0, got {beta}")));
        }
        let mut state = Self {
            sigma,
            fields: Vec::new(),
            energy: 0.0,
            bias: 0,
            beta,
            stream,
            rng,
            sweeps_since_refresh: 0,
        };
        state.refresh(system);
        Ok(state)
    }

    pub fn sigma(&self) -> &SpinConfiguration {
        &self.sigma
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn set_beta(&mut self, beta: f64) {
        self.beta = beta;
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Cached `H(sigma)`.
    pub fn current_energy(&self) -> f64 {
        self.energy
    }

    /// Cached `sum_k n_k^2`.
    pub fn bias(&self) -> u64 {
        self.bias
    }

    /// Energy conjugate to `beta` in the Gibbs weight: `H + (gamma / N) sum_k n_k^2`.
    pub fn gibbs_energy(&self, system: &System) -> f64 {
        self.energy + system.bias_coefficient() * self.bias as f64
    }

    #[inline]
    pub(crate) fn field(&self, site: usize, color: usize) -> f64 {
        self.fields[site * self.sigma.kappa() + color]
    }

    pub(crate) fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    /// Recomputes energy, bias and local fields from scratch.
    pub fn refresh(&mut self, system: &System) {
        let c = system.couplings();
        self.fields = c.local_fields(self.sigma.colors(), self.sigma.kappa());
        self.energy = c.energy(self.sigma.colors());
        self.bias = crate::glass::bias_term(&self.sigma);
        self.sweeps_since_refresh = 0;
    }

    /// Recolors `site`, updating every cache in `O(N)`.
    pub(crate) fn apply_recolor(&mut self, system: &System, site: usize, new: usize) {
        let old = self.sigma.color(site);
        if old == new {
            return;
        }
        let kappa = self.sigma.kappa();
        self.energy += self.field(site, new) - self.field(site, old);
        let counts = self.sigma.counts();
        self.bias = self.bias + 2 * counts[new] as u64 + 2 - 2 * counts[old] as u64;
        self.sigma.recolor(site, new);
        let row = system.couplings().row(site);
        for (i, &w) in row.iter().enumerate() {
            self.fields[i * kappa + old] -= w;
            self.fields[i * kappa + new] += w;
        }
    }

    /// Energy change of exchanging the colors of `i` and `j`.
    pub(crate) fn swap_delta(&self, system: &System, i: usize, j: usize) -> f64 {
        let a = self.sigma.color(i);
        let b = self.sigma.color(j);
        if a == b {
            return 0.0;
        }
        self.field(i, b) - self.field(i, a) + self.field(j, a) - self.field(j, b) - 2.0 * system.couplings().get(i, j)
    }

    pub(crate) fn apply_swap(&mut self, system: &System, i: usize, j: usize) {
        let a = self.sigma.color(i);
        let b = self.sigma.color(j);
        self.apply_recolor(system, i, b);
        self.apply_recolor(system, j, a);
    }

    /// Exchanges configurations (and their caches) with another chain; the
    /// temperatures and random streams stay where they are.
    pub(crate) fn exchange_configuration(&mut self, other: &mut ChainState) {
        std::mem::swap(&mut self.sigma, &mut other.sigma);
        std::mem::swap(&mut self.fields, &mut other.fields);
        std::mem::swap(&mut self.energy, &mut other.energy);
        std::mem::swap(&mut self.bias, &mut other.bias);
        std::mem::swap(&mut self.sweeps_since_refresh, &mut other.sweeps_since_refresh);
    }

    pub(crate) fn tick(&mut self, system: &System) {
        self.sweeps_since_refresh += 1;
        if self.sweeps_since_refresh >= REFRESH_INTERVAL {
            self.refresh(system);
        }
    }

    /// Zero-temperature descent: repeatedly moves each site to its best color
    /// until no single recolor raises `H` by more than `tol`.
    pub(crate) fn descend(&mut self, system: &System, tol: f64) {
        let kappa = system.kappa();
        loop {
            let mut improved = false;
            for i in 0..system.n() {
                let a = self.sigma.color(i);
                let mut best = a;
                for c in 0..kappa {
                    if self.field(i, c) > self.field(i, best) {
                        best = c;
                    }
                }
                if best != a && self.field(i, best) - self.field(i, a) > tol {
                    self.apply_recolor(system, i, best);
                    improved = true;
                }
            }
            if !improved {
                break;
            }
        }
        self.refresh(system);
    }
}

/// Heat-bath update of every site in order, weights
/// `exp(beta * field + beta * bias_weight * 2 * m_c)` where `m_c` counts the
/// other sites of color `c`. Returns the number of sites whose color changed.
pub(crate) fn heat_bath_sweep(system: &System, state: &mut ChainState, bias_weight: f64) -> usize {
    let kappa = system.kappa();
    let beta = state.beta;
    let mut logw = vec![0.0; kappa];
    let mut changed = 0;
    for i in 0..system.n() {
        let a = state.sigma.color(i);
        let counts = state.sigma.counts();
        let mut max = f64::NEG_INFINITY;
        for c in 0..kappa {
            let others = counts[c] - usize::from(c == a);
            let x = beta * (state.field(i, c) + bias_weight * 2.0 * others as f64);
            logw[c] = x;
            max = max.max(x);
        }
        let mut total = 0.0;
        for w in logw.iter_mut() {
            *w = (*w - max).exp();
            total += *w;
        }
        let mut u = state.rng.random::<f64>() * total;
        let mut pick = kappa - 1;
        for (c, &w) in logw.iter().enumerate() {
            if u < w {
                pick = c;
                break;
            }
            u -= w;
        }
        if pick != a {
            state.apply_recolor(system, i, pick);
            changed += 1;
        }
    }
    state.tick(system);
    changed
}

/// One sequential heat-bath sweep for the Gibbs measure with weights
/// `exp(beta H + (beta gamma / N) sum_k n_k^2)`. Returns the number of recolors.
pub fn gibbs_sweep(system: &System, state: &mut ChainState) -> usize {
    heat_bath_sweep(system, state, system.bias_coefficient())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::ExactLab;
    use crate::glass::{bias_term, energy};

    #[test]
    fn zero_beta_is_uniform() {
        let n = 10;
        let kappa = 3;
        let params = ModelParams::with_gamma(n, kappa, 0.0, 0.7).unwrap();
        let system = System::new(params, &DisorderSample::generate(n, 1)).unwrap();
        let mut state = ChainState::random(&system, 0.0, 5, 0);
        let sweeps = 100_000;
        let mut counts = vec![0u64; kappa];
        for _ in 0..sweeps {
            gibbs_sweep(&system, &mut state);
            for (k, &c) in state.sigma().counts().iter().enumerate() {
                counts[k] += c as u64;
            }
            assert_eq!(state.sigma().counts().iter().sum::<usize>(), n);
        }
        let total = (sweeps * n) as f64;
        let p = 1.0 / kappa as f64;
        let sd = (total * p * (1.0 - p)).sqrt();
        for c in counts {
            assert!((c as f64 - total * p).abs() < 4.0 * sd, "{c} vs {}", total * p);
        }
    }

    #[test]
    fn stationary_distribution_matches_gibbs() {
        let d = DisorderSample::from_rows(&[vec![0.3, -0.9], vec![0.4, 0.2]]).unwrap();
        let params = ModelParams::new(2, 2, 1.0).unwrap();
        let system = System::new(params, &d).unwrap();
        let log_z = 2.0 * ExactLab::new().log_partition(&params, &d, None).unwrap();
        let mut state = ChainState::random(&system, 1.0, 3, 0);
        let samples = 100_000;
        let mut hist = [0u64; 4];
        for _ in 0..samples {
            for _ in 0..3 {
                gibbs_sweep(&system, &mut state);
            }
            let c = state.sigma().colors();
            hist[c[0] * 2 + c[1]] += 1;
        }
        for (idx, &h) in hist.iter().enumerate() {
            let s = SpinConfiguration::from_zero_based(vec![idx / 2, idx % 2], 2).unwrap();
            let p = (energy(&params, &d, &s).unwrap() - log_z).exp();
            let sd = (samples as f64 * p * (1.0 - p)).sqrt();
            assert!((h as f64 - samples as f64 * p).abs() < 4.0 * sd, "state {idx}: {h} vs {}", samples as f64 * p);
        }
    }

    #[test]
    fn caches_survive_long_runs() {
        let params = ModelParams::with_gamma(12, 4, 1.3, -0.4).unwrap();
        let d = DisorderSample::generate(12, 2);
        let system = System::new(params, &d).unwrap();
        let mut state = ChainState::random(&system, 1.3, 8, 0);
        for _ in 0..10_000 {
            gibbs_sweep(&system, &mut state);
        }
        let exact = energy(&params, &d, state.sigma()).unwrap();
        assert!((state.current_energy() - exact).abs() <= 1e-6);
        assert_eq!(state.bias(), bias_term(state.sigma()));
    }

    #[test]
    fn swap_delta_matches_recomputation() {
        let params = ModelParams::new(9, 3, 1.0).unwrap();
        let d = DisorderSample::generate(9, 4);
        let system = System::new(params, &d).unwrap();
        let mut state = ChainState::random(&system, 1.0, 1, 0);
        for (i, j) in [(0, 1), (2, 7), (8, 3), (4, 5), (1, 6)] {
            let before = energy(&params, &d, state.sigma()).unwrap();
            let predicted = state.swap_delta(&system, i, j);
            let counts = state.sigma().counts().to_vec();
            state.apply_swap(&system, i, j);
            let after = energy(&params, &d, state.sigma()).unwrap();
            assert!((after - before - predicted).abs() < 1e-12);
            assert_eq!(state.sigma().counts(), &counts[..]);
            assert!((state.current_energy() - after).abs() < 1e-12);
        }
    }

    #[test]
    fn descent_reaches_local_maximum() {
        let params = ModelParams::new(20, 3, 1.0).unwrap();
        let d = DisorderSample::generate(20, 6);
        let system = System::new(params, &d).unwrap();
        let mut state = ChainState::random(&system, 0.0, 2, 0);
        state.descend(&system, 1e-12);
        assert!(crate::glass::is_local_maximum(&d, state.sigma(), 1e-9));
    }

    #[test]
    fn dimension_errors() {
        let params = ModelParams::new(3, 2, 1.0).unwrap();
        assert!(System::new(params, &DisorderSample::generate(4, 0)).is_err());
        let system = System::new(params, &DisorderSample::generate(3, 0)).unwrap();
        let s = SpinConfiguration::uniform(2, 2, 0).unwrap();
        assert!(ChainState::new(&system, s, 1.0, 0, 0).is_err());
        let s = SpinConfiguration::uniform(3, 3, 0).unwrap();
        assert!(ChainState::new(&system, s, 1.0, 0, 0).is_err());
    }
}
