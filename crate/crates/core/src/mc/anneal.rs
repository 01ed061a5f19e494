use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::glass::{ColorProfile, DisorderSample, ModelParams, SpinConfiguration};
use crate::rng::{derive_seed, stream_rng};

use super::chain::{heat_bath_sweep, ChainState, System};
use super::LadderConfig;

const DESCENT_TOL: f64 = 1e-12;

/// Best-of-`restarts` simulated annealing on `H` followed by greedy descent
/// to a local maximum. The bias term is ignored. Restart `r` depends only on
/// `(seed, r)`, so more restarts can only improve the result.
pub fn anneal_ground_state(system: &System, schedule: &LadderConfig, restarts: usize, seed: u64) -> Result<(SpinConfiguration, f64)> {
    schedule.validate()?;
    if restarts == 0 {
        return Err(Error::invalid("restarts", "must be at least 1"));
    }
    let mut best: Option<(SpinConfiguration, f64)> = None;
    for r in 0..restarts as u64 {
        let mut chain = ChainState::random(system, 0.0, seed, r);
        for &beta in schedule.betas() {
            chain.set_beta(beta);
            for _ in 0..schedule.sweeps_per_exchange() {
                heat_bath_sweep(system, &mut chain, 0.0);
            }
        }
        chain.descend(system, DESCENT_TOL);
        let e = system.energy_of(chain.sigma());
        if best.as_ref().is_none_or(|(_, b)| e > *b) {
            best = Some((chain.sigma().clone(), e));
        }
    }
    Ok(best.expect("at least one restart"))
}

/// Annealed maximum of the Sherrington-Kirkpatrick energy
/// `N^{-1/2} sum_{i,j} g_ij s_i s_j`, through the two-color Potts model:
/// `sk(s) = 2 H(sigma) - N^{-1/2} sum_{i,j} g_ij`.
pub fn sk_ground_state(disorder: &DisorderSample, schedule: &LadderConfig, restarts: usize, seed: u64) -> Result<(Vec<i8>, f64)> {
    let system = System::new(ModelParams::new(disorder.n(), 2, 0.0)?, disorder)?;
    let (sigma, _) = anneal_ground_state(&system, schedule, restarts, seed)?;
    let spins = crate::glass::map_to_ising(&sigma)?;
    let e = crate::glass::sk_energy(disorder, &spins)?;
    Ok((spins, e))
}

/// Occupation numbers closest to `N d` (largest remainder rounding, ties to
/// the lower color), or an error if they fall outside the sector.
pub fn initial_sector_counts(n: usize, profile: &ColorProfile) -> Result<Vec<usize>> {
    let scaled: Vec<f64> = profile.d().iter().map(|&d| d * n as f64).collect();
    let mut counts: Vec<usize> = scaled.iter().map(|x| x.floor() as usize).collect();
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..counts.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = scaled[a] - scaled[a].floor();
        let rb = scaled[b] - scaled[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for &k in order.iter().take(n.saturating_sub(assigned)) {
        counts[k] += 1;
    }
    if counts.iter().sum::<usize>() != n || !profile.admits_counts(&counts, n) {
        return Err(Error::SectorUnreachable(format!("rounded counts {counts:?} are not within epsilon = {}", profile.epsilon())));
    }
    Ok(counts)
}

fn metropolis(rng: &mut impl Rng, beta: f64, delta: f64) -> bool {
    delta >= 0.0 || rng.random::<f64>() < (beta * delta).exp()
}

fn recolor_stays_in_sector(chain: &ChainState, profile: &ColorProfile, site: usize, new: usize, counts_buf: &mut Vec<usize>) -> bool {
    let sigma = chain.sigma();
    counts_buf.clear();
    counts_buf.extend_from_slice(sigma.counts());
    counts_buf[sigma.color(site)] -= 1;
    counts_buf[new] += 1;
    profile.admits_counts(counts_buf, sigma.len())
}

/// Annealed lower bound on `max H` over a color sector. Moves are
/// count-preserving swaps of two sites' colors (always in sector) and single
/// recolors accepted only if the result stays in the sector; the run ends
/// with greedy descent under the same moves.
pub fn estimate_sector_max(
    system: &System,
    profile: &ColorProfile,
    schedule: &LadderConfig,
    restarts: usize,
    seed: u64,
) -> Result<(SpinConfiguration, f64)> {
    schedule.validate()?;
    if restarts == 0 {
        return Err(Error::invalid("restarts", "must be at least 1"));
    }
    if profile.kappa() != system.kappa() {
        return Err(Error::DimensionMismatch {
            field: "d",
            expected: system.kappa(),
            found: profile.kappa(),
        });
    }
    let n = system.n();
    let kappa = system.kappa();
    let counts = initial_sector_counts(n, profile)?;
    let base: Vec<usize> = counts.iter().enumerate().flat_map(|(c, &m)| std::iter::repeat_n(c, m)).collect();
    let mut counts_buf = Vec::with_capacity(kappa);

    let mut best: Option<(SpinConfiguration, f64)> = None;
    for r in 0..restarts as u64 {
        let mut rng = stream_rng(derive_seed(seed, r), 0);
        let mut colors = base.clone();
        colors.shuffle(&mut rng);
        let sigma = SpinConfiguration::from_zero_based_unchecked(colors, kappa);
        let mut chain = ChainState::with_rng(system, sigma, 0.0, rng, r)?;

        for &beta in schedule.betas() {
            chain.set_beta(beta);
            for _ in 0..schedule.sweeps_per_exchange() {
                for _ in 0..n {
                    if chain.rng().random::<bool>() {
                        let i = chain.rng().random_range(0..n);
                        let j = chain.rng().random_range(0..n);
                        if chain.sigma().color(i) == chain.sigma().color(j) {
                            continue;
                        }
                        let delta = chain.swap_delta(system, i, j);
                        if metropolis(chain.rng(), beta, delta) {
                            chain.apply_swap(system, i, j);
                        }
                    } else {
                        let i = chain.rng().random_range(0..n);
                        let a = chain.sigma().color(i);
                        let b = (a + chain.rng().random_range(1..kappa)) % kappa;
                        if !recolor_stays_in_sector(&chain, profile, i, b, &mut counts_buf) {
                            continue;
                        }
                        let delta = chain.field(i, b) - chain.field(i, a);
                        if metropolis(chain.rng(), beta, delta) {
                            chain.apply_recolor(system, i, b);
                        }
                    }
                }
                chain.tick(system);
            }
        }
        descend_in_sector(system, &mut chain, profile, &mut counts_buf);
        let e = system.energy_of(chain.sigma());
        if best.as_ref().is_none_or(|(_, b)| e > *b) {
            best = Some((chain.sigma().clone(), e));
        }
    }
    Ok(best.expect("at least one restart"))
}

fn descend_in_sector(system: &System, chain: &mut ChainState, profile: &ColorProfile, counts_buf: &mut Vec<usize>) {
    let n = system.n();
    let kappa = system.kappa();
    loop {
        let mut improved = false;
        for i in 0..n {
            for j in (i + 1)..n {
                if chain.sigma().color(i) != chain.sigma().color(j) && chain.swap_delta(system, i, j) > DESCENT_TOL {
                    chain.apply_swap(system, i, j);
                    improved = true;
                }
            }
            for b in 0..kappa {
                let a = chain.sigma().color(i);
                if b != a
                    && chain.field(i, b) - chain.field(i, a) > DESCENT_TOL
                    && recolor_stays_in_sector(chain, profile, i, b, counts_buf)
                {
                    chain.apply_recolor(system, i, b);
                    improved = true;
                }
            }
        }
        if !improved {
            break;
        }
    }
    chain.refresh(system);
}
