use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Inverse-temperature grid and sweep budget.
///
/// For parallel tempering the betas are the rungs; for annealing they are
/// visited in order, `sweeps_per_exchange` sweeps each.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LadderConfig {
    betas: Vec<f64>,
    sweeps_per_exchange: usize,
    total_sweeps: usize,
    burn_in: usize,
}

pub const DEFAULT_RUNGS: usize = 32;
const DEFAULT_TOTAL_SWEEPS: usize = 20_000;
const DEFAULT_BURN_IN: usize = 2_000;
const DEFAULT_SWEEPS_PER_EXCHANGE: usize = 2;

impl LadderConfig {
    pub fn new(betas: Vec<f64>, sweeps_per_exchange: usize, total_sweeps: usize, burn_in: usize) -> Result<Self> {
        let ladder = Self {
            betas,
            sweeps_per_exchange,
            total_sweeps,
            burn_in,
        };
        ladder.validate()?;
        Ok(ladder)
    }

    pub fn validate(&self) -> Result<()> {
        match self.betas.first() {
            None => return Err(Error::invalid("betas", "ladder is empty")),
            Some(&b) if b != 0.0 => return Err(Error::NonMonotoneLadder { index: 0 }),
            _ => {}
        }
        for (k, w) in self.betas.windows(2).enumerate() {
            if !(w[1] > w[0]) || !w[1].is_finite() {
                return Err(Error::NonMonotoneLadder { index: k + 1 });
            }
        }
        if self.sweeps_per_exchange == 0 {
            return Err(Error::invalid("sweeps_per_exchange", "must be at least 1"));
        }
        if self.burn_in >= self.total_sweeps && self.betas.len() > 1 {
            return Err(Error::invalid(
                "burn_in",
                format!("{} leaves no measured sweeps out of {}", self.burn_in, self.total_sweeps),
            ));
        }
        Ok(())
    }

    /// `rungs` points from 0 to `beta`, averaging a linear grid with a
    /// geometric one (ratio 10 over the range), which packs rungs more
    /// densely at small beta.
    pub fn hybrid(beta: f64, rungs: usize) -> Result<Self> {
        if !(beta >= 0.0) || !beta.is_finite() {
            return Err(Error::invalid("beta", format!("must be finite and >= 0, got {beta}")));
        }
        if beta == 0.0 {
            return Self::new(vec![0.0], DEFAULT_SWEEPS_PER_EXCHANGE, DEFAULT_TOTAL_SWEEPS, DEFAULT_BURN_IN);
        }
        if rungs < 2 {
            return Err(Error::invalid("rungs", "need at least 2 rungs for beta > 0"));
        }
        let ratio: f64 = 10.0;
        let last = (rungs - 1) as f64;
        let betas = (0..rungs)
            .map(|k| {
                let u = k as f64 / last;
                let geometric = (ratio.powf(u) - 1.0) / (ratio - 1.0);
                beta * 0.5 * (u + geometric)
            })
            .collect();
        Self::new(betas, DEFAULT_SWEEPS_PER_EXCHANGE, DEFAULT_TOTAL_SWEEPS, DEFAULT_BURN_IN)
    }

    /// Annealing schedule: 0 followed by `steps` geometric values from
    /// `beta_min` to `beta_max`, `sweeps_per_step` sweeps at each.
    pub fn geometric_anneal(beta_min: f64, beta_max: f64, steps: usize, sweeps_per_step: usize) -> Result<Self> {
        if !(beta_min > 0.0 && beta_max > beta_min && beta_max.is_finite()) {
            return Err(Error::invalid("betas", format!("need 0 < beta_min < beta_max, got {beta_min}, {beta_max}")));
        }
        if steps < 2 {
            return Err(Error::invalid("steps", "need at least 2 annealing steps"));
        }
        let ratio = (beta_max / beta_min).powf(1.0 / (steps - 1) as f64);
        let mut betas = vec![0.0];
        betas.extend((0..steps).map(|k| beta_min * ratio.powi(k as i32)));
        let total = betas.len() * sweeps_per_step;
        Self::new(betas, sweeps_per_step, total, 0)
    }

    /// Default annealing schedule used by the ground-state searches.
    pub fn default_anneal() -> Self {
        Self::geometric_anneal(0.05, 10.0, 60, 10).expect("valid constants")
    }

    pub fn with_sweeps(mut self, total_sweeps: usize, burn_in: usize) -> Result<Self> {
        self.total_sweeps = total_sweeps;
        self.burn_in = burn_in;
        self.validate()?;
        Ok(self)
    }

    pub fn with_sweeps_per_exchange(mut self, sweeps: usize) -> Result<Self> {
        self.sweeps_per_exchange = sweeps;
        self.validate()?;
        Ok(self)
    }

    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    pub fn top(&self) -> f64 {
        *self.betas.last().expect("validated ladders are non-empty")
    }

    pub fn sweeps_per_exchange(&self) -> usize {
        self.sweeps_per_exchange
    }

    pub fn total_sweeps(&self) -> usize {
        self.total_sweeps
    }

    pub fn burn_in(&self) -> usize {
        self.burn_in
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(LadderConfig::new(vec![0.0, 0.5, 1.0], 1, 100, 10).is_ok());
        assert!(matches!(LadderConfig::new(vec![0.1, 0.5], 1, 100, 10), Err(Error::NonMonotoneLadder { index: 0 })));
        assert!(matches!(LadderConfig::new(vec![0.0, 0.5, 0.5], 1, 100, 10), Err(Error::NonMonotoneLadder { index: 2 })));
        assert!(matches!(LadderConfig::new(vec![0.0, 0.7, 0.3], 1, 100, 10), Err(Error::NonMonotoneLadder { index: 2 })));
        assert!(LadderConfig::new(vec![], 1, 100, 10).is_err());
        assert!(LadderConfig::new(vec![0.0, 1.0], 0, 100, 10).is_err());
        assert!(LadderConfig::new(vec![0.0, 1.0], 1, 100, 100).is_err());
    }

    #[test]
    fn hybrid_ladder_shape() {
        let l = LadderConfig::hybrid(1.5, DEFAULT_RUNGS).unwrap();
        assert_eq!(l.betas().len(), 32);
        assert_eq!(l.betas()[0], 0.0);
        assert_eq!(l.top(), 1.5);
        let steps: Vec<f64> = l.betas().windows(2).map(|w| w[1] - w[0]).collect();
        assert!(steps.windows(2).all(|s| s[1] >= s[0]), "spacing grows with beta");
        assert_eq!(LadderConfig::hybrid(0.0, 32).unwrap().betas(), &[0.0]);
    }

    #[test]
    fn anneal_schedule_shape() {
        let l = LadderConfig::geometric_anneal(0.1, 10.0, 5, 3).unwrap();
        assert_eq!(l.betas().len(), 6);
        assert!((l.betas()[1] - 0.1).abs() < 1e-15);
        assert!((l.top() - 10.0).abs() < 1e-12);
        assert_eq!(l.total_sweeps(), 18);
    }
}
