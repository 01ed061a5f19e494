use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// System size, number of colors, inverse temperature and coupling bias.
///
/// `gamma = 0` is the unbiased model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    #[serde(rename = "N")]
    n: usize,
    kappa: usize,
    beta: f64,
    gamma: f64,
}

impl ModelParams {
    pub fn new(n: usize, kappa: usize, beta: f64) -> Result<Self> {
        Self::with_gamma(n, kappa, beta, 0.0)
    }

    pub fn with_gamma(n: usize, kappa: usize, beta: f64, gamma: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("N", "must be at least 1"));
        }
        if kappa < 2 {
            return Err(Error::invalid("kappa", format!("must be at least 2, got {kappa}")));
        }
        if !(beta >= 0.0) || !beta.is_finite() {
            return Err(Error::invalid("beta", format!("must be finite and >= 0, got {beta}")));
        }
        if !gamma.is_finite() {
            return Err(Error::invalid("gamma", format!("must be finite, got {gamma}")));
        }
        Ok(Self { n, kappa, beta, gamma })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kappa(&self) -> usize {
        self.kappa
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn at_beta(&self, beta: f64) -> Result<Self> {
        Self::with_gamma(self.n, self.kappa, beta, self.gamma)
    }

    pub fn unbiased(&self) -> Self {
        Self { gamma: 0.0, ..*self }
    }
}
