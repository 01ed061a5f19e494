use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance on `sum(d) = 1` for a [`ColorProfile`].
pub const PROFILE_SUM_TOLERANCE: f64 = 1e-12;

/// A coloring `sigma in {1..kappa}^N` with cached occupation numbers.
///
/// Colors are stored 0-based; [`SpinConfiguration::from_colors`] and
/// [`SpinConfiguration::to_one_based`] convert at the boundary.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SpinConfiguration {
    colors: Vec<usize>,
    counts: Vec<usize>,
}

impl SpinConfiguration {
    /// Builds a configuration from 1-based colors.
    pub fn from_colors(colors: &[usize], kappa: usize) -> Result<Self> {
        let mut zero_based = Vec::with_capacity(colors.len());
        for (site, &c) in colors.iter().enumerate() {
            if c == 0 || c > kappa {
                return Err(Error::InvalidColor { site, color: c, kappa });
            }
            zero_based.push(c - 1);
        }
        Ok(Self::from_zero_based_unchecked(zero_based, kappa))
    }

    pub fn from_zero_based(colors: Vec<usize>, kappa: usize) -> Result<Self> {
        if let Some(site) = colors.iter().position(|&c| c >= kappa) {
            return Err(Error::InvalidColor {
                site,
                color: colors[site] + 1,
                kappa,
            });
        }
        Ok(Self::from_zero_based_unchecked(colors, kappa))
    }

    pub(crate) fn from_zero_based_unchecked(colors: Vec<usize>, kappa: usize) -> Self {
        let mut counts = vec![0; kappa];
        for &c in &colors {
            counts[c] += 1;
        }
        Self { colors, counts }
    }

    /// Every site colored with 0-based `color`.
    pub fn uniform(n: usize, kappa: usize, color: usize) -> Result<Self> {
        Self::from_zero_based(vec![color; n], kappa)
    }

    pub fn len(&self) -> usize {
        self.colors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.colors.is_empty()
    }

    pub fn kappa(&self) -> usize {
        self.counts.len()
    }

    /// 0-based colors.
    pub fn colors(&self) -> &[usize] {
        &self.colors
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    #[inline]
    pub fn color(&self, site: usize) -> usize {
        self.colors[site]
    }

    pub fn to_one_based(&self) -> Vec<usize> {
        self.colors.iter().map(|c| c + 1).collect()
    }

    /// Sets `site` to 0-based `color`, returning the previous color.
    #[inline]
    pub fn recolor(&mut self, site: usize, color: usize) -> usize {
        let old = self.colors[site];
        self.counts[old] -= 1;
        self.counts[color] += 1;
        self.colors[site] = color;
        old
    }

    /// Applies a permutation of the colors (`perm[old] = new`, 0-based).
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let colors = self.colors.iter().map(|&c| perm[c]).collect();
        Self::from_zero_based_unchecked(colors, self.kappa())
    }
}

/// A target point `d` of the simplex together with a tolerance `epsilon`,
/// describing the sector of configurations whose color proportions are
/// within `epsilon` of `d` in every coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColorProfile {
    d: Vec<f64>,
    epsilon: f64,
}

impl ColorProfile {
    pub fn new(d: Vec<f64>, epsilon: f64) -> Result<Self> {
        if d.len() < 2 {
            return Err(Error::invalid("d", format!("needs at least 2 entries, got {}", d.len())));
        }
        if let Some(k) = d.iter().position(|x| !(0.0..=1.0).contains(x)) {
            return Err(Error::invalid("d", format!("entry {} = {} is outside [0, 1]", k + 1, d[k])));
        }
        let sum: f64 = d.iter().sum();
        if (sum - 1.0).abs() > PROFILE_SUM_TOLERANCE {
            return Err(Error::invalid("d", format!("entries sum to {sum}, not 1")));
        }
        if !(epsilon >= 0.0) || !epsilon.is_finite() {
            return Err(Error::invalid("epsilon", format!("must be finite and >= 0, got {epsilon}")));
        }
        Ok(Self { d, epsilon })
    }

    pub fn uniform(kappa: usize, epsilon: f64) -> Result<Self> {
        Self::new(vec![1.0 / kappa as f64; kappa], epsilon)
    }

    pub fn d(&self) -> &[f64] {
        &self.d
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn kappa(&self) -> usize {
        self.d.len()
    }

    /// Membership test on raw occupation numbers of an `n`-site system.
    #[inline]
    pub fn admits_counts(&self, counts: &[usize], n: usize) -> bool {
        let n = n as f64;
        counts
            .iter()
            .zip(&self.d)
            .all(|(&c, &dk)| (c as f64 / n - dk).abs() <= self.epsilon)
    }

    pub fn permuted(&self, perm: &[usize]) -> Self {
        let mut d = vec![0.0; self.d.len()];
        for (old, &new) in perm.iter().enumerate() {
            d[new] = self.d[old];
        }
        Self { d, epsilon: self.epsilon }
    }

    /// `d1;d2;...;dk@epsilon`, as used in CSV output.
    pub fn label(&self) -> String {
        let d: Vec<String> = self.d.iter().map(|x| x.to_string()).collect();
        format!("{}@{}", d.join(";"), self.epsilon)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_follow_colors() {
        let mut s = SpinConfiguration::from_colors(&[1, 3, 3, 2, 3], 3).unwrap();
        assert_eq!(s.counts(), &[1, 1, 3]);
        assert_eq!(s.colors(), &[0, 2, 2, 1, 2]);
        assert_eq!(s.recolor(1, 0), 2);
        assert_eq!(s.counts(), &[2, 1, 2]);
        assert_eq!(s.counts().iter().sum::<usize>(), 5);
        assert_eq!(s.to_one_based(), vec![1, 1, 3, 2, 3]);
    }

    #[test]
    fn bad_colors_rejected() {
        assert!(matches!(
            SpinConfiguration::from_colors(&[1, 0], 2),
            Err(Error::InvalidColor { site: 1, color: 0, .. })
        ));
        assert!(matches!(
            SpinConfiguration::from_colors(&[3], 2),
            Err(Error::InvalidColor { site: 0, color: 3, .. })
        ));
        assert!(SpinConfiguration::from_zero_based(vec![0, 2], 2).is_err());
    }

    #[test]
    fn profile_validation() {
        assert!(ColorProfile::new(vec![0.5, 0.5], 0.1).is_ok());
        assert!(ColorProfile::new(vec![0.5, 0.5 + 1e-13], 0.1).is_ok());
        assert!(ColorProfile::new(vec![0.5, 0.6], 0.1).is_err());
        assert!(ColorProfile::new(vec![1.2, -0.2], 0.1).is_err());
        assert!(ColorProfile::new(vec![0.5, 0.5], -1.0).is_err());
        assert!(ColorProfile::new(vec![1.0], 0.1).is_err());
        assert!(ColorProfile::uniform(7, 0.0).is_ok());
    }
}
