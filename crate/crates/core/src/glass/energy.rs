use crate::error::{Error, Result};

use super::{ColorProfile, DisorderSample, ModelParams, SpinConfiguration};

/// Neumaier-compensated sum; the error stays at the level of one rounding of
/// the result, independent of the number of terms.
#[derive(Default)]
struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    #[inline]
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

fn check_dims(params: &ModelParams, disorder: &DisorderSample, sigma: &SpinConfiguration) -> Result<()> {
    if disorder.n() != params.n() {
        return Err(Error::DimensionMismatch {
            field: "disorder",
            expected: params.n(),
            found: disorder.n(),
        });
    }
    if sigma.len() != params.n() {
        return Err(Error::DimensionMismatch {
            field: "sigma",
            expected: params.n(),
            found: sigma.len(),
        });
    }
    if sigma.kappa() != params.kappa() {
        return Err(Error::DimensionMismatch {
            field: "kappa",
            expected: params.kappa(),
            found: sigma.kappa(),
        });
    }
    Ok(())
}

/// `H_N(sigma) = N^{-1/2} sum_{i,j} g_ij 1{sigma_i = sigma_j}`, diagonal included.
///
/// Terms are accumulated in a fixed order with compensated summation, so the
/// result is bit-identical under any relabelling of the colors.
pub fn energy(params: &ModelParams, disorder: &DisorderSample, sigma: &SpinConfiguration) -> Result<f64> {
    check_dims(params, disorder, sigma)?;
    Ok(energy_unchecked(disorder, sigma.colors()))
}

pub(crate) fn energy_unchecked(disorder: &DisorderSample, colors: &[usize]) -> f64 {
    let n = disorder.n();
    let mut acc = CompensatedSum::default();
    for i in 0..n {
        let row = disorder.row(i);
        let ci = colors[i];
        for j in 0..n {
            if colors[j] == ci {
                acc.add(row[j]);
            }
        }
    }
    acc.value() / (n as f64).sqrt()
}

/// `sum_{i,j} 1{sigma_i = sigma_j} = sum_k n_k^2`.
pub fn bias_term(sigma: &SpinConfiguration) -> u64 {
    sigma.counts().iter().map(|&c| (c as u64) * (c as u64)).sum()
}

/// Inclusive sector test `|n_k / N - d_k| <= epsilon` for every color.
pub fn in_sector(sigma: &SpinConfiguration, profile: &ColorProfile) -> Result<bool> {
    if profile.kappa() != sigma.kappa() {
        return Err(Error::DimensionMismatch {
            field: "d",
            expected: sigma.kappa(),
            found: profile.kappa(),
        });
    }
    Ok(profile.admits_counts(sigma.counts(), sigma.len()))
}

/// `N^{-1/2} sum_{i,j} g_ij s_i s_j` for `s in {-1, +1}^N`.
pub fn sk_energy(disorder: &DisorderSample, spins: &[i8]) -> Result<f64> {
    let n = disorder.n();
    if spins.len() != n {
        return Err(Error::DimensionMismatch {
            field: "spins",
            expected: n,
            found: spins.len(),
        });
    }
    if let Some(site) = spins.iter().position(|&s| s != 1 && s != -1) {
        return Err(Error::InvalidSpin {
            site,
            value: spins[site] as i64,
        });
    }
    let mut acc = CompensatedSum::default();
    for i in 0..n {
        let row = disorder.row(i);
        for j in 0..n {
            let g = row[j];
            acc.add(if spins[i] == spins[j] { g } else { -g });
        }
    }
    Ok(acc.value() / (n as f64).sqrt())
}

/// Two-color configuration to Ising spins: color 1 -> +1, color 2 -> -1.
pub fn map_to_ising(sigma: &SpinConfiguration) -> Result<Vec<i8>> {
    if sigma.kappa() != 2 {
        return Err(Error::invalid("kappa", format!("Ising mapping needs kappa = 2, got {}", sigma.kappa())));
    }
    Ok(sigma.colors().iter().map(|&c| if c == 0 { 1 } else { -1 }).collect())
}

/// Energy change of recoloring `site` to 0-based `new_color`, in `O(N)`.
///
/// `dH = N^{-1/2} sum_{j != i} (g_ij + g_ji) (1{sigma_j = b} - 1{sigma_j = a})`;
/// the self-coupling `g_ii` always contributes and cancels.
pub fn recolor_delta(disorder: &DisorderSample, sigma: &SpinConfiguration, site: usize, new_color: usize) -> f64 {
    let old = sigma.color(site);
    if old == new_color {
        return 0.0;
    }
    let n = disorder.n();
    let mut acc = 0.0;
    for j in 0..n {
        if j == site {
            continue;
        }
        let cj = sigma.color(j);
        let w = disorder.get(site, j) + disorder.get(j, site);
        if cj == new_color {
            acc += w;
        } else if cj == old {
            acc -= w;
        }
    }
    acc / (n as f64).sqrt()
}

/// True when no single-site recolor increases the energy by more than `tol`.
pub fn is_local_maximum(disorder: &DisorderSample, sigma: &SpinConfiguration, tol: f64) -> bool {
    (0..sigma.len()).all(|i| (0..sigma.kappa()).all(|b| recolor_delta(disorder, sigma, i, b) <= tol))
}

/// Symmetrised, pre-scaled couplings `J_ij = (g_ij + g_ji) / sqrt(N)` with a
/// zero diagonal, plus the configuration-independent self-coupling total.
///
/// `H(sigma) = diag + sum_{i<j} J_ij 1{sigma_i = sigma_j}`.
#[derive(Debug, Clone)]
pub struct Couplings {
    n: usize,
    sym: Vec<f64>,
    diag: f64,
}

impl Couplings {
    pub fn new(disorder: &DisorderSample) -> Self {
        let n = disorder.n();
        let scale = 1.0 / (n as f64).sqrt();
        let mut sym = vec![0.0; n * n];
        let mut diag = 0.0;
        for i in 0..n {
            diag += disorder.get(i, i);
            for j in 0..n {
                if i != j {
                    sym[i * n + j] = (disorder.get(i, j) + disorder.get(j, i)) * scale;
                }
            }
        }
        Self { n, sym, diag: diag * scale }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.sym[i * self.n..(i + 1) * self.n]
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.sym[i * self.n + j]
    }

    pub fn self_energy(&self) -> f64 {
        self.diag
    }

    /// Energy from 0-based colors through the symmetrised couplings (`O(N^2)`).
    pub fn energy(&self, colors: &[usize]) -> f64 {
        let mut acc = CompensatedSum::default();
        acc.add(self.diag);
        for i in 0..self.n {
            let row = self.row(i);
            for j in (i + 1)..self.n {
                if colors[i] == colors[j] {
                    acc.add(row[j]);
                }
            }
        }
        acc.value()
    }

    /// `O(N)` energy change for recoloring `site` to `new_color`.
    #[inline]
    pub fn delta(&self, colors: &[usize], site: usize, new_color: usize) -> f64 {
        let old = colors[site];
        if old == new_color {
            return 0.0;
        }
        let row = self.row(site);
        let mut acc = 0.0;
        for (j, &cj) in colors.iter().enumerate() {
            if cj == new_color {
                acc += row[j];
            } else if cj == old {
                acc -= row[j];
            }
        }
        // row[site] is zero, so the site itself never contributes.
        acc
    }

    /// Local fields, row-major `N x kappa`: `fields[i][c] = sum_{j != i} J_ij 1{sigma_j = c}`.
    pub fn local_fields(&self, colors: &[usize], kappa: usize) -> Vec<f64> {
        let mut fields = vec![0.0; self.n * kappa];
        for i in 0..self.n {
            let row = self.row(i);
            let out = &mut fields[i * kappa..(i + 1) * kappa];
            for (j, &cj) in colors.iter().enumerate() {
                out[cj] += row[j];
            }
        }
        fields
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn g2() -> DisorderSample {
        DisorderSample::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap()
    }

    fn params(n: usize, kappa: usize) -> ModelParams {
        ModelParams::new(n, kappa, 1.0).unwrap()
    }

    #[test]
    fn energy_examples() {
        let g1 = DisorderSample::from_rows(&[vec![0.5]]).unwrap();
        for kappa in 2..5 {
            let s = SpinConfiguration::from_colors(&[kappa], kappa).unwrap();
            assert_eq!(energy(&params(1, kappa), &g1, &s).unwrap(), 0.5);
        }
        let same = SpinConfiguration::from_colors(&[1, 1], 2).unwrap();
        let diff = SpinConfiguration::from_colors(&[1, 2], 2).unwrap();
        assert!((energy(&params(2, 2), &g2(), &same).unwrap() - 10.0 / 2f64.sqrt()).abs() < 1e-15);
        assert!((energy(&params(2, 2), &g2(), &diff).unwrap() - 5.0 / 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn energy_reports_offending_field() {
        let s = SpinConfiguration::from_colors(&[1, 1, 1], 2).unwrap();
        let err = energy(&params(2, 2), &g2(), &s).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { field: "sigma", .. }));
        let s = SpinConfiguration::from_colors(&[1, 1], 3).unwrap();
        let err = energy(&params(2, 2), &g2(), &s).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { field: "kappa", .. }));
        let s = SpinConfiguration::from_colors(&[1, 1, 1], 2).unwrap();
        let err = energy(&params(3, 2), &g2(), &s).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { field: "disorder", .. }));
    }

    #[test]
    fn bias_examples() {
        let cases: [(&[usize], usize, u64); 3] = [(&[1, 1, 2], 2, 5), (&[1, 2, 3], 3, 3), (&[1, 1, 1, 1], 2, 16)];
        for (colors, kappa, expected) in cases {
            let s = SpinConfiguration::from_colors(colors, kappa).unwrap();
            assert_eq!(bias_term(&s), expected);
        }
    }

    #[test]
    fn sector_examples() {
        let p = ColorProfile::new(vec![0.5, 0.25, 0.25], 1e-9).unwrap();
        let s = SpinConfiguration::from_colors(&[1, 1, 2, 3], 3).unwrap();
        assert!(in_sector(&s, &p).unwrap());

        let p = ColorProfile::new(vec![0.5, 0.25, 0.25], 0.1).unwrap();
        let s = SpinConfiguration::from_colors(&[1, 1, 1, 2], 3).unwrap();
        assert!(!in_sector(&s, &p).unwrap());

        let p = ColorProfile::new(vec![1.0, 0.0], 0.5).unwrap();
        let s = SpinConfiguration::from_colors(&[1, 2], 2).unwrap();
        assert!(in_sector(&s, &p).unwrap());

        let p = ColorProfile::new(vec![0.5, 0.5], 0.5).unwrap();
        let s = SpinConfiguration::from_colors(&[1, 2], 3).unwrap();
        assert!(matches!(in_sector(&s, &p), Err(Error::DimensionMismatch { field: "d", .. })));
    }

    #[test]
    fn sk_examples() {
        let g1 = DisorderSample::from_rows(&[vec![0.5]]).unwrap();
        assert_eq!(sk_energy(&g1, &[1]).unwrap(), 0.5);
        assert_eq!(sk_energy(&g2(), &[1, -1]).unwrap(), 0.0);
        assert!(matches!(sk_energy(&g2(), &[1, 0]), Err(Error::InvalidSpin { site: 1, value: 0 })));
        assert!(matches!(sk_energy(&g2(), &[1]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn ising_mapping_needs_two_colors() {
        let s = SpinConfiguration::from_colors(&[1, 2, 2], 2).unwrap();
        assert_eq!(map_to_ising(&s).unwrap(), vec![1, -1, -1]);
        let s = SpinConfiguration::from_colors(&[1, 2, 3], 3).unwrap();
        assert!(map_to_ising(&s).is_err());
    }

    #[test]
    fn uniform_profile_with_wide_epsilon_accepts_all() {
        let p = ColorProfile::uniform(4, 1.0).unwrap();
        for colors in [[1, 1, 1, 1, 1], [1, 2, 3, 4, 4], [4, 4, 4, 4, 2]] {
            let s = SpinConfiguration::from_colors(&colors, 4).unwrap();
            assert!(in_sector(&s, &p).unwrap());
        }
    }

    fn instance(max_n: usize, max_kappa: usize, g_abs: f64) -> impl Strategy<Value = (usize, Vec<f64>, Vec<usize>)> {
        (1..=max_n, 2..=max_kappa).prop_flat_map(move |(n, kappa)| {
            (
                Just(kappa),
                proptest::collection::vec(-g_abs..g_abs, n * n),
                proptest::collection::vec(0..kappa, n),
            )
        })
    }

    proptest! {
        #[test]
        fn energy_is_color_permutation_invariant(
            (kappa, g, colors) in instance(12, 5, 3.0),
            shuffle_seed in any::<u64>(),
        ) {
            use rand::seq::SliceRandom;
            let n = colors.len();
            let d = DisorderSample::from_matrix(n, g, 0).unwrap();
            let p = ModelParams::new(n, kappa, 1.0).unwrap();
            let s = SpinConfiguration::from_zero_based(colors, kappa).unwrap();
            let mut perm: Vec<usize> = (0..kappa).collect();
            perm.shuffle(&mut crate::rng::stream_rng(shuffle_seed, 0));
            let t = s.permuted(&perm);
            prop_assert_eq!(energy(&p, &d, &s).unwrap().to_bits(), energy(&p, &d, &t).unwrap().to_bits());
            prop_assert_eq!(bias_term(&s), bias_term(&t));
        }

        #[test]
        fn two_color_identity_with_sk((_, g, colors) in instance(64, 2, 10.0)) {
            let n = colors.len();
            let d = DisorderSample::from_matrix(n, g, 0).unwrap();
            let p = ModelParams::new(n, 2, 1.0).unwrap();
            let s = SpinConfiguration::from_zero_based(colors, 2).unwrap();
            let spins = map_to_ising(&s).unwrap();
            let lhs = energy(&p, &d, &s).unwrap();
            let rhs = 0.5 * sk_energy(&d, &spins).unwrap() + 0.5 * d.total() / (n as f64).sqrt();
            prop_assert!((lhs - rhs).abs() <= 1e-12, "lhs {} rhs {}", lhs, rhs);
        }

        #[test]
        fn recolor_delta_matches_recomputation(
            (kappa, g, colors) in instance(16, 4, 3.0),
            site_pick in any::<usize>(),
            color_pick in any::<usize>(),
        ) {
            let n = colors.len();
            let d = DisorderSample::from_matrix(n, g, 0).unwrap();
            let p = ModelParams::new(n, kappa, 1.0).unwrap();
            let s = SpinConfiguration::from_zero_based(colors, kappa).unwrap();
            let site = site_pick % n;
            let b = color_pick % kappa;
            let mut t = s.clone();
            t.recolor(site, b);
            let full = energy(&p, &d, &t).unwrap() - energy(&p, &d, &s).unwrap();
            prop_assert!((recolor_delta(&d, &s, site, b) - full).abs() < 1e-10);
            let c = Couplings::new(&d);
            prop_assert!((c.delta(s.colors(), site, b) - full).abs() < 1e-10);
            prop_assert!((c.energy(s.colors()) - energy(&p, &d, &s).unwrap()).abs() < 1e-10);
        }
    }

    #[test]
    fn local_fields_give_deltas() {
        let d = DisorderSample::generate(7, 11);
        let c = Couplings::new(&d);
        let s = SpinConfiguration::from_colors(&[1, 2, 3, 1, 2, 3, 3], 3).unwrap();
        let f = c.local_fields(s.colors(), 3);
        for i in 0..7 {
            for b in 0..3 {
                let via_fields = f[i * 3 + b] - f[i * 3 + s.color(i)];
                assert!((via_fields - recolor_delta(&d, &s, i, b)).abs() < 1e-12);
            }
        }
    }
}
