use rayon::prelude::*;
use serde::Serialize;

use super::{beta_interval, min_kappa_threshold, symmetry_breaking_criterion, RegionQuery};
use crate::error::{Error, Result};

pub const REGION_CSV_HEADER: &str = "kappa,beta,breaking";
pub const THRESHOLD_TABLE_HEADER: &str = "constant_c,min_kappa,beta_lo,beta_hi";

/// `lo, lo + step, ...` up to `hi` inclusive (with a relative slack of 1e-9
/// steps so that `hi` itself is not lost to rounding).
pub fn beta_grid(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !lo.is_finite() || !hi.is_finite() || lo < 0.0 {
        return Err(Error::invalid("beta", format!("bad grid {lo}:{hi}:{step}")));
    }
    if hi < lo {
        return Ok(Vec::new());
    }
    let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|i| lo + i as f64 * step).collect())
}

/// Criterion values over `kappas x betas`, row `r` for `kappas[r]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionGrid {
    pub constant_c: f64,
    pub kappas: Vec<usize>,
    pub betas: Vec<f64>,
    pub cells: Vec<Vec<bool>>,
}

impl RegionGrid {
    pub fn is_empty(&self) -> bool {
        self.kappas.is_empty() || self.betas.is_empty()
    }

    pub fn get(&self, kappa: usize, beta_index: usize) -> Option<bool> {
        let row = self.kappas.iter().position(|&k| k == kappa)?;
        self.cells[row].get(beta_index).copied()
    }

    /// Long format: one `kappa,beta,breaking` line per cell.
    pub fn csv_lines(&self) -> impl Iterator<Item = String> + '_ {
        self.kappas.iter().zip(&self.cells).flat_map(move |(k, row)| {
            self.betas
                .iter()
                .zip(row)
                .map(move |(b, &x)| format!("{k},{b},{}", u8::from(x)))
        })
    }

    /// Symmetry-breaking intervals of the rows in the scan.
    pub fn intervals(&self) -> Vec<KappaInterval> {
        self.kappas
            .iter()
            .filter_map(|&kappa| {
                beta_interval(kappa, self.constant_c).map(|(lo, hi)| KappaInterval { kappa, beta_lo: lo, beta_hi: hi })
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KappaInterval {
    pub kappa: usize,
    pub beta_lo: f64,
    pub beta_hi: f64,
}

/// Tabulates the strict criterion on a grid; rows are evaluated in parallel.
pub fn region_scan(kappas: std::ops::RangeInclusive<usize>, betas: &[f64], constant_c: f64) -> Result<RegionGrid> {
    let kappas: Vec<usize> = kappas.collect();
    if let Some(&k) = kappas.iter().find(|&&k| k < 2) {
        return Err(Error::invalid("kappa", format!("must be at least 2, got {k}")));
    }
    // Validates constant_c and betas.
    for &b in betas {
        RegionQuery::new(2, b, constant_c)?;
    }
    RegionQuery::new(2, 0.0, constant_c)?;
    let cells = kappas
        .par_iter()
        .map(|&kappa| {
            betas
                .iter()
                .map(|&beta| symmetry_breaking_criterion(&RegionQuery { kappa, beta, constant_c }))
                .collect()
        })
        .collect();
    Ok(RegionGrid {
        constant_c,
        kappas,
        betas: betas.to_vec(),
        cells,
    })
}

/// One row of the thresholds table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThresholdRow {
    pub constant_c: f64,
    pub min_kappa: u64,
    pub beta_lo: f64,
    pub beta_hi: f64,
}

impl ThresholdRow {
    pub fn csv_row(&self) -> String {
        format!("{},{},{},{}", self.constant_c, self.min_kappa, self.beta_lo, self.beta_hi)
    }
}

/// Minimal number of colors and the beta interval at that number, per constant.
pub fn thresholds_summary(constants: &[f64]) -> Result<Vec<ThresholdRow>> {
    constants
        .iter()
        .map(|&c| {
            let k = min_kappa_threshold(c)?;
            let (lo, hi) = beta_interval(k as usize, c).expect("threshold kappa has an interval");
            Ok(ThresholdRow {
                constant_c: c,
                min_kappa: k,
                beta_lo: lo,
                beta_hi: hi,
            })
        })
        .collect()
}
