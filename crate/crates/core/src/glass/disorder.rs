use std::io::{self, Write};

use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::rng::stream_rng;

/// An `N x N` matrix of i.i.d. standard Gaussian couplings, stored row-major.
///
/// No symmetry is imposed: `g[i][j]` and `g[j][i]` are independent.
#[derive(Debug, Clone, PartialEq)]
pub struct DisorderSample {
    n: usize,
    seed: u64,
    g: Vec<f64>,
}

const HEADER_LEN: usize = 16;

impl DisorderSample {
    pub fn generate(n: usize, seed: u64) -> Self {
        let mut rng = stream_rng(seed, 0);
        let g = (0..n * n).map(|_| StandardNormal.sample(&mut rng)).collect();
        Self { n, seed, g }
    }

    /// Wraps an explicit row-major matrix.
    pub fn from_matrix(n: usize, g: Vec<f64>, seed: u64) -> Result<Self> {
        if g.len() != n * n {
            return Err(Error::DimensionMismatch {
                field: "g",
                expected: n * n,
                found: g.len(),
            });
        }
        Ok(Self { n, seed, g })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut g = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    field: "g",
                    expected: n,
                    found: row.len(),
                });
            }
            g.extend_from_slice(row);
        }
        Ok(Self { n, seed: 0, g })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.g[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.g[i * self.n..(i + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.g
    }

    pub fn total(&self) -> f64 {
        self.g.iter().sum()
    }

    /// Little-endian binary layout: `N: u64`, `seed: u64`, then `N*N` row-major `f64`.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN + 8 * self.g.len());
        out.extend_from_slice(&(self.n as u64).to_le_bytes());
        out.extend_from_slice(&self.seed.to_le_bytes());
        for x in &self.g {
            out.extend_from_slice(&x.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < HEADER_LEN {
            return Err(Error::Format(format!("{} bytes is shorter than the header", bytes.len())));
        }
        let word = |k: usize| u64::from_le_bytes(bytes[8 * k..8 * k + 8].try_into().unwrap());
        let n = usize::try_from(word(0)).map_err(|_| Error::Format("N does not fit in usize".into()))?;
        let seed = word(1);
        let expected = n
            .checked_mul(n)
            .and_then(|nn| nn.checked_mul(8))
            .and_then(|b| b.checked_add(HEADER_LEN))
            .ok_or_else(|| Error::Format(format!("N = {n} is too large")))?;
        if bytes.len() != expected {
            return Err(Error::Format(format!(
                "expected {expected} bytes for N = {n}, found {}",
                bytes.len()
            )));
        }
        let g = bytes[HEADER_LEN..]
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Ok(Self { n, seed, g })
    }

    /// One matrix row per line, shortest round-trip float formatting.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        for i in 0..self.n {
            let line: Vec<String> = self.row(i).iter().map(|x| x.to_string()).collect();
            writeln!(w, "{}", line.join(","))?;
        }
        Ok(())
    }
}
