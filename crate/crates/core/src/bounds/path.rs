use std::fmt;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::glass::PROFILE_SUM_TOLERANCE;

/// Minimum eigenvalue accepted for a path increment.
pub const PSD_TOLERANCE: f64 = 1e-10;
/// Entrywise tolerance for symmetry and for the endpoint conditions.
pub const SYMMETRY_TOLERANCE: f64 = 1e-12;

/// A left-continuous step path of `kappa x kappa` symmetric matrices:
/// `values[t]` is the value on `(times[t-1], times[t]]`, and `values[0]` the
/// value at time 0.
///
/// Members of the order-parameter space start at 0, end at `diag(target_d)`
/// and increase in the positive semidefinite order.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixPath {
    pub times: Vec<f64>,
    pub values: Vec<DMatrix<f64>>,
    pub target_d: Vec<f64>,
}

impl MatrixPath {
    pub fn new(times: Vec<f64>, values: Vec<DMatrix<f64>>, target_d: Vec<f64>) -> Self {
        Self { times, values, target_d }
    }

    /// Zero on `[0, 1)` and `diag(d)` at 1.
    pub fn one_step(target_d: Vec<f64>) -> Self {
        let k = target_d.len();
        let end = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(target_d.clone()));
        Self::new(vec![0.0, 1.0], vec![DMatrix::zeros(k, k), end], target_d)
    }

    /// The color-symmetric one-step path ending at `diag(1/kappa, ..., 1/kappa)`.
    pub fn replica_symmetric(kappa: usize) -> Self {
        Self::one_step(vec![1.0 / kappa as f64; kappa])
    }

    /// Builds a path from arbitrary PSD increments (one per time after 0) by
    /// the congruence `A -> T A T^T` with `T = diag(d)^{1/2} S^{-1/2}`, where
    /// `S` is the sum of the increments; the final value is then set to
    /// `diag(d)` exactly.
    pub fn from_increments(times: Vec<f64>, increments: &[DMatrix<f64>], target_d: Vec<f64>) -> Result<Self> {
        let k = target_d.len();
        if increments.len() + 1 != times.len() {
            return Err(Error::DimensionMismatch {
                field: "increments",
                expected: times.len().saturating_sub(1),
                found: increments.len(),
            });
        }
        if let Some(bad) = increments.iter().find(|m| m.nrows() != k || m.ncols() != k) {
            return Err(Error::DimensionMismatch {
                field: "increments",
                expected: k,
                found: bad.nrows().max(bad.ncols()),
            });
        }
        let total = increments.iter().fold(DMatrix::zeros(k, k), |acc, m| acc + m);
        let eig = SymmetricEigen::new(total);
        if eig.eigenvalues.iter().any(|&l| !(l > 0.0)) {
            return Err(Error::invalid("increments", "their sum must be positive definite"));
        }
        let inv_sqrt = &eig.eigenvectors
            * DMatrix::from_diagonal(&eig.eigenvalues.map(|l| 1.0 / l.sqrt()))
            * eig.eigenvectors.transpose();
        let sqrt_d = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(k, target_d.iter().map(|d| d.sqrt())));
        let t = sqrt_d * inv_sqrt;
        let mut values = vec![DMatrix::zeros(k, k)];
        let mut current = DMatrix::zeros(k, k);
        for inc in increments {
            let scaled = &t * inc * t.transpose();
            current += 0.5 * (&scaled + scaled.transpose());
            values.push(current.clone());
        }
        if let Some(last) = values.last_mut() {
            if !increments.is_empty() {
                *last = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(target_d.clone()));
            }
        }
        Ok(Self::new(times, values, target_d))
    }

    pub fn kappa(&self) -> usize {
        self.target_d.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ViolationKind {
    Empty,
    LengthMismatch { times: usize, values: usize },
    WrongShape { rows: usize, cols: usize, kappa: usize },
    TimeOutOfRange(f64),
    TimesNotIncreasing,
    StartTimeNotZero(f64),
    EndTimeNotOne(f64),
    NotSymmetric { max_asymmetry: f64 },
    StartNotZero { max_entry: f64 },
    EndNotTarget { max_deviation: f64 },
    TargetNotOnSimplex { sum: f64 },
    IncrementNotPsd { min_eigenvalue: f64 },
}

/// One failed condition, located at a step of the path (or at the target).
#[derive(Debug, Clone, PartialEq)]
pub struct PathViolation {
    pub step: Option<usize>,
    pub kind: ViolationKind,
}

impl fmt::Display for PathViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.step {
            Some(s) => write!(f, "step {s}: ")?,
            None => write!(f, "target: ")?,
        }
        match &self.kind {
            ViolationKind::Empty => write!(f, "path has no points"),
            ViolationKind::LengthMismatch { times, values } => write!(f, "{times} times but {values} values"),
            ViolationKind::WrongShape { rows, cols, kappa } => write!(f, "matrix is {rows}x{cols}, expected {kappa}x{kappa}"),
            ViolationKind::TimeOutOfRange(t) => write!(f, "time {t} outside [0, 1]"),
            ViolationKind::TimesNotIncreasing => write!(f, "times not strictly increasing"),
            ViolationKind::StartTimeNotZero(t) => write!(f, "first time is {t}, not 0"),
            ViolationKind::EndTimeNotOne(t) => write!(f, "last time is {t}, not 1"),
            ViolationKind::NotSymmetric { max_asymmetry } => write!(f, "value not symmetric (max asymmetry {max_asymmetry:e})"),
            ViolationKind::StartNotZero { max_entry } => write!(f, "initial value not 0 (max entry {max_entry:e})"),
            ViolationKind::EndNotTarget { max_deviation } => write!(f, "final value not diag(d) (max deviation {max_deviation:e})"),
            ViolationKind::TargetNotOnSimplex { sum } => write!(f, "d is not a probability vector (sum {sum})"),
            ViolationKind::IncrementNotPsd { min_eigenvalue } => write!(f, "increment not PSD (min eigenvalue {min_eigenvalue:e})"),
        }
    }
}

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

/// Lists every failed path condition; an empty list means the path is a
/// valid member of the order-parameter space for `target_d`.
pub fn validate_path(path: &MatrixPath) -> Vec<PathViolation> {
    let mut out = Vec::new();
    let mut push = |step: Option<usize>, kind| out.push(PathViolation { step, kind });
    let k = path.kappa();

    let sum: f64 = path.target_d.iter().sum();
    if path.target_d.is_empty()
        || (sum - 1.0).abs() > PROFILE_SUM_TOLERANCE
        || path.target_d.iter().any(|d| !(0.0..=1.0).contains(d))
    {
        push(None, ViolationKind::TargetNotOnSimplex { sum });
    }
    if path.times.is_empty() || path.values.is_empty() {
        push(None, ViolationKind::Empty);
        return out;
    }
    if path.times.len() != path.values.len() {
        push(
            None,
            ViolationKind::LengthMismatch {
                times: path.times.len(),
                values: path.values.len(),
            },
        );
        return out;
    }

    for (s, &t) in path.times.iter().enumerate() {
        if !(0.0..=1.0).contains(&t) {
            push(Some(s), ViolationKind::TimeOutOfRange(t));
        }
        if s > 0 && !(t > path.times[s - 1]) {
            push(Some(s), ViolationKind::TimesNotIncreasing);
        }
    }
    if path.times[0] != 0.0 {
        push(Some(0), ViolationKind::StartTimeNotZero(path.times[0]));
    }
    let last = path.times.len() - 1;
    if path.times[last] != 1.0 {
        push(Some(last), ViolationKind::EndTimeNotOne(path.times[last]));
    }

    let mut shapes_ok = true;
    for (s, m) in path.values.iter().enumerate() {
        if m.nrows() != k || m.ncols() != k {
            push(
                Some(s),
                ViolationKind::WrongShape {
                    rows: m.nrows(),
                    cols: m.ncols(),
                    kappa: k,
                },
            );
            shapes_ok = false;
            continue;
        }
        let asym = max_abs(&(m - m.transpose()));
        if asym > SYMMETRY_TOLERANCE {
            push(Some(s), ViolationKind::NotSymmetric { max_asymmetry: asym });
        }
    }
    if !shapes_ok {
        return out;
    }

    let start = max_abs(&path.values[0]);
    if start > SYMMETRY_TOLERANCE {
        push(Some(0), ViolationKind::StartNotZero { max_entry: start });
    }
    let target = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(path.target_d.clone()));
    let dev = max_abs(&(&path.values[last] - target));
    if dev > SYMMETRY_TOLERANCE {
        push(Some(last), ViolationKind::EndNotTarget { max_deviation: dev });
    }

    for s in 1..path.values.len() {
        let inc = &path.values[s] - &path.values[s - 1];
        // Eigenvalues of the symmetric part; asymmetry is reported separately.
        let sym = 0.5 * (&inc + inc.transpose());
        let min = SymmetricEigen::new(sym).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
        if min < -PSD_TOLERANCE {
            push(Some(s), ViolationKind::IncrementNotPsd { min_eigenvalue: min });
        }
    }
    out
}
