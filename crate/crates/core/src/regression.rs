//! Least-squares readouts through the Moore–Penrose pseudoinverse.

use alloc::string::String;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::{Error, Result};

/// Singular values below `rcond · σ_max` are treated as zero.
pub const DEFAULT_RCOND: f64 = 1e-10;

/// Sweeps of the Jacobi iteration before giving up on convergence.
const JACOBI_MAX_SWEEPS: usize = 60;

/// Moore–Penrose pseudoinverse with a relative singular-value cutoff.
///
/// The matrix is first reduced to a square triangular factor by Householder
/// QR (`X = QR`, so `X⁺ = R⁺Qᵀ`), and `R⁺` comes from a one-sided Jacobi
/// SVD, which stays accurate when `X` is rank deficient.
pub fn pseudoinverse(x: &DMatrix<f64>, rcond: f64) -> Result<DMatrix<f64>> {
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("pseudoinverse input".into()));
    }
    let (m, n) = x.shape();
    if m == 0 || n == 0 {
        return Ok(DMatrix::zeros(n, m));
    }
    if m < n {
        return Ok(pseudoinverse(&x.transpose(), rcond)?.transpose());
    }
    let qr = x.clone().qr();
    let r = qr.r();
    let q = qr.q();
    Ok(jacobi_pseudoinverse(r, rcond) * q.transpose())
}

/// Pseudoinverse of a square matrix by one-sided (Hestenes) Jacobi rotations.
fn jacobi_pseudoinverse(a: DMatrix<f64>, rcond: f64) -> DMatrix<f64> {
    let n = a.ncols();
    let mut g = a;
    let mut v = DMatrix::<f64>::identity(n, n);
    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = g.column(p).norm_squared();
                let beta = g.column(q).norm_squared();
                let gamma = g.column(p).dot(&g.column(q));
                if gamma == 0.0 || libm::fabs(gamma) <= f64::EPSILON * libm::sqrt(alpha * beta) {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = libm::copysign(1.0, zeta) / (libm::fabs(zeta) + libm::sqrt(1.0 + zeta * zeta));
                let c = 1.0 / libm::sqrt(1.0 + t * t);
                let s = c * t;
                for m in [&mut g, &mut v] {
                    for i in 0..m.nrows() {
                        let (xp, xq) = (m[(i, p)], m[(i, q)]);
                        m[(i, p)] = c * xp - s * xq;
                        m[(i, q)] = s * xp + c * xq;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
    // columns of g are σ_j u_j; columns of v are v_j
    let sigma: Vec<f64> = (0..n).map(|j| g.column(j).norm()).collect();
    let cutoff = rcond * sigma.iter().copied().fold(0.0, f64::max);
    let mut pinv = DMatrix::zeros(n, g.nrows());
    for (j, &s) in sigma.iter().enumerate() {
        if s > cutoff && s > 0.0 {
            // v_j u_jᵀ / σ_j = v_j (σ_j u_j)ᵀ / σ_j²
            pinv += v.column(j) * g.column(j).transpose() / (s * s);
        }
    }
    pinv
}

/// A design matrix: one row per sample, one column per feature.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    data: DMatrix<f64>,
}

impl DesignMatrix {
    pub fn new(data: DMatrix<f64>) -> Result<Self> {
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("design matrix".into()));
        }
        Ok(DesignMatrix { data })
    }

    /// Builds a matrix from equal-length rows.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let first = rows.first().ok_or(Error::Empty("design matrix rows"))?;
        let cols = first.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch { expected: cols, found: bad.len() });
        }
        Self::new(DMatrix::from_fn(rows.len(), cols, |i, j| rows[i][j]))
    }

    /// Appends an all-ones bias column.
    pub fn with_bias(&self) -> DesignMatrix {
        let (m, n) = self.data.shape();
        let data = self.data.clone().insert_column(n, 1.0);
        debug_assert_eq!(data.shape(), (m, n + 1));
        DesignMatrix { data }
    }

    pub fn rows(&self) -> usize {
        self.data.nrows()
    }

    pub fn cols(&self) -> usize {
        self.data.ncols()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.data
    }
}

/// Linear readout `y = X w`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReadoutWeights {
    weights: DVector<f64>,
    feature_labels: Vec<String>,
}

impl ReadoutWeights {
    pub fn new(weights: DVector<f64>, feature_labels: Vec<String>) -> Result<Self> {
        if !feature_labels.is_empty() && feature_labels.len() != weights.len() {
            return Err(Error::DimensionMismatch { expected: weights.len(), found: feature_labels.len() });
        }
        Ok(ReadoutWeights { weights, feature_labels })
    }

    pub fn zeros(len: usize) -> Self {
        ReadoutWeights { weights: DVector::zeros(len), feature_labels: Vec::new() }
    }

    pub fn weights(&self) -> &DVector<f64> {
        &self.weights
    }

    pub fn feature_labels(&self) -> &[String] {
        &self.feature_labels
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.weights.len() {
            return Err(Error::DimensionMismatch { expected: self.weights.len(), found: labels.len() });
        }
        self.feature_labels = labels;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn predict_one(&self, features: &[f64]) -> Result<f64> {
        if features.len() != self.weights.len() {
            return Err(Error::DimensionMismatch { expected: self.weights.len(), found: features.len() });
        }
        Ok(features.iter().zip(self.weights.iter()).map(|(a, b)| a * b).sum())
    }

    pub fn predict(&self, x: &DMatrix<f64>) -> Result<DVector<f64>> {
        if x.ncols() != self.weights.len() {
            return Err(Error::DimensionMismatch { expected: self.weights.len(), found: x.ncols() });
        }
        Ok(x * &self.weights)
    }
}

/// Options for [`fit_linear_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub rcond: f64,
    /// Tikhonov parameter λ; zero gives the plain pseudoinverse solution.
    pub ridge: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions { rcond: DEFAULT_RCOND, ridge: 0.0 }
    }
}

/// Minimal-norm least-squares solution `w = X⁺ y`.
pub fn fit_linear(x: &DesignMatrix, y: &[f64]) -> Result<ReadoutWeights> {
    fit_linear_with(x, y, FitOptions::default())
}

pub fn fit_linear_with(x: &DesignMatrix, y: &[f64], opts: FitOptions) -> Result<ReadoutWeights> {
    if x.rows() != y.len() {
        return Err(Error::DimensionMismatch { expected: x.rows(), found: y.len() });
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("regression targets".into()));
    }
    if opts.ridge < 0.0 || !opts.ridge.is_finite() {
        return Err(Error::invalid("ridge parameter must be finite and non-negative"));
    }
    let target = DVector::from_column_slice(y);
    let weights = if opts.ridge == 0.0 {
        pseudoinverse(x.as_matrix(), opts.rcond)? * target
    } else {
        // min ‖Xw − y‖² + λ‖w‖² as an augmented least-squares problem
        let (m, n) = x.as_matrix().shape();
        let mut aug = DMatrix::zeros(m + n, n);
        aug.view_mut((0, 0), (m, n)).copy_from(x.as_matrix());
        let s = libm::sqrt(opts.ridge);
        for i in 0..n {
            aug[(m + i, i)] = s;
        }
        let mut t = DVector::zeros(m + n);
        t.rows_mut(0, m).copy_from(&target);
        pseudoinverse(&aug, opts.rcond)? * t
    };
    Ok(ReadoutWeights { weights, feature_labels: Vec::new() })
}

fn check_pair(pred: &[f64], truth: &[f64]) -> Result<()> {
    if pred.is_empty() {
        return Err(Error::Empty("metric inputs"));
    }
    if pred.len() != truth.len() {
        return Err(Error::DimensionMismatch { expected: truth.len(), found: pred.len() });
    }
    Ok(())
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Population variance.
pub fn variance(v: &[f64]) -> f64 {
    let m = mean(v);
    v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / v.len() as f64
}

pub fn mse(pred: &[f64], truth: &[f64]) -> Result<f64> {
    check_pair(pred, truth)?;
    Ok(pred.iter().zip(truth).map(|(p, t)| (p - t) * (p - t)).sum::<f64>() / pred.len() as f64)
}

/// `mse / var(truth)`; zero-variance targets are an error.
pub fn nmse(pred: &[f64], truth: &[f64]) -> Result<f64> {
    let e = mse(pred, truth)?;
    let var = variance(truth);
    if var <= 0.0 {
        return Err(Error::ZeroVariance);
    }
    Ok(e / var)
}

/// `sqrt(nmse)`.
pub fn nrmse(pred: &[f64], truth: &[f64]) -> Result<f64> {
    nmse(pred, truth).map(libm::sqrt)
}

/// Fraction of samples where `pred > threshold` agrees with `labels > threshold`.
pub fn accuracy_at_threshold(pred: &[f64], labels: &[f64], threshold: f64) -> Result<f64> {
    check_pair(pred, labels)?;
    let hits = pred
        .iter()
        .zip(labels)
        .filter(|(p, l)| (**p > threshold) == (**l > threshold))
        .count();
    Ok(hits as f64 / pred.len() as f64)
}

/// Squared Pearson correlation; `None` when either side has zero variance.
pub fn squared_correlation(a: &[f64], b: &[f64]) -> Result<Option<f64>> {
    check_pair(a, b)?;
    let ma = mean(a);
    let mb = mean(b);
    let mut cov = 0.0;
    let mut va = 0.0;
    let mut vb = 0.0;
    for (x, y) in a.iter().zip(b) {
        cov += (x - ma) * (y - mb);
        va += (x - ma) * (x - ma);
        vb += (y - mb) * (y - mb);
    }
    if va <= 0.0 || vb <= 0.0 {
        return Ok(None);
    }
    Ok(Some(cov * cov / (va * vb)))
}

/// Bundle of the standard regression metrics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    pub mse: f64,
    pub nmse: Option<f64>,
    pub accuracy: f64,
}

/// `mse`, `nmse` (absent for constant targets) and thresholded accuracy.
pub fn metrics(pred: &[f64], truth: &[f64], threshold: f64) -> Result<Metrics> {
    let mse = mse(pred, truth)?;
    let nmse = match nmse(pred, truth) {
        Ok(v) => Some(v),
        Err(Error::ZeroVariance) => None,
        Err(e) => return Err(e),
    };
    Ok(Metrics { mse, nmse, accuracy: accuracy_at_threshold(pred, truth, threshold)? })
}
