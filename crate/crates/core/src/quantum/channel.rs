use alloc::vec::Vec;

use super::{max_abs_diff, unitarity_residual, CMatrix, DensityMatrix, C64, UNITARITY_TOL};
use crate::{Error, Result};

const TRACE_PRESERVATION_TOL: f64 = 1e-10;

/// A linear map on operators.
pub trait Superoperator {
    fn apply_operator(&self, op: &CMatrix) -> CMatrix;
}

impl<F> Superoperator for F
where
    F: Fn(&CMatrix) -> CMatrix,
{
    fn apply_operator(&self, op: &CMatrix) -> CMatrix {
        self(op)
    }
}

/// A CPTP map `ρ ↦ Σ_i K_i ρ K_i†`.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel {
    operators: Vec<CMatrix>,
}

impl KrausChannel {
    /// Validates `Σ K_i†K_i = I` within 1e-10.
    pub fn new(operators: Vec<CMatrix>) -> Result<Self> {
        let first = operators.first().ok_or(Error::Empty("kraus operators"))?;
        let dim = first.nrows();
        if operators.iter().any(|k| k.nrows() != dim || k.ncols() != dim) {
            return Err(Error::invalid("kraus operators must share a square shape"));
        }
        let sum = operators
            .iter()
            .fold(CMatrix::zeros(dim, dim), |acc, k| acc + k.adjoint() * k);
        let residual = max_abs_diff(&sum, &CMatrix::identity(dim, dim));
        if residual > TRACE_PRESERVATION_TOL {
            return Err(Error::NotTracePreserving { residual });
        }
        Ok(KrausChannel { operators })
    }

    pub fn identity(dim: usize) -> Self {
        KrausChannel { operators: alloc::vec![CMatrix::identity(dim, dim)] }
    }

    /// `ρ ↦ UρU†`.
    pub fn unitary(u: CMatrix) -> Result<Self> {
        let residual = unitarity_residual(&u);
        if residual > UNITARITY_TOL {
            return Err(Error::NotUnitary { residual });
        }
        Ok(KrausChannel { operators: alloc::vec![u] })
    }

    /// Applies `u` with probability `p` and `v` otherwise.
    pub fn mixture(p: f64, u: CMatrix, v: CMatrix) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::invalid("mixture probability must lie in [0, 1]"));
        }
        KrausChannel::new(alloc::vec![
            u * C64::new(libm::sqrt(p), 0.0),
            v * C64::new(libm::sqrt(1.0 - p), 0.0),
        ])
    }

    /// Non-selective computational-basis measurement `{|i⟩⟨i|}`.
    pub fn dephasing(dim: usize) -> Self {
        let operators = (0..dim)
            .map(|i| {
                let mut k = CMatrix::zeros(dim, dim);
                k[(i, i)] = C64::new(1.0, 0.0);
                k
            })
            .collect();
        KrausChannel { operators }
    }

    pub fn operators(&self) -> &[CMatrix] {
        &self.operators
    }

    pub fn dim(&self) -> usize {
        self.operators[0].nrows()
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: rho.dim() });
        }
        DensityMatrix::new(self.apply_operator(rho.matrix()))
    }
}

impl Superoperator for KrausChannel {
    fn apply_operator(&self, op: &CMatrix) -> CMatrix {
        self.operators
            .iter()
            .fold(CMatrix::zeros(op.nrows(), op.ncols()), |acc, k| acc + k * op * k.adjoint())
    }
}

/// `A ↦ UAU†` without Kraus bookkeeping.
#[derive(Debug, Clone)]
pub struct UnitaryConjugation(pub CMatrix);

impl Superoperator for UnitaryConjugation {
    fn apply_operator(&self, op: &CMatrix) -> CMatrix {
        &self.0 * op * self.0.adjoint()
    }
}
