//! Quantum channels as Kraus sets and their natural (superoperator)
//! representation under row-major vectorization.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::orthonormal_columns;
use crate::matrix::{kron, multiply, ComplexMatrix, C64};

pub const COMPLETENESS_TOL: f64 = 1e-9;

/// Kraus operators `{Kₖ}` with `Σ Kₖ†Kₖ = I`.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausSet {
    operators: Vec<ComplexMatrix>,
}

impl KrausSet {
    /// Validates shapes and completeness.
    pub fn new(operators: Vec<ComplexMatrix>) -> Result<Self> {
        let set = Self { operators };
        let residual = set.completeness_residual()?;
        if residual > COMPLETENESS_TOL {
            return Err(Error::IncompleteKraus { residual });
        }
        Ok(set)
    }

    pub fn unitary(u: ComplexMatrix) -> Result<Self> {
        Self::new(vec![u])
    }

    pub fn identity(d: usize) -> Self {
        Self {
            operators: vec![ComplexMatrix::identity(d)],
        }
    }

    pub fn operators(&self) -> &[ComplexMatrix] {
        &self.operators
    }

    pub fn dim(&self) -> usize {
        self.operators[0].rows()
    }

    /// Largest entry of `|Σ K†K − I|`.
    pub fn completeness_residual(&self) -> Result<f64> {
        let first = self
            .operators
            .first()
            .ok_or_else(|| Error::IncompleteKraus { residual: 1.0 })?;
        let d = first.dim()?;
        let mut acc = ComplexMatrix::zeros(d, d);
        for k in &self.operators {
            if k.rows() != d || k.cols() != d {
                return Err(Error::DimensionMismatch(format!(
                    "Kraus operator {}x{} in a {d}-dimensional set",
                    k.rows(),
                    k.cols()
                )));
            }
            if !k.is_finite() {
                return Err(Error::NonFinite);
            }
            acc = &acc + &multiply(&k.adjoint(), k)?;
        }
        Ok(acc.max_abs_diff(&ComplexMatrix::identity(d)))
    }

    /// `Φ(ρ) = Σ K ρ K†`.
    pub fn apply(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        let d = rho.rows();
        let mut out = ComplexMatrix::zeros(d, d);
        for k in &self.operators {
            out = &out + &(&(k * rho) * &k.adjoint());
        }
        out
    }

    /// Heisenberg picture `Φ†(X) = Σ K† X K`.
    pub fn apply_adjoint(&self, x: &ComplexMatrix) -> ComplexMatrix {
        let d = x.rows();
        let mut out = ComplexMatrix::zeros(d, d);
        for k in &self.operators {
            out = &out + &(&(&k.adjoint() * x) * k);
        }
        out
    }

    /// Composition `other ∘ self` (apply `self` first).
    pub fn then(&self, other: &KrausSet) -> KrausSet {
        let mut ops = Vec::with_capacity(self.operators.len() * other.operators.len());
        for b in &other.operators {
            for a in &self.operators {
                ops.push(b * a);
            }
        }
        KrausSet { operators: ops }
    }

    /// Random channel of Kraus rank `rank` from a Gaussian isometry.
    pub fn random<R: Rng + ?Sized>(d: usize, rank: usize, rng: &mut R) -> Result<Self> {
        let g = ComplexMatrix::from_fn(d * rank, d, |_, _| {
            C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
        });
        let v = orthonormal_columns(&g)?;
        let operators = (0..rank).map(|k| v.block(k * d, 0, d, d)).collect();
        Self::new(operators)
    }
}

/// `K(Φ) = Σ K ⊗ conj(K)`, so that `vec(Φ(ρ)) = K(Φ)·vec(ρ)` for row-major vec.
pub fn natural_representation(k: &KrausSet) -> Result<ComplexMatrix> {
    let residual = k.completeness_residual()?;
    if residual > COMPLETENESS_TOL {
        return Err(Error::IncompleteKraus { residual });
    }
    let d = k.dim();
    let mut out = ComplexMatrix::zeros(d * d, d * d);
    for op in k.operators() {
        out = &out + &kron(op, &op.conj());
    }
    Ok(out)
}
