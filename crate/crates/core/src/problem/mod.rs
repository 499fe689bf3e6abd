//! The promise problems as data: instances, promise checks, a dense
//! decision oracle and seeded generators.
//!
//! Indices (`s`, `t`, the pairs in `E`) are 0-based throughout the library.

mod generate;
mod oracle;
pub(crate) mod promise;

use std::fmt;
use std::str::FromStr;

pub use generate::{
    gen_conditioned_matrix, gen_hermitian_with_spectrum, gen_instance, gen_instance_with,
    gen_matrix_with_spectrum,
    gen_unitary,
};
pub use oracle::{
    decide_quantity, decision_quantity, entry_value, oracle_decide, oracle_decide_with, Answer, Decision,
    Witness,
};
pub use promise::{check_promise, check_promise_with, PromiseCheck, PromiseReport};

use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ProblemKind {
    Det,
    DetPos,
    MatInv,
    MatInvPos,
    MatPow,
    ItMatProd,
    ItMatProdNonneg,
    SumItMatProd,
    Singular,
    VMatInv,
    VMatPow,
    VItMatProd,
}

impl ProblemKind {
    pub const ALL: [ProblemKind; 12] = [
        ProblemKind::Det,
        ProblemKind::DetPos,
        ProblemKind::MatInv,
        ProblemKind::MatInvPos,
        ProblemKind::MatPow,
        ProblemKind::ItMatProd,
        ProblemKind::ItMatProdNonneg,
        ProblemKind::SumItMatProd,
        ProblemKind::Singular,
        ProblemKind::VMatInv,
        ProblemKind::VMatPow,
        ProblemKind::VItMatProd,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ProblemKind::Det => "DET",
            ProblemKind::DetPos => "DET+",
            ProblemKind::MatInv => "MATINV",
            ProblemKind::MatInvPos => "MATINV+",
            ProblemKind::MatPow => "MATPOW",
            ProblemKind::ItMatProd => "ITMATPROD",
            ProblemKind::ItMatProdNonneg => "ITMATPROD>=0",
            ProblemKind::SumItMatProd => "SUMITMATPROD",
            ProblemKind::Singular => "SINGULAR",
            ProblemKind::VMatInv => "vMATINV",
            ProblemKind::VMatPow => "vMATPOW",
            ProblemKind::VItMatProd => "vITMATPROD",
        }
    }

    /// Verification problems decide exact equality with a complex target.
    pub fn is_verification(self) -> bool {
        matches!(
            self,
            ProblemKind::VMatInv | ProblemKind::VMatPow | ProblemKind::VItMatProd
        )
    }

    /// Kinds whose input is a sequence of `m` matrices.
    pub fn is_product_family(self) -> bool {
        matches!(
            self,
            ProblemKind::ItMatProd
                | ProblemKind::ItMatProdNonneg
                | ProblemKind::SumItMatProd
                | ProblemKind::VItMatProd
        )
    }

    pub fn is_det_family(self) -> bool {
        matches!(self, ProblemKind::Det | ProblemKind::DetPos)
    }

    /// Kinds carrying an `(s, t)` selector.
    pub fn has_selector(self) -> bool {
        !matches!(
            self,
            ProblemKind::Det | ProblemKind::DetPos | ProblemKind::SumItMatProd | ProblemKind::Singular
        )
    }

    /// Kinds whose matrix must be positive definite.
    pub fn is_positive(self) -> bool {
        matches!(self, ProblemKind::DetPos | ProblemKind::MatInvPos)
    }
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProblemKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let norm = s.replace('⁺', "+").replace('≥', ">=");
        ProblemKind::ALL
            .into_iter()
            .find(|k| k.name() == norm)
            .ok_or_else(|| Error::UnknownName(s.to_string()))
    }
}

/// Size and conditioning parameters `(n, m, κ, ε)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionParams {
    pub n: usize,
    pub m: usize,
    pub kappa: f64,
    pub epsilon: f64,
}

impl ConditionParams {
    pub fn new(n: usize, m: usize, kappa: f64, epsilon: f64) -> Result<Self> {
        let p = Self {
            n,
            m,
            kappa,
            epsilon,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.m == 0 {
            return Err(Error::InvalidParams("n and m must be at least 1".into()));
        }
        if !(self.kappa.is_finite() && self.kappa >= 1.0) {
            return Err(Error::InvalidParams(format!("kappa = {} < 1", self.kappa)));
        }
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(Error::InvalidParams(format!("epsilon = {} <= 0", self.epsilon)));
        }
        Ok(())
    }
}

/// The threshold `b`: real for the threshold problems, complex for the
/// verification problems, absent for SINGULAR.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Threshold {
    None,
    Real(f64),
    Complex(C64),
}

impl Threshold {
    pub fn real(&self) -> Option<f64> {
        match *self {
            Threshold::Real(b) => Some(b),
            _ => None,
        }
    }

    pub fn complex(&self) -> Option<C64> {
        match *self {
            Threshold::Complex(b) => Some(b),
            Threshold::Real(b) => Some(C64::new(b, 0.0)),
            Threshold::None => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance {
    pub kind: ProblemKind,
    pub params: ConditionParams,
    pub matrices: Vec<ComplexMatrix>,
    pub s: usize,
    pub t: usize,
    pub pairs: Vec<(usize, usize)>,
    pub b: Threshold,
}

impl ProblemInstance {
    /// Structural validation: matrix count and shapes, index ranges, and the
    /// form of `b`.
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        let n = self.params.n;
        let expected = if self.kind.is_product_family() {
            self.params.m
        } else {
            1
        };
        if self.matrices.len() != expected {
            return Err(Error::InvalidParams(format!(
                "{} expects {expected} matrices, got {}",
                self.kind,
                self.matrices.len()
            )));
        }
        for m in &self.matrices {
            if m.rows() != n || m.cols() != n {
                return Err(Error::DimensionMismatch(format!(
                    "{}x{} matrix in an instance with n = {n}",
                    m.rows(),
                    m.cols()
                )));
            }
            if !m.is_finite() {
                return Err(Error::NonFinite);
            }
        }
        if self.kind.has_selector() {
            for &i in &[self.s, self.t] {
                if i >= n {
                    return Err(Error::IndexOutOfRange { index: i, dim: n });
                }
            }
        }
        if self.kind == ProblemKind::SumItMatProd {
            if self.pairs.is_empty() {
                return Err(Error::InvalidParams("E is empty".into()));
            }
            for &(a, c) in &self.pairs {
                for i in [a, c] {
                    if i >= n {
                        return Err(Error::IndexOutOfRange { index: i, dim: n });
                    }
                }
            }
        }
        match (self.kind, self.b) {
            (ProblemKind::Singular, Threshold::None) => {}
            (k, Threshold::Complex(b)) if k.is_verification() => {
                if !(b.re.is_finite() && b.im.is_finite()) {
                    return Err(Error::NonFinite);
                }
            }
            (k, Threshold::Real(b)) if !k.is_verification() && k != ProblemKind::Singular => {
                if !b.is_finite() {
                    return Err(Error::NonFinite);
                }
            }
            (k, b) => {
                return Err(Error::InvalidParams(format!(
                    "threshold {b:?} does not fit {k}"
                )))
            }
        }
        Ok(())
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrices[0]
    }
}

/// Numerical tolerances for checks and decisions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Equality and zero tests on entries, relative to `max(1, |b|)` in decisions.
    pub identity: f64,
    /// Slack on singular-value and eigenvalue bounds.
    pub spectral: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            identity: 1e-9,
            spectral: 1e-7,
        }
    }
}

impl Tolerances {
    pub fn with_identity(identity: f64) -> Self {
        Self {
            identity,
            ..Self::default()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kind_names_round_trip() {
        for k in ProblemKind::ALL {
            assert_eq!(k.name().parse::<ProblemKind>().unwrap(), k);
        }
        assert_eq!("DET⁺".parse::<ProblemKind>().unwrap(), ProblemKind::DetPos);
        assert_eq!(
            "ITMATPROD≥0".parse::<ProblemKind>().unwrap(),
            ProblemKind::ItMatProdNonneg
        );
        assert!("MATMUL".parse::<ProblemKind>().is_err());
    }

    #[test]
    fn params_validation() {
        assert!(ConditionParams::new(1, 1, 1.0, 0.1).is_ok());
        assert!(ConditionParams::new(0, 1, 1.0, 0.1).is_err());
        assert!(ConditionParams::new(1, 1, 0.5, 0.1).is_err());
        assert!(ConditionParams::new(1, 1, 1.0, 0.0).is_err());
    }

    #[test]
    fn instance_validation() {
        let mut inst = ProblemInstance {
            kind: ProblemKind::MatInv,
            params: ConditionParams::new(2, 1, 2.0, 0.5).unwrap(),
            matrices: vec![ComplexMatrix::identity(2)],
            s: 0,
            t: 1,
            pairs: vec![],
            b: Threshold::Real(1.0),
        };
        assert!(inst.validate().is_ok());
        inst.t = 2;
        assert!(inst.validate().is_err());
        inst.t = 0;
        inst.b = Threshold::Complex(C64::new(1.0, 0.0));
        assert!(inst.validate().is_err());
    }
}
