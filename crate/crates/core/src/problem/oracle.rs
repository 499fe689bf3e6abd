use std::fmt;

use crate::error::{Error, Result};
use crate::linalg::{inverse_entry, log_abs_det, pd_inverse_entry, svd_values};
use crate::matrix::{product, ComplexMatrix, C64, ONE, ZERO};

use super::promise::check_promise_full;
use super::{ConditionParams, ProblemInstance, ProblemKind, Threshold, Tolerances};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Answer {
    One,
    Zero,
    PromiseViolated,
}

impl fmt::Display for Answer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Answer::One => "One",
            Answer::Zero => "Zero",
            Answer::PromiseViolated => "PromiseViolated",
        })
    }
}

/// The quantity compared against `b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Witness {
    Real(f64),
    Complex(C64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decision {
    pub value: Answer,
    pub witness: Option<Witness>,
}

/// `A^m e_t` by repeated matrix-vector products.
fn power_column(a: &ComplexMatrix, m: usize, t: usize) -> Result<Vec<C64>> {
    let mut v = vec![ZERO; a.rows()];
    v[t] = ONE;
    for _ in 0..m {
        v = a.matvec(&v)?;
    }
    Ok(v)
}

/// `A_1 ⋯ A_m e_t`, applied right to left.
fn product_column(mats: &[ComplexMatrix], t: usize) -> Result<Vec<C64>> {
    let n = mats[0].rows();
    let mut v = vec![ZERO; n];
    v[t] = ONE;
    for a in mats.iter().rev() {
        v = a.matvec(&v)?;
    }
    Ok(v)
}

/// The complex entry underlying the decision: `A⁻¹[s,t]`, `A^m[s,t]`,
/// `A_{1,m}[s,t]` or `Σ_E A_{1,m}[s,t]`.
pub fn entry_value(inst: &ProblemInstance) -> Result<C64> {
    let (s, t) = (inst.s, inst.t);
    match inst.kind {
        ProblemKind::MatInv | ProblemKind::VMatInv => inverse_entry(inst.matrix(), s, t),
        ProblemKind::MatInvPos => pd_inverse_entry(inst.matrix(), s, t),
        ProblemKind::MatPow | ProblemKind::VMatPow => {
            Ok(power_column(inst.matrix(), inst.params.m, t)?[s])
        }
        ProblemKind::ItMatProd | ProblemKind::ItMatProdNonneg | ProblemKind::VItMatProd => {
            Ok(product_column(&inst.matrices, t)?[s])
        }
        ProblemKind::SumItMatProd => {
            let p = product(&inst.matrices)?;
            Ok(inst.pairs.iter().map(|&(a, c)| p[(a, c)]).sum())
        }
        k => Err(Error::InvalidParams(format!("{k} has no selected entry"))),
    }
}

/// The decision quantity computed by dense algebra.
pub fn decision_quantity(inst: &ProblemInstance) -> Result<Witness> {
    match inst.kind {
        ProblemKind::Det | ProblemKind::DetPos => {
            let (phase, ln) = log_abs_det(inst.matrix())?;
            if !ln.is_finite() {
                return Err(Error::Numerical("singular matrix".into()));
            }
            if inst.kind == ProblemKind::DetPos && (phase - ONE).norm() > 1e-6 {
                return Err(Error::Numerical(format!("determinant phase {phase}")));
            }
            Ok(Witness::Real(ln))
        }
        ProblemKind::Singular => Ok(Witness::Real(svd_values(inst.matrix())?.min())),
        ProblemKind::ItMatProdNonneg => Ok(Witness::Real(entry_value(inst)?.re)),
        k if k.is_verification() => Ok(Witness::Complex(entry_value(inst)?)),
        _ => Ok(Witness::Real(entry_value(inst)?.norm())),
    }
}

/// Thresholds a decision quantity. Comparisons carry a slack of
/// `tol · max(1, |b|)` so that quantities placed exactly on a boundary are not
/// flipped into the gap by rounding.
pub fn decide_quantity(
    kind: ProblemKind,
    params: &ConditionParams,
    b: Threshold,
    w: Witness,
    tol: f64,
) -> Answer {
    match (kind, w, b) {
        (ProblemKind::Singular, Witness::Real(sn), _) => {
            if sn <= tol {
                Answer::One
            } else if sn >= params.epsilon - tol {
                Answer::Zero
            } else {
                Answer::PromiseViolated
            }
        }
        (k, Witness::Complex(q), Threshold::Complex(b)) if k.is_verification() => {
            let d = (q - b).norm();
            let delta = tol * b.norm().max(1.0);
            if d <= delta {
                Answer::One
            } else if d >= params.epsilon - delta {
                Answer::Zero
            } else {
                Answer::PromiseViolated
            }
        }
        (_, Witness::Real(q), Threshold::Real(b)) => {
            let delta = tol * b.abs().max(1.0);
            if q >= b - delta {
                Answer::One
            } else if q <= b - params.epsilon + delta {
                Answer::Zero
            } else {
                Answer::PromiseViolated
            }
        }
        _ => Answer::PromiseViolated,
    }
}

pub fn oracle_decide(inst: &ProblemInstance) -> Decision {
    oracle_decide_with(inst, &Tolerances::default())
}

pub fn oracle_decide_with(inst: &ProblemInstance, tol: &Tolerances) -> Decision {
    let (report, witness) = check_promise_full(inst, tol);
    let value = match witness {
        Some(w) if report.overall => decide_quantity(inst.kind, &inst.params, inst.b, w, tol.identity),
        _ => Answer::PromiseViolated,
    };
    Decision { value, witness }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::ConditionParams;
    use crate::reference;

    fn single(kind: ProblemKind, a: ComplexMatrix, kappa: f64, eps: f64, s: usize, t: usize, b: Threshold) -> ProblemInstance {
        ProblemInstance {
            kind,
            params: ConditionParams::new(a.rows(), 1, kappa, eps).unwrap(),
            matrices: vec![a],
            s,
            t,
            pairs: vec![],
            b,
        }
    }

    #[test]
    fn identity_posdet_is_one() {
        let inst = single(ProblemKind::DetPos, ComplexMatrix::identity(3), 2.0, 0.1, 0, 0, Threshold::Real(0.0));
        assert_eq!(oracle_decide(&inst).value, Answer::One);
    }

    #[test]
    fn diagonal_inverse_entry() {
        let a = ComplexMatrix::diag_real(&[1.0, 0.5]);
        let inst = single(ProblemKind::MatInv, a, 2.0, 0.5, 1, 1, Threshold::Real(2.0));
        let d = oracle_decide(&inst);
        assert_eq!(d.value, Answer::One);
        assert_eq!(d.witness, Some(Witness::Real(2.0)));
    }

    #[test]
    fn product_entry_matches_direct_multiplication() {
        let mats: Vec<_> = (0..4)
            .map(|i| reference::seeded_matrix(3, 3, 40 + i).scale_real(0.5))
            .collect();
        let inst = ProblemInstance {
            kind: ProblemKind::ItMatProd,
            params: ConditionParams::new(3, 4, 1.0, 0.01).unwrap(),
            matrices: mats.clone(),
            s: 2,
            t: 1,
            pairs: vec![],
            b: Threshold::Real(0.0),
        };
        let mut p = mats[0].clone();
        for m in &mats[1..] {
            p = reference::naive_multiply(&p, m);
        }
        assert!((entry_value(&inst).unwrap() - p[(2, 1)]).norm() < 1e-12);
    }

    #[test]
    fn zero_side_and_gap_interior() {
        let p = ConditionParams::new(1, 1, 2.0, 0.5).unwrap();
        let th = |b| Threshold::Real(b);
        assert_eq!(decide_quantity(ProblemKind::MatInv, &p, th(1.0), Witness::Real(0.5), 1e-9), Answer::Zero);
        assert_eq!(decide_quantity(ProblemKind::MatInv, &p, th(1.0), Witness::Real(0.7), 1e-9), Answer::PromiseViolated);
        assert_eq!(decide_quantity(ProblemKind::MatInv, &p, th(1.0), Witness::Real(1.0 - 1e-12), 1e-9), Answer::One);
    }
}
