use crate::error::{Error, Result};
use crate::linalg::{determinant, hermitian_eigs, log_abs_det, solve};
use crate::matrix::{direct_sum, ComplexMatrix, C64, ONE, ZERO};
use crate::problem::{entry_value, ProblemInstance, Threshold};

use super::{logdet_padding, logdet_terms, neumann_terms, Rule};

/// An exact algebraic relation between a source instance and its reduction,
/// evaluated numerically.
#[derive(Debug, Clone, PartialEq)]
pub struct IdentityCheck {
    pub description: String,
    pub lhs: C64,
    pub rhs: C64,
    /// `|lhs − rhs| / max(1, |rhs|)` unless the rule normalizes differently.
    pub residual: f64,
    pub notes: Vec<(String, f64)>,
}

impl IdentityCheck {
    fn new(description: &str, lhs: C64, rhs: C64) -> Self {
        Self {
            description: description.into(),
            lhs,
            rhs,
            residual: (lhs - rhs).norm() / rhs.norm().max(1.0),
            notes: vec![],
        }
    }
}

/// Evaluates the identity tying `out = rule(src)` back to `src`.
pub fn identity_check(rule: Rule, src: &ProblemInstance, out: &ProblemInstance) -> Result<IdentityCheck> {
    if src.kind != rule.input_kind() || out.kind != rule.output_kind() {
        return Err(Error::KindMismatch {
            rule: rule.name().into(),
            expected: format!("{} -> {}", rule.input_kind(), rule.output_kind()),
            found: format!("{} -> {}", src.kind, out.kind),
        });
    }
    let p = src.params;
    Ok(match rule {
        Rule::ItMatProdToMatPow | Rule::VItMatProdToVMatPow => IdentityCheck::new(
            "A'^m[s',t'] = A_{1,m}[s,t]",
            entry_value(out)?,
            entry_value(src)?,
        ),
        Rule::MatPowToMatInv | Rule::VMatPowToVMatInv => {
            let c = (1.0 + p.kappa).ceil();
            IdentityCheck::new("Z'^-1[s',t'] = c A^m[s,t]", entry_value(out)?, entry_value(src)? * c)
        }
        Rule::MatInvToPosMatInv => {
            IdentityCheck::new("H^-1[s,t+n] = 3 A^-1[s,t]", entry_value(out)?, entry_value(src)? * 3.0)
        }
        Rule::PosDetToSumItMatProd => {
            let l = logdet_padding(p.kappa) as f64;
            let mh = logdet_terms(p.n, p.kappa, p.epsilon);
            let lambda = hermitian_eigs(src.matrix())?;
            let series: f64 = lambda
                .iter()
                .map(|&x| (1..=mh).map(|k| (1.0 - x).powi(k as i32) / k as f64).sum::<f64>())
                .sum();
            let rhs = p.n as f64 * l - series;
            let mut check = IdentityCheck::new(
                "sum of diagonal = n l - truncated log series",
                entry_value(out)?,
                C64::new(rhs, 0.0),
            );
            let logdet: f64 = lambda.iter().map(|x| x.ln()).sum();
            check.notes.push(("truncation remainder".into(), rhs - (p.n as f64 * l + logdet)));
            check.notes.push(("remainder bound".into(), p.epsilon / 2.0));
            check
        }
        Rule::ItMatProdToNonneg => {
            let q = entry_value(src)?;
            IdentityCheck::new("palindrome entry = |A_{1,m}[s,t]|^2", entry_value(out)?, C64::new(q.norm_sqr(), 0.0))
        }
        Rule::NonnegToDet => {
            let l = logdet_padding(2.0 + p.kappa) as f64;
            let dim = out.params.n as f64;
            let (phase, ln) = log_abs_det(out.matrix())?;
            let det_c = phase * (ln + l * dim).exp();
            IdentityCheck::new("det C = 1 + A_{1,m}[s,t]", det_c, ONE + entry_value(src)?)
        }
        Rule::DetToPosDet => {
            let (_, ln_h) = log_abs_det(out.matrix())?;
            let (_, ln_a) = log_abs_det(src.matrix())?;
            IdentityCheck::new("ln det H = 2 ln|det A|", C64::new(ln_h, 0.0), C64::new(2.0 * ln_a, 0.0))
        }
        Rule::PosMatInvToSumItMatProd => {
            let h = src.matrix();
            let mh = neumann_terms(p.kappa, p.epsilon);
            let n = p.n;
            let mut w = vec![ZERO; n];
            w[src.t] = ONE;
            for _ in 0..=mh {
                let hw = h.matvec(&w)?;
                w = w.iter().zip(hw).map(|(a, b)| a - b).collect();
            }
            let mut v = vec![ZERO; n];
            v[src.t] = ONE;
            for (vi, wi) in v.iter_mut().zip(&w) {
                *vi -= wi;
            }
            let x = solve(h, &v)?;
            IdentityCheck::new(
                "sum = (H^-1 (I - (I-H)^{m+1}))[s,t]",
                entry_value(out)?,
                x[src.s],
            )
        }
        Rule::SumItMatProdToItMatProd => IdentityCheck::new(
            "A'_{0,m+1}[0,0] = sum over E of A_{1,m}[s,t]",
            entry_value(out)?,
            entry_value(src)?,
        ),
        Rule::VMatInvToSingular => {
            let n = p.n;
            let k = p.kappa.ceil();
            let b = src.b.complex().unwrap_or(match src.b {
                Threshold::Real(x) => C64::new(x, 0.0),
                _ => ZERO,
            });
            let d = 1.0 / (2.0 * k + 2.0);
            let c_hat = out.matrix().block(0, n + 1, n + 1, n + 1).scale_real(1.0 / d);
            let b_hat = direct_sum(&[
                src.matrix().scale_real(2.0 * k),
                ComplexMatrix::scalar(ONE / (ONE - b / (2.0 * k))),
            ])?;
            let det_b = determinant(&b_hat)?;
            let q = entry_value(src)?;
            let lhs = determinant(&c_hat)?;
            let rhs = (b - q) / (2.0 * k) * det_b;
            let mut check = IdentityCheck::new("det C = ((b - q) / 2k) det B", lhs, rhs);
            check.residual = (lhs - rhs).norm() / det_b.norm().max(f64::MIN_POSITIVE);
            check
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{gen_instance_with, Answer, ConditionParams, ProblemKind};

    #[test]
    fn single_rule_identities_hold() {
        let cases = [
            (Rule::ItMatProdToMatPow, ProblemKind::ItMatProd, 3, 4, 2.0, 0.3),
            (Rule::MatPowToMatInv, ProblemKind::MatPow, 3, 3, 2.0, 0.3),
            (Rule::MatInvToPosMatInv, ProblemKind::MatInv, 3, 1, 4.0, 0.3),
            (Rule::PosDetToSumItMatProd, ProblemKind::DetPos, 2, 1, 1.5, 0.5),
            (Rule::ItMatProdToNonneg, ProblemKind::ItMatProd, 3, 3, 2.0, 0.3),
            (Rule::NonnegToDet, ProblemKind::ItMatProdNonneg, 2, 3, 2.0, 0.3),
            (Rule::DetToPosDet, ProblemKind::Det, 3, 1, 4.0, 0.3),
            (Rule::PosMatInvToSumItMatProd, ProblemKind::MatInvPos, 2, 1, 2.0, 0.5),
            (Rule::SumItMatProdToItMatProd, ProblemKind::SumItMatProd, 3, 3, 2.0, 0.3),
            (Rule::VMatInvToSingular, ProblemKind::VMatInv, 3, 1, 2.0, 0.3),
            (Rule::VItMatProdToVMatPow, ProblemKind::VItMatProd, 3, 3, 2.0, 0.3),
            (Rule::VMatPowToVMatInv, ProblemKind::VMatPow, 3, 3, 2.0, 0.3),
        ];
        for (rule, kind, n, m, kappa, eps) in cases {
            for answer in [Answer::One, Answer::Zero] {
                let src = gen_instance_with(kind, ConditionParams::new(n, m, kappa, eps).unwrap(), 11, answer).unwrap();
                let (out, rec) = rule.apply(&src).unwrap();
                let check = identity_check(rule, &src, &out).unwrap();
                assert!(check.residual <= 1e-9, "{rule}: {check:?}");
                assert!(rec.violations(1e-7).is_empty(), "{rule}: {rec:?}");
            }
        }
    }

    #[test]
    fn log_series_remainder_within_half_gap() {
        let src = gen_instance_with(
            ProblemKind::DetPos,
            ConditionParams::new(2, 1, 2.0, 0.6).unwrap(),
            4,
            Answer::One,
        )
        .unwrap();
        let (out, _) = Rule::PosDetToSumItMatProd.apply(&src).unwrap();
        let check = identity_check(Rule::PosDetToSumItMatProd, &src, &out).unwrap();
        let rem = check.notes[0].1;
        assert!(rem >= -1e-12 && rem <= 0.3 + 1e-12, "{rem}");
    }
}
