use crate::linalg::{
    certified_range, hermitian_eigs, pd_extremes, singular_extremes, svd_values,
    DENSE_SPECTRUM_LIMIT,
};
use crate::matrix::{multiply, ComplexMatrix};
use crate::par;

use super::oracle::{decision_quantity, Witness};
use super::{ProblemInstance, ProblemKind, Threshold, Tolerances};

/// One promise condition: the declared bound, the measured value and whether
/// the condition holds.
#[derive(Debug, Clone, PartialEq)]
pub struct PromiseCheck {
    pub name: String,
    pub declared: f64,
    pub measured: f64,
    pub passed: bool,
}

impl PromiseCheck {
    fn upper(name: impl Into<String>, declared: f64, measured: f64, slack: f64) -> Self {
        Self {
            name: name.into(),
            declared,
            measured,
            passed: measured <= declared + slack,
        }
    }

    fn lower(name: impl Into<String>, declared: f64, measured: f64, slack: f64) -> Self {
        Self {
            name: name.into(),
            declared,
            measured,
            passed: measured >= declared - slack,
        }
    }

    fn flag(name: impl Into<String>, declared: f64, measured: f64, passed: bool) -> Self {
        Self {
            name: name.into(),
            declared,
            measured,
            passed,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PromiseReport {
    pub checks: Vec<PromiseCheck>,
    pub overall: bool,
}

impl PromiseReport {
    fn new(checks: Vec<PromiseCheck>) -> Self {
        let overall = checks.iter().all(|c| c.passed);
        Self { checks, overall }
    }

    pub fn failures(&self) -> impl Iterator<Item = &PromiseCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

pub fn check_promise(inst: &ProblemInstance) -> PromiseReport {
    check_promise_with(inst, &Tolerances::default())
}

pub fn check_promise_with(inst: &ProblemInstance, tol: &Tolerances) -> PromiseReport {
    check_promise_full(inst, tol).0
}

/// Runs every check and returns the decision quantity when it could be computed.
pub(crate) fn check_promise_full(
    inst: &ProblemInstance,
    tol: &Tolerances,
) -> (PromiseReport, Option<Witness>) {
    if let Err(e) = inst.validate() {
        return (
            PromiseReport::new(vec![PromiseCheck {
                name: format!("structure: {e}"),
                declared: 0.0,
                measured: 1.0,
                passed: false,
            }]),
            None,
        );
    }
    let p = inst.params;
    let mut checks = Vec::new();
    let spec = tol.spectral;

    match inst.kind {
        ProblemKind::Det | ProblemKind::MatInv | ProblemKind::VMatInv => {
            conditioning_checks(inst.matrix(), p.kappa, spec, &mut checks);
        }
        ProblemKind::DetPos | ProblemKind::MatInvPos => {
            hermitian_check(inst.matrix(), tol.identity, &mut checks);
            positive_checks(inst.matrix(), p.kappa, spec, &mut checks);
        }
        ProblemKind::Singular => {
            hermitian_check(inst.matrix(), tol.identity, &mut checks);
            match svd_values(inst.matrix()) {
                Ok(s) => {
                    checks.push(PromiseCheck::upper("sigma_1(A) <= 1", 1.0, s.max(), spec));
                }
                Err(e) => checks.push(numerical_failure("sigma_1(A)", &e.to_string())),
            }
        }
        ProblemKind::MatPow | ProblemKind::VMatPow => {
            let worst = max_power_norm(inst.matrix(), p.m);
            checks.push(PromiseCheck::upper("sigma_1(A^j) <= kappa, j = 1..m", p.kappa, worst, spec));
        }
        ProblemKind::ItMatProd
        | ProblemKind::ItMatProdNonneg
        | ProblemKind::SumItMatProd
        | ProblemKind::VItMatProd => {
            let worst = max_partial_product_norm(&inst.matrices);
            checks.push(PromiseCheck::upper(
                "sigma_1(A_{j1,j2}) <= kappa, all partial products",
                p.kappa,
                worst,
                spec,
            ));
        }
    }

    if let Threshold::Real(b) = inst.b {
        if inst.kind.is_det_family() {
            checks.push(PromiseCheck::upper("b <= 0", 0.0, b, 0.0));
        } else {
            checks.push(PromiseCheck::lower("b >= 0", 0.0, b, 0.0));
        }
    }

    let witness = match decision_quantity(inst) {
        Ok(w) => Some(w),
        Err(e) => {
            checks.push(numerical_failure("decision quantity", &e.to_string()));
            None
        }
    };
    if let Some(w) = witness {
        gap_checks(inst, w, tol, &mut checks);
    }
    (PromiseReport::new(checks), witness)
}

fn numerical_failure(name: &str, msg: &str) -> PromiseCheck {
    PromiseCheck::flag(format!("{name} computable ({msg})"), 0.0, f64::NAN, false)
}

fn hermitian_check(a: &ComplexMatrix, tol: f64, checks: &mut Vec<PromiseCheck>) {
    let scale = a.entries().map(|z| z.norm()).fold(1.0, f64::max);
    checks.push(PromiseCheck::upper(
        "hermitian residual",
        tol * scale,
        a.hermitian_residual(),
        0.0,
    ));
}

fn conditioning_checks(a: &ComplexMatrix, kappa: f64, slack: f64, checks: &mut Vec<PromiseCheck>) {
    match singular_range_bounds(a, 1.0, 1.0 / kappa, slack) {
        Ok([(hi, c_hi), (lo, c_lo)]) => {
            let mut up = PromiseCheck::upper("sigma_1(A) <= 1", 1.0, hi, slack);
            let mut down = PromiseCheck::lower("sigma_n(A) >= 1/kappa", 1.0 / kappa, lo, slack);
            if let (Some(u), Some(d)) = (c_hi, c_lo) {
                up.passed = u;
                down.passed = d;
            }
            checks.push(up);
            checks.push(down);
        }
        Err(e) => checks.push(numerical_failure("singular values", &e.to_string())),
    }
}

fn positive_checks(a: &ComplexMatrix, kappa: f64, slack: f64, checks: &mut Vec<PromiseCheck>) {
    let [(hi, c_hi), (lo, c_lo)] = eigen_range_bounds(a, 1.0, 1.0 / kappa, slack);
    let mut up = PromiseCheck::upper("sigma_1(A) <= 1", 1.0, hi, slack);
    let mut down = PromiseCheck::lower("lambda_min(A) >= 1/kappa", 1.0 / kappa, lo, slack);
    if let Some(c) = c_hi {
        up.passed = c;
    }
    if let Some(c) = c_lo {
        down.passed = c;
    }
    checks.push(up);
    checks.push(down);
}

/// Extreme singular values, each with a certificate of `σ₁ < hi + slack` and
/// `σ_min > lo − slack` for large inputs. Large inputs go through one Gram
/// matrix `a†a`.
pub(crate) fn singular_range_bounds(a: &ComplexMatrix, hi: f64, lo: f64, slack: f64) -> crate::error::Result<[(f64, Option<bool>); 2]> {
    if a.rows() <= DENSE_SPECTRUM_LIMIT {
        let (s1, sn) = singular_extremes(a)?;
        return Ok([(s1, None), (sn, None)]);
    }
    let gram = multiply(&a.adjoint(), a)?;
    let gram = (&gram + &gram.adjoint()).scale_real(0.5);
    let [(gmax, c_hi), (gmin, c_lo)] =
        eigen_range_bounds(&gram, (hi + slack).powi(2), (lo - slack).max(0.0).powi(2), 0.0);
    Ok([(gmax.max(0.0).sqrt(), c_hi), (gmin.max(0.0).sqrt(), c_lo)])
}

/// Extreme eigenvalues of a Hermitian matrix, each with a certificate of
/// `λ_max < hi + slack` and `λ_min > lo − slack` for large inputs.
pub(crate) fn eigen_range_bounds(a: &ComplexMatrix, hi: f64, lo: f64, slack: f64) -> [(f64, Option<bool>); 2] {
    let dense = || match pd_extremes(a) {
        Ok(Some(pair)) => pair,
        _ => hermitian_eigs(a)
            .ok()
            .and_then(|e| Some((*e.first()?, *e.last()?)))
            .unwrap_or((f64::INFINITY, f64::NEG_INFINITY)),
    };
    if a.rows() <= DENSE_SPECTRUM_LIMIT {
        let (max, min) = dense();
        return [(max, None), (min, None)];
    }
    match certified_range(a, lo - slack, hi + slack) {
        Ok(r) => {
            let min = r.min.unwrap_or_else(|| dense().1);
            [(r.max, Some(r.max_below)), (min, Some(r.min_above))]
        }
        Err(_) => {
            let (max, min) = dense();
            [(max, Some(false)), (min, Some(false))]
        }
    }
}

/// max_j σ₁(A^j) over j = 1..m.
pub(crate) fn max_power_norm(a: &ComplexMatrix, m: usize) -> f64 {
    let mut p = a.clone();
    let mut worst = sigma_max(&p);
    for _ in 1..m {
        p = match multiply(&p, a) {
            Ok(q) => q,
            Err(_) => return f64::INFINITY,
        };
        worst = worst.max(sigma_max(&p));
    }
    worst
}

/// max σ₁(A_{j1} ⋯ A_{j2}) over all 1 ≤ j1 ≤ j2 ≤ m, by prefix extension from
/// each starting index.
pub(crate) fn max_partial_product_norm(mats: &[ComplexMatrix]) -> f64 {
    par::map_range(mats.len(), |j1| {
        let mut p = mats[j1].clone();
        let mut worst = sigma_max(&p);
        for a in &mats[j1 + 1..] {
            p = match multiply(&p, a) {
                Ok(q) => q,
                Err(_) => return f64::INFINITY,
            };
            worst = worst.max(sigma_max(&p));
        }
        worst
    })
    .into_iter()
    .fold(0.0, f64::max)
}

fn sigma_max(a: &ComplexMatrix) -> f64 {
    svd_values(a).map(|s| s.max()).unwrap_or(f64::INFINITY)
}

fn gap_checks(inst: &ProblemInstance, w: Witness, tol: &Tolerances, checks: &mut Vec<PromiseCheck>) {
    let p = inst.params;
    match (inst.kind, w, inst.b) {
        (ProblemKind::Singular, Witness::Real(sn), _) => {
            let delta = tol.identity;
            let ok = sn <= delta || (sn >= p.epsilon - delta && sn <= 1.0 + tol.spectral);
            checks.push(PromiseCheck::flag(
                "sigma_n(A) in {0} u [epsilon, 1]",
                p.epsilon,
                sn,
                ok,
            ));
        }
        (k, Witness::Complex(q), Threshold::Complex(b)) if k.is_verification() => {
            let d = (q - b).norm();
            let delta = tol.identity * b.norm().max(1.0);
            let upper = 2.0 * p.kappa;
            let ok = d <= delta
                || (d >= p.epsilon - delta && d <= upper + tol.spectral * upper.max(1.0));
            checks.push(PromiseCheck::flag(
                "|q - b| in {0} u [epsilon, 2 kappa]",
                p.epsilon,
                d,
                ok,
            ));
        }
        (k, Witness::Real(q), Threshold::Real(b)) => {
            let delta = tol.identity * b.abs().max(1.0);
            let (lo, hi) = if k.is_det_family() {
                (f64::NEG_INFINITY, 0.0)
            } else if k == ProblemKind::SumItMatProd {
                (0.0, inst.pairs.len() as f64 * p.kappa)
            } else {
                (0.0, p.kappa)
            };
            let hi_slack = tol.spectral * hi.abs().max(1.0);
            let in_one = q >= b - delta && q <= hi + hi_slack;
            let in_zero = q <= b - p.epsilon + delta && q >= lo - delta;
            let name = if k.is_det_family() {
                "ln|det| in (-inf, b - epsilon] u [b, 0]"
            } else {
                "q in [0, b - epsilon] u [b, upper]"
            };
            checks.push(PromiseCheck::flag(name, b, q, in_one || in_zero));
        }
        (k, w, b) => checks.push(PromiseCheck::flag(
            format!("quantity {w:?} comparable with threshold {b:?} for {k}"),
            0.0,
            0.0,
            false,
        )),
    }
    if inst.kind == ProblemKind::ItMatProdNonneg {
        if let Ok(z) = super::oracle::entry_value(inst) {
            let slack = tol.identity * z.norm().max(1.0);
            checks.push(PromiseCheck::upper("|Im A_{1,m}[s,t]|", slack, z.im.abs(), 0.0));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::C64;
    use crate::problem::ConditionParams;

    #[test]
    fn identity_matinv_passes() {
        let inst = ProblemInstance {
            kind: ProblemKind::MatInv,
            params: ConditionParams::new(2, 1, 2.0, 0.5).unwrap(),
            matrices: vec![ComplexMatrix::identity(2)],
            s: 0,
            t: 0,
            pairs: vec![],
            b: Threshold::Real(1.0),
        };
        let r = check_promise(&inst);
        assert!(r.overall, "{r:?}");
    }

    #[test]
    fn doubled_identity_power_fails() {
        let inst = ProblemInstance {
            kind: ProblemKind::MatPow,
            params: ConditionParams::new(2, 3, 1.0, 0.5).unwrap(),
            matrices: vec![ComplexMatrix::identity(2).scale_real(2.0)],
            s: 0,
            t: 0,
            pairs: vec![],
            b: Threshold::Real(1.0),
        };
        let r = check_promise(&inst);
        assert!(!r.overall);
        let failed: Vec<_> = r.failures().collect();
        assert!(failed[0].name.starts_with("sigma_1(A^j)"));
        assert!((failed[0].measured - 8.0).abs() < 1e-12);
    }

    #[test]
    fn gap_interior_is_violation() {
        let inst = ProblemInstance {
            kind: ProblemKind::VMatInv,
            params: ConditionParams::new(1, 1, 1.0, 0.5).unwrap(),
            matrices: vec![ComplexMatrix::identity(1)],
            s: 0,
            t: 0,
            pairs: vec![],
            b: Threshold::Complex(C64::new(1.2, 0.0)),
        };
        assert!(!check_promise(&inst).overall);
    }

    #[test]
    fn partial_products_include_interior_ranges() {
        // A1·A2 is small but A2 alone is large.
        let big = ComplexMatrix::diag_real(&[3.0, 1.0]);
        let small = ComplexMatrix::diag_real(&[0.0, 1.0]);
        let w = max_partial_product_norm(&[small.clone(), big.clone(), small]);
        assert!((w - 3.0).abs() < 1e-12);
    }
}
