//! Truncated-series approximators with a-priori error certificates: the
//! log-determinant series, a multiplicative |det| estimate built on it, and
//! the Neumann series for one inverse entry.

use crate::error::{Error, Result};
use crate::linalg::{pd_extremes, singular_extremes};
use crate::matrix::{multiply, ComplexMatrix, C64, ONE, ZERO};
use crate::problem::Tolerances;
use crate::reduction::{logdet_terms, neumann_terms};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Certificate {
    /// `|value − exact| ≤ bound`.
    Additive(f64),
    /// `value / exact ∈ [1/bound, bound]`.
    Multiplicative(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApproxResult<T> {
    pub value: T,
    pub certificate: Certificate,
    pub terms_used: usize,
}

fn check_inputs(kappa: f64, epsilon: f64) -> Result<()> {
    if !(kappa >= 1.0 && kappa.is_finite() && epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidParams(format!("kappa = {kappa}, epsilon = {epsilon}")));
    }
    Ok(())
}

/// Hermitian with spectrum in `[1/κ, 1]`, up to the spectral tolerance.
fn require_conditioned_pd(h: &ComplexMatrix, kappa: f64) -> Result<()> {
    let tol = Tolerances::default();
    let scale = h.entries().map(|z| z.norm()).fold(1.0, f64::max);
    let residual = h.hermitian_residual();
    if residual > tol.identity * scale {
        return Err(Error::NotHermitian { residual });
    }
    match pd_extremes(h)? {
        Some((hi, lo)) if hi <= 1.0 + tol.spectral && lo >= 1.0 / kappa - tol.spectral => Ok(()),
        Some((hi, lo)) => Err(Error::Precondition(format!(
            "spectrum [{lo}, {hi}] outside [1/kappa, 1] for kappa = {kappa}"
        ))),
        None => Err(Error::Precondition("matrix is not positive definite".into())),
    }
}

/// `−Σ_{k=1}^{terms} tr((I−H)^k)/k`, by a running power.
pub fn logdet_series_terms(h: &ComplexMatrix, terms: usize) -> Result<f64> {
    let n = h.dim()?;
    let r = &ComplexMatrix::identity(n) - h;
    let mut p = ComplexMatrix::identity(n);
    let mut sum = 0.0;
    for k in 1..=terms {
        p = multiply(&p, &r)?;
        sum -= p.trace().re / k as f64;
    }
    Ok(sum)
}

/// Closed-form bound `nκ(1 − 1/κ)^{m+1}` on the log-determinant remainder.
pub fn logdet_remainder_bound(n: usize, kappa: f64, terms: usize) -> f64 {
    n as f64 * kappa * (1.0 - 1.0 / kappa).powi(terms as i32 + 1)
}

/// `ln det H` to within `ε/2`, from above.
pub fn logdet_series(h: &ComplexMatrix, kappa: f64, epsilon: f64) -> Result<ApproxResult<f64>> {
    check_inputs(kappa, epsilon)?;
    require_conditioned_pd(h, kappa)?;
    let n = h.rows();
    let terms = logdet_terms(n, kappa, epsilon);
    Ok(ApproxResult {
        value: logdet_series_terms(h, terms)?,
        certificate: Certificate::Additive(logdet_remainder_bound(n, kappa, terms)),
        terms_used: terms,
    })
}

/// `|det A|` within a factor `e^{±ε}`, through `ln det(AA†)` at accuracy `4ε`.
pub fn absdet_multiplicative(a: &ComplexMatrix, kappa: f64, epsilon: f64) -> Result<ApproxResult<f64>> {
    check_inputs(kappa, epsilon)?;
    let tol = Tolerances::default();
    let (hi, lo) = singular_extremes(a)?;
    if hi > 1.0 + tol.spectral || lo < 1.0 / kappa - tol.spectral {
        return Err(Error::Precondition(format!(
            "singular values [{lo}, {hi}] outside [1/kappa, 1] for kappa = {kappa}"
        )));
    }
    let h = multiply(a, &a.adjoint())?;
    let h = (&h + &h.adjoint()).scale_real(0.5);
    let inner = logdet_series(&h, kappa * kappa, 4.0 * epsilon)?;
    let Certificate::Additive(err) = inner.certificate else {
        unreachable!("log-determinant series is additive")
    };
    Ok(ApproxResult {
        value: (inner.value / 2.0).exp(),
        certificate: Certificate::Multiplicative((err / 2.0).exp()),
        terms_used: inner.terms_used,
    })
}

/// Closed-form bound `κ(1 − 1/κ)^{m+1}` on the Neumann remainder.
pub fn neumann_remainder_bound(kappa: f64, terms: usize) -> f64 {
    kappa * (1.0 - 1.0 / kappa).powi(terms as i32 + 1)
}

/// `Σ_{j=0}^{terms} (I−H)^j[s,t]`, by repeated matrix-vector products.
pub fn neumann_series_terms(h: &ComplexMatrix, s: usize, t: usize, terms: usize) -> Result<C64> {
    let n = h.dim()?;
    for &i in &[s, t] {
        if i >= n {
            return Err(Error::IndexOutOfRange { index: i, dim: n });
        }
    }
    let r = &ComplexMatrix::identity(n) - h;
    let mut v = vec![ZERO; n];
    v[t] = ONE;
    let mut sum = v[s];
    for _ in 0..terms {
        v = r.matvec(&v)?;
        sum += v[s];
    }
    Ok(sum)
}

/// `H⁻¹[s,t]` to within `ε/4`.
pub fn neumann_inverse_entry(
    h: &ComplexMatrix,
    s: usize,
    t: usize,
    kappa: f64,
    epsilon: f64,
) -> Result<ApproxResult<C64>> {
    check_inputs(kappa, epsilon)?;
    require_conditioned_pd(h, kappa)?;
    let terms = neumann_terms(kappa, epsilon);
    Ok(ApproxResult {
        value: neumann_series_terms(h, s, t, terms)?,
        certificate: Certificate::Additive(neumann_remainder_bound(kappa, terms)),
        terms_used: terms,
    })
}
