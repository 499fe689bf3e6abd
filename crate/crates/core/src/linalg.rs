//! Dense decompositions, backed by LAPACK.

use ndarray::{Array1, Array2};
use ndarray_linalg::{
    Cholesky, CholeskyFactorized, Determinant, EigValsh, FactorizeC, Solve, SolveC, QR, SVD, UPLO,
};

use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, C64, ONE, ZERO};

/// Singular values in descending order.
#[derive(Debug, Clone, PartialEq)]
pub struct SingularSpectrum {
    pub values: Vec<f64>,
}

impl SingularSpectrum {
    /// σ₁, or 0 for an empty matrix.
    pub fn max(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    /// Smallest singular value, or 0 for an empty matrix.
    pub fn min(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }
}

fn lapack_err(e: ndarray_linalg::error::LinalgError) -> Error {
    Error::Numerical(e.to_string())
}

fn check_finite(a: &ComplexMatrix) -> Result<()> {
    if a.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

pub fn svd_values(a: &ComplexMatrix) -> Result<SingularSpectrum> {
    check_finite(a)?;
    if a.rows() == 0 || a.cols() == 0 {
        return Ok(SingularSpectrum { values: vec![] });
    }
    let (_, s, _) = a.as_array().svd(false, false).map_err(lapack_err)?;
    let mut values = s.to_vec();
    values.sort_by(|x, y| y.total_cmp(x));
    Ok(SingularSpectrum { values })
}

/// Largest singular value.
pub fn spectral_norm(a: &ComplexMatrix) -> Result<f64> {
    Ok(svd_values(a)?.max())
}

/// Eigenvalues of a Hermitian matrix in descending order. The residual
/// tolerance is `1e-9 · max(1, max|aᵢⱼ|)`.
pub fn hermitian_eigs(a: &ComplexMatrix) -> Result<Vec<f64>> {
    a.dim()?;
    check_finite(a)?;
    let scale = a.entries().map(|z| z.norm()).fold(1.0, f64::max);
    let residual = a.hermitian_residual();
    if residual > 1e-9 * scale {
        return Err(Error::NotHermitian { residual });
    }
    if a.rows() == 0 {
        return Ok(vec![]);
    }
    let mut vals = a.as_array().eigvalsh(UPLO::Lower).map_err(lapack_err)?.to_vec();
    vals.sort_by(|x, y| y.total_cmp(x));
    Ok(vals)
}

/// True when the Cholesky factorization of the (assumed Hermitian) matrix succeeds.
pub fn is_positive_definite(a: &ComplexMatrix) -> bool {
    a.is_square() && a.is_finite() && a.as_array().cholesky(UPLO::Lower).is_ok()
}

/// Solves `a x = rhs`.
pub fn solve(a: &ComplexMatrix, rhs: &[C64]) -> Result<Vec<C64>> {
    let n = a.dim()?;
    check_finite(a)?;
    if rhs.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "right-hand side of length {} for dimension {n}",
            rhs.len()
        )));
    }
    let b = Array1::from_vec(rhs.to_vec());
    let x = a.as_array().solve(&b).map_err(lapack_err)?;
    if x.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Numerical("singular system".into()));
    }
    Ok(x.to_vec())
}

/// The entry `a⁻¹[s, t]`, via one solve against `e_t`.
pub fn inverse_entry(a: &ComplexMatrix, s: usize, t: usize) -> Result<C64> {
    let n = a.dim()?;
    for &i in &[s, t] {
        if i >= n {
            return Err(Error::IndexOutOfRange { index: i, dim: n });
        }
    }
    let mut e = vec![ZERO; n];
    e[t] = ONE;
    Ok(solve(a, &e)?[s])
}

/// `h⁻¹[s, t]` for Hermitian positive definite `h` through a Cholesky solve,
/// falling back to LU when the factorization fails.
pub fn pd_inverse_entry(h: &ComplexMatrix, s: usize, t: usize) -> Result<C64> {
    let n = h.dim()?;
    check_finite(h)?;
    for &i in &[s, t] {
        if i >= n {
            return Err(Error::IndexOutOfRange { index: i, dim: n });
        }
    }
    let Ok(chol) = h.as_array().factorizec(UPLO::Lower) else {
        return inverse_entry(h, s, t);
    };
    let mut e = Array1::from_elem(n, ZERO);
    e[t] = ONE;
    Ok(chol.solvec(&e).map_err(lapack_err)?[s])
}

/// `(phase, ln|det a|)` from an LU factorization; `ln|det| = -inf` for a
/// numerically singular matrix.
pub fn log_abs_det(a: &ComplexMatrix) -> Result<(C64, f64)> {
    let n = a.dim()?;
    check_finite(a)?;
    if n == 0 {
        return Ok((ONE, 0.0));
    }
    let (phase, ln) = a.as_array().sln_det().map_err(lapack_err)?;
    Ok((phase, ln))
}

pub fn determinant(a: &ComplexMatrix) -> Result<C64> {
    let (phase, ln) = log_abs_det(a)?;
    Ok(phase * ln.exp())
}

/// Unitary factor of a QR decomposition with the phases of `R`'s diagonal
/// absorbed, so that Gaussian input yields Haar-distributed output.
pub fn qr_unitary(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = a.dim()?;
    check_finite(a)?;
    let (q, r): (Array2<C64>, Array2<C64>) = a.as_array().qr().map_err(lapack_err)?;
    let mut q = ComplexMatrix::from_array(q);
    for c in 0..n {
        let d = r[(c, c)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { ONE };
        for row in 0..n {
            q[(row, c)] *= phase;
        }
    }
    Ok(q)
}

/// Orthonormal columns spanning a tall `rows x cols` Gaussian draw; used for
/// random isometries.
pub fn orthonormal_columns(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    check_finite(a)?;
    if a.rows() < a.cols() {
        return Err(Error::DimensionMismatch("more columns than rows".into()));
    }
    let (q, r): (Array2<C64>, Array2<C64>) = a.as_array().qr().map_err(lapack_err)?;
    let mut q = ComplexMatrix::from_array(q).block(0, 0, a.rows(), a.cols());
    for c in 0..a.cols() {
        let d = r[(c, c)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { ONE };
        for row in 0..a.rows() {
            q[(row, c)] *= phase;
        }
    }
    Ok(q)
}

/// Dimension above which extreme eigenvalues of positive definite matrices
/// come from Lanczos iteration instead of a full SVD.
pub const DENSE_SPECTRUM_LIMIT: usize = 512;

const LANCZOS_STEPS: usize = 300;
/// Relative change in the top Ritz value that ends the iteration.
const LANCZOS_RTOL: f64 = 1e-8;

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[C64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Largest Ritz value of a Hermitian operator after Lanczos with full
/// reorthogonalization. Never exceeds the true largest eigenvalue.
fn lanczos_max(n: usize, apply: impl Fn(&[C64]) -> Result<Vec<C64>>) -> Result<f64> {
    // Fixed, irregular start vector keeps the result deterministic.
    let mut v: Vec<C64> = (0..n)
        .map(|i| C64::new(1.0 + ((i * 7919) % 113) as f64 / 113.0, ((i * 104_729) % 97) as f64 / 970.0))
        .collect();
    let nv = norm(&v);
    v.iter_mut().for_each(|z| *z /= nv);
    let mut basis: Vec<Vec<C64>> = Vec::new();
    let (mut alpha, mut beta) = (Vec::new(), Vec::new());
    let mut last = f64::NEG_INFINITY;
    for _ in 0..LANCZOS_STEPS.min(n) {
        let mut w = apply(&v)?;
        alpha.push(dot(&v, &w).re);
        basis.push(v);
        for _ in 0..2 {
            for q in &basis {
                let c = dot(q, &w);
                w.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
            }
        }
        let k = alpha.len();
        let b = norm(&w);
        if k % 5 != 0 && k < n.min(LANCZOS_STEPS) && b > 1e-13 * alpha[0].abs() {
            beta.push(b);
            v = w.into_iter().map(|z| z / b).collect();
            continue;
        }
        let t = Array2::from_shape_fn((k, k), |(i, j)| match i.abs_diff(j) {
            0 => alpha[i],
            1 => beta[i.min(j)],
            _ => 0.0,
        });
        let theta = t
            .eigvalsh(UPLO::Lower)
            .map_err(lapack_err)?
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        if (theta - last).abs() <= LANCZOS_RTOL * theta.abs() || b <= 1e-13 * theta.abs() {
            return Ok(theta);
        }
        last = theta;
        beta.push(b);
        v = w.into_iter().map(|z| z / b).collect();
    }
    Ok(last)
}

/// `(λ_max, λ_min)` of a Hermitian matrix, or `None` when it is not positive
/// definite. Large matrices use Lanczos on `h` and on `h⁻¹` through the
/// Cholesky factor, so both values are estimates from inside the spectrum.
pub fn pd_extremes(h: &ComplexMatrix) -> Result<Option<(f64, f64)>> {
    let n = h.dim()?;
    check_finite(h)?;
    let Ok(chol) = h.as_array().factorizec(UPLO::Lower) else {
        return Ok(None);
    };
    if n <= DENSE_SPECTRUM_LIMIT {
        let s = svd_values(h)?;
        return Ok(Some((s.max(), s.min())));
    }
    let chol: CholeskyFactorized<_> = chol;
    let max = lanczos_max(n, |v| h.matvec(v))?;
    let inv_max = lanczos_max(n, |v| {
        chol.solvec(&Array1::from_vec(v.to_vec()))
            .map(|x| x.to_vec())
            .map_err(lapack_err)
    })?;
    Ok(Some((max, 1.0 / inv_max)))
}

/// `(σ₁, σ_min)` of a square matrix. Large matrices go through the Gram
/// matrix `a†a`.
pub fn singular_extremes(a: &ComplexMatrix) -> Result<(f64, f64)> {
    let n = a.dim()?;
    if n > DENSE_SPECTRUM_LIMIT {
        let gram = crate::matrix::multiply(&a.adjoint(), a)?;
        let gram = (&gram + &gram.adjoint()).scale_real(0.5);
        if let Some((hi, lo)) = pd_extremes(&gram)? {
            return Ok((hi.sqrt(), lo.sqrt()));
        }
    }
    let s = svd_values(a)?;
    Ok((s.max(), s.min()))
}

fn shifted(h: &ComplexMatrix, sign: f64, c: f64) -> ComplexMatrix {
    let mut m = h.scale_real(sign);
    for i in 0..m.rows() {
        m[(i, i)] += c;
    }
    m
}

/// Extreme-eigenvalue estimates of a Hermitian matrix with factorization
/// certificates of `λ_min > lo` and `λ_max < hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertifiedRange {
    pub max: f64,
    /// Present when `h − lo·I` factors; estimated by Lanczos on its inverse.
    pub min: Option<f64>,
    pub min_above: bool,
    pub max_below: bool,
}

pub fn certified_range(h: &ComplexMatrix, lo: f64, hi: f64) -> Result<CertifiedRange> {
    let n = h.dim()?;
    check_finite(h)?;
    let max = lanczos_max(n, |v| h.matvec(v))?;
    let max_below = certify_lambda_max_below(h, hi);
    let min = match shifted(h, 1.0, -lo).as_array().factorizec(UPLO::Lower) {
        Ok(chol) => {
            let chol: CholeskyFactorized<_> = chol;
            let theta = lanczos_max(n, |v| {
                chol.solvec(&Array1::from_vec(v.to_vec()))
                    .map(|x| x.to_vec())
                    .map_err(lapack_err)
            })?;
            Some(lo + 1.0 / theta)
        }
        Err(_) => None,
    };
    Ok(CertifiedRange {
        max,
        min,
        min_above: min.is_some(),
        max_below,
    })
}

/// Certifies `λ_min(h) > c` for Hermitian `h` by factoring `h − c·I`.
pub fn certify_lambda_min_above(h: &ComplexMatrix, c: f64) -> bool {
    is_positive_definite(&shifted(h, 1.0, -c))
}

/// Certifies `λ_max(h) < c` for Hermitian `h` by factoring `c·I − h`.
pub fn certify_lambda_max_below(h: &ComplexMatrix, c: f64) -> bool {
    is_positive_definite(&shifted(h, -1.0, c))
}

/// Certifies `σ₁(a) < c` through the Gram matrix.
pub fn certify_norm_below(a: &ComplexMatrix, c: f64) -> Result<bool> {
    let gram = crate::matrix::multiply(&a.adjoint(), a)?;
    Ok(certify_lambda_max_below(&gram, c * c))
}

/// Certifies `σ_min(a) > c ≥ 0` through the Gram matrix.
pub fn certify_smallest_singular_above(a: &ComplexMatrix, c: f64) -> Result<bool> {
    let gram = crate::matrix::multiply(&a.adjoint(), a)?;
    Ok(certify_lambda_min_above(&gram, c.max(0.0).powi(2)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::multiply;
    use crate::reference;

    #[test]
    fn svd_examples() {
        assert_eq!(
            svd_values(&ComplexMatrix::identity(3)).unwrap().values,
            vec![1.0, 1.0, 1.0]
        );
        let s = svd_values(&ComplexMatrix::diag_real(&[0.5, 2.0])).unwrap();
        assert!((s.values[0] - 2.0).abs() < 1e-15 && (s.values[1] - 0.5).abs() < 1e-15);
        assert!((s.min() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn svd_squares_match_gram_eigenvalues() {
        let a = reference::seeded_matrix(6, 6, 11);
        let s = svd_values(&a).unwrap();
        let gram = multiply(&a.adjoint(), &a).unwrap();
        let eig = reference::jacobi_eigenvalues(&gram);
        for (sv, ev) in s.values.iter().zip(eig) {
            assert!((sv * sv - ev).abs() < 1e-9, "{sv} vs {ev}");
        }
    }

    #[test]
    fn hermitian_eig_examples() {
        assert_eq!(hermitian_eigs(&ComplexMatrix::identity(2)).unwrap(), vec![1.0, 1.0]);
        let x = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let e = hermitian_eigs(&x).unwrap();
        assert!((e[0] - 1.0).abs() < 1e-14 && (e[1] + 1.0).abs() < 1e-14);
        let nh = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]);
        assert!(matches!(hermitian_eigs(&nh), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn hermitian_trace_identity() {
        let a = reference::seeded_matrix(7, 7, 3);
        let h = &a + &a.adjoint();
        let sum: f64 = hermitian_eigs(&h).unwrap().iter().sum();
        assert!((sum - h.trace().re).abs() < 1e-9);
    }

    #[test]
    fn solve_against_gauss_jordan() {
        let a = reference::seeded_matrix(5, 5, 8);
        let inv = reference::gauss_jordan_inverse(&a).unwrap();
        for s in 0..5 {
            for t in 0..5 {
                assert!((inverse_entry(&a, s, t).unwrap() - inv[(s, t)]).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn log_det_matches_singular_values() {
        let a = reference::seeded_matrix(6, 6, 21);
        let (_, ln) = log_abs_det(&a).unwrap();
        let sum: f64 = svd_values(&a).unwrap().values.iter().map(|s| s.ln()).sum();
        assert!((ln - sum).abs() < 1e-9);
        let b = reference::seeded_matrix(4, 4, 2);
        assert!((determinant(&b).unwrap() - reference::det_by_permutations(&b)).norm() < 1e-12);
    }

    #[test]
    fn qr_unitary_is_unitary() {
        let q = qr_unitary(&reference::seeded_matrix(5, 5, 4)).unwrap();
        let p = multiply(&q.adjoint(), &q).unwrap();
        assert!(p.max_abs_diff(&ComplexMatrix::identity(5)) < 1e-12);
        let w = orthonormal_columns(&reference::seeded_matrix(8, 3, 4)).unwrap();
        assert!(multiply(&w.adjoint(), &w)
            .unwrap()
            .max_abs_diff(&ComplexMatrix::identity(3))
            < 1e-12);
    }

    #[test]
    fn positive_definite_detection() {
        assert!(is_positive_definite(&ComplexMatrix::identity(3)));
        assert!(!is_positive_definite(&ComplexMatrix::diag_real(&[1.0, -1e-3])));
    }

    #[test]
    fn lanczos_extremes_match_dense() {
        let a = reference::seeded_matrix(600, 600, 5);
        let h = multiply(&a.adjoint(), &a).unwrap();
        let h = (&h + &h.adjoint()).scale_real(0.5);
        let h = shifted(&h.scale_real(0.5), 1.0, 0.05);
        let (hi, lo) = pd_extremes(&h).unwrap().unwrap();
        let s = svd_values(&h).unwrap();
        assert!((hi - s.max()).abs() < 1e-9 * s.max(), "{hi} vs {}", s.max());
        assert!((lo - s.min()).abs() < 1e-9, "{lo} vs {}", s.min());
        assert!(hi <= s.max() * (1.0 + 1e-12) && lo >= s.min() * (1.0 - 1e-12));
        assert!(certify_lambda_max_below(&h, s.max() + 1e-9));
        assert!(!certify_lambda_max_below(&h, s.max() - 1e-6));
        assert!(certify_lambda_min_above(&h, s.min() - 1e-9));
        assert!(!certify_lambda_min_above(&h, s.min() + 1e-6));
    }

    #[test]
    fn singular_extremes_through_gram() {
        let a = reference::seeded_matrix(520, 520, 6);
        let a = shifted(&a.scale_real(0.3), 1.0, 1.0);
        let (hi, lo) = singular_extremes(&a).unwrap();
        let s = svd_values(&a).unwrap();
        assert!((hi - s.max()).abs() < 1e-9 && (lo - s.min()).abs() < 1e-9);
        assert!(certify_norm_below(&a, s.max() + 1e-9).unwrap());
        assert!(certify_smallest_singular_above(&a, s.min() - 1e-9).unwrap());
    }
}
