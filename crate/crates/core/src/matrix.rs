//! Dense complex matrices and the structural operations used by every
//! construction: products, Kronecker products, direct sums.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use ndarray::{s, Array2};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Dense complex matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    data: Array2<C64>,
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows(), self.cols())?;
        for r in 0..self.rows() {
            write!(f, "  ")?;
            for c in 0..self.cols() {
                let z = self[(r, c)];
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            data: Array2::zeros((rows, cols)),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            data: Array2::eye(n),
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        Self {
            data: Array2::from_shape_fn((rows, cols), |(r, c)| f(r, c)),
        }
    }

    /// Builds a matrix from row-major entries, rejecting wrong lengths and
    /// non-finite values.
    pub fn from_row_major(rows: usize, cols: usize, entries: Vec<C64>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        let data = Array2::from_shape_vec((rows, cols), entries)
            .map_err(|e| Error::DimensionMismatch(e.to_string()))?;
        Ok(Self { data })
    }

    /// Real matrix from nested rows. Panics on ragged input; meant for literals.
    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let n = rows.len();
        let m = rows.first().map_or(0, |r| r.len());
        assert!(rows.iter().all(|r| r.len() == m), "ragged rows");
        Self::from_fn(n, m, |r, c| C64::new(rows[r][c], 0.0))
    }

    pub fn from_array(data: Array2<C64>) -> Self {
        Self {
            data: data.as_standard_layout().into_owned(),
        }
    }

    pub fn diag(values: &[C64]) -> Self {
        let n = values.len();
        Self::from_fn(n, n, |r, c| if r == c { values[r] } else { ZERO })
    }

    pub fn diag_real(values: &[f64]) -> Self {
        let n = values.len();
        Self::from_fn(n, n, |r, c| if r == c { C64::new(values[r], 0.0) } else { ZERO })
    }

    pub fn scalar(z: C64) -> Self {
        Self::diag(&[z])
    }

    /// The matrix unit F with a single one at (r, c), 0-based.
    pub fn unit(n: usize, r: usize, c: usize) -> Self {
        let mut m = Self::zeros(n, n);
        m[(r, c)] = ONE;
        m
    }

    /// Outer product |r⟩⟨c| of standard basis vectors; alias of [`Self::unit`].
    pub fn ket_bra(n: usize, r: usize, c: usize) -> Self {
        Self::unit(n, r, c)
    }

    pub fn rows(&self) -> usize {
        self.data.nrows()
    }

    pub fn cols(&self) -> usize {
        self.data.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    /// Side length of a square matrix.
    pub fn dim(&self) -> Result<usize> {
        if self.is_square() {
            Ok(self.rows())
        } else {
            Err(Error::NotSquare {
                rows: self.rows(),
                cols: self.cols(),
            })
        }
    }

    pub fn as_array(&self) -> &Array2<C64> {
        &self.data
    }

    pub fn into_array(self) -> Array2<C64> {
        self.data
    }

    /// Row-major entries.
    pub fn entries(&self) -> impl Iterator<Item = &C64> {
        self.data.iter()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn adjoint(&self) -> Self {
        Self::from_array(self.data.t().mapv(|z| z.conj()))
    }

    pub fn transpose(&self) -> Self {
        Self::from_array(self.data.t().to_owned())
    }

    pub fn conj(&self) -> Self {
        Self {
            data: self.data.mapv(|z| z.conj()),
        }
    }

    pub fn scale(&self, k: C64) -> Self {
        Self {
            data: self.data.mapv(|z| z * k),
        }
    }

    pub fn scale_real(&self, k: f64) -> Self {
        Self {
            data: self.data.mapv(|z| z * k),
        }
    }

    pub fn trace(&self) -> C64 {
        self.data.diag().sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entrywise modulus of `self - other`; infinite on shape mismatch.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.data.dim() != other.data.dim() {
            return f64::INFINITY;
        }
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Largest entrywise modulus of `self - self†`.
    pub fn hermitian_residual(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows();
        let mut worst: f64 = 0.0;
        for r in 0..n {
            for c in r..n {
                worst = worst.max((self[(r, c)] - self[(c, r)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_residual() <= tol
    }

    pub fn matvec(&self, v: &[C64]) -> Result<Vec<C64>> {
        if v.len() != self.cols() {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} against {} columns",
                v.len(),
                self.cols()
            )));
        }
        Ok((0..self.rows())
            .map(|r| {
                self.data
                    .row(r)
                    .iter()
                    .zip(v)
                    .map(|(a, x)| a * x)
                    .sum()
            })
            .collect())
    }

    /// Copy of the `rows`x`cols` submatrix starting at `(r0, c0)`.
    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Self {
        Self::from_array(self.data.slice(s![r0..r0 + rows, c0..c0 + cols]).to_owned())
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, block: &Self) {
        self.data
            .slice_mut(s![r0..r0 + block.rows(), c0..c0 + block.cols()])
            .assign(&block.data);
    }

    /// `self^k` by repeated squaring.
    pub fn pow(&self, k: usize) -> Result<Self> {
        let n = self.dim()?;
        let mut result = Self::identity(n);
        let mut base = self.clone();
        let mut e = k;
        while e > 0 {
            if e & 1 == 1 {
                result = multiply(&result, &base)?;
            }
            e >>= 1;
            if e > 0 {
                base = multiply(&base, &base)?;
            }
        }
        Ok(result)
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, idx: (usize, usize)) -> &C64 {
        &self.data[idx]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, idx: (usize, usize)) -> &mut C64 {
        &mut self.data[idx]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.data.dim(), rhs.data.dim(), "shape mismatch in add");
        ComplexMatrix {
            data: &self.data + &rhs.data,
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.data.dim(), rhs.data.dim(), "shape mismatch in sub");
        ComplexMatrix {
            data: &self.data - &rhs.data,
        }
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        ComplexMatrix {
            data: self.data.mapv(|z| -z),
        }
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    /// Panics on dimension mismatch; use [`multiply`] for a checked product.
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        multiply(self, rhs).expect("dimension mismatch in product")
    }
}

pub fn multiply(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    if a.cols() != b.rows() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} times {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    Ok(ComplexMatrix {
        data: a.data.dot(&b.data),
    })
}

/// Product of a nonempty sequence, left to right.
pub fn product<'a>(mats: impl IntoIterator<Item = &'a ComplexMatrix>) -> Result<ComplexMatrix> {
    let mut it = mats.into_iter();
    let first = it
        .next()
        .ok_or_else(|| Error::DimensionMismatch("empty product".into()))?
        .clone();
    it.try_fold(first, |acc, m| multiply(&acc, m))
}

pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (ar, ac) = (a.rows(), a.cols());
    let (br, bc) = (b.rows(), b.cols());
    let mut out = ComplexMatrix::zeros(ar * br, ac * bc);
    for i in 0..ar {
        for j in 0..ac {
            let x = a[(i, j)];
            if x == ZERO {
                continue;
            }
            let mut dst = out.data.slice_mut(s![i * br..(i + 1) * br, j * bc..(j + 1) * bc]);
            dst.zip_mut_with(&b.data, |d, &y| *d = x * y);
        }
    }
    out
}

/// Block-diagonal assembly of square blocks.
pub fn direct_sum(blocks: &[ComplexMatrix]) -> Result<ComplexMatrix> {
    let mut total = 0;
    for b in blocks {
        total += b.dim()?;
    }
    let mut out = ComplexMatrix::zeros(total, total);
    let mut off = 0;
    for b in blocks {
        out.set_block(off, off, b);
        off += b.rows();
    }
    Ok(out)
}

/// Position of the matrix unit |row⟩⟨col| under row-major vectorization.
pub fn vec_index(row_state: usize, col_state: usize, d: usize) -> Result<usize> {
    for &i in &[row_state, col_state] {
        if i >= d {
            return Err(Error::IndexOutOfRange { index: i, dim: d });
        }
    }
    Ok(row_state * d + col_state)
}

/// Row-major vectorization.
pub fn vectorize(m: &ComplexMatrix) -> Vec<C64> {
    m.entries().copied().collect()
}

pub fn unvectorize(v: &[C64], d: usize) -> Result<ComplexMatrix> {
    ComplexMatrix::from_row_major(d, d, v.to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pauli_x() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]])
    }

    #[test]
    fn identity_products() {
        let i2 = ComplexMatrix::identity(2);
        assert_eq!(multiply(&i2, &i2).unwrap(), i2);
        assert_eq!(multiply(&pauli_x(), &pauli_x()).unwrap(), i2);
    }

    #[test]
    fn multiply_rejects_mismatch() {
        let a = ComplexMatrix::zeros(2, 3);
        assert!(matches!(
            multiply(&a, &a),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn kron_places_blocks() {
        assert_eq!(
            kron(&ComplexMatrix::identity(2), &ComplexMatrix::identity(2)),
            ComplexMatrix::identity(4)
        );
        let a = ComplexMatrix::from_real_rows(&[&[1.0, 2.0], &[3.0, 4.0]]);
        let k = kron(&ComplexMatrix::unit(2, 0, 1), &a);
        assert_eq!(k.block(0, 2, 2, 2), a);
        assert_eq!(k.block(0, 0, 2, 2), ComplexMatrix::zeros(2, 2));
        assert_eq!(k.block(2, 0, 2, 4), ComplexMatrix::zeros(2, 4));
    }

    #[test]
    fn direct_sum_examples() {
        let i1 = ComplexMatrix::identity(1);
        assert_eq!(
            direct_sum(&[i1.clone(), ComplexMatrix::identity(2)]).unwrap(),
            ComplexMatrix::identity(3)
        );
        assert_eq!(
            direct_sum(&[ComplexMatrix::zeros(1, 1), i1.scale_real(2.0)]).unwrap(),
            ComplexMatrix::diag_real(&[0.0, 2.0])
        );
        assert!(direct_sum(&[ComplexMatrix::zeros(1, 2)]).is_err());
    }

    #[test]
    fn vec_index_row_major() {
        assert_eq!(vec_index(0, 0, 2).unwrap(), 0);
        assert_eq!(vec_index(1, 1, 2).unwrap(), 3);
        assert_eq!(vec_index(1, 0, 2).unwrap(), 2);
        assert!(vec_index(2, 0, 2).is_err());
    }

    #[test]
    fn from_row_major_validates() {
        assert!(ComplexMatrix::from_row_major(2, 2, vec![ONE; 3]).is_err());
        assert_eq!(
            ComplexMatrix::from_row_major(1, 1, vec![C64::new(f64::NAN, 0.0)]),
            Err(Error::NonFinite)
        );
    }

    #[test]
    fn pow_matches_repeated_product() {
        let a = ComplexMatrix::from_fn(3, 3, |r, c| C64::new((r + 2 * c) as f64 * 0.1, r as f64 * 0.05));
        let mut p = ComplexMatrix::identity(3);
        for _ in 0..5 {
            p = &p * &a;
        }
        assert!(a.pow(5).unwrap().max_abs_diff(&p) < 1e-12);
    }
}
