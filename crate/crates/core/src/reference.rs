//! Brute-force reference algorithms, independent of the LAPACK-backed paths.
//! Tests and the acceptance suite compare against these; they are slow and
//! meant for small inputs.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::matrix::{ComplexMatrix, C64, ONE, ZERO};

/// Triple-loop product.
pub fn naive_multiply(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    assert_eq!(a.cols(), b.rows());
    ComplexMatrix::from_fn(a.rows(), b.cols(), |r, c| {
        let mut acc = ZERO;
        for k in 0..a.cols() {
            acc += a[(r, k)] * b[(k, c)];
        }
        acc
    })
}

/// Kronecker product from the index formula `(a⊗b)[i,j] = a[i/p, j/q]·b[i%p, j%q]`.
pub fn index_kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (p, q) = (b.rows(), b.cols());
    ComplexMatrix::from_fn(a.rows() * p, a.cols() * q, |i, j| {
        a[(i / p, j / q)] * b[(i % p, j % q)]
    })
}

/// Matrix with i.i.d. standard complex Gaussian entries scaled by `1/√rows`.
pub fn seeded_matrix(rows: usize, cols: usize, seed: u64) -> ComplexMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x0bad_5eed);
    let scale = 1.0 / (rows.max(1) as f64).sqrt();
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        C64::new(re, im) * scale
    })
}

/// Eigenvalues of a Hermitian matrix by the cyclic complex Jacobi method,
/// descending.
pub fn jacobi_eigenvalues(h: &ComplexMatrix) -> Vec<f64> {
    let n = h.rows();
    assert!(h.is_square());
    let mut a = h.clone();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)].norm_sqr())
            .sum();
        let scale: f64 = (0..n).map(|i| a[(i, i)].norm_sqr()).sum::<f64>().max(1e-300);
        if off <= 1e-30 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let g = apq.norm();
                if g < 1e-300 {
                    continue;
                }
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                // Unitary rotation J zeroing a[p,q] in J† A J.
                let phase = apq / g;
                let theta = 0.5 * (2.0 * g).atan2(aqq - app);
                let (c, s) = (theta.cos(), theta.sin());
                let jpp = C64::new(c, 0.0);
                let jpq = phase * s;
                let jqp = -phase.conj() * s;
                let jqq = C64::new(c, 0.0);
                // A ← A J
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * jpp + akq * jqp;
                    a[(k, q)] = akp * jpq + akq * jqq;
                }
                // A ← J† A
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = jpp.conj() * apk + jqp.conj() * aqk;
                    a[(q, k)] = jpq.conj() * apk + jqq.conj() * aqk;
                }
            }
        }
    }
    let mut vals: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    vals.sort_by(|x, y| y.total_cmp(x));
    vals
}

/// Inverse by Gauss-Jordan elimination with partial pivoting; `None` when a
/// pivot vanishes.
pub fn gauss_jordan_inverse(a: &ComplexMatrix) -> Option<ComplexMatrix> {
    let n = a.rows();
    assert!(a.is_square());
    let mut m = a.clone();
    let mut inv = ComplexMatrix::identity(n);
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| m[(i, col)].norm().total_cmp(&m[(j, col)].norm()))?;
        if m[(pivot, col)].norm() < 1e-300 {
            return None;
        }
        for k in 0..n {
            let t = m[(col, k)];
            m[(col, k)] = m[(pivot, k)];
            m[(pivot, k)] = t;
            let t = inv[(col, k)];
            inv[(col, k)] = inv[(pivot, k)];
            inv[(pivot, k)] = t;
        }
        let p = ONE / m[(col, col)];
        for k in 0..n {
            m[(col, k)] *= p;
            inv[(col, k)] *= p;
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let f = m[(r, col)];
            if f == ZERO {
                continue;
            }
            for k in 0..n {
                let mk = m[(col, k)];
                let ik = inv[(col, k)];
                m[(r, k)] -= f * mk;
                inv[(r, k)] -= f * ik;
            }
        }
    }
    Some(inv)
}

/// Determinant by the Leibniz expansion over all permutations; n ≤ 8.
pub fn det_by_permutations(a: &ComplexMatrix) -> C64 {
    let n = a.rows();
    assert!(a.is_square() && n <= 8);
    let mut perm: Vec<usize> = (0..n).collect();
    let mut total = ZERO;
    permute(&mut perm, 0, a, &mut total);
    total
}

fn permute(perm: &mut Vec<usize>, k: usize, a: &ComplexMatrix, total: &mut C64) {
    let n = perm.len();
    if k == n {
        let mut sign = 1.0;
        let mut seen = vec![false; n];
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut len = 0;
            let mut i = start;
            while !seen[i] {
                seen[i] = true;
                i = perm[i];
                len += 1;
            }
            if len % 2 == 0 {
                sign = -sign;
            }
        }
        let mut p = C64::new(sign, 0.0);
        for (r, &c) in perm.iter().enumerate() {
            p *= a[(r, c)];
        }
        *total += p;
        return;
    }
    for i in k..n {
        perm.swap(k, i);
        permute(perm, k + 1, a, total);
        perm.swap(k, i);
    }
}
