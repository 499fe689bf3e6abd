use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{log_abs_det, qr_unitary};
use crate::matrix::{multiply, ComplexMatrix, C64};

use super::oracle::{entry_value, Answer};
use super::{ConditionParams, ProblemInstance, ProblemKind, Threshold};

/// Haar-random unitary from the QR decomposition of a Gaussian matrix.
pub fn gen_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMatrix {
    let g = ComplexMatrix::from_fn(n, n, |_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    qr_unitary(&g).expect("QR of a finite square matrix")
}

/// `U·diag(σ)·V†` with independent Haar unitaries.
pub fn gen_matrix_with_spectrum<R: Rng + ?Sized>(sigma: &[f64], rng: &mut R) -> ComplexMatrix {
    let n = sigma.len();
    let u = gen_unitary(n, rng);
    let v = gen_unitary(n, rng);
    let d = ComplexMatrix::diag_real(sigma);
    multiply(&multiply(&u, &d).unwrap(), &v.adjoint()).unwrap()
}

/// `U·diag(λ)·U†`, symmetrized exactly.
pub fn gen_hermitian_with_spectrum<R: Rng + ?Sized>(lambda: &[f64], rng: &mut R) -> ComplexMatrix {
    let u = gen_unitary(lambda.len(), rng);
    let h = multiply(&multiply(&u, &ComplexMatrix::diag_real(lambda)).unwrap(), &u.adjoint()).unwrap();
    (&h + &h.adjoint()).scale_real(0.5)
}

/// Values in `[lo, hi]`, descending; for n ≥ 2 the first is `hi` and the last
/// is `lo`.
fn spectrum<R: Rng + ?Sized>(n: usize, lo: f64, hi: f64, rng: &mut R) -> Vec<f64> {
    if n == 1 {
        return vec![if lo == hi { hi } else { rng.random_range(lo..=hi) }];
    }
    let mut v: Vec<f64> = (0..n)
        .map(|i| match i {
            0 => hi,
            i if i == n - 1 => lo,
            _ => {
                if lo == hi {
                    hi
                } else {
                    rng.random_range(lo..=hi)
                }
            }
        })
        .collect();
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

pub fn gen_conditioned_matrix(n: usize, sigma_min: f64, sigma_max: f64, seed: u64) -> Result<ComplexMatrix> {
    if n == 0 || !(sigma_min > 0.0 && sigma_min <= sigma_max && sigma_max.is_finite()) {
        return Err(Error::InvalidParams(format!(
            "need 0 < sigma_min <= sigma_max, got [{sigma_min}, {sigma_max}] with n = {n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s = spectrum(n, sigma_min, sigma_max, &mut rng);
    Ok(gen_matrix_with_spectrum(&s, &mut rng))
}

/// Generates a promise-satisfying instance whose answer is drawn from the seed.
pub fn gen_instance(kind: ProblemKind, params: ConditionParams, seed: u64) -> Result<ProblemInstance> {
    let mut coin = ChaCha8Rng::seed_from_u64(seed ^ 0xa5a5_5a5a_0f0f_f0f0);
    let answer = if coin.random_bool(0.5) {
        Answer::One
    } else {
        Answer::Zero
    };
    gen_instance_with(kind, params, seed, answer)
}

/// Range of the product-family factors' singular values.
const FACTOR_SIGMA: (f64, f64) = (0.5, 1.0);

/// Generates an instance with the requested answer. `b` sits exactly on the
/// boundary of the answer's region: `b = q` for One and `b = q + ε` (shifted
/// by `ε·e^{iθ}` for verification problems) for Zero.
pub fn gen_instance_with(
    kind: ProblemKind,
    params: ConditionParams,
    seed: u64,
    answer: Answer,
) -> Result<ProblemInstance> {
    params.validate()?;
    if answer == Answer::PromiseViolated {
        return Err(Error::InvalidParams("cannot generate a promise-violating instance".into()));
    }
    let zero = answer == Answer::Zero;
    let mut p = params;
    if !kind.is_product_family() && !matches!(kind, ProblemKind::MatPow | ProblemKind::VMatPow) {
        p.m = 1;
    }
    let (n, kappa, eps) = (p.n, p.kappa, p.epsilon);
    check_feasible(kind, &p)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut inst = ProblemInstance {
        kind,
        params: p,
        matrices: vec![],
        s: 0,
        t: 0,
        pairs: vec![],
        b: Threshold::None,
    };
    if kind.has_selector() {
        inst.s = rng.random_range(0..n);
        inst.t = rng.random_range(0..n);
    }

    match kind {
        ProblemKind::Det | ProblemKind::DetPos => {
            let mut sig = spectrum(n, 1.0 / kappa, 1.0, &mut rng);
            if zero {
                push_log_sum_below(&mut sig, -eps, 1.0 / kappa);
            }
            let a = if kind == ProblemKind::Det {
                gen_matrix_with_spectrum(&sig, &mut rng)
            } else {
                gen_hermitian_with_spectrum(&sig, &mut rng)
            };
            let (_, q) = log_abs_det(&a)?;
            let b = if zero { q + eps } else { q };
            inst.matrices = vec![a];
            inst.b = Threshold::Real(b.min(0.0));
        }
        ProblemKind::Singular => {
            let mut mags = spectrum(n, eps, 1.0, &mut rng);
            if !zero {
                *mags.last_mut().unwrap() = 0.0;
            }
            for x in &mut mags {
                if rng.random_bool(0.5) {
                    *x = -*x;
                }
            }
            inst.matrices = vec![gen_hermitian_with_spectrum(&mags, &mut rng)];
        }
        _ => {
            inst.matrices = match kind {
                ProblemKind::MatInv | ProblemKind::VMatInv => {
                    let s = spectrum(n, 1.0 / kappa, 1.0, &mut rng);
                    vec![gen_matrix_with_spectrum(&s, &mut rng)]
                }
                ProblemKind::MatInvPos => {
                    let s = spectrum(n, 1.0 / kappa, 1.0, &mut rng);
                    vec![gen_hermitian_with_spectrum(&s, &mut rng)]
                }
                ProblemKind::MatPow | ProblemKind::VMatPow => {
                    let s = spectrum(n, FACTOR_SIGMA.0, FACTOR_SIGMA.1, &mut rng);
                    vec![gen_matrix_with_spectrum(&s, &mut rng)]
                }
                _ => (0..p.m)
                    .map(|_| {
                        let s = spectrum(n, FACTOR_SIGMA.0, FACTOR_SIGMA.1, &mut rng);
                        gen_matrix_with_spectrum(&s, &mut rng)
                    })
                    .collect(),
            };
            if kind == ProblemKind::SumItMatProd {
                let k = rng.random_range(1..=(n * n).min(6));
                let mut all: Vec<(usize, usize)> =
                    (0..n).flat_map(|a| (0..n).map(move |c| (a, c))).collect();
                for i in 0..k {
                    let j = rng.random_range(i..all.len());
                    all.swap(i, j);
                }
                all.truncate(k);
                all.sort_unstable();
                inst.pairs = all;
            }
            if kind == ProblemKind::ItMatProdNonneg {
                let q = entry_value(&inst)?;
                if q.norm() > 0.0 {
                    let phase = q.conj() / q.norm();
                    inst.matrices[0] = inst.matrices[0].scale(phase);
                }
            }
            let q = entry_value(&inst)?;
            inst.b = if kind.is_verification() {
                let b = if zero {
                    let theta = rng.random_range(0.0..2.0 * PI);
                    let shifted = q + C64::from_polar(eps, theta);
                    if shifted.norm() <= kappa {
                        shifted
                    } else if q.norm() > 0.0 {
                        q - q / q.norm() * eps
                    } else {
                        C64::from_polar(eps, theta)
                    }
                } else {
                    q
                };
                Threshold::Complex(b)
            } else {
                let mag = if kind == ProblemKind::ItMatProdNonneg {
                    q.re.max(0.0)
                } else {
                    q.norm()
                };
                Threshold::Real(if zero { mag + eps } else { mag })
            };
        }
    }
    Ok(inst)
}

fn check_feasible(kind: ProblemKind, p: &ConditionParams) -> Result<()> {
    let (limit, what) = match kind {
        ProblemKind::Det | ProblemKind::DetPos => {
            (p.n as f64 * p.kappa.ln(), "n ln kappa (range of ln|det|)")
        }
        ProblemKind::Singular => (1.0, "1"),
        k if k.is_verification() => (2.0 * p.kappa, "2 kappa"),
        _ => (p.kappa, "kappa (range of the quantity)"),
    };
    if p.epsilon > limit {
        return Err(Error::Infeasible(format!(
            "epsilon = {} exceeds {what} = {limit}",
            p.epsilon
        )));
    }
    Ok(())
}

/// Lowers values toward `floor` in log space until `Σ ln σ ≤ target`.
fn push_log_sum_below(sig: &mut [f64], target: f64, floor: f64) {
    let sum: f64 = sig.iter().map(|s| s.ln()).sum();
    let deficit = sum - target;
    if deficit <= 0.0 {
        return;
    }
    let avail: Vec<f64> = sig.iter().map(|s| s.ln() - floor.ln()).collect();
    let total: f64 = avail.iter().sum();
    let frac = (deficit / total).min(1.0);
    for (s, a) in sig.iter_mut().zip(avail) {
        *s = (s.ln() - a * frac).exp().max(floor);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{hermitian_eigs, svd_values};
    use crate::problem::{check_promise, oracle_decide};

    #[test]
    fn scalar_unit_modulus() {
        let a = gen_conditioned_matrix(1, 1.0, 1.0, 3).unwrap();
        assert!((a[(0, 0)].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn conditioned_matrix_respects_range() {
        for seed in 0..10 {
            let a = gen_conditioned_matrix(5, 0.1, 0.8, seed).unwrap();
            let s = svd_values(&a).unwrap();
            assert!(s.max() <= 0.8 + 1e-9 && s.min() >= 0.1 - 1e-9);
            assert!((s.max() - 0.8).abs() < 1e-9 && (s.min() - 0.1).abs() < 1e-9);
        }
        assert_eq!(
            gen_conditioned_matrix(4, 0.5, 1.0, 9).unwrap(),
            gen_conditioned_matrix(4, 0.5, 1.0, 9).unwrap()
        );
    }

    #[test]
    fn matinv_example_passes() {
        let inst = gen_instance(ProblemKind::MatInv, ConditionParams::new(4, 1, 10.0, 0.01).unwrap(), 7).unwrap();
        assert!(check_promise(&inst).overall);
    }

    #[test]
    fn itmatprod_partial_products_bounded() {
        let inst = gen_instance(ProblemKind::ItMatProd, ConditionParams::new(3, 5, 1.0, 0.01).unwrap(), 1).unwrap();
        let r = check_promise(&inst);
        assert!(r.overall, "{r:?}");
    }

    #[test]
    fn posdet_example_positive_definite() {
        let inst = gen_instance(ProblemKind::DetPos, ConditionParams::new(2, 1, 4.0, 0.1).unwrap(), 2).unwrap();
        let e = hermitian_eigs(inst.matrix()).unwrap();
        assert!(e[1] >= 0.25 - 1e-12);
    }

    #[test]
    fn every_kind_generates_both_answers() {
        for kind in ProblemKind::ALL {
            for answer in [Answer::One, Answer::Zero] {
                for seed in 0..4 {
                    let params = ConditionParams::new(3, 3, 4.0, 0.2).unwrap();
                    let inst = gen_instance_with(kind, params, seed, answer).unwrap();
                    let d = oracle_decide(&inst);
                    assert_eq!(d.value, answer, "{kind} seed {seed}: {:?}", check_promise(&inst));
                }
            }
        }
    }

    #[test]
    fn infeasible_gap_rejected() {
        let p = ConditionParams::new(2, 1, 2.0, 3.0).unwrap();
        assert!(matches!(gen_instance(ProblemKind::MatInv, p, 0), Err(Error::Infeasible(_))));
        let p = ConditionParams::new(2, 1, 2.0, 1.5).unwrap();
        assert!(matches!(gen_instance(ProblemKind::DetPos, p, 0), Err(Error::Infeasible(_))));
    }
}
