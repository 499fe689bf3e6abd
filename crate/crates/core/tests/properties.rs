use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use wellcond::approx::{logdet_series, logdet_series_terms};
use wellcond::channel::{natural_representation, KrausSet};
use wellcond::compiler::{acceptance_with_proof, mixed_state_acceptance, random_verifier, verifier_operator};
use wellcond::linalg::{hermitian_eigs, inverse_entry, log_abs_det, solve, svd_values};
use wellcond::matrix::{kron, multiply, product};
use wellcond::problem::{
    gen_hermitian_with_spectrum, gen_instance_with, gen_unitary, oracle_decide, Answer, ConditionParams,
};
use wellcond::reduction::{logdet_terms, Rule};
use wellcond::{ComplexMatrix, C64};

fn rule_strategy() -> impl Strategy<Value = Rule> {
    (0..Rule::ALL.len()).prop_map(|i| Rule::ALL[i])
}

fn answer_strategy() -> impl Strategy<Value = Answer> {
    prop_oneof![Just(Answer::One), Just(Answer::Zero)]
}

/// Source parameters that every rule accepts: the positive-definite series
/// rules need small `n` and `κ ≤ 2`, the determinant rules `ε < n ln κ`.
fn source_params(rule: Rule, n: usize, m: usize, t: f64, e: f64) -> ConditionParams {
    match rule {
        Rule::PosDetToSumItMatProd | Rule::PosMatInvToSumItMatProd => {
            let n = 1 + n % 3;
            let kappa = 1.2 + 0.8 * t;
            let mut eps = 0.2 + 0.8 * e;
            if rule == Rule::PosDetToSumItMatProd {
                eps = eps.min(0.9 * n as f64 * kappa.ln());
            }
            ConditionParams::new(n, 1, kappa, eps).unwrap()
        }
        Rule::DetToPosDet => {
            let kappa = 1.5 * (100.0f64 / 1.5).powf(t);
            let eps = (0.01 + 0.49 * e).min(0.9 * n as f64 * kappa.ln());
            ConditionParams::new(n, 1, kappa, eps).unwrap()
        }
        _ => {
            let kappa = 100.0f64.powf(t);
            ConditionParams::new(n, m, kappa, (0.01 + 0.49 * e).min(kappa)).unwrap()
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rules_preserve_the_answer(
        rule in rule_strategy(),
        answer in answer_strategy(),
        n in 1usize..=5,
        m in 1usize..=6,
        t in 0.0f64..=1.0,
        e in 0.0f64..=1.0,
        seed in any::<u64>(),
    ) {
        let params = source_params(rule, n, m, t, e);
        let src = gen_instance_with(rule.input_kind(), params, seed, answer).unwrap();
        prop_assert_eq!(oracle_decide(&src).value, answer);
        let (out, _) = rule.apply(&src).unwrap();
        prop_assert_eq!(oracle_decide(&out).value, answer, "{}", rule.name());
    }

    #[test]
    fn generated_instances_keep_their_promise(
        kind_index in 0usize..wellcond::problem::ProblemKind::ALL.len(),
        answer in answer_strategy(),
        n in 1usize..=6,
        seed in any::<u64>(),
    ) {
        let kind = wellcond::problem::ProblemKind::ALL[kind_index];
        let params = ConditionParams::new(n, 3, 6.0, 0.2).unwrap();
        let inst = gen_instance_with(kind, params, seed, answer).unwrap();
        prop_assert_ne!(oracle_decide(&inst).value, Answer::PromiseViolated);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn inverse_entry_survives_a_change_of_basis(n in 1usize..=8, s in 0usize..8, t in 0usize..8, seed in any::<u64>()) {
        let (s, t) = (s % n, t % n);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sigma: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..=1.0)).collect();
        let a = wellcond::problem::gen_matrix_with_spectrum(&sigma, &mut rng);
        let (u, v) = (gen_unitary(n, &mut rng), gen_unitary(n, &mut rng));
        // A' = U A V, so A⁻¹[s,t] = (V†e_s)† A'⁻¹ (U e_t).
        let conjugated = product([&u, &a, &v]).unwrap();
        let rhs: Vec<C64> = (0..n).map(|i| u[(i, t)]).collect();
        let x = solve(&conjugated, &rhs).unwrap();
        let via: C64 = (0..n).map(|i| v[(s, i)] * x[i]).sum();
        let direct = inverse_entry(&a, s, t).unwrap();
        prop_assert!((via - direct).norm() <= 1e-8, "{via} vs {direct}");
    }

    #[test]
    fn log_abs_det_is_the_sum_of_log_singular_values(n in 1usize..=8, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sigma: Vec<f64> = (0..n).map(|_| rng.random_range(0.01..=1.0)).collect();
        let a = wellcond::problem::gen_matrix_with_spectrum(&sigma, &mut rng);
        let (_, log_abs) = log_abs_det(&a).unwrap();
        let sum: f64 = svd_values(&a).unwrap().values.iter().map(|s| s.ln()).sum();
        prop_assert!((log_abs - sum).abs() <= 1e-7);
    }

    #[test]
    fn doubling_series_terms_never_increases_the_error(n in 1usize..=6, kappa in 1.0f64..=20.0, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let lambda: Vec<f64> = (0..n).map(|_| rng.random_range(1.0 / kappa..=1.0)).collect();
        let h = gen_hermitian_with_spectrum(&lambda, &mut rng);
        let exact: f64 = lambda.iter().map(|l| l.ln()).sum();
        let mut previous = f64::INFINITY;
        for terms in [1usize, 2, 4, 8, 16, 32, 64] {
            let err = logdet_series_terms(&h, terms).unwrap() - exact;
            prop_assert!(err >= -1e-9, "remainder is a sum of nonnegative traces");
            prop_assert!(err <= previous + 1e-12, "{terms} terms: {err} after {previous}");
            previous = err;
        }
    }

    #[test]
    fn logdet_series_uses_the_closed_form_term_count(n in 1usize..=6, kappa in 1.0f64..=50.0, eps in 1e-3f64..=1.0, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let lambda: Vec<f64> = (0..n).map(|_| rng.random_range(1.0 / kappa..=1.0)).collect();
        let h = gen_hermitian_with_spectrum(&lambda, &mut rng);
        let r = logdet_series(&h, kappa, eps).unwrap();
        prop_assert_eq!(r.terms_used, logdet_terms(n, kappa, eps));
    }

    #[test]
    fn heisenberg_picture_matches_forward_simulation(h in 2usize..=3, merlin in 1usize..=2, gates in 1usize..=6, seed in any::<u64>()) {
        let merlin = merlin.min(h - 1);
        let c = random_verifier(h, merlin, gates, seed).unwrap();
        let m = verifier_operator(&c).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let p = 1 << merlin;
        for _ in 0..20 {
            let raw: Vec<C64> = (0..p).map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
            let norm = raw.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            let psi: Vec<C64> = raw.iter().map(|z| z / norm).collect();
            let mpsi = m.matvec(&psi).unwrap();
            let expectation: C64 = psi.iter().zip(&mpsi).map(|(a, b)| a.conj() * b).sum();
            let forward = acceptance_with_proof(&c, &psi).unwrap();
            prop_assert!((expectation.re - forward).abs() <= 1e-8);
        }
        let eigs = hermitian_eigs(&m).unwrap();
        let mixed = mixed_state_acceptance(&c).unwrap();
        let top = eigs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!((mixed - m.trace().re / p as f64).abs() <= 1e-12);
        prop_assert!(mixed >= -1e-12 && mixed <= top + 1e-12);
    }

    #[test]
    fn channel_composition_multiplies_representations(d in 1usize..=4, r1 in 1usize..=3, r2 in 1usize..=3, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k1 = KrausSet::random(d, r1, &mut rng).unwrap();
        let k2 = KrausSet::random(d, r2, &mut rng).unwrap();
        let lhs = multiply(&natural_representation(&k2).unwrap(), &natural_representation(&k1).unwrap()).unwrap();
        let rhs = natural_representation(&k1.then(&k2)).unwrap();
        prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-9);
    }

    #[test]
    fn products_of_unitaries_have_unit_singular_values(n in 1usize..=8, k in 1usize..=5, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let us: Vec<ComplexMatrix> = (0..k).map(|_| gen_unitary(n, &mut rng)).collect();
        let p = product(&us).unwrap();
        for s in svd_values(&p).unwrap().values {
            prop_assert!((s - 1.0).abs() <= 1e-9);
        }
    }

    #[test]
    fn incremental_prefix_products_match_recomputation(n in 1usize..=5, m in 1usize..=10, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mats: Vec<ComplexMatrix> = (0..m)
            .map(|_| ComplexMatrix::from_fn(n, n, |_, _| C64::new(rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5))))
            .collect();
        let mut running = ComplexMatrix::identity(n);
        for j in 0..m {
            running = multiply(&running, &mats[j]).unwrap();
            let scratch = product(&mats[..=j]).unwrap();
            prop_assert!(running.max_abs_diff(&scratch) <= 1e-9);
        }
    }

    #[test]
    fn kron_is_associative(a in 1usize..=3, b in 1usize..=3, c in 1usize..=3, seed in any::<u64>()) {
        // Small integer entries keep every product exact.
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut int_matrix = |r, c| {
            ComplexMatrix::from_fn(r, c, |_, _| C64::new(rng.random_range(-8..=8) as f64, rng.random_range(-8..=8) as f64))
        };
        let (x, y, z) = (int_matrix(a, b), int_matrix(b, c), int_matrix(c, a));
        prop_assert_eq!(kron(&kron(&x, &y), &z), kron(&x, &kron(&y, &z)));
    }
}
