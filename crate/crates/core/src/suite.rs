//! Seeded end-to-end checks of the library's guarantees, grouped into nine
//! numbered criteria. Every tolerance used by a check is a constant below.

use std::fmt;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::approx::{logdet_series, neumann_inverse_entry, Certificate};
use crate::channel::{natural_representation, KrausSet};
use crate::compiler::{
    acceptance_with_proof, circuit_to_itmatprod, clock_hamiltonian, cnot, eliminate_measurements, hadamard,
    hit_frequency, markov_to_matpow, pauli_x, random_bounded_error_circuit, random_chain, random_unitary_verifier,
    simulate_acceptance, swap, ChannelGate, GeneralCircuit, MonteCarloEstimate,
};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigs, inverse_entry, singular_extremes};
use crate::matrix::{vec_index, vectorize, ComplexMatrix, C64};
use crate::par;
use crate::problem::promise::{max_partial_product_norm, max_power_norm};
use crate::problem::{
    decide_quantity, decision_quantity, entry_value, gen_hermitian_with_spectrum, gen_instance_with, oracle_decide, Answer, ConditionParams,
    ProblemKind, Tolerances,
};
use crate::reduction::{chain, identity_check, Rule};

/// Relative residual allowed in a reduction identity.
pub const IDENTITY_TOL: f64 = 1e-8;
/// Slack on declared singular-value and eigenvalue bounds.
pub const BOUND_SLACK: f64 = 1e-7;
/// Floating-point allowance on top of an a-priori series certificate.
pub const SERIES_ROUNDING: f64 = 1e-10;
/// Agreement between an encoded entry and the simulated acceptance probability.
pub const ENCODING_TOL: f64 = 1e-9;
/// Wall-clock budget for compiling and deciding the circuit corpus.
pub const PIPELINE_BUDGET: Duration = Duration::from_secs(120);
/// Wall-clock budget for the rule identity suite.
pub const RULE_SUITE_BUDGET: Duration = Duration::from_secs(60);
/// Ground energy allowed for a verifier that accepts some proof with certainty.
pub const GROUND_ENERGY_TOL: f64 = 1e-9;
/// Lower bound on the ground energy of the coin verifiers, frozen from a
/// dense eigensolve (0.034074).
pub const COIN_GAP_TAU: f64 = 0.034;
/// Most negative eigenvalue tolerated in a clock Hamiltonian.
pub const PSD_FLOOR: f64 = -1e-9;
/// Largest smallest singular value counted as singular.
pub const SINGULAR_ZERO_TOL: f64 = 1e-9;
/// Entrywise residual of the natural representation on basis matrices.
pub const CHANNEL_TOL: f64 = 1e-10;
/// Allowed Monte Carlo deviation in standard deviations.
pub const SIGMA_MULTIPLE: f64 = 3.0;

/// Instance counts for each criterion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuiteConfig {
    pub rule_instances: usize,
    pub cycle_instances: usize,
    pub series_inputs: usize,
    pub circuits: usize,
    pub deep_circuits: usize,
    pub verifier_seeds: usize,
    pub singular_pairs: usize,
    pub channels: usize,
    pub chains: usize,
    pub walk_trials: u64,
}

impl SuiteConfig {
    pub fn full() -> Self {
        Self {
            rule_instances: 100,
            cycle_instances: 50,
            series_inputs: 1000,
            circuits: 100,
            deep_circuits: 4,
            verifier_seeds: 50,
            singular_pairs: 100,
            channels: 100,
            chains: 50,
            walk_trials: 100_000,
        }
    }

    pub fn quick() -> Self {
        Self {
            rule_instances: 6,
            cycle_instances: 2,
            series_inputs: 60,
            circuits: 8,
            deep_circuits: 1,
            verifier_seeds: 8,
            singular_pairs: 12,
            channels: 12,
            chains: 5,
            walk_trials: 20_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriterionReport {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub checked: usize,
    pub failed: usize,
    /// The first few failures.
    pub failures: Vec<String>,
    pub summary: String,
    pub elapsed: Duration,
}

impl fmt::Display for CriterionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] {} {}: {}/{} ok, {} ({:.1} s)",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.checked - self.failed,
            self.checked,
            self.summary,
            self.elapsed.as_secs_f64()
        )
    }
}

pub const CRITERIA: [(u8, &str); 9] = [
    (1, "rule identities"),
    (2, "rule conditioning"),
    (3, "reduction cycles"),
    (4, "series certificates"),
    (5, "measurement elimination"),
    (6, "clock hamiltonian"),
    (7, "singular gadget"),
    (8, "channel algebra"),
    (9, "markov chains"),
];

const KEPT_FAILURES: usize = 5;

struct Tally {
    checked: usize,
    failures: Vec<String>,
    failed: usize,
}

impl Tally {
    fn new() -> Self {
        Self {
            checked: 0,
            failures: vec![],
            failed: 0,
        }
    }

    fn record(&mut self, outcome: std::result::Result<(), String>) {
        self.checked += 1;
        if let Err(e) = outcome {
            self.failed += 1;
            if self.failures.len() < KEPT_FAILURES {
                self.failures.push(e);
            }
        }
    }
}

fn max_of(xs: impl IntoIterator<Item = f64>) -> f64 {
    xs.into_iter().fold(0.0, f64::max)
}

pub fn run(id: u8, cfg: &SuiteConfig) -> Result<CriterionReport> {
    let name = CRITERIA
        .iter()
        .find(|(i, _)| *i == id)
        .map(|(_, n)| *n)
        .ok_or_else(|| Error::UnknownName(format!("criterion {id}")))?;
    let start = Instant::now();
    let (tally, summary, extra_ok) = match id {
        1 => rule_identities(cfg),
        2 => rule_conditioning(cfg),
        3 => cycles(cfg),
        4 => series(cfg),
        5 => measurement_elimination(cfg),
        6 => clock(cfg),
        7 => singular_gadget(cfg),
        8 => channel_algebra(cfg),
        _ => markov(cfg),
    };
    Ok(CriterionReport {
        id,
        name,
        passed: tally.failed == 0 && extra_ok,
        checked: tally.checked,
        failed: tally.failed,
        failures: tally.failures,
        summary,
        elapsed: start.elapsed(),
    })
}

pub fn run_all(cfg: &SuiteConfig) -> Vec<CriterionReport> {
    CRITERIA
        .iter()
        .map(|&(id, _)| run(id, cfg).expect("known criterion"))
        .collect()
}

fn seeded(domain: u64, i: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(domain * 1_000_003 + i as u64)
}

fn alternate(i: usize) -> Answer {
    if i % 2 == 0 {
        Answer::One
    } else {
        Answer::Zero
    }
}

fn log_uniform<R: Rng>(lo: f64, hi: f64, rng: &mut R) -> f64 {
    if hi <= lo {
        return lo;
    }
    rng.random_range(lo.ln()..=hi.ln()).exp()
}

/// Parameters for a source instance of `rule`. The positive-definite
/// series rules use small `n` and `κ ∈ [1.2, 2]`, where their outputs stay
/// small and the shifted sum stays nonnegative.
fn rule_params<R: Rng>(rule: Rule, rng: &mut R) -> ConditionParams {
    let (n, m, kappa, eps) = match rule {
        Rule::PosDetToSumItMatProd | Rule::PosMatInvToSumItMatProd => {
            let n = rng.random_range(1..=3);
            let kappa = rng.random_range(1.2..=2.0);
            let mut eps: f64 = rng.random_range(0.2..=1.0);
            if rule == Rule::PosDetToSumItMatProd {
                eps = eps.min(0.9 * n as f64 * f64::ln(kappa));
            }
            (n, 1, kappa, eps)
        }
        Rule::DetToPosDet => {
            let n = rng.random_range(1..=8);
            let kappa = log_uniform(1.5, 100.0, rng);
            let eps = rng.random_range(0.01..=0.5f64).min(0.9 * n as f64 * kappa.ln());
            (n, 1, kappa, eps)
        }
        _ => {
            let n = rng.random_range(1..=8);
            let m = rng.random_range(1..=12);
            let kappa = log_uniform(1.0, 100.0, rng);
            (n, m, kappa, rng.random_range(0.01..=0.5f64).min(kappa))
        }
    };
    ConditionParams::new(n, m, kappa, eps).expect("valid sampled parameters")
}

struct RuleCase {
    rule: Rule,
    index: usize,
    outcome: Result<RuleOutcome>,
}

struct RuleOutcome {
    residual: f64,
    remainder: Option<(f64, f64)>,
    violations: Vec<String>,
}

fn rule_cases(cfg: &SuiteConfig) -> Vec<RuleCase> {
    let per = cfg.rule_instances;
    par::map_range(Rule::ALL.len() * per, |k| {
        let rule = Rule::ALL[k / per];
        let index = k % per;
        let outcome = (|| {
            let mut rng = seeded(1, k);
            let params = rule_params(rule, &mut rng);
            let src = gen_instance_with(rule.input_kind(), params, rng.random(), alternate(index))?;
            let (out, record) = rule.apply(&src)?;
            let id = identity_check(rule, &src, &out)?;
            let note = |name: &str| id.notes.iter().find(|(n, _)| n == name).map(|(_, v)| *v);
            let remainder = note("truncation remainder").zip(note("remainder bound"));
            Ok(RuleOutcome {
                residual: id.residual,
                remainder,
                violations: record
                    .violations(BOUND_SLACK)
                    .iter()
                    .map(|b| format!("{} = {} vs {}", b.quantity, b.measured, b.declared))
                    .collect(),
            })
        })();
        RuleCase { rule, index, outcome }
    })
}

fn rule_identities(cfg: &SuiteConfig) -> (Tally, String, bool) {
    let mut tally = Tally::new();
    let mut worst = 0.0f64;
    let start = Instant::now();
    let cases = rule_cases(cfg);
    let elapsed = start.elapsed();
    for case in cases {
        let label = format!("{} #{}", case.rule.name(), case.index);
        tally.record(match case.outcome {
            Err(e) => Err(format!("{label}: {e}")),
            Ok(o) => {
                worst = worst.max(o.residual);
                if o.residual > IDENTITY_TOL {
                    Err(format!("{label}: residual {:e}", o.residual))
                } else if let Some((r, b)) = o.remainder.filter(|(r, b)| !(*r >= -IDENTITY_TOL && *r <= b + IDENTITY_TOL)) {
                    Err(format!("{label}: series remainder {r} exceeds {b}"))
                } else {
                    Ok(())
                }
            }
        });
    }
    let in_budget = elapsed < RULE_SUITE_BUDGET;
    (
        tally,
        format!(
            "max residual {worst:.2e} (tol {IDENTITY_TOL:e}), {:.1} s (budget {} s)",
            elapsed.as_secs_f64(),
            RULE_SUITE_BUDGET.as_secs()
        ),
        in_budget,
    )
}

fn rule_conditioning(cfg: &SuiteConfig) -> (Tally, String, bool) {
    let mut tally = Tally::new();
    let mut bounds = 0;
    for case in rule_cases(cfg) {
        let label = format!("{} #{}", case.rule.name(), case.index);
        tally.record(match case.outcome {
            Err(e) => Err(format!("{label}: {e}")),
            Ok(o) if o.violations.is_empty() => {
                bounds += 1;
                Ok(())
            }
            Ok(o) => Err(format!("{label}: {}", o.violations.join("; "))),
        });
    }
    (tally, format!("{bounds} records within slack {BOUND_SLACK:e}"), true)
}

fn cycle_case(path: &[Rule], kind: ProblemKind, params: ConditionParams, seed: u64, answer: Answer) -> std::result::Result<(), String> {
    let src = gen_instance_with(kind, params, seed, answer).map_err(|e| e.to_string())?;
    let before = oracle_decide(&src).value;
    if before != answer {
        return Err(format!("source decided {before}, generated as {answer}"));
    }
    // The chain has already verified the promise of every instance it built.
    let (out, _) = chain(&src, path).map_err(|e| e.to_string())?;
    let w = decision_quantity(&out).map_err(|e| e.to_string())?;
    let after = decide_quantity(out.kind, &out.params, out.b, w, Tolerances::default().identity);
    if after != before {
        return Err(format!("{before} became {after} (dim {})", out.params.n));
    }
    Ok(())
}

/// MATINV⁺ source size `(n, κ, ε)` and DET⁺ source size for the cycles.
/// These are the smallest sizes whose series lengths stay at four terms,
/// which keeps the final instances at a few thousand dimensions.
pub const MATINV_CYCLE_SOURCE: (usize, f64, f64) = (1, 2.0, 1.2);
pub const DET_CYCLE_SOURCE: (usize, f64, f64) = (1, 2.0, 0.6);

fn cycles(cfg: &SuiteConfig) -> (Tally, String, bool) {
    let mut tally = Tally::new();
    let mut dims = [0usize; 2];
    for (c, (path, kind, (n, kappa, eps))) in [
        (&Rule::MATINV_CYCLE, ProblemKind::MatInvPos, MATINV_CYCLE_SOURCE),
        (&Rule::DET_CYCLE, ProblemKind::DetPos, DET_CYCLE_SOURCE),
    ]
    .into_iter()
    .enumerate()
    {
        let params = ConditionParams::new(n, 1, kappa, eps).expect("valid cycle parameters");
        let outcomes = par::map_range(2 * cfg.cycle_instances, |i| {
            cycle_case(path, kind, params, 3_000 + (c * 10_000 + i) as u64, alternate(i))
        });
        for (i, o) in outcomes.into_iter().enumerate() {
            tally.record(o.map_err(|e| format!("{kind} cycle #{i}: {e}")));
        }
        dims[c] = path
            .iter()
            .try_fold(gen_instance_with(kind, params, 0, Answer::One).expect("cycle source"), |inst, r| {
                r.apply(&inst).map(|(o, _)| o)
            })
            .map(|o| o.params.n)
            .unwrap_or(0);
    }
    (
        tally,
        format!("final dimensions {} (MATINV+) and {} (DET+)", dims[0], dims[1]),
        true,
    )
}

fn series(cfg: &SuiteConfig) -> (Tally, String, bool) {
    let outcomes = par::map_range(cfg.series_inputs, |i| -> std::result::Result<f64, String> {
        let mut rng = seeded(4, i);
        let n = rng.random_range(1..=12usize);
        let kappa = log_uniform(1.0, 100.0, &mut rng);
        let eps = log_uniform(1e-3, 1.0, &mut rng);
        let mut lambda: Vec<f64> = (0..n).map(|_| rng.random_range(1.0 / kappa..=1.0)).collect();
        lambda[0] = 1.0 / kappa;
        if n > 1 {
            lambda[1] = 1.0;
        }
        let h = gen_hermitian_with_spectrum(&lambda, &mut rng);
        let floor_ln = |x: f64| (1.0 + x.floor().max(1.0).ln()).floor() as usize;
        let label = format!("input {i} (n {n}, kappa {kappa:.3}, eps {eps:.2e})");
        if i % 2 == 0 {
            let r = logdet_series(&h, kappa, eps).map_err(|e| format!("{label}: {e}"))?;
            let terms = kappa.ceil() as usize * floor_ln(2.0 * n as f64 * kappa / eps);
            let exact: f64 = lambda.iter().map(|x| x.ln()).sum();
            let err = r.value - exact;
            let Certificate::Additive(cert) = r.certificate else {
                return Err(format!("{label}: multiplicative certificate"));
            };
            if r.terms_used != terms {
                Err(format!("{label}: {} log-det terms, expected {terms}", r.terms_used))
            } else if cert > eps / 2.0 + SERIES_ROUNDING || err < -SERIES_ROUNDING || err > cert + SERIES_ROUNDING {
                Err(format!("{label}: log-det error {err:e}, certificate {cert:e}"))
            } else {
                Ok(err / (eps / 2.0))
            }
        } else {
            let (s, t) = (rng.random_range(0..n), rng.random_range(0..n));
            let r = neumann_inverse_entry(&h, s, t, kappa, eps).map_err(|e| format!("{label}: {e}"))?;
            let terms = kappa.ceil() as usize * floor_ln(4.0 * kappa / eps);
            let exact = inverse_entry(&h, s, t).map_err(|e| format!("{label}: {e}"))?;
            let err = (r.value - exact).norm();
            let Certificate::Additive(cert) = r.certificate else {
                return Err(format!("{label}: multiplicative certificate"));
            };
            if r.terms_used != terms {
                Err(format!("{label}: {} Neumann terms, expected {terms}", r.terms_used))
            } else if cert > eps / 4.0 + SERIES_ROUNDING || err > cert + SERIES_ROUNDING {
                Err(format!("{label}: Neumann error {err:e}, certificate {cert:e}"))
            } else {
                Ok(err / (eps / 4.0))
            }
        }
    });
    let mut tally = Tally::new();
    let mut worst = 0.0f64;
    for o in outcomes {
        if let Ok(r) = &o {
            worst = worst.max(*r);
        }
        tally.record(o.map(|_| ()));
    }
    (tally, format!("largest error {worst:.3} of the target"), true)
}

/// The `i`-th circuit of the measurement-elimination corpus. The last
/// `deep` circuits use three qubits and one fused body gate, the rest two
/// qubits and two body gates; each body gate fuses one or more primitives.
pub fn corpus_circuit(i: usize, total: usize, deep: usize) -> Result<GeneralCircuit> {
    let mut rng = seeded(5, i);
    let accept = i % 2 == 0;
    if i + deep >= total {
        let prims = rng.random_range(2..=4);
        random_bounded_error_circuit(3, prims, 1, 0.1, accept, rng.random())
    } else {
        let prims = rng.random_range(2..=5);
        random_bounded_error_circuit(2, prims, 2, 0.1, accept, rng.random())
    }
}

fn measurement_elimination(cfg: &SuiteConfig) -> (Tally, String, bool) {
    let start = Instant::now();
    let outcomes = par::map_range(cfg.circuits, |i| -> std::result::Result<usize, String> {
        let c = corpus_circuit(i, cfg.circuits, cfg.deep_circuits).map_err(|e| format!("circuit {i}: {e}"))?;
        let p = simulate_acceptance(&c).map_err(|e| e.to_string())?;
        let expected = if p >= 2.0 / 3.0 {
            Answer::One
        } else if p <= 1.0 / 3.0 {
            Answer::Zero
        } else {
            return Err(format!("circuit {i}: acceptance {p} not bounded away from 1/2"));
        };
        let itm = circuit_to_itmatprod(&c).map_err(|e| e.to_string())?;
        let q = entry_value(&itm).map_err(|e| e.to_string())?;
        if (q - C64::new(p, 0.0)).norm() > ENCODING_TOL {
            return Err(format!("circuit {i}: entry {q} vs acceptance {p}"));
        }
        let roga = max_partial_product_norm(&itm.matrices);
        let cap = (1u64 << c.h) as f64;
        if roga > cap + BOUND_SLACK {
            return Err(format!("circuit {i}: partial product norm {roga} > {cap}"));
        }
        let (inst, _) = eliminate_measurements(&c).map_err(|e| format!("circuit {i}: {e}"))?;
        let got = oracle_decide(&inst).value;
        if got != expected {
            return Err(format!("circuit {i}: decided {got}, acceptance {p}"));
        }
        Ok(inst.params.n)
    });
    let elapsed = start.elapsed();
    let mut tally = Tally::new();
    let mut largest = 0;
    for o in outcomes {
        if let Ok(d) = &o {
            largest = largest.max(*d);
        }
        tally.record(o.map(|_| ()));
    }
    let in_budget = elapsed < PIPELINE_BUDGET;
    (
        tally,
        format!(
            "largest MATINV+ dimension {largest}, pipeline {:.1} s (budget {} s{})",
            elapsed.as_secs_f64(),
            PIPELINE_BUDGET.as_secs(),
            if in_budget { "" } else { ", exceeded" }
        ),
        in_budget,
    )
}

fn ground_energy(c: &GeneralCircuit) -> Result<f64> {
    let parts = clock_hamiltonian(c)?;
    Ok(*hermitian_eigs(&parts.h_total)?.last().expect("nonempty spectrum"))
}

/// Classical reversible verifier that accepts some basis proof with
/// certainty: random X, CNOT and SWAP gates, followed by an X on the output
/// qubit when no basis proof is accepted.
pub fn perfect_verifier(seed: u64) -> Result<GeneralCircuit> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = rng.random_range(2..=3);
    let merlin = rng.random_range(1..h);
    let mut c = GeneralCircuit::new(h, merlin)?;
    for _ in 0..rng.random_range(2..=5) {
        let a = rng.random_range(0..h);
        let b = (a + rng.random_range(1..h)) % h;
        c.push(match rng.random_range(0..3) {
            0 => ChannelGate::unitary(h, &[a], pauli_x())?,
            1 => ChannelGate::unitary(h, &[a, b], cnot())?,
            _ => ChannelGate::unitary(h, &[a, b], swap())?,
        })?;
    }
    let basis = |x: usize| {
        let mut psi = vec![C64::new(0.0, 0.0); 1 << merlin];
        psi[x] = C64::new(1.0, 0.0);
        psi
    };
    let mut accepted = false;
    for x in 0..1 << merlin {
        accepted |= acceptance_with_proof(&c, &basis(x))? > 0.5;
    }
    if !accepted {
        c.push(ChannelGate::unitary(h, &[0], pauli_x())?)?;
    }
    Ok(c)
}

/// One proof qubit, one work qubit: a Hadamard coin on the work qubit is
/// copied into or swapped onto the output, so every proof is accepted with
/// probability 1/2.
pub fn coin_verifiers() -> Vec<GeneralCircuit> {
    let coin = || ChannelGate::unitary(2, &[1], hadamard()).expect("hadamard");
    vec![
        GeneralCircuit::with_gates(2, 1, vec![coin(), ChannelGate::unitary(2, &[0, 1], swap()).expect("swap")]),
        GeneralCircuit::with_gates(2, 1, vec![coin(), ChannelGate::unitary(2, &[1, 0], cnot()).expect("cnot")]),
    ]
    .into_iter()
    .map(|c| c.expect("coin verifier"))
    .collect()
}

fn clock(cfg: &SuiteConfig) -> (Tally, String, bool) {
    let mut tally = Tally::new();
    let mut worst_perfect = 0.0f64;
    for (i, e) in par::map_range(cfg.verifier_seeds, |i| perfect_verifier(6_000 + i as u64).and_then(|c| ground_energy(&c)))
        .into_iter()
        .enumerate()
    {
        tally.record(match e {
            Err(e) => Err(format!("perfect verifier {i}: {e}")),
            Ok(e) => {
                worst_perfect = worst_perfect.max(e.abs());
                if e.abs() <= GROUND_ENERGY_TOL {
                    Ok(())
                } else {
                    Err(format!("perfect verifier {i}: ground energy {e:e}"))
                }
            }
        });
    }
    let mut coin_min = f64::INFINITY;
    for (i, c) in coin_verifiers().iter().enumerate() {
        tally.record(match ground_energy(c) {
            Err(e) => Err(format!("coin verifier {i}: {e}")),
            Ok(e) => {
                coin_min = coin_min.min(e);
                if e >= COIN_GAP_TAU {
                    Ok(())
                } else {
                    Err(format!("coin verifier {i}: ground energy {e} below {COIN_GAP_TAU}"))
                }
            }
        });
    }
    let mut lowest = f64::INFINITY;
    for (i, e) in par::map_range(cfg.verifier_seeds, |i| {
        let mut rng = seeded(6, i);
        let h = rng.random_range(1..=3);
        let merlin = rng.random_range(1..=h);
        random_unitary_verifier(h, merlin, rng.random_range(1..=6), rng.random()).and_then(|c| ground_energy(&c))
    })
    .into_iter()
    .enumerate()
    {
        tally.record(match e {
            Err(e) => Err(format!("random verifier {i}: {e}")),
            Ok(e) => {
                lowest = lowest.min(e);
                if e >= PSD_FLOOR {
                    Ok(())
                } else {
                    Err(format!("random verifier {i}: eigenvalue {e:e}"))
                }
            }
        });
    }
    (
        tally,
        format!(
            "perfect max |lambda_min| {worst_perfect:.1e}, coin lambda_min {coin_min:.6} (tau {COIN_GAP_TAU}), random min {lowest:.1e}"
        ),
        true,
    )
}

fn singular_gadget(cfg: &SuiteConfig) -> (Tally, String, bool) {
    let outcomes = par::map_range(cfg.singular_pairs, |i| -> std::result::Result<(), String> {
        let mut rng = seeded(7, i);
        let n = rng.random_range(1..=8);
        let kappa = log_uniform(1.0, 20.0, &mut rng);
        let eps = rng.random_range(0.05..=1.0);
        let answer = alternate(i);
        let params = ConditionParams::new(n, 1, kappa, eps).map_err(|e| e.to_string())?;
        let src = gen_instance_with(ProblemKind::VMatInv, params, rng.random(), answer).map_err(|e| e.to_string())?;
        let (out, _) = Rule::VMatInvToSingular.apply(&src).map_err(|e| e.to_string())?;
        let (_, smin) = singular_extremes(out.matrix()).map_err(|e| e.to_string())?;
        match answer {
            Answer::One if smin <= SINGULAR_ZERO_TOL => Ok(()),
            Answer::One => Err(format!("pair {i}: equal entry but sigma_min {smin:e}")),
            _ if smin >= out.params.epsilon - BOUND_SLACK => Ok(()),
            _ => Err(format!("pair {i}: sigma_min {smin:e} below {:e}", out.params.epsilon)),
        }
    });
    let mut tally = Tally::new();
    for o in outcomes {
        tally.record(o);
    }
    (tally, format!("zero threshold {SINGULAR_ZERO_TOL:e}"), true)
}

fn channel_algebra(cfg: &SuiteConfig) -> (Tally, String, bool) {
    let outcomes = par::map_range(cfg.channels, |i| -> std::result::Result<(f64, f64), String> {
        let mut rng = seeded(8, i);
        let h = rng.random_range(1..=3u32);
        let d = 1usize << h;
        let rank = rng.random_range(1..=4);
        let k = KrausSet::random(d, rank, &mut rng).map_err(|e| e.to_string())?;
        let nat = natural_representation(&k).map_err(|e| e.to_string())?;
        let mut residual = 0.0f64;
        for r in 0..d {
            for c in 0..d {
                let col = vec_index(r, c, d).map_err(|e| e.to_string())?;
                let image = vectorize(&k.apply(&ComplexMatrix::unit(d, r, c)));
                residual = residual.max(max_of(image.iter().enumerate().map(|(j, z)| (z - nat[(j, col)]).norm())));
            }
        }
        let (s1, _) = singular_extremes(&nat).map_err(|e| e.to_string())?;
        if residual > CHANNEL_TOL {
            Err(format!("channel {i}: basis residual {residual:e}"))
        } else if s1 > d as f64 + BOUND_SLACK {
            Err(format!("channel {i}: sigma_1 {s1} > {d}"))
        } else {
            Ok((residual, s1 / (d as f64).sqrt()))
        }
    });
    let mut tally = Tally::new();
    let (mut res, mut ratio) = (0.0f64, 0.0f64);
    for o in outcomes {
        if let Ok((r, q)) = &o {
            res = res.max(*r);
            ratio = ratio.max(*q);
        }
        tally.record(o.map(|_| ()));
    }
    (tally, format!("max residual {res:.1e}, max sigma_1/sqrt(d) {ratio:.3}"), true)
}

fn markov(cfg: &SuiteConfig) -> (Tally, String, bool) {
    let mut tally = Tally::new();
    let mut worst_z = 0.0f64;
    for i in 0..cfg.chains {
        let mut rng = seeded(9, i);
        let d = rng.random_range(2..=32);
        let steps = rng.random_range(1..=64);
        let outcome = (|| -> std::result::Result<(), String> {
            let chain = random_chain(d, steps, rng.random()).map_err(|e| e.to_string())?;
            let inst = markov_to_matpow(&chain).map_err(|e| e.to_string())?;
            let p = entry_value(&inst).map_err(|e| e.to_string())?.re;
            let est = hit_frequency(&chain, cfg.walk_trials, rng.random()).map_err(|e| e.to_string())?;
            let sigma = MonteCarloEstimate::sigma(p, cfg.walk_trials);
            if sigma > 0.0 {
                worst_z = worst_z.max((est.mean() - p).abs() / sigma);
            }
            if !est.within(p, SIGMA_MULTIPLE) {
                return Err(format!("chain {i}: frequency {} vs probability {p}", est.mean()));
            }
            let norm = max_power_norm(&chain.transition, steps);
            if norm > (d as f64).sqrt() + BOUND_SLACK {
                return Err(format!("chain {i}: power norm {norm} > sqrt({d})"));
            }
            Ok(())
        })();
        tally.record(outcome);
    }
    (tally, format!("largest deviation {worst_z:.2} sigma"), true)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quick_suite_passes() {
        for r in run_all(&SuiteConfig::quick()) {
            assert!(r.passed, "{r}: {:?}", r.failures);
        }
    }

    #[test]
    fn unknown_criterion_rejected() {
        assert!(run(10, &SuiteConfig::quick()).is_err());
    }
}
