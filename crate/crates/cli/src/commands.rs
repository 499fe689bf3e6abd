use std::fs;
use std::path::{Path, PathBuf};

use wellcond::approx::{logdet_series, neumann_inverse_entry, Certificate};
use wellcond::compiler::{
    append_cleanup, circuit_to_itmatprod, eliminate_measurements, has_cleanup, simulate_acceptance,
};
use wellcond::error::Error;
use wellcond::par;
use wellcond::problem::{
    check_promise_with, decide_quantity, decision_quantity, entry_value, gen_instance, gen_instance_with,
    oracle_decide_with, Answer, ConditionParams, ProblemInstance, ProblemKind, Tolerances,
};
use wellcond::reduction::{chain_with, identity_check, parse_path, ChainError, Rule};
use wellcond::suite::{self, SuiteConfig};

use crate::json;
use crate::report::{FileDigest, ProvenanceRow, RunReport};
use crate::schema::{CircuitDto, InstanceDto};

/// Usage, schema and I/O failures; the process exits with status 2.
#[derive(Debug, Clone, PartialEq)]
pub struct UsageError(pub String);

impl From<Error> for UsageError {
    fn from(e: Error) -> Self {
        Self(e.to_string())
    }
}

impl From<std::io::Error> for UsageError {
    fn from(e: std::io::Error) -> Self {
        Self(e.to_string())
    }
}

impl From<serde_json::Error> for UsageError {
    fn from(e: serde_json::Error) -> Self {
        Self(format!("schema: {e}"))
    }
}

#[derive(Debug, Default)]
pub struct Outcome {
    /// A promise violation (or a non-bounded-error circuit) was detected.
    pub violated: bool,
    /// Instance to write to `--out` or stdout.
    pub output: Option<Vec<u8>>,
    pub summary: Vec<String>,
}

pub struct Ctx {
    pub seed: u64,
    pub tol: Tolerances,
    pub report: RunReport,
}

impl Ctx {
    fn read(&mut self, path: &Path) -> Result<Vec<u8>, UsageError> {
        let bytes = fs::read(path).map_err(|e| UsageError(format!("{}: {e}", path.display())))?;
        self.report.inputs.push(FileDigest {
            path: path.display().to_string(),
            sha256: json::sha256_hex(&bytes),
        });
        Ok(bytes)
    }

    fn read_instance(&mut self, path: &Path) -> Result<ProblemInstance, UsageError> {
        let bytes = self.read(path)?;
        parse_instance(&bytes).map_err(|e| UsageError(format!("{}: {e}", path.display())))
    }

    /// Checks the input promise into the report; true when it holds.
    fn input_promise(&mut self, inst: &ProblemInstance) -> bool {
        let report = check_promise_with(inst, &self.tol);
        self.report.promise("input: ", &report);
        report.overall
    }

    fn decide(&self, inst: &ProblemInstance) -> Answer {
        oracle_decide_with(inst, &self.tol).value
    }
}

fn parse_instance(bytes: &[u8]) -> Result<ProblemInstance, String> {
    let dto: InstanceDto = serde_json::from_slice(bytes).map_err(|e| format!("schema: {e}"))?;
    dto.to_instance()
}

fn instance_bytes(inst: &ProblemInstance) -> Result<Vec<u8>, UsageError> {
    Ok(json::to_bytes(&InstanceDto::from(inst))?)
}

pub fn gen(
    ctx: &mut Ctx,
    kind: &str,
    params: (usize, usize, f64, f64),
    answer: Option<Answer>,
) -> Result<Outcome, UsageError> {
    let kind: ProblemKind = kind.parse()?;
    let (n, m, kappa, epsilon) = params;
    let params = ConditionParams::new(n, m, kappa, epsilon)?;
    let inst = match answer {
        Some(a) => gen_instance_with(kind, params, ctx.seed, a)?,
        None => gen_instance(kind, params, ctx.seed)?,
    };
    let ok = ctx.input_promise(&inst);
    let decision = ctx.decide(&inst);
    ctx.report.decisions.source = Some(decision.to_string());
    Ok(Outcome {
        violated: !ok,
        output: Some(instance_bytes(&inst)?),
        summary: vec![format!("generated {kind} (n = {n}), decision {decision}")],
    })
}

pub fn reduce(ctx: &mut Ctx, input: &Path, rule: &str) -> Result<Outcome, UsageError> {
    let rule: Rule = rule.parse()?;
    let inst = ctx.read_instance(input)?;
    if rule.input_kind() != inst.kind {
        return Err(UsageError(format!("{} expects {}, got {}", rule.name(), rule.input_kind(), inst.kind)));
    }
    if !ctx.input_promise(&inst) {
        ctx.report.decisions.source = Some(Answer::PromiseViolated.to_string());
        return Ok(Outcome {
            violated: true,
            output: None,
            summary: vec![format!("input violates the {} promise", inst.kind)],
        });
    }
    let (out, record) = rule.apply(&inst)?;
    let id = identity_check(rule, &inst, &out)?;
    ctx.report
        .check(format!("identity: {}", id.description), ctx.tol.identity, id.residual, id.residual <= ctx.tol.identity);
    for (name, value) in &id.notes {
        ctx.report.note(name.clone(), *value);
    }
    let slack = ctx.tol.spectral;
    let bounds_ok = record.violations(slack).is_empty();
    ctx.report.provenance.push(ProvenanceRow::new(&record, slack));
    let post = check_promise_with(&out, &ctx.tol);
    ctx.report.promise("output: ", &post);
    let (src, dst) = (ctx.decide(&inst), ctx.decide(&out));
    ctx.report.decisions.source = Some(src.to_string());
    ctx.report.decisions.target = Some(dst.to_string());
    Ok(Outcome {
        violated: !(post.overall && bounds_ok),
        output: Some(instance_bytes(&out)?),
        summary: vec![
            format!("{} -> {} (n = {})", inst.kind, out.kind, out.params.n),
            format!("identity residual {:.3e}", id.residual),
            format!("decisions {src} -> {dst}"),
        ],
    })
}

pub fn chain(ctx: &mut Ctx, input: &Path, path: &str) -> Result<Outcome, UsageError> {
    let rules = parse_path(path)?;
    let inst = ctx.read_instance(input)?;
    let mut kind = inst.kind;
    for r in &rules {
        if r.input_kind() != kind {
            return Err(UsageError(format!("{} expects {}, got {kind}", r.name(), r.input_kind())));
        }
        kind = r.output_kind();
    }
    let src = if ctx.input_promise(&inst) {
        ctx.decide(&inst)
    } else {
        Answer::PromiseViolated
    };
    ctx.report.decisions.source = Some(src.to_string());
    if src == Answer::PromiseViolated {
        return Ok(Outcome {
            violated: true,
            output: None,
            summary: vec![format!("input violates the {} promise", inst.kind)],
        });
    }
    let slack = ctx.tol.spectral;
    match chain_with(&inst, &rules, &ctx.tol) {
        Ok((out, records)) => {
            ctx.report
                .provenance
                .extend(records.iter().map(|r| ProvenanceRow::new(r, slack)));
            let dst = ctx.decide(&out);
            ctx.report.decisions.target = Some(dst.to_string());
            Ok(Outcome {
                violated: dst == Answer::PromiseViolated,
                output: Some(instance_bytes(&out)?),
                summary: vec![
                    format!("{} steps: {} -> {} (n = {})", rules.len(), inst.kind, out.kind, out.params.n),
                    format!("decisions {src} -> {dst}"),
                ],
            })
        }
        Err(ChainError::PromiseViolated { step, record, report }) => {
            ctx.report.provenance.push(ProvenanceRow::new(&record, slack));
            ctx.report.promise(&format!("step {step}: "), &report);
            ctx.report.decisions.target = Some(Answer::PromiseViolated.to_string());
            Ok(Outcome {
                violated: true,
                output: None,
                summary: vec![format!("promise violated after step {step} ({})", record.rule)],
            })
        }
        Err(ChainError::Reduction(e)) => Err(e.into()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompileTarget {
    ItMatProd,
    MatInvPlus,
}

pub fn compile_circuit(ctx: &mut Ctx, input: &Path, target: CompileTarget) -> Result<Outcome, UsageError> {
    let bytes = ctx.read(input)?;
    let dto: CircuitDto = serde_json::from_slice(&bytes)?;
    let mut circuit = dto.to_circuit().map_err(UsageError)?;
    if circuit.merlin_qubits > 0 {
        return Err(UsageError("compilation expects a circuit without proof qubits".into()));
    }
    if !has_cleanup(&circuit) {
        circuit = append_cleanup(&circuit)?;
        ctx.report.note("cleanup gates appended", (circuit.h) as f64);
    }
    let p = simulate_acceptance(&circuit)?;
    ctx.report.note("simulated acceptance", p);
    let expected = if p >= 2.0 / 3.0 {
        Some(Answer::One)
    } else if p <= 1.0 / 3.0 {
        Some(Answer::Zero)
    } else {
        None
    };
    let itm = circuit_to_itmatprod(&circuit)?;
    let q = entry_value(&itm)?;
    let residual = (q - wellcond::C64::new(p, 0.0)).norm();
    ctx.report
        .check("encoded entry = acceptance", ctx.tol.identity, residual, residual <= ctx.tol.identity);
    let out = match target {
        CompileTarget::ItMatProd => itm,
        CompileTarget::MatInvPlus => {
            let (out, records) = eliminate_measurements(&circuit)?;
            let slack = ctx.tol.spectral;
            ctx.report
                .provenance
                .extend(records.iter().map(|r| ProvenanceRow::new(r, slack)));
            out
        }
    };
    let got = ctx.decide(&out);
    ctx.report.decisions.source = expected.map(|a| a.to_string());
    ctx.report.decisions.target = Some(got.to_string());
    let agree = expected == Some(got);
    ctx.report.check("decision agreement", 1.0, f64::from(u8::from(agree)), agree);
    let mut summary = vec![format!(
        "{} qubits, {} gates, acceptance {p:.6} -> {} (n = {})",
        circuit.h,
        circuit.gates.len(),
        out.kind,
        out.params.n
    )];
    summary.push(match expected {
        Some(e) => format!("simulated {e}, oracle {got}"),
        None => format!("acceptance {p:.6} is not bounded away from 1/2; oracle {got}"),
    });
    Ok(Outcome {
        violated: !agree || residual > ctx.tol.identity,
        output: Some(instance_bytes(&out)?),
        summary,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMethod {
    Oracle,
    Series,
}

pub fn solve(ctx: &mut Ctx, input: &Path, method: SolveMethod) -> Result<Outcome, UsageError> {
    let inst = ctx.read_instance(input)?;
    let decision = match method {
        SolveMethod::Oracle => {
            if ctx.input_promise(&inst) {
                let w = decision_quantity(&inst)?;
                decide_quantity(inst.kind, &inst.params, inst.b, w, ctx.tol.identity)
            } else {
                Answer::PromiseViolated
            }
        }
        SolveMethod::Series => series_decision(ctx, &inst)?,
    };
    ctx.report.decisions.source = Some(decision.to_string());
    Ok(Outcome {
        violated: decision == Answer::PromiseViolated,
        output: None,
        summary: vec![format!("decision: {decision}")],
    })
}

/// Decides DET⁺ and MATINV⁺ from the truncated series, splitting the
/// certified error interval at its midpoint.
fn series_decision(ctx: &mut Ctx, inst: &ProblemInstance) -> Result<Answer, UsageError> {
    let p = inst.params;
    let b = inst.b.real().ok_or_else(|| UsageError("series needs a real threshold".into()))?;
    let result = match inst.kind {
        ProblemKind::DetPos => logdet_series(inst.matrix(), p.kappa, p.epsilon).map(|r| {
            // value ∈ [ln det, ln det + ε/2]
            (r.value, r.certificate, r.terms_used, b - p.epsilon / 4.0)
        }),
        ProblemKind::MatInvPos => neumann_inverse_entry(inst.matrix(), inst.s, inst.t, p.kappa, p.epsilon)
            .map(|r| (r.value.norm(), r.certificate, r.terms_used, b - p.epsilon / 2.0)),
        k => return Err(UsageError(format!("series method applies to DET+ and MATINV+, not {k}"))),
    };
    match result {
        Ok((value, cert, terms, cut)) => {
            let Certificate::Additive(err) = cert else {
                unreachable!("additive series certificate")
            };
            ctx.report.note("series value", value);
            ctx.report.note("certified error", err);
            ctx.report.note("terms", terms as f64);
            Ok(if value >= cut { Answer::One } else { Answer::Zero })
        }
        Err(e @ (Error::Precondition(_) | Error::NotHermitian { .. })) => {
            ctx.report.check(format!("series precondition: {e}"), 0.0, f64::NAN, false);
            Ok(Answer::PromiseViolated)
        }
        Err(e) => Err(e.into()),
    }
}

pub fn verify(ctx: &mut Ctx, input: &Path) -> Result<Outcome, UsageError> {
    if !input.is_dir() {
        let inst = ctx.read_instance(input)?;
        let ok = ctx.input_promise(&inst);
        return Ok(Outcome {
            violated: !ok,
            output: None,
            summary: vec![format!("{}: {}", input.display(), if ok { "pass" } else { "FAIL" })],
        });
    }
    let mut files: Vec<PathBuf> = fs::read_dir(input)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    let contents = files
        .iter()
        .map(|f| ctx.read(f))
        .collect::<Result<Vec<_>, _>>()?;
    let tol = ctx.tol;
    let verdicts = par::map_slice(&contents, |bytes| {
        parse_instance(bytes).map(|inst| check_promise_with(&inst, &tol))
    });
    let (mut pass, mut fail, mut unreadable) = (0, 0, 0);
    let mut summary = vec![];
    for (f, v) in files.iter().zip(verdicts) {
        let name = f.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        match v {
            Ok(r) => {
                ctx.report.promise(&format!("{name}: "), &r);
                if r.overall {
                    pass += 1;
                } else {
                    fail += 1;
                }
                summary.push(format!("{name}: {}", if r.overall { "pass" } else { "FAIL" }));
            }
            Err(e) => {
                unreadable += 1;
                ctx.report.check(format!("{name}: schema"), 0.0, f64::NAN, false);
                summary.push(format!("{name}: unreadable ({e})"));
            }
        }
    }
    summary.push(format!("{} files: {pass} pass, {fail} fail, {unreadable} unreadable", files.len()));
    if unreadable > 0 {
        return Err(UsageError(summary.join("\n")));
    }
    Ok(Outcome {
        violated: fail > 0,
        output: None,
        summary,
    })
}

pub fn self_test(ctx: &mut Ctx, quick: bool) -> Outcome {
    let cfg = if quick { SuiteConfig::quick() } else { SuiteConfig::full() };
    let mut summary = vec![format!("{:<4} {:<26} {:>9}  detail", "", "criterion", "ok")];
    let mut all = true;
    for r in suite::run_all(&cfg) {
        all &= r.passed;
        ctx.report.check(
            format!("criterion {}: {}", r.id, r.name),
            0.0,
            r.failed as f64,
            r.passed,
        );
        summary.push(format!(
            "{:<4} {:<26} {:>9}  {}",
            if r.passed { "PASS" } else { "FAIL" },
            format!("{} {}", r.id, r.name),
            format!("{}/{}", r.checked - r.failed, r.checked),
            r.summary
        ));
        summary.extend(r.failures.iter().map(|f| format!("       {f}")));
    }
    Outcome {
        violated: !all,
        output: None,
        summary,
    }
}
