//! Instance-to-instance reductions, each producing a [`ReductionRecord`]
//! with its parameter map and measured conditioning, plus a chain composer.

mod identity;
mod rules;

use std::fmt;
use std::str::FromStr;

use thiserror::Error as ThisError;

pub use identity::{identity_check, IdentityCheck};
pub use rules::*;

use crate::error::{Error, Result};
use crate::problem::{check_promise_with, ConditionParams, ProblemInstance, ProblemKind, PromiseReport, Tolerances};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rule {
    ItMatProdToMatPow,
    MatPowToMatInv,
    MatInvToPosMatInv,
    PosDetToSumItMatProd,
    ItMatProdToNonneg,
    NonnegToDet,
    DetToPosDet,
    PosMatInvToSumItMatProd,
    SumItMatProdToItMatProd,
    VMatInvToSingular,
    VItMatProdToVMatPow,
    VMatPowToVMatInv,
}

impl Rule {
    pub const ALL: [Rule; 12] = [
        Rule::ItMatProdToMatPow,
        Rule::MatPowToMatInv,
        Rule::MatInvToPosMatInv,
        Rule::PosDetToSumItMatProd,
        Rule::ItMatProdToNonneg,
        Rule::NonnegToDet,
        Rule::DetToPosDet,
        Rule::PosMatInvToSumItMatProd,
        Rule::SumItMatProdToItMatProd,
        Rule::VMatInvToSingular,
        Rule::VItMatProdToVMatPow,
        Rule::VMatPowToVMatInv,
    ];

    /// The cycle MATINV⁺ → SUMITMATPROD → ITMATPROD → MATPOW → MATINV → MATINV⁺.
    pub const MATINV_CYCLE: [Rule; 5] = [
        Rule::PosMatInvToSumItMatProd,
        Rule::SumItMatProdToItMatProd,
        Rule::ItMatProdToMatPow,
        Rule::MatPowToMatInv,
        Rule::MatInvToPosMatInv,
    ];

    /// The cycle DET⁺ → SUMITMATPROD → ITMATPROD → ITMATPROD≥0 → DET → DET⁺.
    pub const DET_CYCLE: [Rule; 5] = [
        Rule::PosDetToSumItMatProd,
        Rule::SumItMatProdToItMatProd,
        Rule::ItMatProdToNonneg,
        Rule::NonnegToDet,
        Rule::DetToPosDet,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Rule::ItMatProdToMatPow => "itmatprod_to_matpow",
            Rule::MatPowToMatInv => "matpow_to_matinv",
            Rule::MatInvToPosMatInv => "matinv_to_posmatinv",
            Rule::PosDetToSumItMatProd => "posdet_to_sumitmatprod",
            Rule::ItMatProdToNonneg => "itmatprod_to_nonneg",
            Rule::NonnegToDet => "nonneg_to_det",
            Rule::DetToPosDet => "det_to_posdet",
            Rule::PosMatInvToSumItMatProd => "posmatinv_to_sumitmatprod",
            Rule::SumItMatProdToItMatProd => "sumitmatprod_to_itmatprod",
            Rule::VMatInvToSingular => "vmatinv_to_singular",
            Rule::VItMatProdToVMatPow => "vitmatprod_to_vmatpow",
            Rule::VMatPowToVMatInv => "vmatpow_to_vmatinv",
        }
    }

    pub fn input_kind(self) -> ProblemKind {
        use ProblemKind::*;
        match self {
            Rule::ItMatProdToMatPow | Rule::ItMatProdToNonneg => ItMatProd,
            Rule::MatPowToMatInv => MatPow,
            Rule::MatInvToPosMatInv => MatInv,
            Rule::PosDetToSumItMatProd => DetPos,
            Rule::NonnegToDet => ItMatProdNonneg,
            Rule::DetToPosDet => Det,
            Rule::PosMatInvToSumItMatProd => MatInvPos,
            Rule::SumItMatProdToItMatProd => SumItMatProd,
            Rule::VMatInvToSingular => VMatInv,
            Rule::VItMatProdToVMatPow => VItMatProd,
            Rule::VMatPowToVMatInv => VMatPow,
        }
    }

    pub fn output_kind(self) -> ProblemKind {
        use ProblemKind::*;
        match self {
            Rule::ItMatProdToMatPow => MatPow,
            Rule::MatPowToMatInv => MatInv,
            Rule::MatInvToPosMatInv => MatInvPos,
            Rule::PosDetToSumItMatProd | Rule::PosMatInvToSumItMatProd => SumItMatProd,
            Rule::ItMatProdToNonneg => ItMatProdNonneg,
            Rule::NonnegToDet => Det,
            Rule::DetToPosDet => DetPos,
            Rule::SumItMatProdToItMatProd => ItMatProd,
            Rule::VMatInvToSingular => Singular,
            Rule::VItMatProdToVMatPow => VMatPow,
            Rule::VMatPowToVMatInv => VMatInv,
        }
    }

    pub fn apply(self, inst: &ProblemInstance) -> Result<(ProblemInstance, ReductionRecord)> {
        if inst.kind != self.input_kind() {
            return Err(Error::KindMismatch {
                rule: self.name().into(),
                expected: self.input_kind().name().into(),
                found: inst.kind.name().into(),
            });
        }
        inst.validate()?;
        match self {
            Rule::ItMatProdToMatPow => reduce_itmatprod_to_matpow(inst),
            Rule::MatPowToMatInv => reduce_matpow_to_matinv(inst),
            Rule::MatInvToPosMatInv => reduce_matinv_to_posmatinv(inst),
            Rule::PosDetToSumItMatProd => reduce_posdet_to_sumitmatprod(inst),
            Rule::ItMatProdToNonneg => reduce_itmatprod_to_nonneg(inst),
            Rule::NonnegToDet => reduce_nonneg_itmatprod_to_det(inst),
            Rule::DetToPosDet => reduce_det_to_posdet(inst),
            Rule::PosMatInvToSumItMatProd => reduce_posmatinv_to_sumitmatprod(inst),
            Rule::SumItMatProdToItMatProd => reduce_sumitmatprod_to_itmatprod(inst),
            Rule::VMatInvToSingular => reduce_vmatinv_to_singular(inst),
            Rule::VItMatProdToVMatPow => reduce_vitmatprod_to_vmatpow(inst),
            Rule::VMatPowToVMatInv => reduce_vmatpow_to_vmatinv(inst),
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Rule {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Rule::ALL
            .into_iter()
            .find(|r| r.name() == s)
            .ok_or_else(|| Error::UnknownName(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    AtMost,
    AtLeast,
}

/// A declared bound on a quantity of the output instance, with the value
/// measured on the concrete instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Bound {
    pub quantity: String,
    pub relation: Relation,
    pub declared: f64,
    pub measured: f64,
    /// Outcome of a factorization certificate, used instead of comparing
    /// `measured` when the measurement is an iterative estimate.
    pub certified: Option<bool>,
}

impl Bound {
    pub fn at_most(quantity: impl Into<String>, declared: f64, measured: f64) -> Self {
        Self {
            quantity: quantity.into(),
            relation: Relation::AtMost,
            declared,
            measured,
            certified: None,
        }
    }

    pub fn at_least(quantity: impl Into<String>, declared: f64, measured: f64) -> Self {
        Self {
            quantity: quantity.into(),
            relation: Relation::AtLeast,
            declared,
            measured,
            certified: None,
        }
    }

    pub fn with_certificate(mut self, certified: Option<bool>) -> Self {
        self.certified = certified;
        self
    }

    pub fn holds(&self, slack: f64) -> bool {
        if let Some(c) = self.certified {
            return c;
        }
        match self.relation {
            Relation::AtMost => self.measured <= self.declared + slack,
            Relation::AtLeast => self.measured >= self.declared - slack,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReductionRecord {
    pub rule: Rule,
    pub input_params: ConditionParams,
    pub output_params: ConditionParams,
    pub bounds: Vec<Bound>,
    pub answer_map: String,
    /// Additional measured quantities worth keeping with the provenance.
    pub notes: Vec<(String, f64)>,
}

impl ReductionRecord {
    pub fn violations(&self, slack: f64) -> Vec<&Bound> {
        self.bounds.iter().filter(|b| !b.holds(slack)).collect()
    }
}

#[derive(Debug, ThisError)]
pub enum ChainError {
    #[error(transparent)]
    Reduction(#[from] Error),
    #[error("promise violated after step {step} ({})", record.rule)]
    PromiseViolated {
        step: usize,
        record: Box<ReductionRecord>,
        report: PromiseReport,
    },
}

/// Applies `path` in order, checking the promise of every intermediate and
/// final instance.
pub fn chain(
    inst: &ProblemInstance,
    path: &[Rule],
) -> std::result::Result<(ProblemInstance, Vec<ReductionRecord>), ChainError> {
    chain_with(inst, path, &Tolerances::default())
}

pub fn chain_with(
    inst: &ProblemInstance,
    path: &[Rule],
    tol: &Tolerances,
) -> std::result::Result<(ProblemInstance, Vec<ReductionRecord>), ChainError> {
    let mut kind = inst.kind;
    for rule in path {
        if rule.input_kind() != kind {
            return Err(Error::KindMismatch {
                rule: rule.name().into(),
                expected: rule.input_kind().name().into(),
                found: kind.name().into(),
            }
            .into());
        }
        kind = rule.output_kind();
    }
    let mut current = inst.clone();
    let mut records = Vec::with_capacity(path.len());
    for (step, rule) in path.iter().enumerate() {
        let (next, record) = rule.apply(&current)?;
        let report = check_promise_with(&next, tol);
        if !report.overall {
            return Err(ChainError::PromiseViolated {
                step,
                record: Box::new(record),
                report,
            });
        }
        records.push(record);
        current = next;
    }
    Ok((current, records))
}

/// Parses a comma-separated list of rule names; empty input is the empty path.
pub fn parse_path(spec: &str) -> Result<Vec<Rule>> {
    spec.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::parse)
        .collect()
}
