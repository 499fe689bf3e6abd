use std::time::Duration;

use serde::Serialize;

use wellcond::problem::{ConditionParams, PromiseReport};
use wellcond::reduction::{ReductionRecord, Relation};

use crate::schema::ParamsDto;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRow {
    pub name: String,
    pub declared: f64,
    pub measured: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Decisions {
    pub source: Option<String>,
    pub target: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundRow {
    pub quantity: String,
    pub relation: &'static str,
    pub declared: f64,
    pub measured: f64,
    pub certified: Option<bool>,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Note {
    pub name: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProvenanceRow {
    pub rule: String,
    pub input_params: ParamsDto,
    pub output_params: ParamsDto,
    pub bounds: Vec<BoundRow>,
    pub answer_map: String,
    pub notes: Vec<Note>,
}

fn params(p: &ConditionParams) -> ParamsDto {
    ParamsDto {
        n: p.n,
        m: p.m,
        kappa: p.kappa,
        epsilon: p.epsilon,
    }
}

impl ProvenanceRow {
    pub fn new(r: &ReductionRecord, slack: f64) -> Self {
        Self {
            rule: r.rule.name().to_string(),
            input_params: params(&r.input_params),
            output_params: params(&r.output_params),
            bounds: r
                .bounds
                .iter()
                .map(|b| BoundRow {
                    quantity: b.quantity.clone(),
                    relation: match b.relation {
                        Relation::AtMost => "<=",
                        Relation::AtLeast => ">=",
                    },
                    declared: b.declared,
                    measured: b.measured,
                    certified: b.certified,
                    holds: b.holds(slack),
                })
                .collect(),
            answer_map: r.answer_map.clone(),
            notes: r
                .notes
                .iter()
                .map(|(name, value)| Note {
                    name: name.clone(),
                    value: *value,
                })
                .collect(),
        }
    }
}

/// Everything a run did, with digests of the files it read and wrote.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct RunReport {
    pub command: Vec<String>,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    pub checks: Vec<CheckRow>,
    pub decisions: Decisions,
    pub provenance: Vec<ProvenanceRow>,
    pub notes: Vec<Note>,
    pub exit_code: i32,
    pub wall_time_s: f64,
}

impl RunReport {
    pub fn check(&mut self, name: impl Into<String>, declared: f64, measured: f64, pass: bool) {
        self.checks.push(CheckRow {
            name: name.into(),
            declared,
            measured,
            pass,
        });
    }

    pub fn promise(&mut self, prefix: &str, report: &PromiseReport) {
        for c in &report.checks {
            self.check(format!("{prefix}{}", c.name), c.declared, c.measured, c.passed);
        }
    }

    pub fn note(&mut self, name: impl Into<String>, value: f64) {
        self.notes.push(Note {
            name: name.into(),
            value,
        });
    }

    pub fn finish(&mut self, exit_code: i32, elapsed: Duration) {
        self.exit_code = exit_code;
        self.wall_time_s = elapsed.as_secs_f64();
    }
}
