//! File formats for matrices, instances and circuits. Instance indices
//! (`s`, `t` and the pairs in `E`) are 1-based; qubit targets are 0-based
//! with qubit 0 the output qubit.

use serde::{Deserialize, Serialize};

use wellcond::compiler::{ChannelGate, GateKind, GeneralCircuit};
use wellcond::problem::{ConditionParams, ProblemInstance, ProblemKind, Threshold};
use wellcond::{ComplexMatrix, C64};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixDto {
    pub rows: usize,
    pub cols: usize,
    /// Row-major `[re, im]` pairs.
    pub data: Vec<[f64; 2]>,
}

impl From<&ComplexMatrix> for MatrixDto {
    fn from(m: &ComplexMatrix) -> Self {
        Self {
            rows: m.rows(),
            cols: m.cols(),
            data: m.entries().map(|z| [z.re, z.im]).collect(),
        }
    }
}

impl MatrixDto {
    pub fn to_matrix(&self) -> Result<ComplexMatrix, String> {
        let entries = self.data.iter().map(|&[re, im]| C64::new(re, im)).collect();
        ComplexMatrix::from_row_major(self.rows, self.cols, entries).map_err(|e| e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsDto {
    pub n: usize,
    pub m: usize,
    pub kappa: f64,
    pub epsilon: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ThresholdDto {
    Real(f64),
    Complex([f64; 2]),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceDto {
    #[serde(rename = "type")]
    pub kind: String,
    pub params: ParamsDto,
    pub matrices: Vec<MatrixDto>,
    #[serde(default)]
    pub s: Option<usize>,
    #[serde(default)]
    pub t: Option<usize>,
    #[serde(rename = "E", default)]
    pub pairs: Vec<[usize; 2]>,
    #[serde(default)]
    pub b: Option<ThresholdDto>,
}

impl From<&ProblemInstance> for InstanceDto {
    fn from(inst: &ProblemInstance) -> Self {
        let p = inst.params;
        let selector = inst.kind.has_selector();
        Self {
            kind: inst.kind.name().to_string(),
            params: ParamsDto {
                n: p.n,
                m: p.m,
                kappa: p.kappa,
                epsilon: p.epsilon,
            },
            matrices: inst.matrices.iter().map(MatrixDto::from).collect(),
            s: selector.then_some(inst.s + 1),
            t: selector.then_some(inst.t + 1),
            pairs: inst.pairs.iter().map(|&(a, c)| [a + 1, c + 1]).collect(),
            b: match inst.b {
                Threshold::None => None,
                Threshold::Real(b) => Some(ThresholdDto::Real(b)),
                Threshold::Complex(b) => Some(ThresholdDto::Complex([b.re, b.im])),
            },
        }
    }
}

fn zero_based(i: usize, what: &str) -> Result<usize, String> {
    i.checked_sub(1).ok_or_else(|| format!("{what} is 1-based, got 0"))
}

impl InstanceDto {
    pub fn to_instance(&self) -> Result<ProblemInstance, String> {
        let kind: ProblemKind = self.kind.parse().map_err(|e: wellcond::Error| e.to_string())?;
        let p = self.params;
        let params = ConditionParams::new(p.n, p.m, p.kappa, p.epsilon).map_err(|e| e.to_string())?;
        let (s, t) = if kind.has_selector() {
            let s = self.s.ok_or("missing field `s`")?;
            let t = self.t.ok_or("missing field `t`")?;
            (zero_based(s, "s")?, zero_based(t, "t")?)
        } else {
            (0, 0)
        };
        let pairs = self
            .pairs
            .iter()
            .map(|&[a, c]| Ok((zero_based(a, "E")?, zero_based(c, "E")?)))
            .collect::<Result<Vec<_>, String>>()?;
        let b = match (self.b, kind) {
            (None, _) => Threshold::None,
            (Some(ThresholdDto::Real(b)), k) if k.is_verification() => Threshold::Complex(C64::new(b, 0.0)),
            (Some(ThresholdDto::Real(b)), _) => Threshold::Real(b),
            (Some(ThresholdDto::Complex([re, im])), _) => Threshold::Complex(C64::new(re, im)),
        };
        let inst = ProblemInstance {
            kind,
            params,
            matrices: self.matrices.iter().map(MatrixDto::to_matrix).collect::<Result<_, _>>()?,
            s,
            t,
            pairs,
            b,
        };
        inst.validate().map_err(|e| e.to_string())?;
        Ok(inst)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateDto {
    pub kind: String,
    pub targets: Vec<usize>,
    #[serde(default)]
    pub matrices: Vec<MatrixDto>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitDto {
    pub qubits: usize,
    #[serde(default)]
    pub merlin_qubits: usize,
    pub gates: Vec<GateDto>,
}

impl From<&GeneralCircuit> for CircuitDto {
    fn from(c: &GeneralCircuit) -> Self {
        Self {
            qubits: c.h,
            merlin_qubits: c.merlin_qubits,
            gates: c
                .gates
                .iter()
                .map(|g| GateDto {
                    kind: g.kind.name().to_string(),
                    targets: g.targets.clone(),
                    matrices: match g.kind {
                        GateKind::Measure | GateKind::Reset => vec![],
                        _ => g.local.iter().map(MatrixDto::from).collect(),
                    },
                })
                .collect(),
        }
    }
}

impl CircuitDto {
    pub fn to_circuit(&self) -> Result<GeneralCircuit, String> {
        let gates = self
            .gates
            .iter()
            .enumerate()
            .map(|(i, g)| {
                let kind = GateKind::parse(&g.kind).map_err(|e| format!("gate {i}: {e}"))?;
                let local = g.matrices.iter().map(MatrixDto::to_matrix).collect::<Result<Vec<_>, _>>()?;
                ChannelGate::from_parts(kind, self.qubits, g.targets.clone(), local).map_err(|e| format!("gate {i}: {e}"))
            })
            .collect::<Result<Vec<_>, String>>()?;
        GeneralCircuit::with_gates(self.qubits, self.merlin_qubits, gates).map_err(|e| e.to_string())
    }
}
