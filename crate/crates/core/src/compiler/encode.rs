use crate::channel::natural_representation;
use crate::error::{Error, Result};
use crate::matrix::vec_index;
use crate::problem::{ConditionParams, ProblemInstance, ProblemKind, Threshold};
use crate::reduction::{ReductionRecord, Rule};

use super::circuit::{has_cleanup, GeneralCircuit};

/// Acceptance thresholds of a bounded-error circuit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AcceptanceThresholds {
    pub accept: f64,
    pub reject: f64,
}

impl Default for AcceptanceThresholds {
    fn default() -> Self {
        Self {
            accept: 2.0 / 3.0,
            reject: 1.0 / 3.0,
        }
    }
}

pub fn circuit_to_itmatprod(c: &GeneralCircuit) -> Result<ProblemInstance> {
    circuit_to_itmatprod_with(c, AcceptanceThresholds::default())
}

/// Natural representations of the gates in reverse order, so that
/// `A_1 ⋯ A_m [s, t]` is the probability of ending in `|10…0⟩` from `|0…0⟩`.
/// Requires the cleanup suffix; without it that entry is not the acceptance
/// probability.
pub fn circuit_to_itmatprod_with(c: &GeneralCircuit, th: AcceptanceThresholds) -> Result<ProblemInstance> {
    c.validate()?;
    if !has_cleanup(c) {
        return Err(Error::MalformedCircuit("missing cleanup suffix".into()));
    }
    if !(0.0 <= th.reject && th.reject < th.accept && th.accept <= 1.0) {
        return Err(Error::InvalidParams(format!(
            "thresholds reject = {} accept = {}",
            th.reject, th.accept
        )));
    }
    let d = c.dim();
    let matrices = c
        .gates
        .iter()
        .rev()
        .map(|g| natural_representation(&g.kraus))
        .collect::<Result<Vec<_>>>()?;
    let acc = c.accept_index();
    Ok(ProblemInstance {
        kind: ProblemKind::ItMatProd,
        params: ConditionParams::new(d * d, matrices.len(), d as f64, th.accept - th.reject)?,
        matrices,
        s: vec_index(acc, acc, d)?,
        t: 0,
        pairs: vec![],
        b: Threshold::Real(th.accept),
    })
}

/// Compiles to MATINV⁺ through the power, inverse and positive-definite
/// reductions. Promises are not checked on the way; a circuit whose
/// acceptance falls in the gap yields an instance that the oracle reports as
/// promise-violating.
pub fn eliminate_measurements(c: &GeneralCircuit) -> Result<(ProblemInstance, Vec<ReductionRecord>)> {
    let mut inst = circuit_to_itmatprod(c)?;
    let mut records = Vec::with_capacity(3);
    for rule in [Rule::ItMatProdToMatPow, Rule::MatPowToMatInv, Rule::MatInvToPosMatInv] {
        let (next, rec) = rule.apply(&inst)?;
        records.push(rec);
        inst = next;
    }
    Ok((inst, records))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compiler::circuit::{append_cleanup, pauli_x, ChannelGate};
    use crate::problem::{entry_value, oracle_decide, Answer};

    fn x_circuit(h: usize) -> GeneralCircuit {
        let mut c = GeneralCircuit::new(h, 0).unwrap();
        c.push(ChannelGate::unitary(h, &[0], pauli_x()).unwrap()).unwrap();
        append_cleanup(&c).unwrap()
    }

    #[test]
    fn identity_circuit_never_accepts() {
        let c = append_cleanup(&GeneralCircuit::new(2, 0).unwrap()).unwrap();
        let inst = circuit_to_itmatprod(&c).unwrap();
        assert!(entry_value(&inst).unwrap().norm() < 1e-15);
    }

    #[test]
    fn x_circuit_accepts() {
        let inst = circuit_to_itmatprod(&x_circuit(2)).unwrap();
        assert!((entry_value(&inst).unwrap().re - 1.0).abs() < 1e-15);
        assert_eq!(inst.params.kappa, 4.0);
    }

    #[test]
    fn missing_cleanup_rejected() {
        let c = GeneralCircuit::new(2, 0).unwrap();
        assert!(matches!(circuit_to_itmatprod(&c), Err(Error::MalformedCircuit(_))));
    }

    #[test]
    fn eliminated_decisions() {
        let (inst, recs) = eliminate_measurements(&x_circuit(1)).unwrap();
        assert_eq!(inst.kind, ProblemKind::MatInvPos);
        assert_eq!(recs.len(), 3);
        assert_eq!(oracle_decide(&inst).value, Answer::One);
        let c = append_cleanup(&GeneralCircuit::new(1, 0).unwrap()).unwrap();
        let (inst, _) = eliminate_measurements(&c).unwrap();
        assert_eq!(oracle_decide(&inst).value, Answer::Zero);
    }
}
