use crate::error::{Error, Result};
use crate::matrix::{kron, ComplexMatrix, ONE};

use super::circuit::{embed, GeneralCircuit};

fn require_proof(c: &GeneralCircuit) -> Result<()> {
    if c.merlin_qubits == 0 {
        return Err(Error::Precondition("verifier needs at least one proof qubit".into()));
    }
    c.validate()
}

/// Projector onto qubit 0 reading `bit`, on the full register.
fn first_qubit_projector(h: usize, bit: usize) -> ComplexMatrix {
    let d = 1 << h;
    ComplexMatrix::from_fn(d, d, |i, j| {
        if i == j && (i >> (h - 1)) == bit {
            ONE
        } else {
            crate::matrix::ZERO
        }
    })
}

/// `M = (I ⊗ ⟨0|) Φ†(Π₁) (I ⊗ |0⟩)` on the proof register, from Heisenberg
/// evolution of the accepting projector through the gates in reverse.
pub fn verifier_operator(c: &GeneralCircuit) -> Result<ComplexMatrix> {
    require_proof(c)?;
    let x = c
        .gates
        .iter()
        .rev()
        .fold(first_qubit_projector(c.h, 1), |x, g| g.kraus.apply_adjoint(&x));
    let w = c.h - c.merlin_qubits;
    let p = 1 << c.merlin_qubits;
    let m = ComplexMatrix::from_fn(p, p, |i, j| x[(i << w, j << w)]);
    Ok((&m + &m.adjoint()).scale_real(0.5))
}

/// Acceptance probability when the proof is the maximally mixed state.
pub fn mixed_state_acceptance(c: &GeneralCircuit) -> Result<f64> {
    let m = verifier_operator(c)?;
    Ok(m.trace().re / m.rows() as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClockHamiltonianParts {
    pub h_in: ComplexMatrix,
    pub h_prop: ComplexMatrix,
    pub h_out: ComplexMatrix,
    pub h_total: ComplexMatrix,
}

/// Clock Hamiltonian on register ⊗ clock, basis index `state·(T+1) + clock`.
/// The input term penalizes nonzero ancillas at time 0 and the output term
/// penalizes a rejecting first qubit at time `T`.
pub fn clock_hamiltonian(c: &GeneralCircuit) -> Result<ClockHamiltonianParts> {
    c.validate()?;
    if let Some(g) = c.gates.iter().find(|g| !g.is_unitary()) {
        return Err(Error::NonUnitary(format!("{} gate in a clock Hamiltonian", g.kind.name())));
    }
    let h = c.h;
    let d = c.dim();
    let steps = c.gates.len();
    let clock = |r: usize, col: usize| ComplexMatrix::unit(steps + 1, r, col);

    let mut h_in = ComplexMatrix::zeros(d * (steps + 1), d * (steps + 1));
    let one = ComplexMatrix::unit(2, 1, 1);
    for q in c.merlin_qubits..h {
        h_in = &h_in + &kron(&embed(&one, &[q], h)?, &clock(0, 0));
    }

    let mut h_prop = ComplexMatrix::zeros(d * (steps + 1), d * (steps + 1));
    let id = ComplexMatrix::identity(d);
    for (j0, g) in c.gates.iter().enumerate() {
        let j = j0 + 1;
        let v = &g.kraus.operators()[0];
        let term = &(&kron(&id, &clock(j, j)) + &kron(&id, &clock(j - 1, j - 1)))
            - &(&kron(v, &clock(j, j - 1)) + &kron(&v.adjoint(), &clock(j - 1, j)));
        h_prop = &h_prop + &term.scale_real(0.5);
    }

    let h_out = kron(&first_qubit_projector(h, 0), &clock(steps, steps));
    let h_total = &(&h_in + &h_prop) + &h_out;
    Ok(ClockHamiltonianParts {
        h_in,
        h_prop,
        h_out,
        h_total,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compiler::circuit::{hadamard, pauli_x, swap, ChannelGate};
    use crate::linalg::hermitian_eigs;

    #[test]
    fn identity_verifier_projects_on_first_proof_qubit() {
        let c = GeneralCircuit::new(3, 2).unwrap();
        let m = verifier_operator(&c).unwrap();
        assert_eq!(m, ComplexMatrix::diag_real(&[0.0, 0.0, 1.0, 1.0]));
        assert!((mixed_state_acceptance(&c).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn rejecting_verifier_is_zero() {
        let c = GeneralCircuit::with_gates(2, 1, vec![ChannelGate::reset(2, 0).unwrap()]).unwrap();
        assert!(verifier_operator(&c).unwrap().frobenius_norm() < 1e-15);
        assert_eq!(mixed_state_acceptance(&c).unwrap(), 0.0);
    }

    #[test]
    fn clock_ground_energy_vanishes_for_perfect_verifier() {
        let c = GeneralCircuit::with_gates(
            2,
            1,
            vec![
                ChannelGate::unitary(2, &[1], pauli_x()).unwrap(),
                ChannelGate::unitary(2, &[0, 1], swap()).unwrap(),
            ],
        )
        .unwrap();
        let parts = clock_hamiltonian(&c).unwrap();
        let e = hermitian_eigs(&parts.h_total).unwrap();
        assert!(e.last().unwrap().abs() < 1e-9);
    }

    #[test]
    fn coin_verifier_has_positive_ground_energy() {
        let c = GeneralCircuit::with_gates(
            2,
            1,
            vec![
                ChannelGate::unitary(2, &[1], hadamard()).unwrap(),
                ChannelGate::unitary(2, &[0, 1], swap()).unwrap(),
            ],
        )
        .unwrap();
        let e = hermitian_eigs(&clock_hamiltonian(&c).unwrap().h_total).unwrap();
        assert!(*e.last().unwrap() > 1e-3);
    }

    #[test]
    fn non_unitary_gate_rejected() {
        let c = GeneralCircuit::with_gates(1, 1, vec![ChannelGate::measure(1, 0).unwrap()]).unwrap();
        assert!(matches!(clock_hamiltonian(&c), Err(Error::NonUnitary(_))));
    }
}
