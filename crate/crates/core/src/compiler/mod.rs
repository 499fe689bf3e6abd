//! Circuits with intermediate measurements, their compilation to
//! measurement-free matrix instances, verifier operators, the clock
//! Hamiltonian and the Markov-chain encoding.

mod circuit;
mod encode;
mod markov;
mod random;
mod verifier;

pub use circuit::{
    accept_probability, acceptance_with_proof, append_cleanup, cleanup_gates, cnot, embed, evolve,
    hadamard, has_cleanup, initial_state, pauli_x, proof_state, ry, sample_acceptance,
    simulate_acceptance, swap, ChannelGate, GateKind, GeneralCircuit,
};
pub use encode::{circuit_to_itmatprod, circuit_to_itmatprod_with, eliminate_measurements, AcceptanceThresholds};
pub use markov::{hit_frequency, markov_to_matpow, random_chain, StochasticChain, STOCHASTIC_TOL};
pub use random::{random_bounded_error_circuit, random_primitive, random_unitary_verifier, random_verifier};
pub use verifier::{clock_hamiltonian, mixed_state_acceptance, verifier_operator, ClockHamiltonianParts};

/// Bernoulli sample count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MonteCarloEstimate {
    pub hits: u64,
    pub trials: u64,
}

impl MonteCarloEstimate {
    pub fn mean(&self) -> f64 {
        self.hits as f64 / self.trials as f64
    }

    /// Standard deviation of the mean of `trials` Bernoulli(`p`) draws.
    pub fn sigma(p: f64, trials: u64) -> f64 {
        (p * (1.0 - p) / trials as f64).max(0.0).sqrt()
    }

    /// `|mean − p| ≤ k·σ(p)`.
    pub fn within(&self, p: f64, k: f64) -> bool {
        (self.mean() - p).abs() <= k * Self::sigma(p, self.trials)
    }
}
