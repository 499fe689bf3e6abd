use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::channel::KrausSet;
use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, C64, ONE, ZERO};
use crate::par;

use super::MonteCarloEstimate;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GateKind {
    Unitary,
    Kraus,
    Measure,
    Reset,
}

impl GateKind {
    pub fn name(self) -> &'static str {
        match self {
            GateKind::Unitary => "unitary",
            GateKind::Kraus => "kraus",
            GateKind::Measure => "measure",
            GateKind::Reset => "reset",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "unitary" => Ok(GateKind::Unitary),
            "kraus" => Ok(GateKind::Kraus),
            "measure" => Ok(GateKind::Measure),
            "reset" => Ok(GateKind::Reset),
            other => Err(Error::UnknownName(other.to_string())),
        }
    }
}

/// A channel on the full register. `local` keeps the operators as given on
/// `targets` (first target most significant); `kraus` is their embedding.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelGate {
    pub kind: GateKind,
    pub targets: Vec<usize>,
    pub local: Vec<ComplexMatrix>,
    pub kraus: KrausSet,
}

fn projector(bit: usize) -> ComplexMatrix {
    ComplexMatrix::unit(2, bit, bit)
}

pub fn pauli_x() -> ComplexMatrix {
    ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]])
}

pub fn hadamard() -> ComplexMatrix {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    ComplexMatrix::from_real_rows(&[&[r, r], &[r, -r]])
}

pub fn ry(theta: f64) -> ComplexMatrix {
    let (s, c) = (theta / 2.0).sin_cos();
    ComplexMatrix::from_real_rows(&[&[c, -s], &[s, c]])
}

pub fn cnot() -> ComplexMatrix {
    let mut u = ComplexMatrix::zeros(4, 4);
    for (r, c) in [(0, 0), (1, 1), (2, 3), (3, 2)] {
        u[(r, c)] = ONE;
    }
    u
}

pub fn swap() -> ComplexMatrix {
    let mut u = ComplexMatrix::zeros(4, 4);
    for (r, c) in [(0, 0), (1, 2), (2, 1), (3, 3)] {
        u[(r, c)] = ONE;
    }
    u
}

/// Embeds an operator on `targets` into `h` qubits; qubit 0 is the most
/// significant bit of the basis index.
pub fn embed(local: &ComplexMatrix, targets: &[usize], h: usize) -> Result<ComplexMatrix> {
    let k = targets.len();
    if local.rows() != 1 << k || local.cols() != 1 << k {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} operator on {k} qubits",
            local.rows(),
            local.cols()
        )));
    }
    for (i, &q) in targets.iter().enumerate() {
        if q >= h {
            return Err(Error::IndexOutOfRange { index: q, dim: h });
        }
        if targets[..i].contains(&q) {
            return Err(Error::MalformedCircuit(format!("repeated target {q}")));
        }
    }
    let shifts: Vec<usize> = targets.iter().map(|&q| h - 1 - q).collect();
    let mask: usize = shifts.iter().map(|s| 1 << s).sum();
    let local_index = |i: usize| -> usize {
        shifts
            .iter()
            .enumerate()
            .map(|(r, &s)| ((i >> s) & 1) << (k - 1 - r))
            .sum()
    };
    let d = 1 << h;
    Ok(ComplexMatrix::from_fn(d, d, |i, j| {
        if i & !mask == j & !mask {
            local[(local_index(i), local_index(j))]
        } else {
            ZERO
        }
    }))
}

impl ChannelGate {
    /// Builds a gate from its serialized parts. Measure and reset gates take
    /// their operators from the kind and accept an empty `local`.
    pub fn from_parts(kind: GateKind, h: usize, targets: Vec<usize>, local: Vec<ComplexMatrix>) -> Result<Self> {
        let local = match kind {
            GateKind::Measure | GateKind::Reset => {
                if targets.len() != 1 {
                    return Err(Error::MalformedCircuit(format!("{} acts on one qubit", kind.name())));
                }
                let canonical = if kind == GateKind::Measure {
                    vec![projector(0), projector(1)]
                } else {
                    vec![projector(0), ComplexMatrix::unit(2, 0, 1)]
                };
                if !local.is_empty() && local != canonical {
                    return Err(Error::MalformedCircuit(format!(
                        "{} gate with non-canonical operators",
                        kind.name()
                    )));
                }
                canonical
            }
            GateKind::Unitary if local.len() != 1 => {
                return Err(Error::MalformedCircuit("unitary gate needs exactly one matrix".into()));
            }
            _ => local,
        };
        if local.is_empty() {
            return Err(Error::MalformedCircuit("gate without operators".into()));
        }
        let ops = local
            .iter()
            .map(|k| embed(k, &targets, h))
            .collect::<Result<Vec<_>>>()?;
        let kraus = KrausSet::new(ops)?;
        if kind == GateKind::Unitary {
            let u = &kraus.operators()[0];
            let residual = (u * &u.adjoint()).max_abs_diff(&ComplexMatrix::identity(u.rows()));
            if residual > crate::channel::COMPLETENESS_TOL {
                return Err(Error::NonUnitary(format!("residual {residual:e}")));
            }
        }
        Ok(Self {
            kind,
            targets,
            local,
            kraus,
        })
    }

    pub fn unitary(h: usize, targets: &[usize], u: ComplexMatrix) -> Result<Self> {
        Self::from_parts(GateKind::Unitary, h, targets.to_vec(), vec![u])
    }

    pub fn kraus(h: usize, targets: &[usize], ops: Vec<ComplexMatrix>) -> Result<Self> {
        Self::from_parts(GateKind::Kraus, h, targets.to_vec(), ops)
    }

    /// Computational-basis measurement whose outcome is discarded.
    pub fn measure(h: usize, q: usize) -> Result<Self> {
        Self::from_parts(GateKind::Measure, h, vec![q], vec![])
    }

    /// Measure, and flip on outcome 1.
    pub fn reset(h: usize, q: usize) -> Result<Self> {
        Self::from_parts(GateKind::Reset, h, vec![q], vec![])
    }

    /// Measures `control` and applies `u` to `targets` when the outcome is 1.
    pub fn classically_controlled(h: usize, control: usize, targets: &[usize], u: &ComplexMatrix) -> Result<Self> {
        let id = ComplexMatrix::identity(u.rows());
        let ops = vec![
            crate::matrix::kron(&projector(0), &id),
            crate::matrix::kron(&projector(1), u),
        ];
        let mut all = vec![control];
        all.extend_from_slice(targets);
        Self::kraus(h, &all, ops)
    }

    /// Sequential composition into one full-register Kraus gate; zero
    /// operators are dropped.
    pub fn fuse(h: usize, gates: &[ChannelGate]) -> Result<Self> {
        let mut set = KrausSet::identity(1 << h);
        for g in gates {
            set = set.then(&g.kraus);
        }
        let ops: Vec<ComplexMatrix> = set
            .operators()
            .iter()
            .filter(|k| k.frobenius_norm() > 1e-14)
            .cloned()
            .collect();
        Self::kraus(h, &(0..h).collect::<Vec<_>>(), ops)
    }

    pub fn is_unitary(&self) -> bool {
        self.kind == GateKind::Unitary
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneralCircuit {
    pub h: usize,
    pub gates: Vec<ChannelGate>,
    /// Proof qubits, the leading `merlin_qubits` of the register.
    pub merlin_qubits: usize,
}

impl GeneralCircuit {
    pub fn new(h: usize, merlin_qubits: usize) -> Result<Self> {
        if h == 0 || h > 8 {
            return Err(Error::MalformedCircuit(format!("{h} qubits (supported: 1..=8)")));
        }
        if merlin_qubits > h {
            return Err(Error::MalformedCircuit(format!("{merlin_qubits} proof qubits exceed {h}")));
        }
        Ok(Self {
            h,
            gates: vec![],
            merlin_qubits,
        })
    }

    pub fn with_gates(h: usize, merlin_qubits: usize, gates: Vec<ChannelGate>) -> Result<Self> {
        let mut c = Self::new(h, merlin_qubits)?;
        for g in gates {
            c.push(g)?;
        }
        Ok(c)
    }

    pub fn push(&mut self, gate: ChannelGate) -> Result<()> {
        if gate.kraus.dim() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "gate on dimension {} in a {}-qubit circuit",
                gate.kraus.dim(),
                self.h
            )));
        }
        self.gates.push(gate);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        1 << self.h
    }

    /// Index of `|10…0⟩`.
    pub fn accept_index(&self) -> usize {
        1 << (self.h - 1)
    }

    pub fn validate(&self) -> Result<()> {
        if self.merlin_qubits > self.h {
            return Err(Error::MalformedCircuit("too many proof qubits".into()));
        }
        for g in &self.gates {
            if g.kraus.dim() != self.dim() {
                return Err(Error::DimensionMismatch("gate dimension".into()));
            }
            let r = g.kraus.completeness_residual()?;
            if r > crate::channel::COMPLETENESS_TOL {
                return Err(Error::IncompleteKraus { residual: r });
            }
        }
        Ok(())
    }
}

/// Dephasing of qubit 0 followed by a reset of every other qubit.
pub fn cleanup_gates(h: usize) -> Result<Vec<ChannelGate>> {
    let mut gates = vec![ChannelGate::measure(h, 0)?];
    for q in 1..h {
        gates.push(ChannelGate::reset(h, q)?);
    }
    Ok(gates)
}

pub fn append_cleanup(c: &GeneralCircuit) -> Result<GeneralCircuit> {
    let mut out = c.clone();
    for g in cleanup_gates(c.h)? {
        out.push(g)?;
    }
    Ok(out)
}

pub fn has_cleanup(c: &GeneralCircuit) -> bool {
    let Ok(suffix) = cleanup_gates(c.h) else {
        return false;
    };
    c.gates.len() >= suffix.len() && c.gates[c.gates.len() - suffix.len()..] == suffix[..]
}

/// `|0^h⟩⟨0^h|`.
pub fn initial_state(h: usize) -> ComplexMatrix {
    ComplexMatrix::unit(1 << h, 0, 0)
}

/// `|ψ⟩⟨ψ| ⊗ |0⟩⟨0|` for a proof on the leading qubits.
pub fn proof_state(c: &GeneralCircuit, psi: &[C64]) -> Result<ComplexMatrix> {
    let w = c.h - c.merlin_qubits;
    if psi.len() != 1 << c.merlin_qubits {
        return Err(Error::DimensionMismatch(format!(
            "proof of length {} for {} qubits",
            psi.len(),
            c.merlin_qubits
        )));
    }
    let d = c.dim();
    Ok(ComplexMatrix::from_fn(d, d, |i, j| {
        if i & ((1 << w) - 1) == 0 && j & ((1 << w) - 1) == 0 {
            psi[i >> w] * psi[j >> w].conj()
        } else {
            ZERO
        }
    }))
}

pub fn evolve(c: &GeneralCircuit, rho: &ComplexMatrix) -> ComplexMatrix {
    c.gates.iter().fold(rho.clone(), |r, g| g.kraus.apply(&r))
}

/// Probability that qubit 0 reads 1.
pub fn accept_probability(rho: &ComplexMatrix) -> f64 {
    let d = rho.rows();
    (d / 2..d).map(|i| rho[(i, i)].re).sum()
}

/// Acceptance probability from `|0^h⟩` by density-matrix evolution.
pub fn simulate_acceptance(c: &GeneralCircuit) -> Result<f64> {
    if c.merlin_qubits != 0 {
        return Err(Error::Precondition("circuit expects a proof".into()));
    }
    c.validate()?;
    Ok(accept_probability(&evolve(c, &initial_state(c.h))))
}

/// Acceptance probability on proof `psi`.
pub fn acceptance_with_proof(c: &GeneralCircuit, psi: &[C64]) -> Result<f64> {
    c.validate()?;
    Ok(accept_probability(&evolve(c, &proof_state(c, psi)?)))
}

const SHOTS_PER_CHUNK: u64 = 4096;

fn chunk_rng(seed: u64, chunk: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk as u64);
    rng
}

/// Samples one Kraus branch with probability `‖Kψ‖²` and renormalizes.
fn branch<R: Rng>(kraus: &KrausSet, psi: &[C64], rng: &mut R) -> Vec<C64> {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last = None;
    for k in kraus.operators() {
        let v = k.matvec(psi).expect("dimension checked");
        let p: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if p <= 0.0 {
            continue;
        }
        acc += p;
        last = Some((v, p));
        if u < acc {
            break;
        }
    }
    let (v, p) = last.expect("complete Kraus set has a nonzero branch");
    let s = p.sqrt();
    v.into_iter().map(|z| z / s).collect()
}

/// Quantum-trajectory estimate of the acceptance probability. Shots are
/// split into fixed chunks with their own streams, so the result does not
/// depend on the degree of parallelism.
pub fn sample_acceptance(c: &GeneralCircuit, shots: u64, seed: u64) -> Result<MonteCarloEstimate> {
    if c.merlin_qubits != 0 {
        return Err(Error::Precondition("circuit expects a proof".into()));
    }
    c.validate()?;
    let chunks = shots.div_ceil(SHOTS_PER_CHUNK) as usize;
    let hits: u64 = par::map_range(chunks, |k| {
        let mut rng = chunk_rng(seed, k);
        let n = SHOTS_PER_CHUNK.min(shots - k as u64 * SHOTS_PER_CHUNK);
        let mut hits = 0;
        for _ in 0..n {
            let mut psi = vec![ZERO; c.dim()];
            psi[0] = ONE;
            for g in &c.gates {
                psi = branch(&g.kraus, &psi, &mut rng);
            }
            let p1: f64 = psi[c.dim() / 2..].iter().map(|z| z.norm_sqr()).sum();
            if rng.random::<f64>() < p1 {
                hits += 1;
            }
        }
        hits
    })
    .into_iter()
    .sum();
    Ok(MonteCarloEstimate { hits, trials: shots })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reference::naive_multiply;

    #[test]
    fn x_on_first_qubit_accepts() {
        let c = GeneralCircuit::with_gates(2, 0, vec![ChannelGate::unitary(2, &[0], pauli_x()).unwrap()]).unwrap();
        assert!((simulate_acceptance(&c).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn hadamard_then_measure_is_half() {
        let c = GeneralCircuit::with_gates(
            1,
            0,
            vec![ChannelGate::unitary(1, &[0], hadamard()).unwrap(), ChannelGate::measure(1, 0).unwrap()],
        )
        .unwrap();
        assert!((simulate_acceptance(&c).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn embedding_matches_kronecker_layout() {
        let x = pauli_x();
        let i2 = ComplexMatrix::identity(2);
        let on_first = embed(&x, &[0], 2).unwrap();
        assert_eq!(on_first, crate::matrix::kron(&x, &i2));
        let on_second = embed(&x, &[1], 2).unwrap();
        assert_eq!(on_second, crate::matrix::kron(&i2, &x));
        // Reversed targets of CNOT: control on qubit 1, target qubit 0.
        let rev = embed(&cnot(), &[1, 0], 2).unwrap();
        let sw = swap();
        assert_eq!(rev, naive_multiply(&naive_multiply(&sw, &cnot()), &sw));
    }

    #[test]
    fn cleanup_of_empty_circuit_is_ground_state() {
        let c = append_cleanup(&GeneralCircuit::new(3, 0).unwrap()).unwrap();
        let rho = evolve(&c, &initial_state(3));
        assert_eq!(rho, initial_state(3));
        assert!(has_cleanup(&c));
        assert!(!has_cleanup(&GeneralCircuit::new(3, 0).unwrap()));
    }

    #[test]
    fn x_then_cleanup_is_accept_state() {
        let mut c = GeneralCircuit::new(2, 0).unwrap();
        c.push(ChannelGate::unitary(2, &[0], pauli_x()).unwrap()).unwrap();
        c.push(ChannelGate::unitary(2, &[1], pauli_x()).unwrap()).unwrap();
        let c = append_cleanup(&c).unwrap();
        let rho = evolve(&c, &initial_state(2));
        assert!(rho.max_abs_diff(&ComplexMatrix::unit(4, 2, 2)) < 1e-15);
    }

    #[test]
    fn classical_control_flips_on_one() {
        let g = ChannelGate::classically_controlled(2, 1, &[0], &pauli_x()).unwrap();
        let c = GeneralCircuit::with_gates(
            2,
            0,
            vec![ChannelGate::unitary(2, &[1], hadamard()).unwrap(), g],
        )
        .unwrap();
        assert!((simulate_acceptance(&c).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn incomplete_kraus_rejected() {
        let r = ChannelGate::kraus(1, &[0], vec![projector(0)]);
        assert!(matches!(r, Err(Error::IncompleteKraus { .. })));
    }

    #[test]
    fn trajectories_agree_with_density_matrix() {
        let c = GeneralCircuit::with_gates(
            2,
            0,
            vec![
                ChannelGate::unitary(2, &[1], ry(1.1)).unwrap(),
                ChannelGate::classically_controlled(2, 1, &[0], &hadamard()).unwrap(),
                ChannelGate::reset(2, 1).unwrap(),
            ],
        )
        .unwrap();
        let p = simulate_acceptance(&c).unwrap();
        let est = sample_acceptance(&c, 20_000, 3).unwrap();
        assert!((est.mean() - p).abs() <= 3.0 * MonteCarloEstimate::sigma(p, 20_000));
    }
}
