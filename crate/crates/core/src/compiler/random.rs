use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

use super::circuit::{
    append_cleanup, cnot, hadamard, pauli_x, ry, simulate_acceptance, swap, ChannelGate, GateKind,
    GeneralCircuit,
};

fn distinct_pair<R: Rng>(h: usize, rng: &mut R) -> (usize, usize) {
    let a = rng.random_range(0..h);
    let b = (a + rng.random_range(1..h)) % h;
    (a, b)
}

/// One gate from a mostly classical palette. `nonunitary` forces a
/// measurement, reset or classically controlled gate.
pub fn random_primitive<R: Rng>(h: usize, nonunitary: bool, rng: &mut R) -> Result<ChannelGate> {
    let q = rng.random_range(0..h);
    let pick = if nonunitary { rng.random_range(0..3) } else { rng.random_range(0..10) };
    match pick {
        0 => ChannelGate::measure(h, q),
        1 => ChannelGate::reset(h, q),
        2 if h > 1 => {
            let (c, t) = distinct_pair(h, rng);
            ChannelGate::classically_controlled(h, c, &[t], &pauli_x())
        }
        2 => ChannelGate::measure(h, q),
        3 | 4 => ChannelGate::unitary(h, &[q], pauli_x()),
        5 => ChannelGate::unitary(h, &[q], hadamard()),
        6 => ChannelGate::unitary(h, &[q], ry(rng.random_range(0.05..0.5))),
        7 | 8 if h > 1 => {
            let (c, t) = distinct_pair(h, rng);
            ChannelGate::unitary(h, &[c, t], cnot())
        }
        9 if h > 1 => {
            let (a, b) = distinct_pair(h, rng);
            ChannelGate::unitary(h, &[a, b], swap())
        }
        _ => ChannelGate::unitary(h, &[q], pauli_x()),
    }
}

/// Circuit of `primitives` palette gates, fused into `body_gates` gates,
/// with the cleanup suffix. Draws are repeated until the acceptance
/// probability is at most `margin` or at least `1 − margin`, and a final X
/// on qubit 0 sets the requested side. At least one primitive is non-unitary.
pub fn random_bounded_error_circuit(
    h: usize,
    primitives: usize,
    body_gates: usize,
    margin: f64,
    accept: bool,
    seed: u64,
) -> Result<GeneralCircuit> {
    if primitives == 0 || body_gates == 0 || body_gates > primitives + 1 {
        return Err(Error::InvalidParams(format!(
            "{primitives} primitives into {body_gates} gates"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..10_000 {
        let forced = rng.random_range(0..primitives);
        let mut prims = (0..primitives)
            .map(|i| random_primitive(h, i == forced, &mut rng))
            .collect::<Result<Vec<_>>>()?;
        let p = simulate_acceptance(&GeneralCircuit::with_gates(h, 0, prims.clone())?)?;
        if p > margin && p < 1.0 - margin {
            continue;
        }
        if (p >= 1.0 - margin) != accept {
            prims.push(ChannelGate::unitary(h, &[0], pauli_x())?);
        }
        let body = fuse_into(h, &prims, body_gates)?;
        return append_cleanup(&GeneralCircuit::with_gates(h, 0, body)?);
    }
    Err(Error::Infeasible("no bounded-error draw".into()))
}

/// Splits `gates` into `groups` consecutive runs and fuses each run of more
/// than one gate.
fn fuse_into(h: usize, gates: &[ChannelGate], groups: usize) -> Result<Vec<ChannelGate>> {
    if groups >= gates.len() {
        return Ok(gates.to_vec());
    }
    let base = gates.len() / groups;
    let extra = gates.len() % groups;
    let mut out = Vec::with_capacity(groups);
    let mut i = 0;
    for g in 0..groups {
        let len = base + usize::from(g < extra);
        let run = &gates[i..i + len];
        out.push(if len == 1 { run[0].clone() } else { ChannelGate::fuse(h, run)? });
        i += len;
    }
    Ok(out)
}

/// Random unitary verifier on `h` qubits with `merlin` proof qubits.
pub fn random_unitary_verifier(h: usize, merlin: usize, gates: usize, seed: u64) -> Result<GeneralCircuit> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c = GeneralCircuit::new(h, merlin)?;
    while c.gates.len() < gates {
        let g = random_primitive(h, false, &mut rng)?;
        if g.kind == GateKind::Unitary {
            c.push(g)?;
        }
    }
    Ok(c)
}

/// Random general verifier mixing unitary and non-unitary palette gates.
pub fn random_verifier(h: usize, merlin: usize, gates: usize, seed: u64) -> Result<GeneralCircuit> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let body = (0..gates)
        .map(|_| {
            let nonunitary = rng.random_bool(0.3);
            random_primitive(h, nonunitary, &mut rng)
        })
        .collect::<Result<Vec<_>>>()?;
    GeneralCircuit::with_gates(h, merlin, body)
}
