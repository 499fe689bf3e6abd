use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, C64};
use crate::par;
use crate::problem::{ConditionParams, ProblemInstance, ProblemKind, Threshold};

use super::MonteCarloEstimate;

pub const STOCHASTIC_TOL: f64 = 1e-9;

/// A Markov chain with column-stochastic transitions: `transition[to, from]`.
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticChain {
    pub transition: ComplexMatrix,
    pub start: usize,
    pub accept: usize,
    pub steps: usize,
}

impl StochasticChain {
    pub fn column_stochastic(transition: ComplexMatrix, start: usize, accept: usize, steps: usize) -> Result<Self> {
        let d = transition.dim()?;
        for &i in &[start, accept] {
            if i >= d {
                return Err(Error::IndexOutOfRange { index: i, dim: d });
            }
        }
        for c in 0..d {
            let mut sum = 0.0;
            for r in 0..d {
                let z = transition[(r, c)];
                if z.im != 0.0 || z.re < 0.0 || !z.re.is_finite() {
                    return Err(Error::NotStochastic(format!("entry ({r}, {c}) = {z}")));
                }
                sum += z.re;
            }
            if (sum - 1.0).abs() > STOCHASTIC_TOL {
                return Err(Error::NotStochastic(format!("column {c} sums to {sum}")));
            }
        }
        Ok(Self {
            transition,
            start,
            accept,
            steps,
        })
    }

    /// Accepts `transition[from, to]` and stores its transpose.
    pub fn row_stochastic(transition: &ComplexMatrix, start: usize, accept: usize, steps: usize) -> Result<Self> {
        Self::column_stochastic(transition.transpose(), start, accept, steps)
    }

    pub fn dim(&self) -> usize {
        self.transition.rows()
    }
}

/// MATPOW instance whose entry is the probability of being at `accept`
/// after `steps` steps from `start`.
pub fn markov_to_matpow(chain: &StochasticChain) -> Result<ProblemInstance> {
    let d = chain.dim();
    Ok(ProblemInstance {
        kind: ProblemKind::MatPow,
        params: ConditionParams::new(d, chain.steps, (d as f64).sqrt(), 1.0 / 3.0)?,
        matrices: vec![chain.transition.clone()],
        s: chain.accept,
        t: chain.start,
        pairs: vec![],
        b: Threshold::Real(2.0 / 3.0),
    })
}

const WALKS_PER_CHUNK: u64 = 8192;

/// Fraction of simulated walks that end at `accept`.
pub fn hit_frequency(chain: &StochasticChain, trials: u64, seed: u64) -> Result<MonteCarloEstimate> {
    let d = chain.dim();
    let columns = (0..d)
        .map(|c| {
            WeightedIndex::new((0..d).map(|r| chain.transition[(r, c)].re))
                .map_err(|e| Error::NotStochastic(format!("column {c}: {e}")))
        })
        .collect::<Result<Vec<_>>>()?;
    let chunks = trials.div_ceil(WALKS_PER_CHUNK) as usize;
    let hits = par::map_range(chunks, |k| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(k as u64);
        let n = WALKS_PER_CHUNK.min(trials - k as u64 * WALKS_PER_CHUNK);
        (0..n)
            .filter(|_| {
                let mut x = chain.start;
                for _ in 0..chain.steps {
                    x = columns[x].sample(&mut rng);
                }
                x == chain.accept
            })
            .count() as u64
    })
    .into_iter()
    .sum();
    Ok(MonteCarloEstimate { hits, trials })
}

/// Random chain on `d` states: each column spreads its mass over 1 to 4
/// random successors.
pub fn random_chain(d: usize, steps: usize, seed: u64) -> Result<StochasticChain> {
    if d == 0 {
        return Err(Error::InvalidParams("empty state space".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut a = ComplexMatrix::zeros(d, d);
    for c in 0..d {
        let k = rng.random_range(1..=4.min(d));
        let w: Vec<f64> = (0..k).map(|_| rng.random_range(0.1..1.0)).collect();
        let total: f64 = w.iter().sum();
        for x in w {
            let r = rng.random_range(0..d);
            a[(r, c)] += C64::new(x / total, 0.0);
        }
    }
    let start = rng.random_range(0..d);
    let accept = rng.random_range(0..d);
    StochasticChain::column_stochastic(a, start, accept, steps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::entry_value;

    #[test]
    fn identity_chain_stays_put() {
        let c = StochasticChain::column_stochastic(ComplexMatrix::identity(3), 1, 1, 5).unwrap();
        assert!((entry_value(&markov_to_matpow(&c).unwrap()).unwrap().re - 1.0).abs() < 1e-15);
        let c = StochasticChain::column_stochastic(ComplexMatrix::identity(3), 1, 2, 5).unwrap();
        assert_eq!(entry_value(&markov_to_matpow(&c).unwrap()).unwrap().re, 0.0);
    }

    #[test]
    fn uniform_two_state_chain() {
        let a = ComplexMatrix::from_real_rows(&[&[0.5, 0.5], &[0.5, 0.5]]);
        for t in 1..6 {
            let c = StochasticChain::column_stochastic(a.clone(), 1, 0, t).unwrap();
            assert!((entry_value(&markov_to_matpow(&c).unwrap()).unwrap().re - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn non_stochastic_rejected() {
        let a = ComplexMatrix::from_real_rows(&[&[0.5, 0.5], &[0.6, 0.5]]);
        assert!(matches!(
            StochasticChain::column_stochastic(a.clone(), 0, 0, 1),
            Err(Error::NotStochastic(_))
        ));
        let rows = ComplexMatrix::from_real_rows(&[&[0.2, 0.8], &[1.0, 0.0]]);
        assert!(StochasticChain::row_stochastic(&rows, 0, 1, 1).is_ok());
    }

    #[test]
    fn walk_frequency_tracks_entry() {
        let c = random_chain(6, 7, 2).unwrap();
        let p = entry_value(&markov_to_matpow(&c).unwrap()).unwrap().re;
        let est = hit_frequency(&c, 50_000, 9).unwrap();
        assert!((est.mean() - p).abs() <= 3.0 * MonteCarloEstimate::sigma(p, 50_000));
    }
}
