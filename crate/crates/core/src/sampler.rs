//! Rejection sampling of output bitstrings with an empirical supremum bound.
//!
//! Candidates are uniform over all `N = 2^n` bitstrings. A candidate `X` is
//! accepted with probability `min(1, p(X) N / M)`, after which the bound is
//! raised to `max(M, p(X) N)`. Warm-up iterations run the same loop and
//! discard their output.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::circuit::{Bitstring, Circuit};
use crate::pipeline::{AmplitudeOptions, Simulation};
use crate::Error;

pub const DEFAULT_WARMUP: usize = 64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SamplerError {
    #[error("probability must be non-negative, got {0}")]
    NegativeProbability(f64),
    #[error("bound must be at least 1, got {0}")]
    BadBound(f64),
}

/// `max(m, p_x * n)`.
pub fn update_bound(m: f64, p_x: f64, n: f64) -> Result<f64, SamplerError> {
    if p_x < 0.0 || p_x.is_nan() {
        return Err(SamplerError::NegativeProbability(p_x));
    }
    Ok(m.max(p_x * n))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplerOptions {
    pub amplitude: AmplitudeOptions,
    /// Starting value of `M`.
    pub initial_bound: f64,
}

impl Default for SamplerOptions {
    fn default() -> Self {
        SamplerOptions { amplitude: AmplitudeOptions::default(), initial_bound: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceEntry {
    pub candidate: Bitstring,
    pub p: f64,
    /// `M` after this iteration's update.
    pub bound: f64,
    pub accepted: bool,
    pub warmup: bool,
}

/// Running state of one sampling run.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplerState {
    pub bound: f64,
    /// Candidate count, `2^n`.
    pub n: f64,
    pub seed: u64,
    pub history: Vec<TraceEntry>,
    pub evaluations: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleRun {
    pub samples: Vec<Bitstring>,
    pub state: SamplerState,
}

/// Samples with the full trace and evaluation count.
pub fn sample_run(
    circuit: &Circuit,
    num_samples: usize,
    warmup: usize,
    seed: u64,
    opts: &SamplerOptions,
) -> Result<SampleRun, Error> {
    if opts.initial_bound.is_nan() || opts.initial_bound < 1.0 {
        return Err(SamplerError::BadBound(opts.initial_bound).into());
    }
    let n_qubits = circuit.num_qubits;
    let mut state = SamplerState {
        bound: opts.initial_bound,
        n: 2f64.powi(n_qubits as i32),
        seed,
        history: Vec::new(),
        evaluations: 0,
    };
    let sim = Simulation::prepare(circuit, &opts.amplitude)?;
    let engine = sim.engine(opts.amplitude.workers)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples = Vec::with_capacity(num_samples);
    let mut iteration = 0usize;
    while samples.len() < num_samples || iteration < warmup {
        let candidate = Bitstring::new((0..n_qubits).map(|_| rng.random::<bool>()).collect());
        let report = engine.run(std::slice::from_ref(&candidate))?;
        state.evaluations += 1;
        let p = report.amplitudes[0].1.norm_sqr();
        let ratio = (p * state.n / state.bound).min(1.0);
        let accepted = rng.random::<f64>() < ratio;
        state.bound = update_bound(state.bound, p, state.n)?;
        let in_warmup = iteration < warmup;
        if accepted && !in_warmup {
            samples.push(candidate.clone());
        }
        state.history.push(TraceEntry { candidate, p, bound: state.bound, accepted, warmup: in_warmup });
        iteration += 1;
    }
    Ok(SampleRun { samples, state })
}

/// Returns exactly `num_samples` accepted bitstrings after `warmup` discarded
/// iterations.
pub fn draw_samples(
    circuit: &Circuit,
    num_samples: usize,
    warmup: usize,
    seed: u64,
    opts: &SamplerOptions,
) -> Result<Vec<Bitstring>, Error> {
    Ok(sample_run(circuit, num_samples, warmup, seed, opts)?.samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::generate_ghz;
    use crate::oracle::statevector;

    #[test]
    fn bound_examples() {
        assert_eq!(update_bound(1.0, 0.5, 8.0), Ok(4.0));
        assert_eq!(update_bound(4.0, 0.1, 8.0), Ok(4.0));
        assert_eq!(update_bound(1.0, 0.0, 8.0), Ok(1.0));
        assert!(update_bound(1.0, -0.1, 8.0).is_err());
    }

    #[test]
    fn zero_samples_runs_only_warmup() {
        let c = generate_ghz(3).unwrap();
        let run = sample_run(&c, 0, 5, 1, &SamplerOptions::default()).unwrap();
        assert!(run.samples.is_empty());
        assert_eq!(run.state.evaluations, 5);
        let none = sample_run(&c, 0, 0, 1, &SamplerOptions::default()).unwrap();
        assert_eq!(none.state.evaluations, 0);
    }

    #[test]
    fn point_distribution() {
        let c = Circuit::new(1).unwrap().with("x", &[0]).unwrap();
        let s = draw_samples(&c, 50, 3, 9, &SamplerOptions::default()).unwrap();
        assert_eq!(s.len(), 50);
        assert!(s.iter().all(|b| b.to_string() == "1"));
    }

    #[test]
    fn trace_invariants() {
        let c = generate_ghz(3).unwrap();
        let run = sample_run(&c, 200, 16, 4, &SamplerOptions::default()).unwrap();
        assert_eq!(run.state.evaluations as usize, run.state.history.len());
        let mut prev = 1.0;
        for e in &run.state.history {
            assert!(e.bound >= prev && e.bound >= e.p * 8.0);
            prev = e.bound;
        }
        let kept = run.state.history.iter().filter(|e| e.accepted && !e.warmup).count();
        assert_eq!(kept, 200);
    }

    #[test]
    fn seeded_runs_repeat() {
        let c = generate_ghz(4).unwrap();
        let a = draw_samples(&c, 100, 8, 77, &SamplerOptions::default()).unwrap();
        let b = draw_samples(&c, 100, 8, 77, &SamplerOptions::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn ghz_halves() {
        let c = generate_ghz(3).unwrap();
        let s = draw_samples(&c, 10_000, DEFAULT_WARMUP, 11, &SamplerOptions::default()).unwrap();
        let ones = s.iter().filter(|b| b.to_string() == "111").count();
        let zeros = s.iter().filter(|b| b.to_string() == "000").count();
        assert_eq!(ones + zeros, 10_000);
        let tvd = (ones as f64 / 10_000.0 - 0.5).abs();
        assert!(tvd <= 0.03, "tvd {tvd}");
    }

    #[test]
    fn fixed_supremum_matches_distribution() {
        let c = crate::circuit::generate_rqc(2, 2, 6, 3).unwrap();
        let probs = statevector(&c).unwrap().probabilities();
        let sup = probs.iter().cloned().fold(0.0, f64::max) * 16.0;
        let opts = SamplerOptions { initial_bound: sup, ..Default::default() };
        let s = draw_samples(&c, 20_000, 0, 5, &opts).unwrap();
        let mut counts = [0usize; 16];
        for b in &s {
            counts[b.index()] += 1;
        }
        let tvd: f64 = counts.iter().zip(&probs).map(|(&k, p)| (k as f64 / 20_000.0 - p).abs()).sum::<f64>() / 2.0;
        assert!(tvd < 0.03, "tvd {tvd}");
    }
}
