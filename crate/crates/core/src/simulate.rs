//! Running a synthesized machine: evolve, measure the probe, post-select on `P₀`.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gram::Branch;
use crate::synthesis::{postselected_fidelity, probe_component, probe_distribution, SynthesisResult};
use crate::state::QubitState;

/// Success probabilities below this leave the post-selected state undefined.
pub const MIN_SUCCESS_PROB: f64 = 1e-14;

/// splitmix64 generator.
#[derive(Clone, Debug)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in `[0, 1)` with 53 random bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ExactRun {
    pub success_prob: f64,
    pub post_state: QubitState,
    pub fidelity: f64,
}

/// The state the gate should produce from `input` on this machine's branch.
pub fn gate_target(machine: &SynthesisResult, input: &QubitState) -> QubitState {
    match machine.branch {
        Branch::Plus => machine.gate.plus_target(input),
        // input plays Ψ̄; its complement is −Ψ, which only shifts the global phase
        Branch::Minus => machine.gate.minus_target(&input.complement()),
    }
}

pub fn exact_run(machine: &SynthesisResult, input: &QubitState, target: &QubitState) -> Result<ExactRun> {
    let out = machine.evolve(input);
    let success = probe_component(&out, 0);
    let success_prob = success[0].norm_sqr() + success[1].norm_sqr();
    if success_prob < MIN_SUCCESS_PROB {
        return Err(Error::ZeroSuccessProbability {
            probability: success_prob,
        });
    }
    let post_state = QubitState::normalized(success[0], success[1])?;
    let fidelity = postselected_fidelity(target, success, MIN_SUCCESS_PROB).unwrap_or(0.0);
    Ok(ExactRun {
        success_prob,
        post_state,
        fidelity,
    })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct SimulationReport {
    pub exact_success_prob: f64,
    pub observed_success_freq: f64,
    pub trials: u64,
    pub outcome_counts: [u64; 3],
    /// Post-selected fidelity against the gate target; `None` when success is impossible.
    pub post_fidelity: Option<f64>,
    pub seed: u64,
}

/// Samples probe outcomes with the exact Born probabilities of `U(input ⊗ P₀)`.
pub fn monte_carlo(machine: &SynthesisResult, input: &QubitState, trials: u64, seed: u64) -> SimulationReport {
    assert!(trials >= 1, "at least one trial");
    let out = machine.evolve(input);
    let probs = probe_distribution(&out);
    let total: f64 = probs.iter().sum();
    let p0 = probs[0] / total;
    let p01 = (probs[0] + probs[1]) / total;

    let mut rng = SplitMix64::new(seed);
    let mut counts = [0u64; 3];
    for _ in 0..trials {
        let u = rng.next_f64();
        let k = if u < p0 {
            0
        } else if u < p01 {
            1
        } else {
            2
        };
        counts[k] += 1;
    }

    let success: [Complex64; 2] = probe_component(&out, 0);
    SimulationReport {
        exact_success_prob: probs[0].clamp(0.0, 1.0),
        observed_success_freq: counts[0] as f64 / trials as f64,
        trials,
        outcome_counts: counts,
        post_fidelity: postselected_fidelity(&gate_target(machine, input), success, MIN_SUCCESS_PROB),
        seed,
    }
}
