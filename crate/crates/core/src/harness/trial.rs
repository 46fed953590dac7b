use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::{run_to_fixed_point_observed, Dynamics, Network, Pattern, Update};
use crate::noise::apply_noise;
use crate::theory::ModelParams;

/// Outcome of one recall experiment.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialReport {
    /// Final state equals the target pattern.
    pub recalled: bool,
    /// Final state equals the target pattern or its negation.
    pub recalled_mod_sign: bool,
    /// Neurons misclassified by one update from the distorted state.
    pub neuron_errors_one_step: usize,
    pub sweeps_used: usize,
    pub converged: bool,
}

/// Draws a fresh network and a distorted copy of its first pattern.
///
/// The target and its distortion are drawn before the other `p-1`
/// patterns, so runs at different `p` from the same seed share the target,
/// the noise, and a common prefix of the remaining patterns.
pub fn draw_instance<R: Rng + ?Sized>(
    params: &ModelParams,
    rng: &mut R,
) -> Result<(Network, Pattern)> {
    params.validate()?;
    let target = Pattern::random(params.n, params.q, rng)?;
    let distorted = apply_noise(&target, params.noise, rng);
    let mut patterns = Vec::with_capacity(params.p);
    patterns.push(target);
    for _ in 1..params.p {
        patterns.push(Pattern::random(params.n, params.q, rng)?);
    }
    Ok((Network::new(patterns)?, distorted))
}

/// Counts neurons `i` that a single update from `distorted` would not put
/// in the target state `x_mi`.
///
/// A neuron counts as correct only if the amplitude on its target
/// frequency carries the target sign and is strictly larger in modulus
/// than every other amplitude. Ties count as errors.
pub fn one_step_errors(net: &Network, distorted: &Pattern, target: usize) -> Result<usize> {
    let reference = &net.patterns()[target];
    let mut dynamics = Dynamics::new(net, distorted.clone())?;
    let mut errors = 0;
    for i in 0..net.n() {
        let a = dynamics.field(i)?;
        let x = reference.get(i);
        let own = a[x.freq()];
        let ok = own != 0
            && own.signum() == x.sign() as i64
            && a.values()
                .iter()
                .enumerate()
                .all(|(k, v)| k == x.freq() || v.abs() < own.abs());
        if !ok {
            errors += 1;
        }
    }
    Ok(errors)
}

/// One-step error count only; skips the relaxation.
pub fn one_step_trial<R: Rng + ?Sized>(params: &ModelParams, rng: &mut R) -> Result<usize> {
    let (net, distorted) = draw_instance(params, rng)?;
    one_step_errors(&net, &distorted, 0)
}

pub fn recall_trial<R: Rng + ?Sized>(
    params: &ModelParams,
    rng: &mut R,
    max_sweeps: usize,
) -> Result<TrialReport> {
    recall_trial_traced(params, rng, max_sweeps, |_, _| {})
}

/// [`recall_trial`] with access to every state change during relaxation.
pub fn recall_trial_traced<R, F>(
    params: &ModelParams,
    rng: &mut R,
    max_sweeps: usize,
    observer: F,
) -> Result<TrialReport>
where
    R: Rng + ?Sized,
    F: FnMut(&Update, &Pattern),
{
    let (net, distorted) = draw_instance(params, rng)?;
    let neuron_errors_one_step = one_step_errors(&net, &distorted, 0)?;
    let run = run_to_fixed_point_observed(&net, distorted, rng, max_sweeps, observer)?;
    let target = &net.patterns()[0];
    let recalled = run.state == *target;
    let recalled_mod_sign = recalled || run.state == target.negated();
    Ok(TrialReport {
        recalled,
        recalled_mod_sign,
        neuron_errors_one_step,
        sweeps_used: run.sweeps_used,
        converged: run.converged,
    })
}
