//! Multiplicative distortion of a stored pattern.
//!
//! Each neuron independently has its frequency moved to one of the other
//! `q-1` frequencies with probability `b`, and its sign flipped with
//! probability `a`. The two events are independent.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Pattern, SpinState};

/// Sign-flip probability `a` and frequency-change probability `b`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    a: f64,
    b: f64,
}

impl NoiseSpec {
    pub const NONE: NoiseSpec = NoiseSpec { a: 0.0, b: 0.0 };

    pub fn new(a: f64, b: f64) -> Result<Self> {
        for (name, v) in [("a", a), ("b", b)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::invalid(format!("noise {name}={v} outside [0, 1]")));
            }
        }
        Ok(NoiseSpec { a, b })
    }

    #[inline]
    pub fn a(&self) -> f64 {
        self.a
    }

    #[inline]
    pub fn b(&self) -> f64 {
        self.b
    }
}

impl Default for NoiseSpec {
    fn default() -> Self {
        NoiseSpec::NONE
    }
}

/// Distorts `pattern` neuron by neuron. For `q = 1` the frequency step is a
/// no-op.
pub fn apply_noise<R: Rng + ?Sized>(pattern: &Pattern, spec: NoiseSpec, rng: &mut R) -> Pattern {
    let q = pattern.q();
    let states = pattern
        .states()
        .iter()
        .map(|&x| distort(x, q, spec, rng))
        .collect();
    Pattern::new(q, states).expect("distortion keeps frequencies in range")
}

fn distort<R: Rng + ?Sized>(x: SpinState, q: usize, spec: NoiseSpec, rng: &mut R) -> SpinState {
    let mut freq = x.freq();
    if q > 1 && rng.random_bool(spec.b) {
        // uniform over the q-1 other frequencies
        let r = rng.random_range(0..q - 1);
        freq = if r >= freq { r + 1 } else { r };
    }
    let mut sign = x.sign();
    if rng.random_bool(spec.a) {
        sign = -sign;
    }
    SpinState::new(sign, freq).expect("sign is ±1")
}

/// Three-point law `(P(+1), P(0), P(-1))`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TriPoint {
    pub plus: f64,
    pub zero: f64,
    pub minus: f64,
}

impl TriPoint {
    pub fn as_array(&self) -> [f64; 3] {
        [self.plus, self.zero, self.minus]
    }
}

/// Law of the signal term `ξ = a_j (x_mj · b_j x_mj)`.
pub fn xi_sample_distribution(spec: NoiseSpec) -> TriPoint {
    TriPoint {
        plus: (1.0 - spec.a) * (1.0 - spec.b),
        zero: spec.b,
        minus: spec.a * (1.0 - spec.b),
    }
}
