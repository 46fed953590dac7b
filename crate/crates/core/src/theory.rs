//! Closed-form predictions: the recall-error bound, asymptotic storage
//! capacity, the Potts-glass comparison, and the signal/crosstalk split of a
//! field amplitude.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{check_index, Network, Pattern};
use crate::noise::{NoiseSpec, TriPoint};

/// Hopfield capacity per neuron used in the Potts comparison.
pub const ALPHA_0: f64 = 0.138;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub n: usize,
    pub q: usize,
    pub p: usize,
    pub noise: NoiseSpec,
}

impl ModelParams {
    pub fn new(n: usize, q: usize, p: usize, noise: NoiseSpec) -> Result<Self> {
        let params = ModelParams { n, q, p, noise };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 || self.q < 1 || self.p < 1 {
            return Err(Error::invalid(format!(
                "model needs n >= 2, q >= 1, p >= 1 (got n={}, q={}, p={})",
                self.n, self.q, self.p
            )));
        }
        Ok(())
    }

    /// Number of crosstalk terms `L = (N-1)(p-1)`.
    pub fn crosstalk_terms(&self) -> usize {
        (self.n - 1) * (self.p - 1)
    }
}

/// `q²(1-2a)²(1-b)²`.
fn noise_gain(q: usize, noise: NoiseSpec) -> f64 {
    let q = q as f64;
    let sa = 1.0 - 2.0 * noise.a();
    let sb = 1.0 - noise.b();
    q * q * sa * sa * sb * sb
}

/// `Pr = N exp[-(N q² / 2p)(1-2a)²(1-b)²]`. Not clamped; values above one
/// mean the bound is vacuous.
pub fn chernov_error_bound(params: &ModelParams) -> Result<f64> {
    params.validate()?;
    let n = params.n as f64;
    let exponent = n * noise_gain(params.q, params.noise) / (2.0 * params.p as f64);
    Ok(n * (-exponent).exp())
}

/// Real-valued pattern count at which [`chernov_error_bound`] equals
/// `target`. Infinite when the noise makes the bound independent of `p`.
pub fn patterns_for_bound(n: usize, q: usize, noise: NoiseSpec, target: f64) -> Result<f64> {
    if n < 2 || q < 1 {
        return Err(Error::invalid(format!(
            "need n >= 2 and q >= 1 (got n={n}, q={q})"
        )));
    }
    let nf = n as f64;
    if !(target > 0.0 && target < nf) {
        return Err(Error::invalid(format!(
            "target bound {target} outside (0, N)"
        )));
    }
    Ok(nf * noise_gain(q, noise) / (2.0 * (nf / target).ln()))
}

/// Asymptotic capacity `p̄ = (N / 2 ln N) q²(1-2a)²(1-b)²`.
pub fn storage_capacity(n: usize, q: usize, noise: NoiseSpec) -> Result<f64> {
    if n <= 1 {
        return Err(Error::invalid(format!(
            "storage capacity needs n >= 2, got {n}"
        )));
    }
    if q == 0 {
        return Err(Error::invalid("q must be at least 1"));
    }
    let nf = n as f64;
    Ok(nf / (2.0 * nf.ln()) * noise_gain(q, noise))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PottsComparison {
    pub q: usize,
    /// `q² α₀`
    pub ours: f64,
    /// `½ q(q-1) α₀`
    pub potts: f64,
    /// `ours / potts = 2q / (q-1)`
    pub ratio: f64,
}

pub fn potts_capacity_ratio(q: usize) -> Result<PottsComparison> {
    if q < 2 {
        return Err(Error::invalid(format!(
            "Potts capacity needs q >= 2, got {q}"
        )));
    }
    let qf = q as f64;
    Ok(PottsComparison {
        q,
        ours: qf * qf * ALPHA_0,
        potts: 0.5 * qf * (qf - 1.0) * ALPHA_0,
        ratio: 2.0 * qf / (qf - 1.0),
    })
}

/// Law of one crosstalk term `(e_k·x_μi)(x_μj·x_j)` for an uncorrelated
/// pattern `μ`: `±1` with probability `1/(2q²)` each.
pub fn crosstalk_term_distribution(q: usize) -> TriPoint {
    let qq = (q * q) as f64;
    TriPoint {
        plus: 0.5 / qq,
        zero: 1.0 - 1.0 / qq,
        minus: 0.5 / qq,
    }
}

/// Amplitude `A_k` on neuron `i` split by pattern of origin.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Decomposition {
    /// Contribution of the reference pattern `m`.
    pub signal: i64,
    /// Contribution of the other `p-1` patterns.
    pub crosstalk: i64,
}

impl Decomposition {
    pub fn total(&self) -> i64 {
        self.signal + self.crosstalk
    }
}

/// Splits `A_k^{(i)}` of the `distorted` state into the term coming from
/// `reference` (which must be stored in `net`) and the crosstalk from every
/// other stored pattern.
pub fn signal_crosstalk_decomposition(
    net: &Network,
    distorted: &Pattern,
    reference: &Pattern,
    i: usize,
    k: usize,
) -> Result<Decomposition> {
    net.check_state(distorted)?;
    check_index(net.n(), i)?;
    if k >= net.q() {
        return Err(Error::invalid(format!(
            "frequency index {k} out of range 0..{}",
            net.q()
        )));
    }
    let m = net
        .patterns()
        .iter()
        .position(|p| p == reference)
        .ok_or_else(|| Error::invalid("reference is not a stored pattern"))?;

    let term = |pat: &Pattern| -> i64 {
        let head = pat.get(i).component(k);
        if head == 0 {
            return 0;
        }
        let sum: i64 = (0..net.n())
            .filter(|&j| j != i)
            .map(|j| pat.get(j).dot(distorted.get(j)))
            .sum();
        head * sum
    };

    let mut out = Decomposition {
        signal: 0,
        crosstalk: 0,
    };
    for (mu, pat) in net.patterns().iter().enumerate() {
        if mu == m {
            out.signal = term(pat);
        } else {
            out.crosstalk += term(pat);
        }
    }
    Ok(out)
}
