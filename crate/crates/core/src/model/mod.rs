//! Vector-neuron data model.
//!
//! A neuron state is `x_i = s_i e_k`: a sign `s_i = ±1` times one of `q`
//! orthonormal basis vectors. Everything here is exact integer arithmetic;
//! amplitudes, Hebb weights and energies never touch floating point.
//!
//! Indices are zero-based throughout the API (neuron `0..n`, frequency
//! `0..q`). The text format and `Display` output use one-based frequencies.

mod dynamics;
pub mod operator;
mod persist;

use std::fmt;

use rand::Rng;

use crate::error::{Error, Result};

pub use dynamics::{
    async_sweep, random_order, run_to_fixed_point, run_to_fixed_point_observed, Dynamics,
    Relaxation, Update,
};
pub use persist::{load_patterns, parse_patterns, save_patterns, write_patterns};

/// One neuron's value: sign and frequency index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SpinState {
    sign: i8,
    freq: u32,
}

impl SpinState {
    pub fn new(sign: i8, freq: usize) -> Result<Self> {
        if sign != 1 && sign != -1 {
            return Err(Error::invalid(format!("sign must be +1 or -1, got {sign}")));
        }
        let freq = u32::try_from(freq)
            .map_err(|_| Error::invalid(format!("frequency index {freq} too large")))?;
        Ok(SpinState { sign, freq })
    }

    pub fn positive(freq: usize) -> Self {
        SpinState {
            sign: 1,
            freq: freq as u32,
        }
    }

    pub fn negative(freq: usize) -> Self {
        SpinState {
            sign: -1,
            freq: freq as u32,
        }
    }

    #[inline]
    pub fn sign(self) -> i8 {
        self.sign
    }

    #[inline]
    pub fn freq(self) -> usize {
        self.freq as usize
    }

    #[inline]
    pub fn flipped(self) -> Self {
        SpinState {
            sign: -self.sign,
            freq: self.freq,
        }
    }

    /// `x·y`: product of signs on equal frequencies, zero otherwise.
    #[inline]
    pub fn dot(self, other: SpinState) -> i64 {
        if self.freq == other.freq {
            (self.sign * other.sign) as i64
        } else {
            0
        }
    }

    /// `e_k·x`.
    #[inline]
    pub fn component(self, k: usize) -> i64 {
        if self.freq as usize == k {
            self.sign as i64
        } else {
            0
        }
    }
}

impl fmt::Display for SpinState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = if self.sign > 0 { '+' } else { '-' };
        write!(f, "{s}{}", self.freq + 1)
    }
}

/// A network configuration or a stored memory: `n` spin states sharing `q`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pattern {
    q: usize,
    states: Vec<SpinState>,
}

impl Pattern {
    pub fn new(q: usize, states: Vec<SpinState>) -> Result<Self> {
        if q == 0 {
            return Err(Error::invalid("q must be at least 1"));
        }
        if let Some((i, s)) = states.iter().enumerate().find(|(_, s)| s.freq() >= q) {
            return Err(Error::invalid(format!(
                "neuron {i} has frequency index {} outside 0..{q}",
                s.freq()
            )));
        }
        Ok(Pattern { q, states })
    }

    /// Uniform random pattern: each neuron independently takes one of the
    /// `2q` states with equal probability.
    pub fn random<R: Rng + ?Sized>(n: usize, q: usize, rng: &mut R) -> Result<Self> {
        if n == 0 || q == 0 {
            return Err(Error::invalid(format!(
                "random pattern needs n >= 1 and q >= 1 (got n={n}, q={q})"
            )));
        }
        let states = (0..n)
            .map(|_| {
                let v = rng.random_range(0..2 * q);
                let sign = if v % 2 == 0 { 1 } else { -1 };
                SpinState {
                    sign,
                    freq: (v / 2) as u32,
                }
            })
            .collect();
        Ok(Pattern { q, states })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.states.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    #[inline]
    pub fn q(&self) -> usize {
        self.q
    }

    #[inline]
    pub fn states(&self) -> &[SpinState] {
        &self.states
    }

    #[inline]
    pub fn get(&self, i: usize) -> SpinState {
        self.states[i]
    }

    pub fn set(&mut self, i: usize, state: SpinState) -> Result<()> {
        if i >= self.len() {
            return Err(Error::invalid(format!(
                "neuron index {i} out of range 0..{}",
                self.len()
            )));
        }
        if state.freq() >= self.q {
            return Err(Error::invalid(format!(
                "frequency index {} outside 0..{}",
                state.freq(),
                self.q
            )));
        }
        self.states[i] = state;
        Ok(())
    }

    pub(crate) fn set_unchecked(&mut self, i: usize, state: SpinState) {
        self.states[i] = state;
    }

    /// Global sign flip `-X`.
    pub fn negated(&self) -> Pattern {
        Pattern {
            q: self.q,
            states: self.states.iter().map(|s| s.flipped()).collect(),
        }
    }

    /// `Σ_j x_j·y_j`.
    pub fn overlap(&self, other: &Pattern) -> i64 {
        self.states
            .iter()
            .zip(&other.states)
            .map(|(a, b)| a.dot(*b))
            .sum()
    }

    /// Number of neurons on which the two patterns differ.
    pub fn hamming(&self, other: &Pattern) -> usize {
        self.states
            .iter()
            .zip(&other.states)
            .filter(|(a, b)| a != b)
            .count()
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.states.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

/// Length-`q` field amplitudes `A_k` acting on one neuron.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Amplitudes(Vec<i64>);

impl Amplitudes {
    pub fn new(values: Vec<i64>) -> Self {
        Amplitudes(values)
    }

    pub fn values(&self) -> &[i64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl std::ops::Index<usize> for Amplitudes {
    type Output = i64;

    fn index(&self, k: usize) -> &i64 {
        &self.0[k]
    }
}

/// Winner-take-all rule. Picks the amplitude of largest modulus (lowest
/// index on ties) and takes its sign, with `sgn(0) = +1`.
///
/// Panics on an empty amplitude vector.
pub fn update_neuron(amplitudes: &Amplitudes) -> SpinState {
    winner_take_all(amplitudes.values())
}

#[inline]
pub(crate) fn winner_take_all(values: &[i64]) -> SpinState {
    assert!(!values.is_empty(), "winner-take-all on empty amplitudes");
    let mut best = 0;
    let mut best_abs = values[0].unsigned_abs();
    for (k, v) in values.iter().enumerate().skip(1) {
        let a = v.unsigned_abs();
        if a > best_abs {
            best = k;
            best_abs = a;
        }
    }
    SpinState {
        sign: if values[best] >= 0 { 1 } else { -1 },
        freq: best as u32,
    }
}

/// Dense `N×N` grid of `q×q` Hebb interconnection blocks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HebbWeights {
    n: usize,
    q: usize,
    data: Vec<i32>,
}

/// Borrowed view of one `q×q` block `T_ij`.
#[derive(Clone, Copy, Debug)]
pub struct WeightBlock<'a> {
    q: usize,
    entries: &'a [i32],
}

impl<'a> WeightBlock<'a> {
    /// `T_ij^{(kl)}`.
    pub fn get(&self, k: usize, l: usize) -> i32 {
        self.entries[k * self.q + l]
    }

    pub fn entries(&self) -> &'a [i32] {
        self.entries
    }

    pub fn nonzero(&self) -> usize {
        self.entries.iter().filter(|&&v| v != 0).count()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|&v| v == 0)
    }
}

impl HebbWeights {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn block(&self, i: usize, j: usize) -> WeightBlock<'_> {
        let qq = self.q * self.q;
        let start = (i * self.n + j) * qq;
        WeightBlock {
            q: self.q,
            entries: &self.data[start..start + qq],
        }
    }

    /// `h_i = Σ_j T_ij x_j`, returned as the amplitudes of `h_i`.
    pub fn field(&self, state: &Pattern, i: usize) -> Result<Amplitudes> {
        check_state(self.n, self.q, state)?;
        check_index(self.n, i)?;
        let mut a = vec![0i64; self.q];
        for (j, x) in state.states().iter().enumerate() {
            let block = self.block(i, j);
            let l = x.freq();
            for (k, slot) in a.iter_mut().enumerate() {
                *slot += block.get(k, l) as i64 * x.sign() as i64;
            }
        }
        Ok(Amplitudes(a))
    }
}

/// Generalized Hebb rule `T_ij^{(kl)} = Σ_μ (e_k·x_μi)(x_μj·e_l)`, with
/// zero diagonal blocks.
pub fn hebb_weights(patterns: &[Pattern]) -> Result<HebbWeights> {
    let (n, q) = common_shape(patterns)?;
    let qq = q * q;
    let mut data = vec![0i32; n * n * qq];
    for pat in patterns {
        for (i, xi) in pat.states().iter().enumerate() {
            for (j, xj) in pat.states().iter().enumerate() {
                if i == j {
                    continue;
                }
                let idx = (i * n + j) * qq + xi.freq() * q + xj.freq();
                data[idx] += (xi.sign() * xj.sign()) as i32;
            }
        }
    }
    Ok(HebbWeights { n, q, data })
}

fn common_shape(patterns: &[Pattern]) -> Result<(usize, usize)> {
    let first = patterns
        .first()
        .ok_or_else(|| Error::invalid("at least one pattern is required"))?;
    let (n, q) = (first.len(), first.q());
    if let Some((mu, p)) = patterns
        .iter()
        .enumerate()
        .find(|(_, p)| p.len() != n || p.q() != q)
    {
        return Err(Error::invalid(format!(
            "pattern {mu} has shape n={} q={}, expected n={n} q={q}",
            p.len(),
            p.q()
        )));
    }
    Ok((n, q))
}

pub(crate) fn check_state(n: usize, q: usize, state: &Pattern) -> Result<()> {
    if state.len() != n || state.q() != q {
        return Err(Error::invalid(format!(
            "state has shape n={} q={}, network has n={n} q={q}",
            state.len(),
            state.q()
        )));
    }
    Ok(())
}

pub(crate) fn check_index(n: usize, i: usize) -> Result<()> {
    if i >= n {
        return Err(Error::invalid(format!(
            "neuron index {i} out of range 0..{n}"
        )));
    }
    Ok(())
}

/// Stored patterns plus optional materialized weights.
///
/// Immutable after construction. Patterns are also kept neuron-major
/// (`by_neuron[i * p + μ] = x_μi`) for the field inner loop.
#[derive(Clone, Debug)]
pub struct Network {
    n: usize,
    q: usize,
    patterns: Vec<Pattern>,
    by_neuron: Vec<SpinState>,
    weights: Option<HebbWeights>,
}

impl Network {
    pub fn new(patterns: Vec<Pattern>) -> Result<Self> {
        let (n, q) = common_shape(&patterns)?;
        if n < 2 {
            return Err(Error::invalid(format!("network needs n >= 2, got {n}")));
        }
        let p = patterns.len();
        let mut by_neuron = Vec::with_capacity(n * p);
        for i in 0..n {
            by_neuron.extend(patterns.iter().map(|pat| pat.get(i)));
        }
        Ok(Network {
            n,
            q,
            patterns,
            by_neuron,
            weights: None,
        })
    }

    /// Draws `p` independent uniform patterns.
    pub fn random<R: Rng + ?Sized>(n: usize, q: usize, p: usize, rng: &mut R) -> Result<Self> {
        if p == 0 {
            return Err(Error::invalid("p must be at least 1"));
        }
        let patterns = (0..p)
            .map(|_| Pattern::random(n, q, rng))
            .collect::<Result<Vec<_>>>()?;
        Network::new(patterns)
    }

    /// Materializes the Hebb weight grid (`O(N²q²)` memory).
    pub fn with_weights(mut self) -> Self {
        if self.weights.is_none() {
            self.weights = Some(hebb_weights(&self.patterns).expect("shape checked in new"));
        }
        self
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn q(&self) -> usize {
        self.q
    }

    #[inline]
    pub fn p(&self) -> usize {
        self.patterns.len()
    }

    pub fn patterns(&self) -> &[Pattern] {
        &self.patterns
    }

    pub fn weights(&self) -> Option<&HebbWeights> {
        self.weights.as_ref()
    }

    /// Stored states of neuron `i` across all patterns.
    #[inline]
    pub(crate) fn column(&self, i: usize) -> &[SpinState] {
        let p = self.patterns.len();
        &self.by_neuron[i * p..(i + 1) * p]
    }

    pub fn check_state(&self, state: &Pattern) -> Result<()> {
        check_state(self.n, self.q, state)
    }

    /// Field amplitudes on neuron `i` by direct summation over stored
    /// patterns: `A_k = Σ_{j≠i} Σ_μ (e_k·x_μi)(x_μj·x_j)`.
    pub fn local_field(&self, state: &Pattern, i: usize) -> Result<Amplitudes> {
        self.check_state(state)?;
        check_index(self.n, i)?;
        let mut a = vec![0i64; self.q];
        for pat in &self.patterns {
            let xi = pat.get(i);
            let mut overlap = 0i64;
            for (j, (xmu, x)) in pat.states().iter().zip(state.states()).enumerate() {
                if j != i {
                    overlap += xmu.dot(*x);
                }
            }
            a[xi.freq()] += xi.sign() as i64 * overlap;
        }
        Ok(Amplitudes(a))
    }

    /// Field amplitudes from the materialized weight grid.
    pub fn weight_field(&self, state: &Pattern, i: usize) -> Result<Amplitudes> {
        let w = self
            .weights
            .as_ref()
            .ok_or_else(|| Error::invalid("weights are not materialized"))?;
        w.field(state, i)
    }

    /// `2H`, where `H = -½ Σ_{i≠j} Σ_μ (x_i·x_μi)(x_μj·x_j)`.
    ///
    /// Evaluated as `-Σ_μ (m_μ² - c_μ)` with `m_μ` the overlap and `c_μ` the
    /// number of neurons whose frequency matches pattern `μ`; the `c_μ` term
    /// removes the `i = j` contributions.
    pub fn twice_energy(&self, state: &Pattern) -> Result<i64> {
        self.check_state(state)?;
        let mut total = 0i64;
        for pat in &self.patterns {
            let mut m = 0i64;
            let mut c = 0i64;
            for (xmu, x) in pat.states().iter().zip(state.states()) {
                let d = xmu.dot(*x);
                m += d;
                c += d * d;
            }
            total -= m * m - c;
        }
        Ok(total)
    }

    /// Whether no single winner-take-all update would change `state`.
    pub fn is_fixed_point(&self, state: &Pattern) -> Result<bool> {
        Ok(Dynamics::new(self, state.clone())?.is_fixed_point())
    }
}
