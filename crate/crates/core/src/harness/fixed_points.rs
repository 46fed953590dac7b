//! Exhaustive fixed-point search over the whole `(2q)^N` configuration space.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::model::{Dynamics, Network, Pattern, SpinState};

/// Largest configuration space [`enumerate_fixed_points`] will walk.
pub const MAX_STATES: u64 = 10_000_000;

fn state_space_size(n: usize, q: usize) -> Option<u64> {
    let base = 2u64.checked_mul(q as u64)?;
    (0..n).try_fold(1u64, |acc, _| acc.checked_mul(base))
}

/// Every state that a deterministic identity-order sweep leaves unchanged.
pub fn enumerate_fixed_points(net: &Network) -> Result<BTreeSet<Pattern>> {
    let (n, q) = (net.n(), net.q());
    match state_space_size(n, q) {
        Some(size) if size <= MAX_STATES => {}
        size => {
            let shown = size.map_or_else(|| format!("(2*{q})^{n}"), |s| s.to_string());
            return Err(Error::invalid(format!(
                "state space of {shown} states exceeds the enumeration limit {MAX_STATES}"
            )));
        }
    }

    let radix = 2 * q;
    let mut digits = vec![0usize; n];
    let mut found = BTreeSet::new();
    loop {
        let state = Pattern::new(q, digits.iter().map(|&d| decode(d)).collect())?;
        let order: Vec<usize> = (0..n).collect();
        let mut dynamics = Dynamics::new(net, state)?;
        if dynamics.sweep(&order)? == 0 {
            found.insert(dynamics.into_state());
        }
        // mixed-radix increment
        let mut pos = 0;
        loop {
            if pos == n {
                return Ok(found);
            }
            digits[pos] += 1;
            if digits[pos] < radix {
                break;
            }
            digits[pos] = 0;
            pos += 1;
        }
    }
}

fn decode(d: usize) -> SpinState {
    if d % 2 == 0 {
        SpinState::positive(d / 2)
    } else {
        SpinState::negative(d / 2)
    }
}

/// Whether every neuron of `state` is held in place by a strict winner: its
/// own amplitude is nonzero and strictly larger in modulus than every other.
/// Non-strict fixed points exist only through the tie-break convention.
pub fn is_strict_fixed_point(net: &Network, state: &Pattern) -> Result<bool> {
    let mut dynamics = Dynamics::new(net, state.clone())?;
    for i in 0..net.n() {
        let a = dynamics.field(i)?;
        let x = state.get(i);
        let own = a[x.freq()];
        if own == 0 || own.signum() != x.sign() as i64 {
            return Ok(false);
        }
        let strict = a
            .values()
            .iter()
            .enumerate()
            .all(|(k, v)| k == x.freq() || v.abs() < own.abs());
        if !strict {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `{±X_μ}` for the stored patterns.
pub fn stored_with_negations(net: &Network) -> BTreeSet<Pattern> {
    net.patterns()
        .iter()
        .flat_map(|p| [p.clone(), p.negated()])
        .collect()
}

/// Comparison of the enumerated fixed points against `{±X_μ}`.
#[derive(Clone, Debug)]
pub struct FixedPointAudit {
    pub found: BTreeSet<Pattern>,
    /// Members of `{±X_μ}` that are not fixed points.
    pub missing: Vec<Pattern>,
    /// Fixed points outside `{±X_μ}`.
    pub spurious: Vec<Pattern>,
    /// Some fixed point (expected or spurious) relies on a tie-break.
    pub degenerate: bool,
}

impl FixedPointAudit {
    pub fn matches_stored(&self) -> bool {
        self.missing.is_empty() && self.spurious.is_empty()
    }
}

pub fn audit_fixed_points(net: &Network) -> Result<FixedPointAudit> {
    let found = enumerate_fixed_points(net)?;
    let expected = stored_with_negations(net);
    let missing = expected.difference(&found).cloned().collect();
    let spurious = found.difference(&expected).cloned().collect();
    let mut degenerate = false;
    for s in &found {
        if !is_strict_fixed_point(net, s)? {
            degenerate = true;
            break;
        }
    }
    Ok(FixedPointAudit {
        found,
        missing,
        spurious,
        degenerate,
    })
}
