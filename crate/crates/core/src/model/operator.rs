//! Creation/annihilation-operator evaluation of the field amplitudes.
//!
//! Each neuron is a `q+1`-level system: ground `|0⟩` and excited `|k⟩`,
//! `k = 1..q`. Its stored and current values are operators `x c_k`. The
//! amplitudes are assembled from bra-ket overlaps computed by actually
//! applying the ladder operators to kets, which gives an evaluation route
//! that shares nothing with [`Network::local_field`](super::Network::local_field).
//! It exists to cross-check that route and is not meant to be fast.

use super::{check_index, Amplitudes, Network, Pattern};
use crate::error::Result;

/// Ket over the `q+1` levels; slot 0 is the ground state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ket(Vec<i64>);

impl Ket {
    pub fn ground(q: usize) -> Self {
        let mut v = vec![0; q + 1];
        v[0] = 1;
        Ket(v)
    }

    /// Basis ket `|k⟩` for a one-based level.
    pub fn level(q: usize, k: usize) -> Self {
        let mut v = vec![0; q + 1];
        v[k] = 1;
        Ket(v)
    }

    pub fn inner(&self, other: &Ket) -> i64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub fn coefficients(&self) -> &[i64] {
        &self.0
    }
}

/// `c_k^+`: `|0⟩ → |k⟩`, kills excited levels.
pub fn create(k: usize, ket: &Ket) -> Ket {
    let mut out = vec![0; ket.0.len()];
    out[k] = ket.0[0];
    Ket(out)
}

/// `c_k`: `|l⟩ → δ_kl |0⟩`, kills the ground level.
pub fn annihilate(k: usize, ket: &Ket) -> Ket {
    let mut out = vec![0; ket.0.len()];
    out[0] = ket.0[k];
    Ket(out)
}

/// `⟨k|l⟩` realized as `⟨0| c_k c_l^+ |0⟩`.
fn bracket(q: usize, k: usize, l: usize) -> i64 {
    let ground = Ket::ground(q);
    ground.inner(&annihilate(k, &create(l, &ground)))
}

/// Amplitudes of `h_i|0⟩ = Σ_k A_k |k⟩` with
/// `A_k = Σ_{j≠i} Σ_μ x_μi x_μj x_j ⟨k|k_μi⟩⟨k_μj|k_j⟩` (real signs, so
/// conjugation is the identity).
pub fn operator_oracle_amplitudes(net: &Network, state: &Pattern, i: usize) -> Result<Amplitudes> {
    net.check_state(state)?;
    check_index(net.n(), i)?;
    let q = net.q();
    let mut out = vec![0i64; q];
    for (k, slot) in out.iter_mut().enumerate() {
        let level = k + 1;
        let mut acc = 0i64;
        for pat in net.patterns() {
            let xmi = pat.get(i);
            let head = bracket(q, level, xmi.freq() + 1);
            if head == 0 {
                continue;
            }
            for j in (0..net.n()).filter(|&j| j != i) {
                let xmj = pat.get(j);
                let xj = state.get(j);
                let tail = bracket(q, xmj.freq() + 1, xj.freq() + 1);
                acc += xmi.sign() as i64 * xmj.sign() as i64 * xj.sign() as i64 * head * tail;
            }
        }
        *slot = acc;
    }
    Ok(Amplitudes::new(out))
}
