use rand::seq::SliceRandom;
use rand::Rng;

use super::{check_index, winner_take_all, Amplitudes, Network, Pattern, SpinState};
use crate::error::{Error, Result};

/// Asynchronous winner-take-all dynamics on a caller-owned state.
///
/// Keeps the running overlaps `m_μ = Σ_j x_μj·x_j` so a field evaluation
/// costs `O(p)` instead of `O(Np)`.
#[derive(Clone, Debug)]
pub struct Dynamics<'a> {
    net: &'a Network,
    state: Pattern,
    overlaps: Vec<i64>,
    scratch: Vec<i64>,
}

/// One single-neuron change applied during relaxation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Update {
    pub sweep: usize,
    pub neuron: usize,
    pub before: SpinState,
    pub after: SpinState,
}

/// Outcome of [`run_to_fixed_point`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Relaxation {
    pub state: Pattern,
    pub sweeps_used: usize,
    pub converged: bool,
}

impl<'a> Dynamics<'a> {
    pub fn new(net: &'a Network, state: Pattern) -> Result<Self> {
        net.check_state(&state)?;
        let overlaps = net.patterns().iter().map(|p| p.overlap(&state)).collect();
        Ok(Dynamics {
            net,
            state,
            overlaps,
            scratch: vec![0; net.q()],
        })
    }

    pub fn state(&self) -> &Pattern {
        &self.state
    }

    pub fn into_state(self) -> Pattern {
        self.state
    }

    /// Current overlaps with every stored pattern.
    pub fn overlaps(&self) -> &[i64] {
        &self.overlaps
    }

    fn fill_field(&mut self, i: usize) {
        let xi = self.state.get(i);
        self.scratch.iter_mut().for_each(|v| *v = 0);
        for (xmu, m) in self.net.column(i).iter().zip(&self.overlaps) {
            let others = m - xmu.dot(xi);
            self.scratch[xmu.freq()] += xmu.sign() as i64 * others;
        }
    }

    pub fn field(&mut self, i: usize) -> Result<Amplitudes> {
        check_index(self.net.n(), i)?;
        self.fill_field(i);
        Ok(Amplitudes::new(self.scratch.clone()))
    }

    /// The state neuron `i` would take under the winner-take-all rule.
    pub fn proposal(&mut self, i: usize) -> SpinState {
        self.fill_field(i);
        winner_take_all(&self.scratch)
    }

    /// Applies the rule to neuron `i`. Returns the previous state if it changed.
    pub fn update(&mut self, i: usize) -> Option<SpinState> {
        let old = self.state.get(i);
        let new = self.proposal(i);
        if new == old {
            return None;
        }
        for (xmu, m) in self.net.column(i).iter().zip(self.overlaps.iter_mut()) {
            *m += xmu.dot(new) - xmu.dot(old);
        }
        self.state.set_unchecked(i, new);
        Some(old)
    }

    /// One sequential pass in `order`; returns the number of changed neurons.
    pub fn sweep(&mut self, order: &[usize]) -> Result<usize> {
        check_permutation(order, self.net.n())?;
        Ok(self.sweep_unchecked(order, 0, &mut |_, _| {}))
    }

    fn sweep_unchecked(
        &mut self,
        order: &[usize],
        sweep: usize,
        observer: &mut dyn FnMut(&Update, &Pattern),
    ) -> usize {
        let mut changed = 0;
        for &i in order {
            if let Some(before) = self.update(i) {
                changed += 1;
                let ev = Update {
                    sweep,
                    neuron: i,
                    before,
                    after: self.state.get(i),
                };
                observer(&ev, &self.state);
            }
        }
        changed
    }

    pub fn is_fixed_point(&mut self) -> bool {
        (0..self.net.n()).all(|i| self.proposal(i) == self.state.get(i))
    }
}

fn check_permutation(order: &[usize], n: usize) -> Result<()> {
    if order.len() != n {
        return Err(Error::invalid(format!(
            "update order has length {}, expected {n}",
            order.len()
        )));
    }
    let mut seen = vec![false; n];
    for &i in order {
        if i >= n || std::mem::replace(&mut seen[i], true) {
            return Err(Error::invalid(format!(
                "update order is not a permutation of 0..{n}"
            )));
        }
    }
    Ok(())
}

/// Uniformly random permutation of `0..n`.
pub fn random_order<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    order
}

/// Applies the update rule to every neuron once, in `order`, each update
/// seeing all previous ones.
pub fn async_sweep(net: &Network, state: Pattern, order: &[usize]) -> Result<(Pattern, usize)> {
    let mut dynamics = Dynamics::new(net, state)?;
    let changed = dynamics.sweep(order)?;
    Ok((dynamics.into_state(), changed))
}

/// Sweeps in fresh random orders until a sweep changes nothing or
/// `max_sweeps` is spent.
pub fn run_to_fixed_point<R: Rng + ?Sized>(
    net: &Network,
    state: Pattern,
    rng: &mut R,
    max_sweeps: usize,
) -> Result<Relaxation> {
    run_to_fixed_point_observed(net, state, rng, max_sweeps, |_, _| {})
}

/// [`run_to_fixed_point`] with a callback on every state change. The
/// callback sees the state after the change.
pub fn run_to_fixed_point_observed<R, F>(
    net: &Network,
    state: Pattern,
    rng: &mut R,
    max_sweeps: usize,
    mut observer: F,
) -> Result<Relaxation>
where
    R: Rng + ?Sized,
    F: FnMut(&Update, &Pattern),
{
    if max_sweeps == 0 {
        return Err(Error::invalid("max_sweeps must be at least 1"));
    }
    let mut dynamics = Dynamics::new(net, state)?;
    let mut converged = false;
    let mut sweeps_used = 0;
    while sweeps_used < max_sweeps {
        let order = random_order(net.n(), rng);
        let changed = dynamics.sweep_unchecked(&order, sweeps_used, &mut observer);
        sweeps_used += 1;
        if changed == 0 {
            converged = true;
            break;
        }
    }
    Ok(Relaxation {
        state: dynamics.into_state(),
        sweeps_used,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn s(sign: i8, freq1: usize) -> SpinState {
        SpinState::new(sign, freq1 - 1).unwrap()
    }

    fn three_neuron() -> Network {
        let x1 = Pattern::new(2, vec![s(1, 1), s(1, 2), s(-1, 1)]).unwrap();
        Network::new(vec![x1]).unwrap()
    }

    #[test]
    fn stored_pattern_is_unchanged() {
        let net = three_neuron();
        let x1 = net.patterns()[0].clone();
        let (out, changed) = async_sweep(&net, x1.clone(), &[0, 1, 2]).unwrap();
        assert_eq!(out, x1);
        assert_eq!(changed, 0);
    }

    #[test]
    fn negated_pattern_is_unchanged() {
        let net = three_neuron();
        let neg = net.patterns()[0].negated();
        let (out, changed) = async_sweep(&net, neg.clone(), &[2, 0, 1]).unwrap();
        assert_eq!(out, neg);
        assert_eq!(changed, 0);
    }

    #[test]
    fn corrupted_neuron_is_restored() {
        let net = three_neuron();
        let x1 = net.patterns()[0].clone();
        let mut state = x1.clone();
        state.set(1, s(1, 1)).unwrap();
        let (out, changed) = async_sweep(&net, state, &[0, 1, 2]).unwrap();
        assert_eq!(out, x1);
        assert_eq!(changed, 1);
    }

    #[test]
    fn sweep_rejects_bad_order() {
        let net = three_neuron();
        let x1 = net.patterns()[0].clone();
        assert!(async_sweep(&net, x1.clone(), &[0, 1]).is_err());
        assert!(async_sweep(&net, x1.clone(), &[0, 1, 1]).is_err());
        assert!(async_sweep(&net, x1, &[0, 1, 3]).is_err());
    }

    #[test]
    fn incremental_field_matches_direct() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let net = Network::random(20, 3, 6, &mut rng).unwrap();
        let start = Pattern::random(20, 3, &mut rng).unwrap();
        let mut dyns = Dynamics::new(&net, start).unwrap();
        for _ in 0..3 {
            for i in random_order(20, &mut rng) {
                let direct = net.local_field(dyns.state(), i).unwrap();
                assert_eq!(dyns.field(i).unwrap(), direct);
                dyns.update(i);
            }
        }
    }

    #[test]
    fn fixed_point_from_stored_pattern_small_p() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for p in 1..=2 {
            let net = Network::random(30, 3, p, &mut rng).unwrap();
            let x1 = net.patterns()[0].clone();
            let r = run_to_fixed_point(&net, x1.clone(), &mut rng, 10).unwrap();
            assert!(r.converged);
            assert_eq!(r.sweeps_used, 1);
            assert_eq!(r.state, x1);
        }
    }

    #[test]
    fn single_sweep_budget_from_non_fixed_state() {
        let net = three_neuron();
        let mut state = net.patterns()[0].clone();
        state.set(1, s(1, 1)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let r = run_to_fixed_point(&net, state, &mut rng, 1).unwrap();
        assert!(!r.converged);
        assert_eq!(r.sweeps_used, 1);
    }

    #[test]
    fn zero_sweep_budget_is_rejected() {
        let net = three_neuron();
        let x1 = net.patterns()[0].clone();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(run_to_fixed_point(&net, x1, &mut rng, 0).is_err());
    }

    #[test]
    fn energy_never_increases() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let net = Network::random(40, 4, 12, &mut rng).unwrap();
        let start = Pattern::random(40, 4, &mut rng).unwrap();
        let e0 = net.twice_energy(&start).unwrap();
        let mut last = e0;
        let r = run_to_fixed_point_observed(&net, start, &mut rng, 100, |_, st| {
            let e = net.twice_energy(st).unwrap();
            assert!(e <= last, "energy rose from {last} to {e}");
            last = e;
        })
        .unwrap();
        assert!(net.twice_energy(&r.state).unwrap() <= e0);
    }
}
