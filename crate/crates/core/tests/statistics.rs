//! Statistical oracles for the random components and the Monte Carlo driver.
//! All seeds are pinned, so these are deterministic.

use paramnet::harness::{audit_fixed_points, error_rate, ExperimentConfig, PRange};
use paramnet::noise::{apply_noise, xi_sample_distribution};
use paramnet::theory::crosstalk_term_distribution;
use paramnet::{Network, NoiseSpec, Pattern};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `|count - n·prob| <= 3·sqrt(n·prob·(1-prob))`.
fn within_3_sigma(count: usize, n: usize, prob: f64) -> bool {
    let mean = n as f64 * prob;
    let sd = (n as f64 * prob * (1.0 - prob)).sqrt();
    (count as f64 - mean).abs() <= 3.0 * sd
}

#[test]
fn random_pattern_is_uniform_over_2q_states() {
    let q = 4;
    let draws = 100_000;
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let x = Pattern::random(draws, q, &mut rng).unwrap();
    let mut counts = [0usize; 8];
    for s in x.states() {
        counts[2 * s.freq() + (s.sign() < 0) as usize] += 1;
    }
    let expected = draws as f64 / 8.0;
    let chi2: f64 = counts
        .iter()
        .map(|&c| (c as f64 - expected).powi(2) / expected)
        .sum();
    // 0.999 quantile of chi-square with 7 degrees of freedom
    assert!(chi2 < 24.322, "chi2 = {chi2}, counts = {counts:?}");
    for &c in &counts {
        assert!(within_3_sigma(c, draws, 1.0 / 8.0), "counts = {counts:?}");
    }
}

#[test]
fn noise_rates_match_parameters() {
    let n = 100_000;
    let spec = NoiseSpec::new(0.1, 0.3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let x = Pattern::random(n, 4, &mut rng).unwrap();
    let y = apply_noise(&x, spec, &mut rng);
    let flipped = x
        .states()
        .iter()
        .zip(y.states())
        .filter(|(a, b)| a.sign() != b.sign())
        .count();
    let moved = x
        .states()
        .iter()
        .zip(y.states())
        .filter(|(a, b)| a.freq() != b.freq())
        .count();
    assert!(within_3_sigma(flipped, n, 0.1), "flipped {flipped}");
    assert!(within_3_sigma(moved, n, 0.3), "moved {moved}");
}

#[test]
fn frequency_change_is_uniform_over_others() {
    let n = 60_000;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let x = Pattern::new(4, vec![paramnet::SpinState::positive(1); n]).unwrap();
    let y = apply_noise(&x, NoiseSpec::new(0.0, 1.0).unwrap(), &mut rng);
    let mut counts = [0usize; 4];
    for s in y.states() {
        counts[s.freq()] += 1;
    }
    assert_eq!(counts[1], 0);
    for k in [0, 2, 3] {
        assert!(within_3_sigma(counts[k], n, 1.0 / 3.0), "{counts:?}");
    }
}

#[test]
fn xi_histogram_matches_law() {
    let n = 100_000;
    let spec = NoiseSpec::new(0.1, 0.3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let x = Pattern::random(n, 4, &mut rng).unwrap();
    let y = apply_noise(&x, spec, &mut rng);
    let mut hist = [0usize; 3];
    for (a, b) in x.states().iter().zip(y.states()) {
        hist[(1 - a.dot(*b)) as usize] += 1;
    }
    let law = xi_sample_distribution(spec).as_array();
    for (c, p) in hist.iter().zip(law) {
        assert!(within_3_sigma(*c, n, p), "hist {hist:?} law {law:?}");
    }
}

/// One crosstalk term from an independent pattern, with sign noise only.
#[test]
fn crosstalk_term_law_without_frequency_noise() {
    let samples = 100_000;
    let q = 3;
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let spec = NoiseSpec::new(0.2, 0.0).unwrap();
    let mut hist = [0usize; 3];
    for _ in 0..samples {
        let target = Pattern::random(2, q, &mut rng).unwrap();
        let other = Pattern::random(2, q, &mut rng).unwrap();
        let distorted = apply_noise(&target, spec, &mut rng);
        let k = rng.random_range(0..q);
        let term = other.get(0).component(k) * other.get(1).dot(distorted.get(1));
        hist[(1 - term) as usize] += 1;
    }
    let law = crosstalk_term_distribution(q).as_array();
    for (c, p) in hist.iter().zip(law) {
        assert!(within_3_sigma(*c, samples, p), "hist {hist:?} law {law:?}");
    }
}

/// For a single frequency the bound is a Hoeffding tail, so simulation must
/// stay under it.
#[test]
fn bound_dominates_simulation_for_q1() {
    for (a, ps) in [(0.0, vec![3, 5, 7, 9]), (0.1, vec![3, 5])] {
        let config = ExperimentConfig {
            n: 100,
            q: 1,
            p: PRange::new(ps[0], *ps.last().unwrap(), 2).unwrap(),
            a,
            trials: 2000,
            seed: 31,
            ..Default::default()
        };
        for row in error_rate(&config).unwrap() {
            assert!(row.bound_eq14 <= 0.5);
            assert!(
                row.error_rate <= row.bound_eq14 + 3.0 * row.std_err,
                "{row:?}"
            );
        }
    }
}

#[test]
fn brute_force_agreement_small_networks() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut degenerate = 0;
    let mut checked = 0;
    for _ in 0..60 {
        let n = rng.random_range(2..=5);
        let q = rng.random_range(1..=3);
        let p = rng.random_range(1..=2);
        let net = Network::random(n, q, p, &mut rng).unwrap();
        let audit = audit_fixed_points(&net).unwrap();
        if audit.degenerate {
            degenerate += 1;
            continue;
        }
        checked += 1;
        assert!(audit.matches_stored(), "n={n} q={q} p={p}: {audit:?}");
    }
    eprintln!("checked {checked} draws, {degenerate} degenerate");
    assert!(checked > 20);
}

/// Finds the `p` at which the one-step error rate first reaches one half,
/// by bisection on the integer range `[1, hi]`.
fn half_error_crossing(q: usize, hi: usize) -> usize {
    let rate = |p: usize| {
        let config = ExperimentConfig {
            n: 200,
            q,
            p: PRange::single(p),
            trials: 200,
            seed: 5,
            workers: 4,
            ..Default::default()
        };
        error_rate(&config).unwrap()[0].error_rate
    };
    let (mut lo, mut hi) = (1, hi);
    assert!(rate(hi) >= 0.5);
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if rate(mid) >= 0.5 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Error-rate crossing points at q = 1, 2, 4 should scale like 1 : 4 : 16
/// within ±30%.
#[test]
fn half_error_crossing_scales_with_q_squared() {
    let c1 = half_error_crossing(1, 200) as f64;
    let c2 = half_error_crossing(2, 800) as f64;
    let c4 = half_error_crossing(4, 3200) as f64;
    eprintln!("crossings q=1: {c1}, q=2: {c2}, q=4: {c4}");
    let (r2, r4) = (c2 / c1, c4 / c1);
    assert!((2.8..=5.2).contains(&r2), "q=2 ratio {r2:.2}");
    assert!((11.2..=20.8).contains(&r4), "q=4 ratio {r4:.2}");
}
