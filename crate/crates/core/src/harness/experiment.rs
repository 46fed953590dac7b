//! Parallel Monte Carlo drivers.
//!
//! Trial `t` always draws from ChaCha stream `t` of the master seed, so a
//! run's output depends only on the config and the seed, never on the
//! worker count. Aggregation is an ordered reduction by trial index.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::trial::{one_step_trial, recall_trial};
use crate::error::{Error, Result};
use crate::noise::NoiseSpec;
use crate::theory::{chernov_error_bound, ModelParams};

/// RNG for trial `trial` of a run seeded with `master`.
pub fn trial_rng(master: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(trial);
    rng
}

/// Runs `f` for trial indices `0..trials` on `workers` threads and returns
/// the results in trial order.
pub fn run_trials<T, F>(workers: usize, trials: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    if workers == 0 {
        return Err(Error::invalid("worker count must be at least 1"));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::invalid(format!("cannot start worker pool: {e}")))?;
    pool.install(|| {
        (0..trials as u64)
            .into_par_iter()
            .map(&f)
            .collect::<Result<Vec<T>>>()
    })
}

/// Inclusive pattern-count range `lo:hi[:step]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct PRange {
    pub lo: usize,
    pub hi: usize,
    pub step: usize,
}

impl PRange {
    pub fn single(p: usize) -> Self {
        PRange {
            lo: p,
            hi: p,
            step: 1,
        }
    }

    pub fn new(lo: usize, hi: usize, step: usize) -> Result<Self> {
        if lo == 0 || hi < lo || step == 0 {
            return Err(Error::invalid(format!(
                "bad pattern range {lo}:{hi}:{step} (need 1 <= lo <= hi, step >= 1)"
            )));
        }
        Ok(PRange { lo, hi, step })
    }

    pub fn values(&self) -> impl Iterator<Item = usize> {
        (self.lo..=self.hi).step_by(self.step)
    }
}

impl FromStr for PRange {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts = s
            .split(':')
            .map(|t| {
                t.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::invalid(format!("bad pattern count `{t}` in `{s}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        match parts[..] {
            [p] => PRange::new(p, p, 1),
            [lo, hi] => PRange::new(lo, hi, 1),
            [lo, hi, step] => PRange::new(lo, hi, step),
            _ => Err(Error::invalid(format!("bad pattern range `{s}`"))),
        }
    }
}

impl fmt::Display for PRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.lo == self.hi, self.step) {
            (true, _) => write!(f, "{}", self.lo),
            (false, 1) => write!(f, "{}:{}", self.lo, self.hi),
            _ => write!(f, "{}:{}:{}", self.lo, self.hi, self.step),
        }
    }
}

impl TryFrom<String> for PRange {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<PRange> for String {
    fn from(r: PRange) -> String {
        r.to_string()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            _ => Err(Error::invalid(format!("unknown output format `{s}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub n: usize,
    pub q: usize,
    pub p: PRange,
    pub a: f64,
    pub b: f64,
    pub trials: usize,
    pub seed: u64,
    pub workers: usize,
    pub max_sweeps: usize,
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            n: 100,
            q: 2,
            p: PRange::single(1),
            a: 0.0,
            b: 0.0,
            trials: 100,
            seed: 0,
            workers: 1,
            max_sweeps: 100,
            out: None,
            format: OutputFormat::Csv,
        }
    }
}

impl ExperimentConfig {
    pub fn noise(&self) -> Result<NoiseSpec> {
        NoiseSpec::new(self.a, self.b)
    }

    pub fn params(&self, p: usize) -> Result<ModelParams> {
        ModelParams::new(self.n, self.q, p, self.noise()?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::invalid("trials must be at least 1"));
        }
        if self.workers == 0 {
            return Err(Error::invalid("workers must be at least 1"));
        }
        if self.max_sweeps == 0 {
            return Err(Error::invalid("max_sweeps must be at least 1"));
        }
        PRange::new(self.p.lo, self.p.hi, self.p.step)?;
        self.params(self.p.lo).map(|_| ())
    }
}

/// One row of an error-rate table. Field order is the CSV column order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorRateRow {
    pub n: usize,
    pub q: usize,
    pub p: usize,
    pub a: f64,
    pub b: f64,
    pub trials: usize,
    pub errors: usize,
    pub error_rate: f64,
    pub std_err: f64,
    pub bound_eq14: f64,
    pub seed: u64,
}

pub const CSV_HEADER: &str = "n,q,p,a,b,trials,errors,error_rate,std_err,bound_eq14,seed";

fn rate_and_std_err(errors: usize, trials: usize) -> (f64, f64) {
    let t = trials as f64;
    let r = errors as f64 / t;
    (r, (r * (1.0 - r) / t).sqrt())
}

/// Empirical probability that a single update from the distorted target
/// misclassifies at least one neuron, next to the analytic bound, for each
/// `p` in the config's range.
pub fn error_rate(config: &ExperimentConfig) -> Result<Vec<ErrorRateRow>> {
    config.validate()?;
    let mut rows = Vec::new();
    for p in config.p.values() {
        let params = config.params(p)?;
        let outcomes = run_trials(config.workers, config.trials, |t| {
            one_step_trial(&params, &mut trial_rng(config.seed, t))
        })?;
        let errors = outcomes.iter().filter(|&&e| e > 0).count();
        let (error_rate, std_err) = rate_and_std_err(errors, config.trials);
        rows.push(ErrorRateRow {
            n: config.n,
            q: config.q,
            p,
            a: config.a,
            b: config.b,
            trials: config.trials,
            errors,
            error_rate,
            std_err,
            bound_eq14: chernov_error_bound(&params)?,
            seed: config.seed,
        });
    }
    Ok(rows)
}

/// Empirical recall failure rate at one `p` point of a capacity search.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CapacitySample {
    pub p: usize,
    pub trials: usize,
    pub failures: usize,
    pub error_rate: f64,
    pub std_err: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CapacityEstimate {
    /// Largest sampled `p` whose failure rate is at most `threshold`
    /// (`lo - 1` if even the low end fails).
    pub p_critical: usize,
    pub threshold: f64,
    pub trials_per_point: usize,
    /// `p_critical` bracketed by sampled points that clear / exceed the
    /// threshold by two standard errors.
    pub confidence_band: (usize, usize),
    pub samples: Vec<CapacitySample>,
    pub warnings: Vec<String>,
}

/// Whether a trial failed to recall the target. Exact recall is required
/// unless the sign noise is at least one half, where the negation counts.
fn recall_failed(config: &ExperimentConfig, report: &super::trial::TrialReport) -> bool {
    let recalled = if config.a >= 0.5 {
        report.recalled_mod_sign
    } else {
        report.recalled
    };
    !(report.converged && recalled)
}

fn sample_capacity(config: &ExperimentConfig, p: usize) -> Result<CapacitySample> {
    let params = config.params(p)?;
    let reports = run_trials(config.workers, config.trials, |t| {
        recall_trial(&params, &mut trial_rng(config.seed, t), config.max_sweeps)
    })?;
    let failures = reports.iter().filter(|r| recall_failed(config, r)).count();
    let (error_rate, std_err) = rate_and_std_err(failures, config.trials);
    Ok(CapacitySample {
        p,
        trials: config.trials,
        failures,
        error_rate,
        std_err,
    })
}

/// Bisection over the config's `p` range for the largest `p` whose recall
/// failure rate stays at or below `threshold`. Stops once the bracketing
/// interval is no wider than `max(1, 2% of p)`.
pub fn capacity_sweep(config: &ExperimentConfig, threshold: f64) -> Result<CapacityEstimate> {
    config.validate()?;
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::invalid(format!(
            "threshold {threshold} outside (0, 1)"
        )));
    }
    let mut samples: BTreeMap<usize, CapacitySample> = BTreeMap::new();
    let mut warnings = Vec::new();
    let mut eval = |p: usize| -> Result<f64> {
        if let Some(s) = samples.get(&p) {
            return Ok(s.error_rate);
        }
        let s = sample_capacity(config, p)?;
        samples.insert(p, s);
        Ok(s.error_rate)
    };

    let (lo, hi) = (config.p.lo, config.p.hi);
    let p_critical = if eval(lo)? > threshold {
        warnings.push(format!(
            "lowest p={lo} already exceeds threshold {threshold}"
        ));
        lo - 1
    } else if eval(hi)? <= threshold {
        if hi > lo {
            warnings.push(format!("highest p={hi} still within threshold {threshold}"));
        }
        hi
    } else {
        let (mut good, mut bad) = (lo, hi);
        while bad - good > 1.max(good / 50) {
            let mid = good + (bad - good) / 2;
            if eval(mid)? <= threshold {
                good = mid;
            } else {
                bad = mid;
            }
        }
        good
    };

    let samples: Vec<CapacitySample> = samples.into_values().collect();
    for (i, s1) in samples.iter().enumerate() {
        for s2 in &samples[i + 1..] {
            let spread = (s1.std_err.powi(2) + s2.std_err.powi(2)).sqrt();
            if s1.error_rate - s2.error_rate > 3.0 * spread.max(1.0 / s1.trials as f64) {
                warnings.push(format!(
                    "non-monotone error rate: p={} gives {:.4}, p={} gives {:.4}",
                    s1.p, s1.error_rate, s2.p, s2.error_rate
                ));
            }
        }
    }

    let lower = samples
        .iter()
        .filter(|s| s.p <= p_critical && s.error_rate + 2.0 * s.std_err <= threshold)
        .map(|s| s.p)
        .max()
        .unwrap_or(lo.min(p_critical));
    let upper = samples
        .iter()
        .filter(|s| s.p > p_critical && s.error_rate - 2.0 * s.std_err > threshold)
        .map(|s| s.p)
        .min()
        .unwrap_or(hi.max(p_critical));

    Ok(CapacityEstimate {
        p_critical,
        threshold,
        trials_per_point: config.trials,
        confidence_band: (lower.min(p_critical), upper.max(p_critical)),
        samples,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prange_parsing() {
        assert_eq!("7".parse::<PRange>().unwrap(), PRange::single(7));
        assert_eq!(
            "2:9".parse::<PRange>().unwrap(),
            PRange::new(2, 9, 1).unwrap()
        );
        let r: PRange = "2:9:3".parse().unwrap();
        assert_eq!(r.values().collect::<Vec<_>>(), vec![2, 5, 8]);
        assert!("0".parse::<PRange>().is_err());
        assert!("5:2".parse::<PRange>().is_err());
        assert!("a:b".parse::<PRange>().is_err());
        assert!("1:2:3:4".parse::<PRange>().is_err());
        assert_eq!(r.to_string(), "2:9:3");
    }

    #[test]
    fn trial_streams_differ() {
        use rand::Rng;
        let a: u64 = trial_rng(1, 0).random();
        let b: u64 = trial_rng(1, 1).random();
        let c: u64 = trial_rng(1, 0).random();
        assert_ne!(a, b);
        assert_eq!(a, c);
    }

    #[test]
    fn trivial_error_rate_point() {
        let config = ExperimentConfig {
            n: 20,
            q: 2,
            p: PRange::single(1),
            trials: 1,
            ..Default::default()
        };
        let rows = error_rate(&config).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].errors, 0);
        assert_eq!(rows[0].error_rate, 0.0);
    }

    #[test]
    fn error_rate_invariant_under_workers() {
        let base = ExperimentConfig {
            n: 40,
            q: 2,
            p: PRange::new(4, 12, 4).unwrap(),
            a: 0.1,
            b: 0.1,
            trials: 64,
            seed: 17,
            ..Default::default()
        };
        let one = error_rate(&base).unwrap();
        let eight = error_rate(&ExperimentConfig {
            workers: 8,
            ..base.clone()
        })
        .unwrap();
        assert_eq!(one, eight);
    }

    #[test]
    fn rejects_bad_config() {
        let bad = ExperimentConfig {
            trials: 0,
            ..Default::default()
        };
        assert!(error_rate(&bad).is_err());
        let bad = ExperimentConfig {
            workers: 0,
            ..Default::default()
        };
        assert!(error_rate(&bad).is_err());
        let bad = ExperimentConfig {
            a: 1.5,
            ..Default::default()
        };
        assert!(error_rate(&bad).is_err());
    }

    #[test]
    fn degenerate_capacity_range() {
        let config = ExperimentConfig {
            n: 30,
            q: 2,
            p: PRange::single(1),
            trials: 20,
            ..Default::default()
        };
        let est = capacity_sweep(&config, 0.05).unwrap();
        assert_eq!(est.p_critical, 1);
        let (lo, hi) = est.confidence_band;
        assert!(lo <= est.p_critical && est.p_critical <= hi);
        assert!(capacity_sweep(&config, 0.0).is_err());
        assert!(capacity_sweep(&config, 1.0).is_err());
    }

    #[test]
    fn capacity_within_band() {
        let config = ExperimentConfig {
            n: 60,
            q: 2,
            p: PRange::new(1, 60, 1).unwrap(),
            trials: 60,
            seed: 3,
            workers: 4,
            ..Default::default()
        };
        let est = capacity_sweep(&config, 0.1).unwrap();
        let (lo, hi) = est.confidence_band;
        assert!(lo <= est.p_critical && est.p_critical <= hi);
        assert!(est.p_critical >= 1 && est.p_critical < 60);
    }
}
