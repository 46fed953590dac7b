use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use paramnet::harness::{
    self, audit_fixed_points, capacity_sweep, draw_instance, emit_results, error_rate,
    one_step_errors, trial_rng, write_results, ExperimentConfig, OutputFormat, PRange,
};
use paramnet::model::{load_patterns, random_order, save_patterns, Dynamics};
use paramnet::theory::{chernov_error_bound, potts_capacity_ratio, storage_capacity};
use paramnet::{Error, Network, Result};

#[derive(Parser, Debug)]
#[command(
    name = "paramnet",
    version,
    about = "Vector-neuron associative memory simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one recall trial and print the trajectory sweep by sweep.
    Recall {
        #[command(flatten)]
        common: Common,
        /// Write the drawn pattern set to this file.
        #[arg(long)]
        save_patterns: Option<PathBuf>,
    },
    /// Empirical one-step error rate against the analytic bound.
    ErrorRate {
        #[command(flatten)]
        common: Common,
    },
    /// Bisection search for the largest p recalled within a failure threshold.
    Capacity {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        threshold: Option<f64>,
    },
    /// Print the error bound and asymptotic capacity.
    Bound {
        #[command(flatten)]
        common: Common,
    },
    /// Enumerate every fixed point of a small network.
    FixedPoints {
        #[command(flatten)]
        common: Common,
        /// Load stored patterns from this file instead of drawing them.
        #[arg(long)]
        patterns: Option<PathBuf>,
    },
    /// Compare capacity per neuron with the Potts-glass network.
    ComparePotts {
        #[arg(long, default_value_t = 4)]
        q: usize,
    },
}

#[derive(Args, Debug, Default)]
struct Common {
    /// TOML file with experiment settings; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    q: Option<usize>,
    /// Pattern count or inclusive range `lo:hi[:step]`.
    #[arg(long)]
    p: Option<PRange>,
    /// Sign-flip probability.
    #[arg(long)]
    a: Option<f64>,
    /// Frequency-change probability.
    #[arg(long)]
    b: Option<f64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    max_sweeps: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    format: Option<OutputFormat>,
}

/// Config file layout: every experiment field is optional.
#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    n: Option<usize>,
    q: Option<usize>,
    p: Option<PRange>,
    a: Option<f64>,
    b: Option<f64>,
    trials: Option<usize>,
    seed: Option<u64>,
    workers: Option<usize>,
    max_sweeps: Option<usize>,
    out: Option<PathBuf>,
    format: Option<OutputFormat>,
    threshold: Option<f64>,
}

fn read_config_file(path: &Path) -> Result<ConfigFile> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    toml::from_str(&text).map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))
}

impl Common {
    /// Defaults, overridden by the config file, overridden by flags.
    fn resolve(&self) -> Result<(ExperimentConfig, Option<f64>)> {
        let file = match &self.config {
            Some(path) => read_config_file(path)?,
            None => ConfigFile::default(),
        };
        let d = ExperimentConfig::default();
        let config = ExperimentConfig {
            n: self.n.or(file.n).unwrap_or(d.n),
            q: self.q.or(file.q).unwrap_or(d.q),
            p: self.p.or(file.p).unwrap_or(d.p),
            a: self.a.or(file.a).unwrap_or(d.a),
            b: self.b.or(file.b).unwrap_or(d.b),
            trials: self.trials.or(file.trials).unwrap_or(d.trials),
            seed: self.seed.or(file.seed).unwrap_or(d.seed),
            workers: self.workers.or(file.workers).unwrap_or(d.workers),
            max_sweeps: self.max_sweeps.or(file.max_sweeps).unwrap_or(d.max_sweeps),
            out: self.out.clone().or(file.out),
            format: self.format.or(file.format).unwrap_or(d.format),
        };
        config.validate()?;
        Ok((config, file.threshold))
    }
}

fn write_output(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|source| Error::Io {
            path: path.clone(),
            source,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_recall(common: &Common, save: Option<&Path>) -> Result<()> {
    let (config, _) = common.resolve()?;
    let p = config.p.lo;
    let params = config.params(p)?;
    let mut rng = trial_rng(config.seed, 0);
    let (net, distorted) = draw_instance(&params, &mut rng)?;
    if let Some(path) = save {
        save_patterns(path, net.patterns())?;
    }
    let target = net.patterns()[0].clone();
    let bound = chernov_error_bound(&params)?;
    println!(
        "n={} q={} p={} a={} b={} seed={} bound_eq14={bound:.6e}",
        config.n, config.q, p, config.a, config.b, config.seed
    );
    println!(
        "distorted: hamming={} one_step_errors={}",
        distorted.hamming(&target),
        one_step_errors(&net, &distorted, 0)?
    );
    println!("sweep changed twice_energy overlap hamming");
    let mut dynamics = Dynamics::new(&net, distorted)?;
    let mut converged = false;
    let mut sweeps = 0;
    while sweeps < config.max_sweeps {
        let order = random_order(net.n(), &mut rng);
        let changed = dynamics.sweep(&order)?;
        sweeps += 1;
        let state = dynamics.state();
        println!(
            "{sweeps} {changed} {} {} {}",
            net.twice_energy(state)?,
            state.overlap(&target),
            state.hamming(&target)
        );
        if changed == 0 {
            converged = true;
            break;
        }
    }
    let state = dynamics.state();
    println!(
        "converged={converged} sweeps={sweeps} recalled={} recalled_mod_sign={}",
        *state == target,
        *state == target || *state == target.negated()
    );
    Ok(())
}

fn cmd_error_rate(common: &Common) -> Result<()> {
    let (config, _) = common.resolve()?;
    let rows = error_rate(&config)?;
    match &config.out {
        Some(path) => emit_results(&rows, path, config.format),
        None => {
            let stdout = std::io::stdout();
            write_results(&rows, stdout.lock(), config.format)
        }
    }
}

#[derive(Serialize)]
struct CapacityOutput<'a> {
    config: &'a ExperimentConfig,
    estimate: &'a harness::CapacityEstimate,
    asymptotic_capacity: f64,
}

fn cmd_capacity(common: &Common, threshold: Option<f64>) -> Result<()> {
    let (config, file_threshold) = common.resolve()?;
    let threshold = threshold.or(file_threshold).unwrap_or(0.05);
    let est = capacity_sweep(&config, threshold)?;
    for w in &est.warnings {
        eprintln!("warning: {w}");
    }
    let asymptotic = storage_capacity(config.n, config.q, config.noise()?)?;
    let text = match config.format {
        OutputFormat::Json => {
            let out = CapacityOutput {
                config: &config,
                estimate: &est,
                asymptotic_capacity: asymptotic,
            };
            serde_json::to_string_pretty(&out).expect("plain data serializes") + "\n"
        }
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for s in &est.samples {
                w.serialize(s).expect("plain data serializes");
            }
            let body =
                String::from_utf8(w.into_inner().expect("in-memory writer")).expect("csv is utf-8");
            format!(
                "# n={} q={} a={} b={} seed={} threshold={threshold} p_critical={} band={}:{} asymptotic={asymptotic:.3}\n{body}",
                config.n,
                config.q,
                config.a,
                config.b,
                config.seed,
                est.p_critical,
                est.confidence_band.0,
                est.confidence_band.1
            )
        }
    };
    write_output(&config.out, &text)
}

fn cmd_bound(common: &Common) -> Result<()> {
    let (config, _) = common.resolve()?;
    let mut text = String::from("n,q,p,a,b,bound_eq14,capacity_asymptotic\n");
    let cap = storage_capacity(config.n, config.q, config.noise()?)?;
    for p in config.p.values() {
        let bound = chernov_error_bound(&config.params(p)?)?;
        text += &format!(
            "{},{},{p},{},{},{bound:e},{cap}\n",
            config.n, config.q, config.a, config.b
        );
    }
    write_output(&config.out, &text)
}

fn cmd_fixed_points(common: &Common, patterns: Option<&Path>) -> Result<()> {
    let net = match patterns {
        Some(path) => Network::new(load_patterns(path)?)?,
        None => {
            let (config, _) = common.resolve()?;
            Network::random(
                config.n,
                config.q,
                config.p.lo,
                &mut trial_rng(config.seed, 0),
            )?
        }
    };
    let audit = audit_fixed_points(&net)?;
    let mut text = paramnet::model::write_patterns(net.patterns())?;
    text += &format!(
        "# fixed_points={} matches_stored={} degenerate={}\n",
        audit.found.len(),
        audit.matches_stored(),
        audit.degenerate
    );
    for s in &audit.found {
        let tag = if audit.spurious.contains(s) {
            "spurious"
        } else {
            "stored"
        };
        text += &format!("{s}  # {tag}\n");
    }
    for s in &audit.missing {
        text += &format!("# missing: {s}\n");
    }
    write_output(&common.out, &text)
}

fn cmd_compare_potts(q: usize) -> Result<()> {
    let c = potts_capacity_ratio(q)?;
    println!(
        "q={} ours={:.6} potts={:.6} ratio={:.6}",
        c.q, c.ours, c.potts, c.ratio
    );
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match &cli.command {
        Command::Recall {
            common,
            save_patterns,
        } => cmd_recall(common, save_patterns.as_deref()),
        Command::ErrorRate { common } => cmd_error_rate(common),
        Command::Capacity { common, threshold } => cmd_capacity(common, *threshold),
        Command::Bound { common } => cmd_bound(common),
        Command::FixedPoints { common, patterns } => cmd_fixed_points(common, patterns.as_deref()),
        Command::ComparePotts { q } => cmd_compare_potts(*q),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => {
            let _ = std::io::stdout().flush();
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
