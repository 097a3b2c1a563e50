//! Command-line front end: trains populations, runs the mixture-evaluation
//! experiments, and writes deterministic CSV/JSON artifacts.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use simplexpop_core::{
    any_mixture_csv, any_mixture_experiment, cross_payoff_matrix, exploitability_csv, jsd_matrix,
    matrix_csv, posterior_weighted_csv, posterior_weighted_divergence, rpp, rpp_csv,
    simulate_posterior_episode, train, write_atomic, Candidate, Checkpoint, ExperimentConfig,
    MixtureWeights, RngForge, TabularPolicy, NASH_TOL,
};

/// Output directory override, between the --out-dir flag and the config file.
const OUT_DIR_ENV: &str = "SIMPLEXPOP_OUT_DIR";

#[derive(Parser)]
#[command(
    name = "simplexpop",
    version,
    about = "Population learning over the policy simplex for imperfect-information goofspiel"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a population from a JSON config; writes a checkpoint and the
    /// frontier-gain history.
    Train {
        /// Experiment config (JSON).
        config: PathBuf,
        /// Output directory (overrides SIMPLEXPOP_OUT_DIR and the config).
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Score best-response, informed, uninformed, and equilibrium candidates
    /// against sampled opponent mixtures from a trained checkpoint.
    Eval {
        checkpoint: PathBuf,
        /// Override the stored Dirichlet concentration levels.
        #[arg(long, value_delimiter = ',')]
        levels: Option<Vec<f64>>,
        /// Override the stored per-level sample count.
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Simulate episodes against each effective opponent and trace the
    /// observer's posterior over opponent identities.
    PosteriorTrace {
        checkpoint: PathBuf,
        /// Episodes per opponent.
        #[arg(long, default_value_t = 8)]
        episodes: usize,
        /// Prior over the effective opponents, comma separated (defaults to
        /// uniform).
        #[arg(long, value_delimiter = ',')]
        prior: Option<Vec<f64>>,
        /// RNG seed (defaults to the checkpoint's training seed).
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Relative population performance between two checkpoints.
    Rpp {
        checkpoint_a: PathBuf,
        checkpoint_b: PathBuf,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Per-decision divergence matrix between two checkpoints' populations.
    Jsd {
        checkpoint_a: PathBuf,
        checkpoint_b: PathBuf,
        /// Rollout episodes per row policy (defaults to the first
        /// checkpoint's eval setting).
        #[arg(long)]
        episodes: Option<usize>,
        /// Also write the posterior-weighted divergence curve against this
        /// column opponent.
        #[arg(long)]
        pwd_column: Option<usize>,
        /// RNG seed (defaults to the first checkpoint's training seed).
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

enum Failure {
    Usage(String),
    Runtime(String),
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn runtime(err: impl std::fmt::Display) -> Failure {
    Failure::Runtime(err.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Train { config, out_dir } => cmd_train(&config, out_dir),
        Command::Eval { checkpoint, levels, samples, out_dir } => {
            cmd_eval(&checkpoint, levels, samples, out_dir)
        }
        Command::PosteriorTrace { checkpoint, episodes, prior, seed, out_dir } => {
            cmd_posterior_trace(&checkpoint, episodes, prior, seed, out_dir)
        }
        Command::Rpp { checkpoint_a, checkpoint_b, out_dir } => {
            cmd_rpp(&checkpoint_a, &checkpoint_b, out_dir)
        }
        Command::Jsd { checkpoint_a, checkpoint_b, episodes, pwd_column, seed, out_dir } => {
            cmd_jsd(&checkpoint_a, &checkpoint_b, episodes, pwd_column, seed, out_dir)
        }
    }
}

fn read_config(path: &Path) -> Result<ExperimentConfig, Failure> {
    if !path.is_file() {
        return Err(usage(format!("config file {} not found", path.display())));
    }
    let text = std::fs::read_to_string(path)
        .map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    let config: ExperimentConfig = serde_json::from_str(&text)
        .map_err(|e| usage(format!("invalid config {}: {e}", path.display())))?;
    config.validate().map_err(|e| usage(format!("invalid config {}: {e}", path.display())))?;
    Ok(config)
}

fn load_checkpoint(path: &Path) -> Result<Checkpoint, Failure> {
    if !path.is_file() {
        return Err(usage(format!("checkpoint {} not found", path.display())));
    }
    Checkpoint::load(path).map_err(|e| runtime(format!("cannot load {}: {e}", path.display())))
}

fn resolve_out_dir(flag: Option<PathBuf>, config_dir: Option<&Path>) -> PathBuf {
    if let Some(dir) = flag {
        return dir;
    }
    if let Ok(dir) = std::env::var(OUT_DIR_ENV) {
        if !dir.is_empty() {
            return PathBuf::from(dir);
        }
    }
    config_dir.map_or_else(|| PathBuf::from("out"), Path::to_path_buf)
}

fn write_artifact(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, Failure> {
    let path = dir.join(name);
    write_atomic(&path, contents.as_bytes())
        .map_err(|e| runtime(format!("cannot write {}: {e}", path.display())))?;
    Ok(path)
}

fn gain_history(ck: &Checkpoint) -> Vec<(usize, f64)> {
    ck.history.iter().map(|r| (r.round, r.frontier_gain)).collect()
}

fn cmd_train(config_path: &Path, out_dir: Option<PathBuf>) -> Result<(), Failure> {
    let config = read_config(config_path)?;
    let out = resolve_out_dir(out_dir, config.out_dir.as_deref());
    let result = train(&config.effective_trainer(), config.spec).map_err(runtime)?;
    let ck = Checkpoint::from_result(&config, &result);
    let ck_path = out.join("checkpoint.json");
    ck.save(&ck_path).map_err(|e| runtime(format!("cannot write {}: {e}", ck_path.display())))?;
    write_artifact(&out, "exploitability.csv", &exploitability_csv(&gain_history(&ck)))?;
    let gain = ck.history.last().map_or(0.0, |r| r.frontier_gain);
    println!(
        "trained {} slots in {} rounds, final frontier gain {gain:?}; wrote {}",
        ck.policies.len(),
        ck.history.len(),
        ck_path.display()
    );
    Ok(())
}

fn cmd_eval(
    ck_path: &Path,
    levels: Option<Vec<f64>>,
    samples: Option<usize>,
    out_dir: Option<PathBuf>,
) -> Result<(), Failure> {
    let ck = load_checkpoint(ck_path)?;
    let out = resolve_out_dir(out_dir, ck.config.out_dir.as_deref());
    let levels = levels.unwrap_or_else(|| ck.config.eval.levels.clone());
    if levels.is_empty() {
        return Err(usage("empty concentration level list"));
    }
    let samples = samples.unwrap_or(ck.config.eval.samples_per_level);
    if samples == 0 {
        return Err(usage("samples must be at least 1"));
    }
    let pop = ck.snapshot().map_err(runtime)?;
    let store = ck.store().map_err(runtime)?;
    let forge = RngForge::new(ck.rng_seed);
    let report = any_mixture_experiment(&pop, &store, &levels, samples, ck.config.eval.mode, &forge)
        .map_err(runtime)?;
    let path = write_artifact(&out, "any_mixture.csv", &any_mixture_csv(&report))?;
    write_artifact(&out, "exploitability.csv", &exploitability_csv(&gain_history(&ck)))?;
    for lr in &report.levels {
        println!(
            "alpha {:>7.3}: entropy {:.3} exact {:+.4} informed {:+.4} uninformed {:+.4} ne {:+.4}",
            lr.alpha,
            lr.mean_entropy(),
            lr.mean_return(Candidate::ExactBr),
            lr.mean_return(Candidate::Informed),
            lr.mean_return(Candidate::Uninformed),
            lr.mean_return(Candidate::NeMixture),
        );
    }
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_posterior_trace(
    ck_path: &Path,
    episodes: usize,
    prior: Option<Vec<f64>>,
    seed: Option<u64>,
    out_dir: Option<PathBuf>,
) -> Result<(), Failure> {
    if episodes == 0 {
        return Err(usage("episodes must be at least 1"));
    }
    let ck = load_checkpoint(ck_path)?;
    let out = resolve_out_dir(out_dir, ck.config.out_dir.as_deref());
    let pop = ck.snapshot().map_err(runtime)?;
    let store = ck.store().map_err(runtime)?;
    let effective = pop.effective_indices();
    let k = effective.len();
    let candidates: Vec<TabularPolicy> =
        effective.iter().map(|&i| pop.policies()[i].clone()).collect();
    let prior = match prior {
        Some(w) => {
            if w.len() != k {
                return Err(usage(format!(
                    "prior has {} weights but the population has {k} effective policies",
                    w.len()
                )));
            }
            MixtureWeights::new(w).map_err(|e| usage(format!("invalid prior: {e}")))?
        }
        None => MixtureWeights::uniform(k),
    };
    let sigma_bar = MixtureWeights::uniform_over(pop.len(), &effective);
    let observer = store.lookup_conditional(&sigma_bar).map_err(runtime)?.1.clone();
    let forge = RngForge::new(seed.unwrap_or(ck.rng_seed));

    let mut csv = String::from("episode,turn,true_opponent");
    for j in 0..k {
        csv.push_str(&format!(",posterior_{j}"));
    }
    csv.push('\n');
    let push_row = |csv: &mut String, episode: usize, turn: usize, truth: usize, w: &[f64]| {
        csv.push_str(&format!("{episode},{turn},{truth}"));
        for v in w {
            csv.push_str(&format!(",{v}"));
        }
        csv.push('\n');
    };
    for (c, &slot) in effective.iter().enumerate() {
        for e in 0..episodes {
            let episode_id = c * episodes + e;
            let mut rng = forge.fork(&format!("posterior-trace/opponent{c}/episode{e}"));
            let trace = simulate_posterior_episode(
                &observer,
                &pop.policies()[slot],
                &candidates,
                &prior,
                &mut rng,
            )
            .map_err(runtime)?;
            push_row(&mut csv, episode_id, 0, c, prior.weights());
            for (t, w) in trace.iter().enumerate() {
                push_row(&mut csv, episode_id, t + 1, c, w.weights());
            }
        }
    }
    let path = write_artifact(&out, "posterior_trace.csv", &csv)?;
    println!("traced {} episodes against {k} opponents; wrote {}", episodes * k, path.display());
    Ok(())
}

fn cmd_rpp(a_path: &Path, b_path: &Path, out_dir: Option<PathBuf>) -> Result<(), Failure> {
    let a = load_checkpoint(a_path)?;
    let b = load_checkpoint(b_path)?;
    if a.spec != b.spec {
        return Err(runtime(format!(
            "checkpoints play different games ({} vs {} cards)",
            a.spec.num_cards, b.spec.num_cards
        )));
    }
    let out = resolve_out_dir(out_dir, a.config.out_dir.as_deref());
    let pa = a.snapshot().map_err(runtime)?;
    let pb = b.snapshot().map_err(runtime)?;
    let u = cross_payoff_matrix(pa.policies(), pb.policies()).map_err(runtime)?;
    let value = rpp(&u, NASH_TOL).map_err(runtime)?;
    write_artifact(&out, "cross_payoff.csv", &matrix_csv(&u))?;
    write_artifact(&out, "rpp.csv", &rpp_csv(value))?;
    println!("rpp {value:?}");
    Ok(())
}

fn cmd_jsd(
    a_path: &Path,
    b_path: &Path,
    episodes: Option<usize>,
    pwd_column: Option<usize>,
    seed: Option<u64>,
    out_dir: Option<PathBuf>,
) -> Result<(), Failure> {
    let a = load_checkpoint(a_path)?;
    let b = load_checkpoint(b_path)?;
    if a.spec != b.spec {
        return Err(runtime(format!(
            "checkpoints play different games ({} vs {} cards)",
            a.spec.num_cards, b.spec.num_cards
        )));
    }
    let episodes = episodes.unwrap_or(a.config.eval.episodes);
    if episodes == 0 {
        return Err(usage("episodes must be at least 1"));
    }
    let out = resolve_out_dir(out_dir, a.config.out_dir.as_deref());
    let pa = a.snapshot().map_err(runtime)?;
    let pb = b.snapshot().map_err(runtime)?;
    let forge = RngForge::new(seed.unwrap_or(a.rng_seed));
    let mut rng = forge.fork("jsd");
    let d = jsd_matrix(&pa, &pb, episodes, &mut rng).map_err(runtime)?;
    let path = write_artifact(&out, "jsd.csv", &matrix_csv(d.values()))?;
    println!("{} x {} divergence matrix; wrote {}", d.num_rows(), d.num_cols(), path.display());
    if let Some(j) = pwd_column {
        if j >= d.num_cols() {
            return Err(usage(format!("column {j} out of range for {} columns", d.num_cols())));
        }
        let store = a.store().map_err(runtime)?;
        let sigma_bar = MixtureWeights::uniform_over(pa.len(), &pa.effective_indices());
        let observer = store.lookup_conditional(&sigma_bar).map_err(runtime)?.1.clone();
        let opponent = pb.policies()[j].clone();
        let mut rng = forge.fork(&format!("posterior-weighted/column{j}"));
        let curve =
            posterior_weighted_divergence(&d, &pa, &observer, &opponent, j, episodes, &mut rng)
                .map_err(runtime)?;
        let path = write_artifact(&out, "posterior_weighted.csv", &posterior_weighted_csv(&curve))?;
        println!("posterior-weighted curve vs column {j}; wrote {}", path.display());
    }
    Ok(())
}
