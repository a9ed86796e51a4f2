//! Command-line front end: run an experiment and write its report.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use bs_ssd::report::emit_report;
use bs_ssd::risk::Progress;
use bs_ssd::{run_with_progress, Error, RawConfig};

#[derive(Parser, Debug)]
#[command(name = "bs-ssd", version, about = "Optimal sample size for the Birnbaum-Saunders mean")]
struct Cli {
    /// Config file (key = value with [prior], [loss], [mcmc], [run] sections)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Loss function: L1, L2, L3 or L4
    #[arg(long)]
    loss: Option<String>,
    #[arg(long)]
    a1: Option<String>,
    #[arg(long)]
    b1: Option<String>,
    /// Defaults to a1
    #[arg(long)]
    a2: Option<String>,
    /// Defaults to b1
    #[arg(long)]
    b2: Option<String>,
    /// Interval weight for L3, in (0, 1)
    #[arg(long)]
    rho: Option<String>,
    /// Width weight for L4, > 0
    #[arg(long)]
    gamma: Option<String>,
    /// Per-unit sampling cost c
    #[arg(long)]
    cost: Option<String>,
    /// start:stop:step or a comma list
    #[arg(long)]
    grid: Option<String>,
    /// Outer Monte Carlo replicates per risk estimate
    #[arg(long = "K")]
    k: Option<String>,
    /// Posterior draws kept per chain
    #[arg(long)]
    keep: Option<String>,
    #[arg(long = "burn-in")]
    burn_in: Option<String>,
    #[arg(long)]
    thin: Option<String>,
    /// Independent runs combined by consensus
    #[arg(long)]
    reps: Option<String>,
    #[arg(long = "estimates-per-n")]
    estimates_per_n: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Output directory
    #[arg(long, default_value = "ssd-out")]
    out: PathBuf,
    /// Worker threads (default: all cores)
    #[arg(long)]
    threads: Option<usize>,
    /// Suppress progress lines
    #[arg(long)]
    quiet: bool,
}

const EXIT_VALIDATION: u8 = 1;
const EXIT_RUNTIME: u8 = 2;

fn build_config(cli: &Cli) -> Result<bs_ssd::RunConfig, Error> {
    let mut raw = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
                path: path.clone(),
                source,
            })?;
            RawConfig::parse(&text)?
        }
        None => RawConfig::default(),
    };
    let overrides = [
        ("loss", &cli.loss),
        ("a1", &cli.a1),
        ("b1", &cli.b1),
        ("a2", &cli.a2),
        ("b2", &cli.b2),
        ("rho", &cli.rho),
        ("gamma", &cli.gamma),
        ("cost", &cli.cost),
        ("grid", &cli.grid),
        ("K", &cli.k),
        ("keep", &cli.keep),
        ("burn_in", &cli.burn_in),
        ("thin", &cli.thin),
        ("replicates", &cli.reps),
        ("estimates_per_n", &cli.estimates_per_n),
        ("seed", &cli.seed),
    ];
    for (key, value) in overrides {
        if let Some(v) = value {
            raw.set(key, v.as_str())?;
        }
    }
    raw.build()
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_VALIDATION } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };

    let config = match build_config(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(if matches!(e, Error::Io { .. }) { EXIT_RUNTIME } else { EXIT_VALIDATION });
        }
    };

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cli.threads {
        pool = pool.num_threads(t);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(EXIT_RUNTIME);
        }
    };

    let quiet = cli.quiet;
    let progress = move |rep: usize, event: &Progress| {
        if quiet {
            return;
        }
        match event {
            Progress::PointFinished { n, replicate, risk, effective_k } => {
                eprintln!("[replicate {rep}] n = {n:>5} estimate {replicate:>2}: risk {risk:.6} (K = {effective_k})");
            }
            Progress::PointFailed { n, replicate, message } => {
                eprintln!("[replicate {rep}] n = {n:>5} estimate {replicate:>2}: FAILED {message}");
            }
            Progress::PointStarted { .. } => {}
        }
    };

    let manifest = match pool.install(|| run_with_progress(&config, &progress)) {
        Ok(m) => m,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(if e.is_validation() { EXIT_VALIDATION } else { EXIT_RUNTIME });
        }
    };

    if let Err(e) = emit_report(&manifest, &cli.out) {
        eprintln!("error: {e}");
        return ExitCode::from(EXIT_RUNTIME);
    }

    for rep in &manifest.replicates {
        let r = &rep.result;
        match r.optimal_n() {
            Some(n) => println!(
                "replicate {}: n_o = {n} (E = {:.6}, G = {:.6}, R2 = {:.4})",
                rep.index, r.curve.e_hat, r.curve.g_hat, r.curve.r_squared
            ),
            None => println!("replicate {}: not worth sampling (G = {:.6})", rep.index, r.curve.g_hat),
        }
    }
    match manifest.consensus.optimal_n() {
        Some(n) => println!("consensus: n_o = {n}"),
        None => println!("consensus: not worth sampling"),
    }
    println!("report written to {}", cli.out.display());
    ExitCode::SUCCESS
}
