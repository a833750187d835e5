use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use riesz_core::estimation::Endpoint;
use riesz_core::RieszError;

mod commands;
mod config;

use config::{ParamsSpec, ProfileSpec, RunConfig};

/// Weighted Riesz potentials on radial functions: exponent chart, radial
/// quadrature, Monte Carlo cross-checks and operator-norm estimates.
#[derive(Parser, Debug)]
#[command(name = "riesz", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON run configuration; flags below override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Write the main output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Structured JSON output.
    #[arg(long, global = true)]
    json: bool,
    /// Worker threads (results do not depend on it).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[arg(long, global = true, allow_hyphen_values = true)]
    d: Option<i64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    alpha: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    beta: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    lambda: Option<f64>,
    /// Comma-separated p values.
    #[arg(long, global = true, value_delimiter = ',')]
    p: Option<Vec<f64>>,
    /// f0, g0, h, bump, or a JSON file with a list of pieces.
    #[arg(long, global = true)]
    profile: Option<String>,
    /// Second profile of the bilinear form.
    #[arg(long, global = true)]
    g_profile: Option<String>,
    /// Comma-separated eps values in (0, 1/2).
    #[arg(long, global = true, value_delimiter = ',')]
    eps: Option<Vec<f64>>,
    /// Comma-separated radii.
    #[arg(long, global = true, value_delimiter = ',')]
    radii: Option<Vec<f64>>,
    #[arg(long, global = true)]
    n_samples: Option<u64>,
    /// lower or upper (default: both).
    #[arg(long, global = true)]
    endpoint: Option<String>,
    /// Dilation factor for the scaling check of `potential`.
    #[arg(long, global = true)]
    t: Option<f64>,
    #[arg(long, global = true)]
    max_iter: Option<usize>,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Exponents p_±, q_±, kappa and the conjugate line.
    Info,
    /// L_p norms of a profile, by quadrature and in closed form.
    Norm,
    /// The potential on the log grid (CSV plus sidecar) or at --radii.
    Potential,
    /// B(f, g) and its adjoint-swapped counterpart.
    Bilinear,
    /// Riesz ratios over the eps grid at both endpoints.
    Sweep,
    /// Endpoint slope fits against -kappa.
    Fit,
    /// Power-method lower bounds for the operator norm.
    Estimate,
    /// Quadrature against the Monte Carlo oracle at probe radii.
    OracleCheck,
}

fn merge(cli: &Cli) -> Result<RunConfig, RieszError> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if cli.d.is_some() || cli.alpha.is_some() || cli.beta.is_some() || cli.lambda.is_some() {
        let base = cfg.params;
        let pick = |flag: Option<f64>, from: Option<f64>, name: &str| {
            flag.or(from).ok_or_else(|| RieszError::Config(format!("missing parameter {name}")))
        };
        cfg.params = Some(ParamsSpec {
            d: cli.d.or(base.map(|b| b.d)).ok_or_else(|| RieszError::Config("missing parameter d".into()))?,
            alpha: pick(cli.alpha, base.map(|b| b.alpha), "alpha")?,
            beta: pick(cli.beta, base.map(|b| b.beta), "beta")?,
            lambda: pick(cli.lambda, base.map(|b| b.lambda), "lambda")?,
        });
    }
    if let Some(p) = &cli.p {
        cfg.p = Some(p.clone());
    }
    if let Some(s) = &cli.profile {
        cfg.profile = Some(ProfileSpec::from_flag(s)?);
    }
    if let Some(s) = &cli.g_profile {
        cfg.g_profile = Some(ProfileSpec::from_flag(s)?);
    }
    if let Some(e) = &cli.eps {
        cfg.eps_grid = Some(e.clone());
    }
    if let Some(r) = &cli.radii {
        cfg.radii = Some(r.clone());
    }
    if let Some(n) = cli.n_samples {
        cfg.n_samples = Some(n);
    }
    if let Some(s) = cli.seed {
        cfg.seed = Some(s);
    }
    if let Some(e) = &cli.endpoint {
        cfg.endpoint = Some(e.parse::<Endpoint>()?);
    }
    if let Some(t) = cli.t {
        cfg.t = Some(t);
    }
    if let Some(m) = cli.max_iter {
        cfg.power_method.max_iter = m;
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<commands::Report, RieszError> {
    let cfg = merge(cli)?;
    match cli.command {
        Command::Info => commands::info(&cfg),
        Command::Norm => commands::norm(&cfg),
        Command::Potential => commands::potential(&cfg),
        Command::Bilinear => commands::bilinear_cmd(&cfg),
        Command::Sweep => commands::sweep_cmd(&cfg),
        Command::Fit => commands::fit(&cfg),
        Command::Estimate => commands::estimate(&cfg),
        Command::OracleCheck => commands::oracle_check(&cfg),
    }
}

fn emit(cli: &Cli, report: &commands::Report) -> std::io::Result<()> {
    let body = if cli.json {
        serde_json::to_string_pretty(&report.json).expect("report serializes") + "\n"
    } else {
        report.text.clone()
    };
    match &cli.out {
        Some(path) => {
            std::fs::write(path, body)?;
            for (suffix, content) in &report.side_files {
                let mut side = path.as_os_str().to_owned();
                side.push(suffix);
                std::fs::write(PathBuf::from(side), content)?;
            }
        }
        None => print!("{body}"),
    }
    for note in &report.notes {
        eprintln!("{note}");
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot set up {n} threads: {e}");
            return ExitCode::from(2);
        }
    }
    match run(&cli) {
        Ok(report) => {
            if let Err(e) = emit(&cli, &report) {
                eprintln!("error: cannot write output: {e}");
                return ExitCode::from(1);
            }
            if report.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config_error() { 2 } else { 1 })
        }
    }
}
