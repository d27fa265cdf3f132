use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fluxdg::study::{
    dump_solution_grid, run_convergence, run_diagnostics, StudyConfig, OUT_DIR_ENV,
};
use fluxdg::{DgError, Result};

#[derive(Parser)]
#[command(
    name = "fluxdg",
    version,
    about = "Flux-stabilized DG solver for a diffusion-reaction model problem"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Error table and observed rates for every configured degree.
    Convergence(Common),
    /// Sample the discrete and exact solution on a uniform grid.
    Grid {
        #[command(flatten)]
        common: Common,
        /// Elements per side of the mesh to solve on.
        #[arg(long)]
        n: usize,
        /// Grid points per side.
        #[arg(long, default_value_t = 101)]
        resolution: usize,
    },
    /// Inf-sup constant, inequality probes and residual checks.
    Diagnostics(Common),
}

#[derive(Args)]
struct Common {
    /// key = value config file
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    case: Option<String>,
    /// Comma-separated polynomial degrees.
    #[arg(long)]
    p: Option<String>,
    /// Comma-separated elements per side.
    #[arg(long)]
    levels: Option<String>,
    #[arg(long)]
    sigma: Option<String>,
    #[arg(long)]
    lambda: Option<String>,
    #[arg(long)]
    zeta: Option<String>,
    #[arg(long)]
    nu: Option<String>,
    #[arg(long)]
    theta: Option<String>,
    #[arg(long)]
    out: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// direct or gmres
    #[arg(long)]
    solver: Option<String>,
    #[arg(long)]
    tol: Option<String>,
    #[arg(long)]
    samples: Option<String>,
}

impl Common {
    fn resolve(&self) -> Result<StudyConfig> {
        let mut cfg = match &self.config {
            Some(path) => StudyConfig::from_file(path)?,
            None => StudyConfig::default(),
        };
        if let Ok(dir) = std::env::var(OUT_DIR_ENV) {
            if !dir.is_empty() {
                cfg.set("out", &dir)?;
            }
        }
        let flags = [
            ("case", &self.case),
            ("p", &self.p),
            ("levels", &self.levels),
            ("sigma", &self.sigma),
            ("lambda", &self.lambda),
            ("zeta", &self.zeta),
            ("nu", &self.nu),
            ("theta", &self.theta),
            ("out", &self.out),
            ("seed", &self.seed),
            ("solver", &self.solver),
            ("tol", &self.tol),
            ("samples", &self.samples),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                cfg.set(key, v)?;
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn run(cli: Cli) -> Result<Vec<PathBuf>> {
    match cli.command {
        Command::Convergence(common) => run_convergence(&common.resolve()?),
        Command::Diagnostics(common) => run_diagnostics(&common.resolve()?),
        Command::Grid {
            common,
            n,
            resolution,
        } => {
            let cfg = common.resolve()?;
            let &[p] = cfg.p_values.as_slice() else {
                return Err(DgError::Config(
                    "grid needs exactly one degree, e.g. --p 2".into(),
                ));
            };
            if n == 0 {
                return Err(DgError::Config("--n must be positive".into()));
            }
            dump_solution_grid(&cfg, p, n, resolution).map(|path| vec![path])
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
