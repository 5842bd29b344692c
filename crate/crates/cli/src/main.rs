//! `lindhier`: seeded sweeps over random k-local Lindbladians.

mod config;
mod output;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{ExperimentConfig, HamiltonianChoice};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("resource guardrail: {0}")]
    Guardrail(String),
    #[error("analysis failed ({context}): {source}")]
    Analysis {
        context: String,
        source: lindhier::Error,
    },
    #[error(transparent)]
    Core(#[from] lindhier::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        use lindhier::Error as E;
        match self {
            CliError::Config(_) | CliError::Json(_) => 2,
            CliError::Guardrail(_) => 3,
            CliError::Core(E::ResourceLimit { .. }) => 3,
            CliError::Core(E::InvalidBounds(_) | E::Parse { .. } | E::SiteMismatch { .. }) => 2,
            CliError::Io(_) => 1,
            _ => 4,
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "lindhier", version, about = "Spectra of random k-local Lindbladians")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Spectra of L_D + αL_U with clusters and predictions.
    Spectrum(Common),
    /// Spectra of L_U + βL_D.
    SweepBeta(Common),
    /// Pooled complex spacing ratios with Ginibre and Poisson references.
    Csr(Common),
    /// Heisenberg chain with random dissipation: persistent modes and commutants.
    Heisenberg(Common),
    /// Single-realization versus pooled spectral densities.
    Density(Common),
}

#[derive(Args, Debug)]
struct Common {
    /// JSON config; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    sites: Option<usize>,
    #[arg(long)]
    kmax: Option<usize>,
    /// Comma-separated α values.
    #[arg(long, value_delimiter = ',')]
    alpha: Option<Vec<f64>>,
    /// Comma-separated β values.
    #[arg(long, value_delimiter = ',')]
    beta: Option<Vec<f64>>,
    #[arg(long)]
    realizations: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// random | heisenberg
    #[arg(long)]
    hamiltonian: Option<HamiltonianChoice>,
    /// im-pos | re-pos | all
    #[arg(long)]
    csr_filter: Option<lindhier::spectral::HalfPlane>,
    #[arg(long)]
    csr_bins: Option<usize>,
    /// Rescale each random Hamiltonian to Tr H² = N exactly.
    #[arg(long)]
    exact_h_norm: bool,
    /// Permit 7 sites.
    #[arg(long)]
    allow_large: bool,
    /// Add a unitary-only (L_U) run to `csr`.
    #[arg(long)]
    unitary_only: bool,
    /// Skip eigenmodes (weight profiles and overlaps stay empty).
    #[arg(long)]
    eigenvalues_only: bool,
    /// Write binary superoperator dumps.
    #[arg(long)]
    dump: bool,
    /// Write a gnuplot script next to the eigenvalue CSV.
    #[arg(long)]
    gnuplot: bool,
    #[arg(long)]
    re_bins: Option<usize>,
    #[arg(long)]
    im_bins: Option<usize>,
    #[arg(long)]
    ginibre_size: Option<usize>,
    #[arg(long)]
    ginibre_samples: Option<usize>,
    /// Persistence window as a fraction of |λ₀(k)|.
    #[arg(long)]
    delta: Option<f64>,
    /// Minimum weight-k content of a persistent mode.
    #[arg(long)]
    theta: Option<f64>,
}

impl Common {
    fn into_config(self, command: &str) -> Result<ExperimentConfig, CliError> {
        let mut c = match &self.config {
            Some(p) => serde_json::from_slice::<ExperimentConfig>(&std::fs::read(p)?)
                .map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?,
            None => ExperimentConfig::default(),
        };
        if command == "heisenberg" && self.hamiltonian.is_none() && self.config.is_none() {
            c.hamiltonian = HamiltonianChoice::Heisenberg;
        }
        macro_rules! set {
            ($field:ident, $value:expr) => {
                if let Some(v) = $value {
                    c.$field = v;
                }
            };
        }
        if self.sites.is_some() {
            c.sites = self.sites;
        }
        set!(k_max, self.kmax);
        if self.alpha.is_some() {
            c.alpha = self.alpha;
        }
        if self.beta.is_some() {
            c.beta = self.beta;
        }
        set!(realizations, self.realizations);
        if self.seed.is_some() {
            c.seed = self.seed;
        }
        if self.out.is_some() {
            c.out = self.out;
        }
        set!(hamiltonian, self.hamiltonian);
        set!(csr_filter, self.csr_filter);
        set!(csr_bins, self.csr_bins);
        set!(re_bins, self.re_bins);
        set!(im_bins, self.im_bins);
        set!(ginibre_size, self.ginibre_size);
        set!(ginibre_samples, self.ginibre_samples);
        if let Some(d) = self.delta {
            c.persistence.delta = d;
        }
        if let Some(t) = self.theta {
            c.persistence.theta = t;
        }
        c.exact_h_norm |= self.exact_h_norm;
        c.allow_large |= self.allow_large;
        c.unitary_only |= self.unitary_only;
        c.eigenvalues_only |= self.eigenvalues_only;
        c.dump_superoperators |= self.dump;
        c.gnuplot |= self.gnuplot;
        Ok(c)
    }
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let (name, common) = match cli.command {
        Command::Spectrum(c) => ("spectrum", c),
        Command::SweepBeta(c) => ("sweep-beta", c),
        Command::Csr(c) => ("csr", c),
        Command::Heisenberg(c) => ("heisenberg", c),
        Command::Density(c) => ("density", c),
    };
    let config = common.into_config(name)?;
    let (needs, min_realizations) = run::needs_for(name);
    let cfg = config.validate(needs, min_realizations)?;
    match name {
        "spectrum" => run::cmd_spectrum(cfg),
        "sweep-beta" => run::cmd_sweep_beta(cfg),
        "csr" => run::cmd_csr(cfg),
        "heisenberg" => run::cmd_heisenberg(cfg),
        "density" => run::cmd_density(cfg),
        _ => unreachable!(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
