use std::path::PathBuf;

use lindhier::spectral::{HalfPlane, PersistenceThresholds};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HamiltonianChoice {
    Random,
    Heisenberg,
}

impl std::str::FromStr for HamiltonianChoice {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "random" => Ok(HamiltonianChoice::Random),
            "heisenberg" => Ok(HamiltonianChoice::Heisenberg),
            _ => Err(format!("unknown hamiltonian {s:?} (random|heisenberg)")),
        }
    }
}

/// Everything a run depends on. Loaded from JSON, then overridden by flags.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub sites: Option<usize>,
    pub k_max: usize,
    pub hamiltonian: HamiltonianChoice,
    pub alpha: Option<Vec<f64>>,
    pub beta: Option<Vec<f64>>,
    pub realizations: usize,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub csr_filter: HalfPlane,
    pub csr_bins: usize,
    pub exact_h_norm: bool,
    pub allow_large: bool,
    pub unitary_only: bool,
    pub eigenvalues_only: bool,
    pub dump_superoperators: bool,
    pub gnuplot: bool,
    pub re_bins: usize,
    pub im_bins: usize,
    pub ginibre_size: usize,
    pub ginibre_samples: usize,
    pub persistence: PersistenceThresholds,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            sites: None,
            k_max: 2,
            hamiltonian: HamiltonianChoice::Random,
            alpha: None,
            beta: None,
            realizations: 1,
            seed: None,
            out: None,
            csr_filter: HalfPlane::ImPositive,
            csr_bins: 20,
            exact_h_norm: false,
            allow_large: false,
            unitary_only: false,
            eigenvalues_only: false,
            dump_superoperators: false,
            gnuplot: false,
            re_bins: 4,
            im_bins: 4,
            ginibre_size: 128,
            ginibre_samples: 100,
            persistence: PersistenceThresholds::default(),
        }
    }
}

/// A config that passed validation; required fields are unwrapped.
#[derive(Clone, Debug)]
pub struct Validated {
    pub raw: ExperimentConfig,
    pub sites: usize,
    pub seed: u64,
    pub out: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Needs {
    Alpha,
    Beta,
    AlphaOrNone,
}

impl ExperimentConfig {
    pub fn validate(self, needs: Needs, min_realizations: usize) -> Result<Validated, CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        let Some(sites) = self.sites else {
            return bad("--sites is required".into());
        };
        let Some(seed) = self.seed else {
            return bad("--seed is required (no clock-based default)".into());
        };
        let Some(out) = self.out.clone() else {
            return bad("--out is required".into());
        };
        if sites < 2 {
            return bad(format!("need at least 2 sites, got {sites}"));
        }
        let limit = if self.allow_large { 7 } else { 6 };
        if sites > limit {
            return Err(CliError::Guardrail(format!(
                "{sites} sites exceeds the dense-spectrum limit of {limit}{}",
                if self.allow_large { "" } else { " (use --allow-large for 7)" }
            )));
        }
        if self.k_max == 0 || self.k_max > sites {
            return bad(format!("k_max must be in 1..={sites}"));
        }
        if self.alpha.is_some() && self.beta.is_some() {
            return bad("--alpha and --beta are mutually exclusive".into());
        }
        match needs {
            Needs::Alpha if self.alpha.as_ref().is_none_or(|a| a.is_empty()) => {
                return bad("an α list is required and must be non-empty".into());
            }
            Needs::Beta if self.beta.as_ref().is_none_or(|b| b.is_empty()) => {
                return bad("a β list is required and must be non-empty".into());
            }
            _ => {}
        }
        for v in self.alpha.iter().chain(self.beta.iter()).flatten() {
            if !v.is_finite() || *v < 0.0 {
                return bad(format!("strength {v} must be finite and non-negative"));
            }
        }
        if self.realizations < min_realizations {
            return bad(format!("need at least {min_realizations} realization(s)"));
        }
        if self.re_bins == 0 || self.im_bins == 0 || self.csr_bins == 0 {
            return bad("histogram bin counts must be positive".into());
        }
        if self.hamiltonian == HamiltonianChoice::Heisenberg && sites < 3 {
            return bad("the periodic Heisenberg chain needs at least 3 sites".into());
        }
        if self.ginibre_size < 8 {
            return bad("Ginibre reference size must be at least 8".into());
        }
        let p = self.persistence;
        if !(p.delta > 0.0 && p.theta > 0.0 && p.theta <= 1.0 && p.vacated_fraction > 0.0) {
            return bad("persistence thresholds out of range".into());
        }
        Ok(Validated {
            raw: self,
            sites,
            seed,
            out,
        })
    }
}
