//! Run configuration: the variables config file plus the resolved engine
//! settings, embedded verbatim in every report so a run can be reproduced
//! from its output alone.

use serde::{Deserialize, Serialize};

use sprec_core::{make_distribution, DistSpec, Distribution, EngineConfig, Method, TieConvention};

use crate::CliError;

/// The `variables` document accepted by `--config`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VariablesFile {
    pub variables: Vec<DistSpec>,
}

/// Everything that determines a run's numbers, echoed into the report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub variables: Vec<DistSpec>,
    pub method: MethodArg,
    pub samples: u64,
    pub seed: u64,
    pub grid: usize,
    pub order_grid: usize,
    pub trunc_quantile: f64,
    pub ties: TieConvention,
    pub perm_cap: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum MethodArg {
    Auto,
    Exact,
    Quadrature,
    MonteCarlo,
}

impl MethodArg {
    pub fn resolve(self) -> Option<Method> {
        match self {
            MethodArg::Auto => None,
            MethodArg::Exact => Some(Method::Exact),
            MethodArg::Quadrature => Some(Method::Quadrature),
            MethodArg::MonteCarlo => Some(Method::MonteCarlo),
        }
    }
}

impl RunConfig {
    /// Validates documented option ranges and distinct variable names.
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Config(msg));
        if !(16..=(1 << 16)).contains(&self.grid) {
            return bad(format!("--grid must be in 16..=65536, got {}", self.grid));
        }
        if !(16..=(1 << 20)).contains(&self.order_grid) {
            return bad(format!("--order-grid must be in 16..=1048576, got {}", self.order_grid));
        }
        if !(self.trunc_quantile > 0.0 && self.trunc_quantile <= 0.01) {
            return bad(format!("--trunc must be in (0, 0.01], got {}", self.trunc_quantile));
        }
        if self.samples == 0 {
            return bad("--samples must be at least 1".into());
        }
        if self.perm_cap == 0 {
            return bad("--perm-cap must be at least 1".into());
        }
        let mut names: Vec<&str> = Vec::new();
        for spec in &self.variables {
            // surface malformed parameters at load time
            make_distribution(spec).map_err(CliError::Engine)?;
            if let Some(name) = &spec.name {
                if names.contains(&name.as_str()) {
                    return bad(format!("duplicate variable name '{name}'"));
                }
                names.push(name);
            }
        }
        Ok(())
    }

    pub fn engine(&self) -> EngineConfig {
        EngineConfig {
            order_grid_points: self.order_grid,
            quad_intervals: self.grid,
            mc_samples: self.samples,
            seed: self.seed,
            trunc_quantile: self.trunc_quantile,
            tie_convention: self.ties,
            perm_cap: self.perm_cap,
            ..EngineConfig::default()
        }
    }

    /// Builds the distributions, defaulting unnamed variables to T1, T2, ...
    pub fn distributions(&self) -> Result<Vec<Distribution>, CliError> {
        self.variables
            .iter()
            .enumerate()
            .map(|(i, spec)| {
                let d = make_distribution(spec).map_err(CliError::Engine)?;
                Ok(if spec.name.is_some() { d } else { d.with_name(format!("T{}", i + 1)) })
            })
            .collect()
    }
}

/// Reads the variables config from a path or stdin (`-`).
pub fn load_variables(path: &str) -> Result<Vec<DistSpec>, CliError> {
    let text = if path == "-" {
        use std::io::Read;
        let mut buf = String::new();
        std::io::stdin()
            .read_to_string(&mut buf)
            .map_err(|e| CliError::Config(format!("reading stdin: {e}")))?;
        buf
    } else {
        std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("reading {path}: {e}")))?
    };
    let file: VariablesFile =
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("parsing {path}: {e}")))?;
    if file.variables.is_empty() {
        return Err(CliError::Config("config has no variables".into()));
    }
    Ok(file.variables)
}
