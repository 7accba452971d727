use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use serde::Deserialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// Flags shared by every subcommand. Each one may also come from `--config`.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Master seed for every random draw
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Independent trials per block length
    #[arg(long, global = true)]
    pub trials: Option<usize>,
    /// Block length
    #[arg(long, global = true)]
    pub n: Option<usize>,
    /// Comma-separated block lengths
    #[arg(long, global = true, value_delimiter = ',')]
    pub n_list: Option<Vec<usize>>,
    /// Source crossover probability
    #[arg(long, global = true)]
    pub p: Option<f64>,
    /// Target crossover (analyze-scheme), Wyner crossover (hybrid) or noise (counterexample)
    #[arg(long, global = true)]
    pub q: Option<f64>,
    /// Parity-coin probability for the epsilon variant
    #[arg(long, global = true)]
    pub mu: Option<f64>,
    /// Added crossover for the delta variant
    #[arg(long, global = true)]
    pub delta: Option<f64>,
    /// Counterexample block length
    #[arg(long, global = true)]
    pub block_len: Option<usize>,
    /// Output file (stdout when absent)
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Worker threads (default: all cores)
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Largest enumeration size accepted
    #[arg(long, global = true)]
    pub cap_cells: Option<usize>,
    /// Built-in instance used when no input file is given
    #[arg(long, global = true)]
    pub preset: Option<String>,
    /// Input file for subcommands that read one
    #[arg(skip)]
    pub input: Option<PathBuf>,
}

macro_rules! overlay {
    ($base:ident, $top:ident, $($field:ident),*) => {
        $( if $top.$field.is_some() { $base.$field = $top.$field.clone(); } )*
    };
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| anyhow::Error::new(ConfigError(format!("{}: {e}", path.display()))))
    }

    /// `self` with every field set in `flags` replaced.
    pub fn overridden_by(mut self, flags: &RunConfig) -> Self {
        overlay!(
            self, flags, seed, trials, n, n_list, p, q, mu, delta, block_len, out, format, threads, cap_cells,
            preset, input
        );
        self
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn trials(&self) -> Result<usize> {
        match self.trials.unwrap_or(100) {
            0 => bail!(ConfigError("--trials must be positive".into())),
            t => Ok(t),
        }
    }

    pub fn n_list(&self, default: &[usize]) -> Result<Vec<usize>> {
        let list = match (&self.n_list, self.n) {
            (Some(l), _) => l.clone(),
            (None, Some(n)) => vec![n],
            (None, None) => default.to_vec(),
        };
        if list.is_empty() || list.contains(&0) {
            bail!(ConfigError("block lengths must be positive".into()));
        }
        Ok(list)
    }

    pub fn format(&self) -> Format {
        self.format.unwrap_or(Format::Json)
    }
}

/// Invalid parameters; mapped to exit code 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let file: RunConfig = serde_json::from_str(r#"{"seed": 3, "trials": 10, "p": 0.2}"#).unwrap();
        let flags = RunConfig {
            seed: Some(9),
            ..Default::default()
        };
        let merged = file.overridden_by(&flags);
        assert_eq!((merged.seed(), merged.trials().unwrap(), merged.p), (9, 10, Some(0.2)));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"sed": 3}"#).is_err());
    }
}
