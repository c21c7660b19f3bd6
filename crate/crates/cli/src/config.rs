//! Experiment configuration: a TOML file with a `[global]` table and one
//! optional table per subcommand, overridden by command-line flags.

use std::path::PathBuf;

use clap::Args;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

/// Parameters shared by every subcommand.
#[derive(Args, Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GlobalArgs {
    /// Spatial dimension.
    #[arg(long)]
    pub d: Option<usize>,
    /// Scaling dimension `[φ]` of the field.
    #[arg(long)]
    pub dim_phi: Option<f64>,
    /// Scale base `L`.
    #[arg(long)]
    pub base: Option<f64>,
    /// Seed of the sample stream.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Lattice sites per side.
    #[arg(long)]
    pub n_per_side: Option<usize>,
    /// Side length of the periodic box.
    #[arg(long)]
    pub box_length: Option<f64>,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long)]
    pub workers: Option<usize>,
}

impl GlobalArgs {
    fn merge(self, over: GlobalArgs) -> GlobalArgs {
        GlobalArgs {
            d: over.d.or(self.d),
            dim_phi: over.dim_phi.or(self.dim_phi),
            base: over.base.or(self.base),
            seed: over.seed.or(self.seed),
            n_per_side: over.n_per_side.or(self.n_per_side),
            box_length: over.box_length.or(self.box_length),
            workers: over.workers.or(self.workers),
        }
    }
}

/// Global parameters after defaults are applied.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Global {
    pub d: usize,
    pub dim_phi: f64,
    pub base: f64,
    pub seed: Option<u64>,
    pub n_per_side: usize,
    pub box_length: f64,
    /// Thread count; results do not depend on it, so it is left out of the hash.
    #[serde(skip_serializing, default)]
    pub workers: Option<usize>,
}

impl Global {
    /// The seed, which stochastic subcommands require.
    pub fn seed(&self) -> Result<u64, CliError> {
        self.seed
            .ok_or_else(|| CliError::Config("missing required key `global.seed` (or --seed)".into()))
    }
}

impl From<GlobalArgs> for Global {
    fn from(g: GlobalArgs) -> Self {
        Global {
            d: g.d.unwrap_or(1),
            dim_phi: g.dim_phi.unwrap_or(0.2),
            base: g.base.unwrap_or(2.0),
            seed: g.seed,
            n_per_side: g.n_per_side.unwrap_or(4096),
            box_length: g.box_length.unwrap_or(8.0),
            workers: g.workers,
        }
    }
}

/// The file layout: `[global]` plus a table named after each subcommand.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default)]
    pub global: GlobalArgs,
    #[serde(default)]
    pub sample: Option<toml::Table>,
    #[serde(default)]
    pub covariance: Option<toml::Table>,
    #[serde(default, rename = "kappa-calibrate")]
    pub kappa_calibrate: Option<toml::Table>,
    #[serde(default)]
    pub wick2: Option<toml::Table>,
    #[serde(default, rename = "renorm-converge")]
    pub renorm_converge: Option<toml::Table>,
    #[serde(default, rename = "moment-check")]
    pub moment_check: Option<toml::Table>,
    #[serde(default, rename = "lemma-check")]
    pub lemma_check: Option<toml::Table>,
    #[serde(default)]
    pub pinsum: Option<toml::Table>,
    #[serde(default, rename = "power-count")]
    pub power_count: Option<toml::Table>,
}

impl ConfigFile {
    pub fn load(path: &PathBuf) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    /// Parse errors carry line and column numbers.
    pub fn parse(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    pub fn section(&self, name: &str) -> Option<&toml::Table> {
        match name {
            "sample" => self.sample.as_ref(),
            "covariance" => self.covariance.as_ref(),
            "kappa-calibrate" => self.kappa_calibrate.as_ref(),
            "wick2" => self.wick2.as_ref(),
            "renorm-converge" => self.renorm_converge.as_ref(),
            "moment-check" => self.moment_check.as_ref(),
            "lemma-check" => self.lemma_check.as_ref(),
            "pinsum" => self.pinsum.as_ref(),
            "power-count" => self.power_count.as_ref(),
            _ => None,
        }
    }
}

/// Merge the file section of a subcommand with its flags: flags that were
/// given win, and keys set in neither place keep the section defaults.
pub fn resolve_section<T>(file: Option<&toml::Table>, flags: &T, name: &str) -> Result<T, CliError>
where
    T: Serialize + for<'de> Deserialize<'de>,
{
    let mut table = file.cloned().unwrap_or_default();
    let over = toml::Table::try_from(flags).map_err(|e| CliError::Config(format!("[{name}]: {e}")))?;
    for (k, v) in over {
        table.insert(k, v);
    }
    // Round-trip through text so schema errors carry line numbers.
    let text = toml::to_string(&table).map_err(|e| CliError::Config(format!("[{name}]: {e}")))?;
    toml::from_str(&text).map_err(|e| CliError::Config(format!("[{name}] {e}")))
}

/// Combine file and flag globals.
pub fn resolve_global(file: &ConfigFile, flags: GlobalArgs) -> Global {
    file.global.clone().merge(flags).into()
}

/// Resolved configuration written next to every output.
#[derive(Clone, Debug, Serialize)]
pub struct Resolved<'a, T: Serialize> {
    pub subcommand: &'a str,
    pub global: &'a Global,
    pub params: &'a T,
}

impl<T: Serialize> Resolved<'_, T> {
    pub fn to_toml(&self) -> Result<String, CliError> {
        let mut root = toml::Table::new();
        root.insert("subcommand".into(), toml::Value::String(self.subcommand.into()));
        root.insert(
            "global".into(),
            toml::Value::try_from(self.global).map_err(|e| CliError::Config(e.to_string()))?,
        );
        root.insert(
            self.subcommand.into(),
            toml::Value::try_from(self.params).map_err(|e| CliError::Config(e.to_string()))?,
        );
        toml::to_string(&root).map_err(|e| CliError::Config(e.to_string()))
    }
}

/// Hex SHA-256 of the resolved configuration text.
pub fn config_hash(resolved_toml: &str) -> String {
    Sha256::digest(resolved_toml.as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}
