//! Artifact writing: every file embeds the hash of the resolved config.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::CliError;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "OPELAB_OUT_DIR";

/// `--out`, else `$OPELAB_OUT_DIR`, else `./opelab-out`.
pub fn output_dir(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("opelab-out"))
}

/// Writer for the artifacts of one run.
pub struct Artifacts {
    pub dir: PathBuf,
    pub stem: String,
    pub hash: String,
    pub written: Vec<PathBuf>,
}

/// JSON envelope of a report.
#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    subcommand: &'a str,
    config_hash: &'a str,
    pass: bool,
    report: &'a T,
}

impl Artifacts {
    /// The directory is created on the first write, so failed runs leave no trace.
    pub fn new(dir: &Path, stem: &str, hash: String) -> Result<Self, CliError> {
        Ok(Artifacts {
            dir: dir.to_path_buf(),
            stem: stem.into(),
            hash,
            written: Vec::new(),
        })
    }

    fn path(&self, suffix: &str) -> PathBuf {
        self.dir.join(format!("{}{suffix}", self.stem))
    }

    fn write(&mut self, suffix: &str, bytes: &[u8]) -> Result<PathBuf, CliError> {
        fs::create_dir_all(&self.dir)?;
        let p = self.path(suffix);
        fs::write(&p, bytes)?;
        self.written.push(p.clone());
        Ok(p)
    }

    /// `<stem>.config.toml` with the hash as a leading comment.
    pub fn config(&mut self, resolved: &str) -> Result<PathBuf, CliError> {
        let text = format!("# config_hash = {}\n{resolved}", self.hash);
        self.write(".config.toml", text.as_bytes())
    }

    /// `<stem>.json` with the report wrapped in an envelope.
    pub fn json<T: Serialize>(&mut self, pass: bool, report: &T) -> Result<PathBuf, CliError> {
        let env = Envelope {
            subcommand: &self.stem,
            config_hash: &self.hash,
            pass,
            report,
        };
        let mut text = serde_json::to_string_pretty(&env).map_err(|e| CliError::Config(e.to_string()))?;
        text.push('\n');
        self.write(".json", text.as_bytes())
    }

    /// `<stem><suffix>.csv` with a `# config_hash` comment line.
    pub fn csv(&mut self, suffix: &str, body: &str) -> Result<PathBuf, CliError> {
        let text = format!("# config_hash = {}\n{body}", self.hash);
        self.write(&format!("{suffix}.csv"), text.as_bytes())
    }

    /// Raw binary artifact (field dumps carry their own header).
    pub fn binary(&mut self, suffix: &str, bytes: &[u8]) -> Result<PathBuf, CliError> {
        self.write(suffix, bytes)
    }
}
