use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use fracquant::Variant;
use serde::Deserialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Svg,
}

/// Settings read from `--config`. Every key is optional; command-line flags take precedence.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub variant: Option<String>,
    pub format: Option<Format>,
    pub tol: Option<f64>,
    pub depth_p: Option<u32>,
    pub depth_nu: Option<u32>,
    pub precision_bits: Option<u32>,
    pub output: Option<PathBuf>,
    pub sequential: Option<bool>,
}

impl FileConfig {
    pub fn load(path: &Path) -> anyhow::Result<FileConfig> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }
}

/// Fully resolved settings for one invocation.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub variant: Variant,
    pub format: Option<Format>,
    pub tol: f64,
    pub depth_p: u32,
    pub depth_nu: u32,
    pub precision_bits: Option<u32>,
    pub output: Option<PathBuf>,
    pub sequential: bool,
}

pub const DEFAULT_TOL: f64 = 1e-6;
pub const DEFAULT_DEPTH: u32 = 8;

/// Values given on the command line, before merging.
#[derive(Debug, Default)]
pub struct Overrides {
    pub variant: Option<Variant>,
    pub format: Option<Format>,
    pub tol: Option<f64>,
    pub depth_p: Option<u32>,
    pub depth_nu: Option<u32>,
    pub precision_bits: Option<u32>,
    pub output: Option<PathBuf>,
    pub sequential: bool,
}

impl RunConfig {
    pub fn resolve(flags: Overrides, file: FileConfig) -> anyhow::Result<RunConfig> {
        let variant = match (flags.variant, file.variant) {
            (Some(v), _) => v,
            (None, Some(s)) => s.parse().map_err(|e| anyhow::anyhow!("config variant: {e}"))?,
            (None, None) => Variant::Nu1,
        };
        let tol = flags.tol.or(file.tol).unwrap_or(DEFAULT_TOL);
        if !(tol.is_finite() && tol >= 0.0) {
            bail!("tolerance must be a non-negative number, got {tol}");
        }
        let precision_bits = flags.precision_bits.or(file.precision_bits);
        if let Some(b) = precision_bits {
            if b < 24 {
                bail!("precision must be at least 24 bits, got {b}");
            }
        }
        Ok(RunConfig {
            variant,
            format: flags.format.or(file.format),
            tol,
            depth_p: flags.depth_p.or(file.depth_p).unwrap_or(DEFAULT_DEPTH),
            depth_nu: flags.depth_nu.or(file.depth_nu).unwrap_or(DEFAULT_DEPTH),
            precision_bits,
            output: flags.output.or(file.output),
            sequential: flags.sequential || file.sequential.unwrap_or(false),
        })
    }
}
