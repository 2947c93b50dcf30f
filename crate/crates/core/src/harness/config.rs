use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::fading::{BlockFadingProcess, DistributionFile, FadingLaw, UniformGrid};

pub const MAX_DIMENSION: usize = 64;
pub const MAX_FIELD: u64 = 1009;

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq, Default)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    #[default]
    Csit,
    Csir,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub scheme: Scheme,
    #[serde(default = "default_seed")]
    pub master_seed: u64,
    #[serde(default)]
    pub trials: Option<usize>,
    #[serde(default)]
    pub snr_grid_db: Option<Vec<f64>>,
    /// Fractions of the achievable rate to operate at; replaces the SNR grid in `simulate`.
    #[serde(default)]
    pub backoffs: Option<Vec<f64>>,
    #[serde(default)]
    pub output_path: Option<PathBuf>,
    #[serde(default)]
    pub threads: Option<usize>,
    #[serde(default = "default_noise")]
    pub noise_variance: f64,
    /// Monte Carlo channel draws for capacity estimates.
    #[serde(default = "default_draws")]
    pub draws: usize,
    #[serde(default)]
    pub channel: Option<ChannelSpec>,
    #[serde(default)]
    pub lattice: Option<LatticeSpec>,
    #[serde(default)]
    pub quantizer: Option<QuantizerSpec>,
}

fn default_seed() -> u64 {
    1
}

fn default_noise() -> f64 {
    1.0
}

fn default_draws() -> usize {
    100_000
}

/// Fading law given inline or by reference to a distribution file.
#[derive(Debug, Clone, Deserialize, PartialEq, Default)]
#[serde(deny_unknown_fields)]
pub struct ChannelSpec {
    #[serde(default)]
    pub file: Option<PathBuf>,
    #[serde(rename = "type", default)]
    pub kind: Option<String>,
    #[serde(default)]
    pub support: Option<Vec<f64>>,
    #[serde(default)]
    pub probs: Option<Vec<f64>>,
    #[serde(default)]
    pub uniform_grid: Option<UniformGrid>,
    #[serde(default)]
    pub mean_square_gain: Option<f64>,
    #[serde(default)]
    pub coherence_b: Option<usize>,
    #[serde(default = "one")]
    pub tx_antennas: usize,
    #[serde(default = "one")]
    pub rx_antennas: usize,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct LatticeSpec {
    pub n: usize,
    pub q: u64,
    #[serde(default = "default_seed")]
    pub generator_seed: u64,
}

#[derive(Debug, Clone, Deserialize, PartialEq, Default)]
#[serde(deny_unknown_fields)]
pub struct QuantizerSpec {
    /// Fixed design used by `gap`.
    #[serde(default)]
    pub levels: Option<usize>,
    #[serde(default)]
    pub top: Option<f64>,
    /// Search grids used by `quantize`; defaults apply when absent.
    #[serde(default)]
    pub levels_grid: Option<Vec<usize>>,
    #[serde(default)]
    pub top_grid: Option<Vec<f64>>,
}

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

impl ExperimentConfig {
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self> {
        let mut cfg: Self = toml::from_str(text).map_err(|e| config_err(e.to_string()))?;
        if let Some(ch) = cfg.channel.as_mut() {
            if let Some(f) = ch.file.as_mut() {
                if f.is_relative() {
                    *f = base_dir.join(&*f);
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    fn validate(&self) -> Result<()> {
        if self.trials == Some(0) {
            return Err(config_err("trials must be at least 1"));
        }
        if self.snr_grid_db.as_ref().is_some_and(|g| g.is_empty()) {
            return Err(config_err("snr_grid_db is empty"));
        }
        if let Some(b) = &self.backoffs {
            if b.is_empty() {
                return Err(config_err("backoffs is empty"));
            }
            if b.iter().any(|&x| !(x > 0.0 && x <= 1.0)) {
                return Err(config_err("backoffs must lie in (0, 1]"));
            }
        }
        if self.draws == 0 {
            return Err(config_err("draws must be at least 1"));
        }
        if !(self.noise_variance >= 0.0) {
            return Err(config_err("noise_variance must be nonnegative"));
        }
        if self.threads == Some(0) {
            return Err(config_err("threads must be at least 1"));
        }
        if let Some(l) = &self.lattice {
            if l.n == 0 || l.n > MAX_DIMENSION {
                return Err(config_err(format!("lattice n = {} outside 1..={MAX_DIMENSION}", l.n)));
            }
            if l.q > MAX_FIELD {
                return Err(config_err(format!("lattice q = {} exceeds {MAX_FIELD}", l.q)));
            }
        }
        if let Some(ch) = &self.channel {
            if let Some(f) = &ch.file {
                if !f.exists() {
                    return Err(config_err(format!("channel file {} not found", f.display())));
                }
            }
        }
        Ok(())
    }

    pub fn snr_grid(&self) -> Result<&[f64]> {
        self.snr_grid_db.as_deref().ok_or_else(|| config_err("snr_grid_db is required"))
    }

    pub fn trials(&self) -> Result<usize> {
        self.trials.ok_or_else(|| config_err("trials is required"))
    }

    pub fn lattice(&self) -> Result<LatticeSpec> {
        self.lattice.ok_or_else(|| config_err("[lattice] table is required"))
    }

    pub fn channel(&self) -> Result<ResolvedChannel> {
        let spec = self.channel.as_ref().ok_or_else(|| config_err("[channel] table is required"))?;
        spec.resolve()
    }
}

/// A fading law with its block length and antenna counts.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedChannel {
    pub process: BlockFadingProcess,
}

impl ResolvedChannel {
    pub fn law(&self) -> &FadingLaw {
        &self.process.law
    }

    pub fn is_siso(&self) -> bool {
        self.process.tx_antennas == 1 && self.process.rx_antennas == 1
    }
}

impl ChannelSpec {
    pub fn resolve(&self) -> Result<ResolvedChannel> {
        let file = match &self.file {
            Some(path) => {
                if self.kind.is_some() || self.support.is_some() || self.uniform_grid.is_some() {
                    return Err(config_err("[channel] gives both `file` and an inline law"));
                }
                let text = std::fs::read_to_string(path).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
                DistributionFile::parse(&text)?
            }
            None => DistributionFile {
                kind: self.kind.clone().ok_or_else(|| config_err("[channel] needs `type` or `file`"))?,
                support: self.support.clone(),
                probs: self.probs.clone(),
                uniform_grid: self.uniform_grid,
                mean_square_gain: self.mean_square_gain,
                coherence_b: None,
            },
        };
        let coherence = self.coherence_b.or(file.coherence_b).unwrap_or(1);
        if coherence == 0 || self.tx_antennas == 0 || self.rx_antennas == 0 {
            return Err(config_err("coherence and antenna counts must be positive"));
        }
        Ok(ResolvedChannel {
            process: BlockFadingProcess::mimo(file.law()?, coherence, self.tx_antennas, self.rx_antennas),
        })
    }
}
