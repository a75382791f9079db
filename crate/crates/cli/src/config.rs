use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sgr_core::metrics::{RegWeights, DEFAULT_SAMPLES};
use sgr_core::param::ParamConfig;
use sgr_core::{Result, SgrError};

pub const OUTPUT_DIR_ENV: &str = "SGR_OUTPUT_DIR";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub resolution: usize,
    pub param: ParamConfig,
    pub reg_weights: RegWeights,
    pub chamfer_samples: usize,
    pub tau_mm: f64,
    /// Seeds both the parameterizer and surface sampling.
    pub seed: u64,
    pub output_dir: Option<PathBuf>,
    /// Resolutions visited by `roundtrip`.
    pub resolutions: Vec<usize>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            resolution: 256,
            param: ParamConfig::default(),
            reg_weights: RegWeights::default(),
            chamfer_samples: DEFAULT_SAMPLES,
            tau_mm: 1.0,
            seed: 0,
            output_dir: None,
            resolutions: vec![32, 64, 128, 256],
        }
    }
}

/// Values given on the command line; each one that is set wins over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub resolution: Option<usize>,
    pub seed: Option<u64>,
    pub tau_mm: Option<f64>,
    pub chamfer_samples: Option<usize>,
    pub output_dir: Option<PathBuf>,
    pub resolutions: Option<Vec<usize>>,
}

impl PipelineConfig {
    pub fn load(path: Option<&Path>, o: &Overrides) -> Result<Self> {
        let mut cfg = match path {
            Some(p) => {
                let text = fs::read_to_string(p).map_err(|e| SgrError::Io {
                    path: p.to_path_buf(),
                    source: e,
                })?;
                toml::from_str(&text).map_err(|e| SgrError::Parse(format!("{}: {e}", p.display())))?
            }
            None => PipelineConfig::default(),
        };
        if let Some(v) = o.resolution {
            cfg.resolution = v;
        }
        if let Some(v) = o.seed {
            cfg.seed = v;
        }
        if let Some(v) = o.tau_mm {
            cfg.tau_mm = v;
        }
        if let Some(v) = o.chamfer_samples {
            cfg.chamfer_samples = v;
        }
        if let Some(v) = &o.output_dir {
            cfg.output_dir = Some(v.clone());
        }
        if let Some(v) = &o.resolutions {
            cfg.resolutions = v.clone();
        }
        cfg.param.rng_seed = cfg.seed;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.resolution < 2 || self.resolutions.iter().any(|&r| r < 2) {
            return Err(SgrError::Unsupported("resolution must be at least 2".into()));
        }
        if !(self.tau_mm > 0.0) {
            return Err(SgrError::Unsupported(format!("tau must be positive, got {}", self.tau_mm)));
        }
        if self.chamfer_samples == 0 {
            return Err(SgrError::Unsupported("chamfer_samples must be positive".into()));
        }
        self.param.validate()?;
        self.reg_weights.validate()
    }

    /// Flag or file value, then the environment, then the working directory.
    pub fn output_dir(&self) -> PathBuf {
        self.output_dir
            .clone()
            .or_else(|| std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("."))
    }

    /// `explicit` if given, else `<output dir>/<stem of input><suffix>`.
    pub fn output_path(&self, explicit: Option<&Path>, input: &Path, suffix: &str) -> Result<PathBuf> {
        if let Some(p) = explicit {
            return Ok(p.to_path_buf());
        }
        let dir = self.output_dir();
        fs::create_dir_all(&dir).map_err(|e| SgrError::Io {
            path: dir.clone(),
            source: e,
        })?;
        let stem = input.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
        Ok(dir.join(format!("{stem}{suffix}")))
    }
}
