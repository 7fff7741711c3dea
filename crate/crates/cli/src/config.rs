use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use rss_sense::gesture::{SegmentationConfig, TrainConfig};
use rss_sense::heart::HeartRateConfig;
use rss_sense::sim::CorpusSpec;
use rss_sense::speed::SpeedConfig;
use serde::{Deserialize, Serialize};

/// Module settings; a TOML file passed with `--config` overrides any subset.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub heart: HeartRateConfig,
    pub segmentation: SegmentationConfig,
    pub train: TrainConfig,
    pub speed: SpeedConfig,
    pub corpus: CorpusSpec,
}

impl Config {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }
}
