//! Engine configuration, loadable from TOML.
//!
//! ```toml
//! [detectors.dominance]
//! min_len = 3
//! threshold = 0.5
//!
//! [recommend]
//! page_score = "max"   # or "mean"
//! [recommend.weights]
//! type = 0.4
//! attributes = 0.3
//! text = 0.3
//!
//! [geometry]
//! cell_width = 80.0
//! cell_height = 28.0
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;
use crate::facts::DetectorConfig;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Weights {
    #[serde(rename = "type")]
    pub fact_type: f64,
    pub attributes: f64,
    pub text: f64,
}

impl Default for Weights {
    fn default() -> Self {
        Self { fact_type: 0.4, attributes: 0.3, text: 0.3 }
    }
}

impl Weights {
    pub fn scaled(&self, k: f64) -> Self {
        Self { fact_type: self.fact_type * k, attributes: self.attributes * k, text: self.text * k }
    }

    fn validate(&self) -> Result<(), ConfigError> {
        let all = [self.fact_type, self.attributes, self.text];
        if all.iter().any(|w| !w.is_finite() || *w < 0.0) || all.iter().sum::<f64>() <= 0.0 {
            return Err(ConfigError::Parse("recommend weights must be non-negative with a positive sum".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PageScore {
    #[default]
    Max,
    Mean,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RecommendConfig {
    pub weights: Weights,
    pub page_score: PageScore,
}

/// Pixel geometry of the body grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Geometry {
    pub cell_width: f64,
    pub cell_height: f64,
    /// Fraction of the block's pixel rect the chart occupies.
    pub fill: f64,
    pub min_chart_width: f64,
    pub min_chart_height: f64,
}

impl Default for Geometry {
    fn default() -> Self {
        Self { cell_width: 80.0, cell_height: 28.0, fill: 0.9, min_chart_width: 60.0, min_chart_height: 40.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EngineConfig {
    pub detectors: DetectorConfig,
    pub recommend: RecommendConfig,
    pub geometry: Geometry,
}

impl EngineConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: EngineConfig = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.recommend.weights.validate()?;
        let g = cfg.geometry;
        if !(g.cell_width > 0.0 && g.cell_height > 0.0 && g.fill > 0.0 && g.fill <= 1.0) {
            return Err(ConfigError::Parse("geometry needs positive cell sizes and 0 < fill <= 1".into()));
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
        Self::from_toml(&text)
    }
}
