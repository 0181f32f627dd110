use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inpaint3d::{NormalGating, S3iOptions};
use crate::metrics::ConsistencyOptions;
use crate::project::ProjectionParams;
use crate::seam::default_band_radius;

/// Every tunable of a pipeline run. Loaded from a flat TOML file; missing
/// keys take the defaults below and unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub texture_resolution: u32,
    pub final_resolution: u32,
    pub upscale_factor: u32,
    pub views: usize,
    pub elevation: f64,
    pub radius: f64,
    pub fov_y: f64,
    pub view_resolution: u32,
    pub min_cos: f64,
    pub exclude_occluded: bool,
    /// Depth tolerance for occlusion; derived per camera when absent.
    pub occlusion_delta: Option<f64>,
    pub k_inpaint: usize,
    pub max_rounds: usize,
    pub gating: NormalGating,
    pub defer_gated: bool,
    pub dilate_radius: u32,
    /// Seam band at the final resolution; derived from it when absent.
    pub seam_band_radius: Option<u32>,
    /// Seam smoothing draws on a wider window than inpainting so that it
    /// reaches past the band into the neighboring chart.
    pub k_seam: usize,
    /// Cross-chart pairing distance in units of the mean texel edge.
    pub seam_pair_scale: f64,
    pub normalize_mesh: bool,
    pub field: String,
    pub jitter: f64,
    pub seed: u64,
    pub holdout_views: usize,
    pub holdout_elevation: f64,
    pub consistency_samples: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            texture_resolution: 1024,
            final_resolution: 2048,
            upscale_factor: 2,
            views: 8,
            elevation: 30.0,
            radius: 2.2,
            fov_y: 45.0,
            view_resolution: 512,
            min_cos: 0.2,
            exclude_occluded: true,
            occlusion_delta: None,
            k_inpaint: 8,
            max_rounds: 64,
            gating: NormalGating::Robust,
            defer_gated: true,
            dilate_radius: 3,
            seam_band_radius: None,
            k_seam: 24,
            seam_pair_scale: 3.0,
            normalize_mesh: true,
            field: "checker".into(),
            jitter: 0.0,
            seed: 0,
            holdout_views: 4,
            holdout_elevation: 15.0,
            consistency_samples: 4096,
        }
    }
}

impl PipelineConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let config: PipelineConfig =
            toml::from_str(text).map_err(|e| Error::InvalidConfig(e.message().to_string()))?;
        config.validate()?;
        Ok(config)
    }

    /// A config at another texture resolution with everything else equal.
    pub fn with_resolution(mut self, texture_resolution: u32) -> Self {
        self.texture_resolution = texture_resolution;
        self.final_resolution = texture_resolution * self.upscale_factor;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.upscale_factor == 0 || self.texture_resolution == 0 {
            return bad("resolutions and upscale_factor must be positive".into());
        }
        if self.final_resolution != self.texture_resolution * self.upscale_factor {
            return bad(format!(
                "final_resolution {} != texture_resolution {} x upscale_factor {}",
                self.final_resolution, self.texture_resolution, self.upscale_factor
            ));
        }
        if self.views == 0 || self.k_inpaint == 0 || self.k_seam == 0 || self.view_resolution == 0 {
            return bad("views, k_inpaint, k_seam and view_resolution must be positive".into());
        }
        if !(0.0..1.0).contains(&self.min_cos) {
            return bad(format!("min_cos {} not in [0, 1)", self.min_cos));
        }
        if !(self.jitter >= 0.0) || !(self.seam_pair_scale > 0.0) {
            return bad("jitter must be non-negative and seam_pair_scale positive".into());
        }
        if self.occlusion_delta.is_some_and(|d| !(d > 0.0)) {
            return bad("occlusion_delta must be positive".into());
        }
        Ok(())
    }

    pub fn projection(&self) -> ProjectionParams {
        ProjectionParams {
            min_cos: self.min_cos,
            exclude_occluded: self.exclude_occluded,
        }
    }

    pub fn s3i(&self) -> S3iOptions {
        S3iOptions {
            k: self.k_inpaint,
            max_rounds: self.max_rounds,
            gating: self.gating,
            defer_gated: self.defer_gated,
        }
    }

    pub fn band_radius(&self) -> u32 {
        self.seam_band_radius
            .unwrap_or_else(|| default_band_radius(self.final_resolution))
    }

    pub fn consistency(&self) -> ConsistencyOptions {
        ConsistencyOptions {
            max_samples: self.consistency_samples,
            min_cos: self.min_cos,
        }
    }
}
