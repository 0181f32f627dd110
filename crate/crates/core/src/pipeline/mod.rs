//! End-to-end flow: fuse views into a texture, inpaint it over the
//! surface, upscale, then smooth chart seams at the final resolution.

mod config;
mod field;

pub use config::PipelineConfig;
pub use field::{save_views, synth_views, view_offsets, ColorField, CONSTANT_COLOR};

use std::path::Path;
use std::time::Instant;

use log::info;
use serde::Serialize;

use crate::enhance::{dilate, upscale, Upscaler};
use crate::error::{Error, Result};
use crate::inpaint3d::{cloud_from_texture, s3i_inpaint, texture_from_cloud, S3iReport};
use crate::mesh::TriangleMesh;
use crate::metrics::{coverage, cross_view_consistency, ConsistencyReport, MetricsReport};
use crate::project::{default_view_ring, fuse_layers, project_views, Camera, OcclusionReport, ViewSet};
use crate::raster::{rasterize_uv, GeometryBuffers};
use crate::seam::{detect_seams, seam_energy, ssa_smooth, SeamMask};
use crate::texture::{save_mask_png, UvTexture};

/// Input cameras for a synthetic run.
pub fn input_cameras(config: &PipelineConfig) -> Result<Vec<Camera>> {
    let r = config.view_resolution;
    default_view_ring(config.views, config.elevation, config.radius, config.fov_y, r, r)
}

/// Evaluation cameras at one elevation, offset in azimuth from azimuth 0
/// by half their spacing.
pub fn holdout_cameras(config: &PipelineConfig) -> Result<Vec<Camera>> {
    let n = config.holdout_views;
    let r = config.view_resolution;
    (0..n)
        .map(|i| {
            let az = 360.0 * (i as f64 + 0.5) / n as f64;
            Camera::new(az, config.holdout_elevation, config.radius, config.fov_y, r, r)
        })
        .collect()
}

/// Fused texture at `texture_resolution` with the per-view exclusions.
pub fn bake(
    mesh: &TriangleMesh,
    views: &ViewSet,
    buffers: &GeometryBuffers,
    config: &PipelineConfig,
) -> Result<(UvTexture, OcclusionReport)> {
    let (layers, report) = project_views(mesh, views, buffers, config.projection(), config.occlusion_delta);
    Ok((fuse_layers(&layers, &buffers.valid)?.texture, report))
}

/// Paints every valid texel of `texture` from its painted ones.
pub fn inpaint(
    texture: &UvTexture,
    buffers: &GeometryBuffers,
    config: &PipelineConfig,
) -> Result<(UvTexture, S3iReport)> {
    let cloud = cloud_from_texture(texture, buffers)?;
    let (painted, report) = s3i_inpaint(&cloud, &config.s3i())?;
    Ok((texture_from_cloud(&painted, texture)?, report))
}

/// Dilates, upscales and rebases the result onto `final_buffers`: texels
/// valid at the final resolution become valid and painted, keeping the
/// upscaled color (gutter color where the coarse mask was invalid).
pub fn upscale_to(
    texture: &UvTexture,
    upscaler: &dyn Upscaler,
    final_buffers: &GeometryBuffers,
    config: &PipelineConfig,
) -> Result<UvTexture> {
    let up = upscale(&dilate(texture, config.dilate_radius), upscaler)?;
    rebase(up, &final_buffers.valid, final_buffers.dims())
}

/// Replaces the masks of `texture` with `valid` (all painted).
pub fn rebase(mut texture: UvTexture, valid: &[bool], dims: (u32, u32)) -> Result<UvTexture> {
    if texture.dims() != dims || valid.len() != texture.len() {
        return Err(Error::MismatchedResolutions {
            expected: dims,
            found: texture.dims(),
        });
    }
    texture.valid = valid.to_vec();
    texture.painted = valid.to_vec();
    texture.dilated = vec![false; valid.len()];
    Ok(texture)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SmoothReport {
    pub seam_texels: usize,
    pub chart_count: usize,
    pub band_radius: u32,
    pub pair_radius: f64,
    pub energy_before: f64,
    pub energy_after: f64,
}

/// Seam detection plus one smoothing pass on a fully painted texture.
pub fn smooth(
    mesh: &TriangleMesh,
    texture: &UvTexture,
    buffers: &GeometryBuffers,
    config: &PipelineConfig,
) -> Result<(UvTexture, SeamMask, SmoothReport)> {
    let seam = detect_seams(&buffers.valid, buffers.width, buffers.height, config.band_radius());
    let cloud = cloud_from_texture(texture, buffers)?;
    let pair_radius = config.seam_pair_scale * buffers.mean_texel_edge(mesh);
    let energy_before = seam_energy(&cloud, &seam, pair_radius)?;
    let smoothed = ssa_smooth(&cloud, &seam, config.k_seam, config.gating)?;
    let energy_after = seam_energy(&smoothed, &seam, pair_radius)?;
    let report = SmoothReport {
        seam_texels: seam.count(),
        chart_count: seam.chart_count,
        band_radius: seam.band_radius,
        pair_radius,
        energy_before,
        energy_after,
    };
    Ok((texture_from_cloud(&smoothed, texture)?, seam, report))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PipelineReport {
    pub metrics: MetricsReport,
    pub coverage_fused: f64,
    pub inpaint: S3iReport,
    pub occlusion: OcclusionReport,
    pub smoothing: SmoothReport,
    pub consistency: ConsistencyReport,
    pub overlap_texels: usize,
    pub upscaler: String,
    pub config: PipelineConfig,
}

/// Every stage output of one run.
#[derive(Debug, Clone)]
pub struct PipelineOutput {
    /// Fused, partially painted texture.
    pub fused: UvTexture,
    /// Fully painted texture at `texture_resolution`.
    pub completed: UvTexture,
    /// Upscaled texture rebased onto the final-resolution charts.
    pub upscaled: UvTexture,
    pub final_texture: UvTexture,
    pub seam: SeamMask,
    pub report: PipelineReport,
}

fn timed<T>(stage: &str, f: impl FnOnce() -> Result<T>) -> Result<T> {
    let start = Instant::now();
    let out = f();
    info!("{stage}: {:.2}s", start.elapsed().as_secs_f64());
    out
}

/// Runs every stage on an already normalized mesh.
pub fn run_pipeline(
    mesh: &TriangleMesh,
    views: &ViewSet,
    config: &PipelineConfig,
    upscaler: &dyn Upscaler,
) -> Result<PipelineOutput> {
    config.validate()?;
    if upscaler.factor() != config.upscale_factor {
        return Err(Error::UpscalerMismatch(format!(
            "{} scales by {}, config expects {}",
            upscaler.name(),
            upscaler.factor(),
            config.upscale_factor
        )));
    }
    let res = config.texture_resolution;
    let buffers = timed("rasterize", || rasterize_uv(mesh, res, res))?;
    let (fused, occlusion) = timed("bake", || bake(mesh, views, &buffers, config))?;
    let (completed, inpaint_report) = timed("inpaint", || inpaint(&fused, &buffers, config))?;
    let fin = config.final_resolution;
    let final_buffers = timed("rasterize final", || rasterize_uv(mesh, fin, fin))?;
    let upscaled = timed("upscale", || upscale_to(&completed, upscaler, &final_buffers, config))?;
    let (final_texture, seam, smoothing) =
        timed("smooth", || smooth(mesh, &upscaled, &final_buffers, config))?;
    drop(final_buffers);
    let consistency = timed("consistency", || {
        cross_view_consistency(
            mesh,
            &buffers,
            &[&final_texture],
            &holdout_cameras(config)?,
            &config.consistency(),
        )
    })?;

    let metrics = MetricsReport {
        coverage: coverage(&completed),
        seam_energy_before: smoothing.energy_before,
        seam_energy_after: smoothing.energy_after,
        consistency_mean: consistency.mean,
        occlusion_excluded: occlusion.total_occluded(),
    };
    let report = PipelineReport {
        metrics,
        coverage_fused: coverage(&fused),
        inpaint: inpaint_report,
        occlusion,
        smoothing,
        consistency,
        overlap_texels: buffers.overlap_count,
        upscaler: upscaler.name().to_string(),
        config: config.clone(),
    };
    Ok(PipelineOutput {
        fused,
        completed,
        upscaled,
        final_texture,
        seam,
        report,
    })
}

impl PipelineOutput {
    /// Writes the final texture, its masks, the seam mask and `report.json`.
    pub fn save(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let t = &self.final_texture;
        t.save_png(dir.join("texture.png"))?;
        save_mask_png(&t.valid, t.width, t.height, dir.join("valid_mask.png"))?;
        save_mask_png(&t.painted, t.width, t.height, dir.join("painted_mask.png"))?;
        self.seam.save_png(dir.join("seam_mask.png"))?;
        crate::error::write_json(&dir.join("report.json"), &self.report)
    }

    /// Writes each stage texture before smoothing with its painted mask.
    pub fn save_intermediates(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for (name, tex) in [
            ("fused", &self.fused),
            ("completed", &self.completed),
            ("upscaled", &self.upscaled),
        ] {
            tex.save_png(dir.join(format!("{name}.png")))?;
            save_mask_png(&tex.painted, tex.width, tex.height, dir.join(format!("{name}_painted.png")))?;
        }
        Ok(())
    }
}
