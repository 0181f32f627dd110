//! `texweave`: every pipeline stage as a subcommand, so externally produced
//! views or upscaled textures can enter at any stage boundary.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use log::info;
use serde_json::json;

use texweave_core::enhance::{Lanczos3, Precomputed, Upscaler};
use texweave_core::inpaint3d::{cloud_from_texture, TexelCloud};
use texweave_core::mesh::{load_mesh, normalize_mesh, TriangleMesh};
use texweave_core::metrics::{coverage, cross_view_consistency, MetricsReport};
use texweave_core::pipeline::{
    bake, holdout_cameras, inpaint, input_cameras, run_pipeline, save_views, smooth, synth_views,
    upscale_to, PipelineConfig,
};
use texweave_core::project::{load_views, project_views, ViewSet};
use texweave_core::raster::{
    rasterize_uv, render_view, save_depth_png, save_normal_png, GeometryBuffers, RenderOptions,
};
use texweave_core::seam::{default_band_radius, detect_seams, seam_energy};
use texweave_core::texture::{load_mask_png, save_mask_png, ColorImage, UvTexture};

#[derive(Parser)]
#[command(name = "texweave", version, about = "Multi-view texture fusion, inpainting and seam repair")]
struct Cli {
    /// Cap on worker threads; results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// TOML pipeline config; flags below override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Repeat for more log output (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(flatten)]
    overrides: Overrides,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Default)]
struct Overrides {
    /// Working texture resolution; the final one follows the upscale factor.
    #[arg(long, global = true)]
    resolution: Option<u32>,
    #[arg(long, global = true)]
    upscale_factor: Option<u32>,
    /// Number of views in the camera ring.
    #[arg(long = "n", global = true)]
    view_count: Option<usize>,
    #[arg(long, global = true)]
    elevation: Option<f64>,
    #[arg(long, global = true)]
    view_resolution: Option<u32>,
    /// Procedural color field: constant, checker, stripes or smooth.
    #[arg(long, global = true)]
    field: Option<String>,
    /// Per-view brightness jitter of synthesized views.
    #[arg(long, global = true)]
    jitter: Option<f64>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    min_cos: Option<f64>,
    #[arg(long, global = true)]
    k_inpaint: Option<usize>,
    #[arg(long, global = true)]
    k_seam: Option<usize>,
    /// Seam band radius in texels of the texture being smoothed.
    #[arg(long, global = true)]
    band_radius: Option<u32>,
    /// Keep occluded texels in the projection.
    #[arg(long, global = true)]
    keep_occluded: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Render procedural views of a mesh and write them with a manifest.
    SynthViews {
        #[arg(long)]
        mesh: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Project and fuse views into a partially painted texture.
    Bake {
        #[arg(long)]
        mesh: PathBuf,
        /// View manifest (JSON).
        #[arg(long)]
        views: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Paint every chart texel from the painted ones.
    Inpaint {
        #[arg(long)]
        mesh: PathBuf,
        #[arg(long)]
        texture: PathBuf,
        /// Painted-texel mask; white marks real color.
        #[arg(long)]
        mask: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Dilate and upscale a complete texture onto the final-resolution charts.
    Upscale {
        #[arg(long)]
        mesh: PathBuf,
        #[arg(long)]
        texture: PathBuf,
        /// Externally upscaled image used instead of the built-in filter.
        #[arg(long)]
        upscaled_input: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Detect chart seams and recolor the band around them.
    Smooth {
        #[arg(long)]
        mesh: PathBuf,
        #[arg(long)]
        texture: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run every stage. Without `--views`, views are synthesized.
    Pipeline {
        #[arg(long)]
        mesh: PathBuf,
        #[arg(long)]
        views: Option<PathBuf>,
        #[arg(long)]
        upscaled_input: Option<PathBuf>,
        /// Also write the fused, completed and upscaled textures here.
        #[arg(long)]
        dump_intermediates: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Coverage, seam energy and held-out view consistency of a texture.
    Metrics {
        #[arg(long)]
        mesh: PathBuf,
        #[arg(long)]
        texture: PathBuf,
        /// Painted-texel mask; all chart texels count as painted without it.
        #[arg(long)]
        mask: Option<PathBuf>,
        /// Texture before seam smoothing, for the before/after energy pair.
        #[arg(long)]
        before: Option<PathBuf>,
        /// View manifest, to count occlusion-excluded texels.
        #[arg(long)]
        views: Option<PathBuf>,
        /// Output JSON report.
        #[arg(long)]
        out: PathBuf,
    },
    /// Render a texture through the view ring (or the held-out cameras).
    Render {
        #[arg(long)]
        mesh: PathBuf,
        #[arg(long)]
        texture: PathBuf,
        #[arg(long)]
        holdout: bool,
        /// Also write depth and normal images.
        #[arg(long)]
        geometry: bool,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    if let Some(n) = cli.threads {
        if n == 0 {
            bail!("--threads must be at least 1");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the thread pool")?;
    }
    let config = resolve_config(cli.config.as_deref(), &cli.overrides)?;
    run(cli.command, &config, cli.overrides.band_radius)
}

fn resolve_config(path: Option<&Path>, o: &Overrides) -> Result<PipelineConfig> {
    let mut c = match path {
        Some(p) => PipelineConfig::load(p).with_context(|| format!("loading {}", p.display()))?,
        None => PipelineConfig::default(),
    };
    if let Some(f) = o.upscale_factor {
        c.upscale_factor = f;
        c.final_resolution = c.texture_resolution * f;
    }
    if let Some(r) = o.resolution {
        c = c.with_resolution(r);
    }
    if let Some(v) = o.view_count {
        c.views = v;
    }
    if let Some(e) = o.elevation {
        c.elevation = e;
    }
    if let Some(r) = o.view_resolution {
        c.view_resolution = r;
    }
    if let Some(f) = &o.field {
        c.field = f.clone();
    }
    if let Some(j) = o.jitter {
        c.jitter = j;
    }
    if let Some(s) = o.seed {
        c.seed = s;
    }
    if let Some(m) = o.min_cos {
        c.min_cos = m;
    }
    if let Some(k) = o.k_inpaint {
        c.k_inpaint = k;
    }
    if let Some(k) = o.k_seam {
        c.k_seam = k;
    }
    if o.band_radius.is_some() {
        c.seam_band_radius = o.band_radius;
    }
    if o.keep_occluded {
        c.exclude_occluded = false;
    }
    c.validate()?;
    Ok(c)
}

fn run(command: Command, config: &PipelineConfig, band_radius: Option<u32>) -> Result<()> {
    match command {
        Command::SynthViews { mesh, out } => {
            let mesh = read_mesh(&mesh, config)?;
            let views = synthesize(&mesh, config)?;
            save_views(&views, &out)?;
            info!("wrote {} views to {}", views.len(), out.display());
        }
        Command::Bake { mesh, views, out } => {
            let mesh = read_mesh(&mesh, config)?;
            let views = read_views(&mesh, &views)?;
            let res = config.texture_resolution;
            let buffers = rasterize_uv(&mesh, res, res)?;
            let (fused, occlusion) = bake(&mesh, &views, &buffers, config)?;
            write_texture(&fused, &out)?;
            let report = json!({ "coverage": coverage(&fused), "occlusion": occlusion });
            write_json(&out.join("bake_report.json"), &report)?;
        }
        Command::Inpaint { mesh, texture, mask, out } => {
            let mesh = read_mesh(&mesh, config)?;
            let (tex, buffers) = read_texture(&mesh, &texture, Some(&mask))?;
            let (completed, report) = inpaint(&tex, &buffers, config)?;
            write_texture(&completed, &out)?;
            write_json(&out.join("inpaint_report.json"), &json!(report))?;
        }
        Command::Upscale { mesh, texture, upscaled_input, out } => {
            let mesh = read_mesh(&mesh, config)?;
            let (tex, _) = read_texture(&mesh, &texture, None)?;
            let upscaler = make_upscaler(upscaled_input.as_deref(), config)?;
            let fin = tex.width * config.upscale_factor;
            let final_buffers = rasterize_uv(&mesh, fin, fin)?;
            let up = upscale_to(&tex, upscaler.as_ref(), &final_buffers, config)?;
            write_texture(&up, &out)?;
        }
        Command::Smooth { mesh, texture, out } => {
            let mesh = read_mesh(&mesh, config)?;
            let (tex, buffers) = read_texture(&mesh, &texture, None)?;
            let mut config = config.clone();
            config.seam_band_radius = Some(band_radius.unwrap_or(default_band_radius(tex.width)));
            let (smoothed, seam, report) = smooth(&mesh, &tex, &buffers, &config)?;
            write_texture(&smoothed, &out)?;
            seam.save_png(out.join("seam_mask.png"))?;
            write_json(&out.join("smooth_report.json"), &json!(report))?;
        }
        Command::Pipeline { mesh, views, upscaled_input, dump_intermediates, out } => {
            let mesh = read_mesh(&mesh, config)?;
            let views = match views {
                Some(path) => read_views(&mesh, &path)?,
                None => synthesize(&mesh, config)?,
            };
            let upscaler = make_upscaler(upscaled_input.as_deref(), config)?;
            let output = run_pipeline(&mesh, &views, config, upscaler.as_ref())?;
            output.save(&out)?;
            if let Some(dir) = dump_intermediates {
                output.save_intermediates(&dir)?;
            }
            let m = &output.report.metrics;
            info!(
                "coverage {:.4}, seam energy {:.4} -> {:.4}, consistency {:.4}",
                m.coverage, m.seam_energy_before, m.seam_energy_after, m.consistency_mean
            );
        }
        Command::Metrics { mesh, texture, mask, before, views, out } => {
            let mesh = read_mesh(&mesh, config)?;
            let (tex, buffers) = read_texture(&mesh, &texture, mask.as_deref())?;
            let band = band_radius.unwrap_or(default_band_radius(tex.width));
            let seam = detect_seams(&buffers.valid, buffers.width, buffers.height, band);
            let pair_radius = config.seam_pair_scale * buffers.mean_texel_edge(&mesh);
            let energy = |cloud: &TexelCloud| seam_energy(cloud, &seam, pair_radius);
            let after = energy(&cloud_from_texture(&tex, &buffers)?)?;
            let before = match before {
                Some(path) => {
                    let (b, _) = read_texture(&mesh, &path, None)?;
                    energy(&cloud_from_texture(&b, &buffers)?)?
                }
                None => after,
            };
            let consistency = cross_view_consistency(
                &mesh,
                &buffers,
                &[&tex],
                &holdout_cameras(config)?,
                &config.consistency(),
            )?;
            let occlusion_excluded = match views {
                Some(path) => {
                    let views = read_views(&mesh, &path)?;
                    let (_, report) =
                        project_views(&mesh, &views, &buffers, config.projection(), config.occlusion_delta);
                    report.total_occluded()
                }
                None => 0,
            };
            let report = MetricsReport {
                coverage: coverage(&tex),
                seam_energy_before: before,
                seam_energy_after: after,
                consistency_mean: consistency.mean,
                occlusion_excluded,
            };
            if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            }
            report.save_json(&out)?;
        }
        Command::Render { mesh, texture, holdout, geometry, out } => {
            let mesh = read_mesh(&mesh, config)?;
            let (tex, _) = read_texture(&mesh, &texture, None)?;
            let cameras = if holdout {
                holdout_cameras(config)?
            } else {
                input_cameras(config)?
            };
            create_dir(&out)?;
            for (i, cam) in cameras.iter().enumerate() {
                let render = render_view(&mesh, cam, Some(&tex), RenderOptions::default());
                let image = ColorImage {
                    width: render.width,
                    height: render.height,
                    pixels: render.colors.clone().expect("textured render carries colors"),
                };
                image.save_png(out.join(format!("render_{i:02}.png")))?;
                if geometry {
                    save_depth_png(&render, None, out.join(format!("depth_{i:02}.png")))?;
                    save_normal_png(&render, out.join(format!("normal_{i:02}.png")))?;
                }
            }
        }
    }
    Ok(())
}

fn read_mesh(path: &Path, config: &PipelineConfig) -> Result<TriangleMesh> {
    let mesh = load_mesh(path).with_context(|| format!("loading mesh {}", path.display()))?;
    Ok(if config.normalize_mesh {
        normalize_mesh(&mesh)?
    } else {
        mesh
    })
}

fn read_views(mesh: &TriangleMesh, manifest: &Path) -> Result<ViewSet> {
    let (cameras, images) =
        load_views(manifest).with_context(|| format!("loading views from {}", manifest.display()))?;
    Ok(ViewSet::with_renders(mesh, cameras, images)?)
}

fn synthesize(mesh: &TriangleMesh, config: &PipelineConfig) -> Result<ViewSet> {
    let field = config.field.parse()?;
    Ok(synth_views(mesh, &input_cameras(config)?, field, config.jitter, config.seed)?)
}

/// Loads a texture PNG onto the mesh's charts at the image's resolution.
/// Without a mask every chart texel counts as painted.
fn read_texture(
    mesh: &TriangleMesh,
    path: &Path,
    mask: Option<&Path>,
) -> Result<(UvTexture, GeometryBuffers)> {
    let image = ColorImage::load_png(path)?;
    let buffers = rasterize_uv(mesh, image.width, image.height)?;
    let mut tex = UvTexture::from_image(image, buffers.valid.clone());
    if let Some(mask) = mask {
        let (w, h, painted) = load_mask_png(mask)?;
        if (w, h) != tex.dims() {
            bail!(
                "{} is {w}x{h} but {} is {}x{}",
                mask.display(),
                path.display(),
                tex.width,
                tex.height
            );
        }
        for (p, (m, v)) in tex.painted.iter_mut().zip(painted.iter().zip(&tex.valid)) {
            *p = *m && *v;
        }
    }
    Ok((tex, buffers))
}

fn make_upscaler(path: Option<&Path>, config: &PipelineConfig) -> Result<Box<dyn Upscaler>> {
    Ok(match path {
        Some(p) => Box::new(Precomputed::load(p, config.upscale_factor)?),
        None => Box::new(Lanczos3 {
            factor: config.upscale_factor,
        }),
    })
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

/// Texture plus its valid and painted masks.
fn write_texture(tex: &UvTexture, dir: &Path) -> Result<()> {
    create_dir(dir)?;
    tex.save_png(dir.join("texture.png"))?;
    save_mask_png(&tex.valid, tex.width, tex.height, dir.join("valid_mask.png"))?;
    save_mask_png(&tex.painted, tex.width, tex.height, dir.join("painted_mask.png"))?;
    info!("wrote {}", dir.join("texture.png").display());
    Ok(())
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}
