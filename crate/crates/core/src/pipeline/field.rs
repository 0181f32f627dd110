use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::exec;
use crate::mesh::{TriangleMesh, Vec3};
use crate::project::{Camera, ManifestView, ViewManifest, ViewSet};
use crate::raster::{render_view, RenderOptions};
use crate::texture::{ColorImage, Rgb};

/// Procedural ground-truth color as a pure function of 3D position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ColorField {
    Constant(Rgb),
    /// 3D checkerboard with cubic cells of the given edge.
    Checker(f64),
    /// Three bands repeating along y with the given band height.
    Stripes(f64),
    /// Low-frequency trigonometric field.
    Smooth,
}

pub const CONSTANT_COLOR: Rgb = [0.8, 0.5, 0.2];
const CHECKER_COLORS: [Rgb; 2] = [[0.9, 0.25, 0.2], [0.15, 0.35, 0.85]];
const STRIPE_COLORS: [Rgb; 3] = [[0.85, 0.2, 0.2], [0.2, 0.75, 0.3], [0.2, 0.3, 0.85]];

impl ColorField {
    pub fn eval(&self, p: Vec3) -> Rgb {
        match *self {
            ColorField::Constant(c) => c,
            ColorField::Checker(s) => {
                let parity = (p / s).map(f64::floor).sum().rem_euclid(2.0) as usize;
                CHECKER_COLORS[parity]
            }
            ColorField::Stripes(s) => STRIPE_COLORS[(p.y / s).floor().rem_euclid(3.0) as usize],
            ColorField::Smooth => [
                0.5 + 0.35 * (2.0 * p.x + 1.0).sin(),
                0.5 + 0.35 * (2.5 * p.y + 2.0).sin(),
                0.5 + 0.35 * (1.5 * p.z - 1.5 * p.x + 0.5).sin(),
            ]
            .map(|c| c as f32),
        }
    }
}

impl FromStr for ColorField {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "constant" => Ok(ColorField::Constant(CONSTANT_COLOR)),
            "checker" => Ok(ColorField::Checker(0.3)),
            "stripes" => Ok(ColorField::Stripes(0.2)),
            "smooth" => Ok(ColorField::Smooth),
            other => Err(Error::UnknownField(other.to_string())),
        }
    }
}

impl fmt::Display for ColorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ColorField::Constant(_) => "constant",
            ColorField::Checker(_) => "checker",
            ColorField::Stripes(_) => "stripes",
            ColorField::Smooth => "smooth",
        })
    }
}

/// Per-view brightness offsets, uniform in `[-jitter, jitter]`.
pub fn view_offsets(n: usize, jitter: f64, seed: u64) -> Vec<f32> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            if jitter > 0.0 {
                rng.random_range(-jitter..=jitter) as f32
            } else {
                0.0
            }
        })
        .collect()
}

/// Renders each camera and paints hit pixels with `field` at the hit point,
/// shifted by that view's brightness offset. Background pixels are black.
pub fn synth_views(
    mesh: &TriangleMesh,
    cameras: &[Camera],
    field: ColorField,
    jitter: f64,
    seed: u64,
) -> Result<ViewSet> {
    let offsets = view_offsets(cameras.len(), jitter, seed);
    let renders = exec::map_slice(cameras, |c| render_view(mesh, c, None, RenderOptions::default()));
    let images = cameras
        .iter()
        .zip(&renders)
        .zip(&offsets)
        .map(|((cam, render), &offset)| {
            let origin = cam.position();
            let pixels = exec::map_range(render.hit.len(), |i| {
                if !render.hit[i] {
                    return [0.0; 3];
                }
                let (x, y) = (i as u32 % render.width, i as u32 / render.width);
                let p = origin + cam.pixel_ray(x, y) * render.depth[i];
                field.eval(p).map(|c| (c + offset).clamp(0.0, 1.0))
            });
            ColorImage {
                width: render.width,
                height: render.height,
                pixels,
            }
        })
        .collect();
    ViewSet::new(cameras.to_vec(), images, renders)
}

/// Writes `view_XX.png` per view plus `manifest.json` into `dir`.
pub fn save_views(views: &ViewSet, dir: impl AsRef<Path>) -> Result<ViewManifest> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut manifest = ViewManifest { views: Vec::new() };
    for (i, (cam, img)) in views.cameras.iter().zip(&views.images).enumerate() {
        let name = format!("view_{i:02}.png");
        img.save_png(dir.join(&name))?;
        manifest.views.push(ManifestView::from_camera(cam, name));
    }
    manifest.save(dir.join("manifest.json"))?;
    Ok(manifest)
}
