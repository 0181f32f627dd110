//! Coverage, cross-view consistency and a brute-force ray-cast oracle.

use std::path::Path;

use crate::error::{Error, Result};
use crate::exec;
use crate::mesh::{TriangleMesh, Vec3};
use crate::project::{default_occlusion_delta, Camera};
use crate::raster::{render_view, GeometryBuffers, RenderOptions, ViewRender};
use crate::texture::{bilinear, UvTexture};

/// Fraction of valid texels that are painted; 1 when nothing is valid.
pub fn coverage(texture: &UvTexture) -> f64 {
    let valid = texture.valid_count();
    if valid == 0 {
        1.0
    } else {
        texture.painted_count() as f64 / valid as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hit {
    pub distance: f64,
    pub face: u32,
}

const RAY_EPS: f64 = 1e-12;

/// Nearest intersection of the ray with any face, by testing every face.
/// Hits within a relative `1e-12` of each other go to the lower face index.
pub fn raycast_oracle(mesh: &TriangleMesh, origin: Vec3, direction: Vec3) -> Option<Hit> {
    let mut best: Option<Hit> = None;
    for f in 0..mesh.face_count() {
        let Some(t) = intersect(mesh.triangle(f), origin, direction) else {
            continue;
        };
        if best.is_none_or(|b| t < b.distance - RAY_EPS * (1.0 + b.distance)) {
            best = Some(Hit { distance: t, face: f as u32 });
        }
    }
    best
}

/// Moller-Trumbore with inclusive edges; two-sided.
fn intersect([a, b, c]: [Vec3; 3], origin: Vec3, dir: Vec3) -> Option<f64> {
    let e1 = b - a;
    let e2 = c - a;
    let p = dir.cross(&e2);
    let det = e1.dot(&p);
    if det.abs() < 1e-300 {
        return None;
    }
    let inv = 1.0 / det;
    let s = origin - a;
    let u = s.dot(&p) * inv;
    if !(-RAY_EPS..=1.0 + RAY_EPS).contains(&u) {
        return None;
    }
    let q = s.cross(&e1);
    let v = dir.dot(&q) * inv;
    if v < -RAY_EPS || u + v > 1.0 + RAY_EPS {
        return None;
    }
    let t = e2.dot(&q) * inv;
    (t > 0.0).then_some(t)
}

/// Whether `point` on `face` is the first surface hit from `eye`.
pub fn oracle_visible(mesh: &TriangleMesh, eye: Vec3, point: Vec3, face: u32) -> bool {
    let to = point - eye;
    let dist = to.norm();
    if dist == 0.0 {
        return false;
    }
    match raycast_oracle(mesh, eye, to / dist) {
        Some(hit) => hit.face == face || (hit.distance - dist).abs() <= 1e-7 * (1.0 + dist),
        None => false,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ConsistencyOptions {
    /// Upper bound on surface samples drawn from the valid texels.
    pub max_samples: usize,
    /// Samples seen at a cosine below this in either view are skipped.
    pub min_cos: f64,
}

impl Default for ConsistencyOptions {
    fn default() -> Self {
        ConsistencyOptions {
            max_samples: 4096,
            min_cos: 0.2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct PairConsistency {
    pub a: usize,
    pub b: usize,
    pub samples: usize,
    pub mean: f64,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ConsistencyReport {
    pub pairs: Vec<PairConsistency>,
    /// Sample-weighted mean over all pairs.
    pub mean: f64,
}

/// Renders `textures` (one shared texture, or one per camera) from every
/// camera and compares the colors each pair of renders shows for the same
/// surface points. Surface points are a regular subsample of the valid
/// texels of `buffers`; visibility comes from [`raycast_oracle`].
pub fn cross_view_consistency(
    mesh: &TriangleMesh,
    buffers: &GeometryBuffers,
    textures: &[&UvTexture],
    cameras: &[Camera],
    options: &ConsistencyOptions,
) -> Result<ConsistencyReport> {
    if textures.len() != 1 && textures.len() != cameras.len() {
        return Err(Error::InvalidViewSet(format!(
            "{} textures for {} cameras",
            textures.len(),
            cameras.len()
        )));
    }
    let renders: Vec<ViewRender> = cameras
        .iter()
        .enumerate()
        .map(|(i, cam)| {
            let tex = textures[if textures.len() == 1 { 0 } else { i }];
            render_view(mesh, cam, Some(tex), RenderOptions::default())
        })
        .collect();

    let valid: Vec<usize> = (0..buffers.len()).filter(|&i| buffers.valid[i]).collect();
    let stride = valid.len().div_ceil(options.max_samples.max(1)).max(1);
    let samples: Vec<usize> = valid.into_iter().step_by(stride).collect();

    // Per camera, the rendered color at each sample, if seen.
    let seen: Vec<Vec<Option<[f64; 3]>>> = cameras
        .iter()
        .zip(&renders)
        .map(|(cam, render)| {
            let tol = default_occlusion_delta(mesh, cam);
            exec::map_slice(&samples, |&t| sample_render(mesh, buffers, cam, render, t, tol, options.min_cos))
        })
        .collect();

    let mut pairs = Vec::new();
    for a in 0..cameras.len() {
        for b in a + 1..cameras.len() {
            let mut sum = 0.0;
            let mut n = 0usize;
            for (ca, cb) in seen[a].iter().zip(&seen[b]) {
                if let (Some(ca), Some(cb)) = (ca, cb) {
                    sum += (0..3).map(|k| (ca[k] - cb[k]).abs()).sum::<f64>() / 3.0;
                    n += 1;
                }
            }
            pairs.push(PairConsistency {
                a,
                b,
                samples: n,
                mean: if n == 0 { 0.0 } else { sum / n as f64 },
            });
        }
    }
    let total: usize = pairs.iter().map(|p| p.samples).sum();
    let mean = if total == 0 {
        0.0
    } else {
        pairs.iter().map(|p| p.mean * p.samples as f64).sum::<f64>() / total as f64
    };
    Ok(ConsistencyReport { pairs, mean })
}

fn sample_render(
    mesh: &TriangleMesh,
    buffers: &GeometryBuffers,
    camera: &Camera,
    render: &ViewRender,
    texel: usize,
    depth_tol: f64,
    min_cos: f64,
) -> Option<[f64; 3]> {
    let colors = render.colors.as_ref()?;
    let p = buffers.positions[texel];
    let eye = camera.position();
    let to_eye = eye - p;
    let dist = to_eye.norm();
    if buffers.normals[texel].dot(&to_eye) < min_cos * dist {
        return None;
    }
    let proj = camera.project(p)?;
    let (px, py) = proj.pixel(render.width, render.height)?;
    let same_surface = |i: usize| render.hit[i] && (render.depth[i] - dist).abs() <= depth_tol;
    if !same_surface(render.index(px, py)) {
        return None;
    }
    if !oracle_visible(mesh, eye, p, buffers.face_ids[texel]) {
        return None;
    }
    let c = bilinear(colors, render.width, render.height, proj.x, proj.y, same_surface);
    Some(c.map(f64::from))
}

/// Flat summary written next to the final texture.
#[derive(Debug, Clone, Default, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct MetricsReport {
    pub coverage: f64,
    pub seam_energy_before: f64,
    pub seam_energy_after: f64,
    pub consistency_mean: f64,
    pub occlusion_excluded: usize,
}

impl MetricsReport {
    pub fn save_json(&self, path: impl AsRef<Path>) -> Result<()> {
        crate::error::write_json(path.as_ref(), self)
    }
}
