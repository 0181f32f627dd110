use std::path::Path;

use image::{ImageBuffer, Luma, Rgb as PngRgb};

use super::{bin_rows, ScreenTriangle, NO_FACE};
use crate::error::{Error, Result};
use crate::exec;
use crate::mesh::{TriangleMesh, Vec2, Vec3};
use crate::project::Camera;
use crate::texture::{to_u8, Rgb, UvTexture};

/// Camera-space depth below which geometry is clipped.
const NEAR: f64 = 1e-4;

/// Per-pixel z-buffer output of one camera.
#[derive(Debug, Clone, PartialEq)]
pub struct ViewRender {
    pub width: u32,
    pub height: u32,
    /// Euclidean camera-to-surface distance; `+inf` on misses.
    pub depth: Vec<f64>,
    /// Unit world-space normal on hits, zero on misses.
    pub normals: Vec<Vec3>,
    /// Texture color on hits when rendered with a texture.
    pub colors: Option<Vec<Rgb>>,
    pub hit: Vec<bool>,
    pub face_ids: Vec<u32>,
}

impl ViewRender {
    pub fn index(&self, x: u32, y: u32) -> usize {
        y as usize * self.width as usize + x as usize
    }

    pub fn hit_count(&self) -> usize {
        self.hit.iter().filter(|h| **h).count()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RenderOptions {
    pub flat_normals: bool,
}

/// Perspective z-buffer render at the camera's resolution. Depth is the
/// exact ray/plane distance at each pixel center; when a texture is given,
/// hit pixels carry its bilinear sample at the interpolated UV.
pub fn render_view(
    mesh: &TriangleMesh,
    camera: &Camera,
    texture: Option<&UvTexture>,
    options: RenderOptions,
) -> ViewRender {
    let (width, height) = camera.resolution();
    let tris = screen_triangles(mesh, camera);
    let rows = bin_rows(&tris, height);
    let origin = camera.position();

    let plane_normals: Vec<Vec3> = (0..mesh.face_count())
        .map(|f| {
            let [a, b, c] = mesh.triangle(f);
            (b - a).cross(&(c - a))
        })
        .collect();

    let mut zbuf = vec![(f64::INFINITY, NO_FACE); width as usize * height as usize];
    exec::for_each_row(&mut zbuf, width as usize, |row, out| {
        for &t in &rows[row] {
            let (face, tri) = &tris[t];
            let Some((c0, c1)) = tri.cols(width) else { continue };
            let f = *face as usize;
            let n = plane_normals[f];
            let a = mesh.vertices()[mesh.faces()[f][0] as usize];
            for col in c0..=c1 {
                if tri.cover(col, row as u32).is_none() {
                    continue;
                }
                let dir = camera.pixel_ray(col, row as u32);
                let denom = n.dot(&dir);
                if denom == 0.0 {
                    continue;
                }
                let t = n.dot(&(a - origin)) / denom;
                let slot = &mut out[col as usize];
                // Ties keep the lower face index, which was written first.
                if t > 0.0 && t < slot.0 {
                    *slot = (t, *face);
                }
            }
        }
    });

    let shaded = exec::map_range(zbuf.len(), |i| {
        let (t, face) = zbuf[i];
        if face == NO_FACE {
            return None;
        }
        let f = face as usize;
        let (x, y) = ((i % width as usize) as u32, (i / width as usize) as u32);
        let p = origin + camera.pixel_ray(x, y) * t;
        let b = barycentric(mesh.triangle(f), p);
        let normal = if options.flat_normals {
            mesh.face_normal(f)
        } else {
            let ns = mesh.corner_normals(f);
            (ns[0] * b[0] + ns[1] * b[1] + ns[2] * b[2])
                .try_normalize(1e-12)
                .unwrap_or_else(|| mesh.face_normal(f))
        };
        let color = texture.map(|tex| {
            let uvs = mesh.uv_corners()[f];
            let uv: Vec2 = uvs[0] * b[0] + uvs[1] * b[1] + uvs[2] * b[2];
            tex.sample_uv(uv)
        });
        Some((normal, color))
    });

    let hit: Vec<bool> = shaded.iter().map(Option::is_some).collect();
    let normals = shaded
        .iter()
        .map(|s| s.map_or(Vec3::zeros(), |(n, _)| n))
        .collect();
    let colors = texture.map(|_| {
        shaded
            .iter()
            .map(|s| s.and_then(|(_, c)| c).unwrap_or([0.0; 3]))
            .collect()
    });
    ViewRender {
        width,
        height,
        depth: zbuf.iter().map(|z| z.0).collect(),
        face_ids: zbuf.iter().map(|z| z.1).collect(),
        normals,
        colors,
        hit,
    }
}

/// Projects every face, clipping against the near plane; faces that cross
/// it become a fan of triangles sharing the face id.
fn screen_triangles(mesh: &TriangleMesh, camera: &Camera) -> Vec<(u32, ScreenTriangle)> {
    let per_face = exec::map_range(mesh.face_count(), |f| {
        let cam = mesh.triangle(f).map(|p| camera.to_camera(p));
        let poly = clip_near(&cam);
        let pts: Vec<[f64; 2]> = poly.iter().map(|c| camera.camera_to_pixel(*c)).collect();
        (1..pts.len().saturating_sub(1))
            .filter_map(|i| ScreenTriangle::new([pts[0], pts[i], pts[i + 1]]))
            .map(|t| (f as u32, t))
            .collect::<Vec<_>>()
    });
    per_face.into_iter().flatten().collect()
}

fn clip_near(tri: &[Vec3; 3]) -> Vec<Vec3> {
    if tri.iter().all(|c| c.z >= NEAR) {
        return tri.to_vec();
    }
    let mut out = Vec::with_capacity(4);
    for i in 0..3 {
        let a = tri[i];
        let b = tri[(i + 1) % 3];
        let (ina, inb) = (a.z >= NEAR, b.z >= NEAR);
        if ina {
            out.push(a);
        }
        if ina != inb {
            let s = (NEAR - a.z) / (b.z - a.z);
            let mut p = a + (b - a) * s;
            p.z = NEAR;
            out.push(p);
        }
    }
    out
}

/// Barycentric coordinates of a point on the triangle's plane.
pub(crate) fn barycentric(tri: [Vec3; 3], p: Vec3) -> [f64; 3] {
    let [a, b, c] = tri;
    let n = (b - a).cross(&(c - a));
    let nn = n.dot(&n);
    let w0 = (c - b).cross(&(p - b)).dot(&n) / nn;
    let w1 = (a - c).cross(&(p - c)).dot(&n) / nn;
    [w0, w1, 1.0 - w0 - w1]
}

/// Writes a 16-bit depth PNG mapping `[0, depth_max]` linearly onto
/// `[0, 65535]` (misses are 0). Returns the `depth_max` used, which
/// defaults to the largest finite depth.
pub fn save_depth_png(
    render: &ViewRender,
    depth_max: Option<f64>,
    path: impl AsRef<Path>,
) -> Result<f64> {
    let path = path.as_ref();
    let max = depth_max.unwrap_or_else(|| {
        render
            .depth
            .iter()
            .copied()
            .filter(|d| d.is_finite())
            .fold(0.0, f64::max)
    });
    let scale = if max > 0.0 { 65535.0 / max } else { 0.0 };
    let img: ImageBuffer<Luma<u16>, Vec<u16>> =
        ImageBuffer::from_fn(render.width, render.height, |x, y| {
            let d = render.depth[render.index(x, y)];
            let v = if d.is_finite() {
                (d * scale).round().clamp(0.0, 65535.0) as u16
            } else {
                0
            };
            Luma([v])
        });
    img.save(path).map_err(|e| Error::Image {
        path: path.to_path_buf(),
        source: e,
    })?;
    Ok(max)
}

/// Writes normals as 8-bit RGB with `n * 0.5 + 0.5` encoding.
pub fn save_normal_png(render: &ViewRender, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let img: ImageBuffer<PngRgb<u8>, Vec<u8>> =
        ImageBuffer::from_fn(render.width, render.height, |x, y| {
            let i = render.index(x, y);
            if render.hit[i] {
                let n = render.normals[i];
                PngRgb([n.x, n.y, n.z].map(|c| to_u8((c * 0.5 + 0.5) as f32)))
            } else {
                PngRgb([0, 0, 0])
            }
        });
    img.save(path).map_err(|e| Error::Image {
        path: path.to_path_buf(),
        source: e,
    })
}
