use log::warn;

use super::{bin_rows, ScreenTriangle, MIN_RESOLUTION};
use crate::error::{Error, Result};
use crate::exec;
use crate::mesh::{TriangleMesh, Vec3};
use crate::texture::uv_to_texel;

/// Face id stored at texels no chart covers.
pub const NO_FACE: u32 = u32::MAX;

/// Surface attributes rasterized into texture space.
#[derive(Debug, Clone, PartialEq)]
pub struct GeometryBuffers {
    pub width: u32,
    pub height: u32,
    /// Surface point per texel; zero where invalid.
    pub positions: Vec<Vec3>,
    /// Unit surface normal per texel; zero where invalid.
    pub normals: Vec<Vec3>,
    pub valid: Vec<bool>,
    pub face_ids: Vec<u32>,
    /// Texels written by more than one face (overlapping charts).
    pub overlap_count: usize,
}

impl GeometryBuffers {
    pub fn dims(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn len(&self) -> usize {
        self.valid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.valid.is_empty()
    }

    pub fn valid_count(&self) -> usize {
        self.valid.iter().filter(|v| **v).count()
    }

    /// Mean 3D distance between horizontally or vertically adjacent valid
    /// texels rasterized from the same face. Falls back to the square root
    /// of surface area per valid texel when no such pair exists.
    pub fn mean_texel_edge(&self, mesh: &TriangleMesh) -> f64 {
        let (w, h) = (self.width as usize, self.height as usize);
        let mut sum = 0.0;
        let mut n = 0usize;
        for row in 0..h {
            for col in 0..w {
                let i = row * w + col;
                if !self.valid[i] {
                    continue;
                }
                for j in [
                    (col + 1 < w).then_some(i + 1),
                    (row + 1 < h).then_some(i + w),
                ]
                .into_iter()
                .flatten()
                {
                    if self.valid[j] && self.face_ids[j] == self.face_ids[i] {
                        sum += (self.positions[j] - self.positions[i]).norm();
                        n += 1;
                    }
                }
            }
        }
        if n > 0 {
            sum / n as f64
        } else {
            (mesh.surface_area() / self.valid_count().max(1) as f64).sqrt()
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct UvRasterOptions {
    /// Use face normals instead of interpolated vertex normals.
    pub flat_normals: bool,
}

pub fn rasterize_uv(mesh: &TriangleMesh, width: u32, height: u32) -> Result<GeometryBuffers> {
    rasterize_uv_with(mesh, width, height, UvRasterOptions::default())
}

/// Fills every texel whose center lies in a face's UV triangle with the
/// barycentric interpolation of that face's positions and normals. When
/// charts overlap, the face with the larger index wins.
pub fn rasterize_uv_with(
    mesh: &TriangleMesh,
    width: u32,
    height: u32,
    options: UvRasterOptions,
) -> Result<GeometryBuffers> {
    if width < MIN_RESOLUTION || height < MIN_RESOLUTION {
        return Err(Error::ResolutionTooSmall {
            width,
            height,
            min: MIN_RESOLUTION,
        });
    }
    let tris: Vec<(u32, ScreenTriangle)> = mesh
        .uv_corners()
        .iter()
        .enumerate()
        .filter_map(|(f, uvs)| {
            let pts = uvs.map(|uv| {
                let (x, y) = uv_to_texel(uv, width, height);
                [x, y]
            });
            ScreenTriangle::new(pts).map(|t| (f as u32, t))
        })
        .collect();
    let rows = bin_rows(&tris, height);
    let face_normals: Vec<Vec3> = (0..mesh.face_count()).map(|f| mesh.face_normal(f)).collect();

    #[derive(Clone, Copy)]
    struct Texel {
        face: u32,
        writes: u32,
        position: Vec3,
        normal: Vec3,
    }
    let empty = Texel {
        face: NO_FACE,
        writes: 0,
        position: Vec3::zeros(),
        normal: Vec3::zeros(),
    };
    let mut texels = vec![empty; width as usize * height as usize];
    exec::for_each_row(&mut texels, width as usize, |row, out| {
        for &t in &rows[row] {
            let (face, tri) = &tris[t];
            let Some((c0, c1)) = tri.cols(width) else { continue };
            let f = *face as usize;
            let corners = mesh.triangle(f);
            let normals = mesh.corner_normals(f);
            for col in c0..=c1 {
                let Some(b) = tri.cover(col, row as u32) else { continue };
                let slot = &mut out[col as usize];
                let position = corners[0] * b[0] + corners[1] * b[1] + corners[2] * b[2];
                let normal = if options.flat_normals {
                    face_normals[f]
                } else {
                    (normals[0] * b[0] + normals[1] * b[1] + normals[2] * b[2])
                        .try_normalize(1e-12)
                        .unwrap_or(face_normals[f])
                };
                *slot = Texel {
                    face: *face,
                    writes: slot.writes + 1,
                    position,
                    normal,
                };
            }
        }
    });
    let overlap_count = texels.iter().filter(|t| t.writes > 1).count();
    if overlap_count > 0 {
        warn!("{overlap_count} texels covered by overlapping UV charts");
    }

    Ok(GeometryBuffers {
        width,
        height,
        valid: texels.iter().map(|t| t.face != NO_FACE).collect(),
        face_ids: texels.iter().map(|t| t.face).collect(),
        positions: texels.iter().map(|t| t.position).collect(),
        normals: texels.iter().map(|t| t.normal).collect(),
        overlap_count,
    })
}
