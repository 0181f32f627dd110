use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::mesh::Vec3;
use crate::raster::GeometryBuffers;
use crate::texture::{Rgb, UvTexture};

/// One colored point per valid texel.
#[derive(Debug, Clone, PartialEq)]
pub struct TexelCloud {
    pub width: u32,
    pub height: u32,
    pub positions: Vec<Vec3>,
    pub normals: Vec<Vec3>,
    pub colors: Vec<Rgb>,
    pub painted: Vec<bool>,
    /// Row-major texel index each point came from.
    pub texels: Vec<u32>,
}

impl TexelCloud {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// `(row, col)` of point `i`.
    pub fn texel(&self, i: usize) -> (u32, u32) {
        let t = self.texels[i];
        (t / self.width, t % self.width)
    }

    pub fn painted_count(&self) -> usize {
        self.painted.iter().filter(|p| **p).count()
    }

    /// Writes `x y z nx ny nz r g b painted` lines.
    pub fn write_text(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = std::io::BufWriter::new(file);
        for i in 0..self.len() {
            let (p, n, c) = (self.positions[i], self.normals[i], self.colors[i]);
            writeln!(
                out,
                "{} {} {} {} {} {} {} {} {} {}",
                p.x, p.y, p.z, n.x, n.y, n.z, c[0], c[1], c[2], self.painted[i] as u8
            )
            .map_err(|e| Error::io(path, e))?;
        }
        out.flush().map_err(|e| Error::io(path, e))
    }
}

/// Lifts the valid texels of `texture` into a point cloud. Unpainted
/// texels become black, unpainted points.
pub fn cloud_from_texture(texture: &UvTexture, buffers: &GeometryBuffers) -> Result<TexelCloud> {
    if texture.dims() != buffers.dims() {
        return Err(Error::MismatchedResolutions {
            expected: buffers.dims(),
            found: texture.dims(),
        });
    }
    let texels: Vec<u32> = (0..buffers.len() as u32)
        .filter(|&i| buffers.valid[i as usize])
        .collect();
    let painted: Vec<bool> = texels.iter().map(|&t| texture.painted[t as usize]).collect();
    Ok(TexelCloud {
        width: buffers.width,
        height: buffers.height,
        positions: texels.iter().map(|&t| buffers.positions[t as usize]).collect(),
        normals: texels.iter().map(|&t| buffers.normals[t as usize]).collect(),
        colors: texels
            .iter()
            .zip(&painted)
            .map(|(&t, &p)| if p { texture.pixels[t as usize] } else { [0.0; 3] })
            .collect(),
        painted,
        texels,
    })
}

/// Writes the cloud colors back into a copy of `texture`; every point's
/// texel becomes painted.
pub fn texture_from_cloud(cloud: &TexelCloud, texture: &UvTexture) -> Result<UvTexture> {
    if (cloud.width, cloud.height) != texture.dims() {
        return Err(Error::MismatchedResolutions {
            expected: texture.dims(),
            found: (cloud.width, cloud.height),
        });
    }
    let unpainted = cloud.len() - cloud.painted_count();
    if unpainted > 0 {
        return Err(Error::UnpaintedPoints(unpainted));
    }
    let mut out = texture.clone();
    for (i, &t) in cloud.texels.iter().enumerate() {
        let t = t as usize;
        out.pixels[t] = cloud.colors[i];
        out.valid[t] = true;
        out.painted[t] = true;
        out.dilated[t] = false;
    }
    Ok(out)
}
