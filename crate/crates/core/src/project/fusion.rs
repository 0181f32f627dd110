use crate::error::{Error, Result};
use crate::exec;
use crate::project::{Camera, Visibility, VisibilityMap};
use crate::raster::{GeometryBuffers, ViewRender};
use crate::texture::{ColorImage, Rgb, UvTexture};

/// One view's colors resampled into texture space, with the cosine weight
/// of each texel (zero where the view contributes nothing).
#[derive(Debug, Clone, PartialEq)]
pub struct PerViewUvLayer {
    pub width: u32,
    pub height: u32,
    pub colors: Vec<Rgb>,
    pub weights: Vec<f64>,
}

impl PerViewUvLayer {
    pub fn contributing(&self) -> usize {
        self.weights.iter().filter(|w| **w > 0.0).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectionParams {
    /// Cosines below this contribute nothing.
    pub min_cos: f64,
    /// Honor the occlusion classification. When false, occluded texels
    /// are treated as visible.
    pub exclude_occluded: bool,
}

impl Default for ProjectionParams {
    fn default() -> Self {
        ProjectionParams {
            min_cos: 0.2,
            exclude_occluded: true,
        }
    }
}

/// Per-view exclusion counts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, serde::Serialize)]
pub struct ViewExclusions {
    pub occluded: usize,
    pub back_facing: usize,
    /// Front-facing but below the cosine cutoff.
    pub grazing: usize,
    pub unobserved: usize,
    pub contributing: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, serde::Serialize)]
pub struct OcclusionReport {
    pub candidates: usize,
    pub views: Vec<ViewExclusions>,
}

impl OcclusionReport {
    pub fn total_occluded(&self) -> usize {
        self.views.iter().map(|v| v.occluded).sum()
    }
}

/// Samples `image` at every visible texel's projection. The weight is the
/// cosine between the texel normal and the direction to the camera,
/// clamped at zero and cut to zero below `min_cos`. Pixels the geometry
/// render marks as background never contribute to the bilinear sample
/// unless all four taps are background.
pub fn inverse_project(
    image: &ColorImage,
    camera: &Camera,
    buffers: &GeometryBuffers,
    visibility: &VisibilityMap,
    render: &ViewRender,
    params: ProjectionParams,
) -> (PerViewUvLayer, ViewExclusions) {
    let origin = camera.position();
    let use_hits = render.width == image.width && render.height == image.height;
    #[derive(Clone, Copy)]
    enum Outcome {
        Skip,
        Occluded,
        BackFacing,
        Grazing,
        Unobserved,
        Sample(Rgb, f64),
    }
    let outcomes = exec::map_range(buffers.len(), |i| {
        let state = match visibility.states[i] {
            Visibility::Occluded if !params.exclude_occluded => Visibility::Visible,
            s => s,
        };
        match state {
            Visibility::Invalid => return Outcome::Skip,
            Visibility::Unobserved => return Outcome::Unobserved,
            Visibility::Occluded => return Outcome::Occluded,
            Visibility::Visible => {}
        }
        let p = buffers.positions[i];
        let to_cam = origin - p;
        let cos = to_cam.dot(&buffers.normals[i]) / to_cam.norm();
        if !(cos > 0.0) {
            return Outcome::BackFacing;
        }
        if cos < params.min_cos {
            return Outcome::Grazing;
        }
        let weight = cos;
        let Some(proj) = camera.project(p) else {
            return Outcome::Unobserved;
        };
        let color = if use_hits {
            image.sample_bilinear_masked(proj.x, proj.y, |k| render.hit[k])
        } else {
            let sx = image.width as f64 / render.width as f64;
            let sy = image.height as f64 / render.height as f64;
            image.sample_bilinear(proj.x * sx, proj.y * sy)
        };
        Outcome::Sample(color, weight.min(1.0))
    });

    let mut stats = ViewExclusions::default();
    let mut colors = vec![[0.0; 3]; outcomes.len()];
    let mut weights = vec![0.0; outcomes.len()];
    for (i, o) in outcomes.into_iter().enumerate() {
        match o {
            Outcome::Skip => {}
            Outcome::Occluded => stats.occluded += 1,
            Outcome::BackFacing => stats.back_facing += 1,
            Outcome::Grazing => stats.grazing += 1,
            Outcome::Unobserved => stats.unobserved += 1,
            Outcome::Sample(c, w) => {
                stats.contributing += 1;
                colors[i] = c;
                weights[i] = w;
            }
        }
    }
    (
        PerViewUvLayer {
            width: buffers.width,
            height: buffers.height,
            colors,
            weights,
        },
        stats,
    )
}

/// Fused texture plus the raw weight sum per texel.
#[derive(Debug, Clone, PartialEq)]
pub struct FusedTexture {
    pub texture: UvTexture,
    pub weight_sum: Vec<f64>,
}

/// Normalized cosine-weighted average of the layers. Texels no layer
/// observes stay unpainted. Contributions are summed in ascending order of
/// (weight, color), so the result does not depend on layer order.
pub fn fuse_layers(layers: &[PerViewUvLayer], valid: &[bool]) -> Result<FusedTexture> {
    let first = layers.first().ok_or_else(|| {
        Error::InvalidViewSet("fusion needs at least one layer".into())
    })?;
    let dims = (first.width, first.height);
    for l in layers {
        if (l.width, l.height) != dims || l.weights.len() != valid.len() {
            return Err(Error::MismatchedResolutions {
                expected: dims,
                found: (l.width, l.height),
            });
        }
    }
    let fused = exec::map_range(valid.len(), |i| {
        if !valid[i] {
            return None;
        }
        let mut contrib: Vec<(f64, Rgb)> = layers
            .iter()
            .filter(|l| l.weights[i] > 0.0)
            .map(|l| (l.weights[i], l.colors[i]))
            .collect();
        if contrib.is_empty() {
            return None;
        }
        contrib.sort_by(|a, b| {
            a.0.total_cmp(&b.0)
                .then(a.1[0].total_cmp(&b.1[0]))
                .then(a.1[1].total_cmp(&b.1[1]))
                .then(a.1[2].total_cmp(&b.1[2]))
        });
        let mut num = [0.0f64; 3];
        let mut den = 0.0f64;
        for (w, c) in contrib {
            for k in 0..3 {
                num[k] += w * c[k] as f64;
            }
            den += w;
        }
        Some((num.map(|x| ((x / den) as f32).clamp(0.0, 1.0)), den))
    });
    let mut texture = UvTexture::new(dims.0, dims.1, valid.to_vec());
    let mut weight_sum = vec![0.0; valid.len()];
    for (i, f) in fused.into_iter().enumerate() {
        if let Some((c, w)) = f {
            texture.pixels[i] = c;
            texture.painted[i] = true;
            weight_sum[i] = w;
        }
    }
    Ok(FusedTexture {
        texture,
        weight_sum,
    })
}
