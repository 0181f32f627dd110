use crate::mesh::TriangleMesh;
use crate::project::Camera;
use crate::raster::{GeometryBuffers, ViewRender, NO_FACE};
use crate::exec;

/// Per-texel state of a surface point with respect to one camera.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Visibility {
    /// Not covered by any chart.
    Invalid,
    Visible,
    /// Behind another surface in this view.
    Occluded,
    /// Outside the frustum or landing on a background pixel.
    Unobserved,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VisibilityMap {
    pub width: u32,
    pub height: u32,
    pub states: Vec<Visibility>,
}

impl VisibilityMap {
    pub fn occluded_mask(&self) -> Vec<bool> {
        self.states
            .iter()
            .map(|s| *s == Visibility::Occluded)
            .collect()
    }

    pub fn count(&self, state: Visibility) -> usize {
        self.states.iter().filter(|s| **s == state).count()
    }
}

/// Default depth tolerance: twice the scene diameter divided by the
/// larger image dimension.
pub fn default_occlusion_delta(mesh: &TriangleMesh, camera: &Camera) -> f64 {
    let diameter = 2.0 * mesh.bounding_sphere().radius;
    2.0 * diameter / camera.width.max(camera.height) as f64
}

/// Classifies every valid texel against a depth render from the same
/// camera. A texel is occluded when its distance to the camera exceeds the
/// distance of the surface seen at its pixel by more than `delta`.
///
/// The seen surface's distance is measured along the texel's own ray, by
/// intersecting that ray with the plane of the face stored at the pixel.
/// This removes the sub-pixel depth slope that a plain per-pixel depth
/// lookup would add on oblique surfaces.
pub fn detect_occlusion(
    mesh: &TriangleMesh,
    buffers: &GeometryBuffers,
    camera: &Camera,
    render: &ViewRender,
    delta: f64,
) -> VisibilityMap {
    let origin = camera.position();
    let states = exec::map_range(buffers.len(), |i| {
        if !buffers.valid[i] {
            return Visibility::Invalid;
        }
        let p = buffers.positions[i];
        let Some(proj) = camera.project(p) else {
            return Visibility::Unobserved;
        };
        let Some((px, py)) = proj.pixel(render.width, render.height) else {
            return Visibility::Unobserved;
        };
        let pix = render.index(px, py);
        if !render.hit[pix] {
            return Visibility::Unobserved;
        }
        let seen = surface_distance(mesh, render, pix, origin, (p - origin) / proj.distance);
        if proj.distance > seen + delta {
            Visibility::Occluded
        } else {
            Visibility::Visible
        }
    });
    VisibilityMap {
        width: buffers.width,
        height: buffers.height,
        states,
    }
}

fn surface_distance(
    mesh: &TriangleMesh,
    render: &ViewRender,
    pix: usize,
    origin: crate::mesh::Vec3,
    dir: crate::mesh::Vec3,
) -> f64 {
    let depth = render.depth[pix];
    let face = render.face_ids[pix];
    if face == NO_FACE {
        return depth;
    }
    let [a, b, c] = mesh.triangle(face as usize);
    let n = (b - a).cross(&(c - a));
    let denom = n.dot(&dir);
    if denom == 0.0 {
        return depth;
    }
    let t = n.dot(&(a - origin)) / denom;
    // A plane seen nearly edge-on can put the intersection far away from
    // the pixel's own depth; fall back to the raster depth then.
    if t.is_finite() && (t - depth).abs() <= 0.25 * depth {
        t
    } else {
        depth
    }
}
