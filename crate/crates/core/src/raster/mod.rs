//! UV-space and view-space rasterization.
//!
//! Both rasterizers sample at pixel centers and share the same coverage
//! rule: a center exactly on an edge belongs to the triangle for which that
//! edge is an "owned" edge, so two triangles sharing an edge never both
//! cover a center on it.

mod uv;
mod view;

pub use uv::{rasterize_uv, rasterize_uv_with, GeometryBuffers, UvRasterOptions, NO_FACE};
pub use view::{render_view, save_depth_png, save_normal_png, RenderOptions, ViewRender};

/// Minimum edge length accepted by [`rasterize_uv`].
pub const MIN_RESOLUTION: u32 = 16;

/// Triangle in continuous pixel coordinates, oriented to positive area.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ScreenTriangle {
    pts: [[f64; 2]; 3],
    /// Whether the vertex order was swapped to make the area positive.
    swapped: bool,
    area: f64,
    owned: [bool; 3],
}

/// Signed edge function, exactly antisymmetric in `a` and `b`: the
/// endpoints are evaluated in a canonical order, so two triangles sharing
/// an edge get bitwise-opposite values at every point.
fn edge(a: [f64; 2], b: [f64; 2], p: [f64; 2]) -> f64 {
    let raw = |a: [f64; 2], b: [f64; 2]| (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]);
    if (a[0], a[1]) <= (b[0], b[1]) {
        raw(a, b)
    } else {
        -raw(b, a)
    }
}

impl ScreenTriangle {
    pub(crate) fn new(pts: [[f64; 2]; 3]) -> Option<Self> {
        let area = edge(pts[0], pts[1], pts[2]);
        if !area.is_finite() || area == 0.0 {
            return None;
        }
        let (pts, swapped, area) = if area < 0.0 {
            ([pts[0], pts[2], pts[1]], true, -area)
        } else {
            (pts, false, area)
        };
        // Antisymmetric ownership: of the two directions an edge can be
        // traversed in, exactly one is owned.
        let owned = [0, 1, 2].map(|i| {
            let a = pts[(i + 1) % 3];
            let b = pts[(i + 2) % 3];
            let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
            dy > 0.0 || (dy == 0.0 && dx < 0.0)
        });
        Some(ScreenTriangle {
            pts,
            swapped,
            area,
            owned,
        })
    }

    /// Inclusive range of pixel rows whose centers may be covered.
    pub(crate) fn rows(&self, height: u32) -> Option<(u32, u32)> {
        let lo = self.pts.iter().map(|p| p[1]).fold(f64::INFINITY, f64::min);
        let hi = self.pts.iter().map(|p| p[1]).fold(f64::NEG_INFINITY, f64::max);
        center_range(lo, hi, height)
    }

    pub(crate) fn cols(&self, width: u32) -> Option<(u32, u32)> {
        let lo = self.pts.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min);
        let hi = self.pts.iter().map(|p| p[0]).fold(f64::NEG_INFINITY, f64::max);
        center_range(lo, hi, width)
    }

    /// Barycentric weights (in the caller's original vertex order) if the
    /// pixel center `(col + 0.5, row + 0.5)` is covered.
    pub(crate) fn cover(&self, col: u32, row: u32) -> Option<[f64; 3]> {
        let p = [col as f64 + 0.5, row as f64 + 0.5];
        let mut w = [0.0; 3];
        for i in 0..3 {
            let e = edge(self.pts[(i + 1) % 3], self.pts[(i + 2) % 3], p);
            if e < 0.0 || (e == 0.0 && !self.owned[i]) {
                return None;
            }
            w[i] = e / self.area;
        }
        if self.swapped {
            w.swap(1, 2);
        }
        Some(w)
    }
}

fn center_range(lo: f64, hi: f64, n: u32) -> Option<(u32, u32)> {
    if n == 0 || !lo.is_finite() || !hi.is_finite() {
        return None;
    }
    let first = (lo - 0.5).ceil().max(0.0);
    let last = (hi - 0.5).floor().min(n as f64 - 1.0);
    (first <= last).then_some((first as u32, last as u32))
}

/// Buckets triangle indices by the rows they may cover, preserving the
/// input order inside each bucket.
pub(crate) fn bin_rows(tris: &[(u32, ScreenTriangle)], height: u32) -> Vec<Vec<usize>> {
    let mut rows = vec![Vec::new(); height as usize];
    for (i, (_, tri)) in tris.iter().enumerate() {
        if let Some((a, b)) = tri.rows(height) {
            for r in a..=b {
                rows[r as usize].push(i);
            }
        }
    }
    rows
}
