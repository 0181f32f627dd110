//! Chart-boundary detection on the validity mask and 3D-aware smoothing of
//! the colors along it.

use std::collections::VecDeque;
use std::path::Path;

use crate::error::{Error, Result};
use crate::exec;
use crate::inpaint3d::{aggregate_into, blend, NormalGating, SpatialIndex, TexelCloud};
use crate::texture::save_mask_png;

/// Label of texels outside every chart.
pub const NO_CHART: u32 = u32::MAX;

#[derive(Debug, Clone, PartialEq)]
pub struct SeamMask {
    pub width: u32,
    pub height: u32,
    pub mask: Vec<bool>,
    pub band_radius: u32,
    /// 4-connected component of each valid texel, `NO_CHART` elsewhere.
    pub labels: Vec<u32>,
    pub chart_count: usize,
}

impl SeamMask {
    pub fn count(&self) -> usize {
        self.mask.iter().filter(|m| **m).count()
    }

    pub fn save_png(&self, path: impl AsRef<Path>) -> Result<()> {
        save_mask_png(&self.mask, self.width, self.height, path)
    }
}

/// Band radius for a texture of `resolution`, given 2 texels at 2048.
pub fn default_band_radius(resolution: u32) -> u32 {
    ((2 * resolution) / 2048).max(1)
}

/// Boundary texels are valid texels with an invalid 4-neighbor (the image
/// border does not count). The band of radius `r` holds the valid texels
/// within Chebyshev distance `r - 1` of a boundary texel, so `r = 1` is the
/// boundary itself.
pub fn detect_seams(valid: &[bool], width: u32, height: u32, band_radius: u32) -> SeamMask {
    let (w, h) = (width as usize, height as usize);
    assert_eq!(valid.len(), w * h);
    let r = band_radius.max(1) as usize - 1;

    let boundary: Vec<bool> = exec::map_range(w * h, |i| {
        if !valid[i] {
            return false;
        }
        let (x, y) = (i % w, i / w);
        (x > 0 && !valid[i - 1])
            || (x + 1 < w && !valid[i + 1])
            || (y > 0 && !valid[i - w])
            || (y + 1 < h && !valid[i + w])
    });

    // Separable square dilation of the boundary.
    let horizontal: Vec<bool> = exec::map_range(w * h, |i| {
        let (x, y) = (i % w, i / w);
        let lo = x.saturating_sub(r);
        let hi = (x + r).min(w - 1);
        boundary[y * w + lo..=y * w + hi].iter().any(|b| *b)
    });
    let mask: Vec<bool> = exec::map_range(w * h, |i| {
        if !valid[i] {
            return false;
        }
        let (x, y) = (i % w, i / w);
        let lo = y.saturating_sub(r);
        let hi = (y + r).min(h - 1);
        (lo..=hi).any(|yy| horizontal[yy * w + x])
    });

    let (labels, chart_count) = label_components(valid, w, h);
    SeamMask {
        width,
        height,
        mask,
        band_radius,
        labels,
        chart_count,
    }
}

fn label_components(valid: &[bool], w: usize, h: usize) -> (Vec<u32>, usize) {
    let mut labels = vec![NO_CHART; w * h];
    let mut next = 0u32;
    let mut queue = VecDeque::new();
    for start in 0..w * h {
        if !valid[start] || labels[start] != NO_CHART {
            continue;
        }
        labels[start] = next;
        queue.push_back(start);
        while let Some(i) = queue.pop_front() {
            let (x, y) = (i % w, i / w);
            let mut visit = |j: usize| {
                if valid[j] && labels[j] == NO_CHART {
                    labels[j] = next;
                    queue.push_back(j);
                }
            };
            if x > 0 {
                visit(i - 1);
            }
            if x + 1 < w {
                visit(i + 1);
            }
            if y > 0 {
                visit(i - w);
            }
            if y + 1 < h {
                visit(i + w);
            }
        }
        next += 1;
    }
    (labels, next as usize)
}

fn seam_points(cloud: &TexelCloud, seam: &SeamMask) -> Result<Vec<bool>> {
    if (cloud.width, cloud.height) != (seam.width, seam.height) {
        return Err(Error::MismatchedResolutions {
            expected: (cloud.width, cloud.height),
            found: (seam.width, seam.height),
        });
    }
    Ok(cloud.texels.iter().map(|&t| seam.mask[t as usize]).collect())
}

/// Recolors every seam point from its `k` nearest non-seam points in one
/// pass. Non-seam points keep their exact colors.
pub fn ssa_smooth(
    cloud: &TexelCloud,
    seam: &SeamMask,
    k: usize,
    gating: NormalGating,
) -> Result<TexelCloud> {
    if k == 0 {
        return Err(Error::InvalidConfig("k must be at least 1".into()));
    }
    let on_seam = seam_points(cloud, seam)?;
    let seam_ids: Vec<u32> = (0..cloud.len() as u32).filter(|&i| on_seam[i as usize]).collect();
    if seam_ids.is_empty() {
        return Ok(cloud.clone());
    }
    let others: Vec<u32> = (0..cloud.len() as u32).filter(|&i| !on_seam[i as usize]).collect();
    if others.is_empty() {
        return Err(Error::NoNonSeamPoints);
    }
    let index = SpatialIndex::from_subset(&cloud.positions, &others);
    let colors = exec::map_slice(&seam_ids, |&i| {
        let i = i as usize;
        let neighbors = index.nearest(cloud.positions[i], k);
        let n = cloud.normals[i];
        let mut w = Vec::with_capacity(neighbors.len());
        aggregate_into(
            neighbors.iter().map(|nb| nb.distance),
            neighbors.iter().map(|nb| n.dot(&cloud.normals[nb.index as usize])),
            gating,
            &mut w,
        );
        blend(&w, neighbors.iter().map(|nb| cloud.colors[nb.index as usize]))
    });
    let mut out = cloud.clone();
    for (&i, c) in seam_ids.iter().zip(colors) {
        out.colors[i as usize] = c;
    }
    Ok(out)
}

/// Mean per-channel color jump between each seam point and the nearest seam
/// point of another chart within `pair_radius`. Zero when no such pair exists.
pub fn seam_energy(cloud: &TexelCloud, seam: &SeamMask, pair_radius: f64) -> Result<f64> {
    let on_seam = seam_points(cloud, seam)?;
    let seam_ids: Vec<u32> = (0..cloud.len() as u32).filter(|&i| on_seam[i as usize]).collect();
    if seam_ids.is_empty() {
        return Ok(0.0);
    }
    let chart = |i: usize| seam.labels[cloud.texels[i] as usize];
    let index = SpatialIndex::from_subset(&cloud.positions, &seam_ids);
    let jumps: Vec<Option<f64>> = exec::map_slice(&seam_ids, |&i| {
        let i = i as usize;
        let other = index
            .within(cloud.positions[i], pair_radius)
            .into_iter()
            .find(|nb| chart(nb.index as usize) != chart(i))?;
        let (a, b) = (cloud.colors[i], cloud.colors[other.index as usize]);
        Some((0..3).map(|c| (a[c] as f64 - b[c] as f64).abs()).sum::<f64>() / 3.0)
    });
    let (sum, n) = jumps
        .into_iter()
        .flatten()
        .fold((0.0, 0usize), |(s, n), j| (s + j, n + 1));
    Ok(if n == 0 { 0.0 } else { sum / n as f64 })
}
