//! Color propagation from painted to unpainted texel points by
//! normal-gated k-nearest-neighbor averaging over the 3D surface.

mod cloud;
mod index;
mod weights;

pub use cloud::{cloud_from_texture, texture_from_cloud, TexelCloud};
pub use index::{Neighbor, SpatialIndex};
pub use weights::{aggregation_weights, robust_map, NormalGating, MIN_DISTANCE};

pub(crate) use weights::{aggregate_into, blend};

use crate::error::{Error, Result};
use crate::exec;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct S3iOptions {
    pub k: usize,
    pub max_rounds: usize,
    pub gating: NormalGating,
    /// Hold back a point whose neighbors all lie on a different surface
    /// sheet until a round paints nothing else.
    pub defer_gated: bool,
}

impl Default for S3iOptions {
    fn default() -> Self {
        S3iOptions {
            k: 8,
            max_rounds: 64,
            gating: NormalGating::Robust,
            defer_gated: true,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, serde::Serialize)]
pub struct S3iReport {
    pub rounds: usize,
    /// Points painted per round.
    pub painted_per_round: Vec<usize>,
    /// Points that took their nearest neighbor's color after `max_rounds`.
    pub forced: usize,
}

/// Paints every point of `cloud`. Rounds read a snapshot of the painted set,
/// so the result does not depend on evaluation order or thread count.
pub fn s3i_inpaint(cloud: &TexelCloud, options: &S3iOptions) -> Result<(TexelCloud, S3iReport)> {
    if options.k == 0 {
        return Err(Error::InvalidConfig("k must be at least 1".into()));
    }
    let mut out = cloud.clone();
    let mut report = S3iReport::default();
    if out.painted.iter().all(|p| *p) {
        return Ok((out, report));
    }
    if !out.painted.iter().any(|p| *p) {
        return Err(Error::NoPaintedSeed);
    }

    // Each pending point keeps its k nearest painted points. Points painted
    // in a round are merged in at the next one, which yields the same set a
    // fresh query over all painted points would.
    let mut sources: Vec<u32> = (0..out.len() as u32).filter(|&i| out.painted[i as usize]).collect();
    let mut pending: Vec<u32> = (0..out.len() as u32).filter(|&i| !out.painted[i as usize]).collect();
    let mut knn: Vec<Vec<Neighbor>> = vec![Vec::new(); pending.len()];
    let mut defer = options.defer_gated;
    while report.rounds < options.max_rounds && !pending.is_empty() {
        let index = SpatialIndex::from_subset(&out.positions, &sources);
        let snapshot = &out;
        let results: Vec<(Vec<Neighbor>, Option<[f32; 3]>)> = exec::map_range(pending.len(), |j| {
            let i = pending[j] as usize;
            let neighbors = merge_nearest(&knn[j], &index.nearest(snapshot.positions[i], options.k), options.k);
            let n = snapshot.normals[i];
            let dots: Vec<f64> = neighbors
                .iter()
                .map(|nb| n.dot(&snapshot.normals[nb.index as usize]))
                .collect();
            if defer && !dots.iter().any(|&d| options.gating.compatible(d)) {
                return (neighbors, None);
            }
            let mut w = Vec::with_capacity(neighbors.len());
            aggregate_into(
                neighbors.iter().map(|nb| nb.distance),
                dots.iter().copied(),
                options.gating,
                &mut w,
            );
            let color = blend(&w, neighbors.iter().map(|nb| snapshot.colors[nb.index as usize]));
            (neighbors, Some(color))
        });
        sources.clear();
        let mut still = Vec::new();
        let mut still_knn = Vec::new();
        for (&i, (neighbors, color)) in pending.iter().zip(results) {
            match color {
                Some(c) => {
                    out.colors[i as usize] = c;
                    out.painted[i as usize] = true;
                    sources.push(i);
                }
                None => {
                    still.push(i);
                    still_knn.push(neighbors);
                }
            }
        }
        report.rounds += 1;
        report.painted_per_round.push(sources.len());
        if sources.is_empty() {
            // Only deferred points remain; paint them unconditionally.
            defer = false;
        }
        pending = still;
        knn = still_knn;
    }

    let pending: Vec<u32> = (0..out.len() as u32).filter(|&i| !out.painted[i as usize]).collect();
    if !pending.is_empty() {
        let painted: Vec<u32> = (0..out.len() as u32).filter(|&i| out.painted[i as usize]).collect();
        let index = SpatialIndex::from_subset(&out.positions, &painted);
        for &i in &pending {
            let nb = index.nearest(out.positions[i as usize], 1)[0];
            out.colors[i as usize] = out.colors[nb.index as usize];
        }
        for &i in &pending {
            out.painted[i as usize] = true;
        }
        report.forced = pending.len();
        log::warn!("{} points forced to nearest color after {} rounds", pending.len(), report.rounds);
    }
    Ok((out, report))
}

/// The `k` smallest of two sorted, disjoint neighbor lists.
fn merge_nearest(a: &[Neighbor], b: &[Neighbor], k: usize) -> Vec<Neighbor> {
    let key = |n: &Neighbor| (n.distance, n.index);
    let mut out = Vec::with_capacity(k.min(a.len() + b.len()));
    let (mut i, mut j) = (0, 0);
    while out.len() < k && (i < a.len() || j < b.len()) {
        let take_a = j >= b.len() || (i < a.len() && key(&a[i]).partial_cmp(&key(&b[j])) != Some(std::cmp::Ordering::Greater));
        if take_a {
            out.push(a[i]);
            i += 1;
        } else {
            out.push(b[j]);
            j += 1;
        }
    }
    out
}
