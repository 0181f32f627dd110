use crate::error::{Error, Result};

/// Smallest distance used in inverse-distance weighting.
pub const MIN_DISTANCE: f64 = 1e-12;

/// Piecewise map from normal cosine similarity to a weight factor:
/// near-perpendicular or opposed neighbors get `1e-8`, moderately aligned
/// ones keep their cosine, well-aligned ones get `10`.
pub fn robust_map(x: f64) -> Result<f64> {
    if !(x.abs() <= 1.0 + 1e-9) {
        return Err(Error::Domain(x));
    }
    Ok(robust_map_clamped(x))
}

fn robust_map_clamped(x: f64) -> f64 {
    if x < 0.5 {
        1e-8
    } else if x < 0.9 {
        x
    } else {
        10.0
    }
}

/// How the normal similarity between a point and a neighbor scales the
/// neighbor's inverse-distance weight.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormalGating {
    /// [`robust_map`] of the cosine.
    #[default]
    Robust,
    /// The cosine itself, clamped at zero.
    RawCosine,
    /// Ignore normals.
    Disabled,
}

impl NormalGating {
    pub fn factor(self, cos: f64) -> f64 {
        match self {
            NormalGating::Robust => robust_map_clamped(cos.clamp(-1.0, 1.0)),
            NormalGating::RawCosine => cos.clamp(0.0, 1.0),
            NormalGating::Disabled => 1.0,
        }
    }

    /// Whether a neighbor with this cosine counts as lying on the same
    /// surface sheet.
    pub fn compatible(self, cos: f64) -> bool {
        match self {
            NormalGating::Disabled => true,
            _ => cos >= 0.5,
        }
    }
}

/// Normalized inverse distance times the normal factor, renormalized to sum
/// to one. Falls back to pure inverse distance if every factor is zero.
pub fn aggregation_weights(
    distances: &[f64],
    normal_dots: &[f64],
    gating: NormalGating,
) -> Result<Vec<f64>> {
    if distances.is_empty() {
        return Err(Error::NoNeighbors);
    }
    assert_eq!(distances.len(), normal_dots.len());
    let mut w = Vec::with_capacity(distances.len());
    aggregate_into(distances.iter().copied(), normal_dots.iter().copied(), gating, &mut w);
    Ok(w)
}

pub(crate) fn aggregate_into(
    distances: impl Iterator<Item = f64> + Clone,
    normal_dots: impl Iterator<Item = f64>,
    gating: NormalGating,
    out: &mut Vec<f64>,
) {
    out.clear();
    let inv = distances.map(|d| 1.0 / d.max(MIN_DISTANCE));
    let inv_sum: f64 = inv.clone().sum();
    out.extend(
        inv.clone()
            .zip(normal_dots)
            .map(|(i, dot)| i / inv_sum * gating.factor(dot)),
    );
    let total: f64 = out.iter().sum();
    if total > 0.0 {
        out.iter_mut().for_each(|w| *w /= total);
    } else {
        out.clear();
        out.extend(inv.map(|i| i / inv_sum));
    }
}

/// `sum_j w_j * c_j`, clamped to the unit cube.
pub(crate) fn blend(weights: &[f64], colors: impl Iterator<Item = [f32; 3]>) -> [f32; 3] {
    let mut acc = [0.0f64; 3];
    for (w, c) in weights.iter().zip(colors) {
        for k in 0..3 {
            acc[k] += w * c[k] as f64;
        }
    }
    acc.map(|x| (x as f32).clamp(0.0, 1.0))
}
