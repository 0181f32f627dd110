//! Triangle meshes with corner-attributed UV atlases.

mod obj;

use std::collections::HashMap;

use log::warn;
use nalgebra::{Vector2, Vector3};

use crate::error::{Error, Result};

pub use obj::{load_mesh, load_mesh_with, parse_obj, save_obj, to_obj_string, LoadOptions};

pub type Vec3 = Vector3<f64>;
pub type Vec2 = Vector2<f64>;

/// Radius of the bounding sphere after [`normalize_mesh`].
pub const NORMALIZED_RADIUS: f64 = 0.9;

/// Faces whose area, measured after normalization, falls below this are dropped.
pub const DEGENERATE_AREA: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundingSphere {
    pub center: Vec3,
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeshStats {
    pub face_count: usize,
    pub vertex_count: usize,
    pub chart_count: usize,
    pub bounding_sphere: BoundingSphere,
}

/// Counters collected while validating a mesh.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MeshReport {
    pub dropped_degenerate: usize,
    /// UV corners moved into the unit square.
    pub clamped_uvs: usize,
    pub isolated_vertices: usize,
}

/// Triangle mesh whose UVs are stored per face corner, so a vertex may sit
/// in several charts at once.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleMesh {
    vertices: Vec<Vec3>,
    faces: Vec<[u32; 3]>,
    uv_corners: Vec<[Vec2; 3]>,
    vertex_normals: Vec<Vec3>,
}

impl TriangleMesh {
    /// Validates the raw arrays, drops degenerate faces, clamps UVs to the
    /// unit square and computes area-weighted vertex normals.
    pub fn new(
        vertices: Vec<Vec3>,
        faces: Vec<[u32; 3]>,
        uv_corners: Vec<[Vec2; 3]>,
    ) -> Result<(Self, MeshReport)> {
        if faces.len() != uv_corners.len() {
            return Err(Error::Parse {
                line: 0,
                message: format!(
                    "{} faces but {} UV corner triples",
                    faces.len(),
                    uv_corners.len()
                ),
            });
        }
        let n = vertices.len();
        if let Some(face) = faces.iter().find(|f| f.iter().any(|&i| i as usize >= n)) {
            return Err(Error::Parse {
                line: 0,
                message: format!("face {face:?} references a vertex beyond {n}"),
            });
        }
        if faces.is_empty() {
            return Err(Error::EmptyMesh);
        }

        let mut report = MeshReport::default();
        let sphere = bounding_sphere(&vertices);
        let scale = if sphere.radius > 0.0 {
            NORMALIZED_RADIUS / sphere.radius
        } else {
            1.0
        };
        let mut kept_faces = Vec::with_capacity(faces.len());
        let mut kept_uvs = Vec::with_capacity(faces.len());
        for (face, mut uvs) in faces.into_iter().zip(uv_corners) {
            let [a, b, c] = face.map(|i| vertices[i as usize]);
            let area = 0.5 * (b - a).cross(&(c - a)).norm() * scale * scale;
            if !(area >= DEGENERATE_AREA) {
                report.dropped_degenerate += 1;
                continue;
            }
            for uv in uvs.iter_mut() {
                let clamped = Vec2::new(uv.x.clamp(0.0, 1.0), uv.y.clamp(0.0, 1.0));
                if clamped != *uv {
                    report.clamped_uvs += 1;
                    *uv = clamped;
                }
            }
            kept_faces.push(face);
            kept_uvs.push(uvs);
        }
        if report.dropped_degenerate > 0 {
            warn!("dropped {} degenerate faces", report.dropped_degenerate);
        }
        if report.clamped_uvs > 0 {
            warn!("clamped {} UV coordinates into [0,1]", report.clamped_uvs);
        }
        if kept_faces.is_empty() {
            return Err(Error::EmptyMesh);
        }
        let mut mesh = TriangleMesh {
            vertex_normals: vec![Vec3::z(); vertices.len()],
            vertices,
            faces: kept_faces,
            uv_corners: kept_uvs,
        };
        report.isolated_vertices = mesh.recompute_normals();
        Ok((mesh, report))
    }

    /// Replaces the vertex normals with the given ones, renormalized.
    /// Zero-length entries fall back to the computed normal.
    pub fn with_normals(mut self, normals: &[Vec3]) -> Result<Self> {
        if normals.len() != self.vertices.len() {
            return Err(Error::Parse {
                line: 0,
                message: format!(
                    "{} normals for {} vertices",
                    normals.len(),
                    self.vertices.len()
                ),
            });
        }
        for (dst, src) in self.vertex_normals.iter_mut().zip(normals) {
            if let Some(n) = src.try_normalize(1e-12) {
                *dst = n;
            }
        }
        Ok(self)
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn faces(&self) -> &[[u32; 3]] {
        &self.faces
    }

    pub fn uv_corners(&self) -> &[[Vec2; 3]] {
        &self.uv_corners
    }

    pub fn vertex_normals(&self) -> &[Vec3] {
        &self.vertex_normals
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn triangle(&self, face: usize) -> [Vec3; 3] {
        self.faces[face].map(|i| self.vertices[i as usize])
    }

    pub fn corner_normals(&self, face: usize) -> [Vec3; 3] {
        self.faces[face].map(|i| self.vertex_normals[i as usize])
    }

    /// Unit geometric normal (right-handed winding), or +z for slivers.
    pub fn face_normal(&self, face: usize) -> Vec3 {
        let [a, b, c] = self.triangle(face);
        (b - a).cross(&(c - a)).try_normalize(0.0).unwrap_or_else(Vec3::z)
    }

    pub fn surface_area(&self) -> f64 {
        (0..self.faces.len())
            .map(|f| {
                let [a, b, c] = self.triangle(f);
                0.5 * (b - a).cross(&(c - a)).norm()
            })
            .sum()
    }

    pub fn bounding_sphere(&self) -> BoundingSphere {
        bounding_sphere(&self.vertices)
    }

    pub fn stats(&self) -> MeshStats {
        MeshStats {
            face_count: self.faces.len(),
            vertex_count: self.vertices.len(),
            chart_count: self.chart_count(),
            bounding_sphere: self.bounding_sphere(),
        }
    }

    /// Per-face UV chart label; faces are joined when they share an edge
    /// with identical UV coordinates at both ends. Labels are dense and
    /// numbered by first appearance.
    pub fn uv_chart_labels(&self) -> Vec<u32> {
        let mut sets = DisjointSet::new(self.faces.len());
        let mut edges: HashMap<[(u64, u64); 2], usize> = HashMap::new();
        for (f, uvs) in self.uv_corners.iter().enumerate() {
            for e in 0..3 {
                let a = uv_key(uvs[e]);
                let b = uv_key(uvs[(e + 1) % 3]);
                let key = if a <= b { [a, b] } else { [b, a] };
                match edges.get(&key) {
                    Some(&other) => sets.union(other, f),
                    None => {
                        edges.insert(key, f);
                    }
                }
            }
        }
        let mut dense = HashMap::new();
        (0..self.faces.len())
            .map(|f| {
                let root = sets.find(f);
                let next = dense.len() as u32;
                *dense.entry(root).or_insert(next)
            })
            .collect()
    }

    pub fn chart_count(&self) -> usize {
        self.uv_chart_labels()
            .into_iter()
            .max()
            .map_or(0, |m| m as usize + 1)
    }

    /// Area-weighted vertex normals; returns the number of vertices that
    /// received the default +z normal.
    fn recompute_normals(&mut self) -> usize {
        let mut acc = vec![Vec3::zeros(); self.vertices.len()];
        for face in &self.faces {
            let [a, b, c] = face.map(|i| self.vertices[i as usize]);
            // Cross product length is twice the area, which is the weight.
            let n = (b - a).cross(&(c - a));
            for &i in face {
                acc[i as usize] += n;
            }
        }
        let mut isolated = 0;
        self.vertex_normals = acc
            .into_iter()
            .map(|n| {
                n.try_normalize(1e-300).unwrap_or_else(|| {
                    isolated += 1;
                    Vec3::z()
                })
            })
            .collect();
        if isolated > 0 {
            warn!("{isolated} vertices have no usable incident faces; using +z normals");
        }
        isolated
    }
}

fn uv_key(uv: Vec2) -> (u64, u64) {
    // +0.0 and -0.0 must collide.
    ((uv.x + 0.0).to_bits(), (uv.y + 0.0).to_bits())
}

/// Center of the axis-aligned bounds and the largest distance from it.
pub fn bounding_sphere(points: &[Vec3]) -> BoundingSphere {
    if points.is_empty() {
        return BoundingSphere {
            center: Vec3::zeros(),
            radius: 0.0,
        };
    }
    let mut lo = points[0];
    let mut hi = points[0];
    for p in points {
        lo = lo.inf(p);
        hi = hi.sup(p);
    }
    let center = (lo + hi) * 0.5;
    let radius = points
        .iter()
        .map(|p| (p - center).norm())
        .fold(0.0, f64::max);
    BoundingSphere { center, radius }
}

/// Translates the bounding-sphere center to the origin and scales the
/// radius to [`NORMALIZED_RADIUS`]. UVs and normals are unchanged.
pub fn normalize_mesh(mesh: &TriangleMesh) -> Result<TriangleMesh> {
    if mesh.faces.is_empty() {
        return Err(Error::EmptyMesh);
    }
    let sphere = mesh.bounding_sphere();
    let scale = if sphere.radius > 0.0 {
        NORMALIZED_RADIUS / sphere.radius
    } else {
        1.0
    };
    let mut out = mesh.clone();
    for v in out.vertices.iter_mut() {
        *v = (*v - sphere.center) * scale;
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct NormalReport {
    /// Vertices without incident area that got the default +z normal.
    pub defaulted: usize,
}

/// Returns a copy whose vertex normals are the normalized area-weighted
/// average of the incident face normals.
pub fn compute_vertex_normals(mesh: &TriangleMesh) -> (TriangleMesh, NormalReport) {
    let mut out = mesh.clone();
    let defaulted = out.recompute_normals();
    (out, NormalReport { defaulted })
}

/// Union-find with path halving and union by index (smaller root wins).
#[derive(Debug, Clone)]
pub(crate) struct DisjointSet {
    parent: Vec<usize>,
}

impl DisjointSet {
    pub(crate) fn new(n: usize) -> Self {
        DisjointSet {
            parent: (0..n).collect(),
        }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub(crate) fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn square() -> TriangleMesh {
        let v = vec![
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(1.0, 1.0, 0.0),
            Vec3::new(0.0, 1.0, 0.0),
        ];
        let uv = |x, y| Vec2::new(x, y);
        let faces = vec![[0, 1, 2], [0, 2, 3]];
        let uvs = vec![
            [uv(0.0, 0.0), uv(1.0, 0.0), uv(1.0, 1.0)],
            [uv(0.0, 0.0), uv(1.0, 1.0), uv(0.0, 1.0)],
        ];
        TriangleMesh::new(v, faces, uvs).unwrap().0
    }

    #[test]
    fn flat_square_normals_point_up() {
        let (mesh, report) = compute_vertex_normals(&square());
        assert_eq!(report.defaulted, 0);
        for n in mesh.vertex_normals() {
            assert!((n - Vec3::z()).norm() < 1e-12);
        }
    }

    #[test]
    fn octahedron_normals_are_radial() {
        let mesh = fixtures::octahedron();
        for (v, n) in mesh.vertices().iter().zip(mesh.vertex_normals()) {
            assert!((n - v.normalize()).norm() < 1e-12, "{v:?} {n:?}");
        }
    }

    #[test]
    fn cube_corner_normals_are_diagonal() {
        let mesh = fixtures::shared_corner_cube();
        for (v, n) in mesh.vertices().iter().zip(mesh.vertex_normals()) {
            let expected = v.map(f64::signum).normalize();
            assert!((n - expected).norm() < 1e-12);
        }
    }

    #[test]
    fn isolated_vertex_gets_default_normal() {
        let mut v = square().vertices().to_vec();
        v.push(Vec3::new(5.0, 5.0, 5.0));
        let m = square();
        let (mesh, report) =
            TriangleMesh::new(v, m.faces().to_vec(), m.uv_corners().to_vec()).unwrap();
        assert_eq!(report.isolated_vertices, 1);
        assert_eq!(mesh.vertex_normals()[4], Vec3::z());
    }

    #[test]
    fn degenerate_faces_are_dropped() {
        let m = square();
        let mut faces = m.faces().to_vec();
        let mut uvs = m.uv_corners().to_vec();
        faces.push([0, 1, 1]);
        uvs.push(uvs[0]);
        let (mesh, report) = TriangleMesh::new(m.vertices().to_vec(), faces, uvs).unwrap();
        assert_eq!(report.dropped_degenerate, 1);
        assert_eq!(mesh.face_count(), 2);
    }

    #[test]
    fn out_of_range_uvs_are_clamped() {
        let m = square();
        let mut uvs = m.uv_corners().to_vec();
        uvs[0][1] = Vec2::new(1.5, -0.25);
        let (mesh, report) =
            TriangleMesh::new(m.vertices().to_vec(), m.faces().to_vec(), uvs).unwrap();
        assert_eq!(report.clamped_uvs, 1);
        assert_eq!(mesh.uv_corners()[0][1], Vec2::new(1.0, 0.0));
    }

    #[test]
    fn normalize_fixed_point() {
        let mesh = normalize_mesh(&fixtures::uv_sphere(2.0, Vec3::zeros(), 16, 8)).unwrap();
        let again = normalize_mesh(&mesh).unwrap();
        for (a, b) in mesh.vertices().iter().zip(again.vertices()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn normalize_translates_tiny_triangle() {
        let v = vec![
            Vec3::new(10.0, 0.0, 0.0),
            Vec3::new(10.0 + 1e-3, 0.0, 0.0),
            Vec3::new(10.0, 1e-3, 0.0),
        ];
        let uv = [Vec2::zeros(), Vec2::x(), Vec2::y()];
        let (mesh, _) = TriangleMesh::new(v, vec![[0, 1, 2]], vec![uv]).unwrap();
        let out = normalize_mesh(&mesh).unwrap();
        let s = out.bounding_sphere();
        assert!(s.center.norm() < 1e-9);
        assert!((s.radius - NORMALIZED_RADIUS).abs() < 1e-9);
        let centroid: Vec3 = out.vertices().iter().sum::<Vec3>() / 3.0;
        assert!(centroid.norm() < 0.9);
    }

    #[test]
    fn normalize_offset_sphere() {
        let mesh = fixtures::uv_sphere(2.0, Vec3::new(1.0, 1.0, 1.0), 32, 16);
        let out = normalize_mesh(&mesh).unwrap();
        let max = out.vertices().iter().map(|v| v.norm()).fold(0.0, f64::max);
        assert!((max - 0.9).abs() < 1e-5, "{max}");
        assert_eq!(out.uv_corners(), mesh.uv_corners());
    }

    #[test]
    fn chart_count_of_atlas_cube() {
        let cube = fixtures::atlas_cube();
        assert_eq!(cube.face_count(), 12);
        assert_eq!(cube.chart_count(), 6);
    }

    #[test]
    fn empty_face_list_is_rejected() {
        assert!(matches!(
            TriangleMesh::new(vec![Vec3::zeros()], vec![], vec![]),
            Err(Error::EmptyMesh)
        ));
    }
}
