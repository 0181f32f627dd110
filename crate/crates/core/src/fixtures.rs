//! Procedural meshes with packed UV atlases, used by the test suites, the
//! benchmarks and the `synth-views` tooling.
//!
//! Every fixture is a set of parametric patches; each patch becomes one UV
//! chart placed in its own square cell of a grid with a gutter margin.

use std::collections::HashMap;
use std::f64::consts::{FRAC_PI_2, PI, TAU};

use crate::mesh::{TriangleMesh, Vec2, Vec3};

/// Parametric surface patch over `[0,1]^2`, returning the point and the
/// direction its normal must face.
pub type PatchFn<'a> = Box<dyn Fn(f64, f64) -> (Vec3, Vec3) + 'a>;

pub struct Patch<'a> {
    pub segments: (usize, usize),
    pub surface: PatchFn<'a>,
}

impl<'a> Patch<'a> {
    pub fn new(nu: usize, nv: usize, f: impl Fn(f64, f64) -> (Vec3, Vec3) + 'a) -> Self {
        Patch {
            segments: (nu.max(1), nv.max(1)),
            surface: Box::new(f),
        }
    }
}

/// Cell-relative gutter on each side of a chart. A power of two, so chart
/// edges fall on texel boundaries at power-of-two resolutions.
pub const CELL_MARGIN: f64 = 0.0625;

/// Tessellates the patches, one chart per patch. With `weld`, coincident
/// positions (to 1e-9) share a vertex so normals are smooth across charts.
pub fn build(patches: &[Patch<'_>], weld: bool) -> TriangleMesh {
    let count = patches.len();
    let cols = (count as f64).sqrt().ceil() as usize;
    // Square cells keep texels isotropic in 3D for isotropic patches.
    let rows = cols;
    let mut vertices: Vec<Vec3> = Vec::new();
    let mut lookup: HashMap<[i64; 3], u32> = HashMap::new();
    let mut faces = Vec::new();
    let mut uvs = Vec::new();

    for (k, patch) in patches.iter().enumerate() {
        let (cx, cy) = (k % cols, k / cols);
        let (cw, ch) = (1.0 / cols as f64, 1.0 / rows as f64);
        let u0 = cx as f64 * cw + CELL_MARGIN * cw;
        let v1 = 1.0 - cy as f64 * ch - CELL_MARGIN * ch;
        let (uw, vh) = (cw * (1.0 - 2.0 * CELL_MARGIN), ch * (1.0 - 2.0 * CELL_MARGIN));
        let (nu, nv) = patch.segments;

        let mut index = vec![0u32; (nu + 1) * (nv + 1)];
        let mut uv_grid = vec![Vec2::zeros(); (nu + 1) * (nv + 1)];
        for j in 0..=nv {
            for i in 0..=nu {
                let (s, t) = (i as f64 / nu as f64, j as f64 / nv as f64);
                let (p, _) = (patch.surface)(s, t);
                let id = if weld {
                    let key = [p.x, p.y, p.z].map(|c| (c * 1e9).round() as i64);
                    *lookup.entry(key).or_insert_with(|| {
                        vertices.push(p);
                        vertices.len() as u32 - 1
                    })
                } else {
                    vertices.push(p);
                    vertices.len() as u32 - 1
                };
                index[j * (nu + 1) + i] = id;
                uv_grid[j * (nu + 1) + i] = Vec2::new(u0 + s * uw, v1 - vh + t * vh);
            }
        }
        for j in 0..nv {
            for i in 0..nu {
                let at = |di: usize, dj: usize| (j + dj) * (nu + 1) + i + di;
                let (sc, tc) = ((i as f64 + 0.5) / nu as f64, (j as f64 + 0.5) / nv as f64);
                let (_, want) = (patch.surface)(sc, tc);
                for tri in [[at(0, 0), at(1, 0), at(1, 1)], [at(0, 0), at(1, 1), at(0, 1)]] {
                    let ids = tri.map(|g| index[g]);
                    if ids[0] == ids[1] || ids[1] == ids[2] || ids[0] == ids[2] {
                        continue;
                    }
                    let [a, b, c] = ids.map(|i| vertices[i as usize]);
                    let n = (b - a).cross(&(c - a));
                    let (ids, tri) = if n.dot(&want) < 0.0 {
                        ([ids[0], ids[2], ids[1]], [tri[0], tri[2], tri[1]])
                    } else {
                        (ids, tri)
                    };
                    faces.push(ids);
                    uvs.push(tri.map(|g| uv_grid[g]));
                }
            }
        }
    }
    TriangleMesh::new(vertices, faces, uvs)
        .expect("fixture meshes are valid")
        .0
}

fn cube_face(axis: usize, sign: f64) -> impl Fn(f64, f64) -> Vec3 {
    move |s, t| {
        let (a, b) = (2.0 * s - 1.0, 2.0 * t - 1.0);
        let mut p = [0.0; 3];
        p[axis] = sign;
        p[(axis + 1) % 3] = a;
        p[(axis + 2) % 3] = b;
        Vec3::from(p)
    }
}

fn cube_faces() -> Vec<(usize, f64)> {
    vec![(0, 1.0), (0, -1.0), (1, 1.0), (1, -1.0), (2, 1.0), (2, -1.0)]
}

/// Cube projected onto a sphere of radius 0.9, six charts of `n x n`
/// quads each (`12 n^2` faces), welded.
pub fn cube_sphere(n: usize) -> TriangleMesh {
    let patches: Vec<Patch> = cube_faces()
        .into_iter()
        .map(|(axis, sign)| {
            let f = cube_face(axis, sign);
            Patch::new(n, n, move |s, t| {
                // Equal-angle parameterization keeps quads closer to square.
                let q = f(
                    0.5 + (FRAC_PI_2 * (s - 0.5)).tan() * 0.5,
                    0.5 + (FRAC_PI_2 * (t - 0.5)).tan() * 0.5,
                );
                let p = q.normalize() * 0.9;
                (p, p)
            })
        })
        .collect();
    build(&patches, true)
}

/// Axis-aligned cube of side 1 centered at the origin: 12 faces, 6 charts.
pub fn atlas_cube() -> TriangleMesh {
    let patches: Vec<Patch> = cube_faces()
        .into_iter()
        .map(|(axis, sign)| {
            let f = cube_face(axis, sign);
            let mut n = [0.0; 3];
            n[axis] = sign;
            let n = Vec3::from(n);
            Patch::new(1, 1, move |s, t| (f(s, t) * 0.5, n))
        })
        .collect();
    build(&patches, true)
}

/// Cube whose face diagonals all pass through the four corners of one
/// inscribed tetrahedron, so each corner gets equal area from its three faces.
pub fn shared_corner_cube() -> TriangleMesh {
    let vertices: Vec<Vec3> = (0..8)
        .map(|i| {
            Vec3::new(
                if i & 1 == 0 { -1.0 } else { 1.0 },
                if i & 2 == 0 { -1.0 } else { 1.0 },
                if i & 4 == 0 { -1.0 } else { 1.0 },
            )
        })
        .collect();
    let tetra = |i: usize| (vertices[i].x * vertices[i].y * vertices[i].z) > 0.0;
    let mut faces = Vec::new();
    let mut uvs = Vec::new();
    for (cell, (axis, sign)) in cube_faces().into_iter().enumerate() {
        // Corners of this face in cyclic order.
        let on: Vec<usize> = (0..8).filter(|&i| vertices[i][axis] == sign).collect();
        let (a1, a2) = ((axis + 1) % 3, (axis + 2) % 3);
        let mut ring = on.clone();
        ring.sort_by(|&i, &j| {
            let ang = |k: usize| vertices[k][a2].atan2(vertices[k][a1]);
            ang(i).total_cmp(&ang(j))
        });
        let start = ring.iter().position(|&i| tetra(i)).unwrap();
        ring.rotate_left(start);
        let base = Vec2::new((cell % 3) as f64 / 3.0 + 0.02, (cell / 3) as f64 / 2.0 + 0.02);
        let corner_uv = [
            Vec2::new(0.0, 0.0),
            Vec2::new(0.3, 0.0),
            Vec2::new(0.3, 0.45),
            Vec2::new(0.0, 0.45),
        ];
        let mut normal = Vec3::zeros();
        normal[axis] = sign;
        for tri in [[0, 1, 2], [0, 2, 3]] {
            let mut ids = tri.map(|k| ring[k] as u32);
            let mut uv = tri.map(|k| base + corner_uv[k]);
            let [a, b, c] = ids.map(|i| vertices[i as usize]);
            if (b - a).cross(&(c - a)).dot(&normal) < 0.0 {
                ids.swap(1, 2);
                uv.swap(1, 2);
            }
            faces.push(ids);
            uvs.push(uv);
        }
    }
    TriangleMesh::new(vertices, faces, uvs).unwrap().0
}

/// Regular octahedron with unit vertices; every face is its own chart.
pub fn octahedron() -> TriangleMesh {
    let vertices = vec![
        Vec3::x(),
        -Vec3::x(),
        Vec3::y(),
        -Vec3::y(),
        Vec3::z(),
        -Vec3::z(),
    ];
    let mut faces = Vec::new();
    let mut uvs = Vec::new();
    for (k, (x, y, z)) in [0u32, 1]
        .iter()
        .flat_map(|&x| [2u32, 3].map(move |y| (x, y)))
        .flat_map(|(x, y)| [4u32, 5].map(move |z| (x, y, z)))
        .enumerate()
    {
        let mut ids = [x, y, z];
        let [a, b, c] = ids.map(|i| vertices[i as usize]);
        if (b - a).cross(&(c - a)).dot(&(a + b + c)) < 0.0 {
            ids.swap(1, 2);
        }
        let base = Vec2::new((k % 4) as f64 * 0.25 + 0.02, (k / 4) as f64 * 0.5 + 0.02);
        faces.push(ids);
        uvs.push([
            base,
            base + Vec2::new(0.2, 0.0),
            base + Vec2::new(0.0, 0.4),
        ]);
    }
    TriangleMesh::new(vertices, faces, uvs).unwrap().0
}

/// Latitude-longitude sphere with a single chart spanning the UV square.
pub fn uv_sphere(radius: f64, center: Vec3, segments: usize, rings: usize) -> TriangleMesh {
    let mut vertices = Vec::new();
    let mut grid = Vec::new();
    for j in 0..=rings {
        let lat = PI * j as f64 / rings as f64 - FRAC_PI_2;
        for i in 0..=segments {
            let lon = TAU * i as f64 / segments as f64;
            let (sl, cl) = lat.sin_cos();
            let dir = Vec3::new(cl * lon.cos(), sl, -cl * lon.sin());
            vertices.push(center + dir * radius);
            grid.push(Vec2::new(
                i as f64 / segments as f64,
                j as f64 / rings as f64,
            ));
        }
    }
    let at = |i: usize, j: usize| j * (segments + 1) + i;
    let mut faces = Vec::new();
    let mut uvs = Vec::new();
    for j in 0..rings {
        for i in 0..segments {
            let quad = [at(i, j), at(i + 1, j), at(i + 1, j + 1), at(i, j + 1)];
            let tris: &[[usize; 3]] = if j == 0 {
                &[[0, 2, 3]]
            } else if j == rings - 1 {
                &[[0, 1, 2]]
            } else {
                &[[0, 1, 2], [0, 2, 3]]
            };
            for t in tris {
                let ids = t.map(|k| quad[k]);
                faces.push(ids.map(|g| g as u32));
                uvs.push(ids.map(|g| grid[g]));
            }
        }
    }
    TriangleMesh::new(vertices, faces, uvs).unwrap().0
}

/// Two unit squares meeting at a right angle along the y axis: plane A at
/// z = 0 facing +z (x in [0,1]) and plane B at x = 0 facing +x (z in [0,1]).
/// Not welded; A is chart 0 and B is chart 1.
pub fn two_planes(n: usize) -> TriangleMesh {
    build(
        &[
            Patch::new(n, n, |s, t| (Vec3::new(s, t, 0.0), Vec3::z())),
            Patch::new(n, n, |s, t| (Vec3::new(0.0, t, s), Vec3::x())),
        ],
        false,
    )
}

/// Two coplanar rectangles in z = 0 that abut along x = 0, each its own
/// chart: left x in [-1, 0], right x in [0, 1], y in [-0.5, 0.5]. Not welded.
pub fn abutting_charts(n: usize) -> TriangleMesh {
    build(
        &[
            Patch::new(n, n, |s, t| (Vec3::new(s - 1.0, t - 0.5, 0.0), Vec3::z())),
            Patch::new(n, n, |s, t| (Vec3::new(s, t - 0.5, 0.0), Vec3::z())),
        ],
        false,
    )
}

/// Two parallel squares facing +z: a small front one at z = 0.3 and a
/// larger back one at z = -0.3.
pub fn stacked_quads(n: usize) -> TriangleMesh {
    build(
        &[
            Patch::new(n, n, |s, t| {
                (Vec3::new(0.6 * s - 0.3, 0.6 * t - 0.3, 0.3), Vec3::z())
            }),
            Patch::new(n, n, |s, t| {
                (Vec3::new(1.2 * s - 0.6, 1.2 * t - 0.6, -0.3), Vec3::z())
            }),
        ],
        false,
    )
}

fn disk(s: f64, t: f64) -> (f64, f64) {
    let (x, y) = (2.0 * s - 1.0, 2.0 * t - 1.0);
    (
        x * (1.0 - y * y / 2.0).sqrt(),
        y * (1.0 - x * x / 2.0).sqrt(),
    )
}

/// Thick-walled cup open at +y with a deep cavity; `n` controls tessellation.
pub fn cup(n: usize) -> TriangleMesh {
    let (outer, inner) = (0.5, 0.42);
    let (bottom, floor, top) = (-0.8, -0.6, 0.8);
    let wall = |r: f64, y0: f64, a0: f64, sign: f64| {
        move |s: f64, t: f64| {
            let a = a0 + PI * s;
            let d = Vec3::new(a.cos(), 0.0, a.sin());
            (d * r + Vec3::new(0.0, y0 + (top - y0) * t, 0.0), d * sign)
        }
    };
    let cap = |r: f64, y: f64, up: f64| {
        move |s: f64, t: f64| {
            let (x, z) = disk(s, t);
            (Vec3::new(x * r, y, z * r), Vec3::new(0.0, up, 0.0))
        }
    };
    let m = 2 * n;
    build(
        &[
            Patch::new(m, m, wall(outer, bottom, 0.0, 1.0)),
            Patch::new(m, m, wall(outer, bottom, PI, 1.0)),
            Patch::new(m, m, wall(inner, floor, 0.0, -1.0)),
            Patch::new(m, m, wall(inner, floor, PI, -1.0)),
            Patch::new(n, n, cap(outer, bottom, -1.0)),
            Patch::new(n, n, cap(inner, floor, 1.0)),
            Patch::new(m, 2, move |s, t| {
                let a = TAU * s;
                let r = inner + (outer - inner) * t;
                (Vec3::new(a.cos() * r, top, a.sin() * r), Vec3::y())
            }),
        ],
        true,
    )
}

/// Cylinder split into 18 side strips plus two caps: a 20-chart atlas.
pub fn fragmented_cylinder(n: usize) -> TriangleMesh {
    let (r, h) = (0.6, 0.6);
    let mut patches: Vec<Patch> = (0..18)
        .map(|k| {
            Patch::new(n.div_ceil(3).max(1), n, move |s, t| {
                let a = TAU * (k as f64 + s) / 18.0;
                let d = Vec3::new(a.cos(), 0.0, a.sin());
                (d * r + Vec3::new(0.0, -h + 2.0 * h * t, 0.0), d)
            })
        })
        .collect();
    for (y, up) in [(h, 1.0), (-h, -1.0)] {
        patches.push(Patch::new(n, n, move |s, t| {
            let (x, z) = disk(s, t);
            (Vec3::new(x * r, y, z * r), Vec3::new(0.0, up, 0.0))
        }));
    }
    build(&patches, true)
}

pub fn translated(mesh: &TriangleMesh, offset: Vec3) -> TriangleMesh {
    let v = mesh.vertices().iter().map(|p| p + offset).collect();
    TriangleMesh::new(v, mesh.faces().to_vec(), mesh.uv_corners().to_vec())
        .unwrap()
        .0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chart_counts() {
        assert_eq!(cube_sphere(4).chart_count(), 6);
        assert_eq!(atlas_cube().chart_count(), 6);
        assert_eq!(octahedron().chart_count(), 8);
        assert_eq!(two_planes(4).chart_count(), 2);
        assert_eq!(cup(4).chart_count(), 7);
        assert_eq!(fragmented_cylinder(6).chart_count(), 20);
        assert_eq!(uv_sphere(1.0, Vec3::zeros(), 8, 4).chart_count(), 1);
    }

    #[test]
    fn cube_sphere_face_count_and_radius() {
        let m = cube_sphere(21);
        assert_eq!(m.face_count(), 12 * 21 * 21);
        for v in m.vertices() {
            assert!((v.norm() - 0.9).abs() < 1e-12);
        }
        // Welded: Euler characteristic of a sphere.
        let e = m.face_count() * 3 / 2;
        assert_eq!(m.vertex_count() as i64 - e as i64 + m.face_count() as i64, 2);
    }

    #[test]
    fn cube_sphere_normals_point_outward() {
        let m = cube_sphere(5);
        for f in 0..m.face_count() {
            let [a, b, c] = m.triangle(f);
            assert!(m.face_normal(f).dot(&(a + b + c)) > 0.0);
        }
    }

    #[test]
    fn cup_cavity_faces_inward() {
        let m = cup(4);
        let mut inward = 0;
        for f in 0..m.face_count() {
            let [a, b, c] = m.triangle(f);
            let centroid = (a + b + c) / 3.0;
            let radial = Vec3::new(centroid.x, 0.0, centroid.z);
            let r = radial.norm();
            if (r - 0.42).abs() < 0.02 && centroid.y > -0.55 && centroid.y < 0.75 {
                assert!(m.face_normal(f).dot(&radial) < 0.0);
                inward += 1;
            }
        }
        assert!(inward > 0);
    }

    #[test]
    fn uvs_stay_in_cells() {
        let m = fragmented_cylinder(6);
        let labels = m.uv_chart_labels();
        // Charts never share a UV point.
        let mut owner: HashMap<(u64, u64), u32> = HashMap::new();
        for (f, uvs) in m.uv_corners().iter().enumerate() {
            for uv in uvs {
                let key = (uv.x.to_bits(), uv.y.to_bits());
                let o = *owner.entry(key).or_insert(labels[f]);
                assert_eq!(o, labels[f]);
            }
        }
    }
}
