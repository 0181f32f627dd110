//! Wavefront-style text mesh reader (`v`, `vt`, `vn`, `f`).

use std::path::Path;

use log::warn;

use super::{MeshReport, TriangleMesh, Vec2, Vec3};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LoadOptions {
    /// Keep the file's `vn` normals instead of recomputing them.
    pub trust_normals: bool,
}

pub fn load_mesh(path: impl AsRef<Path>) -> Result<TriangleMesh> {
    load_mesh_with(path, LoadOptions::default()).map(|(mesh, _)| mesh)
}

pub fn load_mesh_with(
    path: impl AsRef<Path>,
    options: LoadOptions,
) -> Result<(TriangleMesh, MeshReport)> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_obj(&text, options)
}

struct Corner {
    position: usize,
    uv: usize,
    normal: Option<usize>,
}

pub fn parse_obj(text: &str, options: LoadOptions) -> Result<(TriangleMesh, MeshReport)> {
    let mut positions = Vec::new();
    let mut uvs = Vec::new();
    let mut normals = Vec::new();
    let mut faces: Vec<[u32; 3]> = Vec::new();
    let mut face_uvs: Vec<[Vec2; 3]> = Vec::new();
    let mut corner_normals: Vec<[Option<usize>; 3]> = Vec::new();
    let mut ignored = 0usize;

    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        let mut tokens = content.split_whitespace();
        let Some(tag) = tokens.next() else { continue };
        let rest: Vec<&str> = tokens.collect();
        match tag {
            "v" => positions.push(Vec3::from(floats::<3>(&rest, line)?)),
            "vn" => normals.push(Vec3::from(floats::<3>(&rest, line)?)),
            "vt" => uvs.push(Vec2::from(floats::<2>(&rest, line)?)),
            "f" => {
                if rest.len() < 3 {
                    return Err(parse_err(line, "face needs at least three corners"));
                }
                if rest.len() > 4 {
                    return Err(parse_err(
                        line,
                        format!("{}-gon faces are not supported", rest.len()),
                    ));
                }
                let corners = rest
                    .iter()
                    .map(|tok| corner(tok, line, positions.len(), uvs.len(), normals.len()))
                    .collect::<Result<Vec<_>>>()?;
                // Fan around corner 0.
                for i in 1..corners.len() - 1 {
                    let tri = [&corners[0], &corners[i], &corners[i + 1]];
                    faces.push(tri.map(|c| c.position as u32));
                    face_uvs.push(tri.map(|c| uvs[c.uv]));
                    corner_normals.push(tri.map(|c| c.normal));
                }
            }
            _ => ignored += 1,
        }
    }
    if ignored > 0 {
        warn!("ignored {ignored} unsupported directives");
    }
    if faces.is_empty() {
        return Err(Error::EmptyMesh);
    }

    // Normals must be gathered before TriangleMesh::new drops faces.
    let trusted = options.trust_normals.then(|| {
        let mut acc = vec![Vec3::zeros(); positions.len()];
        for (face, cn) in faces.iter().zip(&corner_normals) {
            for (&v, n) in face.iter().zip(cn) {
                if let Some(n) = n {
                    acc[v as usize] += normals[*n];
                }
            }
        }
        acc
    });

    let (mesh, report) = TriangleMesh::new(positions, faces, face_uvs)?;
    let mesh = match trusted {
        Some(n) => mesh.with_normals(&n)?,
        None => mesh,
    };
    Ok((mesh, report))
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn floats<const N: usize>(tokens: &[&str], line: usize) -> Result<[f64; N]> {
    if tokens.len() < N {
        return Err(parse_err(line, format!("expected {N} numbers")));
    }
    let mut out = [0.0f64; N];
    for (slot, tok) in out.iter_mut().zip(tokens) {
        *slot = tok
            .parse()
            .map_err(|_| parse_err(line, format!("`{tok}` is not a number")))?;
        if !slot.is_finite() {
            return Err(parse_err(line, format!("`{tok}` is not finite")));
        }
    }
    Ok(out)
}

/// Resolves a 1-based (or negative, relative) OBJ index.
fn resolve(token: &str, len: usize, line: usize, what: &str) -> Result<usize> {
    let idx: i64 = token
        .parse()
        .map_err(|_| parse_err(line, format!("bad {what} index `{token}`")))?;
    let resolved = if idx > 0 {
        idx - 1
    } else if idx < 0 {
        len as i64 + idx
    } else {
        -1
    };
    if resolved < 0 || resolved as usize >= len {
        return Err(parse_err(
            line,
            format!("{what} index {idx} out of range ({len} defined)"),
        ));
    }
    Ok(resolved as usize)
}

fn corner(token: &str, line: usize, nv: usize, nt: usize, nn: usize) -> Result<Corner> {
    let mut parts = token.split('/');
    let position = resolve(parts.next().unwrap_or(""), nv, line, "vertex")?;
    let uv = match parts.next() {
        Some(t) if !t.is_empty() => resolve(t, nt, line, "uv")?,
        _ => return Err(Error::MissingUv { line }),
    };
    let normal = match parts.next() {
        Some(t) if !t.is_empty() => Some(resolve(t, nn, line, "normal")?),
        _ => None,
    };
    Ok(Corner {
        position,
        uv,
        normal,
    })
}

/// Serializes the mesh with one `vt` per face corner and one `vn` per vertex.
pub fn to_obj_string(mesh: &TriangleMesh) -> String {
    use std::fmt::Write;
    let mut out = String::new();
    for v in mesh.vertices() {
        let _ = writeln!(out, "v {} {} {}", v.x, v.y, v.z);
    }
    for n in mesh.vertex_normals() {
        let _ = writeln!(out, "vn {} {} {}", n.x, n.y, n.z);
    }
    for uvs in mesh.uv_corners() {
        for uv in uvs {
            let _ = writeln!(out, "vt {} {}", uv.x, uv.y);
        }
    }
    for (f, face) in mesh.faces().iter().enumerate() {
        let c = |k: usize| format!("{}/{}/{}", face[k] + 1, 3 * f + k + 1, face[k] + 1);
        let _ = writeln!(out, "f {} {} {}", c(0), c(1), c(2));
    }
    out
}

pub fn save_obj(mesh: &TriangleMesh, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, to_obj_string(mesh)).map_err(|e| Error::io(path, e))
}
