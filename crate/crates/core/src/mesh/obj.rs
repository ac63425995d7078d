//! Wavefront OBJ subset: `v x y z` and `f a b c ...` records, 1-based indices.
//! Polygons are fan-triangulated. Other record types are skipped.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use super::{Mesh, MeshError};
use crate::scalar::Scalar;

pub fn parse_obj<T: Scalar>(text: &str) -> Result<Mesh<T>, MeshError> {
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    let err = |line: usize, message: String| MeshError::Obj { line, message };

    for (n, raw) in text.lines().enumerate() {
        let line_no = n + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        let mut tokens = line.split_whitespace();
        match tokens.next() {
            Some("v") => {
                let coords: Vec<&str> = tokens.collect();
                if coords.len() < 3 {
                    return Err(err(line_no, format!("vertex needs 3 coordinates, got {}", coords.len())));
                }
                let mut v = [T::zero(); 3];
                for (k, c) in coords.iter().take(3).enumerate() {
                    let x: f64 = c
                        .parse()
                        .map_err(|_| err(line_no, format!("invalid coordinate `{c}`")))?;
                    if !x.is_finite() {
                        return Err(err(line_no, format!("non-finite coordinate `{c}`")));
                    }
                    v[k] = T::lit(x);
                }
                vertices.push(v);
            }
            Some("f") => {
                let idx = tokens
                    .map(|tok| {
                        let head = tok.split('/').next().unwrap_or("");
                        let i: i64 = head
                            .parse()
                            .map_err(|_| err(line_no, format!("invalid face index `{tok}`")))?;
                        if i <= 0 {
                            return Err(err(line_no, format!("face index {i} must be positive")));
                        }
                        Ok(i as usize - 1)
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                if idx.len() < 3 {
                    return Err(err(line_no, format!("face needs at least 3 indices, got {}", idx.len())));
                }
                for &i in &idx {
                    if i >= vertices.len() {
                        return Err(err(
                            line_no,
                            format!("face index {} exceeds the {} vertices defined so far", i + 1, vertices.len()),
                        ));
                    }
                }
                for k in 1..idx.len() - 1 {
                    let tri = [idx[0], idx[k], idx[k + 1]];
                    if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                        return Err(err(line_no, "face repeats a vertex".into()));
                    }
                    faces.push(tri);
                }
            }
            _ => {}
        }
    }
    Mesh::new(vertices, faces)
}

pub fn load_obj<T: Scalar>(path: impl AsRef<Path>) -> Result<Mesh<T>, MeshError> {
    let text = fs::read_to_string(path)?;
    parse_obj(&text)
}

/// Writes shortest round-trip decimal coordinates.
pub fn write_obj<T: Scalar, W: Write>(mesh: &Mesh<T>, mut out: W) -> io::Result<()> {
    for v in &mesh.vertices {
        writeln!(
            out,
            "v {} {} {}",
            v[0].to_f64_lossy(),
            v[1].to_f64_lossy(),
            v[2].to_f64_lossy()
        )?;
    }
    for f in &mesh.faces {
        writeln!(out, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1)?;
    }
    Ok(())
}

pub fn save_obj<T: Scalar>(mesh: &Mesh<T>, path: impl AsRef<Path>) -> Result<(), MeshError> {
    let mut buf = Vec::new();
    write_obj(mesh, &mut buf)?;
    fs::write(path, buf)?;
    Ok(())
}
