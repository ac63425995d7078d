use std::collections::HashMap;

use super::{Mesh, MeshError};
use crate::scalar::Scalar;

/// Highest subdivision level accepted (10·4⁶ + 2 = 40962 vertices).
pub const MAX_ICOSPHERE_LEVEL: u32 = 6;

/// Unit-radius icosphere: an icosahedron subdivided `level` times with every
/// new vertex pushed onto the sphere. Faces wind counter-clockwise seen from outside.
pub fn icosphere<T: Scalar>(level: u32) -> Result<Mesh<T>, MeshError> {
    if level > MAX_ICOSPHERE_LEVEL {
        return Err(MeshError::LevelTooLarge(level));
    }
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let mut verts: Vec<[f64; 3]> = [
        [-1.0, t, 0.0],
        [1.0, t, 0.0],
        [-1.0, -t, 0.0],
        [1.0, -t, 0.0],
        [0.0, -1.0, t],
        [0.0, 1.0, t],
        [0.0, -1.0, -t],
        [0.0, 1.0, -t],
        [t, 0.0, -1.0],
        [t, 0.0, 1.0],
        [-t, 0.0, -1.0],
        [-t, 0.0, 1.0],
    ]
    .iter()
    .map(|&v| normalize(v))
    .collect();
    let mut faces: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];

    for _ in 0..level {
        let mut midpoints: HashMap<(usize, usize), usize> = HashMap::new();
        let mut next = Vec::with_capacity(faces.len() * 4);
        let mut midpoint = |a: usize, b: usize, verts: &mut Vec<[f64; 3]>| -> usize {
            let key = (a.min(b), a.max(b));
            *midpoints.entry(key).or_insert_with(|| {
                let (p, q) = (verts[a], verts[b]);
                verts.push(normalize([
                    (p[0] + q[0]) * 0.5,
                    (p[1] + q[1]) * 0.5,
                    (p[2] + q[2]) * 0.5,
                ]));
                verts.len() - 1
            })
        };
        for &[a, b, c] in &faces {
            let ab = midpoint(a, b, &mut verts);
            let bc = midpoint(b, c, &mut verts);
            let ca = midpoint(c, a, &mut verts);
            next.push([a, ab, ca]);
            next.push([b, bc, ab]);
            next.push([c, ca, bc]);
            next.push([ab, bc, ca]);
        }
        faces = next;
    }

    Ok(Mesh {
        vertices: verts
            .into_iter()
            .map(|v| v.map(|c| T::lit(c)))
            .collect(),
        faces,
    })
}

fn normalize(v: [f64; 3]) -> [f64; 3] {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    [v[0] / n, v[1] / n, v[2] / n]
}

#[cfg(test)]
mod tests {
    use std::collections::HashSet;

    use super::*;

    fn euler(m: &Mesh<f64>) -> i64 {
        let mut edges = HashSet::new();
        for f in &m.faces {
            for k in 0..3 {
                let (a, b) = (f[k], f[(k + 1) % 3]);
                edges.insert((a.min(b), a.max(b)));
            }
        }
        m.vertices.len() as i64 - edges.len() as i64 + m.faces.len() as i64
    }

    #[test]
    fn counts_per_level() {
        for (level, v, f) in [(0, 12, 20), (1, 42, 80), (2, 162, 320), (3, 642, 1280)] {
            let m: Mesh<f64> = icosphere(level).unwrap();
            assert_eq!((m.vertex_count(), m.face_count()), (v, f), "level {level}");
            assert_eq!(m.vertex_count(), 10 * 4usize.pow(level) + 2);
            assert_eq!(euler(&m), 2);
            m.validate().unwrap();
        }
    }

    #[test]
    fn vertices_on_unit_sphere() {
        let m: Mesh<f64> = icosphere(3).unwrap();
        for v in &m.vertices {
            let r = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            assert!((r - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn outward_counter_clockwise_winding() {
        let m: Mesh<f64> = icosphere(2).unwrap();
        for f in &m.faces {
            let [a, b, c] = f.map(|i| m.vertices[i]);
            let u = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
            let w = [c[0] - a[0], c[1] - a[1], c[2] - a[2]];
            let n = [
                u[1] * w[2] - u[2] * w[1],
                u[2] * w[0] - u[0] * w[2],
                u[0] * w[1] - u[1] * w[0],
            ];
            let centroid = [a[0] + b[0] + c[0], a[1] + b[1] + c[1], a[2] + b[2] + c[2]];
            assert!(n[0] * centroid[0] + n[1] * centroid[1] + n[2] * centroid[2] > 0.0);
        }
    }

    #[test]
    fn level_guard() {
        assert!(matches!(icosphere::<f64>(7), Err(MeshError::LevelTooLarge(7))));
    }
}
