use super::{Mesh, TapeMesh};
use crate::autodiff::{NodeRef, Tape, Vec3Ref};
use crate::scalar::Scalar;
use crate::SMOOTH_EPS;

/// Per-face quantities recorded on a tape.
#[derive(Debug, Clone, Copy)]
pub struct FaceGeometry {
    /// `cross(v₂−v₁, v₃−v₁) / sqrt(|cross|² + ε²)`.
    pub normal: Vec3Ref,
    pub centroid: Vec3Ref,
    /// Smooth lengths of edges `v₁v₂`, `v₂v₃`, `v₃v₁`.
    pub edge_lengths: [NodeRef; 3],
}

/// Plain-value counterpart of [`FaceGeometry`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FaceGeometryValues<T> {
    pub normal: [T; 3],
    pub centroid: [T; 3],
    pub edge_lengths: [T; 3],
}

/// Normal, centroid and edge lengths for every face, differentiable in the vertices.
pub fn face_geometry<T: Scalar>(tape: &mut Tape<T>, mesh: &TapeMesh) -> Vec<FaceGeometry> {
    let eps = T::lit(SMOOTH_EPS);
    mesh.faces
        .iter()
        .map(|f| {
            let [a, b, c] = f.map(|i| mesh.vertices[i]);
            let ab = tape.sub3(b, a);
            let bc = tape.sub3(c, b);
            let ca = tape.sub3(a, c);
            let ac = tape.sub3(c, a);
            let cross = tape.cross3(ab, ac);
            let normal = tape.normalize3_smooth(cross, eps);
            let centroid = tape.mean3(&[a, b, c]);
            let edge_lengths = [
                tape.norm3_smooth(ab, eps),
                tape.norm3_smooth(bc, eps),
                tape.norm3_smooth(ca, eps),
            ];
            FaceGeometry {
                normal,
                centroid,
                edge_lengths,
            }
        })
        .collect()
}

pub fn face_geometry_values<T: Scalar>(mesh: &Mesh<T>) -> Vec<FaceGeometryValues<T>> {
    let eps = T::lit(SMOOTH_EPS);
    let third = T::one() / T::lit(3.0);
    let sub = |p: [T; 3], q: [T; 3]| [p[0] - q[0], p[1] - q[1], p[2] - q[2]];
    let norm = |v: [T; 3]| (v[0] * v[0] + v[1] * v[1] + v[2] * v[2] + eps * eps).sqrt();
    mesh.faces
        .iter()
        .map(|f| {
            let [a, b, c] = f.map(|i| mesh.vertices[i]);
            let (u, w) = (sub(b, a), sub(c, a));
            let cross = [
                u[1] * w[2] - u[2] * w[1],
                u[2] * w[0] - u[0] * w[2],
                u[0] * w[1] - u[1] * w[0],
            ];
            let n = norm(cross);
            FaceGeometryValues {
                normal: cross.map(|x| x / n),
                centroid: [0, 1, 2].map(|k| (a[k] + b[k] + c[k]) * third),
                edge_lengths: [norm(sub(b, a)), norm(sub(c, b)), norm(sub(a, c))],
            }
        })
        .collect()
}
