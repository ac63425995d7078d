//! Triangle meshes, the icosphere base model, shape parameterization and OBJ I/O.

mod adjacency;
mod geometry;
mod icosphere;
mod obj;
mod params;

use thiserror::Error;

use crate::autodiff::{NodeRef, Tape};
use crate::scalar::Scalar;

pub use adjacency::{Adjacency, Edge};
pub use geometry::{face_geometry, face_geometry_values, FaceGeometry, FaceGeometryValues};
pub use icosphere::{icosphere, MAX_ICOSPHERE_LEVEL};
pub use obj::{load_obj, parse_obj, save_obj, write_obj};
pub use params::{
    apply_params, apply_params_on_tape, mirror_quarters, ParamMask, ParamNodes, ShapeParams,
    SymmetrySpec, PLANE_TOL, SYMMETRY_MATCH_TOL,
};

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("face {face} references vertex {index}, mesh has {count} vertices")]
    IndexOutOfRange {
        face: usize,
        index: usize,
        count: usize,
    },
    #[error("face {0} references the same vertex twice")]
    RepeatedVertex(usize),
    #[error("vertex {0} has a non-finite coordinate")]
    NonFiniteVertex(usize),
    #[error("icosphere level {0} exceeds the maximum of {max}", max = MAX_ICOSPHERE_LEVEL)]
    LevelTooLarge(u32),
    #[error("line {line}: {message}")]
    Obj { line: usize, message: String },
    #[error("expected {expected} raw offsets, got {found}")]
    ParamLength { expected: usize, found: usize },
    #[error("mesh is not mirror-symmetric: vertex {vertex} has no mirror partner within {distance:e}")]
    NotSymmetric { vertex: usize, distance: f64 },
    #[error("symmetry spec built for {expected} vertices, mesh has {found}")]
    SymmetryMismatch { expected: usize, found: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Triangle mesh: world-space positions plus vertex-index triples.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh<T> {
    pub vertices: Vec<[T; 3]>,
    pub faces: Vec<[usize; 3]>,
}

impl<T: Scalar> Mesh<T> {
    /// Validates indices and coordinates.
    pub fn new(vertices: Vec<[T; 3]>, faces: Vec<[usize; 3]>) -> Result<Self, MeshError> {
        let mesh = Self { vertices, faces };
        mesh.validate()?;
        Ok(mesh)
    }

    pub fn empty() -> Self {
        Self {
            vertices: Vec::new(),
            faces: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<(), MeshError> {
        let n = self.vertices.len();
        for (f, tri) in self.faces.iter().enumerate() {
            for &i in tri {
                if i >= n {
                    return Err(MeshError::IndexOutOfRange {
                        face: f,
                        index: i,
                        count: n,
                    });
                }
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(MeshError::RepeatedVertex(f));
            }
        }
        if let Some(i) = self
            .vertices
            .iter()
            .position(|v| v.iter().any(|c| !c.is_finite()))
        {
            return Err(MeshError::NonFiniteVertex(i));
        }
        Ok(())
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    /// Same mesh with every face's winding reversed.
    pub fn flipped(&self) -> Self {
        Self {
            vertices: self.vertices.clone(),
            faces: self.faces.iter().map(|&[a, b, c]| [a, c, b]).collect(),
        }
    }

    /// Applies `f` to every vertex position.
    pub fn map_vertices(&self, f: impl Fn([T; 3]) -> [T; 3]) -> Self {
        Self {
            vertices: self.vertices.iter().map(|&v| f(v)).collect(),
            faces: self.faces.clone(),
        }
    }

    /// Centre and radius of a sphere enclosing every vertex (centre = bounding-box midpoint).
    pub fn bounding_sphere(&self) -> ([T; 3], T) {
        if self.vertices.is_empty() {
            return ([T::zero(); 3], T::zero());
        }
        let mut lo = self.vertices[0];
        let mut hi = self.vertices[0];
        for v in &self.vertices {
            for k in 0..3 {
                lo[k] = lo[k].min(v[k]);
                hi[k] = hi[k].max(v[k]);
            }
        }
        let half = T::lit(0.5);
        let c = [
            (lo[0] + hi[0]) * half,
            (lo[1] + hi[1]) * half,
            (lo[2] + hi[2]) * half,
        ];
        let r = self
            .vertices
            .iter()
            .map(|v| {
                ((v[0] - c[0]).powi(2) + (v[1] - c[1]).powi(2) + (v[2] - c[2]).powi(2)).sqrt()
            })
            .fold(T::zero(), T::max);
        (c, r)
    }

    /// Records every coordinate on `tape`; tracked when `requires_grad`.
    pub fn to_tape(&self, tape: &mut Tape<T>, requires_grad: bool) -> TapeMesh {
        TapeMesh {
            vertices: self
                .vertices
                .iter()
                .map(|v| v.map(|c| tape.leaf(c, requires_grad).expect("validated mesh")))
                .collect(),
            faces: self.faces.clone(),
        }
    }

    pub fn cast<U: Scalar>(&self) -> Mesh<U> {
        Mesh {
            vertices: self
                .vertices
                .iter()
                .map(|v| v.map(|c| U::lit(c.to_f64_lossy())))
                .collect(),
            faces: self.faces.clone(),
        }
    }
}

/// A mesh whose coordinates live on a [`Tape`].
#[derive(Debug, Clone)]
pub struct TapeMesh {
    pub vertices: Vec<[NodeRef; 3]>,
    pub faces: Vec<[usize; 3]>,
}

impl TapeMesh {
    pub fn values<T: Scalar>(&self, tape: &Tape<T>) -> Mesh<T> {
        Mesh {
            vertices: self.vertices.iter().map(|v| v.map(|c| tape.value(c))).collect(),
            faces: self.faces.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        let v = vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]];
        assert!(Mesh::new(v.clone(), vec![[0, 1, 2]]).is_ok());
        assert!(matches!(
            Mesh::new(v.clone(), vec![[0, 1, 3]]),
            Err(MeshError::IndexOutOfRange { index: 3, .. })
        ));
        assert!(matches!(
            Mesh::new(v.clone(), vec![[0, 1, 1]]),
            Err(MeshError::RepeatedVertex(0))
        ));
        let mut bad = v;
        bad[1][2] = f64::NAN;
        assert!(matches!(
            Mesh::new(bad, vec![[0, 1, 2]]),
            Err(MeshError::NonFiniteVertex(1))
        ));
    }

    #[test]
    fn bounding_sphere_of_icosphere() {
        let m: Mesh<f64> = icosphere(1).unwrap();
        let (c, r) = m.bounding_sphere();
        assert!(c.iter().all(|x| x.abs() < 1e-12));
        assert!((r - 1.0).abs() < 1e-12);
    }
}
