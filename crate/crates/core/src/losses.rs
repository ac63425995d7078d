//! Image L1 loss and mesh regularizers, all recorded on a tape.
//!
//! Every term is a mean, so weights do not depend on image resolution or mesh size.

use thiserror::Error;

use crate::autodiff::{NodeRef, Tape};
use crate::mesh::{face_geometry, Adjacency, Mesh, TapeMesh};
use crate::renderer::{Image, TapeImage};
use crate::scalar::Scalar;
use crate::SMOOTH_EPS;

#[derive(Debug, Error, PartialEq)]
pub enum LossError {
    #[error("image size mismatch: {0}x{1} vs {2}x{3}")]
    SizeMismatch(usize, usize, usize, usize),
    #[error("{rendered} rendered views but {targets} targets")]
    ViewCount { rendered: usize, targets: usize },
    #[error("vertex {0} has no neighbours")]
    IsolatedVertex(usize),
    #[error("loss weight `{0}` must be finite and non-negative")]
    Weight(&'static str),
}

/// Per-term weights of [`total_loss`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossWeights<T> {
    pub image: T,
    pub normal: T,
    pub edge: T,
    pub laplacian: T,
}

impl<T: Scalar> Default for LossWeights<T> {
    fn default() -> Self {
        Self {
            image: T::one(),
            normal: T::lit(0.03),
            edge: T::lit(0.01),
            laplacian: T::lit(0.003),
        }
    }
}

impl<T: Scalar> LossWeights<T> {
    pub fn validate(&self) -> Result<(), LossError> {
        for (name, w) in [
            ("image", self.image),
            ("normal", self.normal),
            ("edge", self.edge),
            ("laplacian", self.laplacian),
        ] {
            if !w.is_finite() || w < T::zero() {
                return Err(LossError::Weight(name));
            }
        }
        Ok(())
    }
}

/// The loss terms and their weighted total. `N` is a [`NodeRef`] while the
/// report lives on a tape and a scalar once read back with [`LossReport::values`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossReport<N = NodeRef> {
    pub image_l1: N,
    pub reg_normal: N,
    pub reg_edge: N,
    pub reg_laplacian: N,
    pub total: N,
}

impl LossReport<NodeRef> {
    pub fn values<T: Scalar>(&self, tape: &Tape<T>) -> LossReport<T> {
        LossReport {
            image_l1: tape.value(self.image_l1),
            reg_normal: tape.value(self.reg_normal),
            reg_edge: tape.value(self.reg_edge),
            reg_laplacian: tape.value(self.reg_laplacian),
            total: tape.value(self.total),
        }
    }
}

fn check_size(w0: usize, h0: usize, w1: usize, h1: usize) -> Result<(), LossError> {
    if (w0, h0) != (w1, h1) {
        return Err(LossError::SizeMismatch(w0, h0, w1, h1));
    }
    Ok(())
}

/// Mean absolute pixel difference between a rendered image and a fixed target.
/// The slope at an exact tie is 0.
pub fn image_l1<T: Scalar>(tape: &mut Tape<T>, rendered: &TapeImage, target: &Image<T>) -> Result<NodeRef, LossError> {
    check_size(rendered.width, rendered.height, target.width, target.height)?;
    let n = rendered.pixels.len();
    if n == 0 {
        return Ok(tape.constant(T::zero()));
    }
    let inv = T::one() / T::lit(n as f64);
    let mut sum = T::zero();
    let parents: Vec<(NodeRef, T)> = rendered
        .pixels
        .iter()
        .zip(&target.data)
        .map(|(&p, &t)| {
            let d = tape.value(p) - t;
            sum = sum + d.abs();
            let sign = if d > T::zero() {
                T::one()
            } else if d < T::zero() {
                -T::one()
            } else {
                T::zero()
            };
            (p, sign * inv)
        })
        .collect();
    Ok(tape.composite(sum * inv, &parents))
}

/// [`image_l1`] on plain images.
pub fn image_l1_values<T: Scalar>(a: &Image<T>, b: &Image<T>) -> Result<T, LossError> {
    check_size(a.width, a.height, b.width, b.height)?;
    Ok(a.mean_abs_diff(b))
}

/// Mean over interior edges of `‖n₁ − n₂‖²` for the two faces sharing the edge.
/// Equals `2 − 2cos θ` for unit normals at dihedral deviation `θ`.
pub fn reg_normal_angle<T: Scalar>(tape: &mut Tape<T>, mesh: &TapeMesh, adjacency: &Adjacency) -> NodeRef {
    let geo = face_geometry(tape, mesh);
    let terms: Vec<NodeRef> = adjacency
        .interior_edges()
        .map(|e| {
            let d = tape.sub3(geo[e.faces[0]].normal, geo[e.faces[1]].normal);
            tape.dot3(d, d)
        })
        .collect();
    if terms.is_empty() {
        return tape.constant(T::zero());
    }
    tape.mean(&terms)
}

/// Mean over edges of the smooth `|len − mean len|`.
pub fn reg_edge_length<T: Scalar>(tape: &mut Tape<T>, mesh: &TapeMesh, adjacency: &Adjacency) -> NodeRef {
    if adjacency.edges.is_empty() {
        return tape.constant(T::zero());
    }
    let eps = T::lit(SMOOTH_EPS);
    let lengths: Vec<NodeRef> = adjacency
        .edges
        .iter()
        .map(|e| {
            let [a, b] = e.vertices.map(|i| mesh.vertices[i]);
            let d = tape.sub3(b, a);
            tape.norm3_smooth(d, eps)
        })
        .collect();
    let mean = tape.mean(&lengths);
    let dev: Vec<NodeRef> = lengths
        .iter()
        .map(|&l| {
            let d = tape.sub(l, mean);
            tape.smooth_abs(d, eps)
        })
        .collect();
    tape.mean(&dev)
}

/// Mean over vertices of the smooth Euclidean norm of `v − mean(neighbours)`.
pub fn reg_laplacian<T: Scalar>(tape: &mut Tape<T>, mesh: &TapeMesh, adjacency: &Adjacency) -> Result<NodeRef, LossError> {
    if mesh.vertices.is_empty() {
        return Ok(tape.constant(T::zero()));
    }
    let eps = T::lit(SMOOTH_EPS);
    let mut terms = Vec::with_capacity(mesh.vertices.len());
    for (i, nbrs) in adjacency.neighbors.iter().enumerate() {
        if nbrs.is_empty() {
            return Err(LossError::IsolatedVertex(i));
        }
        let around: Vec<_> = nbrs.iter().map(|&j| mesh.vertices[j]).collect();
        let centre = tape.mean3(&around);
        let d = tape.sub3(mesh.vertices[i], centre);
        terms.push(tape.norm3_smooth(d, eps));
    }
    Ok(tape.mean(&terms))
}

/// Per-vertex `‖v − mean(neighbours)‖`. Large outliers flag vertices that
/// have drifted away from the surface.
pub fn laplacian_magnitudes<T: Scalar>(mesh: &Mesh<T>, adjacency: &Adjacency) -> Result<Vec<T>, LossError> {
    let eps = T::lit(SMOOTH_EPS);
    adjacency
        .neighbors
        .iter()
        .enumerate()
        .map(|(i, nbrs)| {
            if nbrs.is_empty() {
                return Err(LossError::IsolatedVertex(i));
            }
            let k = T::lit(nbrs.len() as f64);
            let v = mesh.vertices[i];
            let d: [T; 3] = [0, 1, 2].map(|c| {
                let m = nbrs.iter().fold(T::zero(), |a, &j| a + mesh.vertices[j][c]) / k;
                v[c] - m
            });
            Ok((d[0] * d[0] + d[1] * d[1] + d[2] * d[2] + eps * eps).sqrt())
        })
        .collect()
}

/// Weighted sum of the mean view L1 and the three regularizers.
pub fn total_loss<T: Scalar>(
    tape: &mut Tape<T>,
    rendered: &[TapeImage],
    targets: &[&Image<T>],
    mesh: &TapeMesh,
    adjacency: &Adjacency,
    weights: &LossWeights<T>,
) -> Result<LossReport, LossError> {
    weights.validate()?;
    if rendered.len() != targets.len() {
        return Err(LossError::ViewCount {
            rendered: rendered.len(),
            targets: targets.len(),
        });
    }
    let per_view = rendered
        .iter()
        .zip(targets)
        .map(|(r, t)| image_l1(tape, r, t))
        .collect::<Result<Vec<_>, _>>()?;
    let image_l1 = if per_view.is_empty() {
        tape.constant(T::zero())
    } else {
        tape.mean(&per_view)
    };
    let reg_normal = reg_normal_angle(tape, mesh, adjacency);
    let reg_edge = reg_edge_length(tape, mesh, adjacency);
    let reg_laplacian = reg_laplacian(tape, mesh, adjacency)?;
    let total = tape.linear_combination(&[
        (image_l1, weights.image),
        (reg_normal, weights.normal),
        (reg_edge, weights.edge),
        (reg_laplacian, weights.laplacian),
    ]);
    Ok(LossReport {
        image_l1,
        reg_normal,
        reg_edge,
        reg_laplacian,
        total,
    })
}
