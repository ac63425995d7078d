//! Sigmoid-bounded vertex offsets on a fixed-topology base mesh, optional
//! four-quarter mirror symmetry, and a global translation and log-scale.
//!
//! Decoded vertex `i`: `exp(log_scale)·(base_i + offset_i) + translation`, where
//! `offset = max_offset·(2σ(raw) − 1)` lies strictly inside `(−max_offset, max_offset)`.

use super::{Mesh, MeshError, TapeMesh};
use crate::autodiff::{NodeRef, Tape};
use crate::scalar::{self, Scalar};

/// Coordinates closer than this to a mirror plane count as lying on it.
pub const PLANE_TOL: f64 = 1e-9;
/// Maximum distance between a reflected vertex and its partner.
pub const SYMMETRY_MATCH_TOL: f64 = 1e-6;

/// Mirror symmetry across the `x = 0` and/or `z = 0` planes.
///
/// Vertices with `x ≥ 0` and `z ≥ 0` (up to [`PLANE_TOL`], for the enabled
/// planes) form the free quarter and own the parameters; every other vertex
/// copies the offset of its reflected partner with the mirrored components negated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymmetrySpec {
    pub mirror_x: bool,
    pub mirror_z: bool,
    /// Base-mesh vertex index of every free vertex.
    pub free_vertices: Vec<usize>,
    /// Per base vertex: index into `free_vertices` of its source.
    pub source: Vec<usize>,
    /// Per base vertex: whether the x / z offset components are negated.
    pub flip: Vec<[bool; 2]>,
    /// Per free vertex: offset components pinned to zero (on a mirror plane).
    pub pinned: Vec<[bool; 3]>,
}

impl SymmetrySpec {
    /// Partitions `base` into quarters. Fails when some vertex has no mirror
    /// partner within [`SYMMETRY_MATCH_TOL`].
    pub fn quarters<T: Scalar>(base: &Mesh<T>, mirror_x: bool, mirror_z: bool) -> Result<Self, MeshError> {
        let verts: Vec<[f64; 3]> = base
            .vertices
            .iter()
            .map(|v| v.map(|c| c.to_f64_lossy()))
            .collect();
        let in_free = |v: &[f64; 3]| {
            (!mirror_x || v[0] > -PLANE_TOL) && (!mirror_z || v[2] > -PLANE_TOL)
        };
        let free_vertices: Vec<usize> = (0..verts.len()).filter(|&i| in_free(&verts[i])).collect();
        let pinned = free_vertices
            .iter()
            .map(|&i| {
                let v = verts[i];
                [
                    mirror_x && v[0].abs() < PLANE_TOL,
                    false,
                    mirror_z && v[2].abs() < PLANE_TOL,
                ]
            })
            .collect();

        let mut source = vec![0; verts.len()];
        let mut flip = vec![[false; 2]; verts.len()];
        let mut slot_of = vec![usize::MAX; verts.len()];
        for (k, &i) in free_vertices.iter().enumerate() {
            slot_of[i] = k;
        }
        for (i, v) in verts.iter().enumerate() {
            if slot_of[i] != usize::MAX {
                source[i] = slot_of[i];
                continue;
            }
            let fx = mirror_x && v[0] <= -PLANE_TOL;
            let fz = mirror_z && v[2] <= -PLANE_TOL;
            let target = [
                if fx { -v[0] } else { v[0] },
                v[1],
                if fz { -v[2] } else { v[2] },
            ];
            let (best, dist) = free_vertices
                .iter()
                .enumerate()
                .map(|(k, &j)| {
                    let u = verts[j];
                    let d = ((u[0] - target[0]).powi(2)
                        + (u[1] - target[1]).powi(2)
                        + (u[2] - target[2]).powi(2))
                    .sqrt();
                    (k, d)
                })
                .fold((usize::MAX, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
            if dist > SYMMETRY_MATCH_TOL {
                return Err(MeshError::NotSymmetric { vertex: i, distance: dist });
            }
            source[i] = best;
            flip[i] = [fx, fz];
        }
        Ok(Self {
            mirror_x,
            mirror_z,
            free_vertices,
            source,
            flip,
            pinned,
        })
    }

    pub fn free_count(&self) -> usize {
        self.free_vertices.len()
    }

    pub fn vertex_count(&self) -> usize {
        self.source.len()
    }
}

/// Which parameter groups the optimizer may move.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParamMask {
    pub offsets: bool,
    pub translation: bool,
    pub scale: bool,
}

impl Default for ParamMask {
    fn default() -> Self {
        Self {
            offsets: true,
            translation: true,
            scale: true,
        }
    }
}

/// Unconstrained optimization variables that deform a base mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeParams<T> {
    /// `3 × free vertex count`, xyz-interleaved.
    pub raw_offsets: Vec<T>,
    pub translation: [T; 3],
    pub log_scale: T,
    pub symmetry: Option<SymmetrySpec>,
    pub max_offset: T,
}

impl<T: Scalar> ShapeParams<T> {
    /// The identity deformation of `base`.
    pub fn zeros(base: &Mesh<T>, symmetry: Option<SymmetrySpec>, max_offset: T) -> Self {
        let free = symmetry
            .as_ref()
            .map_or(base.vertex_count(), SymmetrySpec::free_count);
        Self {
            raw_offsets: vec![T::zero(); 3 * free],
            translation: [T::zero(); 3],
            log_scale: T::zero(),
            symmetry,
            max_offset,
        }
    }

    pub fn free_vertex_count(&self) -> usize {
        self.raw_offsets.len() / 3
    }

    /// Length of [`ShapeParams::to_flat`]: offsets, translation, log-scale.
    pub fn flat_len(&self) -> usize {
        self.raw_offsets.len() + 4
    }

    pub fn to_flat(&self) -> Vec<T> {
        let mut v = self.raw_offsets.clone();
        v.extend_from_slice(&self.translation);
        v.push(self.log_scale);
        v
    }

    /// Overwrites every variable from a vector laid out like [`ShapeParams::to_flat`].
    pub fn set_flat(&mut self, flat: &[T]) {
        let n = self.raw_offsets.len();
        assert_eq!(flat.len(), n + 4, "flat parameter length");
        self.raw_offsets.copy_from_slice(&flat[..n]);
        self.translation.copy_from_slice(&flat[n..n + 3]);
        self.log_scale = flat[n + 3];
    }

    fn expected_len(&self, base: &Mesh<T>) -> Result<usize, MeshError> {
        let free = match &self.symmetry {
            Some(s) => {
                if s.vertex_count() != base.vertex_count() {
                    return Err(MeshError::SymmetryMismatch {
                        expected: s.vertex_count(),
                        found: base.vertex_count(),
                    });
                }
                s.free_count()
            }
            None => base.vertex_count(),
        };
        if self.raw_offsets.len() != 3 * free {
            return Err(MeshError::ParamLength {
                expected: 3 * free,
                found: self.raw_offsets.len(),
            });
        }
        Ok(free)
    }

    /// Records every variable as a leaf; groups outside `mask` are constants.
    pub fn to_tape(&self, tape: &mut Tape<T>, mask: ParamMask) -> ParamNodes {
        let leaf = |tape: &mut Tape<T>, v: T, g: bool| tape.leaf(v, g).expect("finite parameter");
        ParamNodes {
            raw_offsets: self
                .raw_offsets
                .iter()
                .map(|&v| leaf(tape, v, mask.offsets))
                .collect(),
            translation: self.translation.map(|v| leaf(tape, v, mask.translation)),
            log_scale: leaf(tape, self.log_scale, mask.scale),
        }
    }
}

/// Tape leaves mirroring a [`ShapeParams`] layout.
#[derive(Debug, Clone)]
pub struct ParamNodes {
    pub raw_offsets: Vec<NodeRef>,
    pub translation: [NodeRef; 3],
    pub log_scale: NodeRef,
}

impl ParamNodes {
    /// Leaves in [`ShapeParams::to_flat`] order.
    pub fn flat(&self) -> Vec<NodeRef> {
        let mut v = self.raw_offsets.clone();
        v.extend_from_slice(&self.translation);
        v.push(self.log_scale);
        v
    }
}

fn decode_offset<T: Scalar>(raw: T, max_offset: T) -> T {
    max_offset * (T::lit(2.0) * scalar::sigmoid(raw) - T::one())
}

/// Full per-vertex offset field after mirroring the free quarter.
pub fn mirror_quarters<T: Scalar>(params: &ShapeParams<T>, base: &Mesh<T>) -> Result<Vec<[T; 3]>, MeshError> {
    params.expected_len(base)?;
    let free: Vec<[T; 3]> = params
        .raw_offsets
        .chunks_exact(3)
        .enumerate()
        .map(|(k, c)| {
            let pinned = params.symmetry.as_ref().map_or([false; 3], |s| s.pinned[k]);
            [0, 1, 2].map(|j| {
                if pinned[j] {
                    T::zero()
                } else {
                    decode_offset(c[j], params.max_offset)
                }
            })
        })
        .collect();
    Ok(match &params.symmetry {
        None => free,
        Some(s) => (0..base.vertex_count())
            .map(|i| {
                let o = free[s.source[i]];
                let [fx, fz] = s.flip[i];
                [
                    if fx { -o[0] } else { o[0] },
                    o[1],
                    if fz { -o[2] } else { o[2] },
                ]
            })
            .collect(),
    })
}

/// Decodes `params` into a deformed copy of `base`.
pub fn apply_params<T: Scalar>(base: &Mesh<T>, params: &ShapeParams<T>) -> Result<Mesh<T>, MeshError> {
    let offsets = mirror_quarters(params, base)?;
    let scale = params.log_scale.exp();
    let t = params.translation;
    Ok(Mesh {
        vertices: base
            .vertices
            .iter()
            .zip(&offsets)
            .map(|(v, o)| [0, 1, 2].map(|k| scale * (v[k] + o[k]) + t[k]))
            .collect(),
        faces: base.faces.clone(),
    })
}

/// [`apply_params`] on the tape: the result is differentiable in every parameter leaf.
pub fn apply_params_on_tape<T: Scalar>(
    tape: &mut Tape<T>,
    base: &Mesh<T>,
    params: &ShapeParams<T>,
    nodes: &ParamNodes,
) -> Result<TapeMesh, MeshError> {
    params.expected_len(base)?;
    let two_m = T::lit(2.0) * params.max_offset;
    let free: Vec<[Option<NodeRef>; 3]> = nodes
        .raw_offsets
        .chunks_exact(3)
        .enumerate()
        .map(|(k, c)| {
            let pinned = params.symmetry.as_ref().map_or([false; 3], |s| s.pinned[k]);
            [0, 1, 2].map(|j| {
                (!pinned[j]).then(|| {
                    let s = tape.sigmoid(c[j]);
                    tape.affine(s, two_m, -params.max_offset)
                })
            })
        })
        .collect();
    let scale = tape.exp(nodes.log_scale);
    let vertices = base
        .vertices
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let (src, flip) = match &params.symmetry {
                None => (i, [false; 2]),
                Some(s) => (s.source[i], s.flip[i]),
            };
            let o = free[src];
            [0, 1, 2].map(|k| {
                let negate = (k == 0 && flip[0]) || (k == 2 && flip[1]);
                let p = match o[k] {
                    Some(off) => {
                        let signed = if negate { tape.neg(off) } else { off };
                        tape.add_const(signed, v[k])
                    }
                    None => tape.constant(v[k]),
                };
                let scaled = tape.mul(scale, p);
                tape.add(scaled, nodes.translation[k])
            })
        })
        .collect();
    Ok(TapeMesh {
        vertices,
        faces: base.faces.clone(),
    })
}
