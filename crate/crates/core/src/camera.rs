//! Pinhole look-at camera and differentiable projection to pixel space.
//!
//! View frame: `forward = normalize(look_at − eye)`, `right = normalize(up × forward)`,
//! `true_up = forward × right`. Pixel coordinates put the origin at the top-left
//! corner with +y pointing down; pixel centres sit at integer + 0.5.

use thiserror::Error;

use crate::autodiff::{NodeRef, Tape};
use crate::mesh::TapeMesh;
use crate::scalar::Scalar;
use crate::SMOOTH_EPS;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CameraError {
    #[error("eye and look-at point coincide")]
    DegenerateView,
    #[error("up vector is parallel to the viewing direction")]
    UpParallel,
    #[error("vertical field of view {0} must lie in (0, π)")]
    FieldOfView(f64),
    #[error("image size {0}×{1} must be non-zero")]
    ImageSize(usize, usize),
    #[error("near plane {0} must be positive")]
    Near(f64),
    #[error("vertex {vertex} has view depth {depth} in front of the near plane {near}")]
    Frustum { vertex: usize, depth: f64, near: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Camera<T> {
    pub eye: [T; 3],
    pub look_at: [T; 3],
    pub up: [T; 3],
    /// Vertical field of view in radians.
    pub fov_y: T,
    pub width: usize,
    pub height: usize,
    pub near: T,
}

/// Orthonormal view basis derived from a [`Camera`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ViewBasis<T> {
    pub right: [T; 3],
    pub up: [T; 3],
    pub forward: [T; 3],
}

fn sub<T: Scalar>(a: [T; 3], b: [T; 3]) -> [T; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross<T: Scalar>(a: [T; 3], b: [T; 3]) -> [T; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn dot<T: Scalar>(a: [T; 3], b: [T; 3]) -> T {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm<T: Scalar>(a: [T; 3]) -> T {
    dot(a, a).sqrt()
}

impl<T: Scalar> Camera<T> {
    pub fn new(
        eye: [T; 3],
        look_at: [T; 3],
        up: [T; 3],
        fov_y: T,
        width: usize,
        height: usize,
        near: T,
    ) -> Result<Self, CameraError> {
        let cam = Self {
            eye,
            look_at,
            up,
            fov_y,
            width,
            height,
            near,
        };
        cam.validate()?;
        Ok(cam)
    }

    /// Camera on a sphere around `target`. Azimuth 0 looks along +z; positive
    /// elevation looks down from above. World +y is up.
    pub fn orbit(
        target: [T; 3],
        distance: T,
        azimuth: T,
        elevation: T,
        fov_y: T,
        width: usize,
        height: usize,
    ) -> Result<Self, CameraError> {
        let (sa, ca) = azimuth.sin_cos();
        let (se, ce) = elevation.sin_cos();
        let eye = [
            target[0] + distance * sa * ce,
            target[1] + distance * se,
            target[2] - distance * ca * ce,
        ];
        Self::new(
            eye,
            target,
            [T::zero(), T::one(), T::zero()],
            fov_y,
            width,
            height,
            T::lit(0.01),
        )
    }

    pub fn validate(&self) -> Result<(), CameraError> {
        if self.width == 0 || self.height == 0 {
            return Err(CameraError::ImageSize(self.width, self.height));
        }
        if !(self.fov_y > T::zero() && self.fov_y < T::PI()) {
            return Err(CameraError::FieldOfView(self.fov_y.to_f64_lossy()));
        }
        if !(self.near > T::zero()) {
            return Err(CameraError::Near(self.near.to_f64_lossy()));
        }
        let d = sub(self.look_at, self.eye);
        if !(norm(d) > T::lit(1e-12)) {
            return Err(CameraError::DegenerateView);
        }
        let c = cross(self.up, d);
        if !(norm(c) > T::lit(1e-9) * norm(d) * norm(self.up)) {
            return Err(CameraError::UpParallel);
        }
        Ok(())
    }

    pub fn basis(&self) -> ViewBasis<T> {
        let f = sub(self.look_at, self.eye);
        let f = f.map(|c| c / norm(f));
        let r = cross(self.up, f);
        let r = r.map(|c| c / norm(r));
        ViewBasis {
            right: r,
            up: cross(f, r),
            forward: f,
        }
    }

    /// Focal length in pixels: `(height/2) / tan(fov_y/2)`.
    pub fn focal(&self) -> T {
        T::lit(self.height as f64 * 0.5) / (self.fov_y * T::lit(0.5)).tan()
    }

    /// World point to view coordinates `(x_view, y_view, z_view)`.
    pub fn to_view(&self, p: [T; 3]) -> [T; 3] {
        let b = self.basis();
        let d = sub(p, self.eye);
        [dot(b.right, d), dot(b.up, d), dot(b.forward, d)]
    }

    /// World point to pixel coordinates and view depth.
    pub fn project_point(&self, p: [T; 3]) -> ([T; 2], T) {
        let [x, y, z] = self.to_view(p);
        let f = self.focal();
        let half_w = T::lit(self.width as f64 * 0.5);
        let half_h = T::lit(self.height as f64 * 0.5);
        ([x / z * f + half_w, -(y / z) * f + half_h], z)
    }

    /// Unit vector from `p` toward the eye.
    pub fn direction_to_eye(&self, p: [T; 3]) -> [T; 3] {
        let d = sub(self.eye, p);
        let n = norm(d);
        d.map(|c| c / n)
    }

    pub fn pixel_count(&self) -> usize {
        self.width * self.height
    }

    pub fn cast<U: Scalar>(&self) -> Camera<U> {
        let c = |x: T| U::lit(x.to_f64_lossy());
        Camera {
            eye: self.eye.map(c),
            look_at: self.look_at.map(c),
            up: self.up.map(c),
            fov_y: c(self.fov_y),
            width: self.width,
            height: self.height,
            near: c(self.near),
        }
    }
}

/// A triangle after projection: pixel-space corners, view depths, and the
/// softmin `m` of its pixel-space edge lengths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScreenTriangle {
    pub xy: [[NodeRef; 2]; 3],
    pub z_view: [NodeRef; 3],
    pub m: NodeRef,
}

/// Plain values of a [`ScreenTriangle`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScreenTriangleValues<T> {
    pub xy: [[T; 2]; 3],
    pub z_view: [T; 3],
    pub m: T,
}

impl ScreenTriangle {
    pub fn values<T: Scalar>(&self, tape: &Tape<T>) -> ScreenTriangleValues<T> {
        ScreenTriangleValues {
            xy: self.xy.map(|p| p.map(|c| tape.value(c))),
            z_view: self.z_view.map(|c| tape.value(c)),
            m: tape.value(self.m),
        }
    }
}

/// Projects one tape vertex. Returns `([x_pix, y_pix], z_view)`.
pub fn project_vertex<T: Scalar>(
    tape: &mut Tape<T>,
    camera: &Camera<T>,
    basis: &ViewBasis<T>,
    v: [NodeRef; 3],
) -> ([NodeRef; 2], NodeRef) {
    let axis = |tape: &mut Tape<T>, a: [T; 3]| {
        let l = tape.dot3_const(v, a);
        tape.add_const(l, -dot(a, camera.eye))
    };
    let xv = axis(tape, basis.right);
    let yv = axis(tape, basis.up);
    let zv = axis(tape, basis.forward);
    let f = camera.focal();
    let qx = tape.div(xv, zv);
    let qy = tape.div(yv, zv);
    let px = tape.affine(qx, f, T::lit(camera.width as f64 * 0.5));
    let py = tape.affine(qy, -f, T::lit(camera.height as f64 * 0.5));
    ([px, py], zv)
}

/// Smooth pixel-space edge lengths of a projected triangle and their softmin.
pub fn screen_triangle<T: Scalar>(
    tape: &mut Tape<T>,
    xy: [[NodeRef; 2]; 3],
    z_view: [NodeRef; 3],
    softmin_temperature: T,
) -> ScreenTriangle {
    let eps = T::lit(SMOOTH_EPS);
    let lengths: Vec<NodeRef> = (0..3)
        .map(|k| {
            let (a, b) = (xy[k], xy[(k + 1) % 3]);
            let dx = tape.sub(b[0], a[0]);
            let dy = tape.sub(b[1], a[1]);
            tape.norm2_smooth(dx, dy, eps)
        })
        .collect();
    let m = tape.soft_min_value(&lengths, softmin_temperature);
    ScreenTriangle { xy, z_view, m }
}

/// Projects every face of `mesh`. Errors when a vertex used by a face lies
/// in front of the near plane.
pub fn view_project<T: Scalar>(
    tape: &mut Tape<T>,
    mesh: &TapeMesh,
    camera: &Camera<T>,
    softmin_temperature: T,
) -> Result<Vec<ScreenTriangle>, CameraError> {
    camera.validate()?;
    let basis = camera.basis();
    let mut used = vec![false; mesh.vertices.len()];
    for f in &mesh.faces {
        for &i in f {
            used[i] = true;
        }
    }
    let mut projected = Vec::with_capacity(mesh.vertices.len());
    for (i, &v) in mesh.vertices.iter().enumerate() {
        if !used[i] {
            projected.push(None);
            continue;
        }
        let (xy, z) = project_vertex(tape, camera, &basis, v);
        let depth = tape.value(z);
        if !(depth >= camera.near) {
            return Err(CameraError::Frustum {
                vertex: i,
                depth: depth.to_f64_lossy(),
                near: camera.near.to_f64_lossy(),
            });
        }
        projected.push(Some((xy, z)));
    }
    Ok(mesh
        .faces
        .iter()
        .map(|f| {
            let p = f.map(|i| projected[i].expect("face vertex projected"));
            screen_triangle(tape, p.map(|q| q.0), p.map(|q| q.1), softmin_temperature)
        })
        .collect())
}
