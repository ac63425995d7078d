//! Flat grayscale shading: ambient + diffuse + Blinn-Phong specular, passed
//! through a smooth saturating clamp.

use crate::autodiff::{NodeRef, Tape};
use crate::camera::Camera;
use crate::mesh::{face_geometry, TapeMesh};
use crate::scalar::{self, Scalar};

use super::Lighting;

/// Sharpness β of [`smooth_clamp`].
pub const CLAMP_SHARPNESS: f64 = 32.0;

/// `(sp(β) − sp(β(1 − x))) / sp(β)` with `sp` the softplus. Exactly 0 at
/// `x = 0`, close to the identity on `[0, 1 − 4/β]`, and always below 1.
pub fn smooth_clamp<T: Scalar>(x: T) -> T {
    let b = T::lit(CLAMP_SHARPNESS);
    let top = scalar::softplus(b);
    (top - scalar::softplus(b * (T::one() - x))) / top
}

fn dot<T: Scalar>(a: [T; 3], b: [T; 3]) -> T {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn normalized<T: Scalar>(v: [T; 3], eps: T) -> [T; 3] {
    let n = (dot(v, v) + eps * eps).sqrt();
    v.map(|c| c / n)
}

/// Shade of a face with unit `normal` seen along unit `view_dir` (surface
/// toward eye). Double-sided unless `single_sided`.
pub fn shade<T: Scalar>(normal: [T; 3], view_dir: [T; 3], lighting: &Lighting<T>, single_sided: bool, eps: T) -> T {
    let l = lighting.light_dir;
    let h = normalized([0, 1, 2].map(|k| l[k] + view_dir[k]), eps);
    let fold = |x: T| {
        let r = scalar::smooth_abs(x, eps);
        if single_sided {
            T::lit(0.5) * (x + r)
        } else {
            r
        }
    };
    let diffuse = fold(dot(normal, l));
    let specular = fold(dot(normal, h)).powf(lighting.shininess);
    smooth_clamp(lighting.k_ambient + lighting.k_diffuse * diffuse + lighting.k_specular * specular)
}

/// Per-face shades recorded on the tape, differentiable in the vertices.
pub fn shade_faces<T: Scalar>(
    tape: &mut Tape<T>,
    mesh: &TapeMesh,
    camera: &Camera<T>,
    lighting: &Lighting<T>,
    single_sided: bool,
    eps: T,
) -> Vec<NodeRef> {
    let geometry = face_geometry(tape, mesh);
    let b = T::lit(CLAMP_SHARPNESS);
    let top = scalar::softplus(b);
    geometry
        .iter()
        .map(|g| {
            let eye = tape.constant3(camera.eye);
            let to_eye = tape.sub3(eye, g.centroid);
            let v = tape.normalize3_smooth(to_eye, eps);
            let l = tape.constant3(lighting.light_dir);
            let lv = tape.add3(l, v);
            let h = tape.normalize3_smooth(lv, eps);
            let nl = tape.dot3_const(g.normal, lighting.light_dir);
            let nh = tape.dot3(g.normal, h);
            let (diffuse, nh) = if single_sided {
                (tape.smooth_relu(nl, eps), tape.smooth_relu(nh, eps))
            } else {
                (tape.smooth_abs(nl, eps), tape.smooth_abs(nh, eps))
            };
            let specular = tape.powf(nh, lighting.shininess);
            let raw = tape.linear_combination(&[(diffuse, lighting.k_diffuse), (specular, lighting.k_specular)]);
            let raw = tape.add_const(raw, lighting.k_ambient);
            let inner = tape.affine(raw, -b, b);
            let sp = tape.softplus(inner);
            tape.affine(sp, -T::one() / top, T::one())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn light(ka: f64, kd: f64, ks: f64, l: [f64; 3]) -> Lighting<f64> {
        Lighting {
            light_dir: l,
            k_ambient: ka,
            k_diffuse: kd,
            k_specular: ks,
            shininess: 16.0,
        }
    }

    #[test]
    fn clamp_endpoints() {
        assert_eq!(smooth_clamp(0.0f64), 0.0);
        let one = smooth_clamp(1.0f64);
        assert!((one - (1.0 - 2f64.ln() / scalar::softplus(32.0))).abs() < 1e-15);
        assert!(smooth_clamp(1.2f64) < 1.0 && smooth_clamp(5.0f64) <= 1.0);
        assert!((smooth_clamp(0.5f64) - 0.5).abs() < 1e-6);
    }

    #[test]
    fn aligned_diffuse_and_perpendicular_ambient() {
        let z = [0.0, 0.0, 1.0];
        let c = shade(z, z, &light(0.0, 1.0, 0.0, z), false, 1e-12);
        assert!((c - smooth_clamp(1.0)).abs() < 1e-12);
        let c = shade([1.0, 0.0, 0.0], z, &light(0.2, 0.6, 0.0, z), false, 1e-12);
        assert!((c - smooth_clamp(0.2)).abs() < 1e-12);
        assert!((c - 0.2).abs() < 1e-9);
    }

    #[test]
    fn full_highlight_saturates_smoothly() {
        let z = [0.0, 0.0, 1.0];
        let c = shade(z, z, &light(0.1, 0.6, 0.3, z), false, 1e-12);
        assert!((c - smooth_clamp(1.0)).abs() < 1e-12);
        assert!(c > 0.97 && c < 1.0);
    }

    #[test]
    fn double_sided_ignores_normal_sign() {
        let l = [0.0, 0.6, 0.8];
        let v = [0.0, 0.0, 1.0];
        let n = [0.3, 0.4, 0.866_025_403_784_438_6];
        let lt = light(0.3, 0.6, 0.1, l);
        let a = shade(n, v, &lt, false, 1e-12);
        let b = shade(n.map(|c| -c), v, &lt, false, 1e-12);
        assert_eq!(a, b);
        assert!(shade(n.map(|c| -c), v, &lt, true, 1e-12) < 0.31);
    }
}
