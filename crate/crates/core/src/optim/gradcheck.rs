use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::autodiff::{relative_error, Tape, DEFAULT_REL_FLOOR};
use crate::camera::Camera;
use crate::mesh::Mesh;
use crate::renderer::{render, render_image, resolve_background_depth, RenderError, RenderParams};
use crate::scalar::Scalar;

/// One compared partial derivative of the pixel sum.
#[derive(Debug, Clone, PartialEq)]
pub struct Probe<T> {
    /// `"input"` for the caller's mesh, `"occlusion"` for the built-in crossing.
    pub scene: &'static str,
    pub vertex: usize,
    pub coord: usize,
    pub analytic: T,
    pub numeric: T,
    pub rel_err: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradcheckReport<T> {
    pub probes: Vec<Probe<T>>,
    pub max_rel_err: T,
}

/// Two faces crossing in depth along the image's centre column, seen by a
/// 33×33 camera whose centre pixel sits exactly on the crossing.
pub fn occlusion_scene<T: Scalar>() -> (Mesh<T>, Camera<T>) {
    let v = |x: f64, y: f64, z: f64| [T::lit(x), T::lit(y), T::lit(z)];
    let mesh = Mesh::new(
        vec![
            v(-1.0, -1.0, 0.0),
            v(1.0, -1.0, 0.0),
            v(0.0, 1.2, 0.0),
            v(-1.1, -0.9, -0.44),
            v(1.1, -0.9, 0.44),
            v(0.1, 1.1, 0.04),
        ],
        vec![[0, 1, 2], [3, 4, 5]],
    )
    .expect("static mesh");
    let camera = Camera::new(
        v(0.0, 0.0, -3.0),
        v(0.0, 0.0, 0.0),
        v(0.0, 1.0, 0.0),
        T::lit(40f64.to_radians()),
        33,
        33,
        T::lit(0.01),
    )
    .expect("static camera");
    (mesh, camera)
}

fn probe_scene<T: Scalar>(
    label: &'static str,
    mesh: &Mesh<T>,
    camera: &Camera<T>,
    params: &RenderParams<T>,
    coords: &[(usize, usize)],
    step: T,
) -> Result<Vec<Probe<T>>, RenderError> {
    let mut params = *params;
    if params.background_depth.is_none() {
        params.background_depth = Some(resolve_background_depth(mesh, [camera]));
    }
    let mut tape = Tape::new();
    let tm = mesh.to_tape(&mut tape, true);
    let img = render(&mut tape, &tm, camera, &params)?;
    let total = tape.sum(&img.pixels);
    let grads = tape.backward(total).expect("same tape");
    let sum = |m: &Mesh<T>| -> Result<T, RenderError> {
        Ok(render_image(m, camera, &params)?.data.iter().fold(T::zero(), |a, &b| a + b))
    };
    let two = T::lit(2.0);
    coords
        .iter()
        .map(|&(vertex, coord)| {
            let mut m = mesh.clone();
            let x0 = mesh.vertices[vertex][coord];
            m.vertices[vertex][coord] = x0 + step;
            let fp = sum(&m)?;
            m.vertices[vertex][coord] = x0 - step;
            let fm = sum(&m)?;
            let numeric = (fp - fm) / (two * step);
            let analytic = grads.wrt(tm.vertices[vertex][coord]);
            Ok(Probe {
                scene: label,
                vertex,
                coord,
                analytic,
                numeric,
                rel_err: relative_error(analytic, numeric, T::lit(DEFAULT_REL_FLOOR)),
            })
        })
        .collect()
}

/// Compares reverse-mode and central-difference derivatives of the render's
/// pixel sum at `n_probes` random (vertex, coordinate) pairs of `mesh`, then at
/// every coordinate of [`occlusion_scene`]. A `None` background depth is
/// resolved once and held fixed for the differences.
pub fn gradcheck_render<T: Scalar>(
    mesh: &Mesh<T>,
    camera: &Camera<T>,
    params: &RenderParams<T>,
    n_probes: usize,
    step: T,
    seed: u64,
) -> Result<GradcheckReport<T>, RenderError> {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    let mut probes = Vec::new();
    if mesh.vertex_count() > 0 && n_probes > 0 {
        let coords: Vec<_> = (0..n_probes)
            .map(|_| (rng.gen_range(0..mesh.vertex_count()), rng.gen_range(0..3)))
            .collect();
        probes.extend(probe_scene("input", mesh, camera, params, &coords, step)?);
    }
    let (occ, occ_cam) = occlusion_scene::<T>();
    let all: Vec<_> = (0..occ.vertex_count()).flat_map(|v| (0..3).map(move |c| (v, c))).collect();
    probes.extend(probe_scene("occlusion", &occ, &occ_cam, params, &all, step)?);
    let max_rel_err = probes.iter().fold(T::zero(), |a, p| a.max(p.rel_err));
    Ok(GradcheckReport { probes, max_rel_err })
}
