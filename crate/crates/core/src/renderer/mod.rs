//! Smooth rasterization: soft coverage `V`, depth blending by weighted
//! SoftMin, flat shading and the two background triangles.

mod image;
pub mod io;
mod kernel;
mod params;
pub mod raster;
mod reference;
pub mod shade;

use thiserror::Error;

use crate::autodiff::{NodeRef, Tape};
use crate::camera::{view_project, Camera, CameraError};
use crate::mesh::{Mesh, TapeMesh};
use crate::scalar::Scalar;

pub use image::{Image, TapeImage};
pub use kernel::CULL_MARGIN;
pub use params::{unit, Lighting, RenderParams};
pub use raster::{
    background_triangles, edge_distances, log_visibility, smooth_zbuffer, smooth_zdepth, visibility,
    visibility_single_sided, wsoftmax, wsoftmin,
};
pub use reference::{render_reference, RasterBuffers};
pub use shade::{shade, shade_faces, smooth_clamp};

use kernel::{Scene, TriData, TRI_OPERANDS};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RenderError {
    #[error(transparent)]
    Camera(#[from] CameraError),
    #[error("invalid render parameters: {0}")]
    Params(String),
    #[error("image size mismatch: {0}×{1} vs {2}×{3}")]
    SizeMismatch(usize, usize, usize, usize),
}

/// Extra distance behind the farthest vertex for the automatic background
/// depth, as a fraction of the scene's bounding radius.
pub const BACKGROUND_MARGIN: f64 = 0.05;

/// Depth just behind the farthest vertex seen by any of `cameras`.
///
/// Render once with this resolved and then keep it fixed: the value is not
/// differentiable in the vertices.
pub fn resolve_background_depth<'a, T: Scalar>(mesh: &Mesh<T>, cameras: impl IntoIterator<Item = &'a Camera<T>>) -> T {
    let (_, radius) = mesh.bounding_sphere();
    let mut far = T::zero();
    for cam in cameras {
        for f in &mesh.faces {
            for &i in f {
                far = far.max(cam.to_view(mesh.vertices[i])[2]);
            }
        }
    }
    if far <= T::zero() {
        return T::one();
    }
    let slack = if radius > T::zero() { radius } else { far };
    far + T::lit(BACKGROUND_MARGIN) * slack
}

/// Screen-space triangles with their shades, scene faces first, then the two
/// constant background triangles.
pub(crate) struct Prepared {
    pub scene: Vec<crate::camera::ScreenTriangle>,
    pub shades: Vec<NodeRef>,
}

fn background_depth<T: Scalar>(tape: &Tape<T>, mesh: &TapeMesh, camera: &Camera<T>, params: &RenderParams<T>) -> T {
    let values = mesh.values(tape);
    match params.background_depth {
        Some(d) => {
            let far = values
                .faces
                .iter()
                .flatten()
                .map(|&i| camera.to_view(values.vertices[i])[2])
                .fold(T::neg_infinity(), T::max);
            if far >= d {
                log::warn!("background depth {d} does not exceed the farthest scene depth {far}");
            }
            d
        }
        None => resolve_background_depth(&values, [camera]),
    }
}

pub(crate) fn prepare<T: Scalar>(
    tape: &mut Tape<T>,
    mesh: &TapeMesh,
    camera: &Camera<T>,
    params: &RenderParams<T>,
) -> Result<(Prepared, T), RenderError> {
    params.validate()?;
    camera.validate()?;
    let bg = background_depth(tape, mesh, camera, params);
    let scene = view_project(tape, mesh, camera, params.s)?;
    let shades = shade_faces(tape, mesh, camera, &params.lighting, params.single_sided, params.eps);
    Ok((Prepared { scene, shades }, bg))
}

fn build_scene<T: Scalar>(
    tape: &Tape<T>,
    prepared: &Prepared,
    camera: &Camera<T>,
    params: &RenderParams<T>,
    bg_depth: T,
) -> Scene<T> {
    let mut tris: Vec<TriData<T>> = prepared
        .scene
        .iter()
        .zip(&prepared.shades)
        .map(|(st, &c)| {
            let v = st.values(tape);
            let mut refs = [0u32; TRI_OPERANDS];
            for i in 0..3 {
                refs[2 * i] = st.xy[i][0].index() as u32;
                refs[2 * i + 1] = st.xy[i][1].index() as u32;
                refs[6 + i] = st.z_view[i].index() as u32;
            }
            refs[9] = st.m.index() as u32;
            refs[10] = c.index() as u32;
            TriData::new(
                v.xy.map(|p| p[0]),
                v.xy.map(|p| p[1]),
                v.z_view,
                v.m,
                tape.value(c),
                params.s,
                Some(refs),
            )
        })
        .collect();
    for b in background_triangles(camera.width, camera.height, bg_depth, params.s, params.eps) {
        tris.push(TriData::new(
            b.xy.map(|p| p[0]),
            b.xy.map(|p| p[1]),
            b.z_view,
            b.m,
            params.background_intensity,
            params.s,
            None,
        ));
    }
    Scene {
        tris,
        width: camera.width,
        height: camera.height,
        o: params.o,
        single_sided: params.single_sided,
        decay: params.distance_decay,
        reference_shade: params.background_intensity,
    }
}

/// Renders `mesh` on the tape. Each pixel becomes one node whose partials
/// reach every projected vertex, view depth, edge-length softmin and shade
/// that contributes to it.
pub fn render<T: Scalar>(
    tape: &mut Tape<T>,
    mesh: &TapeMesh,
    camera: &Camera<T>,
    params: &RenderParams<T>,
) -> Result<TapeImage, RenderError> {
    let (prepared, bg) = prepare(tape, mesh, camera, params)?;
    let scene = build_scene(tape, &prepared, camera, params, bg);
    let rows = scene.render_rows(true);
    let n_px = camera.pixel_count();
    let n_ops: usize = rows.iter().map(|r| r.operands.len()).sum();
    let mut values = Vec::with_capacity(n_px);
    let mut offsets = Vec::with_capacity(n_px + 1);
    let mut operands = Vec::with_capacity(n_ops);
    let mut partials = Vec::with_capacity(n_ops);
    offsets.push(0u32);
    for r in rows {
        values.extend_from_slice(&r.values);
        let mut at = *offsets.last().unwrap();
        for c in r.counts {
            at += c;
            offsets.push(at);
        }
        operands.extend_from_slice(&r.operands);
        partials.extend_from_slice(&r.partials);
    }
    let pixels = tape.extend_composites(&values, &offsets, &operands, &partials);
    Ok(TapeImage {
        width: camera.width,
        height: camera.height,
        pixels,
    })
}

/// Forward-only render of plain vertex values.
pub fn render_image<T: Scalar>(mesh: &Mesh<T>, camera: &Camera<T>, params: &RenderParams<T>) -> Result<Image<T>, RenderError> {
    let mut tape = Tape::new();
    let tm = mesh.to_tape(&mut tape, false);
    let (prepared, bg) = prepare(&mut tape, &tm, camera, params)?;
    let scene = build_scene(&tape, &prepared, camera, params, bg);
    let data = scene
        .render_rows(false)
        .into_iter()
        .flat_map(|r| r.values)
        .collect();
    Ok(Image {
        width: camera.width,
        height: camera.height,
        data,
    })
}
