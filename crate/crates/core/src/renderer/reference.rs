//! Unfused render built only from elementary tape operations, without culling.
//! Slow; meant for small scenes and for inspecting `V` and the blend weights.

use crate::autodiff::{NodeRef, Tape};
use crate::camera::{Camera, ScreenTriangle};
use crate::mesh::TapeMesh;
use crate::scalar::Scalar;

use super::raster::{background_triangles, DEGENERATE_AREA, DEPTH_CLAMP_SHARPNESS, DEPTH_SPREAD_FLOOR};
use super::{prepare, RenderError, RenderParams, TapeImage};

/// Per-pixel, per-triangle coverage `V` and depth-blend weights, pixel-major:
/// entry `p·triangle_count + t`. The last two triangles are the background.
#[derive(Debug, Clone)]
pub struct RasterBuffers {
    pub width: usize,
    pub height: usize,
    pub triangle_count: usize,
    pub visibility: Vec<NodeRef>,
    pub weights: Vec<NodeRef>,
}

impl RasterBuffers {
    pub fn visibility_at(&self, pixel: usize) -> &[NodeRef] {
        &self.visibility[pixel * self.triangle_count..(pixel + 1) * self.triangle_count]
    }

    pub fn weights_at(&self, pixel: usize) -> &[NodeRef] {
        &self.weights[pixel * self.triangle_count..(pixel + 1) * self.triangle_count]
    }
}

pub fn render_reference<T: Scalar>(
    tape: &mut Tape<T>,
    mesh: &TapeMesh,
    camera: &Camera<T>,
    params: &RenderParams<T>,
) -> Result<(TapeImage, RasterBuffers), RenderError> {
    let (prepared, bg) = prepare(tape, mesh, camera, params)?;
    let mut tris: Vec<(ScreenTriangle, NodeRef)> = prepared.scene.into_iter().zip(prepared.shades).collect();
    for b in background_triangles(camera.width, camera.height, bg, params.s, params.eps) {
        let st = ScreenTriangle {
            xy: b.xy.map(|p| p.map(|c| tape.constant(c))),
            z_view: b.z_view.map(|z| tape.constant(z)),
            m: tape.constant(b.m),
        };
        tris.push((st, tape.constant(params.background_intensity)));
    }
    let e = T::lit(DEGENERATE_AREA * DEGENERATE_AREA);
    let n_tri = tris.len();
    let mut pixels = Vec::with_capacity(camera.pixel_count());
    let mut visibility = Vec::with_capacity(camera.pixel_count() * n_tri);
    let mut weights = Vec::with_capacity(camera.pixel_count() * n_tri);
    for j in 0..camera.height {
        for i in 0..camera.width {
            let px = tape.constant(T::lit(i as f64 + 0.5));
            let py = tape.constant(T::lit(j as f64 + 0.5));
            let mut vs = Vec::with_capacity(n_tri);
            let mut zs = Vec::with_capacity(n_tri);
            for (st, _) in &tris {
                let (x, y) = (st.xy.map(|p| p[0]), st.xy.map(|p| p[1]));
                let som = {
                    let s = tape.constant(params.s);
                    tape.div(s, st.m)
                };
                let mut plus = Vec::with_capacity(3);
                let mut minus = Vec::with_capacity(3);
                let mut d = Vec::with_capacity(3);
                for k in 0..3 {
                    let j = (k + 1) % 3;
                    let ex = tape.sub(x[j], x[k]);
                    let rx = tape.sub(x[k], px);
                    let ey = tape.sub(y[j], y[k]);
                    let ry = tape.sub(y[k], py);
                    let dk = tape.det2(ex, rx, ey, ry);
                    let a = tape.mul(dk, som);
                    let na = tape.neg(a);
                    plus.push(tape.sigmoid(a));
                    minus.push(tape.sigmoid(na));
                    d.push(dk);
                }
                let vp = tape.mul(plus[0], plus[1]);
                let mut v = tape.mul(vp, plus[2]);
                if !params.single_sided {
                    let vm = tape.mul(minus[0], minus[1]);
                    let vm = tape.mul(vm, minus[2]);
                    v = tape.add(v, vm);
                }
                if let Some(tau) = params.distance_decay {
                    let cx = tape.mean(&x);
                    let cy = tape.mean(&y);
                    let dx = tape.sub(cx, px);
                    let dy = tape.sub(cy, py);
                    let dx2 = tape.square(dx);
                    let dy2 = tape.square(dy);
                    let r2 = tape.add(dx2, dy2);
                    let arg = tape.scale(r2, -T::one() / tau);
                    let f = tape.exp(arg);
                    v = tape.mul(v, f);
                }
                let ex1 = tape.sub(x[1], x[0]);
                let ey2 = tape.sub(y[2], y[0]);
                let ex2 = tape.sub(x[2], x[0]);
                let ey1 = tape.sub(y[1], y[0]);
                let area = tape.det2(ex1, ex2, ey1, ey2);
                let terms: Vec<NodeRef> = (0..3)
                    .map(|k| {
                        let p = tape.mul(d[k], st.z_view[(k + 2) % 3]);
                        tape.neg(p)
                    })
                    .collect();
                let n = tape.sum(&terms);
                let zmean = tape.mean(&st.z_view);
                let an = tape.mul(area, n);
                let num = tape.linear_combination(&[(an, T::one()), (zmean, e)]);
                let a2 = tape.square(area);
                let den = tape.add_const(a2, e);
                let z = tape.div(num, den);
                let devs = st.z_view.map(|zi| tape.sub(zi, zmean));
                let u = tape.norm3_smooth(devs, T::lit(DEPTH_SPREAD_FLOOR));
                let off = tape.sub(z, zmean);
                let tn = tape.div(off, u);
                let k = T::lit(DEPTH_CLAMP_SHARPNESS);
                let hi = tape.affine(tn, k, k);
                let lo = tape.affine(tn, k, -k);
                let hi = tape.softplus(hi);
                let lo = tape.softplus(lo);
                let phi = tape.sub(hi, lo);
                let phi = tape.affine(phi, T::one() / k, -T::one());
                let shift = tape.mul(u, phi);
                let z = tape.add(zmean, shift);
                vs.push(v);
                zs.push(tape.scale(z, params.o));
            }
            let w = tape.wsoftmin(&zs, &vs);
            let shades: Vec<NodeRef> = tris.iter().map(|t| t.1).collect();
            pixels.push(tape.dot(&w, &shades));
            visibility.extend_from_slice(&vs);
            weights.extend_from_slice(&w);
        }
    }
    Ok((
        TapeImage {
            width: camera.width,
            height: camera.height,
            pixels,
        },
        RasterBuffers {
            width: camera.width,
            height: camera.height,
            triangle_count: n_tri,
            visibility,
            weights,
        },
    ))
}
