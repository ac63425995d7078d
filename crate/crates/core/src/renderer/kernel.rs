//! Fused per-pixel evaluation of `I(p) = Σ_T w_T c_T` with
//! `w = softmax(−o·z_T(p) + ln V_T(p))`, together with the exact partials of
//! `I(p)` with respect to every triangle quantity that enters it.
//!
//! Triangles whose log-weight is provably more than [`CULL_MARGIN`] below the
//! pixel's best lower bound are skipped; their combined weight is below the
//! rounding error of the survivors.

use rayon::prelude::*;

use crate::scalar::{self, Scalar};

use super::raster::{depth_clamp, depth_spread, DEGENERATE_AREA};

pub const CULL_MARGIN: f64 = 50.0;

/// Number of tape operands per triangle: `x₀ y₀ x₁ y₁ x₂ y₂ z₀ z₁ z₂ m c`.
pub(crate) const TRI_OPERANDS: usize = 11;

#[derive(Debug, Clone)]
pub(crate) struct TriData<T> {
    pub x: [T; 3],
    pub y: [T; 3],
    pub z: [T; 3],
    pub m: T,
    pub c: T,
    /// Tape node indices; `None` for constant triangles.
    pub refs: Option<[u32; TRI_OPERANDS]>,
    area: T,
    denom: T,
    zmean: T,
    /// Smooth depth spread `u`.
    spread: T,
    som: T,
    centroid: [T; 2],
}

impl<T: Scalar> TriData<T> {
    pub fn new(x: [T; 3], y: [T; 3], z: [T; 3], m: T, c: T, s: T, refs: Option<[u32; TRI_OPERANDS]>) -> Self {
        let area = (x[1] - x[0]) * (y[2] - y[0]) - (x[2] - x[0]) * (y[1] - y[0]);
        let e = T::lit(DEGENERATE_AREA * DEGENERATE_AREA);
        let third = T::one() / T::lit(3.0);
        let (zmean, spread) = depth_spread(z);
        Self {
            x,
            y,
            z,
            m,
            c,
            refs,
            area,
            denom: area * area + e,
            zmean,
            spread,
            som: s / m,
            centroid: [(x[0] + x[1] + x[2]) * third, (y[0] + y[1] + y[2]) * third],
        }
    }
}

pub(crate) struct Scene<T> {
    pub tris: Vec<TriData<T>>,
    pub width: usize,
    pub height: usize,
    pub o: T,
    pub single_sided: bool,
    pub decay: Option<T>,
    /// Blend origin: `I = c_ref + Σ w (c − c_ref)`, so a pixel that sees only
    /// the background reproduces it exactly.
    pub reference_shade: T,
}

/// Output of one image row: pixel values and, optionally, CSR partials.
#[derive(Default)]
pub(crate) struct RowOut<T> {
    pub values: Vec<T>,
    pub counts: Vec<u32>,
    pub operands: Vec<u32>,
    pub partials: Vec<T>,
}

#[derive(Clone, Copy)]
struct Cand<T> {
    t: usize,
    a: [T; 3],
    d: [T; 3],
    n: T,
    /// Interpolated (unclamped) depth.
    z: T,
    /// Normalized offset `t = (z − z̄)/u` and the clamp values `φ(t)`, `φ′(t)`.
    tn: T,
    phi: T,
    dphi: T,
    decay: T,
    base: T,
    ub: T,
    ls: [T; 3],
    lp: T,
    logv: T,
    logit: T,
}

impl<T: Scalar> Cand<T> {
    fn clamp_depth(&mut self, tri: &TriData<T>) {
        self.tn = (self.z - tri.zmean) / tri.spread;
        (self.phi, self.dphi) = depth_clamp(self.tn);
    }
}

impl<T: Scalar> Scene<T> {
    pub fn render_rows(&self, want_partials: bool) -> Vec<RowOut<T>> {
        (0..self.height)
            .into_par_iter()
            .map(|j| self.row(j, want_partials))
            .collect()
    }

    fn row(&self, j: usize, want: bool) -> RowOut<T> {
        let mut out = RowOut {
            values: Vec::with_capacity(self.width),
            counts: Vec::with_capacity(if want { self.width } else { 0 }),
            ..Default::default()
        };
        let mut cands = Vec::with_capacity(self.tris.len());
        let py = T::lit(j as f64 + 0.5);
        for i in 0..self.width {
            let px = T::lit(i as f64 + 0.5);
            self.pixel(px, py, &mut cands, &mut out, want);
        }
        out
    }

    fn pixel(&self, px: T, py: T, cands: &mut Vec<Cand<T>>, out: &mut RowOut<T>, want: bool) {
        let zero = T::zero();
        let ln2 = T::LN_2();
        let margin = T::lit(CULL_MARGIN);
        let e = T::lit(DEGENERATE_AREA * DEGENERATE_AREA);
        cands.clear();
        let mut best_lb = T::neg_infinity();
        for (t, tri) in self.tris.iter().enumerate() {
            let (x, y) = (&tri.x, &tri.y);
            let mut d = [zero; 3];
            let mut a = [zero; 3];
            let (mut ub_p, mut ub_n, mut lb_p, mut lb_n) = (zero, zero, zero, zero);
            for k in 0..3 {
                let j = (k + 1) % 3;
                d[k] = (x[j] - x[k]) * (y[k] - py) - (y[j] - y[k]) * (x[k] - px);
                a[k] = d[k] * tri.som;
                let (lo, hi) = (a[k].min(zero), (-a[k]).min(zero));
                ub_p = ub_p + lo;
                ub_n = ub_n + hi;
                lb_p = lb_p + lo - ln2;
                lb_n = lb_n + hi - ln2;
            }
            let n = -(d[0] * tri.z[2] + d[1] * tri.z[0] + d[2] * tri.z[1]);
            let z = (tri.area * n + e * tri.zmean) / tri.denom;
            let decay = match self.decay {
                Some(tau) => {
                    let (dx, dy) = (tri.centroid[0] - px, tri.centroid[1] - py);
                    -(dx * dx + dy * dy) / tau
                }
                None => zero,
            };
            // The clamped depth lies in z̄ ± u.
            let near = -self.o * (tri.zmean - tri.spread) + decay;
            let far = -self.o * (tri.zmean + tri.spread) + decay;
            let (ub, lb) = if self.single_sided {
                (near + ub_p, far + lb_p)
            } else {
                (near + ub_p.max(ub_n) + ln2, far + lb_p.max(lb_n))
            };
            if lb > best_lb {
                best_lb = lb;
            }
            if ub >= best_lb - margin {
                cands.push(Cand {
                    t,
                    a,
                    d,
                    n,
                    z,
                    tn: zero,
                    phi: zero,
                    dphi: zero,
                    decay,
                    base: zero,
                    ub,
                    ls: [zero; 3],
                    lp: zero,
                    logv: zero,
                    logit: zero,
                });
            }
        }
        let cut = best_lb - margin;
        cands.retain(|c| c.ub >= cut);

        let mut top = T::neg_infinity();
        for c in cands.iter_mut() {
            let tri = &self.tris[c.t];
            c.clamp_depth(tri);
            c.base = -self.o * (tri.zmean + tri.spread * c.phi) + c.decay;
            let mut lp = zero;
            let mut ln = zero;
            for k in 0..3 {
                c.ls[k] = scalar::log_sigmoid(c.a[k]);
                lp = lp + c.ls[k];
                ln = ln + (c.ls[k] - c.a[k]);
            }
            c.lp = lp;
            c.logv = if self.single_sided { lp } else { scalar::log_add_exp(lp, ln) };
            c.logit = c.base + c.logv;
            top = top.max(c.logit);
        }
        let mut total = zero;
        for c in cands.iter_mut() {
            c.logit = (c.logit - top).exp();
            total = total + c.logit;
        }
        let mut value = zero;
        for c in cands.iter_mut() {
            c.logit = c.logit / total;
            value = value + c.logit * (self.tris[c.t].c - self.reference_shade);
        }
        let value = value + self.reference_shade;
        out.values.push(value);
        if !want {
            return;
        }
        let before = out.operands.len();
        for c in cands.iter() {
            let tri = &self.tris[c.t];
            let Some(refs) = tri.refs else { continue };
            self.partials(px, py, tri, c, value, &refs, out);
        }
        out.counts.push((out.operands.len() - before) as u32);
    }

    #[allow(clippy::too_many_arguments)]
    fn partials(&self, px: T, py: T, tri: &TriData<T>, c: &Cand<T>, value: T, refs: &[u32; TRI_OPERANDS], out: &mut RowOut<T>) {
        let zero = T::zero();
        let e = T::lit(DEGENERATE_AREA * DEGENERATE_AREA);
        let w = c.logit;
        let g = w * (tri.c - value);
        let (x, y, zv) = (&tri.x, &tri.y, &tri.z);

        let mut ga = [zero; 3];
        if self.single_sided {
            for k in 0..3 {
                ga[k] = (c.ls[k] - c.a[k]).exp();
            }
        } else {
            let rho = (c.lp - c.logv).exp();
            for k in 0..3 {
                let sig = c.ls[k].exp();
                let sig_neg = (c.ls[k] - c.a[k]).exp();
                ga[k] = rho * sig_neg - (T::one() - rho) * sig;
            }
        }

        // ℓ depends on the interpolated depth through −o·u·φ(t).
        let o = self.o * c.dphi;
        let dz_dn = tri.area / tri.denom;
        let dz_da = (c.n - T::lit(2.0) * tri.area * c.z) / tri.denom;
        let mut dd = [zero; 3];
        let mut dm = zero;
        for k in 0..3 {
            dd[k] = ga[k] * tri.som + o * dz_dn * zv[(k + 2) % 3];
            dm = dm - ga[k] * c.a[k] / tri.m;
        }
        let d_area = -o * dz_da;
        let third = T::one() / T::lit(3.0);
        let via_mean = -self.o * (T::one() - c.dphi) * third;
        let via_spread = -self.o * (c.phi - c.tn * c.dphi) / tri.spread;
        let dz = [0, 1, 2].map(|i| {
            -o * (tri.area * (-c.d[(i + 1) % 3]) + e * third) / tri.denom
                + via_mean
                + via_spread * (zv[i] - tri.zmean)
        });

        let mut dx = [zero; 3];
        let mut dy = [zero; 3];
        for k in 0..3 {
            let j = (k + 1) % 3;
            dx[j] = dx[j] + dd[k] * (y[k] - py);
            dx[k] = dx[k] - dd[k] * (y[j] - py);
            dy[k] = dy[k] + dd[k] * (x[j] - px);
            dy[j] = dy[j] - dd[k] * (x[k] - px);
        }
        for i in 0..3 {
            let (i1, i2) = ((i + 1) % 3, (i + 2) % 3);
            dx[i] = dx[i] + d_area * (y[i1] - y[i2]);
            dy[i] = dy[i] + d_area * (x[i2] - x[i1]);
        }
        if let Some(tau) = self.decay {
            let k = -T::lit(2.0) / (T::lit(3.0) * tau);
            for i in 0..3 {
                dx[i] = dx[i] + k * (tri.centroid[0] - px);
                dy[i] = dy[i] + k * (tri.centroid[1] - py);
            }
        }

        let grads = [
            dx[0] * g,
            dy[0] * g,
            dx[1] * g,
            dy[1] * g,
            dx[2] * g,
            dy[2] * g,
            dz[0] * g,
            dz[1] * g,
            dz[2] * g,
            dm * g,
            w,
        ];
        out.operands.extend_from_slice(refs);
        out.partials.extend_from_slice(&grads);
    }
}
