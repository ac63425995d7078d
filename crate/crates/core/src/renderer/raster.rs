//! Plain-value forms of the per-pixel building blocks: directed edge
//! distances, visibility, interpolated depth and the weighted SoftMin.

use crate::camera::ScreenTriangleValues;
use crate::scalar::{self, Scalar};

/// Area blend scale for near-degenerate screen triangles, in squared pixels.
pub const DEGENERATE_AREA: f64 = 1e-9;

/// `d_k = det[[x_{k+1} − x_k, x_k − p_x], [y_{k+1} − y_k, y_k − p_y]]` for the
/// three directed edges `k → k+1`.
pub fn edge_distances<T: Scalar>(p: [T; 2], xy: &[[T; 2]; 3]) -> [T; 3] {
    [0, 1, 2].map(|k| {
        let (a, b) = (xy[k], xy[(k + 1) % 3]);
        (b[0] - a[0]) * (a[1] - p[1]) - (b[1] - a[1]) * (a[0] - p[0])
    })
}

/// Twice the signed pixel-space area `(x₁−x₀)(y₂−y₀) − (x₂−x₀)(y₁−y₀)`.
pub fn signed_area<T: Scalar>(xy: &[[T; 2]; 3]) -> T {
    (xy[1][0] - xy[0][0]) * (xy[2][1] - xy[0][1]) - (xy[2][0] - xy[0][0]) * (xy[1][1] - xy[0][1])
}

/// Orientation-invariant coverage `Π σ(a_k) + Π σ(−a_k)` with `a_k = d_k·s/m`.
pub fn visibility<T: Scalar>(p: [T; 2], tri: &ScreenTriangleValues<T>, s: T) -> T {
    log_visibility(p, tri, s, false).exp()
}

/// `Π σ(a_k)` alone.
pub fn visibility_single_sided<T: Scalar>(p: [T; 2], tri: &ScreenTriangleValues<T>, s: T) -> T {
    log_visibility(p, tri, s, true).exp()
}

/// `ln V`, evaluated without underflow far from the triangle.
pub fn log_visibility<T: Scalar>(p: [T; 2], tri: &ScreenTriangleValues<T>, s: T, single_sided: bool) -> T {
    let d = edge_distances(p, &tri.xy);
    let som = s / tri.m;
    let mut lp = T::zero();
    let mut ln = T::zero();
    for dk in d {
        let a = dk * som;
        let l = scalar::log_sigmoid(a);
        lp = lp + l;
        ln = ln + (l - a);
    }
    if single_sided {
        lp
    } else {
        scalar::log_add_exp(lp, ln)
    }
}

/// Sharpness of the depth clamp φ.
pub const DEPTH_CLAMP_SHARPNESS: f64 = 200.0;

/// Floor inside the depth spread `u = sqrt(Σ(zᵢ − z̄)² + floor²)`.
pub const DEPTH_SPREAD_FLOOR: f64 = 1e-9;

/// Screen-linear interpolation of the vertex depths, blended toward the vertex
/// mean as the pixel-space area vanishes:
/// `z = (A·N + ε·z̄) / (A² + ε)` with `N = −Σ d_k·z_{k+2}` and `ε = DEGENERATE_AREA²`.
/// Unbounded outside the triangle.
pub fn linear_zdepth<T: Scalar>(p: [T; 2], tri: &ScreenTriangleValues<T>) -> T {
    let d = edge_distances(p, &tri.xy);
    let z = tri.z_view;
    let n = -(d[0] * z[2] + d[1] * z[0] + d[2] * z[1]);
    let a = signed_area(&tri.xy);
    let e = T::lit(DEGENERATE_AREA * DEGENERATE_AREA);
    let mean = (z[0] + z[1] + z[2]) / T::lit(3.0);
    (a * n + e * mean) / (a * a + e)
}

/// `(z̄, u)`: mean vertex depth and the smooth spread `sqrt(Σ(zᵢ − z̄)² + floor²)`.
pub fn depth_spread<T: Scalar>(z: [T; 3]) -> (T, T) {
    let mean = (z[0] + z[1] + z[2]) / T::lit(3.0);
    let f = T::lit(DEPTH_SPREAD_FLOOR);
    let ss = z.iter().fold(f * f, |acc, &zi| acc + (zi - mean) * (zi - mean));
    (mean, ss.sqrt())
}

/// `φ(t) = −1 + (sp(K(t+1)) − sp(K(t−1)))/K` and `φ′(t)`: equals `t` to
/// within `e^{−K(1−|t|)}` on `(−1, 1)`, and stays inside `[−1, 1]`.
pub fn depth_clamp<T: Scalar>(t: T) -> (T, T) {
    let k = T::lit(DEPTH_CLAMP_SHARPNESS);
    let (a, b) = (k * (t + T::one()), k * (t - T::one()));
    let phi = -T::one() + (scalar::softplus(a) - scalar::softplus(b)) / k;
    (phi, scalar::sigmoid(a) - scalar::sigmoid(b))
}

/// Per-pixel depth of a triangle: the interpolated depth of [`linear_zdepth`]
/// pulled smoothly into `z̄ ± u` by `z̄ + u·φ((z − z̄)/u)`. Every depth inside
/// the triangle lies within `0.82·u` of `z̄`, where the clamp is the identity
/// to machine precision; outside, the field can no longer run off along a
/// steep, nearly edge-on plane.
pub fn smooth_zdepth<T: Scalar>(p: [T; 2], tri: &ScreenTriangleValues<T>) -> T {
    let (mean, u) = depth_spread(tri.z_view);
    let z = linear_zdepth(p, tri);
    mean + u * depth_clamp((z - mean) / u).0
}

/// `SoftMax(xᵢ + ln wᵢ)`. Zero weights are lifted to the scalar's log floor.
///
/// # Panics
/// On length mismatch or empty input.
pub fn wsoftmax<T: Scalar>(x: &[T], w: &[T]) -> Vec<T> {
    assert_eq!(x.len(), w.len(), "wsoftmax length mismatch");
    assert!(!x.is_empty(), "wsoftmax of nothing");
    let shifted: Vec<T> = x.iter().zip(w).map(|(&x, &w)| x + w.max(T::log_floor()).ln()).collect();
    crate::autodiff::softmax_values(&shifted)
}

/// `wsoftmax(−x, w)`.
pub fn wsoftmin<T: Scalar>(x: &[T], w: &[T]) -> Vec<T> {
    let neg: Vec<T> = x.iter().map(|&v| -v).collect();
    wsoftmax(&neg, w)
}

/// Depth-blend weights `wsoftmin(o·z, V)` for one pixel.
pub fn smooth_zbuffer<T: Scalar>(depths: &[T], visibilities: &[T], o: T) -> Vec<T> {
    let scaled: Vec<T> = depths.iter().map(|&z| o * z).collect();
    wsoftmin(&scaled, visibilities)
}

/// Smooth minimum of plain values, matching [`Tape::soft_min_value`](crate::autodiff::Tape::soft_min_value).
pub fn soft_min<T: Scalar>(xs: &[T], temperature: T) -> T {
    let scaled: Vec<T> = xs.iter().map(|&x| -temperature * x).collect();
    let w = crate::autodiff::softmax_values(&scaled);
    xs.iter().zip(&w).fold(T::zero(), |acc, (&x, &w)| acc + x * w)
}

/// The two background triangles: corners `(−W, −H)`, `(2W, −H)`, `(2W, 2H)`,
/// `(−W, 2H)` split along one diagonal, at constant `depth`.
pub fn background_triangles<T: Scalar>(width: usize, height: usize, depth: T, s: T, eps: T) -> [ScreenTriangleValues<T>; 2] {
    let (w, h) = (T::lit(width as f64), T::lit(height as f64));
    let c = [[-w, -h], [w + w, -h], [w + w, h + h], [-w, h + h]];
    let make = |xy: [[T; 2]; 3]| {
        let lengths: Vec<T> = (0..3)
            .map(|k| {
                let (a, b) = (xy[k], xy[(k + 1) % 3]);
                let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
                (dx * dx + dy * dy + eps * eps).sqrt()
            })
            .collect();
        ScreenTriangleValues {
            xy,
            z_view: [depth; 3],
            m: soft_min(&lengths, s),
        }
    };
    [make([c[0], c[1], c[2]]), make([c[0], c[2], c[3]])]
}
