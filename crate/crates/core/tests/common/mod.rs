//! Shared fixtures and independent oracles for the integration tests.
#![allow(dead_code)]

use nalgebra::{Matrix3x4, Point3, Vector3, Vector4};
use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use smoothrast::autodiff::{NodeRef, Tape};
use smoothrast::camera::Camera;
use smoothrast::mesh::{Mesh, TapeMesh};
use smoothrast::renderer::{render, Image, Lighting, RenderParams};

pub type Rng64 = Xoshiro256PlusPlus;

pub fn rng(seed: u64) -> Rng64 {
    Xoshiro256PlusPlus::seed_from_u64(seed)
}

/// Camera at `(0, 0, −dist)` looking at the origin.
pub fn front_camera(dist: f64, fov_deg: f64, w: usize, h: usize) -> Camera<f64> {
    Camera::new(
        [0.0, 0.0, -dist],
        [0.0, 0.0, 0.0],
        [0.0, 1.0, 0.0],
        fov_deg.to_radians(),
        w,
        h,
        0.01,
    )
    .unwrap()
}

/// Flattened vertex coordinates.
pub fn flat(mesh: &Mesh<f64>) -> Vec<f64> {
    mesh.vertices.iter().flatten().copied().collect()
}

pub fn tape_mesh(x: &[NodeRef], faces: &[[usize; 3]]) -> TapeMesh {
    TapeMesh {
        vertices: x.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect(),
        faces: faces.to_vec(),
    }
}

/// Records the pixel-sum of a render with vertex leaves `x`.
pub fn pixel_sum(t: &mut Tape<f64>, x: &[NodeRef], faces: &[[usize; 3]], cam: &Camera<f64>, p: &RenderParams<f64>) -> NodeRef {
    let img = render(t, &tape_mesh(x, faces), cam, p).unwrap();
    t.sum(&img.pixels)
}

/// Random triangles in a slab in front of `front_camera(dist, …)`.
pub fn random_triangles(r: &mut Rng64, n: usize, spread: f64, depth: (f64, f64), size: f64) -> Mesh<f64> {
    let mut vertices = Vec::with_capacity(3 * n);
    let mut faces = Vec::with_capacity(n);
    for t in 0..n {
        let c = [
            r.gen_range(-spread..spread),
            r.gen_range(-spread..spread),
            r.gen_range(depth.0..depth.1),
        ];
        for _ in 0..3 {
            vertices.push([
                c[0] + r.gen_range(-size..size),
                c[1] + r.gen_range(-size..size),
                c[2] + r.gen_range(-0.3 * size..0.3 * size),
            ]);
        }
        faces.push([3 * t, 3 * t + 1, 3 * t + 2]);
    }
    Mesh::new(vertices, faces).unwrap()
}

/// Homogeneous projection matrix `K·[R | −R·eye]` built with nalgebra's
/// left-handed look-at.
pub fn projection_matrix(cam: &Camera<f64>) -> Matrix3x4<f64> {
    let eye = Point3::from(cam.eye);
    let target = Point3::from(cam.look_at);
    let view = nalgebra::Matrix4::look_at_lh(&eye, &target, &Vector3::from(cam.up));
    let f = (cam.height as f64 / 2.0) / (cam.fov_y / 2.0).tan();
    let k = Matrix3x4::new(
        f,
        0.0,
        cam.width as f64 / 2.0,
        0.0,
        0.0,
        -f,
        cam.height as f64 / 2.0,
        0.0,
        0.0,
        0.0,
        1.0,
        0.0,
    );
    k * view
}

pub fn project_matrix(m: &Matrix3x4<f64>, p: [f64; 3]) -> ([f64; 2], f64) {
    let q = m * Vector4::new(p[0], p[1], p[2], 1.0);
    ([q[0] / q[2], q[1] / q[2]], q[2])
}

fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

/// Flat Blinn-Phong shade, double-sided, with the saturating clamp
/// `(sp(32) − sp(32(1−x)))/sp(32)`.
pub fn oracle_shade(a: [f64; 3], b: [f64; 3], c: [f64; 3], eye: [f64; 3], l: &Lighting<f64>) -> f64 {
    let (a, b, c) = (Vector3::from(a), Vector3::from(b), Vector3::from(c));
    let n = (b - a).cross(&(c - a)).normalize();
    let centroid = (a + b + c) / 3.0;
    let v = (Vector3::from(eye) - centroid).normalize();
    let lv = Vector3::from(l.light_dir);
    let h = (lv + v).normalize();
    let raw = l.k_ambient + l.k_diffuse * n.dot(&lv).abs() + l.k_specular * n.dot(&h).abs().powf(l.shininess);
    (softplus(32.0) - softplus(32.0 * (1.0 - raw))) / softplus(32.0)
}

/// Discrete z-buffer: each pixel centre takes the flat shade of the nearest
/// covering face (perspective-correct depth), or the background.
pub fn hard_render(mesh: &Mesh<f64>, cam: &Camera<f64>, p: &RenderParams<f64>) -> Image<f64> {
    let pm = projection_matrix(cam);
    let proj: Vec<([f64; 2], f64)> = mesh.vertices.iter().map(|&v| project_matrix(&pm, v)).collect();
    let shades: Vec<f64> = mesh
        .faces
        .iter()
        .map(|f| oracle_shade(mesh.vertices[f[0]], mesh.vertices[f[1]], mesh.vertices[f[2]], cam.eye, &p.lighting))
        .collect();
    let mut depth = vec![f64::INFINITY; cam.pixel_count()];
    let mut img = Image::filled(cam.width, cam.height, p.background_intensity);
    for (fi, f) in mesh.faces.iter().enumerate() {
        let q = f.map(|i| proj[i].0);
        let z = f.map(|i| proj[i].1);
        let area = (q[1][0] - q[0][0]) * (q[2][1] - q[0][1]) - (q[2][0] - q[0][0]) * (q[1][1] - q[0][1]);
        if area.abs() < 1e-12 {
            continue;
        }
        let lo_x = q.iter().map(|v| v[0]).fold(f64::INFINITY, f64::min).floor().max(0.0) as usize;
        let hi_x = (q.iter().map(|v| v[0]).fold(f64::NEG_INFINITY, f64::max).ceil().max(0.0) as usize).min(cam.width);
        let lo_y = q.iter().map(|v| v[1]).fold(f64::INFINITY, f64::min).floor().max(0.0) as usize;
        let hi_y = (q.iter().map(|v| v[1]).fold(f64::NEG_INFINITY, f64::max).ceil().max(0.0) as usize).min(cam.height);
        for y in lo_y..hi_y {
            for x in lo_x..hi_x {
                let (px, py) = (x as f64 + 0.5, y as f64 + 0.5);
                let lam: Vec<f64> = (0..3)
                    .map(|i| {
                        let (b, c) = (q[(i + 1) % 3], q[(i + 2) % 3]);
                        ((b[0] - px) * (c[1] - py) - (c[0] - px) * (b[1] - py)) / area
                    })
                    .collect();
                if lam.iter().any(|&l| l < 0.0) {
                    continue;
                }
                let inv_z: f64 = (0..3).map(|i| lam[i] / z[i]).sum();
                let d = 1.0 / inv_z;
                let k = y * cam.width + x;
                if d < depth[k] {
                    depth[k] = d;
                    img.data[k] = shades[fi];
                }
            }
        }
    }
    img
}

/// Fraction of pixels whose values differ by at most `tol`.
pub fn fraction_within(a: &Image<f64>, b: &Image<f64>, tol: f64) -> f64 {
    let ok = a.data.iter().zip(&b.data).filter(|(x, y)| (*x - *y).abs() <= tol).count();
    ok as f64 / a.data.len() as f64
}

pub fn median(v: &mut [f64]) -> f64 {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// `n × n` grid of unit squares in the `z = 0` plane, two triangles per cell.
pub fn flat_grid(n: usize) -> Mesh<f64> {
    let idx = |i: usize, j: usize| i * (n + 1) + j;
    let vertices = (0..=n)
        .flat_map(|i| (0..=n).map(move |j| [j as f64, i as f64, 0.0]))
        .collect();
    let faces = (0..n)
        .flat_map(|i| (0..n).flat_map(move |j| [[idx(i, j), idx(i, j + 1), idx(i + 1, j + 1)], [idx(i, j), idx(i + 1, j + 1), idx(i + 1, j)]]))
        .collect();
    Mesh::new(vertices, faces).unwrap()
}

/// Random rotation (unit quaternion) and translation.
pub fn random_rigid(r: &mut Rng64) -> (nalgebra::Rotation3<f64>, Vector3<f64>) {
    let q = nalgebra::UnitQuaternion::from_quaternion(nalgebra::Quaternion::new(
        r.gen_range(-1.0..1.0),
        r.gen_range(-1.0..1.0),
        r.gen_range(-1.0..1.0),
        r.gen_range(-1.0..1.0),
    ));
    let t = Vector3::new(r.gen_range(-3.0..3.0), r.gen_range(-3.0..3.0), r.gen_range(-3.0..3.0));
    (q.to_rotation_matrix(), t)
}

pub fn apply_rigid(mesh: &Mesh<f64>, rot: &nalgebra::Rotation3<f64>, t: &Vector3<f64>) -> Mesh<f64> {
    mesh.map_vertices(|v| {
        let p = rot * Vector3::from(v) + t;
        [p.x, p.y, p.z]
    })
}

/// Level-0 icosphere with every vertex jittered by up to `amount`.
pub fn jittered_icosahedron(r: &mut Rng64, amount: f64) -> Mesh<f64> {
    let base: Mesh<f64> = smoothrast::mesh::icosphere(0).unwrap();
    let verts = base
        .vertices
        .iter()
        .map(|v| v.map(|c| c + r.gen_range(-amount..amount)))
        .collect();
    Mesh::new(verts, base.faces.clone()).unwrap()
}
