//! Acceptance criteria 1 to 9, one PASS/FAIL line each.
//!
//! Runs with its own `main`. Arguments select criteria by substring
//! (`cargo test --release --test acceptance -- c2 c7`). The binary exits
//! non-zero on a failed criterion only when `ACCEPTANCE_STRICT=1`.
mod common;

use std::time::{Duration, Instant};

use common::*;
use nalgebra::{Matrix2, Vector2};
use rand::Rng;
use smoothrast::autodiff::{finite_diff_check, relative_error, Tape, DEFAULT_REL_FLOOR};
use smoothrast::camera::Camera;
use smoothrast::losses::{laplacian_magnitudes, reg_edge_length, reg_laplacian, reg_normal_angle, LossWeights};
use smoothrast::mesh::{apply_params, icosphere, Adjacency, Mesh, ParamMask, ShapeParams, SymmetrySpec, TapeMesh};
use smoothrast::optim::{occlusion_scene, optimize, AdamConfig, Problem, Target};
use smoothrast::renderer::{render, render_image, render_reference, resolve_background_depth, wsoftmax, RenderParams};

struct Verdict {
    pass: bool,
    detail: String,
}

fn params(s: f64, o: f64, bg: f64) -> RenderParams<f64> {
    RenderParams {
        background_depth: Some(bg),
        ..RenderParams::default().with_so(s, o)
    }
}

fn secs(d: Duration) -> f64 {
    d.as_secs_f64()
}

fn bits(v: &[f64]) -> Vec<u64> {
    v.iter().map(|x| x.to_bits()).collect()
}

// ---------------------------------------------------------------- 1

struct GradRun {
    images: Vec<Vec<u64>>,
    grads: Vec<Vec<u64>>,
    numeric: Vec<Vec<u64>>,
}

// Neumaier-compensated sum.
fn accurate_sum(v: impl Iterator<Item = f64>) -> f64 {
    let (mut s, mut c) = (0.0f64, 0.0f64);
    for x in v {
        let t = s + x;
        c += if s.abs() >= x.abs() { (s - t) + x } else { (x - t) + s };
        s = t;
    }
    s + c
}

// Central difference of the pixel sum, differenced pixel by pixel so the
// result is not limited by the resolution of a sum near 10³.
fn central_difference(mesh: &Mesh<f64>, cam: &Camera<f64>, p: &RenderParams<f64>, coord: usize, h: f64) -> f64 {
    let (v, c) = (coord / 3, coord % 3);
    let mut m = mesh.clone();
    m.vertices[v][c] = mesh.vertices[v][c] + h;
    let plus = render_image(&m, cam, p).unwrap().data;
    m.vertices[v][c] = mesh.vertices[v][c] - h;
    let minus = render_image(&m, cam, p).unwrap().data;
    accurate_sum(plus.iter().zip(&minus).map(|(a, b)| a - b)) / (2.0 * h)
}

fn gradient_scenes(seed: u64) -> (Verdict, GradRun) {
    let start = Instant::now();
    let mut r = rng(seed);
    let cam = front_camera(3.0, 50.0, 32, 32);
    let mut errs = Vec::new();
    let mut breaches = Vec::new();
    let mut run = GradRun { images: vec![], grads: vec![], numeric: vec![] };
    for _ in 0..200 {
        let n = r.gen_range(5..=40);
        let s = r.gen_range(5.0..100.0);
        let o = r.gen_range(5.0..100.0);
        let mesh = random_triangles(&mut r, n, 0.9, (-0.6, 0.6), 0.45);
        let p = params(s, o, resolve_background_depth(&mesh, [&cam]));
        let mut t = Tape::new();
        let tm = mesh.to_tape(&mut t, true);
        let img = render(&mut t, &tm, &cam, &p).unwrap();
        let total = t.sum(&img.pixels);
        let g = t.backward(total).unwrap();
        let analytic: Vec<f64> = tm.vertices.iter().flatten().map(|&x| g.wrt(x)).collect();
        let numeric: Vec<f64> = (0..analytic.len()).map(|k| central_difference(&mesh, &cam, &p, k, 1e-5)).collect();
        for (k, (&a, &nu)) in analytic.iter().zip(&numeric).enumerate() {
            let e = relative_error(a, nu, DEFAULT_REL_FLOOR);
            if e >= 1e-3 {
                breaches.push((mesh.clone(), p, k, a));
            }
            errs.push(e);
        }
        run.images.push(bits(&t.values(&img.pixels)));
        run.grads.push(bits(&analytic));
        run.numeric.push(bits(&numeric));
    }
    let elapsed = start.elapsed();
    let max = errs.iter().cloned().fold(0.0, f64::max);
    let med = median(&mut errs);
    let pass = max < 1e-3 && med < 1e-6 && elapsed < Duration::from_secs(300);
    // breaches on derivatives large enough to sit above round-off, redone at a
    // step small enough to resolve the steepest features
    let large: Vec<_> = breaches.iter().filter(|b| b.3.abs() >= 1e-6).collect();
    let fine = large
        .iter()
        .map(|(m, p, k, a)| relative_error(*a, central_difference(m, &cam, p, *k, 1e-7), DEFAULT_REL_FLOOR))
        .fold(0.0, f64::max);
    let detail = format!(
        "{} derivatives, max rel err {max:.2e} (< 1e-3), median {med:.2e} (< 1e-6), {:.1} s (< 300 s); \
         {} at or above 1e-3, {} of them below 1e-6 in magnitude; the other {} agree with h = 1e-7 differences to {fine:.1e}",
        errs.len(),
        secs(elapsed),
        breaches.len(),
        breaches.len() - large.len(),
        large.len(),
    );
    (Verdict { pass, detail }, run)
}

// ---------------------------------------------------------------- 2

fn barycentric(p: [f64; 2], xy: [[f64; 2]; 3]) -> [f64; 3] {
    let m = Matrix2::new(xy[0][0] - xy[2][0], xy[1][0] - xy[2][0], xy[0][1] - xy[2][1], xy[1][1] - xy[2][1]);
    let l = m.try_inverse().unwrap() * Vector2::new(p[0] - xy[2][0], p[1] - xy[2][1]);
    [l.x, l.y, 1.0 - l.x - l.y]
}

// Screen-linear depth of face `f` at pixel centre `p`, via nalgebra's projection.
fn oracle_depth(mesh: &Mesh<f64>, f: usize, cam: &Camera<f64>, p: [f64; 2]) -> f64 {
    let pm = projection_matrix(cam);
    let proj = mesh.faces[f].map(|i| project_matrix(&pm, mesh.vertices[i]));
    let l = barycentric(p, proj.map(|q| q.0));
    (0..3).map(|k| l[k] * proj[k].1).sum()
}

// Depth blend with full coverage: Σ c·e^{−o z} / Σ e^{−o z}.
fn blend(c: &[f64], z: &[f64], o: f64) -> f64 {
    let zmin = z.iter().cloned().fold(f64::INFINITY, f64::min);
    let w: Vec<f64> = z.iter().map(|&zi| (-o * (zi - zmin)).exp()).collect();
    c.iter().zip(&w).map(|(c, w)| c * w).sum::<f64>() / w.iter().sum::<f64>()
}

fn occlusion_sweep() -> Verdict {
    let start = Instant::now();
    let (base, cam) = occlusion_scene::<f64>();
    let (s, o, bg) = (60.0, 20.0, 40.0);
    let p = params(s, o, bg);
    let centre = [16.5, 16.5];
    let px = 16 * cam.width + 16;
    let shift = |d: f64| {
        let mut m = base.clone();
        for v in &mut m.vertices[3..] {
            v[2] += d;
        }
        m
    };
    let shades = |m: &Mesh<f64>| {
        m.faces.iter().map(|f| {
            let [a, b, c] = f.map(|i| m.vertices[i]);
            oracle_shade(a, b, c, cam.eye, &p.lighting)
        })
        .collect::<Vec<_>>()
    };
    let expected = |m: &Mesh<f64>| {
        let c = shades(m);
        let z = [oracle_depth(m, 0, &cam, centre), oracle_depth(m, 1, &cam, centre), bg];
        (blend(&[c[0], c[1], p.background_intensity], &z, o), z[1] - z[0], (c[0] - c[1]).abs())
    };

    let mut max_err: f64 = 0.0;
    let mut compared = 0;
    let mut worst_jump_ratio: f64 = 0.0;
    let mut prev: Option<(f64, f64)> = None;
    for k in 0..51 {
        let d = -0.3 + 0.6 * k as f64 / 50.0;
        let m = shift(d);
        let got = render_image(&m, &cam, &p).unwrap().data[px];
        let mut t = Tape::new();
        let tm = m.to_tape(&mut t, false);
        let (_, buf) = render_reference(&mut t, &tm, &cam, &p).unwrap();
        let v = t.values(buf.visibility_at(px));
        let (want, dz, dc) = expected(&m);
        if v[0] > 0.999 && v[1] > 0.999 {
            max_err = max_err.max((got - want).abs());
            compared += 1;
        }
        if let Some((g0, z0)) = prev {
            let bound = o * dc * (dz - z0).abs() / 3.0;
            worst_jump_ratio = worst_jump_ratio.max((got - g0).abs() / bound);
        }
        prev = Some((got, dz));
    }

    // bisect for the sweep offset where both faces sit at the same depth
    let (mut lo, mut hi) = (-0.3, 0.3);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if expected(&shift(mid)).1 < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let cross = shift(0.5 * (lo + hi));
    let fd = finite_diff_check(
        |t, x| {
            let img = render(t, &tape_mesh(x, &cross.faces), &cam, &p).unwrap();
            img.get(16, 16)
        },
        &flat(&cross),
        1e-5,
    )
    .unwrap();
    let slope: f64 = [11, 14, 17].iter().map(|&i| fd.analytic[i]).sum();
    let h = 1e-6;
    let oracle_slope = {
        let sweep = |d: f64| {
            let mut m = cross.clone();
            for v in &mut m.vertices[3..] {
                v[2] += d;
            }
            expected(&m).0
        };
        (sweep(h) - sweep(-h)) / (2.0 * h)
    };
    let slope_err = relative_error(slope, oracle_slope, DEFAULT_REL_FLOOR);
    let elapsed = start.elapsed();
    let pass = compared > 0
        && max_err < 1e-6
        && worst_jump_ratio <= 1.0
        && fd.max_rel_err < 1e-3
        && slope_err < 1e-4
        && slope.abs() > 1e-3
        && elapsed < Duration::from_secs(60);
    Verdict {
        pass,
        detail: format!(
            "blend err {max_err:.1e} over {compared}/51 samples (< 1e-6), max jump {worst_jump_ratio:.2} of bound, \
             crossing FD rel err {:.1e} (< 1e-3), dI/dz {slope:.4} vs closed form {oracle_slope:.4}, {:.1} s",
            fd.max_rel_err,
            secs(elapsed)
        ),
    }
}

// ---------------------------------------------------------------- 3

fn hard_limit() -> (Verdict, Vec<u64>) {
    let start = Instant::now();
    let mesh: Mesh<f64> = icosphere(2).unwrap();
    let cam = Camera::orbit([0.0; 3], 3.0, 0.35, 0.25, 45f64.to_radians(), 128, 128).unwrap();
    let bg = resolve_background_depth(&mesh, [&cam]);
    let hard = hard_render(&mesh, &cam, &params(200.0, 200.0, bg));
    let grid = [5.0, 25.0, 100.0, 200.0];
    let mut l1 = [[0.0; 4]; 4];
    let mut top = Vec::new();
    let mut frac = 0.0;
    for (i, &s) in grid.iter().enumerate() {
        for (j, &o) in grid.iter().enumerate() {
            let img = render_image(&mesh, &cam, &params(s, o, bg)).unwrap();
            l1[i][j] = img.mean_abs_diff(&hard);
            if i == 3 && j == 3 {
                frac = fraction_within(&img, &hard, 2.0 / 255.0);
                top = bits(&img.data);
            }
        }
    }
    let elapsed = start.elapsed();
    let mut grid_ok = true;
    let mut diag_ok = true;
    for i in 0..4 {
        for j in 0..4 {
            if i + 1 < 4 && l1[i + 1][j] > l1[i][j] {
                grid_ok = false;
            }
            if j + 1 < 4 && l1[i][j + 1] > l1[i][j] {
                grid_ok = false;
            }
        }
        if i + 1 < 4 && l1[i + 1][i + 1] > l1[i][i] {
            diag_ok = false;
        }
    }
    let rows: Vec<String> = l1
        .iter()
        .zip(grid)
        .map(|(row, s)| format!("s={s}: {}", row.map(|v| format!("{v:.5}")).join(" ")))
        .collect();
    let pass = frac >= 0.95 && grid_ok && elapsed < Duration::from_secs(60);
    let detail = format!(
        "{:.1}% within 2/255 at s=o=200 (>= 95%), L1 non-increasing over full grid: {grid_ok}, along s=o: {diag_ok}, \
         {:.1} s; L1 rows (o = 5 25 100 200) [{}]",
        100.0 * frac,
        secs(elapsed),
        rows.join("; ")
    );
    (Verdict { pass, detail }, top)
}

// ---------------------------------------------------------------- 4

fn bleed_through() -> Verdict {
    let cam = front_camera(3.0, 50.0, 16, 16);
    let front = [[-1.0, -1.0, 0.0], [1.0, -1.0, 0.0], [0.0, 1.2, 0.0]];
    let dz = 0.1;
    let k = (3.0 + dz) / 3.0;
    let eye = cam.eye;
    // the rear face has the front face's exact screen footprint
    let rear = front.map(|v: [f64; 3]| [0, 1, 2].map(|c| eye[c] + k * (v[c] - eye[c])));
    let mesh = Mesh::new([front, rear].concat(), vec![[0, 1, 2], [3, 4, 5]]).unwrap();
    let px = 8 * cam.width + 8;
    let mut weights = Vec::new();
    let mut max_err: f64 = 0.0;
    for o in [1.0, 5.0, 25.0, 100.0] {
        let mut t = Tape::new();
        let tm = mesh.to_tape(&mut t, false);
        let (_, buf) = render_reference(&mut t, &tm, &cam, &params(40.0, o, 3.0 + 60.0)).unwrap();
        let w = t.value(buf.weights_at(px)[1]);
        let want = 1.0 / (1.0 + (o * dz).exp());
        max_err = max_err.max((w - want).abs());
        weights.push(w);
    }
    let decreasing = weights.windows(2).all(|p| p[1] < p[0]);
    Verdict {
        pass: decreasing && max_err < 1e-9,
        detail: format!(
            "rear weights {:?} for o = 1 5 25 100, strictly decreasing: {decreasing}, max err vs σ(−o·Δz) {max_err:.1e} (< 1e-9)",
            weights.iter().map(|w| format!("{w:.6e}")).collect::<Vec<_>>()
        ),
    }
}

// ---------------------------------------------------------------- 5

fn wsoftmax_identity() -> Verdict {
    let mut r = rng(55);
    let (mut max_err, mut max_sum): (f64, f64) = (0.0, 0.0);
    for _ in 0..10_000 {
        let n = r.gen_range(1..=16);
        let x: Vec<f64> = (0..n).map(|_| r.gen_range(-30.0..30.0)).collect();
        let w: Vec<f64> = (0..n).map(|_| 10f64.powf(r.gen_range(-5.999..0.0))).collect();
        let got = wsoftmax(&x, &w);
        let y: Vec<f64> = x.iter().zip(&w).map(|(x, w)| x + w.ln()).collect();
        let m = y.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let e: Vec<f64> = y.iter().map(|v| (v - m).exp()).collect();
        let z: f64 = e.iter().sum();
        for (g, e) in got.iter().zip(&e) {
            max_err = max_err.max((g - e / z).abs());
        }
        max_sum = max_sum.max((got.iter().sum::<f64>() - 1.0).abs());
    }
    Verdict {
        pass: max_err < 1e-12 && max_sum < 1e-12,
        detail: format!("10000 samples, max err vs softmax(x + ln w) {max_err:.1e}, max |Σ − 1| {max_sum:.1e} (both < 1e-12)"),
    }
}

// ---------------------------------------------------------------- 6

fn partition_of_unity() -> Verdict {
    let mut scenes: Vec<(Mesh<f64>, Camera<f64>, RenderParams<f64>)> = Vec::new();
    let mut r = rng(66);
    let cam = front_camera(3.0, 50.0, 24, 24);
    for _ in 0..12 {
        let n = r.gen_range(5..=40);
        let (s, o) = (r.gen_range(1.0..200.0), r.gen_range(1.0..200.0));
        let mesh = random_triangles(&mut r, n, 0.9, (-0.6, 0.6), 0.45);
        let bg = resolve_background_depth(&mesh, [&cam]);
        scenes.push((mesh, cam.clone(), params(s, o, bg)));
    }
    let (occ, occ_cam) = occlusion_scene::<f64>();
    scenes.push((occ, occ_cam, params(25.0, 25.0, 40.0)));
    let sphere: Mesh<f64> = icosphere(1).unwrap();
    let orbit = Camera::orbit([0.0; 3], 3.0, 0.35, 0.25, 45f64.to_radians(), 24, 24).unwrap();
    for (s, o) in [(5.0, 5.0), (200.0, 200.0)] {
        let bg = resolve_background_depth(&sphere, [&orbit]);
        scenes.push((sphere.clone(), orbit.clone(), params(s, o, bg)));
    }
    let mut max_dev: f64 = 0.0;
    let mut pixels = 0;
    for (mesh, cam, p) in &scenes {
        let mut t = Tape::new();
        let tm = mesh.to_tape(&mut t, false);
        let (_, buf) = render_reference(&mut t, &tm, cam, p).unwrap();
        for px in 0..cam.pixel_count() {
            let sum: f64 = t.values(buf.weights_at(px)).iter().sum();
            max_dev = max_dev.max((sum - 1.0).abs());
            pixels += 1;
        }
    }
    let mut p = RenderParams::default();
    p.background_intensity = 0.4375;
    let empty = render_image(&Mesh::empty(), &front_camera(3.0, 50.0, 17, 9), &p).unwrap();
    let exact = empty.data.iter().all(|&v| v == p.background_intensity);
    Verdict {
        pass: max_dev < 1e-9 && exact,
        detail: format!(
            "{} scenes, {pixels} pixels, max |Σ zw − 1| {max_dev:.1e} (< 1e-9), empty scene exactly background: {exact}",
            scenes.len()
        ),
    }
}

// ---------------------------------------------------------------- 7

#[derive(Clone, Copy, Debug)]
enum Reg {
    Normal,
    Edge,
    Laplacian,
}

fn record(t: &mut Tape<f64>, tm: &TapeMesh, adj: &Adjacency, which: Reg) -> smoothrast::autodiff::NodeRef {
    match which {
        Reg::Normal => reg_normal_angle(t, tm, adj),
        Reg::Edge => reg_edge_length(t, tm, adj),
        Reg::Laplacian => reg_laplacian(t, tm, adj).unwrap(),
    }
}

fn reg_value(mesh: &Mesh<f64>, which: Reg) -> f64 {
    let adj = Adjacency::new(mesh);
    let mut t = Tape::new();
    let tm = mesh.to_tape(&mut t, false);
    let n = record(&mut t, &tm, &adj, which);
    t.value(n)
}

fn regularizers() -> Verdict {
    let grid = flat_grid(5);
    let flat_normal = reg_value(&grid, Reg::Normal);

    let h = 3f64.sqrt() / 2.0;
    let tri = Mesh::new(
        vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.5, h, 0.0], [1.5, h, 0.0]],
        vec![[0, 1, 2], [1, 3, 2]],
    )
    .unwrap();
    let equilateral = reg_value(&tri, Reg::Edge);

    // every interior vertex of the grid sits at the centroid of its six neighbours
    let adj = Adjacency::new(&grid);
    let mags = laplacian_magnitudes(&grid, &adj).unwrap();
    let interior = |i: usize| {
        let (row, col) = (i / 6, i % 6);
        (1..5).contains(&row) && (1..5).contains(&col)
    };
    let centroid = (0..mags.len()).filter(|&i| interior(i)).map(|i| mags[i]).fold(0.0, f64::max);

    let mut r = rng(77);
    let mut rigid: f64 = 0.0;
    let mut fd: f64 = 0.0;
    for k in 0..10 {
        let m = jittered_icosahedron(&mut r, 0.2);
        let (rot, t) = random_rigid(&mut r);
        let moved = apply_rigid(&m, &rot, &t);
        let adj = Adjacency::new(&m);
        for which in [Reg::Normal, Reg::Edge, Reg::Laplacian] {
            rigid = rigid.max((reg_value(&m, which) - reg_value(&moved, which)).abs());
            if k < 5 {
                let rep = finite_diff_check(|t, x| record(t, &tape_mesh(x, &m.faces), &adj, which), &flat(&m), 1e-5).unwrap();
                fd = fd.max(rep.max_rel_err);
            }
        }
    }
    let eps = 1e-9;
    let pass = flat_normal == 0.0 && equilateral < eps && centroid < eps && rigid < 1e-9 && fd < 1e-5;
    Verdict {
        pass,
        detail: format!(
            "flat normal {flat_normal:.1e} (= 0), equilateral edge {equilateral:.1e} (< {eps:.0e}), \
             centroid Laplacian {centroid:.1e} (< {eps:.0e}), rigid drift {rigid:.1e} (< 1e-9), FD rel err {fd:.1e} (< 1e-5)"
        ),
    }
}

// ---------------------------------------------------------------- 8

struct RecoveryRun {
    trace: String,
    mesh: Vec<u64>,
    images: Vec<Vec<u64>>,
}

const TRUE_SHIFT: [f64; 3] = [0.2, 0.0, 0.0];

// Outward bump around the top pole, even in x and z.
fn bump(v: [f64; 3]) -> [f64; 3] {
    let d2 = v[0] * v[0] + (v[1] - 1.0) * (v[1] - 1.0) + v[2] * v[2];
    let a = 0.12 * (-d2 / 0.35).exp();
    v.map(|c| c * a)
}

fn recovery(iterations: usize) -> (Verdict, RecoveryRun) {
    let start = Instant::now();
    let base: Mesh<f64> = icosphere(2).unwrap();
    let truth = base.map_vertices(|v| {
        let b = bump(v);
        [0, 1, 2].map(|k| v[k] + b[k] + TRUE_SHIFT[k])
    });
    let cams: Vec<Camera<f64>> = (0..4)
        .map(|k| {
            let az = (30.0 + 90.0 * k as f64).to_radians();
            Camera::orbit([0.0; 3], 3.5, az, 20f64.to_radians(), 45f64.to_radians(), 64, 64).unwrap()
        })
        .collect();
    let bg = resolve_background_depth(&truth, cams.iter());
    let rp = RenderParams {
        background_depth: Some(bg),
        ..RenderParams::default()
    };
    let targets: Vec<Target<f64>> = cams
        .iter()
        .map(|c| Target {
            image: render_image(&truth, c, &rp).unwrap(),
            camera: c.clone(),
        })
        .collect();
    let problem = Problem {
        base: &base,
        targets: &targets,
        render: rp,
        weights: LossWeights::default(),
        mask: ParamMask::default(),
    };
    let cfg = AdamConfig {
        max_iterations: iterations,
        ..AdamConfig::default()
    };
    let symmetry = SymmetrySpec::quarters(&base, true, true).unwrap();
    let init = ShapeParams::zeros(&base, Some(symmetry), 0.3);
    let mut vertex_err = Vec::with_capacity(iterations);
    let out = optimize(&problem, &cfg, init, |p| {
        let m = apply_params(&base, p.params).unwrap();
        let e: f64 = m
            .vertices
            .iter()
            .zip(&truth.vertices)
            .map(|(a, b)| ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt())
            .sum();
        vertex_err.push(e / m.vertices.len() as f64);
    })
    .unwrap();
    let elapsed = start.elapsed();

    let t = out.params.translation;
    let shift_err = (0..3).map(|k| (t[k] - TRUE_SHIFT[k]).abs()).fold(0.0, f64::max);
    let initial = out.trace.reports[0].total;
    let ratio = out.final_report.total / initial;
    let windows: Vec<f64> = vertex_err.chunks(100).map(|c| c.iter().sum::<f64>() / c.len() as f64).collect();
    let stall = windows.windows(2).position(|w| w[1] >= w[0]);
    let monotone = stall.is_none();
    let rolling_ok = (100..vertex_err.len()).all(|k| vertex_err[k] < vertex_err[k - 100]);
    let final_mesh = apply_params(&base, &out.params).unwrap();
    let run = RecoveryRun {
        trace: out.trace.to_csv(),
        mesh: bits(&final_mesh.vertices.concat()),
        images: cams
            .iter()
            .map(|c| bits(&render_image(&final_mesh, c, &rp).unwrap().data))
            .collect(),
    };
    let pass = shift_err < 0.02 && ratio < 0.2 && monotone && elapsed < Duration::from_secs(1800);
    let detail = format!(
        "{iterations} iterations, translation [{:.4}, {:.4}, {:.4}] max err {shift_err:.4} (< 0.02), \
         loss {initial:.4e} -> {:.4e} = {:.1}% (< 20%), 100-iteration window means of vertex error decreasing: {monotone} \
         ({:.4} -> {:.4}{}), every e[k] < e[k-100]: {rolling_ok}, {:.1} s (< 1800 s)",
        t[0],
        t[1],
        t[2],
        out.final_report.total,
        100.0 * ratio,
        windows.first().copied().unwrap_or(f64::NAN),
        windows.last().copied().unwrap_or(f64::NAN),
        stall.map_or(String::new(), |i| format!(
            "; window {} = {:.5} after {:.5}; means {:?}",
            i + 1,
            windows[i + 1],
            windows[i],
            windows.iter().map(|w| (w * 1e5).round() / 1e5).collect::<Vec<_>>()
        )),
        secs(elapsed)
    );
    (Verdict { pass, detail }, run)
}

// ---------------------------------------------------------------- 9

fn determinism() -> Verdict {
    let (_, a) = gradient_scenes(1);
    let (_, b) = gradient_scenes(1);
    let c1 = a.images == b.images && a.grads == b.grads && a.numeric == b.numeric;
    let (_, a) = hard_limit();
    let (_, b) = hard_limit();
    let c3 = a == b;
    let (_, a) = recovery(RECOVERY_ITERATIONS);
    let (_, b) = recovery(RECOVERY_ITERATIONS);
    let c8 = a.trace == b.trace && a.mesh == b.mesh && a.images == b.images;
    Verdict {
        pass: c1 && c3 && c8,
        detail: format!("bit-identical reruns: criterion 1 {c1}, criterion 3 {c3}, criterion 8 {c8}"),
    }
}

const RECOVERY_ITERATIONS: usize = 2000;

fn main() {
    let filters: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let criteria: [(&str, &str, fn() -> Verdict); 9] = [
        ("c1", "gradient correctness", || gradient_scenes(1).0),
        ("c2", "occlusion smoothness", occlusion_sweep),
        ("c3", "hard-rasterizer limit", || hard_limit().0),
        ("c4", "opacity bleed-through", bleed_through),
        ("c5", "wsoftmax identity", wsoftmax_identity),
        ("c6", "partition of unity", partition_of_unity),
        ("c7", "regularizer suite", regularizers),
        ("c8", "inverse-rendering recovery", || recovery(RECOVERY_ITERATIONS).0),
        ("c9", "determinism", determinism),
    ];
    if std::env::args().any(|a| a == "--list") {
        for (id, name, _) in &criteria {
            println!("{id} {name}: test");
        }
        return;
    }
    let mut failed = 0;
    let mut ran = 0;
    for (id, name, run) in &criteria {
        if !filters.is_empty() && !filters.iter().any(|f| id.contains(f.as_str()) || name.contains(f.as_str())) {
            continue;
        }
        let v = run();
        ran += 1;
        if !v.pass {
            failed += 1;
        }
        println!("[{}] {id} {name}: {}", if v.pass { "PASS" } else { "FAIL" }, v.detail);
    }
    println!("acceptance: {} of {ran} criteria passed", ran - failed);
    if failed > 0 && std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| v == "1") {
        std::process::exit(1);
    }
}
